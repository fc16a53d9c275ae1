"""Grid-world delivery robot simulator: shortest-path planning, RFID
relocalization, a binary obstacle detector and Monte Carlo sweeps."""

from .errors import *  # noqa: F401,F403
from .mapmodel import INF, CellCoord, GridMap, VectorGraph, grid_to_graph, locate_vertex
from .mission import MissionLog, Outcome, SimConfig, linear_speed, on_detection, run_mission, step
from .planner import GridCount, Path, dijkstra, grid_count, reverse_path, shortest_path
from .rfid import NavDecision, ReadModel, TagCode, TagPlacement, attempt_read, decode, encode, relocalize
from .robot import Pose, RobotState
from .scenario import Scenario, load_scenario, save_scenario

__version__ = "0.1.0"
