"""Obstacle detection: CNN layer arithmetic, box-regression loss, and the
binary occupancy sensor the planner consumes.

No network is trained or run here.  The geometry and loss helpers are plain
functions; :func:`detect` reduces the detector to a Bernoulli channel with a
fixed accuracy.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import BadBinCount, ConfigError, Degenerate, EmptyLog
from .mapmodel import CellCoord

DETECTOR_ACCURACY = 0.8375


@dataclass(frozen=True)
class LayerGeom:
    input_size: int
    kernel: int
    stride: int = 1
    pad: int = 0
    dilation: int = 1

    def __post_init__(self):
        if self.input_size < 1 or self.kernel < 1 or self.stride < 1 or self.dilation < 1:
            raise ConfigError(f"invalid layer geometry {self}")
        if self.pad < 0:
            raise ConfigError("pad must be non-negative")
        if self.kernel > self.input_size + 2 * self.pad:
            raise ConfigError(f"kernel {self.kernel} larger than padded input")


def conv_output_size(g: LayerGeom) -> int:
    """Floor-mode convolution output size, dilation included."""
    span = g.dilation * (g.kernel - 1) + 1
    out = (g.input_size + 2 * g.pad - span) // g.stride + 1
    if out < 1:
        raise Degenerate(f"convolution output {out} < 1 for {g}")
    return out


def pool_output_size(g: LayerGeom) -> int:
    """Ceil-mode pooling output size; dilation is ignored."""
    num = g.input_size + 2 * g.pad - g.kernel
    out = -(-num // g.stride) + 1
    if out < 1:
        raise Degenerate(f"pooling output {out} < 1 for {g}")
    return out


def roi_bin_shapes(roi_h: int, roi_w: int, H: int, W: int) -> list[list[tuple[int, int]]]:
    """Split an ``roi_h x roi_w`` region into an ``H x W`` grid of bins.

    The first ``extent % bins`` bins along an axis get the rounded-up size,
    the rest the rounded-down size.
    """
    if roi_h < 1 or roi_w < 1 or not 1 <= H <= roi_h or not 1 <= W <= roi_w:
        raise BadBinCount(f"cannot split {roi_h}x{roi_w} into {H}x{W} bins")
    heights = _split(roi_h, H)
    widths = _split(roi_w, W)
    return [[(h, w) for w in widths] for h in heights]


def _split(extent: int, bins: int) -> list[int]:
    q, r = divmod(extent, bins)
    return [q + 1] * r + [q] * (bins - r)


@dataclass(frozen=True)
class AnchorSpec:
    scales: tuple = (128, 256, 512)
    ratios: tuple = ((1, 1), (1, 2), (2, 1))

    @property
    def k(self) -> int:
        return len(self.scales) * len(self.ratios)


def generate_anchors(spec: AnchorSpec = AnchorSpec()) -> list[tuple[float, float]]:
    """Anchor ``(width, height)`` pairs; ratio ``a:b`` is width:height and area is scale**2."""
    boxes = []
    for s in spec.scales:
        for a, b in spec.ratios:
            boxes.append((s * math.sqrt(a / b), s * math.sqrt(b / a)))
    return boxes


def smooth_l1(x: float) -> float:
    ax = abs(x)
    if ax < 1:
        return 0.5 * x * x
    return ax - 0.5


def smooth_l1_grad(x: float) -> float:
    if abs(x) < 1:
        return x
    return math.copysign(1.0, x)


BOX_KEYS = ("x", "y", "w", "h")


@dataclass(frozen=True)
class BoxDelta:
    t: tuple
    v: tuple

    def __post_init__(self):
        if len(self.t) != 4 or len(self.v) != 4:
            raise ConfigError("box deltas need exactly four (x, y, w, h) components")
        if not all(math.isfinite(z) for z in (*self.t, *self.v)):
            raise ConfigError("box deltas must be finite")


def loc_loss(d: BoxDelta) -> float:
    """Localisation loss: smooth-L1 summed over x, y, w, h."""
    return sum(smooth_l1(ti - vi) for ti, vi in zip(d.t, d.v))


@dataclass(frozen=True)
class DetectorModel:
    """Binary occupancy sensor.

    With ``tpr``/``fpr`` unset the channel is symmetric: the true state is
    reported with probability ``accuracy``.
    """

    accuracy: float = DETECTOR_ACCURACY
    rng_seed: int = 0
    tpr: float | None = None
    fpr: float | None = None

    def __post_init__(self):
        for p in (self.accuracy, self.tpr, self.fpr):
            if p is not None and not 0.0 <= p <= 1.0:
                raise ConfigError(f"detector probabilities must be in [0, 1], got {p}")

    def p_report_occupied(self, truth_occupied: bool) -> float:
        if truth_occupied:
            return self.accuracy if self.tpr is None else self.tpr
        return 1.0 - self.accuracy if self.fpr is None else self.fpr


@dataclass(frozen=True)
class DetectionEvent:
    cell: CellCoord | None
    observed_occupied: bool
    truth_occupied: bool
    time: float = 0.0

    @property
    def correct(self) -> bool:
        return self.observed_occupied == self.truth_occupied


def detect(truth_occupied: bool, model: DetectorModel, rng, cell=None, time: float = 0.0) -> DetectionEvent:
    observed = rng.random() < model.p_report_occupied(truth_occupied)
    return DetectionEvent(cell, bool(observed), bool(truth_occupied), float(time))


@dataclass(frozen=True)
class DetectionMetrics:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def precision(self) -> float | None:
        pos = self.tp + self.fp
        return self.tp / pos if pos else None

    @property
    def recall(self) -> float | None:
        pos = self.tp + self.fn
        return self.tp / pos if pos else None

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total


def compute_metrics(events: Iterable[DetectionEvent]) -> DetectionMetrics:
    tp = fp = fn = tn = 0
    for e in events:
        if e.observed_occupied:
            if e.truth_occupied:
                tp += 1
            else:
                fp += 1
        elif e.truth_occupied:
            fn += 1
        else:
            tn += 1
    if tp + fp + fn + tn == 0:
        raise EmptyLog("no detection events")
    return DetectionMetrics(tp, fp, fn, tn)


DETECTION_CSV_HEADER = ("time_s", "row", "col", "observed", "truth")


def write_detection_csv(events: Sequence[DetectionEvent], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(DETECTION_CSV_HEADER)
    for e in events:
        r, c = e.cell if e.cell is not None else ("", "")
        w.writerow([repr(e.time), r, c, int(e.observed_occupied), int(e.truth_occupied)])


def read_detection_csv(fh) -> list[DetectionEvent]:
    out = []
    for row in csv.DictReader(fh):
        cell = CellCoord(int(row["row"]), int(row["col"])) if row["row"] != "" else None
        out.append(DetectionEvent(cell, row["observed"] == "1", row["truth"] == "1", float(row["time_s"])))
    return out


# VGG16 conv1-conv5 at 224 px: (kind, input, kernel, stride, pad, dilation)
VGG16_LAYERS = [
    ("conv", 224, 3, 1, 1, 1), ("conv", 224, 3, 1, 1, 1), ("pool", 224, 2, 2, 0, 1),
    ("conv", 112, 3, 1, 1, 1), ("conv", 112, 3, 1, 1, 1), ("pool", 112, 2, 2, 0, 1),
    ("conv", 56, 3, 1, 1, 1), ("conv", 56, 3, 1, 1, 1), ("conv", 56, 3, 1, 1, 1), ("pool", 56, 2, 2, 0, 1),
    ("conv", 28, 3, 1, 1, 1), ("conv", 28, 3, 1, 1, 1), ("conv", 28, 3, 1, 1, 1), ("pool", 28, 2, 2, 0, 1),
    ("conv", 14, 3, 1, 1, 1), ("conv", 14, 3, 1, 1, 1), ("conv", 14, 3, 1, 1, 1), ("pool", 14, 2, 2, 0, 1),
]


def layer_table(rows) -> list[dict]:
    """Evaluate ``(kind, input, kernel, stride, pad, dilation)`` rows."""
    out = []
    for kind, inp, k, s, p, d in rows:
        g = LayerGeom(int(inp), int(k), int(s), int(p), int(d))
        if kind == "conv":
            size = conv_output_size(g)
        elif kind == "pool":
            size = pool_output_size(g)
        else:
            raise ConfigError(f"layer kind must be conv or pool, got {kind!r}")
        out.append(dict(kind=kind, input=g.input_size, kernel=g.kernel, stride=g.stride,
                        pad=g.pad, dilation=g.dilation, output=size))
    return out
