"""Success-rate metrics for tracklets against ground truth.

For every frame the overlap value is the IoU of the predicted and ground
truth boxes, with two conventions: a frame whose ground truth is absent
scores 0 regardless of the prediction, and a missing prediction against a
present ground truth also scores 0.

The success rate at threshold theta is the fraction of frames whose
overlap is strictly greater than theta.  The summary score is the mean
success rate over an even grid of thresholds, 0 to 1 inclusive, 21 points
by default.  Under the strict inequality a perfect track scores 20/21
(about 95.24 percent), because no overlap can exceed the final threshold
of 1.0.

Scores are kept as fractions in [0, 1] in the library; the CLI formats
them as percentages with one decimal.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _backend as kernels
from .errors import DomainError, InputFormatError
from .tracklet import Tracklet


def default_thresholds(count: int = 21) -> np.ndarray:
    """Evenly spaced overlap thresholds from 0 to 1 inclusive."""
    if count < 2:
        raise DomainError("threshold grid needs at least 2 points")
    grid = np.arange(count, dtype=np.float64) / (count - 1)
    grid.flags.writeable = False
    return grid


DEFAULT_THRESHOLDS = default_thresholds()


@dataclass(frozen=True)
class OverlapSeries:
    """Per-frame overlap values of one sequence, each in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if arr.ndim != 1:
            raise DomainError("overlap values must form a 1-D array")
        if arr.size and (not np.isfinite(arr).all()
                         or float(arr.min()) < 0.0 or float(arr.max()) > 1.0):
            raise DomainError("overlap values must lie within [0, 1]")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def frame_count(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class SuccessCurve:
    """Success rate per threshold; rates never increase along the grid."""

    thresholds: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        thresholds = np.ascontiguousarray(np.asarray(self.thresholds, dtype=np.float64))
        rates = np.ascontiguousarray(np.asarray(self.rates, dtype=np.float64))
        if thresholds.shape != rates.shape or thresholds.ndim != 1:
            raise DomainError("curve thresholds and rates must match in length")
        thresholds.flags.writeable = False
        rates.flags.writeable = False
        object.__setattr__(self, "thresholds", thresholds)
        object.__setattr__(self, "rates", rates)

    def csv_text(self) -> str:
        from .formats import format_float

        lines = ["theta,sr"]
        lines.extend(
            f"{format_float(t)},{format_float(r)}"
            for t, r in zip(self.thresholds, self.rates)
        )
        return "\n".join(lines) + "\n"


def overlap_series(pred: Tracklet, gt: Tracklet) -> OverlapSeries:
    """Frame-by-frame overlap of a prediction against ground truth."""
    if len(pred) != len(gt):
        raise DomainError(
            f"length mismatch: prediction {len(pred)}, ground truth {len(gt)}"
        )
    for name, track in (("prediction", pred), ("ground truth", gt)):
        pres = track.present
        if pres.any() and (track.xywh[pres, 2:4] <= 0).any():
            raise DomainError(f"{name} has a box with non-positive size")
    values = kernels.overlap_values(pred.xywh, pred._present, gt.xywh, gt._present)
    return OverlapSeries(values)


def _check_thresholds(thresholds) -> np.ndarray:
    if thresholds is None:
        return DEFAULT_THRESHOLDS
    grid = np.ascontiguousarray(np.asarray(thresholds, dtype=np.float64))
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("threshold grid must be a non-empty 1-D array")
    if (np.diff(grid) <= 0).any():
        raise DomainError("threshold grid must be strictly increasing")
    if float(grid[0]) < 0.0 or float(grid[-1]) > 1.0:
        raise DomainError("threshold grid must lie within [0, 1]")
    return grid


def success_rate(series: OverlapSeries, theta: float) -> float:
    """Fraction of frames with overlap strictly greater than theta."""
    if series.frame_count == 0:
        raise DomainError("success rate undefined for an empty series")
    grid = np.asarray([float(theta)], dtype=np.float64)
    return float(kernels.success_rates(series.values, grid)[0])


def success_curve(series: OverlapSeries, thresholds=None) -> SuccessCurve:
    """Success rates over a threshold grid (default 21 points)."""
    if series.frame_count == 0:
        raise DomainError("success curve undefined for an empty series")
    grid = _check_thresholds(thresholds)
    rates = kernels.success_rates(series.values, grid)
    return SuccessCurve(grid, rates)


def auc(series: OverlapSeries, thresholds=None) -> float:
    """Mean success rate over the threshold grid, as a fraction."""
    curve = success_curve(series, thresholds)
    return kernels.sequential_sum(curve.rates) / curve.rates.size


def mean_curve(curves) -> SuccessCurve:
    """Pointwise mean of several curves over one shared grid."""
    curves = list(curves)
    if not curves:
        raise DomainError("cannot average zero curves")
    grid = curves[0].thresholds
    for curve in curves[1:]:
        if not np.array_equal(curve.thresholds, grid):
            raise DomainError("curves use different threshold grids")
    rates = np.zeros(grid.size, dtype=np.float64)
    for curve in curves:
        rates = rates + curve.rates
    return SuccessCurve(grid, rates / len(curves))


@dataclass(frozen=True)
class EvalReport:
    """Dataset evaluation: per-sequence scores sorted by sequence id,
    per-sequence errors (excluded from the mean), and the mean score."""

    per_sequence: tuple
    errors: tuple
    mean_auc: float
    modality: str


def evaluate_dataset(manifest, results_dir, thresholds=None, jobs: int = 1) -> EvalReport:
    """Score every sequence of a dataset against its result file.

    Result files are looked up as <results_dir>/<sequence_id>.txt.  A
    sequence whose files are missing or malformed contributes an error
    entry instead of aborting the whole run; the mean covers the scored
    sequences only.  Raises InputFormatError when nothing could be scored.
    """
    from .formats import parse_bbox_file

    grid = _check_thresholds(thresholds)
    sequences = manifest.sequences
    if not sequences:
        raise InputFormatError("dataset manifest has no sequences")
    results_dir = Path(results_dir)

    def score(seq):
        gt = parse_bbox_file(manifest.resolve(seq.groundtruth_path))
        if len(gt) != seq.frame_count:
            raise InputFormatError(
                f"ground truth for {seq.sequence_id} has {len(gt)} frames, "
                f"manifest says {seq.frame_count}"
            )
        pred = parse_bbox_file(results_dir / f"{seq.sequence_id}.txt")
        return auc(overlap_series(pred, gt), grid)

    scored = []
    errors = []

    def run_one(seq):
        try:
            return seq.sequence_id, score(seq), None
        except (InputFormatError, DomainError, OSError) as exc:
            return seq.sequence_id, None, str(exc)

    if jobs > 1 and len(sequences) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run_one, sequences))
    else:
        outcomes = [run_one(seq) for seq in sequences]
    for sequence_id, value, error in outcomes:
        if error is None:
            scored.append((sequence_id, value))
        else:
            errors.append((sequence_id, error))

    scored.sort(key=lambda item: item[0])
    errors.sort(key=lambda item: item[0])
    if not scored:
        first = f": first error: {errors[0][1]}" if errors else ""
        raise InputFormatError(f"no sequence could be evaluated{first}")
    values = np.asarray([value for _, value in scored], dtype=np.float64)
    mean = kernels.sequential_sum(values) / values.size

    modalities = sorted({seq.modality for seq in sequences})
    modality = modalities[0] if len(modalities) == 1 else "mixed"
    return EvalReport(tuple(scored), tuple(errors), float(mean), modality)


def format_percent(value: float) -> str:
    """Fraction to percent with one decimal, the report display format."""
    return f"{value * 100.0:.1f}"


def format_report(report: EvalReport) -> str:
    """Tab separated text report: one line per sequence, MEAN line last."""
    entries = {sequence_id: format_percent(value)
               for sequence_id, value in report.per_sequence}
    entries.update(
        (sequence_id, f"ERROR: {message}") for sequence_id, message in report.errors
    )
    lines = [f"{sequence_id}\t{entries[sequence_id]}" for sequence_id in sorted(entries)]
    lines.append(f"MEAN\t{format_percent(report.mean_auc)}")
    return "\n".join(lines) + "\n"


def report_mapping(report: EvalReport) -> dict:
    """Flat mapping for machine consumption: sequence id to fraction (null
    for failed sequences), plus reserved keys MEAN and MODALITY."""
    mapping = {}
    for sequence_id, value in report.per_sequence:
        mapping[sequence_id] = value
    for sequence_id, _ in report.errors:
        mapping[sequence_id] = None
    mapping["MEAN"] = report.mean_auc
    mapping["MODALITY"] = report.modality
    return mapping
