"""Post-processing and evaluation toolkit for single-object tracking.

The package smooths aspect-ratio anomalies out of predicted box
sequences, fuses forward and backward tracking passes, extracts boxes
from segmentation masks, and scores results with overlap success
curves.  A deterministic synthetic harness generates datasets for
end-to-end runs without any tracker installed.

Numeric kernels live in a compiled extension when it is available and
fall back to a pure NumPy implementation otherwise; both produce
bit-identical results.  Set TRACKPOST_BACKEND=python or =cython to
force one side, or leave it unset to pick automatically.
"""

from ._backend import backend_name
from .errors import (
    DomainError,
    InputFormatError,
    ToolkitError,
    TrackerDriverError,
)
from .geometry import (
    BBox,
    BinaryMask,
    aspect_ratio,
    iou,
    load_mask,
    mask_to_bbox,
    write_mask_pgm,
    write_mask_rle,
)
from .tracklet import RatioDeltaSeries, Tracklet, ratio_deltas, stability_score
from .smoothing import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    DEFAULT_MAX_ITERATIONS,
    SmootherOutcome,
    SmootherParams,
    flag_frames,
    interpolate_section,
    smooth_tracklet,
)
from .fusion import (
    FusionOutcome,
    FusionPolicy,
    PassScores,
    backward_init_box,
    fuse,
    reverse_align,
    run_tracker_command,
)
from .evaluation import (
    DEFAULT_THRESHOLDS,
    EvalReport,
    OverlapSeries,
    SuccessCurve,
    auc,
    default_thresholds,
    evaluate_dataset,
    format_report,
    mean_curve,
    overlap_series,
    success_curve,
    success_rate,
)
from .formats import (
    DatasetManifest,
    SequenceManifest,
    format_box,
    format_float,
    parse_bbox_file,
    parse_box_line,
    parse_manifest,
    write_bbox_file,
    write_manifest,
)
from .synth import (
    NoiseSpec,
    TrajectorySpec,
    build_dataset,
    corrupt,
    generate_ground_truth,
    mock_tracker,
)

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "BinaryMask",
    "DatasetManifest",
    "DEFAULT_ALPHA",
    "DEFAULT_BETA",
    "DEFAULT_MAX_ITERATIONS",
    "DEFAULT_THRESHOLDS",
    "DomainError",
    "EvalReport",
    "FusionOutcome",
    "FusionPolicy",
    "InputFormatError",
    "NoiseSpec",
    "OverlapSeries",
    "PassScores",
    "RatioDeltaSeries",
    "SequenceManifest",
    "SmootherOutcome",
    "SmootherParams",
    "SuccessCurve",
    "ToolkitError",
    "TrackerDriverError",
    "Tracklet",
    "TrajectorySpec",
    "aspect_ratio",
    "auc",
    "backend_name",
    "backward_init_box",
    "build_dataset",
    "corrupt",
    "default_thresholds",
    "evaluate_dataset",
    "flag_frames",
    "format_box",
    "format_float",
    "format_report",
    "fuse",
    "generate_ground_truth",
    "interpolate_section",
    "iou",
    "load_mask",
    "mask_to_bbox",
    "mean_curve",
    "mock_tracker",
    "overlap_series",
    "parse_bbox_file",
    "parse_box_line",
    "parse_manifest",
    "ratio_deltas",
    "reverse_align",
    "run_tracker_command",
    "smooth_tracklet",
    "stability_score",
    "success_curve",
    "success_rate",
    "write_bbox_file",
    "write_manifest",
    "write_mask_pgm",
    "write_mask_rle",
    "__version__",
]
