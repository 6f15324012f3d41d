"""Deterministic synthetic ground truth and degraded tracker outputs.

Every output is bit reproducible from its input parameters and an integer
seed alone, independent of platform, process, or library versions.  Randomness comes
from an explicit splitmix64 stream:

    state = (state + 0x9E3779B97F4A7C15) mod 2^64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2^64
    output = z ^ (z >> 31)

Uniform doubles in [0, 1) are (u64 >> 11) * 2^-53.  Gaussians use the
Box-Muller transform on ((u64 >> 11) + 1) * 2^-53 in (0, 1] so the log
never sees zero.  Independent streams are split by name: the stream seed
is one splitmix64 step of (seed XOR FNV1a64(label)), with the standard
FNV-1a 64-bit constants (offset 0xcbf29ce484222325, prime 0x100000001b3).

Corruption of a clean track applies, in order: center and size Gaussian
jitter, width spikes at deterministically chosen frames, then dropouts.
Frame 0 is never corrupted, because the starting box is given to the
tracker, not produced by it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import DomainError
from .fusion import reverse_align
from .geometry import BBox
from .tracklet import Tracklet

_MASK64 = (1 << 64) - 1
MOTIONS = ("linear", "sinusoidal", "piecewise_linear")


class SplitMix64:
    """Minimal deterministic 64-bit generator (splitmix64)."""

    __slots__ = ("_state", "_spare_gauss")

    def __init__(self, seed: int):
        self._state = seed & _MASK64
        self._spare_gauss = None

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_double(self) -> float:
        """Uniform in [0, 1), 53 significant bits."""
        return (self.next_u64() >> 11) * 2.0 ** -53

    def next_gauss(self) -> float:
        """Standard normal via Box-Muller; draws two at a time."""
        if self._spare_gauss is not None:
            value = self._spare_gauss
            self._spare_gauss = None
            return value
        u1 = ((self.next_u64() >> 11) + 1) * 2.0 ** -53
        u2 = (self.next_u64() >> 11) * 2.0 ** -53
        radius = math.sqrt(-2.0 * math.log(u1))
        angle = 2.0 * math.pi * u2
        self._spare_gauss = radius * math.sin(angle)
        return radius * math.cos(angle)


def fnv1a64(text: str) -> int:
    """FNV-1a 64-bit hash of the utf-8 bytes of text."""
    value = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        value ^= byte
        value = (value * 0x100000001B3) & _MASK64
    return value


def derive_seed(seed: int, label: str) -> int:
    """Named substream seed: one splitmix64 step of seed XOR FNV1a64(label)."""
    return SplitMix64((seed & _MASK64) ^ fnv1a64(label)).next_u64()


@dataclass(frozen=True)
class TrajectorySpec:
    """Shape of one clean synthetic sequence.

    amplitude is the overall travel in pixels; image_bounds is (width,
    height) and every generated box is clamped inside it.
    """

    n_frames: int
    motion: str
    base_box: BBox
    amplitude: float
    image_bounds: tuple

    def __post_init__(self):
        if self.n_frames < 2:
            raise DomainError("a trajectory needs at least 2 frames")
        if self.motion not in MOTIONS:
            raise DomainError(
                f"unknown motion {self.motion!r}, expected one of {MOTIONS}"
            )
        if not (math.isfinite(self.amplitude) and self.amplitude >= 0):
            raise DomainError(f"amplitude must be non-negative, got {self.amplitude}")
        width, height = self.image_bounds
        if int(width) < 1 or int(height) < 1:
            raise DomainError(f"bad image bounds {self.image_bounds}")
        object.__setattr__(self, "image_bounds", (int(width), int(height)))
        box = self.base_box
        if box.w <= 0 or box.h <= 0:
            raise DomainError("base box must have positive size")
        if box.x < 0 or box.y < 0 or box.x + box.w > width or box.y + box.h > height:
            raise DomainError("base box must lie inside the image bounds")


@dataclass(frozen=True)
class NoiseSpec:
    """Degradation model for the mock tracker.

    jitter_sigma   stddev in pixels of center and size jitter
    spike_frames   how many frames get their width multiplied
    spike_magnitude  the width multiplier at spiked frames
    dropout_prob   per-frame probability of reporting no box
    """

    jitter_sigma: float = 0.0
    spike_frames: int = 0
    spike_magnitude: float = 2.0
    dropout_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.jitter_sigma) and self.jitter_sigma >= 0):
            raise DomainError(f"jitter_sigma must be non-negative, got {self.jitter_sigma}")
        if self.spike_frames < 0:
            raise DomainError("spike_frames must be non-negative")
        if not (math.isfinite(self.spike_magnitude) and self.spike_magnitude > 0):
            raise DomainError("spike_magnitude must be positive")
        if not 0.0 <= self.dropout_prob <= 1.0:
            raise DomainError(
                f"dropout_prob must be within [0, 1], got {self.dropout_prob}"
            )


def _clamp(value: float, low: float, high: float) -> float:
    if value < low:
        return low
    if value > high:
        return high
    return value


def generate_ground_truth(spec: TrajectorySpec, seed: int,
                          sequence_id: str = "") -> Tracklet:
    """Clean, fully present tracklet following the requested motion."""
    rng = SplitMix64(derive_seed(seed, "trajectory"))
    n = spec.n_frames
    width, height = spec.image_bounds
    box = spec.base_box
    cx0 = box.x + box.w * 0.5
    cy0 = box.y + box.h * 0.5

    if spec.motion == "linear":
        angle = rng.next_double() * 2.0 * math.pi
        dx = spec.amplitude * math.cos(angle)
        dy = spec.amplitude * math.sin(angle)
        centers = [
            (cx0 + (i / (n - 1)) * dx, cy0 + (i / (n - 1)) * dy) for i in range(n)
        ]
        sizes = [(box.w, box.h)] * n
    elif spec.motion == "sinusoidal":
        phase = rng.next_double() * 2.0 * math.pi
        centers = []
        sizes = []
        for i in range(n):
            f = i / (n - 1)
            centers.append((
                cx0 + f * spec.amplitude,
                cy0 + 0.35 * spec.amplitude * math.sin(2.0 * math.pi * f + phase),
            ))
            scale = 1.0 + 0.15 * math.sin(4.0 * math.pi * f + phase)
            sizes.append((box.w * scale, box.h * scale))
    else:  # piecewise_linear
        waypoints = [(cx0, cy0)]
        for _ in range(3):
            px, py = waypoints[-1]
            px = _clamp(px + (rng.next_double() * 2.0 - 1.0) * spec.amplitude,
                        box.w * 0.5, width - box.w * 0.5)
            py = _clamp(py + (rng.next_double() * 2.0 - 1.0) * spec.amplitude,
                        box.h * 0.5, height - box.h * 0.5)
            waypoints.append((px, py))
        centers = []
        for i in range(n):
            pos = 3.0 * i / (n - 1)
            segment = min(int(pos), 2)
            f = pos - segment
            ax, ay = waypoints[segment]
            bx, by = waypoints[segment + 1]
            centers.append((ax + f * (bx - ax), ay + f * (by - ay)))
        sizes = [(box.w, box.h)] * n

    xywh = np.empty((n, 4), dtype=np.float64)
    for i in range(n):
        w, h = sizes[i]
        if w > width:
            w = float(width)
        if h > height:
            h = float(height)
        cx, cy = centers[i]
        xywh[i, 0] = _clamp(cx - w * 0.5, 0.0, width - w)
        xywh[i, 1] = _clamp(cy - h * 0.5, 0.0, height - h)
        xywh[i, 2] = w
        xywh[i, 3] = h
    present = np.ones(n, dtype=np.uint8)
    return Tracklet._wrap(xywh, present, sequence_id)


def spike_positions(n_frames: int, count: int, seed: int) -> list:
    """Deterministic spike placement: evenly strided positions.

    Positions avoid the first two and last two frames and are never
    adjacent, so every spike has clean neighbours to interpolate from.
    """
    if count == 0:
        return []
    eligible = n_frames - 4  # frames 2 .. n-3
    if eligible < 1 or 2 * count - 1 > eligible:
        raise DomainError(
            f"cannot place {count} spikes in a {n_frames}-frame sequence"
        )
    stride = max(2, eligible // count)
    while (count - 1) * stride > eligible - 1:
        stride -= 1
    start_max = (eligible - 1) - (count - 1) * stride
    start = SplitMix64(seed).next_u64() % (start_max + 1)
    return [2 + start + j * stride for j in range(count)]


def corrupt(gt: Tracklet, noise: NoiseSpec, image_bounds=None) -> Tracklet:
    """Degrade a clean track: jitter, then width spikes, then dropouts.

    All-zero noise returns the input bit for bit.  image_bounds, when
    given, clamps jittered boxes back inside the image.
    """
    n = len(gt)
    xywh = gt.xywh.copy()
    present = gt._present.copy()

    if noise.jitter_sigma > 0.0:
        rng = SplitMix64(derive_seed(noise.seed, "jitter"))
        sigma = noise.jitter_sigma
        for i in range(1, n):
            if not present[i]:
                continue
            x, y, w, h = xywh[i]
            cx = (x + w * 0.5) + rng.next_gauss() * sigma
            cy = (y + h * 0.5) + rng.next_gauss() * sigma
            w = w + rng.next_gauss() * sigma
            h = h + rng.next_gauss() * sigma
            if w < 1.0:
                w = 1.0
            if h < 1.0:
                h = 1.0
            if image_bounds is not None:
                bw, bh = image_bounds
                if w > bw:
                    w = float(bw)
                if h > bh:
                    h = float(bh)
                x = _clamp(cx - w * 0.5, 0.0, bw - w)
                y = _clamp(cy - h * 0.5, 0.0, bh - h)
            else:
                x = cx - w * 0.5
                y = cy - h * 0.5
            xywh[i] = (x, y, w, h)

    if noise.spike_frames > 0:
        positions = spike_positions(
            n, noise.spike_frames, derive_seed(noise.seed, "spikes")
        )
        for position in positions:
            if present[position]:
                xywh[position, 2] *= noise.spike_magnitude

    if noise.dropout_prob > 0.0:
        rng = SplitMix64(derive_seed(noise.seed, "dropout"))
        for i in range(1, n):
            if rng.next_double() < noise.dropout_prob:
                present[i] = 0
                xywh[i] = np.nan

    return Tracklet._wrap(xywh, present, gt.sequence_id)


def mock_tracker(gt: Tracklet, noise: NoiseSpec, direction: str,
                 image_bounds=None) -> Tracklet:
    """Simulated tracking pass over a clean sequence.

    Returns the pass output in processing order: the backward pass walks
    the video from its last frame, so its frame 0 is the video's final
    frame and reverse_align restores video order.  The noise seed is split
    by direction, so the two passes fail in different places.
    """
    if direction not in ("forward", "backward"):
        raise DomainError(f"direction must be forward or backward, got {direction!r}")
    directed = replace(noise, seed=derive_seed(noise.seed, direction))
    source = gt if direction == "forward" else reverse_align(gt)
    return corrupt(source, directed, image_bounds)


def build_dataset(out_dir, sequences: int, frames: int, seed: int = 0,
                  modality: str = "rgb", name: str = "", motion: str = "mixed",
                  image_size=(1280, 720), base_box: BBox | None = None,
                  amplitude: float = 160.0,
                  noise: NoiseSpec | None = None):
    """Write a complete synthetic dataset to disk and return its manifest.

    Layout under out_dir:

        manifest.txt                  dataset manifest
        gt/<id>.txt                   clean ground truth, video order
        results_forward/<id>.txt      mock forward pass, video order
        results_backward/<id>.txt     mock backward pass, processing order

    motion may be one of the trajectory kinds or 'mixed' to cycle through
    them.  The same NoiseSpec drives both mock passes; per-sequence and
    per-direction seeds are derived from the master seed.
    """
    from .formats import DatasetManifest, SequenceManifest, write_bbox_file, write_manifest

    if sequences < 1:
        raise DomainError("a dataset needs at least one sequence")
    if motion != "mixed" and motion not in MOTIONS:
        raise DomainError(f"unknown motion {motion!r}")
    if noise is None:
        noise = NoiseSpec()
    if base_box is None:
        base_box = BBox(60.0, 60.0, 80.0, 60.0)
    out = Path(out_dir)
    for sub in ("gt", "results_forward", "results_backward"):
        (out / sub).mkdir(parents=True, exist_ok=True)

    entries = []
    for index in range(sequences):
        sequence_id = f"seq_{index:03d}"
        seq_seed = derive_seed(seed, sequence_id)
        seq_motion = motion if motion != "mixed" else MOTIONS[index % len(MOTIONS)]
        spec = TrajectorySpec(frames, seq_motion, base_box, amplitude, image_size)
        gt = generate_ground_truth(spec, seq_seed, sequence_id)
        seq_noise = replace(noise, seed=seq_seed)
        forward = mock_tracker(gt, seq_noise, "forward", image_size)
        backward = mock_tracker(gt, seq_noise, "backward", image_size)
        write_bbox_file(gt, out / "gt" / f"{sequence_id}.txt")
        write_bbox_file(forward, out / "results_forward" / f"{sequence_id}.txt")
        write_bbox_file(backward, out / "results_backward" / f"{sequence_id}.txt")
        entries.append(SequenceManifest(
            sequence_id=sequence_id,
            frame_count=frames,
            modality=modality,
            groundtruth_path=f"gt/{sequence_id}.txt",
            init_box=gt[0],
            result_order="processing",
        ))

    manifest = DatasetManifest(name or out.name, tuple(entries), base_dir=out)
    write_manifest(manifest, out / "manifest.txt")
    return manifest
