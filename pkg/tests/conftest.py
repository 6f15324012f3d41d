import numpy as np
import pytest

from trackpost import BBox, Tracklet


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def track_from_ratios(ratios, height=10.0):
    """Build a fully present tracklet whose w/h ratios match `ratios`."""
    boxes = [BBox(0.0, 0.0, r * height, height) for r in ratios]
    return Tracklet(boxes)


def random_tracklet(rng, n_frames, absent_prob=0.0, sequence_id=""):
    """Random positive-size tracklet; frame 0 is always present."""
    xywh = np.empty((n_frames, 4))
    xywh[:, 0] = rng.uniform(-50.0, 500.0, n_frames)
    xywh[:, 1] = rng.uniform(-50.0, 500.0, n_frames)
    xywh[:, 2] = rng.uniform(1.0, 300.0, n_frames)
    xywh[:, 3] = rng.uniform(1.0, 300.0, n_frames)
    present = np.ones(n_frames, dtype=np.uint8)
    if absent_prob > 0.0:
        present = (rng.uniform(size=n_frames) >= absent_prob).astype(np.uint8)
        present[0] = 1
    return Tracklet.from_arrays(xywh, present, sequence_id=sequence_id)
