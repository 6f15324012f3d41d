import sys

import numpy as np
import pytest

from trackpost import (
    BBox,
    DomainError,
    FusionPolicy,
    Tracklet,
    TrackerDriverError,
    TrajectorySpec,
    NoiseSpec,
    backward_init_box,
    fuse,
    generate_ground_truth,
    mock_tracker,
    reverse_align,
    run_tracker_command,
    stability_score,
    write_bbox_file,
)

from conftest import random_tracklet


def sample_gt(n_frames=40, seed=11):
    spec = TrajectorySpec(
        n_frames=n_frames,
        motion="sinusoidal",
        base_box=BBox(200.0, 150.0, 60.0, 40.0),
        amplitude=90.0,
        image_bounds=(1280, 720),
    )
    return generate_ground_truth(spec, seed=seed)


class TestReverseAlign:
    def test_reverses_frames(self):
        track = Tracklet([BBox(0, 0, 1, 1), None, BBox(2, 2, 3, 3)])
        flipped = reverse_align(track)
        assert flipped[0] == BBox(2, 2, 3, 3)
        assert flipped[1] is None
        assert flipped[2] == BBox(0, 0, 1, 1)

    def test_involution(self, rng):
        track = random_tracklet(rng, 25, absent_prob=0.2)
        assert reverse_align(reverse_align(track)) == track

    def test_keeps_sequence_id(self):
        track = Tracklet([BBox(0, 0, 1, 1)], sequence_id="seq_007")
        assert reverse_align(track).sequence_id == "seq_007"


class TestBackwardInitBox:
    def test_last_present(self):
        track = Tracklet([BBox(0, 0, 1, 1), BBox(5, 5, 2, 2), None])
        assert backward_init_box(track) == BBox(5, 5, 2, 2)

    def test_all_absent_rejected(self):
        track = Tracklet([None, None])
        with pytest.raises(DomainError):
            backward_init_box(track)


class TestSequenceSelect:
    def test_lower_score_wins(self):
        gt = sample_gt()
        noisy = mock_tracker(gt, NoiseSpec(spike_frames=3, seed=5), "forward")
        clean = reverse_align(mock_tracker(gt, NoiseSpec(), "backward"))
        outcome = fuse(noisy, clean)
        assert outcome.chosen == "backward"
        assert outcome.track == clean
        assert outcome.scores.fused == min(outcome.scores.forward,
                                           outcome.scores.backward)

    def test_forward_wins_when_cleaner(self):
        gt = sample_gt()
        noisy_back = reverse_align(
            mock_tracker(gt, NoiseSpec(spike_frames=3, seed=5), "backward"))
        outcome = fuse(gt, noisy_back)
        assert outcome.chosen == "forward"
        assert outcome.track == gt

    def test_tie_prefers_forward(self):
        gt = sample_gt()
        outcome = fuse(gt, gt)
        assert outcome.chosen == "forward"

    def test_first_frame_always_from_forward(self):
        gt = sample_gt(n_frames=20)
        # backward pass with a different first box but a better score
        xywh = gt.xywh.copy()
        xywh[0] = [0.0, 0.0, 5.0, 5.0]
        backward = Tracklet.from_arrays(xywh, gt.present)
        noisy = mock_tracker(gt, NoiseSpec(spike_frames=3, seed=2), "forward")
        outcome = fuse(noisy, backward)
        assert outcome.chosen == "backward"
        assert outcome.track[0] == noisy[0]
        assert outcome.track[1] == backward[1]


class TestPerFrameAgreement:
    POLICY = FusionPolicy(mode="per_frame_agreement", agreement_iou=0.5)

    def test_agreement_keeps_forward(self):
        gt = sample_gt()
        outcome = fuse(gt, gt, self.POLICY)
        assert outcome.track == gt
        assert set(outcome.chosen) == {"forward"}

    def test_backward_fills_forward_gaps(self):
        gt = sample_gt(n_frames=12)
        present = np.ones(12, dtype=np.uint8)
        present[5] = 0
        holey = Tracklet.from_arrays(gt.xywh.copy(), present)
        outcome = fuse(holey, gt, self.POLICY)
        assert outcome.track[5] == gt[5]
        assert outcome.chosen[5] == "backward"

    def test_forward_fills_backward_gaps(self):
        gt = sample_gt(n_frames=12)
        present = np.ones(12, dtype=np.uint8)
        present[7] = 0
        holey = Tracklet.from_arrays(gt.xywh.copy(), present)
        outcome = fuse(gt, holey, self.POLICY)
        assert outcome.track[7] == gt[7]
        assert outcome.chosen[7] == "forward"

    def test_disagreement_takes_stabler_pass(self):
        gt = sample_gt(n_frames=30)
        noisy = mock_tracker(gt, NoiseSpec(spike_frames=3, seed=4), "forward")
        assert stability_score(noisy) > stability_score(gt)
        shifted = Tracklet.from_arrays(gt.xywh + 200.0, gt.present)
        # shifted gt never overlaps the noisy forward pass, and the
        # backward side is the stabler of the two
        outcome = fuse(noisy, shifted, self.POLICY)
        for i in range(1, 30):
            assert outcome.chosen[i] == "backward"

    def test_both_absent_stays_absent(self):
        a = Tracklet([BBox(0, 0, 1, 1), None, BBox(0, 0, 1, 1)])
        outcome = fuse(a, a, self.POLICY)
        assert outcome.track[1] is None

    def test_first_frame_forced_forward(self):
        gt = sample_gt(n_frames=10)
        moved = Tracklet.from_arrays(gt.xywh + 500.0, gt.present)
        outcome = fuse(gt, moved, self.POLICY)
        assert outcome.track[0] == gt[0]
        assert outcome.chosen[0] == "forward"

    def test_chosen_length_matches(self):
        gt = sample_gt(n_frames=15)
        outcome = fuse(gt, gt, self.POLICY)
        assert len(outcome.chosen) == 15


class TestFuseValidation:
    def test_length_mismatch(self):
        a = Tracklet([BBox(0, 0, 1, 1), BBox(0, 0, 1, 1)])
        b = Tracklet([BBox(0, 0, 1, 1)])
        with pytest.raises(DomainError):
            fuse(a, b)

    def test_empty(self):
        with pytest.raises(DomainError):
            fuse(Tracklet([]), Tracklet([]))

    def test_forward_first_frame_absent(self):
        a = Tracklet([None, BBox(0, 0, 1, 1)])
        b = Tracklet([BBox(0, 0, 1, 1), BBox(0, 0, 1, 1)])
        with pytest.raises(DomainError):
            fuse(a, b)

    def test_policy_validation(self):
        with pytest.raises(DomainError):
            FusionPolicy(mode="nonsense")
        with pytest.raises(DomainError):
            FusionPolicy(agreement_iou=1.5)


DRIVER_OK = """\
import sys
frames_dir, init_box, output, direction = sys.argv[1:5]
with open(init_box) as fh:
    first = fh.readline().strip()
with open(output, "w") as fh:
    fh.write(first + "\\n")
    fh.write("10,10,20,20\\n")
    fh.write("30,30,20,20\\n")
"""

DRIVER_FAILS = """\
import sys
sys.stderr.write("tracker exploded\\n")
sys.exit(9)
"""

DRIVER_NO_OUTPUT = """\
import sys
sys.exit(0)
"""

DRIVER_GARBAGE = """\
import sys
with open(sys.argv[3], "w") as fh:
    fh.write("not,a,box\\n")
"""


class TestRunTrackerCommand:
    def _setup(self, tmp_path, script_text):
        script = tmp_path / "driver.py"
        script.write_text(script_text)
        frames = tmp_path / "frames"
        frames.mkdir()
        init = tmp_path / "init.txt"
        init.write_text("5,6,7,8\n")
        output = tmp_path / "out.txt"
        return [sys.executable, str(script)], frames, init, output

    def test_success(self, tmp_path):
        command, frames, init, output = self._setup(tmp_path, DRIVER_OK)
        track = run_tracker_command(command, frames, init, output, "backward")
        assert len(track) == 3
        assert track[0] == BBox(5, 6, 7, 8)

    def test_nonzero_exit(self, tmp_path):
        command, frames, init, output = self._setup(tmp_path, DRIVER_FAILS)
        with pytest.raises(TrackerDriverError) as info:
            run_tracker_command(command, frames, init, output, "backward")
        assert "tracker exploded" in str(info.value)

    def test_missing_output(self, tmp_path):
        command, frames, init, output = self._setup(tmp_path, DRIVER_NO_OUTPUT)
        with pytest.raises(TrackerDriverError):
            run_tracker_command(command, frames, init, output, "backward")

    def test_unparseable_output(self, tmp_path):
        command, frames, init, output = self._setup(tmp_path, DRIVER_GARBAGE)
        with pytest.raises(TrackerDriverError):
            run_tracker_command(command, frames, init, output, "backward")

    def test_missing_binary(self, tmp_path):
        with pytest.raises(TrackerDriverError):
            run_tracker_command([str(tmp_path / "nope")], tmp_path,
                                tmp_path / "i.txt", tmp_path / "o.txt",
                                "forward")

    def test_direction_passed_through(self, tmp_path):
        script = tmp_path / "driver.py"
        script.write_text(
            "import sys\n"
            "with open(sys.argv[3], 'w') as fh:\n"
            "    fh.write('1,1,1,1\\n')\n"
            "with open(sys.argv[3].replace('.txt', '.dir'), 'w') as fh:\n"
            "    fh.write(sys.argv[4])\n"
        )
        init = tmp_path / "init.txt"
        init.write_text("1,1,1,1\n")
        output = tmp_path / "out.txt"
        run_tracker_command([sys.executable, str(script)], tmp_path, init,
                            output, "backward")
        assert (tmp_path / "out.dir").read_text() == "backward"


class TestMockTrackerAsDriverInput:
    def test_round_trip_through_files(self, tmp_path, rng):
        # a mock backward pass written to disk and re-aligned matches
        # the in-memory path
        gt = sample_gt(n_frames=25)
        backward = mock_tracker(gt, NoiseSpec(spike_frames=2, seed=8),
                                "backward")
        path = tmp_path / "backward.txt"
        write_bbox_file(backward, path)
        from trackpost import parse_bbox_file
        assert reverse_align(parse_bbox_file(path)) == reverse_align(backward)
