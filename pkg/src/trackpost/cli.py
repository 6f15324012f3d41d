"""Command line interface.

Subcommands: smooth, fuse, eval, curve, synth, pipeline.  Data goes to
files or stdout, diagnostics to stderr.  Exit codes: 0 success, 1 usage
problem, 2 missing or malformed data, 3 external tracker failure.

Identical invocations produce identical bytes: per-sequence work may run
on a worker pool (--jobs, default TRACKPOST_JOBS or the CPU count), but
all aggregation is ordered by sequence id.
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import evaluation, formats, fusion, smoothing, synth
from .errors import DomainError, InputFormatError, TrackerDriverError
from .tracklet import stability_score


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _box_argument(text: str):
    try:
        box = formats.parse_box_line(text)
    except InputFormatError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if box is None:
        raise argparse.ArgumentTypeError("expected a box, got an absent marker")
    return box


def _grid_argument(text: str) -> int:
    try:
        count = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if count < 2:
        raise argparse.ArgumentTypeError("grid needs at least 2 points")
    return count


def _default_jobs() -> int:
    env = os.environ.get("TRACKPOST_JOBS", "").strip()
    if env:
        try:
            jobs = int(env)
        except ValueError:
            raise UsageError(f"TRACKPOST_JOBS must be an integer, got {env!r}") from None
        if jobs < 1:
            raise UsageError("TRACKPOST_JOBS must be at least 1")
        return jobs
    return os.cpu_count() or 1


def _resolve_jobs(args) -> int:
    jobs = getattr(args, "jobs", None)
    if jobs is None:
        return _default_jobs()
    if jobs < 1:
        raise UsageError("--jobs must be at least 1")
    return jobs


def _add_smoother_flags(parser):
    parser.add_argument("--alpha", type=float, default=smoothing.DEFAULT_ALPHA,
                        help="flagging factor over the mean ratio jump")
    parser.add_argument("--beta", type=float, default=smoothing.DEFAULT_BETA,
                        help="stopping factor over the mean ratio jump")
    parser.add_argument("--max-iter", type=int, default=smoothing.DEFAULT_MAX_ITERATIONS,
                        help="smoothing pass limit")


def _add_fusion_flags(parser):
    parser.add_argument("--policy", choices=fusion.FUSION_MODES,
                        default="sequence_select", help="fusion policy")
    parser.add_argument("--agreement-iou", type=float, default=0.5,
                        help="overlap at which per-frame fusion keeps forward")
    parser.add_argument("--trigger-score", type=float, default=0.0,
                        help="use a backward pass only when the forward "
                             "stability score exceeds this")
    parser.add_argument("--tracker-cmd", default=None,
                        help="external tracker command for backward passes")


def build_parser() -> _Parser:
    parser = _Parser(prog="trackpost",
                     description="Post-processing and evaluation for "
                                 "single-object tracking results.")
    commands = parser.add_subparsers(dest="command", metavar="command")

    p = commands.add_parser("smooth", help="smooth one bbox sequence file")
    _add_smoother_flags(p)
    p.add_argument("--in", dest="input", required=True, help="input bbox file")
    p.add_argument("--out", dest="output", required=True, help="output bbox file")
    p.add_argument("--report", default=None,
                   help="write a per-iteration text log to this path")
    p.set_defaults(func=_cmd_smooth)

    p = commands.add_parser("fuse", help="combine forward and backward passes")
    p.add_argument("--manifest", required=True)
    p.add_argument("--forward", required=True,
                   help="directory with forward result files")
    p.add_argument("--backward", default=None,
                   help="directory with backward result files")
    _add_fusion_flags(p)
    p.add_argument("--out", dest="output", required=True,
                   help="directory for fused result files")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=_cmd_fuse)

    p = commands.add_parser("eval", help="score result files against a dataset")
    p.add_argument("--manifest", required=True)
    p.add_argument("--results", required=True,
                   help="directory with <sequence_id>.txt result files")
    p.add_argument("--out", dest="output", default=None,
                   help="also write the text report here")
    p.add_argument("--json", dest="json_path", default=None,
                   help="write a machine readable report here")
    p.add_argument("--grid", type=_grid_argument, default=21,
                   help="number of threshold points (default 21)")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=_cmd_eval)

    p = commands.add_parser("curve", help="emit a success curve as CSV")
    p.add_argument("--pred", default=None, help="single prediction bbox file")
    p.add_argument("--gt", default=None, help="single ground truth bbox file")
    p.add_argument("--manifest", default=None,
                   help="dataset manifest (mean curve across sequences)")
    p.add_argument("--results", default=None,
                   help="results directory for --manifest mode")
    p.add_argument("--out", dest="output", default=None,
                   help="CSV path (default stdout)")
    p.add_argument("--grid", type=_grid_argument, default=21)
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=_cmd_curve)

    p = commands.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--sequences", type=int, default=3)
    p.add_argument("--frames", type=int, default=120)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--motion", choices=synth.MOTIONS + ("mixed",), default="mixed")
    p.add_argument("--modality", choices=formats.MODALITIES, default="rgb")
    p.add_argument("--name", default="")
    p.add_argument("--width", type=int, default=1280)
    p.add_argument("--height", type=int, default=720)
    p.add_argument("--base-box", type=_box_argument, default=None,
                   help="starting box as x,y,w,h")
    p.add_argument("--amplitude", type=float, default=160.0)
    p.add_argument("--jitter", type=float, default=0.0,
                   help="center and size jitter sigma in pixels")
    p.add_argument("--spikes", type=int, default=0,
                   help="width-spiked frames per mock pass")
    p.add_argument("--spike-magnitude", type=float, default=2.0)
    p.add_argument("--dropout", type=float, default=0.0,
                   help="per-frame probability of a missing box")
    p.set_defaults(func=_cmd_synth)

    p = commands.add_parser("pipeline",
                            help="smooth, fuse, and evaluate a whole dataset")
    p.add_argument("--manifest", required=True)
    p.add_argument("--forward", required=True,
                   help="directory with forward result files")
    p.add_argument("--backward", default=None,
                   help="directory with backward result files")
    _add_smoother_flags(p)
    _add_fusion_flags(p)
    p.add_argument("--out", dest="output", default=None,
                   help="directory for the final per-sequence files")
    p.add_argument("--report", dest="report_path", default=None,
                   help="also write the text report here")
    p.add_argument("--json", dest="json_path", default=None,
                   help="write a machine readable report here")
    p.add_argument("--grid", type=_grid_argument, default=21)
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=_cmd_pipeline)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "command", None) is None:
            raise UsageError("a command is required")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except TrackerDriverError as exc:
        print(f"tracker error: {exc}", file=sys.stderr)
        return 3
    except (InputFormatError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


# ---------------------------------------------------------------- commands


def _cmd_smooth(args) -> int:
    params = smoothing.SmootherParams(args.alpha, args.beta, args.max_iter)
    track = formats.parse_bbox_file(args.input)
    outcome = smoothing.smooth_tracklet(track, params)
    formats.write_bbox_file(outcome.track, args.output)
    if args.report:
        _write_smooth_report(outcome, args.report)
    return 0


def _write_smooth_report(outcome, path) -> None:
    ff = formats.format_float
    lines = ["iteration\tmean_delta\tmax_delta\tflagged_frames"]
    for number, (stats, flagged) in enumerate(
            zip(outcome.threshold_history, outcome.flagged_history), 1):
        mean_delta, max_delta = stats
        joined = ",".join(str(i) for i in flagged)
        lines.append(f"{number}\t{ff(mean_delta)}\t{ff(max_delta)}\t{joined}")
    lines.append(f"converged\t{'true' if outcome.converged else 'false'}")
    lines.append(f"iterations_used\t{outcome.iterations_used}")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def _tracker_command(args):
    if args.tracker_cmd is None:
        return None
    command = shlex.split(args.tracker_cmd)
    if not command:
        raise UsageError("--tracker-cmd must not be empty")
    return command


def _acquire_backward(seq, manifest, backward_dir, tracker_command, forward_track):
    """Obtain a backward pass in processing order, or None if unavailable.

    A stored file wins over running the external tracker.  Stored files
    are reordered according to the manifest's result_order.
    """
    if backward_dir is not None:
        candidate = Path(backward_dir) / f"{seq.sequence_id}.txt"
        if candidate.is_file():
            track = formats.parse_bbox_file(candidate)
            if seq.result_order == "processing":
                return track
            return fusion.reverse_align(track)
    if tracker_command is not None:
        if seq.frames_dir is None:
            raise InputFormatError(
                f"sequence {seq.sequence_id}: manifest has no frames_dir, "
                "cannot run the external tracker"
            )
        frames_dir = manifest.resolve(seq.frames_dir)
        init_box = fusion.backward_init_box(forward_track)
        with tempfile.TemporaryDirectory(prefix="trackpost-") as tmp:
            init_path = Path(tmp) / "init_box.txt"
            with open(init_path, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(formats.format_box(init_box) + "\n")
            output_path = Path(tmp) / "backward.txt"
            return fusion.run_tracker_command(
                tracker_command, frames_dir, init_path, output_path, "backward"
            )
    return None


def _run_sequences(sequences, worker, jobs):
    """Apply worker to every sequence, catching per-sequence failures.

    Returns (results, data_errors, driver_errors), each sorted by id.
    """
    def guarded(seq):
        try:
            return seq.sequence_id, worker(seq), None, None
        except TrackerDriverError as exc:
            return seq.sequence_id, None, None, str(exc)
        except (InputFormatError, DomainError, OSError) as exc:
            return seq.sequence_id, None, str(exc), None

    if jobs > 1 and len(sequences) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(guarded, sequences))
    else:
        rows = [guarded(seq) for seq in sequences]

    results = sorted(
        (sid, value) for sid, value, data_err, drv_err in rows if value is not None
    )
    data_errors = sorted(
        (sid, err) for sid, _, err, _ in rows if err is not None
    )
    driver_errors = sorted(
        (sid, err) for sid, _, _, err in rows if err is not None
    )
    return results, data_errors, driver_errors


def _print_errors(data_errors, driver_errors) -> None:
    for sid, message in driver_errors:
        print(f"tracker error: {sid}: {message}", file=sys.stderr)
    for sid, message in data_errors:
        print(f"error: {sid}: {message}", file=sys.stderr)


def _error_exit(data_errors, driver_errors) -> int:
    if driver_errors:
        return 3
    if data_errors:
        return 2
    return 0


def _cmd_fuse(args) -> int:
    manifest = formats.parse_manifest(args.manifest)
    policy = fusion.FusionPolicy(args.policy, args.agreement_iou)
    tracker_command = _tracker_command(args)
    forward_dir = Path(args.forward)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = _resolve_jobs(args)

    def work(seq):
        forward = formats.parse_bbox_file(forward_dir / f"{seq.sequence_id}.txt")
        score_forward = stability_score(forward)
        backward = None
        if score_forward > args.trigger_score:
            backward_processing = _acquire_backward(
                seq, manifest, args.backward, tracker_command, forward
            )
            if backward_processing is not None:
                backward = fusion.reverse_align(backward_processing)
        if backward is None:
            formats.write_bbox_file(forward, out_dir / f"{seq.sequence_id}.txt")
            return ("no", "forward", score_forward, None, score_forward)
        outcome = fusion.fuse(forward, backward, policy)
        formats.write_bbox_file(outcome.track, out_dir / f"{seq.sequence_id}.txt")
        chosen = outcome.chosen
        if isinstance(chosen, tuple):
            chosen = (f"forward:{chosen.count('forward')},"
                      f"backward:{chosen.count('backward')}")
        return ("yes", chosen, outcome.scores.forward,
                outcome.scores.backward, outcome.scores.fused)

    results, data_errors, driver_errors = _run_sequences(
        manifest.sequences, work, jobs
    )
    ff = formats.format_float
    print("sequence\ttriggered\tchosen\tforward_score\tbackward_score\tfused_score")
    for sid, row in results:
        triggered, chosen, fwd, bwd, fused = row
        bwd_text = "-" if bwd is None else ff(bwd)
        print(f"{sid}\t{triggered}\t{chosen}\t{ff(fwd)}\t{bwd_text}\t{ff(fused)}")
    _print_errors(data_errors, driver_errors)
    return _error_exit(data_errors, driver_errors)


def _cmd_eval(args) -> int:
    manifest = formats.parse_manifest(args.manifest)
    thresholds = evaluation.default_thresholds(args.grid)
    report = evaluation.evaluate_dataset(
        manifest, args.results, thresholds=thresholds, jobs=_resolve_jobs(args)
    )
    text = evaluation.format_report(report)
    print(text, end="")
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    if args.json_path:
        _write_json(evaluation.report_mapping(report), args.json_path)
    for sid, message in report.errors:
        print(f"error: {sid}: {message}", file=sys.stderr)
    return 2 if report.errors else 0


def _write_json(mapping, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(json.dumps(mapping, sort_keys=True, indent=2) + "\n")


def _cmd_curve(args) -> int:
    single = args.pred is not None or args.gt is not None
    dataset = args.manifest is not None or args.results is not None
    if single == dataset:
        raise UsageError("use either --pred/--gt or --manifest/--results")
    thresholds = evaluation.default_thresholds(args.grid)

    if single:
        if args.pred is None or args.gt is None:
            raise UsageError("--pred and --gt must be given together")
        pred = formats.parse_bbox_file(args.pred)
        gt = formats.parse_bbox_file(args.gt)
        curve = evaluation.success_curve(
            evaluation.overlap_series(pred, gt), thresholds
        )
    else:
        if args.manifest is None or args.results is None:
            raise UsageError("--manifest and --results must be given together")
        manifest = formats.parse_manifest(args.manifest)
        if not manifest.sequences:
            raise InputFormatError("dataset manifest has no sequences")
        results_dir = Path(args.results)

        def work(seq):
            gt = formats.parse_bbox_file(manifest.resolve(seq.groundtruth_path))
            pred = formats.parse_bbox_file(results_dir / f"{seq.sequence_id}.txt")
            return evaluation.success_curve(
                evaluation.overlap_series(pred, gt), thresholds
            )

        results, data_errors, driver_errors = _run_sequences(
            manifest.sequences, work, _resolve_jobs(args)
        )
        if data_errors:
            _print_errors(data_errors, driver_errors)
            raise InputFormatError(
                f"curve aggregation needs every sequence; "
                f"{len(data_errors)} failed"
            )
        curve = evaluation.mean_curve(curve for _, curve in results)

    text = curve.csv_text()
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    else:
        print(text, end="")
    return 0


def _cmd_synth(args) -> int:
    noise = synth.NoiseSpec(
        jitter_sigma=args.jitter,
        spike_frames=args.spikes,
        spike_magnitude=args.spike_magnitude,
        dropout_prob=args.dropout,
    )
    manifest = synth.build_dataset(
        args.output,
        sequences=args.sequences,
        frames=args.frames,
        seed=args.seed,
        modality=args.modality,
        name=args.name,
        motion=args.motion,
        image_size=(args.width, args.height),
        base_box=args.base_box,
        amplitude=args.amplitude,
        noise=noise,
    )
    print(
        f"wrote {len(manifest.sequences)} sequences to {args.output}",
        file=sys.stderr,
    )
    return 0


def _cmd_pipeline(args) -> int:
    manifest = formats.parse_manifest(args.manifest)
    if not manifest.sequences:
        raise InputFormatError("dataset manifest has no sequences")
    params = smoothing.SmootherParams(args.alpha, args.beta, args.max_iter)
    policy = fusion.FusionPolicy(args.policy, args.agreement_iou)
    tracker_command = _tracker_command(args)
    thresholds = evaluation.default_thresholds(args.grid)
    forward_dir = Path(args.forward)
    out_dir = None
    if args.output:
        out_dir = Path(args.output)
        out_dir.mkdir(parents=True, exist_ok=True)

    def work(seq):
        forward = formats.parse_bbox_file(forward_dir / f"{seq.sequence_id}.txt")
        smoothed = smoothing.smooth_tracklet(forward, params).track
        final = smoothed
        if stability_score(smoothed) > args.trigger_score:
            backward_processing = _acquire_backward(
                seq, manifest, args.backward, tracker_command, smoothed
            )
            if backward_processing is not None:
                if backward_processing[0] is not None:
                    backward_processing = smoothing.smooth_tracklet(
                        backward_processing, params
                    ).track
                backward = fusion.reverse_align(backward_processing)
                final = fusion.fuse(smoothed, backward, policy).track
        if out_dir is not None:
            formats.write_bbox_file(final, out_dir / f"{seq.sequence_id}.txt")
        gt = formats.parse_bbox_file(manifest.resolve(seq.groundtruth_path))
        if len(gt) != seq.frame_count:
            raise InputFormatError(
                f"ground truth for {seq.sequence_id} has {len(gt)} frames, "
                f"manifest says {seq.frame_count}"
            )
        return evaluation.auc(evaluation.overlap_series(final, gt), thresholds)

    results, data_errors, driver_errors = _run_sequences(
        manifest.sequences, work, _resolve_jobs(args)
    )
    _print_errors(data_errors, driver_errors)
    if not results:
        print("error: no sequence could be processed", file=sys.stderr)
        return _error_exit(data_errors, driver_errors) or 2

    values = [value for _, value in results]
    mean = sum(values) / len(values)
    modalities = sorted({seq.modality for seq in manifest.sequences})
    report = evaluation.EvalReport(
        per_sequence=tuple(results),
        errors=tuple(data_errors + driver_errors),
        mean_auc=float(mean),
        modality=modalities[0] if len(modalities) == 1 else "mixed",
    )
    text = evaluation.format_report(report)
    print(text, end="")
    if args.report_path:
        with open(args.report_path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    if args.json_path:
        _write_json(evaluation.report_mapping(report), args.json_path)
    return _error_exit(data_errors, driver_errors)


if __name__ == "__main__":
    main()
