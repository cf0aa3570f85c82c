"""Command-line interface.

Subcommands:
    inspect   report safe-grasp probabilities, entropy, moments, layering
    fuse      combine several adjacency files into a posterior file
    eval      score detection files against ground-truth files
    simulate  run the bin-clearing benchmark ensemble

Exit codes: 0 success, 1 usage error, 2 data or schema error, 3 domain
error (cyclic hierarchy or irreconcilable fusion).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from unstack import io
from unstack.adjacency import (CycleError, FusionConflictError, extract_order,
                               fuse, max_entropy, moment, safe_grasp_probs)
from unstack.metrics import relationship_metrics
from unstack.sim.ensemble import (run_ensemble, write_benchmark_csv,
                                  write_episode_log)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DOMAIN = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; remap to 1.
    def error(self, message):
        raise _UsageError(message)


def _fmt(value: float) -> str:
    return format(float(value), ".6g")


def _print_matrix(matrix, indent: str = "  ") -> None:
    for row in matrix:
        print(indent + "[" + ", ".join(_fmt(v) for v in row) + "]")


def cmd_inspect(args) -> int:
    a = io.load_adjacency(args.file)
    safe = safe_grasp_probs(a)
    print(f"objects: {a.n}")
    print("safe-grasp probabilities: [" + ", ".join(_fmt(p) for p in safe.probs) + "]")
    print(f"safest object: {safe.safest()}")
    print(f"max entropy (nats): {_fmt(max_entropy(a))}")
    if args.moment is not None:
        print(f"moment {args.moment}:")
        _print_matrix(moment(a, args.moment))
    if args.order_threshold is not None:
        layers = extract_order(a, args.order_threshold)
        print(f"layers (threshold {_fmt(args.order_threshold)}): "
              + str([list(layer) for layer in layers]))
    return EXIT_OK


def cmd_fuse(args) -> int:
    matrices = []
    for path in args.files:
        a = io.load_adjacency(path)
        matrices.append(a)
        print(f"input {path}: max entropy {_fmt(max_entropy(a))}")
    posterior = fuse(matrices)
    print(f"posterior: max entropy {_fmt(max_entropy(posterior))}")
    io.dump_adjacency(posterior, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    pred_dir = Path(args.predictions)
    gt_dir = Path(args.ground_truth)
    pred_files = sorted(pred_dir.glob("*.json"))
    if not pred_files:
        raise ValueError(f"{pred_dir}: no prediction files found")
    gt_files = []
    for pred_file in pred_files:
        gt_file = gt_dir / pred_file.name
        if not gt_file.exists():
            raise ValueError(f"missing ground-truth counterpart for {pred_file.name}")
        gt_files.append(gt_file)
    extras = {p.name for p in gt_dir.glob("*.json")} - {p.name for p in pred_files}
    if extras:
        raise ValueError("ground-truth files without predictions: " + ", ".join(sorted(extras)))

    class_index = None if args.binary else io.build_class_index(gt_files)
    predictions = []
    ground_truths = []
    for pred_file, gt_file in zip(pred_files, gt_files):
        pred, size = io.load_detections(pred_file)
        predictions.append(pred)
        ground_truths.append(io.load_ground_truth(gt_file, size, class_index))

    report = relationship_metrics(predictions, ground_truths,
                                  iou_threshold=args.iou, binary=args.binary)
    print(f"images: {report.images}")
    print(f"object precision: {_fmt(report.object_precision)}")
    print(f"object recall:    {_fmt(report.object_recall)}")
    print(f"image accuracy:   {_fmt(report.image_accuracy)}")
    print("image accuracy by object count:")
    for count in sorted(report.ia_by_count):
        n_images = report.image_counts[count]
        print(f"  {count} objects: {_fmt(report.ia_by_count[count])}  ({n_images} image(s))")
    print(f"relationships tp/fp/fn: {report.true_positives}/{report.false_positives}"
          f"/{report.false_negatives}")
    if args.json is not None:
        import json as _json
        Path(args.json).write_text(_json.dumps(report.as_dict(), indent=2) + "\n")
        print(f"wrote {args.json}")
    return EXIT_OK


def _parse_seeds(text: str) -> list[int]:
    if "," in text:
        return [int(part) for part in text.split(",") if part.strip()]
    return list(range(int(text)))


def cmd_simulate(args) -> int:
    config = io.load_sim_config(args.config)
    seeds = _parse_seeds(args.seeds) if args.seeds is not None else list(range(config.seeds))
    result = run_ensemble(config, seeds)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "benchmark.csv"
    log_path = out_dir / "episodes.jsonl"
    write_benchmark_csv(result.rows, csv_path)
    write_episode_log(result, log_path)

    header = (f"{'scenario':<12} {'policy':<18} {'episodes':>8} {'attempts':>9} "
              f"{'successes':>10} {'views':>7} {'success%':>9} {'eff%':>7} {'orderr%':>8}")
    print(header)
    for row in result.rows:
        print(f"{row.scenario:<12} {row.policy:<18} {row.episodes:>8d} "
              f"{row.grasp_attempts:>9.2f} {row.grasp_successes:>10.2f} "
              f"{row.views_added:>7.2f} {row.grasp_success_pct:>9.2f} "
              f"{row.action_efficiency_pct:>7.2f} {row.order_error_pct:>8.2f}")
    print(f"wrote {csv_path} and {log_path}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="unstack",
                     description="Stacking-hierarchy inference and bin-clearing tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inspect", help="report on one adjacency file")
    p.add_argument("file")
    p.add_argument("--moment", type=int, default=None, metavar="N",
                   help="also print the N-th matrix power")
    p.add_argument("--order-threshold", type=float, default=None, metavar="T",
                   help="also print topological layers of edges above T")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("fuse", help="fuse adjacency files into a posterior")
    p.add_argument("files", nargs="+")
    p.add_argument("-o", "--out", required=True, help="posterior output path")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("eval", help="score detections against ground truth")
    p.add_argument("--predictions", required=True, help="directory of detection files")
    p.add_argument("--ground-truth", required=True, help="directory of annotation files")
    p.add_argument("--iou", type=float, default=0.5, help="box-match IoU threshold")
    p.add_argument("--binary", action="store_true",
                   help="treat every object as one class (box match only)")
    p.add_argument("--json", default=None, metavar="PATH",
                   help="also write the report as JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", help="run the bin-clearing benchmark")
    p.add_argument("--config", required=True, help="simulator config (JSON)")
    p.add_argument("--seeds", default=None,
                   help="either a count N (seeds 0..N-1) or a comma list")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"unstack: {err}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (CycleError, FusionConflictError) as err:
        print(f"unstack: {err}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ValueError, OSError) as err:
        print(f"unstack: {err}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
