"""Main entry point for ABBA-VSM: compress, train, predict, evaluate, grid-search.

Run from the project root as: python -m src.main <command> ...
"""
import argparse
import logging
import os
import sys
from dataclasses import replace
from typing import List, Optional

try:
    from src import config as cfg
    from src.classification.model_io import load_model, save_model
    from src.config import PipelineConfig, load_config_file, resolve_config, search_space_from
    from src.errors import AbbaVsmError
    from src.experiments.grid import SearchSpace, count_configs, grid_search
    from src.experiments.pipeline import compress, evaluate, load_input, predict, rt_sweep, train
    from src.i_o.logs import setup_logging
    from src.i_o.reports import ensure_parent, write_cr_table, write_grid_table, write_json, write_predictions
    from src.i_o.wire import SUFFIX, WireHeader, write_segments
    from src.ingest.ucr import load_ucr, znormalize
except ImportError:
    # Fallback for direct execution (python src/main.py)
    sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
    from src import config as cfg
    from src.classification.model_io import load_model, save_model
    from src.config import PipelineConfig, load_config_file, resolve_config, search_space_from
    from src.errors import AbbaVsmError
    from src.experiments.grid import SearchSpace, count_configs, grid_search
    from src.experiments.pipeline import compress, evaluate, load_input, predict, rt_sweep, train
    from src.i_o.logs import setup_logging
    from src.i_o.reports import ensure_parent, write_cr_table, write_grid_table, write_json, write_predictions
    from src.i_o.wire import SUFFIX, WireHeader, write_segments
    from src.ingest.ucr import load_ucr, znormalize

logger = logging.getLogger("abba_vsm")

_CONFIG_FLAGS = ("rt", "ctype", "ct", "wsize", "wstep", "csize", "tsize", "seed", "output_dir", "znorm", "fallback")


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="TOML file with [pipeline] / [search] tables")
    p.add_argument("--log-level", default=None, help=f"default {cfg.LOG_LEVEL}")
    p.add_argument("--log-format", choices=("text", "json"), default=None)
    p.add_argument("--rt", type=float, help="reduction tolerance")
    p.add_argument("--ctype", choices=cfg.CTYPES, help="clustering type")
    p.add_argument("--ct", type=float, help="sorting-based clustering tolerance")
    p.add_argument("--wsize", type=int, help="window size in symbols")
    p.add_argument("--wstep", type=int, help="window step in symbols")
    p.add_argument("--csize", type=int, help="k-means cluster count")
    p.add_argument("--tsize", type=float, help="test fraction of the stratified split")
    p.add_argument("--seed", type=int, help="PCG64 seed for splits and k-means")
    p.add_argument("--output-dir", dest="output_dir", help=f"default {cfg.OUTPUT_DIR}")
    p.add_argument("--znorm", action="store_true", default=None, help="z-normalize each raw series first")
    p.add_argument("--fallback", action="store_true", default=None,
                   help="predict the largest class when no test word is known")
    p.add_argument("--allow-out-of-range", action="store_true",
                   help="accept hyperparameters outside the search-space bounds")
    p.add_argument("--delimiter", choices=("auto", "tab", "comma", "whitespace"), default="auto")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="abba-vsm", description="Symbolic compression and classification of time series")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", parents=[common], help="reduce a dataset to a segment stream")
    p.add_argument("input", help="UCR dataset file")
    p.add_argument("-o", "--output", help=f"segment stream path (default <output-dir>/<name>{SUFFIX})")
    p.add_argument("--unlabeled", action="store_true", help="file has no label column")

    p = sub.add_parser("train", parents=[common], help="fit codebook and TF-IDF model")
    p.add_argument("input", help=f"UCR dataset file or {SUFFIX} stream")
    p.add_argument("-m", "--model", help="model path (default <output-dir>/<name>.model.json)")

    p = sub.add_parser("predict", parents=[common], help="classify samples with a trained model")
    p.add_argument("model", help="model file written by train")
    p.add_argument("input", help=f"UCR dataset file or {SUFFIX} stream")
    p.add_argument("-o", "--output", help="predictions CSV (default <output-dir>/<name>_predictions.csv)")
    p.add_argument("--unlabeled", action="store_true", help="file has no label column")

    p = sub.add_parser("evaluate", parents=[common], help="split, train, test and report")
    p.add_argument("dataset", help="labeled UCR dataset file")
    p.add_argument("--test-file", help="separate test file instead of the tsize split")
    p.add_argument("--report", help="report JSON (default <output-dir>/<name>_report.json)")
    p.add_argument("--predictions", help="predictions CSV (default <output-dir>/<name>_predictions.csv)")
    p.add_argument("--rt-sweep", action="store_true", help="also write the CR-vs-RT table")
    p.add_argument("--sweep-values", type=float, nargs="+", default=list(cfg.DEFAULT_SEARCH_SPACE["rt"]))
    p.add_argument("--sweep-output", help="CR table path (default <output-dir>/<name>_cr_vs_rt.tsv)")

    p = sub.add_parser("grid-search", parents=[common], help="sweep the hyperparameter space")
    p.add_argument("dataset", help="labeled UCR dataset file")
    p.add_argument("--test-file", help="separate test file instead of the tsize split")
    p.add_argument("--budget", type=int, help="evaluate only the first N configs")
    p.add_argument("--threshold", type=float, default=None, help=f"accuracy threshold (default {cfg.ACCURACY_THRESHOLD})")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--rt-values", type=float, nargs="+")
    p.add_argument("--ctype-values", nargs="+", choices=cfg.CTYPES)
    p.add_argument("--ct-values", type=float, nargs="+")
    p.add_argument("--wsize-values", type=int, nargs="+")
    p.add_argument("--wstep-values", type=int, nargs="+")
    p.add_argument("--csize-values", type=int, nargs="+")
    p.add_argument("--tsize-values", type=float, nargs="+")
    p.add_argument("--output", help="results table (default <output-dir>/<name>_grid.tsv)")
    p.add_argument("--summary", help="summary JSON (default <output-dir>/<name>_grid.json)")
    return parser


def _config_from(args, file_values) -> PipelineConfig:
    overrides = {k: getattr(args, k, None) for k in _CONFIG_FLAGS}
    return resolve_config(file_values, overrides).validate(args.allow_out_of_range)


def _out(config: PipelineConfig, explicit: Optional[str], name: str, suffix: str) -> str:
    return explicit or os.path.join(config.output_dir, f"{name}{suffix}")


def cmd_compress(args, file_values) -> int:
    config = _config_from(args, file_values)
    ds = load_ucr(args.input, delimiter=args.delimiter, labeled=not args.unlabeled)
    if config.znorm:
        ds = znormalize(ds)
    reduced = compress(ds, config.rt)
    path = _out(config, args.output, ds.name, SUFFIX)
    ensure_parent(path)
    stats = write_segments(reduced.ordered(), WireHeader(ds.name, config.rt), path)
    print(f"✅ {stats.sample_count} samples -> {stats.segment_count} segments in {reduced.seconds:.3f}s")
    print(f"   {path}: {stats.bytes_written} bytes written, payload {stats.segment_payload_bytes} "
          f"of {stats.raw_equivalent_bytes} raw bytes ({stats.reduction_percent:.1f}% saved)")
    print(f"   mean CR {reduced.mean_cr():.4f}, mean segment fraction {reduced.mean_segment_fraction():.4f}")
    return 0


def cmd_train(args, file_values) -> int:
    config = _config_from(args, file_values)
    # a stream carries its own rt; only an explicit --rt is checked against it
    requested = args.rt if args.input.endswith(SUFFIX) else config.rt
    seqs, name, rt = load_input(args.input, requested, labeled=True, znorm=bool(config.znorm),
                               delimiter=args.delimiter)
    model, summary = train(seqs, replace(config, rt=rt), name)
    logger.info("train", extra={"command": "train", "dataset": name, "config": model.metadata.get("config")})
    path = _out(config, args.model, name, ".model.json")
    ensure_parent(path)
    save_model(model, path)
    print(f"✅ Model trained on {len(seqs)} samples in {summary.seconds:.3f}s -> {path}")
    print(f"   alphabet size k = {summary.alphabet_size}, vocabulary size = {summary.vocabulary_size}")
    for label in model.class_labels:
        words = " ".join(summary.top_words.get(label, [])) or "-"
        print(f"   class {label}: {summary.class_sizes[label]} samples, {summary.document_sizes[label]} words, "
              f"top words {words}")
    return 0


def cmd_predict(args, file_values) -> int:
    config = _config_from(args, file_values)
    model = load_model(args.model)
    rt = args.rt if args.rt is not None else (model.rt if model.rt is not None else config.rt)
    seqs, name, _ = load_input(args.input, rt, labeled=not args.unlabeled, znorm=bool(config.znorm),
                               delimiter=args.delimiter)
    preds, seconds = predict(model, seqs, bool(config.fallback))
    path = _out(config, args.output, name, "_predictions.csv")
    write_predictions(preds, model.class_labels, path)
    print(f"✅ {len(preds)} predictions in {seconds:.3f}s -> {path}")
    skipped = sum(p.status == "unclassifiable" for p in preds)
    if skipped:
        print(f"⚠️ {skipped} sample(s) unclassifiable (no known word); rerun with --fallback to force a class")
    judged = [p for p in preds if p.actual is not None]
    if judged:
        print(f"   accuracy {sum(p.correct for p in judged) / len(judged):.4f} on {len(judged)} labeled samples")
    return 0


def cmd_evaluate(args, file_values) -> int:
    config = _config_from(args, file_values)
    ds = load_ucr(args.dataset, delimiter=args.delimiter)
    test_ds = load_ucr(args.test_file, delimiter=args.delimiter) if args.test_file else None
    if config.znorm:
        ds = znormalize(ds)
        test_ds = znormalize(test_ds) if test_ds is not None else None
    logger.info("evaluate", extra={"command": "evaluate", "dataset": ds.name, "config": config.hyperparameters()})
    print(f"🚀 Evaluating {ds.name} ({len(ds)} samples) with {config.hyperparameters()}")
    report = evaluate(ds, config, test_ds)

    report_path = _out(config, args.report, ds.name, "_report.json")
    pred_path = _out(config, args.predictions, ds.name, "_predictions.csv")
    write_predictions(report.predictions, report.class_labels, pred_path)
    doc = report.to_dict()
    doc["predictions_file"] = pred_path
    if args.rt_sweep:
        rows = rt_sweep(ds, args.sweep_values)
        sweep_path = _out(config, args.sweep_output, ds.name, "_cr_vs_rt.tsv")
        write_cr_table(rows, sweep_path)
        doc["cr_table_file"] = sweep_path
        print(f"✅ CR-vs-RT table ({len(rows)} tolerances) -> {sweep_path}")
    write_json(doc, report_path)

    print(f"✅ accuracy {report.accuracy:.4f} ({report.correct}/{report.total}), mean CR {report.mean_cr:.4f}, "
          f"mean segment fraction {report.mean_segment_fraction:.4f}")
    print(f"   reconstruction error {report.mean_reconstruction_error:.4f} from segments, "
          f"{report.mean_symbolic_error:.4f} from symbols")
    print(f"   compressor {report.compressor_seconds:.3f}s + classifier {report.classifier_seconds:.3f}s "
          f"(train {report.train_seconds:.3f}s, test {report.test_seconds:.3f}s)")
    if report.unclassifiable:
        print(f"⚠️ {report.unclassifiable} test sample(s) unclassifiable")
    print(f"   report -> {report_path}")
    return 0


def cmd_grid_search(args, file_values) -> int:
    base = _config_from(args, file_values)
    flag_lists = {k: getattr(args, f"{k}_values") for k in ("rt", "ctype", "ct", "wsize", "wstep", "csize", "tsize")}
    space = SearchSpace.from_dict(search_space_from(file_values, flag_lists))
    threshold = args.threshold if args.threshold is not None else cfg.ACCURACY_THRESHOLD

    ds = load_ucr(args.dataset, delimiter=args.delimiter)
    test_ds = load_ucr(args.test_file, delimiter=args.delimiter) if args.test_file else None
    if base.znorm:
        ds = znormalize(ds)
        test_ds = znormalize(test_ds) if test_ds is not None else None
    total = count_configs(space)
    n = min(total, args.budget) if args.budget else total
    logger.info("grid-search", extra={"command": "grid-search", "dataset": ds.name, "configs": n})
    print(f"🚀 Grid search on {ds.name}: {n} of {total} configs, {args.workers} worker(s)")
    result = grid_search(ds, space, base, budget=args.budget, threshold=threshold,
                         workers=args.workers, test_ds=test_ds)

    table_path = _out(base, args.output, ds.name, "_grid.tsv")
    summary_path = _out(base, args.summary, ds.name, "_grid.json")
    write_grid_table(result.rows, table_path)
    write_json(result.to_dict(), summary_path)

    best = result.best_row
    if best is None:
        print("⚠️ No config could be evaluated")
    else:
        print(f"✅ best accuracy {best.accuracy:.4f}, mean CR {best.mean_cr:.4f}: {best.config}")
    print(f"   {result.passed} of {len(result.rows)} configs reach accuracy >= {threshold}")
    print(f"   table -> {table_path}, summary -> {summary_path}")
    return 0


COMMANDS = {
    "compress": cmd_compress,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "grid-search": cmd_grid_search,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level or cfg.LOG_LEVEL, args.log_format or cfg.LOG_FORMAT)
    try:
        file_values = load_config_file(args.config) if args.config else None
        logger.debug("running %s", args.command, extra={"command": args.command})
        return COMMANDS[args.command](args, file_values)
    except AbbaVsmError as e:
        print(f"❌ {e.message}", file=sys.stderr)
        if e.hint:
            print(f"   hint: {e.hint}", file=sys.stderr)
        logger.debug("command failed", extra={"command": args.command, "code": e.code})
        return e.exit_code
    except KeyboardInterrupt:
        print("\n⚠️ Interrupted by user", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
