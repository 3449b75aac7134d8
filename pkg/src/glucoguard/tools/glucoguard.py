"""
Glucoguard operator tool.

Generates and summarizes data, trains and compares models, runs scenarios against
an in-process system, inspects block stores and serves the gateway.
"""
import argparse
import json
import logging
import sys
from collections import Counter
from typing import Callable, Optional, Sequence

from werkzeug.serving import run_simple

from glucoguard.common.config import GlucoguardConfig, get_config
from glucoguard.common.config_misc import DetectorPolicy
from glucoguard.common.errors import ConfigurationError, GlucoguardError
from glucoguard.common.logging import get_logger
from glucoguard.datagen.dataset import read_csv, write_csv
from glucoguard.datagen.generator import GeneratorConfig, generate_dataset
from glucoguard.datagen.summary import format_stats, summarize
from glucoguard.detector.data import ForestConfig
from glucoguard.detector.forest import fit_forest
from glucoguard.detector.metrics import evaluate as evaluate_model
from glucoguard.detector.model_io import load_model, save_model
from glucoguard.detector.report import (
    DEFAULT_KNN_K,
    KNN_SWEEP_K,
    compare_models,
    metrics_frame,
    roc_frame,
    write_frame,
    write_reports,
)
from glucoguard.detector.split import cross_validate, grid_search, train_test_split
from glucoguard.devices.data import ScenarioFormatError
from glucoguard.devices.scenario import PRESETS, get_preset, load_scenario
from glucoguard.devices.simulation import fresh_system, run_scenario
from glucoguard.gateway.server import generate_app
from glucoguard.gateway.service import GlucoguardService
from glucoguard.identity.store import load_identities
from glucoguard.ledger.chain import UnknownBlock
from glucoguard.ledger.store import block_to_dict, read_store
from glucoguard.ledger.validate import validate_chain
from glucoguard.version import __verbose_version__

__author__ = "glucoguard"

EXIT_CODES = {"success": 0, "integrity": 1, "usage": 2, "fatal": 3}

# Errors reading or parsing input files
INPUT_ERRORS = (OSError, ValueError, GlucoguardError)


def _forest_config(args: argparse.Namespace, defaults: DetectorPolicy) -> ForestConfig:
    def pick(name: str, default: int) -> int:
        value = getattr(args, name, None)
        return default if value is None else value

    return ForestConfig(
        n_trees=pick("trees", defaults.n_trees),
        max_depth=pick("depth", defaults.max_depth),
        seed=pick("seed", defaults.seed),
        features_per_split=defaults.features_per_split,
        bootstrap=defaults.bootstrap,
        min_samples_leaf=defaults.min_samples_leaf,
        min_samples_split=defaults.min_samples_split,
    )


def gen_data(args: argparse.Namespace, config: Optional[GlucoguardConfig], logger: logging.Logger) -> int:
    """Generate a synthetic dataset and print its statistics."""
    dataset = generate_dataset(GeneratorConfig(n_samples=args.n, seed=args.seed, label_noise=args.noise))
    write_csv(dataset, args.out)
    if len(dataset):
        print(format_stats(summarize(dataset)))
    return EXIT_CODES["success"]


def summarize_data(args: argparse.Namespace, config: Optional[GlucoguardConfig], logger: logging.Logger) -> int:
    print(format_stats(summarize(read_csv(args.data))))
    return EXIT_CODES["success"]


def train(args: argparse.Namespace, config: Optional[GlucoguardConfig], logger: logging.Logger) -> int:
    """Train on 80% of the data, cross-validating on that part, and test on the rest."""
    dataset = read_csv(args.data)
    forest_config = _forest_config(args, config.detector if config else DetectorPolicy())
    train_idx, test_idx = train_test_split(len(dataset), args.test_fraction, forest_config.seed)
    train_set, test_set = dataset.subset(train_idx), dataset.subset(test_idx)
    if args.cv > 1:
        scores = cross_validate(train_set, lambda d: fit_forest(d, forest_config), args.cv, forest_config.seed)
        print(f"cv accuracy     {sum(scores) / len(scores):.4f} ({', '.join(f'{s:.4f}' for s in scores)})")
    model = fit_forest(train_set, forest_config, trained_at=args.trained_at)
    print(f"train accuracy  {evaluate_model(model, train_set).accuracy:.4f}")
    print(f"test accuracy   {evaluate_model(model, test_set).accuracy:.4f}")
    save_model(model, args.model_out)
    return EXIT_CODES["success"]


def evaluate(args: argparse.Namespace, config: Optional[GlucoguardConfig], logger: logging.Logger) -> int:
    """Metrics of a saved model on a dataset, optionally with its ROC curve."""
    model = load_model(args.model)
    dataset = read_csv(args.data)
    metrics = evaluate_model(model, dataset, args.threshold)
    tp, fp, tn, fn = metrics.confusion
    auc = "n/a" if metrics.auc is None else f"{metrics.auc:.4f}"
    print(f"accuracy  {metrics.accuracy:.4f}")
    print(f"auc       {auc}")
    print(f"confusion tp={tp} fp={fp} tn={tn} fn={fn}")
    if args.roc_out:
        write_frame(roc_frame(metrics), args.roc_out)
    return EXIT_CODES["success"]


def compare(args: argparse.Namespace, config: Optional[GlucoguardConfig], logger: logging.Logger) -> int:
    """Forest against decision tree and KNN baselines, best test accuracy first."""
    dataset = read_csv(args.data)
    forest_config = _forest_config(args, config.detector if config else DetectorPolicy())
    knn_k = KNN_SWEEP_K if args.knn_sweep else DEFAULT_KNN_K
    reports = compare_models(dataset, forest_config, knn_k, seed=forest_config.seed)
    # stable sort, so equal accuracies keep the forest, tree, knn order
    reports = sorted(reports, key=lambda r: -r.test.accuracy)
    print(metrics_frame(reports).to_string(index=False, float_format=lambda x: f"{x:.4f}"))
    if args.out:
        write_reports(reports, args.out, args.roc_dir)
    return EXIT_CODES["success"]


def grid(args: argparse.Namespace, config: Optional[GlucoguardConfig], logger: logging.Logger) -> int:
    dataset = read_csv(args.data)
    results = grid_search(dataset, k=args.cv, seed=args.seed, limit=args.limit)
    for rank, result in enumerate(results, start=1):
        c = result.config
        print(
            f"{rank:4d} {result.mean_accuracy:.4f} n_trees={c.n_trees} max_depth={c.max_depth} "
            f"features_per_split={c.features_per_split} min_samples_leaf={c.min_samples_leaf} "
            f"min_samples_split={c.min_samples_split}"
        )
    return EXIT_CODES["success"]


def chain_verify(args: argparse.Namespace, config: Optional[GlucoguardConfig], logger: logging.Logger) -> int:
    blocks = read_store(args.store)
    directory = load_identities(args.identities) if args.identities else None
    error = validate_chain(blocks, directory)
    if error is not None:
        message = f": {error.message}" if error.message else ""
        print(f"Block {error.block_index}: {error.reason.value}{message}", file=sys.stderr)
        return EXIT_CODES["integrity"]
    print(f"{len(blocks)} blocks verified")
    if directory is None:
        print("Approval signatures not verified, use --identities to check them", file=sys.stderr)
    return EXIT_CODES["success"]


def chain_show(args: argparse.Namespace, config: Optional[GlucoguardConfig], logger: logging.Logger) -> int:
    blocks = read_store(args.store)
    if not 0 <= args.index < len(blocks):
        raise UnknownBlock(f"No block with index {args.index}, the store holds {len(blocks)} blocks")
    print(json.dumps(block_to_dict(blocks[args.index]), indent=2))
    return EXIT_CODES["success"]


def simulate(args: argparse.Namespace, config: Optional[GlucoguardConfig], logger: logging.Logger) -> int:
    """Run a scenario against a fresh in-process system and write the event log."""
    script = load_scenario(args.scenario) if args.scenario else get_preset(args.preset)
    model = load_model(args.model)
    policy = config.dosing if config else None
    system = fresh_system(script, model, policy=policy)
    log = run_scenario(script, system)
    system.service.close()
    if args.log_out:
        log.write(args.log_out)
    else:
        sys.stdout.write(log.to_jsonl())
    counts = Counter(entry.type for entry in log.entries)
    logger.info(f"Scenario {script.name}: " + ", ".join(f"{v} {k}" for k, v in sorted(counts.items())))
    if log.of_type("error"):
        return EXIT_CODES["fatal"]
    return EXIT_CODES["success"]


def serve(args: argparse.Namespace, config: Optional[GlucoguardConfig], logger: logging.Logger) -> int:
    """Run the gateway until interrupted."""
    if config is None:
        config = get_config(None)
    service = GlucoguardService.from_config(config)
    app = generate_app(service)
    host = args.hostname or config.gateway.host
    port = args.port or config.gateway.port
    logger.info(f"Serving on {host}:{port}")
    try:
        run_simple(hostname=host, port=port, application=app, threaded=True)
    finally:
        service.close()
    return EXIT_CODES["success"]


def _noise(value: str) -> float:
    res = float(value)
    if not 0.0 <= res < 0.5:
        raise argparse.ArgumentTypeError("noise must be < 0.5 (and >= 0)")
    return res


def _unsigned(value: str) -> int:
    res = int(value)
    if res < 0:
        raise argparse.ArgumentTypeError(f"{value} is negative")
    return res


def _add_forest_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--trees", dest="trees", metavar="N", type=int, help="Number of trees")
    parser.add_argument("--depth", dest="depth", metavar="N", type=int, help="Maximum tree depth")
    parser.add_argument("--seed", dest="seed", metavar="SEED", type=_unsigned, help="Random seed")


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        description=f"Glucoguard {__verbose_version__}",
        add_help=True,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument(
        "--config",
        dest="config",
        metavar="CFGFILE",
        type=str,
        default=None,
        help="Path to the configuration file",
    )
    parser.add_argument(
        "--debug", dest="debug", action="store_true", default=False, help="Enable debug operation"
    )
    parser.add_argument(
        "--syslog", dest="syslog", action="store_true", default=False, help="Enable syslog output"
    )
    parser.add_argument(
        "--log-dir", dest="log_dir", metavar="DIR", default=None, help="Also log to a file per run in this directory"
    )

    subparsers = parser.add_subparsers(dest="command")

    parser_gen = subparsers.add_parser("gen-data", help="Generate a synthetic dataset")
    parser_gen.set_defaults(func=gen_data)
    parser_gen.add_argument("--n", dest="n", metavar="N", type=_unsigned, default=16969, help="Number of samples")
    parser_gen.add_argument("--seed", dest="seed", metavar="SEED", type=_unsigned, default=42, help="Random seed")
    parser_gen.add_argument("--noise", dest="noise", type=_noise, default=0.05, help="Label noise")
    parser_gen.add_argument("--out", dest="out", metavar="CSV", required=True, help="Output file")

    parser_summary = subparsers.add_parser("summarize", help="Descriptive statistics of a dataset")
    parser_summary.set_defaults(func=summarize_data)
    parser_summary.add_argument("--data", dest="data", metavar="CSV", required=True, help="Dataset")

    parser_train = subparsers.add_parser("train", help="Train a random forest")
    parser_train.set_defaults(func=train)
    parser_train.add_argument("--data", dest="data", metavar="CSV", required=True, help="Dataset")
    parser_train.add_argument("--model-out", dest="model_out", metavar="FILE", required=True, help="Model file")
    _add_forest_arguments(parser_train)
    parser_train.add_argument("--cv", dest="cv", metavar="K", type=_unsigned, default=5, help="Cross-validation folds")
    parser_train.add_argument("--test-fraction", dest="test_fraction", type=float, default=0.2, help="Holdout share")
    parser_train.add_argument(
        "--trained-at", dest="trained_at", metavar="SECONDS", type=_unsigned, default=0, help="Training time to record"
    )

    parser_eval = subparsers.add_parser("evaluate", help="Evaluate a saved model")
    parser_eval.set_defaults(func=evaluate)
    parser_eval.add_argument("--model", dest="model", metavar="FILE", required=True, help="Model file")
    parser_eval.add_argument("--data", dest="data", metavar="CSV", required=True, help="Dataset")
    parser_eval.add_argument("--roc-out", dest="roc_out", metavar="CSV", help="Write the ROC curve here")
    parser_eval.add_argument("--threshold", dest="threshold", type=float, default=0.5, help="Decision threshold")

    parser_compare = subparsers.add_parser("compare", help="Compare the forest with the baselines")
    parser_compare.set_defaults(func=compare)
    parser_compare.add_argument("--data", dest="data", metavar="CSV", required=True, help="Dataset")
    _add_forest_arguments(parser_compare)
    parser_compare.add_argument(
        "--knn-sweep", dest="knn_sweep", action="store_true", default=False, help="KNN for k = 3, 5, ..., 15"
    )
    parser_compare.add_argument("--out", dest="out", metavar="CSV", help="Write the metrics here")
    parser_compare.add_argument("--roc-dir", dest="roc_dir", metavar="DIR", help="Write ROC curves here (with --out)")

    parser_grid = subparsers.add_parser("grid-search", help="Rank forest hyperparameters by CV accuracy")
    parser_grid.set_defaults(func=grid)
    parser_grid.add_argument("--data", dest="data", metavar="CSV", required=True, help="Dataset")
    parser_grid.add_argument("--limit", dest="limit", metavar="N", type=_unsigned, help="Only the first N configs")
    parser_grid.add_argument("--cv", dest="cv", metavar="K", type=_unsigned, default=5, help="Cross-validation folds")
    parser_grid.add_argument("--seed", dest="seed", metavar="SEED", type=_unsigned, default=42, help="Random seed")

    parser_chain = subparsers.add_parser("chain", help="Inspect a block store")
    chain_subparsers = parser_chain.add_subparsers(dest="chain_command")
    parser_verify = chain_subparsers.add_parser("verify", help="Verify the integrity of a block store")
    parser_verify.set_defaults(func=chain_verify)
    parser_verify.add_argument("--store", dest="store", metavar="FILE", required=True, help="Block store")
    parser_verify.add_argument(
        "--identities", dest="identities", metavar="JSONL", help="Identity store, to re-verify approvals"
    )
    parser_show = chain_subparsers.add_parser("show", help="Show one block as JSON")
    parser_show.set_defaults(func=chain_show)
    parser_show.add_argument("--store", dest="store", metavar="FILE", required=True, help="Block store")
    parser_show.add_argument("--index", dest="index", metavar="N", type=int, default=0, help="Block index")

    parser_sim = subparsers.add_parser("simulate", help="Run a scenario through an in-process system")
    parser_sim.set_defaults(func=simulate)
    scenario = parser_sim.add_mutually_exclusive_group(required=True)
    scenario.add_argument("--scenario", dest="scenario", metavar="JSON", help="Scenario file")
    scenario.add_argument("--preset", dest="preset", choices=sorted(PRESETS), help="Shipped scenario")
    parser_sim.add_argument("--model", dest="model", metavar="FILE", required=True, help="Model file")
    parser_sim.add_argument("--log-out", dest="log_out", metavar="JSONL", help="Event log (default stdout)")

    parser_serve = subparsers.add_parser("serve", help="Run the gateway")
    parser_serve.set_defaults(func=serve)
    parser_serve.add_argument(
        "--config", dest="config", metavar="CFGFILE", default=argparse.SUPPRESS, help="Same as the global --config"
    )
    parser_serve.add_argument("--hostname", dest="hostname", help="Listen address (default from config)")
    parser_serve.add_argument("--port", dest="port", type=int, help="Port to listen on (default from config)")

    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        parser.exit(EXIT_CODES["usage"])
    return args


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command, return the exit code."""
    args = parse_args(argv)
    try:
        root = get_logger(args.command, debug=args.debug, syslog=args.syslog, logdir=args.log_dir)
    except OSError as exc:
        print(f"Cannot open log file: {exc}", file=sys.stderr)
        return EXIT_CODES["usage"]
    logger = root.getChild(__name__)
    func: Callable[[argparse.Namespace, Optional[GlucoguardConfig], logging.Logger], int] = args.func
    try:
        config = get_config(args.config) if args.config else None
        return func(args, config, logger)
    except ConfigurationError as exc:
        config_logger = logging.getLogger("configuration")
        for message in str(exc).splitlines():
            config_logger.critical(message)
        return EXIT_CODES["usage"]
    except (ScenarioFormatError, UnknownBlock) as exc:
        logger.critical(str(exc))
        print(str(exc), file=sys.stderr)
        return EXIT_CODES["usage"]
    except INPUT_ERRORS as exc:
        logger.critical(str(exc))
        print(str(exc), file=sys.stderr)
        return EXIT_CODES["fatal"]


def main() -> None:
    """Main program function."""
    try:
        sys.exit(run())
    except KeyboardInterrupt:
        logging.warning("Keyboard interrupt, program stopped")
        sys.exit(EXIT_CODES["success"])


if __name__ == "__main__":
    main()
