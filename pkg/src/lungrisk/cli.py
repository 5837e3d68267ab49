"""Command-line entry point.

    lungrisk ingest   --patients P.csv [--incidence ...] --out DIR
    lungrisk analyze  {corr,infogain,ttest,spearman,all} --out DIR
    lungrisk train    {dt,rf,svm,kmeans,all} --seed 42 --out DIR
    lungrisk synth    --n 1000 --profile planted --seed 0 --output P.csv
    lungrisk report   --out DIR

Options may also come from ``--config run.json``; flags override the file.
Exit codes: 0 ok, 1 usage, 2 input/schema, 3 analysis precondition.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .config import PipelineConfig
from .pipeline import (
    ANALYSES,
    EXIT_INPUT,
    EXIT_USAGE,
    MODELS,
    PipelineError,
    cmd_analyze,
    cmd_ingest,
    cmd_report,
    cmd_synth,
    cmd_train,
)

log = logging.getLogger("lungrisk")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _max_features(value: str):
    return int(value) if value.isdigit() else value


def _common() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("pipeline options (override --config)")
    g.add_argument("--config", help="JSON configuration file")
    g.add_argument("--out", help="output directory")
    g.add_argument("--patients", help="patient-level CSV")
    g.add_argument("--incidence", help="yearly lung-cancer incidence CSV")
    g.add_argument("--forest", help="forest status CSV")
    g.add_argument("--tree-cover-loss", dest="tree_cover_loss", help="tree cover loss / CO2e CSV")
    g.add_argument("--iso", help="country code filter for tree cover loss (default VNM)")
    g.add_argument("--seed", type=int)
    g.add_argument("--ratio", type=float, help="training fraction (default 0.7)")
    g.add_argument("--impute", choices=["median", "mode", "drop_row"])
    g.add_argument("--stratified", action="store_true", default=None)
    g.add_argument("--pca-on-all", dest="pca_on_all", action="store_true", default=None,
                   help="fit the SVM's PCA on all rows instead of the training split")
    g.add_argument("--interpolate-years", dest="interpolate_years", action="store_true", default=None)
    g.add_argument("--contrast", choices=["regression", "high-vs-low"])
    g.add_argument("--n-jobs", dest="n_jobs", type=int)
    m = p.add_argument_group("model hyperparameters")
    m.add_argument("--max-depth", dest="max_depth", type=int)
    m.add_argument("--min-samples-split", dest="min_samples_split", type=int)
    m.add_argument("--n-trees", dest="n_trees", type=int)
    m.add_argument("--max-features", dest="max_features", type=_max_features)
    m.add_argument("--no-bootstrap", dest="bootstrap", action="store_false", default=None)
    m.add_argument("--svm-c", dest="svm_c", type=float)
    m.add_argument("--svm-epochs", dest="svm_epochs", type=int)
    m.add_argument("--svm-lr", dest="svm_lr", type=float)
    m.add_argument("--svm-batch-size", dest="svm_batch_size", type=int)
    m.add_argument("--kmeans-k", dest="kmeans_k", type=int)
    m.add_argument("--kmeans-max-iter", dest="kmeans_max_iter", type=int)
    m.add_argument("--kmeans-tol", dest="kmeans_tol", type=float)
    m.add_argument("--kmeans-space", dest="kmeans_space", choices=["standardized", "pca"])
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="lungrisk", description="Lung-cancer risk analytics pipeline")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("ingest", parents=[common], help="parse, clean and cache the input tables")
    a = sub.add_parser("analyze", parents=[common], help="feature statistics and charts")
    a.add_argument("which", choices=[*ANALYSES, "all"])
    t = sub.add_parser("train", parents=[common], help="train and evaluate a model")
    t.add_argument("model", choices=[*MODELS, "all"])
    s = sub.add_parser("synth", parents=[common], help="write a synthetic patient CSV")
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--profile", default="planted", help="planted | none | graded")
    s.add_argument("--effect", action="append", default=[], metavar="FEATURE=WEIGHT",
                   help="custom planted effect; repeatable, replaces --profile")
    s.add_argument("--noise", type=float, default=1.0)
    s.add_argument("--output", help="CSV path (default: stdout)")
    s.add_argument("--environment", metavar="DIR", help="also write synthetic environment CSVs")
    sub.add_parser("report", parents=[common], help="assemble run_report.json")
    return parser


def _config(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    cfg.override(vars(args))
    cfg.validate()
    return cfg


def _effects(specs: list[str]) -> dict[str, float]:
    out = {}
    for spec in specs:
        name, sep, weight = spec.rpartition("=")
        if not sep or not name:
            raise PipelineError(f"bad --effect {spec!r}; expected FEATURE=WEIGHT", EXIT_USAGE)
        out[name.strip()] = float(weight)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        try:
            cfg = _config(args)
        except FileNotFoundError as exc:
            raise PipelineError(f"config file not found: {exc.filename}", EXIT_INPUT) from exc
        except (ValueError, TypeError) as exc:
            raise PipelineError(f"bad configuration: {exc}", EXIT_USAGE) from exc

        if args.command == "ingest":
            rep = cmd_ingest(cfg)
            for t in rep["tables"]:
                log.info("%s: %d rows, %d imputations", t["name"], t["rows"], t["imputations"])
        elif args.command == "analyze":
            cmd_analyze(cfg, args.which)
        elif args.command == "train":
            res = cmd_train(cfg, args.model)
            for name, doc in (res.items() if args.model == "all" else [(args.model, res)]):
                if name == "kmeans":
                    for mode, m in doc["mappings"].items():
                        print(f"kmeans[{mode}] accuracy={m['metrics']['accuracy']:.4f}")
                else:
                    print(f"{name} accuracy={doc['metrics']['accuracy']:.4f}")
        elif args.command == "synth":
            profile = _effects(args.effect) if args.effect else args.profile
            res = cmd_synth(args.n, profile, cfg.seed if cfg.seed is not None else 0,
                            args.output, args.noise, args.environment)
            if res["csv"] is not None:
                sys.stdout.write(res["csv"])
            else:
                log.info("ground truth: %s", json.dumps(res["truth"], sort_keys=True))
        elif args.command == "report":
            cmd_report(cfg)
    except PipelineError as exc:
        print(f"lungrisk: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
