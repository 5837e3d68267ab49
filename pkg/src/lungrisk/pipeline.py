"""Pipeline commands behind the CLI: ingest, analyze, train, synth, report.

Every command reads and writes under ``config.out``:

    tables/       canonical CSVs written by ingest
    analysis/     statistics (JSON + CSV) and heatmap / bar-chart SVGs
    models/       serialized models
    metrics/      split summary, confusion matrices, metrics JSON
    charts/       PCA / SVM / K-means scatter SVGs
    load_report.json, run_report.json, timings.json
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .charts import bar_chart_svg, heatmap_svg, scatter_svg
from .config import PipelineConfig
from .evaluation import confusion, metrics
from .features import (
    EmptyJoinError,
    environment_series,
    feature_matrix,
    join_by_year,
    standardize,
)
from .ingest import (
    LEVELS,
    FileReport,
    IngestError,
    LoadReport,
    forest_to_csv,
    impute_missing,
    incidence_to_csv,
    parse_forest_status,
    parse_patient_csv,
    parse_tree_cover_loss,
    parse_yearly_incidence,
    patient_table_to_csv,
    tree_cover_loss_to_csv,
)
from .ml import (
    apply_mapping,
    fit_forest,
    fit_kmeans,
    fit_pca,
    fit_svm,
    fit_tree,
    map_clusters,
    split,
)
from .ml import serialize
from .stats import pearson_matrix, rank_features, spearman_pairs
from .synth import generate_environment, generate_patients

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_PRECONDITION = 0, 1, 2, 3
MODELS = ("dt", "rf", "svm", "kmeans")
ANALYSES = ("corr", "infogain", "ttest", "spearman")
SPEARMAN_PAIRS = (("loss_ha", "cases"), ("co2e_mg", "cases"))
LEGEND = {i + 1: lv for i, lv in enumerate(LEVELS)}


class PipelineError(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _rows_to_csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _record_timing(out: Path, key: str, seconds: float) -> None:
    path = out / "timings.json"
    data = json.loads(path.read_text()) if path.exists() else {}
    data[key] = round(seconds, 6)
    write_atomic(path, dump_json(data))


class _Timer:
    def __init__(self, out: Path, key: str):
        self.out, self.key = out, key

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, *_):
        if exc_type is None:
            _record_timing(self.out, self.key, time.perf_counter() - self.t0)


# ---------------------------------------------------------------- ingest

def cmd_ingest(cfg: PipelineConfig) -> dict:
    out = Path(cfg.out)
    if not cfg.patients:
        raise PipelineError("no patient file configured (--patients)", EXIT_USAGE)
    for key in PipelineConfig.INPUTS:
        path = getattr(cfg, key)
        if path and not Path(path).is_file():
            raise PipelineError(f"{key} file not found: {path}", EXIT_INPUT)

    with _Timer(out, "ingest"):
        load = LoadReport()
        tables: dict[str, str] = {}
        current = cfg.patients
        try:
            table = parse_patient_csv(cfg.patients, name="patients")
            table = impute_missing(table, cfg.impute)
            load.add(table.report)
            tables["patients.csv"] = patient_table_to_csv(table)
            if cfg.incidence:
                current = cfg.incidence
                rep = load.add(FileReport("incidence"))
                tables["incidence.csv"] = incidence_to_csv(parse_yearly_incidence(cfg.incidence, rep))
            if cfg.forest:
                current = cfg.forest
                rep = load.add(FileReport("forest"))
                tables["forest.csv"] = forest_to_csv(parse_forest_status(cfg.forest, rep))
            if cfg.tree_cover_loss:
                current = cfg.tree_cover_loss
                rep = load.add(FileReport("tree_cover_loss"))
                tables["tree_cover_loss.csv"] = tree_cover_loss_to_csv(
                    parse_tree_cover_loss(cfg.tree_cover_loss, cfg.iso, rep))
        except IngestError as exc:
            raise PipelineError(f"{current}: {exc}", EXIT_INPUT) from exc

        for name, text in tables.items():
            write_atomic(out / "tables" / name, text)
        report = {
            "version": __version__,
            "imputation": cfg.impute,
            "level_counts": table.level_counts(),
            **load.to_dict(),
        }
        write_atomic(out / "load_report.json", dump_json(report))
    return report


def _load_patients(out: Path):
    path = out / "tables" / "patients.csv"
    if not path.is_file():
        raise PipelineError(f"{path} not found; run `lungrisk ingest` first", EXIT_PRECONDITION)
    return parse_patient_csv(path)


# --------------------------------------------------------------- analyze

def cmd_analyze(cfg: PipelineConfig, which: str = "all") -> dict:
    if which not in (*ANALYSES, "all"):
        raise PipelineError(f"unknown analysis {which!r}", EXIT_USAGE)
    out = Path(cfg.out)
    todo = ANALYSES if which == "all" else (which,)
    result: dict = {}
    with _Timer(out, f"analyze:{which}"):
        if any(a != "spearman" for a in todo):
            fm = feature_matrix(_load_patients(out))
        if "corr" in todo:
            result["correlation"] = _analyze_corr(fm, out)
        if "infogain" in todo or "ttest" in todo:
            result["feature_scores"] = _analyze_scores(fm, out, cfg.contrast, todo)
        if "spearman" in todo:
            result["spearman"] = _analyze_spearman(out, cfg.interpolate_years)
    return result


def _analyze_corr(fm, out: Path) -> dict:
    cm = pearson_matrix(fm)
    doc = {"labels": cm.labels, "matrix": cm.M.tolist(), "constant": cm.constant,
           "with_target": cm.with_target()}
    write_atomic(out / "analysis" / "correlation.json", dump_json(doc))
    write_atomic(out / "analysis" / "correlation.csv",
                 _rows_to_csv([["", *cm.labels]] + [[lab, *map(repr, row)]
                                                   for lab, row in zip(cm.labels, cm.M.tolist())]))
    write_atomic(out / "analysis" / "heatmap.svg",
                 heatmap_svg(cm.labels, cm.M, "Pearson correlation (Level = encoded severity)"))
    return doc


def _analyze_scores(fm, out: Path, contrast: str, todo) -> dict:
    scores = rank_features(fm, contrast)
    doc = {"contrast": contrast, "scores": [s.to_dict() for s in scores]}
    write_atomic(out / "analysis" / "feature_scores.json", dump_json(doc))
    rows = [["rank", "feature", "info_gain", "pearson_r", "t_value", "p_value"]]
    rows += [[i + 1, s.name, repr(s.info_gain), repr(s.pearson_r), repr(s.t_value), repr(s.p_value)]
             for i, s in enumerate(scores)]
    write_atomic(out / "analysis" / "feature_scores.csv", _rows_to_csv(rows))
    if "infogain" in todo:
        write_atomic(out / "analysis" / "infogain.svg",
                     bar_chart_svg([s.name for s in scores], [s.info_gain for s in scores],
                                   "Information gain (bits)"))
    if "ttest" in todo:
        finite = [s for s in scores if np.isfinite(s.t_value)]
        write_atomic(out / "analysis" / "ttest.svg",
                     bar_chart_svg([s.name for s in finite], [s.t_value for s in finite],
                                   f"t statistic ({contrast})", decimals=2))
    return doc


def _analyze_spearman(out: Path, interpolate: bool) -> dict:
    inc_path = out / "tables" / "incidence.csv"
    loss_path = out / "tables" / "tree_cover_loss.csv"
    if not inc_path.is_file() or not loss_path.is_file():
        raise PipelineError("spearman needs the incidence and tree cover loss tables; "
                            "configure them and rerun ingest", EXIT_PRECONDITION)
    forest_path = out / "tables" / "forest.csv"
    series = environment_series(
        incidence=parse_yearly_incidence(inc_path),
        forest=parse_forest_status(forest_path) if forest_path.is_file() else (),
        loss=parse_tree_cover_loss(loss_path),
    )
    wanted = {k: series[k] for k in ("cases", "loss_ha", "co2e_mg")}
    try:
        joined = join_by_year(wanted, interpolate=interpolate)
    except EmptyJoinError as exc:
        raise PipelineError(f"{exc} (pass --interpolate-years to align sparse years)",
                            EXIT_PRECONDITION) from exc
    if joined.n < 2:
        raise PipelineError(f"only {joined.n} joined year(s); pass --interpolate-years",
                            EXIT_PRECONDITION)
    doc = {"interpolated": interpolate, "n": joined.n, "years": joined.years,
           "pairs": spearman_pairs(joined, SPEARMAN_PAIRS)}
    write_atomic(out / "analysis" / "spearman.json", dump_json(doc))
    write_atomic(out / "analysis" / "joined_years.csv",
                 _rows_to_csv([[repr(v) if isinstance(v, float) else v for v in row]
                               for row in joined.to_rows()]))
    return doc


# ----------------------------------------------------------------- train

def cmd_train(cfg: PipelineConfig, model: str) -> dict:
    if model not in (*MODELS, "all"):
        raise PipelineError(f"unknown model {model!r}; choose from {', '.join(MODELS)}", EXIT_USAGE)
    if cfg.seed is None:
        raise PipelineError("model commands need --seed", EXIT_USAGE)
    out = Path(cfg.out)
    fm = feature_matrix(_load_patients(out))
    sp = split(fm.y, cfg.ratio, cfg.seed, cfg.stratified)
    write_atomic(out / "metrics" / "split.json", dump_json(sp.to_dict()))
    results = {}
    for name in MODELS if model == "all" else (model,):
        with _Timer(out, f"train:{name}"):
            results[name] = _TRAINERS[name](cfg, fm, sp, out)
    return results if model == "all" else results[model]


def _evaluate(name: str, actual, predicted, sp, out: Path, evaluated_on: str, extra=None) -> dict:
    cm = confusion(actual, predicted)
    doc = {
        "model": name,
        "split": sp.to_dict(),
        "confusion": cm.to_dict(),
        "metrics": metrics(cm, evaluated_on).to_dict(),
        **(extra or {}),
    }
    write_atomic(out / "metrics" / f"{name}.json", dump_json(doc))
    write_atomic(out / "metrics" / f"{name}_confusion.csv", cm.to_csv())
    return doc


def _train_dt(cfg, fm, sp, out):
    m = cfg.model
    tree = fit_tree(fm.X[sp.train_indices], fm.y[sp.train_indices], fm.column_names,
                    max_depth=m.max_depth, min_samples_split=m.min_samples_split)
    write_atomic(out / "models" / "dt.json", serialize.dumps(tree))
    root = tree.root
    extra = {"root_split": None if root.is_leaf else
             {"feature": tree.feature_names[root.feature], "threshold": root.threshold},
             "depth": tree.depth()}
    return _evaluate("dt", fm.y[sp.test_indices], tree.predict(fm.X[sp.test_indices]), sp, out,
                     "test split", extra)


def _train_rf(cfg, fm, sp, out):
    m = cfg.model
    forest = fit_forest(fm.X[sp.train_indices], fm.y[sp.train_indices], fm.column_names,
                        n_trees=m.n_trees, max_features=m.max_features, bootstrap=m.bootstrap,
                        seed=cfg.seed, max_depth=m.max_depth,
                        min_samples_split=m.min_samples_split, n_jobs=cfg.n_jobs)
    write_atomic(out / "models" / "rf.json", serialize.dumps(forest))
    return _evaluate("rf", fm.y[sp.test_indices], forest.predict(fm.X[sp.test_indices]), sp, out,
                     "test split")


def _train_svm(cfg, fm, sp, out):
    m = cfg.model
    tr, te = sp.train_indices, sp.test_indices
    pca = fit_pca(fm.X if cfg.pca_on_all else fm.X[tr], k=2)
    P = pca.transform(fm.X)
    svm = fit_svm(P[tr], fm.y[tr], C=m.svm_c, epochs=m.svm_epochs, lr=m.svm_lr,
                  batch_size=m.svm_batch_size, seed=cfg.seed, n_jobs=cfg.n_jobs)
    write_atomic(out / "models" / "svm.json", serialize.dumps(svm, pca=pca))
    write_atomic(out / "charts" / "pca_scatter.svg",
                 scatter_svg(P, fm.y, "Patients in 2-D PCA space", legend=LEGEND))
    write_atomic(out / "charts" / "svm_boundary.svg",
                 scatter_svg(P[te], fm.y[te], "Linear SVM decision regions (test split)",
                             classify=svm.predict, legend=LEGEND))
    extra = {"pca": {"fit_on": "all rows" if cfg.pca_on_all else "train split",
                     "explained_variance": pca.explained_variance.tolist(),
                     "total_variance": float(pca.eigenvalues.sum())}}
    return _evaluate("svm", fm.y[te], svm.predict(P[te]), sp, out, "test split", extra)


def _train_kmeans(cfg, fm, sp, out):
    m = cfg.model
    Z, _, _ = standardize(fm.X)
    pca = fit_pca(fm.X, k=2)
    P = pca.transform(fm.X)
    space = P if m.kmeans_space == "pca" else Z
    km = fit_kmeans(space, k=m.kmeans_k, seed=cfg.seed, max_iter=m.kmeans_max_iter, tol=m.kmeans_tol)
    write_atomic(out / "models" / "kmeans.json", serialize.dumps(km))
    write_atomic(out / "charts" / "kmeans_pca.svg",
                 scatter_svg(P, km.assignments + 1, f"K-means clusters (k={km.k}) in PCA space",
                             legend={i + 1: f"cluster {i}" for i in range(km.k)}))
    mappings = {}
    for mode in ("raw", "majority"):
        if mode == "raw" and km.k != len(LEVELS):
            continue
        mapping = map_clusters(km, fm.y, mode)
        pred = apply_mapping(km.assignments, mapping)
        cm = confusion(fm.y, pred)
        mappings[mode] = {
            "mapping": {str(k): v for k, v in mapping.items()},
            "confusion": cm.to_dict(),
            "metrics": metrics(cm, "full dataset").to_dict(),
        }
    doc = {"model": "kmeans", "space": m.kmeans_space, "inertia": km.inertia,
           "n_iter": km.n_iter, "mappings": mappings}
    write_atomic(out / "metrics" / "kmeans.json", dump_json(doc))
    return doc


_TRAINERS = {"dt": _train_dt, "rf": _train_rf, "svm": _train_svm, "kmeans": _train_kmeans}


# ----------------------------------------------------------------- synth

def cmd_synth(n: int, profile, seed: int, output: str | None, noise: float = 1.0,
              environment_dir: str | None = None) -> dict:
    try:
        text, truth = generate_patients(n, profile, seed=seed, noise=noise)
    except ValueError as exc:
        raise PipelineError(str(exc), EXIT_USAGE) from exc
    if output:
        write_atomic(Path(output), text)
    if environment_dir:
        names = {"incidence": "incidence.csv", "forest": "forest_status.csv",
                 "tree_cover_loss": "tree_cover_loss.csv"}
        for key, csv_text in generate_environment(seed).items():
            write_atomic(Path(environment_dir) / names[key], csv_text)
    return {"truth": truth, "csv": None if output else text}


# ---------------------------------------------------------------- report

def cmd_report(cfg: PipelineConfig) -> dict:
    out = Path(cfg.out)

    def read(rel: str):
        p = out / rel
        return json.loads(p.read_text()) if p.is_file() else None

    report = {
        "tool": "lungrisk",
        "version": __version__,
        "config": cfg.to_dict(),
        "load_report": read("load_report.json"),
        "correlation": read("analysis/correlation.json"),
        "feature_scores": read("analysis/feature_scores.json"),
        "spearman": read("analysis/spearman.json"),
        "models": {name: read(f"metrics/{name}.json") for name in MODELS},
        "timings_file": "timings.json",
    }
    if report["load_report"] is None:
        raise PipelineError("nothing to report; run `lungrisk ingest` first", EXIT_PRECONDITION)
    write_atomic(out / "run_report.json", dump_json(report))
    return report
