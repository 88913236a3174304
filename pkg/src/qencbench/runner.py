"""Dataset ingestion, splits and the full benchmark protocol.

For every split and encoding: fit the scaler on the training rows, build
the train/train and test/train kernels, fit the SVC and score the held-out
rows. Per metric the encoding groups (plus an optional imported baseline)
are compared with one-way ANOVA and Tukey HSD.
"""

import csv
import dataclasses
import json
import math
import os
import tempfile
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import featsel, stats, svc
from ._parallel import pmap
from .encoders import MAP_KINDS, EncodingSpec, fit_scaler
from .errors import (ArgumentError, BaselineImportError, IngestionError,
                     QencError, StageError)
from .qkernel import KernelConfig, gram_matrix, write_gram_csv

MISSING_TOKENS = frozenset({"", "?", "na", "nan", "null", "none"})
RESULTS_HEADER = ("dataset", "encoding", "split", "accuracy", "f1", "auc")


def _parse_bool(s):
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ArgumentError(f"not a boolean: {s!r}")


def parse_int_list(s):
    if isinstance(s, (list, tuple)):
        return tuple(int(v) for v in s)
    s = str(s).strip()
    if not s or s.lower() == "none":
        return None
    return tuple(int(v) for v in s.replace(" ", "").split(",") if v)


def parse_str_list(s):
    if isinstance(s, (list, tuple)):
        return tuple(str(v) for v in s)
    return tuple(v.strip() for v in str(s).split(",") if v.strip())


def _opt(conv):
    def parse(s):
        if s is None or str(s).strip().lower() in ("", "none"):
            return None
        return conv(s)
    return parse


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a benchmark run.

    ``label_column`` is a 0-based index (negative counts from the end) or a
    header name. ``features`` lists 0-based column positions among the
    non-label columns; ``select_k`` instead picks ``k`` of them by QUBO.
    """

    dataset: str = ""
    dataset_name: str = None
    label_column: str = "-1"
    positive_class: str = None
    features: tuple = None
    select_k: int = None
    select_solver: str = "annealing"
    select_sweeps: int = 1000
    select_restarts: int = 10
    encodings: tuple = MAP_KINDS
    kernel_mode: str = "Exact"
    shots: int = 1024
    n_splits: int = 50
    train_fraction: float = 0.7
    seed: int = 0
    C: float = 1.0
    tol: float = 1e-3
    altiqp_entanglement: str = "Full"
    output_dir: str = "results"
    baseline: str = None
    baseline_name: str = "Baseline"
    dump_gram: bool = False
    dump_models: bool = False
    n_jobs: int = None

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ArgumentError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if self.n_splits < 1:
            raise ArgumentError(f"n_splits must be >= 1, got {self.n_splits}")
        if not self.encodings:
            raise ArgumentError("at least one encoding is required")
        for e in self.encodings:
            if e not in MAP_KINDS:
                raise ArgumentError(f"unknown encoding {e!r}; choose from {MAP_KINDS}")
        if len(set(self.encodings)) != len(self.encodings):
            raise ArgumentError("encodings must be distinct")
        KernelConfig(self.kernel_mode, self.shots, 0)
        if self.features is not None and self.select_k is not None:
            raise ArgumentError("give either features or select_k, not both")
        if self.select_solver not in ("annealing", "exhaustive"):
            raise ArgumentError(f"unknown select_solver {self.select_solver!r}")

    @property
    def name(self):
        return self.dataset_name or Path(self.dataset).stem

    def to_flat(self):
        """The config as flat ``key = value`` text (round-trips through ``parse_config``)."""
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None:
                v = "none"
            elif isinstance(v, tuple):
                v = ",".join(map(str, v))
            elif isinstance(v, bool):
                v = str(v).lower()
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


FIELD_PARSERS = {
    "dataset": str,
    "dataset_name": _opt(str),
    "label_column": str,
    "positive_class": _opt(str),
    "features": parse_int_list,
    "select_k": _opt(int),
    "select_solver": str,
    "select_sweeps": int,
    "select_restarts": int,
    "encodings": parse_str_list,
    "kernel_mode": str,
    "shots": int,
    "n_splits": int,
    "train_fraction": float,
    "seed": int,
    "C": float,
    "tol": float,
    "altiqp_entanglement": str,
    "output_dir": str,
    "baseline": _opt(str),
    "baseline_name": str,
    "dump_gram": _parse_bool,
    "dump_models": _parse_bool,
    "n_jobs": _opt(int),
}


def parse_config_text(text):
    """Flat ``key = value`` lines; ``#`` starts a comment, blank lines are ignored."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ArgumentError(f"config line {lineno}: expected key = value")
        if key not in FIELD_PARSERS:
            raise ArgumentError(f"config line {lineno}: unknown key {key!r}")
        try:
            out[key] = FIELD_PARSERS[key](value.strip())
        except ValueError as exc:
            raise ArgumentError(f"config line {lineno}: bad value for {key}: {exc}") from exc
    return out


def parse_config(path, **overrides):
    """Load a config file, then apply ``overrides`` (already typed) on top."""
    with open(path, encoding="utf-8") as fh:
        values = parse_config_text(fh.read())
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


# Ingestion ---------------------------------------------------------------

def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return s.strip().lower() not in MISSING_TOKENS


def _resolve_column(label_column, header, n_cols):
    lc = str(label_column).strip()
    try:
        idx = int(lc)
    except ValueError:
        if header is None or lc not in header:
            raise IngestionError(f"label column {lc!r} not found in header") from None
        return header.index(lc)
    if not -n_cols <= idx < n_cols:
        raise IngestionError(f"label column {idx} out of range for {n_cols} columns")
    return idx % n_cols


def _label_key(s):
    try:
        return (0, float(s), s)
    except ValueError:
        return (1, 0.0, s)


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple
    positive_class: str
    classes: tuple


def load_dataset(path, label_column=-1, feature_columns=None, positive_class=None):
    """Read a CSV into a float feature matrix and a +1/-1 label vector.

    The first row is a header when it has more non-numeric cells than the
    second row. ``feature_columns`` index the non-label columns.
    """
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"dataset file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if not rows:
        raise IngestionError(f"{path}: empty file")
    header = None
    if len(rows) > 1:
        non_num = [sum(not _is_number(c) for c in r) for r in rows[:2]]
        if non_num[0] > non_num[1]:
            header, rows = [c.strip() for c in rows[0]], rows[1:]
    elif not all(_is_number(c) for c in rows[0][:-1]):
        raise IngestionError(f"{path}: no data rows")
    first_line = 2 if header else 1
    n_cols = len(header) if header else len(rows[0])
    lab = _resolve_column(label_column, header, n_cols)
    cols = [c for c in range(n_cols) if c != lab]
    if feature_columns is not None:
        try:
            cols = [cols[i] for i in feature_columns]
        except IndexError:
            raise IngestionError(
                f"feature column out of range (dataset has {len(cols)} feature columns)"
            ) from None
    names = tuple(header[c] if header else str(c) for c in cols)

    x = np.empty((len(rows), len(cols)))
    raw_labels = []
    for r, row in enumerate(rows):
        line = r + first_line
        if len(row) != n_cols:
            raise IngestionError(f"row {line}: expected {n_cols} cells, found {len(row)}")
        for j, c in enumerate(cols):
            cell = row[c].strip()
            if cell.lower() in MISSING_TOKENS:
                raise IngestionError(f"row {line}, column {c}: missing value")
            try:
                x[r, j] = float(cell)
            except ValueError:
                raise IngestionError(f"row {line}, column {c}: non-numeric value {cell!r}") from None
            if not math.isfinite(x[r, j]):
                raise IngestionError(f"row {line}, column {c}: non-finite value {cell!r}")
        cell = row[lab].strip()
        if cell.lower() in MISSING_TOKENS:
            raise IngestionError(f"row {line}, column {lab}: missing label")
        raw_labels.append(cell)

    classes = sorted(set(raw_labels), key=_label_key)
    if len(classes) != 2:
        raise IngestionError(f"expected 2 label classes, found {len(classes)}: {classes[:5]}")
    if positive_class is None:
        pos = classes[1]
    else:
        pos = next((c for c in classes if c == str(positive_class)
                    or (_is_number(c) and _is_number(str(positive_class))
                        and float(c) == float(positive_class))), None)
        if pos is None:
            raise IngestionError(f"positive class {positive_class!r} not among labels {classes}")
    y = np.array([1 if v == pos else -1 for v in raw_labels], dtype=np.int64)
    return Dataset(x, y, names, pos, tuple(classes))


# Splits ------------------------------------------------------------------

def child_seed(master_seed, index):
    """Counter-based child seed: depends only on ``(master_seed, index)``."""
    return int(np.random.SeedSequence([int(master_seed), int(index)]).generate_state(1)[0])


def make_splits(n_rows, labels=None, n_splits=50, train_fraction=0.7, seed=0):
    """Shuffled (train, test) index pairs, train size ``floor(fraction * n_rows)``."""
    if n_splits < 1:
        raise ArgumentError(f"n_splits must be >= 1, got {n_splits}")
    if not 0.0 < train_fraction < 1.0:
        raise ArgumentError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    if labels is not None and len(labels) != n_rows:
        raise ArgumentError("labels length differs from n_rows")
    # guard against 0.7 * 10 landing a hair below 7
    n_train = int(math.floor(train_fraction * n_rows * (1.0 + 1e-12)))
    if n_train < 1 or n_train >= n_rows:
        raise ArgumentError(
            f"{n_rows} rows with train fraction {train_fraction} leave an empty side"
        )
    out = []
    for i in range(int(n_splits)):
        perm = np.random.default_rng(child_seed(seed, i)).permutation(n_rows)
        out.append((np.sort(perm[:n_train]), np.sort(perm[n_train:])))
    return out


# Baseline ----------------------------------------------------------------

def import_baseline(path, n_splits=None):
    """Metric vectors (ordered by split) from a CSV with split/accuracy/f1/auc columns."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = [f.strip() for f in (reader.fieldnames or [])]
        for col in ("split",) + stats.METRICS:
            if col not in fields:
                raise BaselineImportError(f"{path}: missing column {col!r}")
        rows = [{k.strip(): v for k, v in r.items()} for r in reader]
    try:
        rows.sort(key=lambda r: int(r["split"]))
        groups = {m: np.array([float(r[m]) for r in rows]) for m in stats.METRICS}
    except (TypeError, ValueError) as exc:
        raise BaselineImportError(f"{path}: unreadable value ({exc})") from exc
    if n_splits is not None and len(rows) != n_splits:
        raise BaselineImportError(f"{path}: {len(rows)} splits, run has {n_splits}")
    return groups


# Report ------------------------------------------------------------------

@dataclass
class RunReport:
    config: RunConfig
    records: list
    stats: dict
    selected_features: tuple = None
    scalers: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)

    def groups(self, metric):
        return metric_groups(self.records, metric)


def metric_groups(records, metric):
    """``{encoding: values ordered by split}`` in first-seen encoding order."""
    out = {}
    for r in sorted(records, key=lambda r: r.split):
        out.setdefault(r.encoding, []).append(getattr(r, metric))
    order = list(dict.fromkeys(r.encoding for r in records))
    return {e: np.array(out[e]) for e in order}


def compare_groups(groups):
    """ANOVA + Tukey over named groups, or a skip reason."""
    names = list(groups)
    if len(names) < 2:
        return {"skipped": "needs >= 2 groups", "anova": None, "tukey": None}
    values = [groups[n] for n in names]
    if min(v.size for v in values) < 2:
        return {"skipped": "needs >= 2 values per group", "anova": None, "tukey": None}
    if len({v.size for v in values}) != 1:
        return {"skipped": "unequal group sizes", "anova": None, "tukey": None}
    a = stats.one_way_anova(values)
    t = stats.tukey_hsd(values, names)
    out = stats.stats_to_dict(a, t)
    out["skipped"] = None
    return out


def compute_stats(records, baseline=None, baseline_name="Baseline"):
    result = {}
    for m in stats.METRICS:
        groups = metric_groups(records, m)
        if baseline is not None:
            groups[baseline_name] = np.asarray(baseline[m], dtype=np.float64)
        entry = compare_groups(groups)
        entry["groups"] = list(groups)
        entry["means"] = {k: float(np.mean(v)) for k, v in groups.items()}
        result[m] = entry
    return result


def stats_summary_csv(stats_dict):
    lines = ["metric,test,group_a,group_b,statistic,p_value,mean_diff"]
    for m in stats.METRICS:
        e = stats_dict.get(m)
        if not e or e.get("skipped"):
            continue
        a = e["anova"]
        lines.append(f"{m},anova,,,{a['f_stat']},{a['p_value']},")
        for p in e["tukey"]["pairs"]:
            lines.append(f"{m},tukey,{p['group_a']},{p['group_b']},{p['q_stat']},"
                         f"{p['p_value']},{p['mean_diff']}")
    return "\n".join(lines) + "\n"


def results_csv(records):
    lines = [",".join(RESULTS_HEADER)]
    for r in records:
        lines.append(f"{r.dataset},{r.encoding},{r.split},{r.accuracy!r},{r.f1!r},{r.auc!r}")
    return "\n".join(lines) + "\n"


def read_results_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in RESULTS_HEADER if c not in (reader.fieldnames or [])]
        if missing:
            raise IngestionError(f"{path}: missing column(s) {missing}")
        return [stats.MetricRecord(r["dataset"], r["encoding"], int(r["split"]),
                                   float(r["accuracy"]), float(r["f1"]), float(r["auc"]))
                for r in reader]


def atomic_write(path, text):
    """Write to a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _kernel_seed(split_seed, encoding):
    return child_seed(split_seed, zlib.crc32(encoding.encode()))


def _run_task(task, x, y, cfg, out):
    enc, split, (tr, te) = task
    t = {}
    stage = "scale"
    try:
        spec = EncodingSpec(enc, x.shape[1], altiqp_entanglement=cfg.altiqp_entanglement)
        t0 = time.perf_counter()
        scaler = fit_scaler(x[tr], spec)
        kcfg = KernelConfig(cfg.kernel_mode, cfg.shots,
                            _kernel_seed(child_seed(cfg.seed, split), enc))
        stage = "gram"
        g_tr = gram_matrix(x[tr], None, spec, scaler, kcfg, n_jobs=1)
        g_te = gram_matrix(x[te], x[tr], spec, scaler, kcfg, n_jobs=1)
        t1 = time.perf_counter()
        stage = "train"
        model = svc.train(g_tr, y[tr], C=cfg.C, tol=cfg.tol)
        t2 = time.perf_counter()
        stage = "score"
        scores = svc.decision_scores(model, g_te)
        pred = np.where(scores >= 0, 1, -1)
        m = stats.score_all(y[te], pred, scores, positive=1)
        rec = stats.MetricRecord(cfg.name, enc, split, m["accuracy"], m["f1"], m["auc"])
        t3 = time.perf_counter()
        t = {"gram": t1 - t0, "train": t2 - t1, "score": t3 - t2}
        stage = "write"
        if cfg.dump_gram:
            write_gram_csv(g_tr, out / "gram" / f"{enc}_split{split}_train.csv")
            write_gram_csv(g_te, out / "gram" / f"{enc}_split{split}_test.csv")
        if cfg.dump_models:
            svc.dump_model(model, out / "models" / f"{enc}_split{split}.txt")
        return rec, {"mins": list(scaler.mins), "maxs": list(scaler.maxs)}, t, None
    except QencError as exc:
        return None, None, t, StageError(stage, f"{enc} split {split}: {exc}")
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return None, None, t, StageError(stage, f"{enc} split {split}: {exc}")


def run_benchmark(cfg):
    """Run the whole protocol and write every artifact into ``cfg.output_dir``.

    Any failure is raised as a ``StageError`` after the records that did
    complete have been written to ``results.csv``.
    """
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.dump_gram:
        (out / "gram").mkdir(exist_ok=True)
    if cfg.dump_models:
        (out / "models").mkdir(exist_ok=True)
    timings = {}

    t0 = time.perf_counter()
    try:
        data = load_dataset(cfg.dataset, cfg.label_column, cfg.features, cfg.positive_class)
    except QencError as exc:
        raise StageError("load", str(exc)) from exc
    x, y = data.features, data.labels
    timings["load"] = time.perf_counter() - t0

    selected = cfg.features
    if cfg.select_k is not None:
        t0 = time.perf_counter()
        try:
            sel = featsel.select_k_features(
                x, (y > 0).astype(np.float64), cfg.select_k, solver=cfg.select_solver,
                sweeps=cfg.select_sweeps, restarts=cfg.select_restarts, seed=cfg.seed,
                n_jobs=cfg.n_jobs)
        except QencError as exc:
            raise StageError("select", str(exc)) from exc
        selected = sel.chosen
        x = x[:, list(selected)]
        featsel.write_selection(sel, out / "selection.json")
        timings["select"] = time.perf_counter() - t0

    baseline = None
    if cfg.baseline:
        try:
            baseline = import_baseline(cfg.baseline, cfg.n_splits)
        except (QencError, OSError) as exc:
            raise StageError("baseline", str(exc)) from exc

    try:
        splits = make_splits(x.shape[0], y, cfg.n_splits, cfg.train_fraction, cfg.seed)
    except QencError as exc:
        raise StageError("split", str(exc)) from exc

    tasks = [(enc, i, splits[i]) for enc in cfg.encodings for i in range(cfg.n_splits)]
    t0 = time.perf_counter()
    results = pmap(lambda t: _run_task(t, x, y, cfg, out), tasks, cfg.n_jobs)
    timings["protocol"] = time.perf_counter() - t0
    for stage in ("gram", "train", "score"):
        timings[stage] = sum(r[2].get(stage, 0.0) for r in results)

    records = [r[0] for r in results if r[0] is not None]
    scalers = {f"{t[0]}/{t[1]}": r[1] for t, r in zip(tasks, results) if r[1] is not None}
    files = {"results": out / "results.csv"}
    atomic_write(files["results"], results_csv(records))
    errors = [r[3] for r in results if r[3] is not None]
    if errors:
        raise errors[0]

    t0 = time.perf_counter()
    st = compute_stats(records, baseline, cfg.baseline_name)
    timings["stats"] = time.perf_counter() - t0

    files.update(stats=out / "stats.json", summary=out / "stats_summary.csv",
                 scalers=out / "scalers.json", config=out / "config.txt",
                 timings=out / "timings.json")
    atomic_write(files["stats"], stats.dumps(st) + "\n")
    atomic_write(files["summary"], stats_summary_csv(st))
    atomic_write(files["scalers"], json.dumps(
        {"selected_features": list(selected) if selected is not None else None,
         "positive_class": data.positive_class, "scalers": scalers}, indent=1) + "\n")
    atomic_write(files["config"], cfg.to_flat())
    atomic_write(files["timings"], json.dumps(timings, indent=1, sort_keys=True) + "\n")
    return RunReport(cfg, records, st, selected, scalers, timings, files)
