"""Classification metrics, one-way ANOVA and Tukey HSD."""

import json
import math
from dataclasses import asdict, dataclass, field
from itertools import combinations

import numpy as np
from scipy.stats import rankdata

from . import specfun
from .errors import ArgumentError, MetricError


def _aligned(y_true, other, name):
    y = np.asarray(y_true).ravel()
    o = np.asarray(other).ravel()
    if y.size == 0:
        raise ArgumentError("metrics need at least one sample")
    if y.size != o.size:
        raise ArgumentError(f"labels ({y.size}) and {name} ({o.size}) differ in length")
    return y, o


def accuracy(y_true, y_pred):
    y, p = _aligned(y_true, y_pred, "predictions")
    return float(np.mean(y == p))


def f1(y_true, y_pred, positive=1):
    """F1 of the positive class; 0 when precision + recall is 0."""
    y, p = _aligned(y_true, y_pred, "predictions")
    tp = np.sum((p == positive) & (y == positive))
    fp = np.sum((p == positive) & (y != positive))
    fn = np.sum((p != positive) & (y == positive))
    denom = 2 * tp + fp + fn
    return float(2 * tp / denom) if denom and tp else 0.0


def auc(y_true, scores, positive=1):
    """ROC AUC as the Mann-Whitney statistic; tied scores count one half."""
    y, s = _aligned(y_true, scores, "scores")
    pos = y == positive
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise MetricError("AUC needs both classes present")
    ranks = rankdata(s)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


METRICS = ("accuracy", "f1", "auc")


@dataclass(frozen=True)
class MetricRecord:
    dataset: str
    encoding: str
    split: int
    accuracy: float
    f1: float
    auc: float

    def __post_init__(self):
        for name in METRICS:
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise MetricError(f"{name}={v!r} outside [0, 1]")


def score_all(y_true, y_pred, scores, positive=1):
    return {"accuracy": accuracy(y_true, y_pred), "f1": f1(y_true, y_pred, positive),
            "auc": auc(y_true, scores, positive)}


@dataclass(frozen=True)
class AnovaResult:
    f_stat: float
    df_between: int
    df_within: int
    p_value: float
    ss_between: float = 0.0
    ss_within: float = 0.0
    degenerate: bool = False


@dataclass(frozen=True)
class TukeyPair:
    group_a: str
    group_b: str
    mean_diff: float  # mean_b - mean_a
    q_stat: float
    p_value: float


@dataclass(frozen=True)
class TukeyResult:
    pairs: tuple
    n_per_group: int
    df_within: int
    ms_within: float
    degenerate: bool = False
    groups: tuple = field(default=())

    def lookup(self, a, b):
        for p in self.pairs:
            if (p.group_a, p.group_b) in ((a, b), (b, a)):
                return p
        raise KeyError((a, b))

    def p(self, a, b):
        return self.lookup(a, b).p_value


def _as_groups(groups):
    gs = [np.asarray(g, dtype=np.float64).ravel() for g in groups]
    if len(gs) < 2:
        raise ArgumentError("need at least 2 groups")
    for i, g in enumerate(gs):
        if g.size < 2:
            raise ArgumentError(f"group {i} has {g.size} value(s); need >= 2")
    return gs


def _within(gs):
    return float(sum(np.sum((g - g.mean()) ** 2) for g in gs))


def one_way_anova(groups):
    """``F = MS_between / MS_within`` with the upper-tail F probability."""
    gs = _as_groups(groups)
    total = np.concatenate(gs)
    grand = total.mean()
    k, n = len(gs), total.size
    ss_b = float(sum(g.size * (g.mean() - grand) ** 2 for g in gs))
    ss_w = _within(gs)
    df_b, df_w = k - 1, n - k
    ms_b, ms_w = ss_b / df_b, ss_w / df_w
    if ms_w == 0.0:
        if ms_b > 0.0:
            return AnovaResult(math.inf, df_b, df_w, 0.0, ss_b, ss_w, degenerate=True)
        return AnovaResult(0.0, df_b, df_w, 1.0, ss_b, ss_w, degenerate=True)
    f = ms_b / ms_w
    return AnovaResult(f, df_b, df_w, specfun.f_sf(f, df_b, df_w), ss_b, ss_w)


def tukey_hsd(groups, names=None):
    """All-pairs Tukey HSD for equal group sizes."""
    gs = _as_groups(groups)
    sizes = {g.size for g in gs}
    if len(sizes) != 1:
        raise ArgumentError(f"Tukey HSD here needs equal group sizes, got {sorted(sizes)}")
    names = [str(i) for i in range(len(gs))] if names is None else [str(n) for n in names]
    if len(names) != len(gs):
        raise ArgumentError("one name per group required")
    k, n = len(gs), gs[0].size
    df_w = k * n - k
    ms_w = _within(gs) / df_w
    se = math.sqrt(ms_w / n)
    means = [float(g.mean()) for g in gs]
    pairs = []
    for i, j in combinations(range(k), 2):
        diff = means[j] - means[i]
        if se == 0.0:
            q = 0.0 if diff == 0.0 else math.inf
        else:
            q = abs(diff) / se
        if q == 0.0:
            p = 1.0
        elif math.isinf(q):
            p = 0.0
        else:
            p = specfun.studentized_range_sf(q, k, df_w)
        pairs.append(TukeyPair(names[i], names[j], diff, q, min(1.0, max(0.0, p))))
    return TukeyResult(tuple(pairs), n, df_w, ms_w, degenerate=se == 0.0,
                       groups=tuple(names))


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def stats_to_dict(anova, tukey):
    return _jsonable({
        "anova": asdict(anova) if anova is not None else None,
        "tukey": asdict(tukey) if tukey is not None else None,
    })


def dumps(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True)
