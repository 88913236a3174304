"""Hand-written SVG box plots and expressibility histogram overlays."""

import logging
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .runner import atomic_write, metric_groups

log = logging.getLogger(__name__)

WIDTH, HEIGHT = 640, 400
_MARGIN = dict(left=60, right=20, top=40, bottom=50)
_COLORS = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3")


@dataclass(frozen=True)
class BoxStats:
    median: float
    q1: float
    q3: float
    whisker_lo: float
    whisker_hi: float
    outliers: tuple


def box_stats(values):
    """Quartiles by linear interpolation; whiskers reach the furthest point within 1.5 IQR."""
    v = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if v.size == 0:
        raise ValueError("box_stats needs at least one value")
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    outliers = tuple(float(o) for o in v[(v < lo_fence) | (v > hi_fence)])
    return BoxStats(float(med), float(q1), float(q3), float(inside.min()),
                    float(inside.max()), outliers)


def _fmt(x):
    return f"{x:.2f}"


def _svg(body, title):
    return (f'<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">\n'
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>\n'
            f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>\n'
            + "\n".join(body) + "\n</svg>\n")


def _y_axis(lo, hi, to_y, label):
    out = []
    x0 = _MARGIN["left"]
    out.append(f'<line x1="{x0}" y1="{_fmt(to_y(lo))}" x2="{x0}" y2="{_fmt(to_y(hi))}" stroke="black"/>')
    for t in np.linspace(lo, hi, 6):
        y = _fmt(to_y(t))
        out.append(f'<line x1="{x0 - 4}" y1="{y}" x2="{x0}" y2="{y}" stroke="black"/>')
        out.append(f'<text x="{x0 - 7}" y="{y}" text-anchor="end" dominant-baseline="middle">{t:.3g}</text>')
    out.append(f'<text x="16" y="{HEIGHT / 2}" transform="rotate(-90 16 {HEIGHT / 2})" '
               f'text-anchor="middle">{escape(label)}</text>')
    return out


def box_plot_svg(groups, title="", ylabel=""):
    """One box per named group. Empty groups are skipped with a warning."""
    kept = {}
    for name, vals in groups.items():
        v = np.asarray(vals, dtype=np.float64).ravel()
        if v.size == 0:
            log.warning("box plot %r: group %r is empty, skipped", title, name)
            continue
        kept[name] = v
    if not kept:
        raise ValueError("box plot has no non-empty groups")
    allv = np.concatenate(list(kept.values()))
    lo, hi = float(allv.min()), float(allv.max())
    pad = 0.05 * (hi - lo) if hi > lo else 0.05 * max(1.0, abs(hi))
    lo, hi = lo - pad, hi + pad
    top, bottom = _MARGIN["top"], HEIGHT - _MARGIN["bottom"]

    def to_y(v):
        return bottom - (v - lo) / (hi - lo) * (bottom - top)

    body = _y_axis(lo, hi, to_y, ylabel)
    slot = (WIDTH - _MARGIN["left"] - _MARGIN["right"]) / len(kept)
    half = min(30.0, 0.3 * slot)
    for k, (name, v) in enumerate(kept.items()):
        b = box_stats(v)
        cx = _MARGIN["left"] + slot * (k + 0.5)
        col = _COLORS[k % len(_COLORS)]
        attrs = (f'data-group="{escape(str(name))}" data-median="{b.median!r}" data-q1="{b.q1!r}" '
                 f'data-q3="{b.q3!r}" data-whisker-lo="{b.whisker_lo!r}" data-whisker-hi="{b.whisker_hi!r}"')
        body.append(f'<g class="box" {attrs}>')
        body.append(f'<line class="whisker" x1="{_fmt(cx)}" y1="{_fmt(to_y(b.whisker_lo))}" '
                    f'x2="{_fmt(cx)}" y2="{_fmt(to_y(b.q1))}" stroke="black"/>')
        body.append(f'<line class="whisker" x1="{_fmt(cx)}" y1="{_fmt(to_y(b.q3))}" '
                    f'x2="{_fmt(cx)}" y2="{_fmt(to_y(b.whisker_hi))}" stroke="black"/>')
        for w in (b.whisker_lo, b.whisker_hi):
            body.append(f'<line class="cap" x1="{_fmt(cx - half / 2)}" y1="{_fmt(to_y(w))}" '
                        f'x2="{_fmt(cx + half / 2)}" y2="{_fmt(to_y(w))}" stroke="black"/>')
        body.append(f'<rect class="iqr" x="{_fmt(cx - half)}" y="{_fmt(to_y(b.q3))}" '
                    f'width="{_fmt(2 * half)}" height="{_fmt(to_y(b.q1) - to_y(b.q3))}" '
                    f'fill="{col}" fill-opacity="0.6" stroke="black"/>')
        body.append(f'<line class="median" x1="{_fmt(cx - half)}" y1="{_fmt(to_y(b.median))}" '
                    f'x2="{_fmt(cx + half)}" y2="{_fmt(to_y(b.median))}" stroke="black" stroke-width="2"/>')
        for o in b.outliers:
            body.append(f'<circle class="outlier" cx="{_fmt(cx)}" cy="{_fmt(to_y(o))}" r="3" '
                        f'fill="none" stroke="black" data-value="{o!r}"/>')
        body.append("</g>")
        body.append(f'<text x="{_fmt(cx)}" y="{bottom + 18}" text-anchor="middle">{escape(str(name))}</text>')
    return _svg(body, title)


def histogram_overlay_svg(pqc, haar, title="", score=None):
    """Step overlay of the feature-map fidelity histogram against the Haar reference."""
    pqc = np.asarray(pqc, dtype=np.float64)
    haar = np.asarray(haar, dtype=np.float64)
    if pqc.shape != haar.shape or pqc.size == 0:
        raise ValueError("histograms must be non-empty and the same length")
    n = pqc.size
    hi = float(max(pqc.max(), haar.max())) or 1.0
    top, bottom = _MARGIN["top"], HEIGHT - _MARGIN["bottom"]
    left, right = _MARGIN["left"], WIDTH - _MARGIN["right"]

    def to_y(v):
        return bottom - v / hi * (bottom - top)

    def to_x(f):
        return left + f * (right - left)

    body = _y_axis(0.0, hi, to_y, "probability")
    body.append(f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>')
    for t in np.linspace(0, 1, 6):
        body.append(f'<text x="{_fmt(to_x(t))}" y="{bottom + 16}" text-anchor="middle">{t:.1f}</text>')
    body.append(f'<text x="{(left + right) / 2}" y="{HEIGHT - 10}" text-anchor="middle">fidelity</text>')
    for name, h, col in (("pqc", pqc, _COLORS[0]), ("haar", haar, _COLORS[3])):
        pts = []
        for i in range(n):
            y = _fmt(to_y(h[i]))
            pts += [f"{_fmt(to_x(i / n))},{y}", f"{_fmt(to_x((i + 1) / n))},{y}"]
        body.append(f'<polyline class="{name}" points="{" ".join(pts)}" fill="none" '
                    f'stroke="{col}" stroke-width="1.5"/>')
    body.append(f'<text x="{right - 5}" y="{top + 12}" text-anchor="end" fill="{_COLORS[0]}">feature map</text>')
    body.append(f'<text x="{right - 5}" y="{top + 28}" text-anchor="end" fill="{_COLORS[3]}">Haar</text>')
    if score is not None:
        body.append(f'<text x="{right - 5}" y="{top + 44}" text-anchor="end">KL = {score:.4g}</text>')
    return _svg(body, title)


def emit_box_plots(records, out_dir, metrics=("accuracy", "f1", "auc"), baseline=None,
                   baseline_name="Baseline"):
    """One SVG per (dataset, metric); returns the written paths."""
    out_dir = Path(out_dir)
    if not records:
        raise ValueError("no records to plot")
    paths = []
    for ds in sorted({r.dataset for r in records}):
        recs = [r for r in records if r.dataset == ds]
        for m in metrics:
            groups = metric_groups(recs, m)
            if baseline is not None:
                groups[baseline_name] = baseline[m]
            p = out_dir / f"{ds}_{m}.svg"
            atomic_write(p, box_plot_svg(groups, f"{ds} {m}", m))
            paths.append(p)
    return paths


def emit_expressibility_plot(report, path):
    m = report.metadata
    title = f"{m.get('dataset', '')} {m.get('map_kind', '')}".strip()
    atomic_write(path, histogram_overlay_svg(report.pqc_hist, report.haar_hist, title, report.score))
    return Path(path)


def emit_plots(report, out_dir=None, expressibility_reports=()):
    """Box plots for a run report plus any expressibility overlays."""
    out_dir = Path(out_dir or report.config.output_dir) / "plots"
    paths = emit_box_plots(report.records, out_dir)
    for er in expressibility_reports:
        m = er.metadata
        name = f"expressibility_{m.get('dataset', 'data') or 'data'}_{m.get('map_kind', 'map')}.svg"
        paths.append(emit_expressibility_plot(er, out_dir / name))
    return paths
