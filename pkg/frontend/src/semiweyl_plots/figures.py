"""Renderers for the six experiment CSV schemas.

Each figure kind is tied to one exact header; anything else is rejected
by name.  Convergence kinds are drawn on log-log axes with a labeled
slope guide: the caller's reference slopes when given, otherwise a
least-squares fit of the plotted points.
"""

import csv
import dataclasses
import pathlib

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SCHEMAS = {
    "trace_formula": "h,lhs,rhs,remainder,supp_volume,slope_running",
    "weyl_law": "h,count,scaled,liouville,deviation",
    "funcalc_check": "h,dim,frobenius_rel_err,quad_nodes,extension_order",
    "moyal_check": "h,K,residual_norm",
    "extension_check": "shell_y,sup_dbar",
    "class_check": "j,fitted_exponent,predicted_exponent",
}


class PlotError(Exception):
    """The CSV cannot be rendered as the requested figure kind."""


@dataclasses.dataclass(frozen=True)
class FigureSpec:
    csv_path: str
    kind: str
    out_path: str
    ref_slopes: tuple = ()

    def __post_init__(self):
        if self.kind not in SCHEMAS:
            raise PlotError("unknown figure kind %r; expected one of: %s"
                            % (self.kind, ", ".join(sorted(SCHEMAS))))


def load_columns(spec):
    """Parse the CSV into named float arrays after exact header check."""
    expected = SCHEMAS[spec.kind].split(",")
    with open(spec.csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise PlotError("%s is empty; expected header %r"
                        % (spec.csv_path, SCHEMAS[spec.kind]))
    header = rows[0]
    for name in header:
        if name not in expected:
            raise PlotError("unexpected header %r in %s; the %s schema is %r"
                            % (name, spec.csv_path, spec.kind,
                               SCHEMAS[spec.kind]))
    if header != expected:
        missing = [name for name in expected if name not in header]
        raise PlotError("header of %s is missing %r; the %s schema is %r"
                        % (spec.csv_path, ",".join(missing), spec.kind,
                           SCHEMAS[spec.kind]))
    body = [row for row in rows[1:] if row]
    if not body:
        raise PlotError("no data rows in %s" % spec.csv_path)
    for k, row in enumerate(body):
        if len(row) != len(expected):
            raise PlotError("row %d of %s has %d fields, expected %d"
                            % (k + 2, spec.csv_path, len(row), len(expected)))
    cols = np.array(body, dtype=float).T
    return dict(zip(expected, cols))


def _fit_slope(xs, ys):
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def _slope_guides(ax, xs, ys, ref_slopes, fitted_ok=True):
    """Dashed power-law guides anchored at the rightmost plotted point."""
    anchor_x, anchor_y = xs[np.argmax(xs)], ys[np.argmax(xs)]
    span = np.array([xs.min(), xs.max()])
    slopes = [(s, "reference slope %.3g" % s) for s in ref_slopes]
    if not slopes and fitted_ok and len(xs) >= 3:
        s = _fit_slope(xs, ys)
        slopes = [(s, "fitted slope %.3g" % s)]
    for s, label in slopes:
        ax.loglog(span, anchor_y * (span / anchor_x) ** s,
                  "--", linewidth=1.0, label=label)


def _positive(xs, ys, what, path):
    keep = ys > 0.0
    if not np.any(keep):
        raise PlotError("all %s values in %s are zero; nothing to draw "
                        "on log-log axes" % (what, path))
    return xs[keep], ys[keep]


def _draw_trace_formula(ax, cols, spec):
    h, rem = _positive(cols["h"], np.abs(cols["remainder"]),
                       "remainder", spec.csv_path)
    ax.loglog(h, rem, "o-", label="|remainder|")
    _slope_guides(ax, h, rem, spec.ref_slopes)
    ax.set_xlabel("h")
    ax.set_ylabel("|trace remainder|")
    ax.set_title("trace-formula remainder decay")


def _draw_weyl_law(ax, cols, spec):
    ax.semilogx(cols["h"], cols["scaled"], "o-", label="scaled count")
    ax.axhline(cols["liouville"][-1], color="k", linestyle="--",
               linewidth=1.0, label="Liouville volume")
    ax.set_xlabel("h")
    ax.set_ylabel("scaled eigenvalue count")
    ax.set_title("shrinking-window counting law")


def _draw_funcalc_check(ax, cols, spec):
    ax.semilogy(cols["dim"], cols["frobenius_rel_err"], "o",
                label="relative Frobenius error")
    ax.set_xlabel("matrix dimension")
    ax.set_ylabel("relative Frobenius error")
    ax.set_title("resolvent-quadrature calculus vs spectral oracle")


def _draw_moyal_check(ax, cols, spec):
    ks = sorted(set(cols["K"].astype(int)))
    for i, K in enumerate(ks):
        sel = cols["K"].astype(int) == K
        h, res = _positive(cols["h"][sel], cols["residual_norm"][sel],
                           "residual_norm", spec.csv_path)
        label = "K = %d" % K
        if len(h) >= 3:
            label += " (fitted slope %.2f)" % _fit_slope(h, res)
        ax.loglog(h, res, "o-", label=label)
        if i < len(spec.ref_slopes):
            _slope_guides(ax, h, res, (spec.ref_slopes[i],))
    ax.set_xlabel("h")
    ax.set_ylabel("composition residual")
    ax.set_title("composition-expansion residual orders")


def _draw_extension_check(ax, cols, spec):
    y, sup = _positive(cols["shell_y"], cols["sup_dbar"],
                       "sup_dbar", spec.csv_path)
    ax.loglog(y, sup, "o-", label="shell sup of the defect")
    _slope_guides(ax, y, sup, spec.ref_slopes)
    ax.set_xlabel("distance from the real axis")
    ax.set_ylabel("sup of the extension defect")
    ax.set_title("almost-analytic defect shell decay")


def _draw_class_check(ax, cols, spec):
    ax.plot(cols["j"], cols["predicted_exponent"], "k--",
            label="predicted exponent")
    ax.plot(cols["j"], cols["fitted_exponent"], "o", label="fitted exponent")
    ax.set_xlabel("derivative order j")
    ax.set_ylabel("h-growth exponent")
    ax.set_title("window-family derivative exponents")


_DRAWERS = {
    "trace_formula": _draw_trace_formula,
    "weyl_law": _draw_weyl_law,
    "funcalc_check": _draw_funcalc_check,
    "moyal_check": _draw_moyal_check,
    "extension_check": _draw_extension_check,
    "class_check": _draw_class_check,
}


def build_figure(spec):
    """The matplotlib figure for a spec, before saving.  Mainly for tests."""
    cols = load_columns(spec)
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    try:
        _DRAWERS[spec.kind](ax, cols, spec)
    except Exception:
        plt.close(fig)
        raise
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    return fig


def render(spec):
    """Write the figure to spec.out_path and return that path."""
    fig = build_figure(spec)
    out = pathlib.Path(spec.out_path)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True)
    try:
        fig.savefig(out, dpi=150)
    finally:
        plt.close(fig)
    return str(out)
