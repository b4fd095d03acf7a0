"""Ordinary least squares on log-log data, shared by every convergence check."""

from dataclasses import dataclass, field

import numpy as np

from .errors import FitError


@dataclass(frozen=True)
class RemainderFit:
    slope: float
    intercept: float
    r_squared: float
    # per-point table: (x, y, fitted y, log-residual)
    table: tuple = ()
    # indices of input points dropped because y <= 0
    excluded: tuple = ()
    at_floor: bool = False


def fit_loglog(xs, ys, floor=None):
    """OLS fit of log y against log x.

    Points with non-positive y are excluded and reported in the result.
    If `floor` is given, points with y < floor are excluded too and the
    fit is marked at_floor when fewer than 3 points survive.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise FitError("fit_loglog needs two 1-d arrays of equal length")
    bad = ~(ys > 0)
    if floor is not None:
        bad |= ys < floor
    keep = ~bad & (xs > 0)
    excluded = tuple(int(i) for i in np.nonzero(~keep)[0])
    if keep.sum() < 3:
        if floor is not None:
            # every point at the floor is a degenerate but legal outcome
            return RemainderFit(slope=float("nan"), intercept=float("nan"),
                                r_squared=float("nan"), table=(),
                                excluded=excluded, at_floor=True)
        raise FitError("fewer than 3 usable points for a log-log fit")
    lx, ly = np.log(xs[keep]), np.log(ys[keep])
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    table = tuple((float(x), float(y), float(np.exp(p)), float(r))
                  for x, y, p, r in zip(xs[keep], ys[keep], pred, ly - pred))
    return RemainderFit(slope=float(slope), intercept=float(intercept),
                        r_squared=float(r2), table=table, excluded=excluded)
