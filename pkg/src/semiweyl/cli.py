"""Configuration parsing, experiment dispatch, and CSV emission.

The config format is line-oriented `key = value` with `#` comments.  Every
experiment reads a fixed key set; anything else is rejected with the line
number.  Heavy imports happen inside the runners so that --threads can pin
the BLAS pool size before the numerics load.
"""

import argparse
import dataclasses
import math
import os
import platform
import sys
from dataclasses import dataclass

from .errors import ConfigError, SemiweylError

EXPERIMENTS = ("trace_formula", "weyl_law", "funcalc_check", "moyal_check",
               "extension_check", "class_check")

SCHEMAS = {
    "trace_formula": "h,lhs,rhs,remainder,supp_volume,slope_running",
    "weyl_law": "h,count,scaled,liouville,deviation",
    "funcalc_check": "h,dim,frobenius_rel_err,quad_nodes,extension_order",
    "moyal_check": "h,K,residual_norm",
    "extension_check": "shell_y,sup_dbar",
    "class_check": "j,fitted_exponent,predicted_exponent",
}

_POTENTIALS = {
    "free_torus_1d": (1, {}),
    "free_torus_2d": (2, {}),
    "half_cos_1d": (1, {1: 0.25, -1: 0.25}),
    "two_cos_1d": (1, {1: 1.0, -1: 1.0}),
    "half_cos_2d": (2, {(1, 0): 0.25, (-1, 0): 0.25,
                        (0, 1): 0.25, (0, -1): 0.25}),
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    potential: str = None
    dimension: int = None
    coeffs: tuple = None          # ((mode tuple, value), ...) when custom
    E: float = None
    delta: float = None
    c: float = None
    h: float = None
    h_max: float = None
    h_min: float = None
    h_count: int = None
    b_position_support: tuple = None
    b_momentum_support: tuple = None
    modes: int = None
    extension_order: int = None
    quadrature_nodes: int = None
    weighting: str = None
    window_center: float = None
    window_width: float = None
    shell_count: int = None
    k_max: int = None
    j_max: int = None
    seed: int = None
    out: str = "."


def _float(raw):
    v = float(raw)
    if not math.isfinite(v):
        raise ValueError("not finite")
    return v


def _int(raw):
    if "." in raw or "e" in raw.lower():
        raise ValueError("not an integer")
    return int(raw)


def _pair(raw):
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 2:
        raise ValueError("expected two comma-separated numbers")
    lo, hi = _float(parts[0]), _float(parts[1])
    if not lo < hi:
        raise ValueError("lower bound must be below upper bound")
    return (lo, hi)


def _name(raw):
    return raw


# key -> (value parser, range check or None, range description)
_KEY_TYPES = {
    "experiment": (_name, lambda v: v in EXPERIMENTS,
                   "one of " + ", ".join(EXPERIMENTS)),
    "potential": (_name, lambda v: v in _POTENTIALS,
                  "one of " + ", ".join(sorted(_POTENTIALS))),
    "dimension": (_int, lambda v: v in (1, 2), "1 or 2"),
    "E": (_float, None, ""),
    "delta": (_float, lambda v: 0.0 <= v < 0.5, "in [0, 1/2)"),
    "c": (_float, lambda v: v > 0.0, "positive"),
    "h": (_float, lambda v: 0.0 < v <= 1.0, "in (0, 1]"),
    "h_max": (_float, lambda v: 0.0 < v <= 1.0, "in (0, 1]"),
    "h_min": (_float, lambda v: v > 0.0, "positive"),
    "h_count": (_int, lambda v: v >= 6, ">= 6"),
    "b_position_support": (_pair, None, ""),
    "b_momentum_support": (_pair, None, ""),
    "modes": (_int, lambda v: v >= 1, ">= 1"),
    "extension_order": (_int, lambda v: v >= 1, ">= 1"),
    "quadrature_nodes": (_int, lambda v: v >= 2, ">= 2"),
    "weighting": (_name, lambda v: v in ("jet", "cutoff"),
                  "'jet' or 'cutoff'"),
    "window_center": (_float, None, ""),
    "window_width": (_float, lambda v: v > 0.0, "positive"),
    "shell_count": (_int, lambda v: 3 <= v <= 12, "in [3, 12]"),
    "k_max": (_int, lambda v: 0 <= v <= 3, "in [0, 3]"),
    "j_max": (_int, lambda v: 0 <= v <= 6, "in [0, 6]"),
    "seed": (_int, lambda v: 0 <= v < 2 ** 64, "an unsigned 64-bit integer"),
    "out": (_name, None, ""),
}

_POTENTIAL_KEYS = ("potential", "dimension")
_UNIVERSAL_KEYS = ("experiment", "seed", "out")

_EXPERIMENT_KEYS = {
    "trace_formula": _POTENTIAL_KEYS + (
        "E", "delta", "c", "h_max", "h_min", "h_count",
        "b_position_support", "b_momentum_support"),
    "weyl_law": _POTENTIAL_KEYS + ("E", "delta", "h_max", "h_min", "h_count"),
    "funcalc_check": _POTENTIAL_KEYS + (
        "h", "modes", "extension_order", "quadrature_nodes", "weighting",
        "window_center", "window_width"),
    "moyal_check": ("k_max", "h_max", "h_min", "h_count"),
    "extension_check": ("extension_order", "weighting", "window_center",
                        "window_width", "shell_count"),
    "class_check": ("E", "delta", "c", "j_max", "h_max", "h_min", "h_count"),
}

_DEFAULTS = {
    "trace_formula": {"potential": "half_cos_1d", "E": 1.5, "delta": 0.0,
                      "c": 1.5, "h_max": 0.2, "h_min": 0.02, "h_count": 10},
    "weyl_law": {"potential": "free_torus_1d", "E": 1.0, "delta": 0.25,
                 "h_max": 0.2, "h_min": 0.001, "h_count": 8},
    "funcalc_check": {"potential": "two_cos_1d", "h": 0.5, "modes": 40,
                      "extension_order": 8, "quadrature_nodes": 200,
                      "weighting": "cutoff", "window_center": 2.0,
                      "window_width": 8.0},
    "moyal_check": {"k_max": 2, "h_max": 0.15, "h_min": 0.02, "h_count": 8},
    "extension_check": {"extension_order": 4, "weighting": "jet",
                        "window_center": 2.0, "window_width": 8.0,
                        "shell_count": 8},
    "class_check": {"E": 1.5, "delta": 0.25, "c": 1.5, "j_max": 4,
                    "h_max": 0.2, "h_min": 0.02, "h_count": 10},
}


def _parse_mode(suffix, lineno, key):
    try:
        return tuple(int(p) for p in suffix.split("_"))
    except ValueError:
        raise ConfigError(
            "line %d: key %r: coefficient keys look like coeff_<k> or "
            "coeff_<k1>_<k2>" % (lineno, key))


def parse_config(text, default_experiment=None):
    """Validated config with defaults filled, from `key = value` lines."""
    pairs = {}
    coeff_pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(
                "line %d: expected 'key = value', got %r" % (lineno, raw.strip()))
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(
                "line %d: expected 'key = value', got %r" % (lineno, raw.strip()))
        target = coeff_pairs if key.startswith("coeff_") else pairs
        if key in target:
            raise ConfigError("line %d: duplicate key %r" % (lineno, key))
        target[key] = (value, lineno)

    if "experiment" in pairs:
        exp_raw, exp_line = pairs.pop("experiment")
        if exp_raw not in EXPERIMENTS:
            raise ConfigError(
                "line %d: key 'experiment': %r is not one of %s"
                % (exp_line, exp_raw, ", ".join(EXPERIMENTS)))
        if default_experiment is not None and exp_raw != default_experiment:
            raise ConfigError(
                "line %d: config declares experiment %r but the command "
                "asked for %r" % (exp_line, exp_raw, default_experiment))
        experiment = exp_raw
    elif default_experiment is not None:
        experiment = default_experiment
    else:
        raise ConfigError("experiment key required")

    allowed = set(_EXPERIMENT_KEYS[experiment]) | set(_UNIVERSAL_KEYS)
    takes_potential = "potential" in allowed

    values = dict(_DEFAULTS[experiment])
    for key, (raw, lineno) in pairs.items():
        if key not in _KEY_TYPES:
            raise ConfigError("line %d: unknown key %r" % (lineno, key))
        if key not in allowed:
            raise ConfigError(
                "line %d: key %r is not used by experiment %r"
                % (lineno, key, experiment))
        parser, check, domain = _KEY_TYPES[key]
        try:
            v = parser(raw)
        except ValueError as e:
            raise ConfigError(
                "line %d: key %r: malformed value %r (%s)"
                % (lineno, key, raw, e))
        if check is not None and not check(v):
            raise ConfigError(
                "line %d: key %r: value %r out of range; must be %s"
                % (lineno, key, raw, domain))
        values[key] = v

    if coeff_pairs:
        if not takes_potential:
            key, (_, lineno) = next(iter(coeff_pairs.items()))
            raise ConfigError(
                "line %d: key %r is not used by experiment %r"
                % (lineno, key, experiment))
        if "potential" in pairs:
            raise ConfigError(
                "give either a named potential or coeff_* lines, not both")
        dim = values.get("dimension") or 1
        coeffs = []
        for key, (raw, lineno) in coeff_pairs.items():
            mode = _parse_mode(key[len("coeff_"):], lineno, key)
            if len(mode) != dim:
                raise ConfigError(
                    "line %d: key %r: mode has %d indices but dimension is %d"
                    % (lineno, key, len(mode), dim))
            try:
                v = complex(raw.replace(" ", ""))
            except ValueError:
                raise ConfigError(
                    "line %d: key %r: malformed value %r" % (lineno, key, raw))
            coeffs.append((mode, v))
        values["potential"] = "custom"
        values["dimension"] = dim
        values["coeffs"] = tuple(sorted(coeffs, key=lambda kv: kv[0]))
    elif takes_potential:
        if "dimension" in pairs:
            raise ConfigError(
                "line %d: key 'dimension' is only used with coeff_* lines; "
                "a named potential fixes it" % (pairs["dimension"][1],))
        values["dimension"] = _POTENTIALS[values["potential"]][0]

    if "h_max" in allowed and "h_min" in values and "h_max" in values:
        if not values["h_min"] < values["h_max"]:
            raise ConfigError("key 'h_min': must be below h_max")
    return ExperimentConfig(experiment=experiment, **values)


def _format_value(key, v):
    if isinstance(v, tuple) and key != "coeffs":
        return "%r, %r" % v
    if isinstance(v, float):
        return repr(v)
    return str(v)


def config_echo(cfg):
    """The effective config as a document parse_config accepts unchanged."""
    lines = ["experiment = %s" % cfg.experiment]
    for key in _EXPERIMENT_KEYS[cfg.experiment]:
        v = getattr(cfg, key)
        if v is None:
            continue
        if key == "potential" and v == "custom":
            lines.append("dimension = %d" % cfg.dimension)
            for mode, coef in cfg.coeffs:
                name = "coeff_" + "_".join(str(m) for m in mode)
                val = repr(coef.real) if coef.imag == 0.0 else str(coef)
                lines.append("%s = %s" % (name, val))
            continue
        if key == "dimension":
            continue  # implied by the preset, or already written above
        lines.append("%s = %s" % (key, _format_value(key, v)))
    if cfg.seed is not None:
        lines.append("seed = %d" % cfg.seed)
    lines.append("out = %s" % cfg.out)
    return "\n".join(lines) + "\n"


def _version_lines():
    import numpy
    import scipy

    from . import __version__
    return ("# versions: semiweyl %s, numpy %s, scipy %s, python %s\n"
            % (__version__, numpy.__version__, scipy.__version__,
               platform.python_version()))


def _potential(cfg):
    from .schrodinger import TorusPotential
    if cfg.potential == "custom":
        return TorusPotential(cfg.dimension, dict(cfg.coeffs))
    dim, coeffs = _POTENTIALS[cfg.potential]
    return TorusPotential(dim, coeffs)


def _h_grid(cfg):
    from .experiments import HGrid
    return HGrid.geometric(cfg.h_max, cfg.h_min, cfg.h_count)


def _sampled_window(cfg):
    from .hsfunc import SampledFunction
    from .symbolfam import standard_bump
    bump = standard_bump()
    half = 0.5 * cfg.window_width
    box = 2.75 * half  # room for the plateau margins of the extension
    return SampledFunction.from_callable(
        lambda x: bump((x - cfg.window_center) / half),
        cfg.window_center - box, cfg.window_center + box, 8192)


def _rows_trace_formula(cfg):
    from .experiments import LocalizerSpec, run_trace_formula_experiment
    from .symbolfam import make_window_family, standard_bump
    b = None
    if cfg.b_position_support or cfg.b_momentum_support:
        b = LocalizerSpec(
            b_position=(standard_bump(support=cfg.b_position_support)
                        if cfg.b_position_support else None),
            b_momentum=(standard_bump(support=cfg.b_momentum_support)
                        if cfg.b_momentum_support else None))
    fam = make_window_family(standard_bump(), E=cfg.E, delta=cfg.delta,
                             c=cfg.c)
    _, rows = run_trace_formula_experiment(_potential(cfg), fam, b=b,
                                           h_grid=_h_grid(cfg))
    return [(r.h, r.lhs, r.rhs, r.remainder, r.supp_volume, r.slope_running)
            for r in rows]


def _rows_weyl_law(cfg):
    import numpy as np

    from .experiments import run_weyl_count_experiment
    rng = None if cfg.seed is None else np.random.default_rng(cfg.seed)
    rows = run_weyl_count_experiment(_potential(cfg), cfg.E, cfg.delta,
                                     h_grid=_h_grid(cfg), rng=rng)
    return [(r.h, r.count, r.scaled, r.liouville, r.deviation) for r in rows]


def _rows_funcalc_check(cfg):
    import numpy as np

    from .hsfunc import build_extension, default_quadrature, hs_funcalc
    from .schrodinger import (assemble_torus_operator, eigensolve,
                              spectral_funcalc)
    from .symbolfam import standard_bump
    from .weylquant import OperatorMatrix
    f = _sampled_window(cfg)
    op = assemble_torus_operator(_potential(cfg), cfg.h, cfg.modes)
    P = OperatorMatrix(entries=op.matrix, basis="fourier_modes", h=cfg.h)
    ext = build_extension(f, cfg.extension_order, weighting=cfg.weighting)
    quad = default_quadrature(ext, qx=cfg.quadrature_nodes,
                              qy=cfg.quadrature_nodes)
    F = hs_funcalc(P, f, cfg.extension_order, quad, weighting=cfg.weighting)
    bump = standard_bump()
    half = 0.5 * cfg.window_width
    S = spectral_funcalc(eigensolve(op),
                         lambda E: bump((E - cfg.window_center) / half))
    scale = float(np.linalg.norm(S.entries))
    err = float(np.linalg.norm(F.entries - S.entries))
    rel = err if scale == 0.0 else err / scale
    return [(cfg.h, P.dim, rel, cfg.quadrature_nodes, cfg.extension_order)]


def _benchmark_symbols():
    import numpy as np
    g1 = lambda y, e: np.exp(-y ** 2 / 2.0 - e ** 2 / 1.5)
    g2 = lambda y, e: np.exp(-(y - 0.4) ** 2 / 1.8 - (e + 0.3) ** 2 / 2.2)
    return g1, g2


def _rows_moyal_check(cfg):
    import numpy as np

    from .moyal import composition_residuals
    g1, g2 = _benchmark_symbols()
    hs = np.geomspace(cfg.h_max, cfg.h_min, cfg.h_count)
    rows = []
    for K in range(cfg.k_max + 1):
        for h, res in composition_residuals(g1, g2, K, hs):
            rows.append((h, K, res))
    return rows


def _rows_extension_check(cfg):
    from .hsfunc import build_extension, dbar_bound_profile
    ext = build_extension(_sampled_window(cfg), cfg.extension_order,
                          weighting=cfg.weighting)
    shells = [2.0 ** -(i + 1) for i in range(cfg.shell_count)]
    return dbar_bound_profile(ext, shells)


def _rows_class_check(cfg):
    from .symbolfam import (estimate_class_exponents, make_window_family,
                            standard_bump)
    fam = make_window_family(standard_bump(), E=cfg.E, delta=cfg.delta,
                             c=cfg.c)
    exps = estimate_class_exponents(fam, cfg.j_max, _h_grid(cfg).values)
    # + 0.0 keeps j = 0 from serializing as negative zero
    return [(j, fitted, -cfg.delta * j + 0.0) for j, fitted in exps]


_RUNNERS = {
    "trace_formula": _rows_trace_formula,
    "weyl_law": _rows_weyl_law,
    "funcalc_check": _rows_funcalc_check,
    "moyal_check": _rows_moyal_check,
    "extension_check": _rows_extension_check,
    "class_check": _rows_class_check,
}


def _cell(v):
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    return format(float(v), ".17g")


def run(config):
    """Run the configured experiment; write its CSV and the meta file."""
    rows = _RUNNERS[config.experiment](config)
    os.makedirs(config.out, exist_ok=True)
    csv_path = os.path.join(config.out, config.experiment + ".csv")
    with open(csv_path, "w", newline="\n") as fh:
        fh.write(SCHEMAS[config.experiment] + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")
    with open(os.path.join(config.out, "meta"), "w", newline="\n") as fh:
        fh.write(config_echo(config))
        fh.write(_version_lines())
    return 0


def _parse_args(argv):
    ap = argparse.ArgumentParser(
        prog="semiweyl",
        description="semiclassical trace-formula and functional-calculus "
                    "experiments; results land as CSV files")
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", required=True,
                    help="path to a key = value configuration file")
    ap.add_argument("--out", default=None,
                    help="output directory (default: the config's out key)")
    ap.add_argument("--seed", type=int, default=None,
                    help="RNG seed for sampling oracles")
    ap.add_argument("--threads", type=int, default=None,
                    help="BLAS/OpenMP thread count")
    return ap.parse_args(argv)


def main(argv=None):
    ns = _parse_args(sys.argv[1:] if argv is None else list(argv))
    if ns.threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ[var] = str(ns.threads)
    try:
        try:
            with open(ns.config, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError("cannot read config file %r: %s"
                              % (ns.config, e))
        cfg = parse_config(text, default_experiment=ns.experiment)
        if ns.seed is not None:
            cfg = dataclasses.replace(cfg, seed=ns.seed)
        if ns.out is not None:
            cfg = dataclasses.replace(cfg, out=ns.out)
        return run(cfg)
    except SemiweylError as e:
        kind = {2: "config", 3: "numerical", 4: "resolution"}[e.exit_code]
        print("error: %s: %s" % (kind, e), file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
