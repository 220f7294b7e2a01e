"""Config-driven experiment runner.

    zalcmanlab run config.json     # writes report.json, rescaling_trace.csv, convergence.csv
    zalcmanlab catalogue           # list built-in families
    zalcmanlab --version

Exit codes: 0 success, 1 configuration error, 2 no extractable rescaling at
any j (the family behaves normally at the probe point), 3 steps were
produced but the Cauchy diagnostic is inconclusive.
"""
import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .catalogue import CATALOGUE, list_catalogue
from .errors import (
    ConfigError,
    NonConvergence,
    NumericRangeError,
    PreconditionUnmet,
    ZalcmanLabError,
    ZeroFreeError,
)
from .holofun import Ball, FamilySpec, check_zero_free, make_family
from .limits import (
    CONVERGING,
    convergence_diagnostic,
    limit_sharp_check,
    reciprocal_sharp_check,
    zero_free_limit_check,
)
from .marty import OptimizerConfig, marty_probe
from .sampling import ball_sample
from .zalcman import recenter, rescale_step

log = logging.getLogger(__name__)

OUT_DIR_ENV = "ZALCMANLAB_OUT_DIR"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NORMAL = 2
EXIT_INCONCLUSIVE = 3

_TOP_KEYS = {"family", "dimension", "zero_free", "alpha", "j_schedule", "probe_center",
             "optimizer", "bisect_tol", "report", "j_max_cap", "marty_radius"}
_REPORT_KEYS = {"ball_radius", "grid_per_dim", "out_dir"}


def _real(d, key, default=None):
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{key} must be a finite number, got {v!r}")
    return float(v)


def _int(d, key, default=None):
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{key} must be an integer, got {v!r}")
    return v


def _point(raw, n):
    """Accept [[re, im], ...] or [x, ...] (real coordinates)."""
    if not isinstance(raw, list) or len(raw) != n:
        raise ConfigError(f"probe_center must list {n} coordinates")
    out = []
    for c in raw:
        if isinstance(c, list) and len(c) == 2:
            re_, im_ = c
        else:
            re_, im_ = c, 0.0
        if not all(isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)
                   for x in (re_, im_)):
            raise ConfigError(f"bad probe_center coordinate {c!r}")
        out.append(complex(re_, im_))
    return tuple(out)


@dataclass(frozen=True)
class ExperimentConfig:
    family: dict
    dimension: int
    zero_free: bool
    alpha: float
    j_schedule: tuple
    probe_center: tuple
    optimizer: OptimizerConfig
    bisect_tol: float
    ball_radius: float
    grid_per_dim: int
    out_dir: str
    j_max_cap: int = 200
    marty_radius: float = 0.5
    _family_spec: FamilySpec = field(default=None, repr=False, compare=False)

    @classmethod
    def from_dict(cls, raw):
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(raw) - _TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        fam = raw.get("family")
        if not isinstance(fam, dict) or fam.get("kind") not in ("catalogue", "expression"):
            raise ConfigError('family must be {"kind": "catalogue", "name": ...} '
                              'or {"kind": "expression", "template": ...}')
        if fam["kind"] == "catalogue":
            if set(fam) != {"kind", "name"}:
                raise ConfigError("catalogue family takes exactly the keys kind and name")
            entry = CATALOGUE.get(fam["name"])
            if entry is None:
                raise ConfigError(f"unknown catalogue family {fam['name']!r}")
            dimension = _int(raw, "dimension", entry.dimension)
            zero_free = raw.get("zero_free", entry.zero_free)
            if dimension != entry.dimension:
                raise ConfigError(f"{entry.name} has dimension {entry.dimension}, config says {dimension}")
            if zero_free and not entry.zero_free:
                raise ConfigError(f"{entry.name} is not zero-free")
            template = entry.template
        else:
            if set(fam) != {"kind", "template"} or not isinstance(fam["template"], str):
                raise ConfigError("expression family takes exactly the keys kind and template")
            dimension = _int(raw, "dimension")
            zero_free = raw.get("zero_free", False)
            template = fam["template"]
        if not isinstance(zero_free, bool):
            raise ConfigError("zero_free must be a boolean")
        if dimension < 1:
            raise ConfigError("dimension must be positive")
        try:
            spec = make_family(template, dimension, zero_free, name=fam.get("name", "expression"))
        except ZalcmanLabError as exc:
            raise ConfigError(f"bad family template: {exc}") from exc

        alpha = _real(raw, "alpha", 0.0)
        if alpha <= -1 and not zero_free:
            raise ConfigError("alpha <= -1 requires a zero-free family")

        js = raw.get("j_schedule")
        if (not isinstance(js, list) or not js
                or not all(isinstance(j, int) and not isinstance(j, bool) for j in js)):
            raise ConfigError("j_schedule must be a nonempty list of integers")
        if any(j < 2 for j in js) or any(b <= a for a, b in zip(js, js[1:])):
            raise ConfigError("j_schedule must be strictly increasing integers >= 2")
        cap = _int(raw, "j_max_cap", 200)
        if cap < 2:
            raise ConfigError("j_max_cap must be >= 2")
        if js[-1] > cap:
            raise ConfigError(f"j = {js[-1]} exceeds j_max_cap = {cap}")

        center = _point(raw.get("probe_center", [0.0] * dimension), dimension)
        if np.linalg.norm(np.array(center) - np.array(spec.domain.center)) >= spec.domain.radius:
            raise ConfigError("probe_center must be interior to the unit-ball domain")

        opt = raw.get("optimizer", {})
        if not isinstance(opt, dict):
            raise ConfigError("optimizer must be an object")
        try:
            optimizer = OptimizerConfig(
                grid_per_dim=_int(opt, "grid_per_dim", 16),
                multistarts=_int(opt, "multistarts", 8),
                refine_iters=_int(opt, "refine_iters", 100),
                value_tol=_real(opt, "value_tol", 1e-12),
                seed=_int(opt, "seed", 0),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if set(opt) - set(optimizer.to_dict()):
            raise ConfigError(f"unknown optimizer keys: {sorted(set(opt) - set(optimizer.to_dict()))}")

        bisect_tol = _real(raw, "bisect_tol", 1e-10)
        if bisect_tol <= 0:
            raise ConfigError("bisect_tol must be positive")

        rep = raw.get("report", {})
        if not isinstance(rep, dict) or set(rep) - _REPORT_KEYS:
            raise ConfigError(f"report must be an object with keys {sorted(_REPORT_KEYS)}")
        ball_radius = _real(rep, "ball_radius", 1.0)
        grid = _int(rep, "grid_per_dim", 32)
        out_dir = os.environ.get(OUT_DIR_ENV) or rep.get("out_dir", "zalcman_out")
        if not isinstance(out_dir, str) or not out_dir:
            raise ConfigError("report.out_dir must be a nonempty string")
        if ball_radius <= 0 or ball_radius > js[0] / 2:
            raise ConfigError(f"report.ball_radius must lie in (0, min(j)/2 = {js[0] / 2}]")
        if grid < 8:
            raise ConfigError("report.grid_per_dim must be >= 8")
        marty_radius = _real(raw, "marty_radius", 0.5)
        if not 0 < marty_radius < 1:
            raise ConfigError("marty_radius must lie in (0, 1)")
        _check_writable(out_dir)

        return cls(
            family=dict(fam), dimension=dimension, zero_free=zero_free, alpha=alpha,
            j_schedule=tuple(js), probe_center=center, optimizer=optimizer,
            bisect_tol=bisect_tol, ball_radius=ball_radius, grid_per_dim=grid,
            out_dir=out_dir, j_max_cap=cap, marty_radius=marty_radius, _family_spec=spec,
        )

    @property
    def family_spec(self):
        return self._family_spec

    def to_dict(self):
        return {
            "family": self.family,
            "dimension": self.dimension,
            "zero_free": self.zero_free,
            "alpha": self.alpha,
            "j_schedule": list(self.j_schedule),
            "probe_center": [[c.real, c.imag] for c in self.probe_center],
            "optimizer": self.optimizer.to_dict(),
            "bisect_tol": self.bisect_tol,
            "report": {"ball_radius": self.ball_radius, "grid_per_dim": self.grid_per_dim,
                       "out_dir": self.out_dir},
            "j_max_cap": self.j_max_cap,
            "marty_radius": self.marty_radius,
        }


def _check_writable(out_dir):
    p = Path(out_dir).resolve()
    while not p.exists():
        p = p.parent
    if not p.is_dir() or not os.access(p, os.W_OK):
        raise ConfigError(f"out_dir {out_dir!r} is not writable")


def load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return ExperimentConfig.from_dict(raw)


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False)


def trace_header(n):
    return (["j", "status"]
            + [f"xi_star_re_{k}" for k in range(1, n + 1)]
            + [f"xi_star_im_{k}" for k in range(1, n + 1)]
            + ["rho", "r", "sharp_origin_residual", "bound_value", "max_sharp_on_grid"])


CONVERGENCE_HEADER = ["j_low", "j_high", "sup_diff", "radius"]


@dataclass
class RunResult:
    exit_code: int
    report: dict
    trace_rows: list
    convergence_rows: list


def run_experiment(cfg):
    """Run the marty / rescaling / limits pipeline; no file output."""
    n = cfg.dimension
    family = recenter(cfg.family_spec, np.array(cfg.probe_center))
    if family.zero_free:
        for j in cfg.j_schedule:
            try:
                check_zero_free(family, j, ball=Ball((0j,) * n, 1.0 / j))
            except ZeroFreeError as exc:
                raise ConfigError(str(exc)) from exc

    marty = marty_probe(family, Ball((0j,) * n, cfg.marty_radius), cfg.j_schedule, cfg.optimizer)

    steps, rows, step_json = [], [], []
    blank = [""] * (2 * n + 5)
    for j in cfg.j_schedule:
        try:
            st = rescale_step(family, j, cfg.alpha, cfg.optimizer, cfg.bisect_tol,
                              report_radius=cfg.ball_radius, report_grid_per_dim=cfg.grid_per_dim)
        except PreconditionUnmet as exc:
            rows.append([j, "precondition_unmet"] + blank)
            step_json.append({"j": j, "status": "precondition_unmet", "message": str(exc),
                              "max_weighted_value": exc.max_value})
            continue
        except (NumericRangeError, NonConvergence, ZeroFreeError) as exc:
            log.warning("j = %d: %s", j, exc)
            rows.append([j, "numeric_error"] + blank)
            step_json.append({"j": j, "status": "numeric_error", "message": str(exc)})
            continue
        steps.append(st)
        rows.append([j, "ok"] + [repr(c.real) for c in st.xi_star] + [repr(c.imag) for c in st.xi_star]
                    + [repr(v) for v in (st.rho, st.r, st.sharp_origin_residual,
                                         st.bound_value, st.max_sharp_on_grid)])
        step_json.append({"status": "ok", **st.to_dict()})

    report = {
        "tool": "zalcmanlab",
        "version": __version__,
        "config": cfg.to_dict(),
        "family": {"template": str(cfg.family_spec.template), "dimension": n,
                   "zero_free": cfg.zero_free},
        "marty": marty.to_dict(),
        "steps": step_json,
        "convergence": None,
    }
    conv_rows = []
    if len(steps) >= 2:
        conv = convergence_diagnostic(steps, cfg.ball_radius, cfg.grid_per_dim, cfg.optimizer.seed)
        conv_rows = [[p.j_low, p.j_high, repr(p.sup_diff), repr(conv.radius)] for p in conv.pairs]
        report["convergence"] = conv.to_dict()
        report["limit_sharp_residual"] = limit_sharp_check(
            steps[-1].g, cfg.ball_radius, cfg.grid_per_dim, cfg.optimizer.seed)
        if cfg.zero_free:
            report["hurwitz_check"] = zero_free_limit_check(conv, True)
    if cfg.zero_free:
        pts = ball_sample((0j,) * n, 0.5, 100, cfg.optimizer.seed)
        report["reciprocal_sharp_residual"] = reciprocal_sharp_check(family, pts, cfg.j_schedule)
    rhos = [s.rho for s in steps]
    report["rho_decreasing"] = bool(len(rhos) >= 2 and all(b < a for a, b in zip(rhos, rhos[1:])))

    statuses = [r[1] for r in rows]
    if all(s == "precondition_unmet" for s in statuses):
        code = EXIT_NORMAL
    elif report["convergence"] is not None and report["convergence"]["cauchy_verdict"] == CONVERGING:
        code = EXIT_OK
    else:
        code = EXIT_INCONCLUSIVE
    report["exit_code"] = code
    return RunResult(code, report, rows, conv_rows)


def write_artifacts(result, out_dir, dimension):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(canonical_json(result.report) + "\n")
    with open(out / "rescaling_trace.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace_header(dimension))
        w.writerows(result.trace_rows)
    with open(out / "convergence.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CONVERGENCE_HEADER)
        w.writerows(result.convergence_rows)


def run(config_path):
    """Load, run and write artifacts; returns the process exit code."""
    try:
        cfg = load_config(config_path)
        result = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    write_artifacts(result, cfg.out_dir, cfg.dimension)
    return result.exit_code


def print_catalogue(stream=None):
    stream = stream or sys.stdout
    for e in list_catalogue():
        flags = ["zero_free"] if e.zero_free else []
        print(f"{e.name:<14} n={e.dimension}  {e.template:<14} {' '.join(flags)}", file=stream)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="zalcmanlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("config")
    sub.add_parser("catalogue", help="list built-in families")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "catalogue":
        print_catalogue()
        return 0
    return run(args.config)


if __name__ == "__main__":
    sys.exit(main())
