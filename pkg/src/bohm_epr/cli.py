"""Command-line front end: residual suites, metric scans and diagnostics as CSV/JSON.

Configuration precedence is command-line flag > config file > built-in
default. The config file is flat ``key = value`` text; ``#`` starts a
comment. Keys are the long flag names with dashes replaced by underscores.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import epr_model as em
from . import geometry as geo
from . import kinematics as kin
from .epr_model import ModelParams
from .errors import DomainError, UnphysicalError
from .numerics import Grid1D

SCHEMA_VERSION = "1"
OUT_ENV = "BOHM_EPR_OUT"
DEFAULT_OUT = "bohm_epr_out"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_IO = 4
EXIT_RESIDUAL = 5

COMMANDS = ("residuals", "metric", "singularities", "trajectories", "wormhole", "audit")


class ConfigError(ValueError):
    pass


class EmptyDomainError(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    m: float = 1.0
    hbar: float = 1.0
    c1: float = 2.0
    c2: float = 0.0
    mass_power: int = 2
    eta11: int = -1
    g_branch: int = 1
    grid_n: int = 201
    u_min: float = -0.5
    u_max: float = 3.5
    tol_root: float = 1e-12
    tol_pole: float = 1e-9
    tol_residual: float = 1e-10
    formats: str = "csv,json"
    audit_n: int = 128
    b: float = 1.0
    x0: float = 0.0
    lambda_max: float = 10.0
    step: float = 0.01
    starts: str = ""

    def __post_init__(self):
        for name in ("tol_root", "tol_pole", "tol_residual", "step", "b"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.grid_n < 5 or self.audit_n < 1:
            raise ConfigError("point counts must be >= 5 (grid_n) and >= 1 (audit_n)")
        if not self.u_max > self.u_min:
            raise ConfigError("u_max must exceed u_min")
        if not self.lambda_max >= 0:
            raise ConfigError("lambda_max must be non-negative")
        bad = set(self.format_list) - {"csv", "json"}
        if bad or not self.format_list:
            raise ConfigError(f"unknown output formats: {sorted(bad)}")
        self.start_points  # validates

    @property
    def params(self) -> ModelParams:
        try:
            return ModelParams(
                m=self.m,
                hbar=self.hbar,
                C1=self.c1,
                C2=self.c2,
                mass_power=self.mass_power,
                eta11=self.eta11,
                g_branch=self.g_branch,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def format_list(self) -> list[str]:
        return [f.strip() for f in self.formats.split(",") if f.strip()]

    @property
    def start_points(self) -> list[tuple[float, float]]:
        pts = []
        for item in self.starts.split(";"):
            item = item.strip()
            if not item:
                continue
            try:
                a, b = item.split(",")
                pts.append((float(a), float(b)))
            except ValueError as exc:
                raise ConfigError(f"bad start point {item!r}; expected 'x1,x2'") from exc
        return pts

    def as_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, value: Any) -> Any:
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(str(value).strip().lstrip("+"))
        if kind == "float":
            return float(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return str(value).strip()


def read_config_file(path: str | os.PathLike) -> dict[str, Any]:
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "format":
            key = "formats"
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values: dict[str, Any] = {}
    if args.config:
        values.update(read_config_file(args.config))
    for key in _FIELD_TYPES:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = _coerce(key, v)
    if getattr(args, "start", None):
        values["starts"] = ";".join(args.start)
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


# Output helpers. Floats use 17 significant digits so CSV values round-trip.


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return f"{v:.16e}"
    return str(v)


def _jsonable(v: Any) -> Any:
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if hasattr(v, "value") and isinstance(getattr(v, "value"), str):
        return v.value
    return v


class Writer:
    def __init__(self, out: Path, config: RunConfig, command: str):
        self.out = out
        self.config = config
        self.command = command
        self.written: list[Path] = []

    def wants(self, fmt: str) -> bool:
        return fmt in self.config.format_list

    def csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]], force: bool = False) -> None:
        if not (force or self.wants("csv")):
            return
        cfg = json.dumps(self.config.as_dict(), sort_keys=True)
        lines = [f"# command: {self.command}", f"# schema_version: {SCHEMA_VERSION}", f"# config: {cfg}"]
        lines.append(",".join(header))
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        self._write(name, "\n".join(lines) + "\n")

    def json(self, name: str, payload: dict, force: bool = False) -> None:
        if not (force or self.wants("json")):
            return
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": self.config.as_dict(),
            **payload,
        }
        self._write(name, json.dumps(_jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n")

    def _write(self, name: str, text: str) -> None:
        path = self.out / name
        path.write_text(text, encoding="utf-8")
        self.written.append(path)


def _prepare_out(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile(dir=path, prefix=".probe-"):
        pass
    return path


def _strips(cfg: RunConfig, params: ModelParams):
    strips = em.domain_strips(params, (cfg.u_min, cfg.u_max))
    if not len(strips):
        raise EmptyDomainError(f"no positivity strip intersects [{cfg.u_min}, {cfg.u_max}]")
    return strips


def _stats(values: Sequence[float]) -> dict[str, Any]:
    a = np.asarray([v for v in values if v is not None and math.isfinite(v)], dtype=float)
    if a.size == 0:
        return {"count": 0, "max_abs": None, "l2": None}
    return {"count": int(a.size), "max_abs": float(np.max(np.abs(a))), "l2": float(math.sqrt(math.fsum((a * a).tolist()) / a.size))}


def _try(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (DomainError, UnphysicalError):
        return None


# Commands


def cmd_residuals(cfg: RunConfig, w: Writer) -> int:
    params = cfg.params
    strips = _strips(cfg, params)
    header = [
        "u", "strip", "G2", "physical",
        "constraint_closed", "constraint_fd",
        "balance_p1", "balance_p2", "hj_p1", "hj_p2",
        "continuity_closed", "continuity_fd",
    ]
    rows = []
    cols: dict[str, list] = {k: [] for k in header[4:]}
    for idx, (lo, hi) in enumerate(strips):
        grid = Grid1D(lo, hi, cfg.grid_n)
        h = grid.spacing
        for u in grid.points():
            u = float(u)
            x = 0.5 * u
            g2 = em.solve_G_squared(u, params)
            phys = g2 >= 0
            vals = {
                "constraint_closed": em.residual_eq11(u, g2, params),
                "constraint_fd": _try(lambda: em.residual_eq11(u, em.solve_G_squared(u, params, "finite_difference", h), params)),
                "balance_p1": _try(em.residual_momentum_balance, x, x, params, 1),
                "balance_p2": _try(em.residual_momentum_balance, x, x, params, 2),
                "hj_p1": _try(em.residual_static_hj, x, x, params, 1),
                "hj_p2": _try(em.residual_static_hj, x, x, params, 2),
                "continuity_closed": _try(em.residual_static_continuity, x, x, params),
                "continuity_fd": _try(em.residual_static_continuity, x, x, params, "finite_difference", h),
            }
            for k, v in vals.items():
                cols[k].append(v)
            rows.append([u, idx, g2, phys] + [vals[k] for k in header[4:]])
    w.csv("residuals.csv", header, rows)

    shared = {
        "constraint_closed_form": _stats(cols["constraint_closed"]),
        "constraint_finite_difference": _stats(cols["constraint_fd"]),
        "continuity_closed_form": _stats(cols["continuity_closed"]),
        "continuity_finite_difference": _stats(cols["continuity_fd"]),
    }
    conventions = {}
    for p in (1, 2):
        conventions[f"mass_power={p}"] = {
            **shared,
            "hj_closed_form": _stats(cols[f"hj_p{p}"]),
            "balance_closed_form": _stats(cols[f"balance_p{p}"]),
        }
    lo, hi = strips.strips[0]
    width = hi - lo
    interval = (lo + 0.2 * width, hi - 0.2 * width)
    n = cfg.grid_n
    ladder = em.oracle_convergence(params, interval, (n, 2 * n - 1, 4 * n - 3))
    gate = [shared["constraint_closed_form"]["max_abs"], shared["continuity_closed_form"]["max_abs"]]
    passed = all(v is None or v < cfg.tol_residual for v in gate)
    w.json(
        "residuals.json",
        {
            "strips": [list(s) for s in strips],
            "conventions": conventions,
            "convergence": {"interval": list(interval), "fields": ladder},
            "gate": {"tol_residual": cfg.tol_residual, "checked": ["constraint_closed_form", "continuity_closed_form"], "passed": passed},
        },
    )
    return EXIT_OK if passed else EXIT_RESIDUAL


def cmd_metric(cfg: RunConfig, w: Writer) -> int:
    params = cfg.params
    u = Grid1D(cfg.u_min, cfg.u_max, cfg.grid_n).points()
    samples = [geo.sample_metric(float(x), params, cfg.tol_pole) for x in u]
    w.csv(
        "metric.csv",
        ["u", "g11_as_printed", "g11_from_constraint", "conformal_factor", "regime"],
        ([s.u, s.g11_as_printed, s.g11_from_constraint, s.conformal_factor, s.regime.value] for s in samples),
    )
    audit = geo.audit_metric_consistency(params, u, pole_tol=cfg.tol_pole)
    regimes: dict[str, int] = {}
    for s in samples:
        regimes[s.regime.value] = regimes.get(s.regime.value, 0) + 1
    w.json("metric.json", {"audit_summary": audit.summary(), "regime_counts": dict(sorted(regimes.items()))})
    return EXIT_OK


def cmd_singularities(cfg: RunConfig, w: Writer) -> int:
    params = cfg.params
    rep = geo.find_singularities(params, (cfg.u_min, cfg.u_max), cfg.tol_root)
    w.json("singularities.json", rep.as_dict(), force=not w.wants("csv"))
    rows = []
    for kind, roots in (
        ("pole", rep.poles),
        ("zero_as_printed", rep.zero_crossings_as_printed),
        ("zero_from_constraint", rep.zero_crossings_from_constraint),
    ):
        rows += [[kind, r.value, r.bracket.lo, r.bracket.hi, r.tol] for r in roots]
    w.csv("singularities.csv", ["kind", "u", "bracket_lo", "bracket_hi", "tol"], rows)
    return EXIT_OK


def _default_starts(cfg: RunConfig, params: ModelParams) -> list[tuple[float, float]]:
    starts = []
    for lo, hi in _strips(cfg, params):
        uc = 0.5 * (lo + hi)
        if em.solve_G_squared(uc, params) >= 0:
            starts.append((0.5 * uc, 0.5 * uc))
    return starts


def cmd_trajectories(cfg: RunConfig, w: Writer, starts: list[tuple[float, float]] | None = None) -> int:
    params = cfg.params
    starts = starts or cfg.start_points or _default_starts(cfg, params)
    if not starts:
        raise EmptyDomainError("no physical start point available")
    index = []
    for i, start in enumerate(starts):
        name = f"trajectory_{i:03d}.csv"
        try:
            states = kin.integrate_trajectory(start, (0.0, cfg.lambda_max), cfg.step, params)
        except (DomainError, UnphysicalError) as exc:
            index.append({"start": list(start), "file": None, "error": str(exc)})
            continue
        s0 = states[0]
        w.csv(
            name,
            ["lambda", "x1", "x2", "p1", "p2", "u"],
            ([s.lam, s.x1, s.x2, s.p1, s.p2, s.u] for s in states),
        )
        index.append(
            {
                "start": list(start),
                "file": name if w.wants("csv") else None,
                "n_states": len(states),
                "halted": states[-1].halted,
                "p1": s0.p1,
                "max_u_drift": max(abs(s.u - s0.u) for s in states),
                "max_linear_deviation_x1": max(abs(s.x1 - (s0.x1 + s0.p1 * s.lam)) for s in states),
            }
        )
    w.json("trajectories.json", {"trajectories": index})
    return EXIT_OK


def cmd_wormhole(cfg: RunConfig, w: Writer, wp: geo.WormholeParams | None = None) -> int:
    wp = wp or geo.WormholeParams(cfg.b, cfg.x0)
    xs = wp.x0 + np.linspace(-5 * wp.b, 5 * wp.b, cfg.grid_n)
    rows = []
    for x in xs:
        if x == wp.x0:
            continue
        o2 = geo.hawking_conformal_factor(float(x), wp)
        rows.append([float(x), o2, math.sqrt(o2)])
    w.csv("wormhole.csv", ["x", "omega2", "sqrt_g"], rows)
    metric = geo.hawking_metric(wp)
    table = []
    for k in range(1, 7):
        eps = 10.0**-k
        num = geo.proper_distance(wp.x0 + eps, wp.x0 + 1.0, metric, poles=[wp.x0])
        ana = geo.hawking_distance_antiderivative(1.0, wp.b) - geo.hawking_distance_antiderivative(eps, wp.b)
        table.append({"epsilon": eps, "numeric": num, "analytic": ana, "abs_error": abs(num - ana)})
    logs = [math.log(1.0 / r["epsilon"]) for r in table]
    slope = float(np.polyfit(logs, [r["numeric"] for r in table], 1)[0])
    w.json(
        "wormhole.json",
        {
            "wormhole": {"b": wp.b, "x0": wp.x0, "throat_size": 2 * wp.b},
            "landmarks": {
                "omega2_at_x0_minus_b": geo.hawking_conformal_factor(wp.x0 - wp.b, wp),
                "omega2_at_x0_plus_b": geo.hawking_conformal_factor(wp.x0 + wp.b, wp),
            },
            "proper_distance_vs_epsilon": table,
            "log_divergence_slope": slope,
        },
    )
    return EXIT_OK


def audit_samples(cfg: RunConfig, params: ModelParams) -> list[float]:
    """``audit_n`` points spread over the inset strips, proportional to width."""
    strips = list(_strips(cfg, params))
    total = sum(hi - lo for lo, hi in strips)
    out: list[float] = []
    for i, (lo, hi) in enumerate(strips):
        k = cfg.audit_n - len(out) if i == len(strips) - 1 else max(1, round(cfg.audit_n * (hi - lo) / total))
        k = max(k, 0)
        # midpoints of k equal cells keep samples away from the strip ends
        out += [lo + (j + 0.5) * (hi - lo) / k for j in range(k)]
    return out


def cmd_audit(cfg: RunConfig, w: Writer) -> int:
    params = cfg.params
    rep = geo.audit_metric_consistency(params, audit_samples(cfg, params), pole_tol=cfg.tol_pole)
    cols = [
        "u", "status", "g11_as_printed", "g11_from_constraint", "abs_gap", "rel_gap",
        "G2_implied_by_printed", "G2_from_constraint", "agree",
    ]
    rows = [[getattr(r, c) for c in cols] for r in rep.rows]
    w.csv("audit.csv", cols, rows)
    verdicts = [{c: getattr(r, c) for c in cols} for r in rep.rows]
    w.json("audit.json", {"summary": rep.summary(), "verdicts": verdicts})
    return EXIT_OK


_DISPATCH = {
    "residuals": cmd_residuals,
    "metric": cmd_metric,
    "singularities": cmd_singularities,
    "trajectories": cmd_trajectories,
    "wormhole": cmd_wormhole,
    "audit": cmd_audit,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--config", metavar="PATH")
    g.add_argument("--out", metavar="DIR", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    g.add_argument("--format", dest="formats", metavar="FMTS", help="comma list of csv,json")
    g.add_argument("--m", type=float)
    g.add_argument("--hbar", type=float)
    g.add_argument("--c1", type=float)
    g.add_argument("--c2", type=float)
    g.add_argument("--mass-power", dest="mass_power", type=int, choices=(1, 2))
    g.add_argument("--eta11", type=int, choices=(1, -1))
    g.add_argument("--g-branch", dest="g_branch", type=int, choices=(1, -1))
    g.add_argument("--grid-n", dest="grid_n", type=int)
    g.add_argument("--u-min", dest="u_min", type=float)
    g.add_argument("--u-max", dest="u_max", type=float)
    g.add_argument("--tol-root", dest="tol_root", type=float)
    g.add_argument("--tol-pole", dest="tol_pole", type=float)
    g.add_argument("--tol-residual", dest="tol_residual", type=float)
    g.add_argument("--audit-n", dest="audit_n", type=int)

    parser = argparse.ArgumentParser(prog="bohm-epr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "trajectories":
            sp.add_argument("--start", action="append", metavar="X1,X2")
            sp.add_argument("--lambda-max", dest="lambda_max", type=float)
            sp.add_argument("--step", type=float)
        if name == "wormhole":
            sp.add_argument("--b", type=float)
            sp.add_argument("--x0", type=float)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        cfg.params
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)
    try:
        _prepare_out(out)
    except OSError as exc:
        print(f"cannot write to {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    writer = Writer(out, cfg, args.command)
    try:
        code = _DISPATCH[args.command](cfg, writer)
    except EmptyDomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in writer.written:
        print(path)
    return code


if __name__ == "__main__":
    sys.exit(main())
