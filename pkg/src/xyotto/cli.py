"""Command-line front end.

Every run is a pure function of its resolved configuration, which is
embedded in the output file.  Exit codes: 0 ok, 2 config error,
3 numerical failure, 4 verify failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from .analysis import (
    BracketError,
    GapNotFound,
    adiabaticity_curve,
    axis,
    efficiency_curve,
    find_temperature_gap,
    sweep_regimes,
)
from .cycle import ConsistencyError, run_cycle
from .dynamics import SCHEDULE_KINDS, FieldSchedule, IntegrationError, OracleError, adiabaticity
from .model import ModelParams
from .verify import run_all

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VERIFY = 4

COMMANDS = ("cycle", "sweep", "adiabaticity", "efficiency", "gap", "verify")

# default grids per command; gap needs the wider T range to reach T2_0
DEFAULT_GRIDS = {
    "sweep": {"grid_t1": "0.01:6:201", "grid_t2": "0.01:6:201"},
    "gap": {"grid_t1": "0.01:40:201", "grid_t2": "0.01:40:201"},
    "efficiency": {"grid_t1": "0.01:6:201", "grid_t2": "0.01:6:201"},
    "adiabaticity": {"grid_tau": "0.001:50:60:log"},
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    min: float
    max: float
    count: int
    scale: str = "linear"

    @classmethod
    def parse(cls, name: str, value) -> "GridSpec":
        if isinstance(value, dict):
            try:
                spec = cls(float(value["min"]), float(value["max"]), int(value["count"]),
                           str(value.get("scale", "linear")))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"{name}: expected {{min, max, count[, scale]}} ({exc})") from None
        else:
            parts = str(value).split(":")
            if len(parts) not in (3, 4):
                raise ConfigError(f"{name}: expected min:max:count[:log], got {value!r}")
            try:
                spec = cls(float(parts[0]), float(parts[1]), int(parts[2]),
                           "log" if len(parts) == 4 and parts[3] == "log" else "linear")
            except ValueError:
                raise ConfigError(f"{name}: could not parse {value!r}") from None
            if len(parts) == 4 and parts[3] not in ("log", "linear"):
                raise ConfigError(f"{name}: scale must be 'log' or 'linear', got {parts[3]!r}")
        if spec.count < 2:
            raise ConfigError(f"{name}: count must be >= 2")
        if not spec.min < spec.max:
            raise ConfigError(f"{name}: min must be < max")
        if spec.scale not in ("linear", "log"):
            raise ConfigError(f"{name}: scale must be 'log' or 'linear'")
        if spec.scale == "log" and spec.min <= 0:
            raise ConfigError(f"{name}: log grid needs min > 0")
        return spec

    def values(self) -> np.ndarray:
        return axis(self.min, self.max, self.count, self.scale)


@dataclass
class RunConfig:
    command: str
    jx: float | None = None
    jy: float | None = None
    h1: float | None = None
    h2: float | None = None
    t1: float | None = None
    t2: float | None = None
    tau: float | None = None
    p: list = field(default_factory=list)
    schedule: str = "sqrt-linear"
    grid_t1: GridSpec | None = None
    grid_t2: GridSpec | None = None
    grid_tau: GridSpec | None = None
    out: str | None = None
    format: str = "csv"
    seed: int = 0
    workers: int = 1
    no_timing: bool = False

    def params(self) -> ModelParams:
        kw = dict(Jx=self.jx, Jy=self.jy, h1=self.h1, h2=self.h2)
        if self.t1 is not None:
            kw["T1"] = self.t1
        if self.t2 is not None:
            kw["T2"] = self.t2
        if self.tau is not None:
            kw["tau"] = self.tau
        try:
            return ModelParams(**kw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def resolved(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d.pop("no_timing")
        return d


_KEYS = {f.name for f in fields(RunConfig)}
_FLOATS = ("jx", "jy", "h1", "h2", "t1", "t2", "tau")


def _parse_p(value) -> list:
    if value is None:
        return []
    items = value if isinstance(value, list) else str(value).split(",")
    try:
        out = [float(v) for v in items]
    except (TypeError, ValueError):
        raise ConfigError(f"p: expected a number or comma-separated list, got {value!r}") from None
    for v in out:
        if not 0.0 <= v <= 1.0:
            raise ConfigError(f"p: adiabaticity must lie in [0, 1], got {v}")
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="xyotto", description="Two-qubit XY quantum Otto cycle")
    ap.add_argument("--config", help="JSON config file; flags override its values")
    ap.add_argument("--command", choices=COMMANDS)
    for name in _FLOATS:
        ap.add_argument(f"--{name}", type=float)
    ap.add_argument("--p", help="adiabaticity, or comma-separated list (efficiency, gap series)")
    ap.add_argument("--schedule", choices=sorted(SCHEDULE_KINDS))
    for name in ("t1", "t2", "tau"):
        ap.add_argument(f"--grid-{name}", dest=f"grid_{name}", metavar="MIN:MAX:COUNT[:log]")
    ap.add_argument("--out", help="output path (stdout if omitted)")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--seed", type=int)
    ap.add_argument("--workers", type=int, help="worker processes for sweeps")
    ap.add_argument("--no-timing", dest="no_timing", action="store_true", default=None,
                    help="omit wall time from JSON metadata (byte-identical reruns)")
    return ap


def parse_config(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    raw: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: malformed JSON ({exc})") from None
        if not isinstance(raw, dict):
            raise ConfigError("config: top level must be an object")
        raw = {k.replace("-", "_").lower(): v for k, v in raw.items()}
        unknown = sorted(set(raw) - _KEYS)
        if unknown:
            raise ConfigError(f"config: unknown field(s) {', '.join(unknown)}")
    for k, v in vars(args).items():
        if k != "config" and v is not None:
            raw[k] = v
    return validate(raw)


def validate(raw: dict) -> RunConfig:
    cmd = raw.get("command")
    if cmd not in COMMANDS:
        raise ConfigError(f"command: expected one of {', '.join(COMMANDS)}, got {cmd!r}")
    kw: dict = {"command": cmd}
    for name in _FLOATS:
        if raw.get(name) is not None:
            try:
                kw[name] = float(raw[name])
            except (TypeError, ValueError):
                raise ConfigError(f"{name}: expected a number, got {raw[name]!r}") from None
    kw["p"] = _parse_p(raw.get("p"))
    sched = raw.get("schedule", "sqrt-linear")
    if sched not in SCHEDULE_KINDS:
        raise ConfigError(f"schedule: expected one of {', '.join(sorted(SCHEDULE_KINDS))}")
    kw["schedule"] = sched
    grids = dict(DEFAULT_GRIDS.get(cmd, {}))
    if cmd == "efficiency":
        # only the scanned (hot) axis gets a default
        grids.pop("grid_t2" if raw.get("t2") is not None else "grid_t1")
    for name in ("grid_t1", "grid_t2", "grid_tau"):
        if raw.get(name) is not None:
            grids[name] = raw[name]
    for name, value in grids.items():
        kw[name] = GridSpec.parse(name, value)
    fmt = raw.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format: expected csv or json, got {fmt!r}")
    kw["format"] = fmt
    for name, default in (("seed", 0), ("workers", 1)):
        v = raw.get(name, default)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{name}: expected an integer, got {v!r}")
        kw[name] = v
    if kw["workers"] < 1:
        raise ConfigError("workers: must be >= 1")
    kw["out"] = raw.get("out")
    kw["no_timing"] = bool(raw.get("no_timing", False))
    cfg = RunConfig(**kw)

    if cmd != "verify":
        missing = [n for n in ("jx", "jy", "h1", "h2") if getattr(cfg, n) is None]
        if missing:
            raise ConfigError(f"missing required field(s): {', '.join(missing)}")
        cfg.params()
    if cmd in ("cycle", "sweep", "efficiency", "gap"):
        if (cfg.tau is None) == (not cfg.p):
            raise ConfigError("give exactly one of tau (schedule) or p (explicit adiabaticity)")
        if cmd in ("cycle", "sweep") and len(cfg.p) > 1:
            raise ConfigError(f"p: {cmd} takes a single value")
    if cmd == "cycle" and (cfg.t1 is None or cfg.t2 is None):
        raise ConfigError("cycle needs both t1 and t2")
    if cmd == "efficiency" and (cfg.t1 is None) == (cfg.t2 is None):
        raise ConfigError("efficiency needs exactly one fixed bath: t2 (scan T1) or t1 (scan T2)")
    return cfg


# -- execution -------------------------------------------------------------------


class NumericalFailure(RuntimeError):
    pass


def _adiabaticities(cfg: RunConfig, params: ModelParams) -> list[float]:
    if cfg.p:
        return list(cfg.p)
    s = FieldSchedule(params.h1, params.h2, cfg.tau, cfg.schedule)
    return [adiabaticity(params, s)]


def _cmd_cycle(cfg: RunConfig):
    params = cfg.params()
    if cfg.p:
        out = run_cycle(params, P=cfg.p[0])
    else:
        out = run_cycle(params, FieldSchedule(params.h1, params.h2, cfg.tau, cfg.schedule))
    e = out.energetics
    rec = dict(
        t1=params.T1, t2=params.T2, p=out.P, regime=out.label,
        w_cyc=e.W_cyc, q1=e.Q1, q2=e.Q2,
        eta=math.nan if out.efficiency is None else out.efficiency,
        w12=e.W12, w21=e.W21, w12_ad=e.W12_ad, w12_na=e.W12_na, w21_ad=e.W21_ad, w21_na=e.W21_na,
        e1=e.E1, e2=e.E2, e3=e.E3, e4=e.E4,
        oracle_deviation=math.nan if out.oracle_deviation is None else out.oracle_deviation,
    )
    return [rec], {"p": out.P}


def _cmd_sweep(cfg: RunConfig):
    params = cfg.params()
    P = _adiabaticities(cfg, params)[0]
    rm = sweep_regimes(params, P, cfg.grid_t1.values(), cfg.grid_t2.values(), workers=cfg.workers)
    if rm.first_law_max > 1e-10:
        raise NumericalFailure(f"first-law residual {rm.first_law_max:.3e} exceeds 1e-10")
    return list(rm.records()), {"p": P, "first_law_max": rm.first_law_max}


def _cmd_adiabaticity(cfg: RunConfig):
    params = cfg.params()
    rows = adiabaticity_curve(params, cfg.grid_tau.values(), cfg.schedule, workers=cfg.workers)
    bad = [(t, err) for t, _, err in rows if err is not None]
    if bad:
        t, err = bad[0]
        raise NumericalFailure(f"integration failed at Jx={params.Jx}, Jy={params.Jy}, "
                               f"h1={params.h1}, h2={params.h2}, tau={t}: {err}")
    return [dict(tau=t, p=P) for t, P, _ in rows], {}


def _cmd_efficiency(cfg: RunConfig):
    params = cfg.params()
    vary = "T1" if cfg.t2 is not None else "T2"
    hot = (cfg.grid_t1 if vary == "T1" else cfg.grid_t2).values()
    Ps = _adiabaticities(cfg, params)
    curves = efficiency_curve(params, hot, Ps, vary=vary)
    recs = []
    for P in Ps:
        for T, eta in zip(hot, curves[float(P)]):
            recs.append(dict(p=P, t_hot=float(T), eta=float(eta)))
    return recs, {"vary": vary, "eta_otto": 1.0 - params.h2 / params.h1}


def _cmd_gap(cfg: RunConfig):
    params = cfg.params()
    Ps = _adiabaticities(cfg, params)
    rep = find_temperature_gap(params, Ps[0], cfg.grid_t2.values(), cfg.grid_t1.values(),
                               P_series=Ps[1:])
    rec = dict(p=rep.P, t2_0=rep.T2_0, t1_a=rep.T1_a, t1_b=rep.T1_b, width=rep.width,
               verified=rep.verified, cells_checked=rep.cells_checked)
    recs = [rec] + [dict(p=P, width=w) for P, w in rep.widened_vs_P]
    return recs, {"note": rep.note}


def _cmd_verify(cfg: RunConfig):
    checks = run_all(cfg.seed)
    for c in checks:
        print(c.line(), file=sys.stderr)
    recs = [dict(check=c.name, passed=c.passed, detail=c.detail) for c in checks]
    return recs, {"all_passed": all(c.passed for c in checks)}


HANDLERS = {
    "cycle": _cmd_cycle,
    "sweep": _cmd_sweep,
    "adiabaticity": _cmd_adiabaticity,
    "efficiency": _cmd_efficiency,
    "gap": _cmd_gap,
    "verify": _cmd_verify,
}


# -- writers -------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.11e}"
    return str(v)


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def render_csv(records: list[dict], meta: dict) -> str:
    buf = io.StringIO()
    buf.write(f"# tool: xyotto {meta['version']}\n")
    buf.write(f"# config: {json.dumps(_json_value(meta['config']), sort_keys=True)}\n")
    buf.write(f"# results: {json.dumps(_json_value(meta['results']), sort_keys=True)}\n")
    if records:
        w = csv.writer(buf, lineterminator="\n")
        cols = list(records[0])
        for r in records[1:]:
            cols += [k for k in r if k not in cols]
        w.writerow(cols)
        for r in records:
            w.writerow([_fmt(r[c]) if c in r else "" for c in cols])
    return buf.getvalue()


def render_json(records: list[dict], meta: dict) -> str:
    doc = {"metadata": _json_value(meta), "records": _json_value(records)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def execute(cfg: RunConfig) -> int:
    start = time.perf_counter()
    try:
        records, results = HANDLERS[cfg.command](cfg)
    except ConfigError:
        raise
    except (IntegrationError, OracleError, ConsistencyError, NumericalFailure,
            GapNotFound, BracketError, FloatingPointError) as exc:
        print(f"xyotto: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # precondition rejections (e.g. gap on weak coupling) are config errors
        raise ConfigError(str(exc)) from None
    meta = {"tool": "xyotto", "version": __version__, "config": cfg.resolved(), "results": results}
    if cfg.format == "json" and not cfg.no_timing:
        meta["wall_time_s"] = time.perf_counter() - start
    text = render_csv(records, meta) if cfg.format == "csv" else render_json(records, meta)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cfg.command == "verify" and not results["all_passed"]:
        return EXIT_VERIFY
    return EXIT_OK


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        return execute(cfg)
    except ConfigError as exc:
        print(f"xyotto: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # argparse
        return int(exc.code or 0) if exc.code in (0, None) else EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
