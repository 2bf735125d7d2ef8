"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .kernels import BACKEND
from .oracle import QuadratureError
from .packet import (
    SPECTRAL_MIN_WEIGHT,
    Custom,
    ExponentialDecay,
    Gaussian,
    PacketError,
    auto_t0,
    make_packet,
    positive_frequency_weight,
)
from .transforms import PhysConsts, Signal, TimeGrid

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
SCHEMA = 1

GRAMMAR = """\
descriptors:
  state   vacuum | fock:<N> | coherent:<re>[+<im>i]   (e.g. coherent:i, coherent:0.3-0.7i)
  packet  exp:sigma=<x> | gauss:sigma=<x>[,f0=<y>][,center=<c>] | file:<path>
          file packets are CSV with columns t,re[,im] on a uniform grid
  grid    n=<int>,dt=<x>[,t0=<x>]
config (JSON, --config):
  {"schema": 1, "grid": {"n": .., "dt": .., "t0": ..}, "packet": "<descriptor>",
   "state": "<descriptor>", "tau": 0.0, "constants": "natural" | "si" | {"Z": .., "h": ..},
   "mode": "idealized" | "band-limited", "route": "auto" | "finite-part" | "spectral",
   "jumps": [..], "output": {"path": .., "format": "csv" | "json"}}
"""


class ConfigError(ValueError):
    """Invalid command-line or config input (exit code 2)."""


# -- descriptor parsing ---------------------------------------------------------


def _kv(body: str, what: str) -> dict:
    out = {}
    for part in filter(None, body.split(",")):
        if "=" not in part:
            raise ConfigError(f"{what}: expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _float(v, what: str) -> float:
    try:
        x = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{what}: not a number: {v!r}") from None
    if not math.isfinite(x):
        raise ConfigError(f"{what}: must be finite")
    return x


def parse_complex(s: str) -> complex:
    """Parse ``<re>[+<im>i]`` with ``i`` as the imaginary unit.

    >>> parse_complex("0.3-0.7i")
    (0.3-0.7j)
    >>> parse_complex("i")
    1j
    """
    t = s.strip().replace(" ", "")
    if not re.fullmatch(r"[0-9eE.+\-]*i?", t) or t in ("", "+", "-"):
        raise ConfigError(f"bad complex amplitude {s!r}")
    if t.endswith("i"):
        head = t[:-1]
        if head == "" or head[-1] in "+-":
            head += "1"
        t = head + "j"
    try:
        return complex(t)
    except ValueError:
        raise ConfigError(f"bad complex amplitude {s!r}") from None


def parse_state(s: str) -> tuple[str, dict]:
    s = s.strip()
    if s == "vacuum":
        return "vacuum", {}
    kind, _, body = s.partition(":")
    if kind == "fock":
        try:
            N = int(body)
        except ValueError:
            raise ConfigError(f"fock needs an integer photon number, got {body!r}") from None
        if N < 1:
            raise ConfigError("fock photon number must be >= 1")
        return "fock", {"N": N}
    if kind == "coherent":
        return "coherent", {"alpha": parse_complex(body)}
    raise ConfigError(f"unknown state descriptor {s!r}")


def parse_grid(s) -> dict:
    d = s if isinstance(s, dict) else _kv(s, "grid")
    unknown = set(d) - {"n", "dt", "t0"}
    if unknown:
        raise ConfigError(f"grid: unknown keys {sorted(unknown)}")
    if "n" not in d or "dt" not in d:
        raise ConfigError("grid needs n and dt")
    try:
        n = int(d["n"])
    except (TypeError, ValueError):
        raise ConfigError(f"grid: n must be an integer, got {d['n']!r}") from None
    if n < 2 or n % 2:
        raise ConfigError("grid: n must be even and >= 2")
    dt = _float(d["dt"], "grid dt")
    if dt <= 0:
        raise ConfigError("grid: dt must be positive")
    out = {"n": n, "dt": dt}
    if d.get("t0") is not None:
        out["t0"] = _float(d["t0"], "grid t0")
    return out


def read_csv(path: str | Path, columns: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict:
    """Read named float columns; raises :class:`ConfigError` on malformed input."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from None
    if not rows:
        raise ConfigError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    missing = [c for c in columns if c not in header]
    if missing:
        raise ConfigError(f"{path}: missing columns {missing} (header {header})")
    out = {}
    for c in columns + tuple(o for o in optional if o in header):
        j = header.index(c)
        vals = []
        for i, r in enumerate(rows[1:], start=1):
            try:
                vals.append(float(r[j]))
            except (IndexError, ValueError):
                raise ConfigError(f"{path}: row {i}: bad value in column {c!r}") from None
        arr = np.array(vals)
        if not np.all(np.isfinite(arr)):
            k = int(np.argmax(~np.isfinite(arr))) + 1
            raise ConfigError(f"{path}: row {k}: non-finite value in column {c!r}")
        out[c] = arr
    return out


def grid_from_times(t: np.ndarray, path="input") -> TimeGrid:
    """Uniform grid from a time column; rejects the first non-uniform row."""
    if t.size < 2:
        raise ConfigError(f"{path}: need at least two samples")
    d = np.diff(t)
    dt = d[0]
    if not dt > 0:
        raise ConfigError(f"{path}: row 2: time column must increase strictly")
    tol = 1e-9 * max(abs(dt), np.max(np.abs(t)) * 1e-6)
    bad = np.flatnonzero(np.abs(d - dt) > max(tol, 1e-12 * np.max(np.abs(t))))
    if bad.size:
        raise ConfigError(f"{path}: row {int(bad[0]) + 2}: time grid is not uniform")
    return TimeGrid(t.size, float((t[-1] - t[0]) / (t.size - 1)), float(t[0]))


def parse_packet(desc: str, grid_cfg: dict | None, jumps=()) -> tuple[object, TimeGrid]:
    """Packet shape and sampling grid from a descriptor."""
    kind, _, body = desc.strip().partition(":")
    if kind == "file":
        data = read_csv(body, ("t", "re"), ("im",))
        g = grid_from_times(data["t"], body)
        s = data["re"] + 1j * data.get("im", np.zeros_like(data["re"]))
        return Custom(s, tuple(float(x) for x in jumps)), g
    d = _kv(body, "packet")
    try:
        if kind == "exp":
            if set(d) - {"sigma"}:
                raise ConfigError(f"exp packet: unknown keys {sorted(set(d) - {'sigma'})}")
            shape = ExponentialDecay(_float(d.get("sigma"), "sigma"))
        elif kind == "gauss":
            if set(d) - {"sigma", "f0", "center"}:
                raise ConfigError("gauss packet: allowed keys are sigma, f0, center")
            shape = Gaussian(
                _float(d.get("sigma"), "sigma"),
                _float(d.get("f0", 0.0), "f0"),
                _float(d.get("center", 0.0), "center"),
            )
        else:
            raise ConfigError(f"unknown packet descriptor {desc!r}")
    except PacketError as e:
        raise ConfigError(str(e)) from None
    gc = grid_cfg or {"n": 65536, "dt": 1e-3}
    t0 = gc.get("t0")
    if t0 is None:
        t0 = auto_t0(shape, gc["n"], gc["dt"])
    return shape, TimeGrid(gc["n"], gc["dt"], t0)


def parse_consts(c, si_flag: bool) -> PhysConsts:
    if si_flag:
        return PhysConsts.si()
    if c is None or c == "natural":
        return PhysConsts()
    if c == "si":
        return PhysConsts.si()
    if isinstance(c, dict):
        try:
            return PhysConsts(_float(c.get("Z", 1.0), "Z"), _float(c.get("h", 1.0), "h"))
        except ValueError as e:
            raise ConfigError(str(e)) from None
    raise ConfigError(f"constants must be 'natural', 'si' or {{Z, h}}, got {c!r}")


# -- config ---------------------------------------------------------------------------


def load_config(args) -> dict:
    """Merge a JSON config (if any) with command-line overrides."""
    cfg: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        if cfg.get("schema") != SCHEMA:
            raise ConfigError(f"config schema must be {SCHEMA}, got {cfg.get('schema')!r}")
        known = {"schema", "grid", "packet", "state", "tau", "constants", "mode", "route", "jumps", "output"}
        extra = set(cfg) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
    for key in ("packet", "state", "tau", "mode", "route", "grid"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if getattr(args, "output", None):
        cfg.setdefault("output", {})
        cfg["output"] = dict(cfg["output"], path=args.output)
    cfg.setdefault("packet", "exp:sigma=1")
    cfg.setdefault("state", "fock:1")
    cfg.setdefault("tau", 0.0)
    cfg.setdefault("mode", "idealized")
    cfg.setdefault("route", "auto")
    if cfg["mode"] not in ("idealized", "band-limited"):
        raise ConfigError("mode must be idealized or band-limited")
    if cfg["route"] not in ("auto", "finite-part", "spectral"):
        raise ConfigError("route must be auto, finite-part or spectral")
    cfg["tau"] = _float(cfg["tau"], "tau")
    return cfg


def build(cfg: dict, si_flag: bool):
    from .states import StateSpec

    gcfg = parse_grid(cfg["grid"]) if cfg.get("grid") is not None else None
    shape, grid = parse_packet(cfg["packet"], gcfg, cfg.get("jumps", ()))
    try:
        p = make_packet(shape, grid, cfg["tau"])
    except PacketError as e:
        raise ConfigError(str(e)) from None
    kind, kw = parse_state(cfg["state"])
    state = StateSpec(kind, p, **kw)
    return state, parse_consts(cfg.get("constants"), si_flag)


def resolve_route(cfg: dict, p) -> str | None:
    """``auto``: finite part for shapes with jumps, spectral for smooth band-interior ones."""
    r = cfg["route"]
    if cfg["mode"] == "band-limited":
        if r == "finite-part":
            raise ConfigError("band-limited mode uses the spectral route; drop --route finite-part")
        return None
    if r != "auto":
        return r
    if not p.jumps and positive_frequency_weight(p) >= SPECTRAL_MIN_WEIGHT:
        return "spectral"
    return "finite-part"


# -- output ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return "%.17g" % x


def write_csv(path: str | None, header: list[str], cols: list[np.ndarray]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in zip(*cols):
        buf.write(",".join(_fmt(float(v)) for v in row) + "\n")
    text = buf.getvalue()
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text


def write_sidecar(path: str | None, meta: dict) -> None:
    if path is None:
        return
    meta = dict(meta, version=__version__)
    with open(str(path) + ".meta.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(meta), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def threads(args) -> int:
    v = args.threads if args.threads is not None else os.environ.get("TDQO_THREADS", "1")
    try:
        n = int(v)
    except ValueError:
        raise ConfigError(f"thread count must be an integer, got {v!r}") from None
    if n < 1:
        raise ConfigError("thread count must be >= 1")
    return n


# -- commands ---------------------------------------------------------------------------


def cmd_packet_trace(args) -> int:
    from .states import moment_report

    cfg = load_config(args)
    state, consts = build(cfg, args.si)
    route = resolve_route(cfg, state.mode)
    rep = moment_report(state, consts, mode=cfg["mode"], route=route, nthreads=threads(args))
    out = (cfg.get("output") or {}).get("path")
    fmt = (cfg.get("output") or {}).get("format", "csv")
    cols = [rep.t, rep.mean_v.samples, rep.var_v_subtracted.samples, rep.vac_var.samples]
    if fmt == "json":
        doc = {"columns": ["t", "mean_v", "var_v_sub", "vac_var"], "data": [np.asarray(c).tolist() for c in cols]}
        text = json.dumps(_jsonable(doc))
        if out is None:
            print(text)
        else:
            Path(out).write_text(text + "\n", encoding="utf-8")
    elif fmt == "csv":
        write_csv(out, ["t", "mean_v", "var_v_sub", "vac_var"], cols)
    else:
        raise ConfigError("output format must be csv or json")
    meta = dict(rep.metadata, config=cfg, route=rep.metadata.get("route"), backend=BACKEND)
    meta["singular_samples"] = int(np.sum(~np.isfinite(np.asarray(rep.var_v_subtracted.samples))))
    write_sidecar(out, meta)
    return EXIT_OK


def cmd_quadratures(args) -> int:
    from .fieldconv import QuadraturePair, edge_mask, photon_flux, quadratures_from_voltage, voltage_from_quadratures

    consts = parse_consts(None, args.si) if args.Z is None and args.h is None else PhysConsts(args.Z or 1.0, args.h or 1.0)
    if args.invert:
        data = read_csv(args.input, ("t", "p", "q"))
        g = grid_from_times(data["t"], args.input)
        mask = edge_mask(g.n)
        pair = QuadraturePair(Signal(g, data["p"]), Signal(g, data["q"]), consts, mask)
        v = voltage_from_quadratures(pair, pad=args.pad)
        write_csv(args.output, ["t", "v", "valid"], [g.t, v.samples, mask.astype(float)])
    else:
        data = read_csv(args.input, ("t", "v"))
        g = grid_from_times(data["t"], args.input)
        pair = quadratures_from_voltage(Signal(g, data["v"], "volts"), consts, pad=args.pad)
        fl = photon_flux(pair)
        write_csv(
            args.output,
            ["t", "p", "q", "n", "valid"],
            [g.t, pair.p.samples, pair.q.samples, fl.n.samples, pair.valid.astype(float)],
        )
    write_sidecar(
        args.output,
        {"input": str(args.input), "invert": args.invert, "Z": consts.Z, "h": consts.h, "pad": args.pad,
         "edge_fraction": 0.1},
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verification import run

    rep = run(args.suite, nthreads=threads(args))
    doc = _jsonable(rep.to_json())
    text = json.dumps(doc, indent=2)
    if args.report:
        Path(args.report).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    for c in rep.checks:
        tag = "info" if c.informational else ("PASS" if c.passed else "FAIL")
        print(f"{tag:4s} {c.suite:10s} {c.name}: {c.measured:.3g}", file=sys.stderr)
    return EXIT_OK if rep.ok else EXIT_VERIFY


def cmd_arrival(args) -> int:
    from .states import arrival_stats

    cfg = load_config(args)
    state, _ = build(cfg, args.si)
    rep = arrival_stats(state, oracle=args.oracle)
    doc = _jsonable(
        {
            "mean_arrival": rep.mean_arrival,
            "intra_pulse_spread": rep.intra_pulse_spread,
            "theta_mean": rep.theta_mean,
            "theta_variance": rep.theta_variance,
            "n_mean": rep.n_mean,
            "oracle": rep.oracle,
            "provenance": rep.provenance,
            "config": cfg,
            "version": __version__,
        }
    )
    text = json.dumps(doc, indent=2, sort_keys=True)
    out = (cfg.get("output") or {}).get("path")
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------------


def _add_global_args(ap, si_default, threads_default):
    ap.add_argument("--si", action="store_true", default=si_default, help="Z = 50 ohm and SI Planck constant")
    ap.add_argument("--threads", type=int, default=threads_default, help="worker threads (env TDQO_THREADS)")


def _add_packet_args(sp):
    sp.add_argument("--config", help="JSON run config (schema 1)")
    sp.add_argument("--packet", help="packet descriptor")
    sp.add_argument("--state", help="state descriptor")
    sp.add_argument("--grid", help="grid descriptor n=..,dt=..[,t0=..]")
    sp.add_argument("--tau", type=float, help="arrival offset")
    sp.add_argument("-o", "--output", help="output path (default stdout)")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tdqo",
        description="Time-domain photon-packet voltage statistics, quadratures and operator checks.",
        epilog=GRAMMAR,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ap.add_argument("--version", action="version", version=f"tdqo {__version__}")
    _add_global_args(ap, False, None)
    # also accepted after the subcommand; SUPPRESS keeps the top-level value
    common = argparse.ArgumentParser(add_help=False)
    _add_global_args(common, argparse.SUPPRESS, argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="cmd", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    sp = sub.add_parser("packet-trace", help="mean and variance traces of a packet state",
                        epilog=GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_packet_args(sp)
    sp.add_argument("--mode", choices=("idealized", "band-limited"))
    sp.add_argument("--route", choices=("auto", "finite-part", "spectral"))
    sp.set_defaults(func=cmd_packet_trace)

    sq = sub.add_parser("quadratures", help="voltage CSV (t,v) to t,p,q,n,valid")
    sq.add_argument("input")
    sq.add_argument("-o", "--output")
    sq.add_argument("--invert", action="store_true", help="read t,p,q and write t,v,valid")
    sq.add_argument("--pad", type=int, default=1, help="zero-padding factor (1 = periodic window)")
    sq.add_argument("--Z", type=float, default=None)
    sq.add_argument("--h", type=float, default=None)
    sq.set_defaults(func=cmd_quadratures)

    sv = sub.add_parser("verify", help="run the verification suite")
    sv.add_argument("suite", nargs="?", default="all", choices=("all", "transforms", "packet", "states", "algebra"))
    sv.add_argument("--report", help="write the JSON report here instead of stdout")
    sv.set_defaults(func=cmd_verify)

    sa = sub.add_parser("arrival", help="arrival-time statistics as JSON",
                        epilog=GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_packet_args(sa)
    sa.add_argument("--oracle", action="store_true", help="attach matrix-oracle theta moments")
    sa.set_defaults(func=cmd_arrival)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    if getattr(args, "threads", None) is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, QuadratureError, FloatingPointError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (PacketError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
