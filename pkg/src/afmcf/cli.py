"""Command-line front end: ``afmcf {surface,foliation,estimates,flow,sweep}``.

Every option can also be given in a ``--config`` file of ``key=value`` lines.
Precedence is built-in default, then config file, then command line. Data goes
to stdout (or ``--out``); logging goes to stderr.

Exit codes: 0 ok, 1 usage, 2 blowup, 3 admissibility, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import AdmissibilityError, BlowupError
from .estimates import DEFAULT_K3, report
from .flow import TRACE_COLUMNS, FlowConfig, FlowTrace, run
from .foliation import AmbientFoliation
from .grid import PeriodicGrid, read_field, write_field
from .surface import (areas, check_gauss_residual, load_surface, make_fuchsian, save_surface,
                      solve_gauss_equation, synthetic_example)

log = logging.getLogger("afmcf")

EXIT_OK, EXIT_USAGE, EXIT_BLOWUP, EXIT_ADMISSIBILITY, EXIT_IO = 0, 1, 2, 3, 4

SWEEP_COLUMNS = ("lambda0", "r0", "vol_exact", "vol_taylor", "vol_c1", "dim_quasicircle",
                 "dim_bc", "lambda0_spec_bound")
FOLIATION_COLUMNS = ("r", "area", "mu1_min", "mu1_max", "mu2_min", "mu2_max", "H_min", "H_max")

_COMMON = {"seed": 0, "quiet": False, "verbose": False}
_GRID = {"nx": 64, "ny": 64, "lx": 2 * math.pi, "ly": 2 * math.pi}
DEFAULTS = {
    "surface": {**_COMMON, **_GRID, "source": "synthetic:0.5", "v_amp": 0.1, "ratio": 0.6,
                "genus": None, "gauss_tol": 1e-10, "out_dir": None, "out": "-"},
    "foliation": {**_COMMON, **_GRID, "surface": None, "r_min": -3.0, "r_max": 3.0,
                  "r_steps": 61, "out": "-"},
    "estimates": {**_COMMON, "lambda0": None, "genus": 2, "sweep": None, "k3": DEFAULT_K3,
                  "a_hyp_mode": "nominal", "a_hyp": None, "out": "-"},
    "flow": {**_COMMON, **_GRID, "surface": None, "u0": None, "t_end": 1.0, "dt_safety": 0.5,
             "output_every": 10, "dt_max": math.inf, "max_steps": 10_000_000, "out": "-",
             "final_u": None},
    "sweep": {**_COMMON, "lambda0": None, "genus": 2, "k3": DEFAULT_K3,
              "a_hyp_mode": "nominal", "a_hyp": None, "out": "-"},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _add_common(p):
    p.add_argument("--config", help="key=value file; command-line flags override it")
    p.add_argument("--seed", type=int, help="recorded in outputs; all pipelines are deterministic")
    p.add_argument("--quiet", action="store_const", const=True)
    p.add_argument("--verbose", action="store_const", const=True)


def _add_grid(p):
    p.add_argument("--nx", type=int, help="grid size for builtin surfaces")
    p.add_argument("--ny", type=int)
    p.add_argument("--lx", type=float, help="cell length for builtin surfaces")
    p.add_argument("--ly", type=float)


def build_parser() -> tuple[_Parser, dict]:
    parser = _Parser(prog="afmcf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"afmcf {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    subs = {}

    p = subs["surface"] = sub.add_parser("surface", help="generate or inspect reference data")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--source", help="fuchsian0 | fuchsian:<v> | synthetic:<lambda0> | "
                                    "gauss:<re>:<im> | <directory>")
    p.add_argument("--v-amp", type=float)
    p.add_argument("--ratio", type=float)
    p.add_argument("--genus", type=int)
    p.add_argument("--gauss-tol", type=float)
    p.add_argument("--out-dir", help="write the surface directory here")
    p.add_argument("--out", help="JSON summary path ('-' for stdout)")

    p = subs["foliation"] = sub.add_parser("foliation", help="slice areas and curvatures")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--surface")
    p.add_argument("--r-min", type=float)
    p.add_argument("--r-max", type=float)
    p.add_argument("--r-steps", type=int)
    p.add_argument("--out")

    for name in ("estimates", "sweep"):
        p = subs[name] = sub.add_parser(name, help="closed-form bounds")
        _add_common(p)
        p.add_argument("--lambda0", help="value (estimates) or lo:hi:n (sweep)")
        p.add_argument("--genus", type=int)
        if name == "estimates":
            p.add_argument("--sweep", help="lo:hi:n; CSV instead of JSON")
        p.add_argument("--k3", type=float)
        p.add_argument("--a-hyp-mode", choices=("nominal", "effective"))
        p.add_argument("--a-hyp", type=float)
        p.add_argument("--out")

    p = subs["flow"] = sub.add_parser("flow", help="graphical mean curvature flow")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--surface")
    p.add_argument("--u0", help="const:<c> | sine:<mean>:<amp>:<kx>:<ky> | file:<path>")
    p.add_argument("--t-end", type=float)
    p.add_argument("--dt-safety", type=float)
    p.add_argument("--output-every", type=int)
    p.add_argument("--dt-max", type=float)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--out")
    p.add_argument("--final-u")
    return parser, subs


def read_config(path) -> list[tuple[str, str]]:
    pairs = []
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"{path}:{n}: expected key=value, got {line!r}")
        pairs.append((key.strip().replace("-", "_"), val.strip()))
    return pairs


def resolve(argv) -> tuple[str, dict]:
    """Parse ``argv`` and merge defaults, config file and flags into one dict."""
    parser, subs = build_parser()
    ns = parser.parse_args(argv)
    if ns.command is None:
        raise UsageError("afmcf: a subcommand is required "
                         "(surface, foliation, estimates, flow, sweep)")
    cmd = ns.command
    cfg = dict(DEFAULTS[cmd])
    if ns.config is not None:
        actions = {a.dest: a for a in subs[cmd]._actions}
        for key, val in read_config(ns.config):
            if key not in cfg:
                raise UsageError(f"unknown config key {key!r} for '{cmd}'")
            act = actions[key]
            try:
                if act.const is True:
                    cfg[key] = _bool(val)
                elif act.type is not None:
                    cfg[key] = act.type(val)
                else:
                    cfg[key] = val
            except ValueError as exc:
                raise UsageError(f"config key {key!r}: {exc}") from exc
            if act.choices is not None and cfg[key] not in act.choices:
                raise UsageError(f"config key {key!r}: {val!r} not in {list(act.choices)}")
    for key in cfg:
        val = getattr(ns, key, None)
        if val is not None:
            cfg[key] = val
    return cmd, cfg


def _threads() -> int:
    raw = os.environ.get("AFMCF_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"AFMCF_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"AFMCF_THREADS must be a positive integer, got {raw!r}")
    return n


# -- formatting -------------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return str(x).lower() if x is not None else ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def _json(obj, indent=0) -> str:
    pad = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json(v, indent + 1) for v in obj) + "]"
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    return json.dumps(str(obj))


def _header(cmd: str, cfg: dict) -> list[str]:
    lines = [f"# afmcf {__version__}", f"# command={cmd}"]
    lines += [f"# {k}={fmt(v)}" for k, v in sorted(cfg.items())]
    return lines


def _csv(cmd, cfg, columns, rows) -> str:
    lines = _header(cmd, cfg) + [",".join(columns)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _json_doc(cmd, cfg, payload: dict) -> str:
    doc = {"afmcf_version": __version__, "command": cmd, **payload,
           "config": {k: cfg[k] for k in sorted(cfg)}}
    return _json(doc) + "\n"


def _emit(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


# -- input grammars -----------------------------------------------------------


def _parse_floats(spec: str, parts: list[str], n: int) -> list[float]:
    if len(parts) != n:
        raise UsageError(f"{spec!r}: expected {n} numeric fields")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"{spec!r}: fields must be numbers") from None


def parse_range(spec: str) -> np.ndarray:
    """``lo:hi:n`` -> ``n`` equally spaced values including both ends."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"range {spec!r}: expected lo:hi:n")
    lo, hi = _parse_floats(spec, parts[:2], 2)
    try:
        n = int(parts[2])
    except ValueError:
        raise UsageError(f"range {spec!r}: n must be an integer") from None
    if n < 1:
        raise UsageError(f"range {spec!r}: n must be >= 1")
    return np.linspace(lo, hi, n)


def resolve_surface(spec: str, cfg: dict):
    """Builtin name or surface directory -> ``(ReferenceSurfaceData, meta)``."""
    if spec is None:
        raise UsageError("--surface is required")

    def grid():
        return PeriodicGrid(cfg["nx"], cfg["ny"], cfg["lx"], cfg["ly"])

    head, _, rest = spec.partition(":")
    if spec == "fuchsian0":
        return make_fuchsian(grid()), {}
    if head == "fuchsian" and rest:
        (v,) = _parse_floats(spec, [rest], 1)
        return make_fuchsian(grid(), v), {}
    if head == "synthetic" and rest:
        (lam,) = _parse_floats(spec, [rest], 1)
        if not 0 <= lam < 1:
            raise AdmissibilityError(f"synthetic lambda0 must lie in [0, 1), got {lam!r}",
                                     lambda0=lam)
        return synthetic_example(grid(), lam, cfg.get("v_amp", 0.1), cfg.get("ratio", 0.6)), {}
    if head == "gauss" and rest:
        re_, im_ = _parse_floats(spec, rest.split(":"), 2)
        return solve_gauss_equation(grid(), re_, im_, tol=cfg.get("gauss_tol", 1e-10)), {}
    return load_surface(spec)


def initial_height(spec: str, grid: PeriodicGrid) -> np.ndarray:
    if spec is None:
        raise UsageError("--u0 is required")
    head, _, rest = spec.partition(":")
    if head == "const":
        (c,) = _parse_floats(spec, [rest], 1)
        return np.full(grid.shape, c)
    if head == "sine":
        mean, amp, kx, ky = _parse_floats(spec, rest.split(":"), 4)
        X, Y = grid.coords()
        return mean + amp * np.sin(2 * np.pi * (kx * X / grid.Lx + ky * Y / grid.Ly))
    if head == "file":
        f = read_field(rest)
        if f.grid != grid:
            raise UsageError(f"{rest}: field grid {f.grid} does not match surface grid {grid}")
        return np.array(f.values)
    raise UsageError(f"--u0 {spec!r}: expected const:, sine: or file:")


# -- subcommands --------------------------------------------------------------


def cmd_surface(cfg) -> int:
    s, meta = resolve_surface(cfg["source"], cfg)
    genus = cfg["genus"]
    if genus is None and "genus" in meta:
        genus = int(meta["genus"])
    a = areas(s, genus)
    if cfg["out_dir"] is not None:
        save_surface(cfg["out_dir"], s, genus)
    g = s.grid
    payload = {
        "nx": g.nx, "ny": g.ny, "Lx": g.Lx, "Ly": g.Ly, "normal_form": s.normal_form,
        "lambda0": s.lambda0, "lambda0_location": list(s.lambda0_location),
        "area": a.area, "a_hyp_eff": a.a_hyp_eff, "a_hyp_nominal": a.a_hyp_nominal,
        "gauss_residual": check_gauss_residual(s),
    }
    _emit(cfg["out"], _json_doc("surface", cfg, payload))
    return EXIT_OK


def cmd_foliation(cfg) -> int:
    s, _ = resolve_surface(cfg["surface"], cfg)
    if cfg["r_steps"] < 1:
        raise UsageError("--r-steps must be >= 1")
    fol = AmbientFoliation(s)
    rows = []
    for r in np.linspace(cfg["r_min"], cfg["r_max"], cfg["r_steps"]):
        sg = fol.slice_geometry(float(r))
        rows.append((float(r), sg.area, sg.mu1.min()[0], sg.mu1.max()[0], sg.mu2.min()[0],
                     sg.mu2.max()[0], sg.H.min()[0], sg.H.max()[0]))
    _emit(cfg["out"], _csv("foliation", cfg, FOLIATION_COLUMNS, rows))
    return EXIT_OK


def _report(lam, cfg):
    return report(float(lam), genus=cfg["genus"], a_hyp_mode=cfg["a_hyp_mode"],
                  a_hyp=cfg["a_hyp"], k3=cfg["k3"])


def _sweep(cmd, cfg, spec) -> int:
    rows = []
    for lam in parse_range(spec):
        rep = _report(lam, cfg)
        if rep.near_boundary:
            log.warning("lambda0=%s is near the admissibility boundary", fmt(rep.lambda0))
        rows.append((rep.lambda0, rep.r0, rep.vol_bound_exact, rep.vol_bound_taylor,
                     rep.vol_c1_bound, rep.hausdorff_bound_quasicircle, rep.hausdorff_bound_bc,
                     rep.spectrum_lower_bound))
    _emit(cfg["out"], _csv(cmd, cfg, SWEEP_COLUMNS, rows))
    return EXIT_OK


def cmd_estimates(cfg) -> int:
    if cfg["sweep"] is not None:
        return _sweep("estimates", cfg, cfg["sweep"])
    if cfg["lambda0"] is None:
        raise UsageError("estimates needs --lambda0 or --sweep")
    try:
        lam = float(cfg["lambda0"])
    except ValueError:
        raise UsageError(f"--lambda0 {cfg['lambda0']!r} is not a number") from None
    rep = _report(lam, cfg)
    if rep.near_boundary:
        log.warning("lambda0=%s is near the admissibility boundary", fmt(rep.lambda0))
    _emit(cfg["out"], _json_doc("estimates", cfg, rep.to_dict()))
    return EXIT_OK


def cmd_sweep(cfg) -> int:
    if cfg["lambda0"] is None:
        raise UsageError("sweep needs --lambda0 lo:hi:n")
    return _sweep("sweep", cfg, cfg["lambda0"])


def cmd_flow(cfg) -> int:
    s, _ = resolve_surface(cfg["surface"], cfg)
    u0 = initial_height(cfg["u0"], s.grid)
    try:
        fc = FlowConfig(dt_safety=cfg["dt_safety"], t_end=cfg["t_end"],
                        output_every=cfg["output_every"], dt_max=cfg["dt_max"],
                        max_steps=cfg["max_steps"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    fol = AmbientFoliation(s)
    try:
        res = run(fol, u0, fc)
    except BlowupError as exc:
        if isinstance(exc.trace, FlowTrace):
            _emit(cfg["out"], _csv("flow", cfg, TRACE_COLUMNS, exc.trace.rows))
        raise
    _emit(cfg["out"], _csv("flow", cfg, TRACE_COLUMNS, res.trace.rows))
    if cfg["final_u"] is not None:
        write_field(cfg["final_u"], res.u)
    last = res.trace.rows[-1]
    log.info("flow done: steps=%d t=%s u_max=%s", res.steps, fmt(last.t), fmt(last.u_max))
    return EXIT_OK


COMMANDS = {"surface": cmd_surface, "foliation": cmd_foliation, "estimates": cmd_estimates,
            "flow": cmd_flow, "sweep": cmd_sweep}


def _setup_logging(cfg) -> None:
    level = logging.DEBUG if cfg["verbose"] else logging.ERROR if cfg["quiet"] else logging.WARNING
    logging.basicConfig(stream=sys.stderr, level=level, force=True,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cmd, cfg = resolve(argv)
        cfg["threads"] = _threads()
        _setup_logging(cfg)
        return COMMANDS[cmd](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BlowupError as exc:
        print(f"blowup: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except AdmissibilityError as exc:
        print(f"admissibility: {exc}", file=sys.stderr)
        return EXIT_ADMISSIBILITY
    except OSError as exc:
        print(f"io: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
