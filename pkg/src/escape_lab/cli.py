"""Command-line front end.

    escape-lab --config run.json [--out DIR] [--threads N] [--verbose]

The config is a single JSON document naming the function, the command and
that command's parameter block.  Every run writes ``manifest.json`` next to
its outputs.  Exit status: 0 success, 2 validation error, 3 computation error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import mpmath
import numpy as np

from . import __version__
from .components import connectivity
from .criteria import Disc, build_baker_sequences, verify_theorem4_curves
from .errors import EscapeLabError, NoCandidate, PreconditionError, ValidationError
from .escape import GridSpec, classify_bd, classify_fast, classify_grid, julia_boundary
from .functions import FunctionSpec
from .io import class_image, write_csv, write_json, write_pgm, write_ppm
from .modulus import build_profile, estimate_order, growth_report

log = logging.getLogger("escape_lab")

COMMANDS = ("profile", "order", "certify", "curves", "grid", "report")

_PROFILE = {"r_min": 1e2, "r_max": 1e8, "points_per_decade": 8, "k_max": 64, "k_min": 256}
DEFAULTS = {
    "profile": dict(_PROFILE),
    "order": dict(_PROFILE, tail_fraction=0.5),
    "report": dict(_PROFILE, tail_fraction=0.5, epsilon=0.5, R=math.e ** math.e),
    "certify": {"logR1": math.log(1e3), "c": 2.0, "n_max": 3},
    "curves": {"logR1": math.log(1e3), "c": 2.0, "n_max": 3,
               "disc": {"center": [-1.5, 0.0], "radius": 0.1},
               "attestation": "user-asserted"},
    "grid": {"center": [0.0, 0.0], "width": 4.0, "height": 4.0, "nx": 128, "ny": 128,
             "max_iter": 64, "bailout": 1e6, "confirm_steps": 3,
             "pixel_budget": 2 ** 22, "logR": None, "L_max": 3, "disc": None,
             "include_n0": False},
}


@dataclass
class RunConfig:
    function: FunctionSpec
    command: str
    params: dict
    output_dir: str = "out"
    seed: int = 0
    raw: dict = field(default_factory=dict, repr=False)

    def echo(self):
        return {"function": self.function.to_dict(), "command": self.command,
                self.command: self.params, "output_dir": self.output_dir, "seed": self.seed}


def _disc(d):
    if not isinstance(d, dict) or "center" not in d or "radius" not in d:
        raise ValidationError("disc must be {'center': [x, y], 'radius': r}")
    c = d["center"]
    c = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
    return Disc(c, float(d["radius"]))


def parse_config(raw):
    """Validate a config document; every parameter is checked before any work."""
    if not isinstance(raw, dict):
        raise ValidationError("config must be a JSON object")
    unknown = set(raw) - {"function", "command", "output_dir", "seed", *COMMANDS}
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    cmd = raw.get("command")
    if cmd not in COMMANDS:
        raise ValidationError(f"command must be one of {COMMANDS}")
    others = [c for c in COMMANDS if c != cmd and c in raw]
    if others:
        raise ValidationError(f"exactly one command block allowed, found extra {others}")
    f = FunctionSpec.from_dict(raw.get("function"))
    block = raw.get(cmd, {})
    if not isinstance(block, dict):
        raise ValidationError(f"'{cmd}' block must be an object")
    bad = set(block) - set(DEFAULTS[cmd])
    if bad:
        raise ValidationError(f"unknown '{cmd}' parameters: {sorted(bad)}")
    params = dict(DEFAULTS[cmd], **block)
    _validate(cmd, params)
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ValidationError("seed must be an integer")
    return RunConfig(f, cmd, params, str(raw.get("output_dir", "out")), seed, raw)


def _validate(cmd, p):
    if cmd in ("profile", "order", "report"):
        if not 0 < p["r_min"] < p["r_max"]:
            raise ValidationError("need 0 < r_min < r_max")
        if int(p["points_per_decade"]) < 4:
            raise ValidationError("points_per_decade must be >= 4")
    if cmd in ("certify", "curves"):
        n = int(p["n_max"])
        if n < 1:
            raise ValidationError("n_max must be >= 1")
        c = p["c"]
        sched = [float(c)] * (n + 1) if not isinstance(c, list) else [float(x) for x in c]
        if len(sched) < n + 1 or any(not x > 1 for x in sched):
            raise ValidationError("c schedule needs n_max + 1 entries, all > 1")
        p["c"] = sched
    if cmd == "curves":
        _disc(p["disc"])
    if cmd == "grid":
        _grid_spec(p)
        if p["disc"] is not None:
            _disc(p["disc"])
        if int(p["L_max"]) < 1:
            raise ValidationError("L_max must be >= 1")


def _grid_spec(p):
    return GridSpec.from_dict({k: p[k] for k in ("center", "width", "height", "nx", "ny", "max_iter",
                                                 "bailout", "confirm_steps", "pixel_budget")})


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _profile(cfg, pool):
    p = cfg.params
    return build_profile(cfg.function, p["r_min"], p["r_max"], int(p["points_per_decade"]),
                         int(p["k_max"]), int(p["k_min"]), pool)


def _write_profile(out, prof):
    write_csv(out / "profile.csv", ["r", "logM", "logm", "method"], prof.to_csv_rows())
    return ["profile.csv"]


def cmd_profile(cfg, out, pool):
    return _write_profile(out, _profile(cfg, pool))


def cmd_order(cfg, out, pool):
    est = estimate_order(_profile(cfg, pool), cfg.params["tail_fraction"])
    write_json(out / "order.json", {"rho": est.rho, "ci": est.ci,
                                    "r_min": cfg.params["r_min"], "r_max": cfg.params["r_max"]})
    return ["order.json"]


def cmd_report(cfg, out, pool):
    p = cfg.params
    prof = _profile(cfg, pool)
    rep = growth_report(prof, p["epsilon"], p["R"], p["tail_fraction"])
    write_json(out / "growth_report.json", rep.to_dict())
    return _write_profile(out, prof) + ["growth_report.json"]


def _certificate(cfg, pool):
    p = cfg.params
    try:
        return build_baker_sequences(cfg.function, p["logR1"], p["c"], int(p["n_max"]), pool), None
    except NoCandidate as e:
        return e.certificate, e.n


def cmd_certify(cfg, out, pool):
    cert, failed = _certificate(cfg, pool)
    d = cert.to_dict()
    d["failed_step"] = failed
    write_json(out / "certificate.json", d)
    return ["certificate.json"]


def cmd_curves(cfg, out, pool):
    cert, failed = _certificate(cfg, pool)
    d = cert.to_dict()
    d["failed_step"] = failed
    write_json(out / "certificate.json", d)
    if not cert.verified:
        raise PreconditionError("certificate not verified; no curve family to check")
    fam = verify_theorem4_curves(cfg.function, _disc(cfg.params["disc"]), cert, strict=False,
                                 attestation=cfg.params["attestation"])
    write_json(out / "curves.json", fam.to_dict())
    return ["certificate.json", "curves.json"]


def cmd_grid(cfg, out, pool):
    p = cfg.params
    f = cfg.function
    g = _grid_spec(p)
    grid = classify_grid(f, g, pool)
    if p["logR"] is not None:
        classify_fast(f, grid, float(p["logR"]), int(p["L_max"]))
        if p["disc"] is not None:
            classify_bd(f, grid, _disc(p["disc"]), bool(p["include_n0"]))
    rep = connectivity(grid)
    write_ppm(out / "classes.ppm", class_image(grid))
    write_pgm(out / "fast_mask.pgm", grid.fast_mask)
    write_pgm(out / "bd_mask.pgm", grid.bd_mask)
    write_pgm(out / "julia.pgm", julia_boundary(grid))
    write_json(out / "connectivity.json", rep.to_dict())
    bd_v, fast_v = grid.inclusion_violations()
    summary = {"counts": grid.counts(), "meta": grid.meta,
               "inclusion_violations": {"bd_not_fast": bd_v, "fast_not_escaping": fast_v},
               "label": "finite-iteration approximation of I(f)"}
    write_json(out / "grid.json", summary)
    np.save(out / "steps.npy", grid.steps)
    return ["classes.ppm", "fast_mask.pgm", "bd_mask.pgm", "julia.pgm",
            "connectivity.json", "grid.json", "steps.npy"]


HANDLERS = {"profile": cmd_profile, "order": cmd_order, "report": cmd_report,
            "certify": cmd_certify, "curves": cmd_curves, "grid": cmd_grid}


def run(cfg, out_dir=None, threads=1):
    """Execute a parsed config; returns the exit status."""
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    status, error, files = 0, None, []
    try:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            files = HANDLERS[cfg.command](cfg, out, pool)
    except ValidationError as e:
        status, error = 2, f"{type(e).__name__}: {e}"
    except (EscapeLabError, FloatingPointError, OverflowError) as e:
        status, error = 3, f"{type(e).__name__}: {e}"
    if error:
        log.error(error)
    manifest = {"config": cfg.echo(), "exit_status": status, "error": error, "outputs": files,
                "threads": threads, "wall_time_s": time.perf_counter() - t0,
                "versions": {"escape_lab": __version__, "numpy": np.__version__,
                             "mpmath": mpmath.__version__, "python": platform.python_version()}}
    write_json(out / "manifest.json", manifest)
    return status


def _threads(arg):
    if arg is not None:
        return arg
    env = os.environ.get("ESCAPE_LAB_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValidationError("ESCAPE_LAB_THREADS must be an integer") from None
    return os.cpu_count() or 1


def main(argv=None):
    ap = argparse.ArgumentParser(prog="escape-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True, help="JSON run config")
    ap.add_argument("--out", help="output directory (overrides the config)")
    ap.add_argument("--threads", type=int, help="worker threads (env ESCAPE_LAB_THREADS)")
    ap.add_argument("--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        threads = _threads(args.threads)
        if threads < 1:
            raise ValidationError("--threads must be >= 1")
        raw = json.loads(Path(args.config).read_text())
        # a manifest can be fed back in: use its echoed config
        if isinstance(raw, dict) and "config" in raw and "versions" in raw:
            raw = raw["config"]
        cfg = parse_config(raw)
    except (ValidationError, json.JSONDecodeError, OSError, KeyError, TypeError, ValueError) as e:
        print(f"escape-lab: invalid configuration: {e}", file=sys.stderr)
        return 2
    log.info("running %s on %s with %d thread(s)", cfg.command, cfg.function.kind.value, threads)
    return run(cfg, args.out, threads)


if __name__ == "__main__":
    sys.exit(main())
