"""Command-line driver.

    frontspeed validate   --config run.ini
    frontspeed dispersion --config run.ini --out results/
    frontspeed speed      --config run.ini
    frontspeed simulate   --config run.ini
    frontspeed compare    --config run.ini

Exit codes: 0 all checks passed, 1 a scientific check failed, 2 usage or
config error.  The config is an INI file; see README.md for the keys.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import io
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from . import __version__, dispersion, fields, reactions, simulator
from .errors import FrontSpeedError

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

KEYS = {
    "field": {"kind", "amplitude", "m", "eps_t", "m_t", "csv"},
    "reaction": {"kind", "r", "m", "e", "theta", "base"},
    "direction": {"k"},
    "cell": {"n_x", "n_t"},
    "eigen": {"tol", "max_iter", "start"},
    "channel": {"length", "n_per_unit", "buffer", "moving_window", "dt"},
    "validate": {"div_tol", "mean_tol"},
    "dispersion": {"lambdas", "range", "convexity_tol"},
    "speed": {"tol_c", "eps", "lambda_c_factors"},
    "simulate": {"mode", "x0", "lambda0", "a1", "a2", "m", "t_end", "sample_every",
                 "window"},
    "compare": {"tol", "simulate_k"},
}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    parser: configparser.ConfigParser
    path: str
    out: str
    seed: int
    threads: int

    def has(self, section):
        return self.parser.has_section(section)

    def get(self, section, key, default=None, cast=str):
        if not self.parser.has_option(section, key):
            if default is None:
                raise ConfigError(f"{self.path}: missing key [{section}] {key}")
            return default
        raw = self.parser.get(section, key)
        try:
            return cast(raw)
        except ValueError as exc:
            raise ConfigError(f"{self.path}: bad value for [{section}] {key} = {raw!r}: "
                              f"{exc}") from None

    def floats(self, section, key, default=None):
        return self.get(section, key, default, cast=_floats)


def _floats(raw):
    return [float(tok) for tok in raw.replace(",", " ").split()]


def _bool(raw):
    val = raw.strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def load_config(path, out=None, seed=0, threads=1):
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from None
    for section in parser.sections():
        if section not in KEYS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key in parser.options(section):
            if key not in KEYS[section]:
                raise ConfigError(f"{path}: unknown key '{key}' in [{section}]")
    for section in ("field", "reaction", "direction"):
        if not parser.has_section(section):
            raise ConfigError(f"{path}: missing section [{section}]")
    return RunConfig(parser, path, out or ".", seed, threads)


def direction(cfg):
    return tuple(cfg.floats("direction", "k"))


def build_field(cfg, dim):
    kind = cfg.get("field", "kind")
    if kind == "zero":
        return fields.zero(dim)
    if kind == "tabulated":
        return fields.load_tabulated_csv(cfg.get("field", "csv"))
    if dim != 2:
        raise ConfigError(f"field kind {kind!r} needs a 2-D direction vector")
    amp = cfg.get("field", "amplitude", 1.0, float)
    eps_t = cfg.get("field", "eps_t", 0.0, float)
    m_t = cfg.get("field", "m_t", 1, int)
    m = [int(v) for v in cfg.floats("field", "m", [1.0, 1.0])]
    if kind == "shear":
        return fields.shear(amp, m[-1], eps_t, m_t)
    if kind == "cellular":
        return fields.cellular(amp, tuple(m), eps_t, m_t)
    raise ConfigError(f"{cfg.path}: unknown field kind {kind!r}")


def _reaction(kind, cfg):
    if kind == "kpp":
        return reactions.kpp(cfg.get("reaction", "r", 1.0, float))
    if kind == "degenerate":
        return reactions.degenerate(cfg.get("reaction", "m", 2.0, float))
    if kind == "arrhenius":
        return reactions.arrhenius(cfg.get("reaction", "e", 1.0, float))
    raise ConfigError(f"{cfg.path}: unknown reaction kind {kind!r}")


def build_reaction(cfg):
    kind = cfg.get("reaction", "kind")
    try:
        if kind == "ignition":
            base = _reaction(cfg.get("reaction", "base", "kpp"), cfg)
            return reactions.ignition_cutoff(base, cfg.get("reaction", "theta", cast=float))
        return _reaction(kind, cfg)
    except ValueError as exc:
        raise ConfigError(f"{cfg.path}: [reaction]: {exc}") from None


def cell_grid(cfg, dim):
    return fields.CellGrid(dim, cfg.get("cell", "n_x", 64, int),
                           cfg.get("cell", "n_t", 512, int))


def channel_grid(cfg, dim):
    dt = cfg.get("channel", "dt", 0.0, float) or None
    return simulator.ChannelGrid(cfg.get("channel", "length", 80, int),
                                 cfg.get("channel", "n_per_unit", 16, int), dim, dt,
                                 cfg.get("channel", "buffer", 10.0, float),
                                 cfg.get("channel", "moving_window", True, _bool))


def provenance(cfg, grid=None, extra=""):
    parts = [f"frontspeed {__version__}", f"config={os.path.basename(cfg.path)}",
             f"seed={cfg.seed}"]
    if grid is not None:
        parts.append("grid=" + "x".join(str(n) for n in grid.shape + (grid.n_t,)))
        parts.append(f"tol={cfg.get('eigen', 'tol', 1e-9, float):g}")
    if extra:
        parts.append(extra)
    return " ".join(parts)


def write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _start_seed(cfg):
    start = cfg.get("eigen", "start", "ones")
    if start not in ("ones", "random"):
        raise ConfigError(f"{cfg.path}: [eigen] start must be 'ones' or 'random'")
    return cfg.seed if start == "random" else None


def _dispersion_obj(cfg, field, r, k, dim):
    return dispersion.Dispersion(field, r, k, cell_grid(cfg, dim),
                                 cfg.get("eigen", "tol", 1e-9, float),
                                 cfg.get("eigen", "max_iter", 500, int), seed=_start_seed(cfg))


def _lambdas(cfg):
    if cfg.parser.has_option("dispersion", "lambdas"):
        return np.array(cfg.floats("dispersion", "lambdas"))
    lo, hi, n = cfg.floats("dispersion", "range", [0.25, 3.0, 17.0])
    return np.linspace(lo, hi, int(n))


def _check_unit(k):
    if abs(math.hypot(*k) - 1.0) > 1e-12:
        print(f"direction not unit: |k| = {math.hypot(*k):.6g}")
        return False
    return True


# --- subcommands -------------------------------------------------------------

def cmd_validate(cfg):
    k = direction(cfg)
    ok = _check_unit(k)
    dim = len(k)
    field = build_field(cfg, dim)
    reaction = build_reaction(cfg)
    grid = cell_grid(cfg, dim)
    div_tol = cfg.get("validate", "div_tol", 1e-10, float)
    mean_tol = cfg.get("validate", "mean_tol", 1e-10, float)
    div = fields.divergence_residual(field, grid)
    mean = fields.mean_residual(field, grid)
    print(f"divergence_residual={div:.6e} (tol {div_tol:g})")
    print("mean_residual=" + ",".join(f"{v:.6e}" for v in mean) + f" (tol {mean_tol:g})")
    ok &= div <= div_tol and bool(np.all(mean <= mean_tol))
    flags = f"is_kpp={reaction.is_kpp} is_positive={reaction.is_positive} " \
            f"is_ignition={reaction.is_ignition} fprime0={reaction.fprime0:.6g}"
    print(f"reaction={reaction.kind} {flags}")
    if reaction.fprime0 > 0:
        chk = reactions.kpp_bound_check(reaction)
        print(f"kpp_bound ok={chk.ok} violation={chk.violation:.6e} at u={chk.u_worst:.6g}")
        ok &= chk.ok
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_dispersion(cfg):
    k = direction(cfg)
    if not _check_unit(k):
        return EXIT_FAIL
    dim = len(k)
    field, reaction = build_field(cfg, dim), build_reaction(cfg)
    grid = cell_grid(cfg, dim)
    tol = cfg.get("eigen", "tol", 1e-9, float)
    curve = dispersion.sample_curve(field, reaction.fprime0, k, _lambdas(cfg), grid, tol,
                                    cfg.get("eigen", "max_iter", 500, int), cfg.threads,
                                    seed=_start_seed(cfg))
    path = os.path.join(cfg.out, "dispersion.csv")
    write_atomic(path, curve.csv_text(provenance(cfg, grid)))
    print(f"wrote {path} ({len(curve)} rows)")
    status = EXIT_OK
    for lam, ok in zip(curve.lams, curve.converged):
        if not ok:
            print(f"unconverged at lambda={lam:.6g}")
            status = EXIT_FAIL
    if len(curve) >= 3:
        tol_cvx = cfg.get("dispersion", "convexity_tol", 1e-6, float)
        rep = dispersion.convexity_check(curve, tol_cvx)
        where = "n/a" if rep.lam_at is None else f"{rep.lam_at:.6g}"
        print(f"convexity worst_violation={rep.worst:.6e} at lambda={where} "
              f"checked={rep.checked} {'pass' if rep.passed else 'FAIL'}")
        if not rep.passed:
            status = EXIT_FAIL
    return status


def _speed(cfg, field, reaction, k):
    if not reaction.fprime0 > 0:
        raise ConfigError("the variational speed needs a KPP reaction with f'(0) > 0")
    dim = len(k)
    disp = _dispersion_obj(cfg, field, reaction.fprime0, k, dim)
    tol_c = cfg.get("speed", "tol_c", 1e-6, float)
    return disp, dispersion.minimal_speed(None, None, None, None, tol_c, dispersion=disp)


def cmd_speed(cfg):
    k = direction(cfg)
    if not _check_unit(k):
        return EXIT_FAIL
    dim = len(k)
    field, reaction = build_field(cfg, dim), build_reaction(cfg)
    disp, res = _speed(cfg, field, reaction, k)
    lines = [f"c_star={res.c_star:.6f} lambda_star={res.lambda_star:.6f}",
             f"bracket={res.bracket[0]:.8g},{res.bracket[1]:.8g} iterations={res.iterations}"]
    tol_c = cfg.get("speed", "tol_c", 1e-6, float)
    for eps in cfg.floats("speed", "eps", []):
        reg = dispersion.regularized_minimal_speed(None, None, None, None, eps, tol_c,
                                                   dispersion=disp)
        lines.append(f"c_star_eps={reg.c_star:.6f} eps={eps:g} "
                     f"lambda_star_eps={reg.lambda_star:.6f}")
    for factor in cfg.floats("speed", "lambda_c_factors", []):
        c = factor * res.c_star
        lam_c = dispersion.lambda_for_speed(disp, res, c)
        lines.append(f"lambda_c={lam_c:.6f} c={c:.6f}")
    disp_csv = os.path.join(cfg.out, "dispersion.csv")
    if os.path.exists(disp_csv):
        with open(disp_csv, "rb") as fh:
            lines.append(f"dispersion_sha256={hashlib.sha256(fh.read()).hexdigest()}")
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    grid = disp.grid
    probe_rows = ["lambda,mu_over_lambda"] + [f"{lam:#.10g},{g:#.10g}" for lam, g in res.probes]
    write_atomic(os.path.join(cfg.out, "speed.csv"),
                 f"# {provenance(cfg, grid)}\n" + "\n".join(probe_rows) + "\n")
    write_atomic(os.path.join(cfg.out, "speed_report.txt"), report)
    return EXIT_OK


def _simulate(cfg, field, reaction, k, mode=None):
    dim = len(k)
    channel = channel_grid(cfg, dim)
    mode = mode or cfg.get("simulate", "mode", "step")
    t_end = cfg.get("simulate", "t_end", cast=float)
    every = cfg.get("simulate", "sample_every", 0.25, float)
    window = cfg.floats("simulate", "window", []) or None
    if mode == "step":
        init = simulator.Step(cfg.get("simulate", "x0", 20.0, float))
    elif mode == "bump":
        init = simulator.Bump(cfg.get("simulate", "a1", cast=float),
                              cfg.get("simulate", "a2", cast=float),
                              cfg.get("simulate", "m", 0.5, float))
    else:
        raise ConfigError(f"{cfg.path}: unknown simulate mode {mode!r}")
    trace, _ = simulator.run_front(field, reaction, channel, k, init, t_end, every)
    return trace, window


def cmd_simulate(cfg):
    k = direction(cfg)
    if not _check_unit(k):
        return EXIT_FAIL
    dim = len(k)
    field, reaction = build_field(cfg, dim), build_reaction(cfg)
    mode = cfg.get("simulate", "mode", "step")
    comment = provenance(cfg, extra=f"mode={mode}")
    if mode == "decay":
        channel = channel_grid(cfg, dim)
        lam0s = cfg.floats("simulate", "lambda0")
        rows = simulator.decay_speed_sweep(
            field, reaction, k, lam0s, channel, cfg.get("simulate", "t_end", cast=float),
            cfg.get("simulate", "x0", 20.0, float),
            cfg.get("simulate", "sample_every", 0.25, float), cfg.threads)
        disp, res = _speed(cfg, field, reaction, k)
        lines = [f"# {comment}", "lambda0,c_obs,c_pred,stderr"]
        for lam0, fit in rows:
            pred = disp.mu(lam0) / lam0 if lam0 < res.lambda_star else res.c_star
            lines.append(f"{lam0:#.10g},{fit.c:#.10g},{pred:#.10g},{fit.stderr:#.10g}")
            print(f"lambda0={lam0:g} c_obs={fit.c:.6f} c_pred={pred:.6f}")
        write_atomic(os.path.join(cfg.out, "sweep.csv"), "\n".join(lines) + "\n")
        return EXIT_OK
    trace, window = _simulate(cfg, field, reaction, k, mode)
    buf = io.StringIO()
    trace.to_csv(buf, comment)
    write_atomic(os.path.join(cfg.out, "trace.csv"), buf.getvalue())
    if mode == "bump":
        c_left, c_right = simulator.spreading_interval(trace, window)
        print(f"(c_left, c_right)=({c_left:.6f}, {c_right:.6f})")
    else:
        fit = simulator.estimate_speed(trace, window)
        print(f"c_obs={fit.c:.6f}±{fit.stderr:.6f} drift={fit.drift:.6f} "
              f"window={fit.window[0]:g},{fit.window[1]:g}")
    return EXIT_OK


def cmd_compare(cfg):
    for section in ("speed", "simulate"):
        if not cfg.has(section):
            raise ConfigError(f"{cfg.path}: compare needs a [{section}] section")
    k = direction(cfg)
    if not _check_unit(k):
        return EXIT_FAIL
    dim = len(k)
    field, reaction = build_field(cfg, dim), build_reaction(cfg)
    _, res = _speed(cfg, field, reaction, k)
    k_sim = tuple(cfg.floats("compare", "simulate_k", list(k))) if cfg.has("compare") else k
    if len(k_sim) != dim or not _check_unit(k_sim):
        return EXIT_FAIL
    trace, window = _simulate(cfg, field, reaction, k_sim, "step")
    fit = simulator.estimate_speed(trace, window)
    tol = cfg.get("compare", "tol", 0.05, float) if cfg.has("compare") else 0.05
    gap = abs(fit.c - res.c_star) / res.c_star
    verdict = gap <= tol
    print(f"c_star={res.c_star:.6f} c_obs={fit.c:.6f} gap={gap:.6f} tol={tol:g} "
          f"{'PASS' if verdict else 'FAIL'}")
    return EXIT_OK if verdict else EXIT_FAIL


COMMANDS = {
    "validate": cmd_validate,
    "dispersion": cmd_dispersion,
    "speed": cmd_speed,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="frontspeed", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="INI run configuration")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $FRONTSPEED_THREADS or 1)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    threads = args.threads
    if threads is None:
        try:
            threads = int(os.environ.get("FRONTSPEED_THREADS", "1"))
        except ValueError:
            print("FRONTSPEED_THREADS must be an integer", file=sys.stderr)
            return EXIT_USAGE
    try:
        cfg = load_config(args.config, args.out, args.seed, max(1, threads))
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FrontSpeedError, ValueError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
