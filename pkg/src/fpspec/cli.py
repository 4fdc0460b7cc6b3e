"""``fpspec`` command line.

Exit codes: 0 success, 1 domain failure (JSON message on stderr), 2 usage.
Settings may come from ``--config FILE`` (``key = value`` lines, keys named
like the long flags); explicit flags override the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .decay_analysis import DEFAULT_WINDOW, fit_decay, make_initial
from .errors import FPSpecError, PreconditionFailed
from .evolution import (CNConfig, Trajectory, distance_to_steady, evolve_cn, exact_semigroup,
                        read_trajectory_csv, write_trajectory_csv)
from .grid import (CSV_FORMAT_VERSION, DEFAULT_N, DEFAULT_XMAX, make_grid, mass,
                   read_gridfunction_csv, write_gridfunction_csv)
from .perturbation import dirac_pair, read_kernel_file, validate_condition_c, zero_kernel
from .spectral import ResolventQuery, build_spectral_set, perturbed_projection, resolvent
from .weighted_space import Weight, omega_norm

DEFAULTS = {
    "beta": 1.0,
    "dirac_pair": None,
    "kernel": None,
    "grid": (DEFAULT_XMAX, DEFAULT_N),
    "dt": 1e-3,
    "t_end": 10.0,
    "out": None,
}


class UsageError(Exception):
    pass


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return a, b


def _grid_spec(text: str) -> tuple[float, int]:
    try:
        xmax, n = text.split(":")
        return float(xmax), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected XMAX:N, got {text!r}")


def _window(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}")
    return lo, hi


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


_CONVERTERS = {"beta": _positive, "dirac_pair": _pair, "kernel": str, "grid": _grid_spec,
               "dt": _positive, "t_end": float, "out": str}


def _shared(p: argparse.ArgumentParser) -> None:
    # defaults stay None so that config-file values can fill the gaps
    p.add_argument("--config", help="key = value settings file; flags take precedence")
    p.add_argument("--beta", type=_positive)
    k = p.add_mutually_exclusive_group()
    k.add_argument("--dirac-pair", type=_pair, metavar="EPS,ALPHA")
    k.add_argument("--kernel", metavar="PATH")
    p.add_argument("--grid", type=_grid_spec, metavar="XMAX:N")
    p.add_argument("--dt", type=_positive)
    p.add_argument("--t-end", type=float)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fpspec", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a kernel against the strip conditions")
    _shared(p)

    p = sub.add_parser("eigen", help="write eigenfunctions f_0..f_kmax as CSV")
    _shared(p)
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--normalization", choices=("derivative", "unit"), default="derivative")

    p = sub.add_parser("evolve", help="evolve an initial condition")
    _shared(p)
    p.add_argument("--init", required=True, help="phi1, phi2 or csv:PATH")
    p.add_argument("--scheme", choices=("cn", "exact"), default="cn")
    p.add_argument("--observe-every", type=int, default=10)
    p.add_argument("--dist-steady", action="store_true", help="add the distance to mass*f0 column")

    p = sub.add_parser("fit", help="fit an exponential to a trajectory CSV")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--window", type=_window, default=DEFAULT_WINDOW, metavar="LO:HI")
    p.add_argument("--json", action="store_true", help="JSON output (the only format)")
    p.add_argument("--out")

    p = sub.add_parser("resolvent", help="solve (zeta - L - Theta) f = g")
    _shared(p)
    p.add_argument("--zeta", type=_pair, required=True, metavar="RE,IM")
    p.add_argument("--kfloor", type=int, required=True)
    p.add_argument("--rhs", required=True)

    p = sub.add_parser("project", help="apply the spectral projection P_k")
    _shared(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--in", dest="inp", required=True)

    p = sub.add_parser("figure1", help="run both decay experiments and fit them")
    _shared(p)
    p.add_argument("--window", type=_window, default=DEFAULT_WINDOW, metavar="LO:HI")
    return ap


def _read_config(path: str) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONVERTERS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _CONVERTERS[key](value)
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(f"{path}:{lineno}: {exc}")
    return out


def _resolve(args: argparse.Namespace, kernel_default=None) -> argparse.Namespace:
    cfg = _read_config(args.config) if getattr(args, "config", None) else {}
    for key, default in DEFAULTS.items():
        if not hasattr(args, key):
            continue
        if getattr(args, key) is None:
            setattr(args, key, cfg.get(key, default))
    if getattr(args, "dirac_pair", None) is not None and getattr(args, "kernel", None) is not None:
        raise UsageError("give either --dirac-pair or --kernel, not both")
    if hasattr(args, "dirac_pair") and args.dirac_pair is None and args.kernel is None:
        args.dirac_pair = kernel_default
    return args


def _kernel(args, check: bool = True):
    if args.kernel:
        return read_kernel_file(args.kernel, check=check)
    if args.dirac_pair is not None:
        eps, alpha = args.dirac_pair
        return dirac_pair(eps, alpha)
    return zero_kernel()


def _grid(args):
    xmax, n = args.grid
    return make_grid(-xmax, xmax, n)


def _emit(payload: dict, out: str | None) -> None:
    payload = {"format_version": CSV_FORMAT_VERSION, **payload}
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


def cmd_validate(args) -> int:
    k = _kernel(args, check=False)
    rep = validate_condition_c(k, Weight(args.beta))
    _emit(rep.to_dict(), args.out)
    return 0 if rep.passed else 1


def cmd_eigen(args) -> int:
    s = build_spectral_set(_kernel(args), Weight(args.beta), _grid(args), args.kmax, args.normalization)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for j, f in enumerate(s.eigenfunctions):
        path = out / f"f{j}.csv"
        write_gridfunction_csv(path, f)
        files.append(str(path))
    _emit({"files": files, "normalization": s.normalization,
           "omega_norms": [omega_norm(f, s.weight) for f in s.eigenfunctions]}, None)
    return 0


def _initial(spec: str, s):
    if spec.startswith("csv:"):
        f = read_gridfunction_csv(spec[4:])
        if f.grid != s.grid:
            raise PreconditionFailed("initial CSV grid differs from --grid")
        return f
    return make_initial(spec, s)


def _exact_trajectory(phi, cfg: CNConfig, w: Weight, keep: bool) -> Trajectory:
    steps = list(range(0, cfg.steps + 1, cfg.observe_every))
    if steps[-1] != cfg.steps:
        steps.append(cfg.steps)
    times, masses, norms, snaps = [], [], [], []
    for st in steps:
        t = st * cfg.dt
        f = exact_semigroup(phi, t)
        times.append(t)
        masses.append(mass(f))
        norms.append(omega_norm(f, w))
        snaps.append((t, f))
    return Trajectory(np.array(times), np.array(masses), np.array(norms), snaps if keep else None)


def cmd_evolve(args) -> int:
    k = _kernel(args)
    w = Weight(args.beta)
    s = build_spectral_set(k, w, _grid(args), 2)
    phi = _initial(args.init, s)
    cfg = CNConfig(args.dt, args.t_end, args.observe_every, keep_snapshots=args.dist_steady)
    if args.scheme == "exact":
        if not k.is_zero:
            raise PreconditionFailed("the exact scheme needs the zero kernel")
        traj = _exact_trajectory(phi, cfg, w, args.dist_steady)
    else:
        traj = evolve_cn(k, phi, cfg, w)
    dist = distance_to_steady(traj, s) if args.dist_steady else None
    out = args.out or "traj.csv"
    write_trajectory_csv(out, traj, dist)
    _emit({"trajectory": out, "points": int(len(traj.times)),
           "final_omega_norm": float(traj.omega_norms[-1])}, None)
    return 0


def cmd_fit(args) -> int:
    fit = fit_decay(read_trajectory_csv(args.inp), args.window)
    _emit(fit.to_dict(), args.out)
    return 0


def _csv_and_set(path, args, k_max: int):
    f = read_gridfunction_csv(path)
    return f, build_spectral_set(_kernel(args), Weight(args.beta), f.grid, k_max)


def cmd_resolvent(args) -> int:
    g, s = _csv_and_set(args.rhs, args, 0)
    zeta = complex(*args.zeta)
    f = resolvent(s, ResolventQuery(zeta, args.kfloor, g))
    out = args.out or "resolvent.csv"
    write_gridfunction_csv(out, f)
    _emit({"output": out, "zeta": [zeta.real, zeta.imag], "k_floor": args.kfloor}, None)
    return 0


def cmd_project(args) -> int:
    f, s = _csv_and_set(args.inp, args, args.k)
    p = perturbed_projection(s, f, args.k)
    out = args.out or f"P{args.k}.csv"
    write_gridfunction_csv(out, p)
    _emit({"output": out, "k": args.k}, None)
    return 0


def cmd_figure1(args) -> int:
    w = Weight(args.beta)
    s = build_spectral_set(_kernel(args), w, _grid(args), 2)
    cfg = CNConfig(args.dt, args.t_end, 10)
    names = ("phi1", "phi2")
    phis = [make_initial(n, s) for n in names]
    with ThreadPoolExecutor(max_workers=2) as pool:
        trajs = list(pool.map(lambda phi: evolve_cn(s.kernel, phi, cfg, w), phis))
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(out / "fig1a.csv", trajs[0])
    write_trajectory_csv(out / "fig1b.csv", trajs[1])
    fits = {n: fit_decay(t, args.window).to_dict() for n, t in zip(names, trajs)}
    t2 = trajs[1]
    early = t2.omega_norms[t2.times <= 1.0 + 1e-12]
    fits["phi2"]["initial_increase"] = bool(early.max() > t2.omega_norms[0])
    _emit({"fits": fits, "kernel": s.kernel.description, "dt": args.dt, "t_end": args.t_end},
          str(out / "fits.json"))
    return 0


COMMANDS = {"validate": cmd_validate, "eigen": cmd_eigen, "evolve": cmd_evolve, "fit": cmd_fit,
            "resolvent": cmd_resolvent, "project": cmd_project, "figure1": cmd_figure1}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _resolve(args, kernel_default=(2.0, 2.0) if args.command == "figure1" else None)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fpspec: error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except (FPSpecError, ValueError, OSError) as exc:
        err = {"format_version": CSV_FORMAT_VERSION, "error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
