"""Command-line front end.

Every subcommand writes its artifacts plus ``manifest.json`` into an output
directory.  Manifests hold the resolved parameters, the artifact version, a
re-run command line and output checksums.  They never hold timestamps or
absolute paths, so repeated runs are byte-identical.

Exit codes: 0 success, 1 numerical-check failure, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import fixtures
from . import gauge as gauge_mod
from . import potentials as pot
from . import propagator as prop
from . import semantics as sem
from . import units
from .errors import SemwaveError
from .state import SpatialGrid, WaveFunction, load_state, make_gaussian, save_state

DEFAULT_OUT = "semwave-out"
EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2

POTENTIAL_CHOICES = ("free", "harmonic", "double_well", "cubic", "mexican_hat")

SOLITON_PRESET = {
    "gamma": -1.0, "initial": "sech", "n": 1024, "x_min": -20.0, "x_max": 20.0,
    "dt": 1e-3, "steps": 1000, "method": prop.SPLIT_STEP, "boundary": "periodic",
}
EVOLVE_DEFAULTS = {
    "n": 512, "x_min": -10.0, "x_max": 10.0, "dt": 1e-3, "steps": 1000,
    "method": None, "initial": "gaussian", "boundary": "periodic", "gamma": None,
}
NORM_DRIFT_LIMIT = 1e-8
SOLITON_ERROR_LIMIT = 1e-3


class UsageError(SemwaveError):
    pass


# -- output helpers ----------------------------------------------------------


def _fmt(v) -> str:
    return repr(float(v))


def _write_csv(path: Path, header: list, rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) if not isinstance(v, (int, np.integer)) else str(int(v)) for v in row)
              for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _strip_out(argv: list) -> list:
    """Drop ``--out`` so the recorded command line is location-independent."""
    kept, skip = [], False
    for tok in argv:
        if skip:
            skip = False
        elif tok == "--out":
            skip = True
        elif not tok.startswith("--out="):
            kept.append(tok)
    return kept


def _write_manifest(out: Path, command: str, params: dict, rerun: list, exit_code: int,
                    extra: dict | None = None) -> None:
    files = sorted(p for p in out.rglob("*") if p.is_file() and p.name != "manifest.json")
    manifest = {
        "artifact": "semwave",
        "version": __version__,
        "command": command,
        "parameters": params,
        "rerun": rerun,
        "exit_code": exit_code,
        "outputs": {str(p.relative_to(out)): _sha256(p) for p in files},
    }
    if extra:
        manifest.update(extra)
    _write_json(out / "manifest.json", manifest)


def _state_name(prefix: str, index: int, fmt: str) -> str:
    return f"{prefix}_{index:05d}.{fmt}"


# -- shared builders ---------------------------------------------------------


def _build_potential(name: str, a: argparse.Namespace):
    if name == "free":
        return pot.Free()
    if name == "harmonic":
        return pot.Harmonic(a.mass, a.omega)
    if name == "double_well":
        return pot.DoubleWell(a.a, a.b)
    if name == "cubic":
        return pot.CubicNonlinear(a.gamma if a.gamma is not None else 0.0)
    return pot.MexicanHat(a.mu2, a.lam)


def _add_potential_flags(p: argparse.ArgumentParser, default: str) -> None:
    p.add_argument("--potential", choices=POTENTIAL_CHOICES, default=default)
    p.add_argument("--omega", type=float, default=1.0, help="harmonic angular frequency")
    p.add_argument("--a", type=float, default=1.0, help="double-well depth coefficient")
    p.add_argument("--b", type=float, default=2.0, help="double-well minima at +-b")
    p.add_argument("--mu2", type=float, default=1.0, help="Mexican-hat mu^2")
    p.add_argument("--lam", type=float, default=1.0, help="Mexican-hat lambda")


def _add_grid_flags(p: argparse.ArgumentParser, n, x_min, x_max, boundary) -> None:
    p.add_argument("--n", type=int, default=n, help="grid points")
    p.add_argument("--x-min", type=float, default=x_min)
    p.add_argument("--x-max", type=float, default=x_max)
    p.add_argument("--boundary", choices=("periodic", "reflecting"), default=boundary)


def _potential_params(a) -> dict:
    keys = {"harmonic": ("omega",), "double_well": ("a", "b"), "mexican_hat": ("mu2", "lam"), "cubic": ()}
    return {k: getattr(a, k) for k in keys.get(a.potential, ())}


def _count_nodes(psi: WaveFunction) -> int:
    re = psi.amplitudes.real
    big = re[np.abs(re) > 1e-3 * np.max(np.abs(re))]
    return int(np.sum(np.signbit(big[1:]) != np.signbit(big[:-1])))


# -- subcommands ----------------------------------------------------------------


def cmd_eigen(a, out: Path) -> tuple[dict, int, dict]:
    if a.k < 1:
        raise UsageError(f"--k must be >= 1, got {a.k}")
    grid = SpatialGrid(a.n, a.x_min, a.x_max, a.boundary)
    spec = _build_potential(a.potential, a)
    sol = prop.eigenstates(spec, grid, a.k, a.hbar, a.mass, fd_order=a.fd_order)
    rows = [(j, sol.energies[j], _count_nodes(s)) for j, s in enumerate(sol.states)]
    _write_csv(out / "energies.csv", ["index", "energy", "nodes"], rows)
    _write_csv(out / "potential.csv", ["x", "V"], zip(grid.x, pot.potential_profile(spec, grid)))
    for j, s in enumerate(sol.states):
        save_state(s, out / _state_name("state", j, a.format), a.format)
    params = {"potential": a.potential, **_potential_params(a), "n": a.n, "x_min": a.x_min,
              "x_max": a.x_max, "boundary": a.boundary, "k": a.k, "hbar": a.hbar, "mass": a.mass,
              "fd_order": a.fd_order, "format": a.format}
    print("\n".join(f"E[{j}] = {e:.10f}  nodes={nd}" for j, e, nd in rows))
    return params, EXIT_OK, {}


def _resolve_evolve(a) -> dict:
    base = dict(SOLITON_PRESET) if a.preset == "soliton" else dict(EVOLVE_DEFAULTS)
    for key in base:
        value = getattr(a, key)
        if value is not None:
            base[key] = value
    if base["method"] is None:
        base["method"] = prop.SPLIT_STEP if base["gamma"] is not None else prop.CRANK_NICOLSON
    return base


def cmd_evolve(a, out: Path) -> tuple[dict, int, dict]:
    r = _resolve_evolve(a)
    if a.state:
        psi0 = load_state(a.state)
        grid = psi0.grid
        r.update(n=grid.n_points, x_min=grid.x_min, x_max=grid.x_max, boundary=grid.boundary, initial="file")
    else:
        grid = SpatialGrid(r["n"], r["x_min"], r["x_max"], r["boundary"])
        if r["initial"] == "sech":
            # the exact focusing soliton for gamma = -1, hbar = m = 1 (norm 2)
            psi0 = WaveFunction(grid, 1.0 / np.cosh(grid.x - a.center))
        else:
            psi0 = make_gaussian(grid, a.center, a.width, a.momentum)
    cfg = prop.EvolutionConfig(a.hbar, a.mass, r["dt"], r["steps"], r["method"], a.record_every)
    if r["gamma"] is not None:
        traj = prop.evolve_nlse(psi0, r["gamma"], cfg)
        potential = "cubic"
    else:
        traj = prop.evolve_linear(psi0, _build_potential(a.potential, a), cfg)
        potential = a.potential

    rows = [(t, o.norm, o.energy, o.position_expectation, o.noether_charge)
            for t, o in zip(traj.times, traj.observables)]
    _write_csv(out / "trajectory.csv", ["t", "norm", "energy", "x_expect", "charge"], rows)
    if a.save_states:
        states_dir = out / "states"
        states_dir.mkdir(exist_ok=True)
        for j, s in enumerate(traj.states):
            save_state(s, states_dir / _state_name("state", j, a.format), a.format)

    norms = traj.column("norm")
    charges = traj.column("noether_charge")
    modulus_err = math.sqrt(float(np.sum((np.abs(traj.final.psi) - np.abs(psi0.psi)) ** 2) * grid.dx))
    checks = {
        "max_norm_drift": float(np.max(np.abs(norms - norms[0]))),
        "max_charge_drift": float(np.max(np.abs(charges - charges[0]))),
        "final_modulus_l2_error_vs_initial": modulus_err,
    }
    ok = checks["max_norm_drift"] < NORM_DRIFT_LIMIT and checks["max_charge_drift"] < NORM_DRIFT_LIMIT
    if a.preset == "soliton":
        ok = ok and modulus_err < SOLITON_ERROR_LIMIT
    checks["passed"] = bool(ok)
    _write_json(out / "summary.json", checks)
    params = {"preset": a.preset, "potential": potential, **({} if r["gamma"] is not None else _potential_params(a)),
              **r, "center": a.center, "width": a.width, "momentum": a.momentum, "state": a.state,
              "hbar": a.hbar, "mass": a.mass, "record_every": a.record_every,
              "save_states": a.save_states, "format": a.format, "run_id": a.run_id}
    print(json.dumps(checks))
    return params, EXIT_OK if ok else EXIT_CHECK_FAILED, {}


def _theta_profiles(kind: str, grid: SpatialGrid, a, seed: int) -> list:
    x = (grid.x - grid.x_min) / grid.length
    if kind == "zero":
        return [("theta = 0", np.zeros(grid.n_points))]
    if kind == "sin":
        return [(f"theta = {a.theta_amplitude} sin(2 pi x / L)",
                 a.theta_amplitude * np.sin(2 * np.pi * x))]
    rng = np.random.default_rng(seed)
    return [(f"random smooth #{j} (seed {seed})",
             gauge_mod.random_smooth_theta(grid, rng, amplitude=a.theta_amplitude))
            for j in range(a.n_thetas)]


def cmd_gauge_check(a, out: Path) -> tuple[dict, int, dict]:
    seed = 0 if a.seed is None else a.seed
    if a.state:
        psi = load_state(a.state)
    else:
        psi = make_gaussian(SpatialGrid(256, -10.0, 10.0), 0.0, 1.0, 0.8)
    grid = psi.grid
    x = (grid.x - grid.x_min) / grid.length
    A = gauge_mod.GaugeField(grid, a.field_amplitude * np.cos(2 * np.pi * x),
                             a.field_amplitude * np.sin(2 * np.pi * x), a.charge)
    nonlinearity = pot.CubicNonlinear(a.gamma) if a.gamma else None
    reports = []
    for desc, theta in _theta_profiles(a.theta, grid, a, seed):
        rep = gauge_mod.gauge_check(psi, A, gauge_mod.GaugeTransform(theta), desc,
                                    a.hbar, a.mass, nonlinearity)
        rep["passed"] = gauge_mod.report_passes(rep)
        reports.append(rep)
    ok = all(r["passed"] for r in reports)
    _write_json(out / "gauge_report.json",
                {"tolerances": gauge_mod.GAUGE_TOLERANCES, "passed": ok, "reports": reports})
    params = {"state": a.state, "theta": a.theta, "theta_amplitude": a.theta_amplitude,
              "n_thetas": a.n_thetas, "field_amplitude": a.field_amplitude, "charge": a.charge,
              "gamma": a.gamma, "hbar": a.hbar, "mass": a.mass, "seed": seed}
    print(f"{sum(r['passed'] for r in reports)}/{len(reports)} gauge transforms within tolerance")
    return params, EXIT_OK if ok else EXIT_CHECK_FAILED, {}


def cmd_units(a, out: Path) -> tuple[dict, int, dict]:
    print(units.catalog_table())
    verdicts = []
    for identity in a.identities:
        check = units.check_identity_string(identity)
        print(f"{identity}: {check.describe()}")
        verdicts.append({
            "identity": identity,
            "holds": check.holds,
            "lhs": [str(e) for e in check.lhs.exponents],
            "rhs": [str(e) for e in check.rhs.exponents],
            "delta": [str(e) for e in check.difference.exponents],
        })
    catalog = {k: [str(e) for e in v.exponents] for k, v in units.CATALOG.items()}
    _write_json(out / "units.json", {"catalog": catalog, "verdicts": verdicts})
    ok = all(v["holds"] for v in verdicts)
    return {"identities": list(a.identities)}, EXIT_OK if ok else EXIT_CHECK_FAILED, {}


def cmd_rag_demo(a, out: Path) -> tuple[dict, int, dict]:
    seed = 42 if a.seed is None else a.seed
    space_path = a.space or fixtures.fixture_path("token_space.json")
    chunks_path = a.chunks or fixtures.fixture_path("chunks.jsonl")
    space = sem.TokenSpace.load(space_path)
    store = sem.ChunkStore.load(chunks_path, space)
    transcript = sem.run_rag_demo(space, store, a.context, a.question, a.k, a.turns, seed, a.noise)
    _write_json(out / "transcript.json", transcript)
    params = {"space": a.space, "chunks": a.chunks, "context": a.context, "question": a.question,
              "k": a.k, "turns": a.turns, "noise": a.noise, "seed": seed}
    extra = {"inputs": {"space_sha256": _sha256(Path(space_path)),
                        "chunks_sha256": _sha256(Path(chunks_path))}}
    print(f"max drift {transcript['max_drift']:.6f} vs random-walk control "
          f"{transcript['max_control_drift']:.6f}")
    return params, EXIT_OK, extra


COMMANDS = {
    "eigen": cmd_eigen,
    "evolve": cmd_evolve,
    "gauge-check": cmd_gauge_check,
    "units": cmd_units,
    "rag-demo": cmd_rag_demo,
}


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=os.environ.get("SEMWAVE_OUT", DEFAULT_OUT),
                        help="output directory (default: $SEMWAVE_OUT or ./semwave-out)")
    common.add_argument("--seed", type=int, default=None, help="RNG seed for stochastic inputs")
    common.add_argument("--format", choices=("json", "csv"), default="json",
                        help="state-file format")
    common.add_argument("--sweep", default=None,
                        help="JSON list of parameter overrides; each runs in out/sweep-NNN in parallel")
    common.add_argument("--workers", type=int, default=None, help="processes for --sweep")

    parser = argparse.ArgumentParser(prog="semwave", description="Semantic wavefunction simulator.")
    parser.add_argument("--version", action="version", version=f"semwave {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigen", parents=[common], help="lowest eigenstates of a fixed potential")
    _add_potential_flags(p, "harmonic")
    _add_grid_flags(p, 512, -10.0, 10.0, "periodic")
    p.add_argument("--k", type=int, default=5, help="number of eigenstates")
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--fd-order", type=int, choices=(2, 4), default=4)

    p = sub.add_parser("evolve", parents=[common], help="time evolution (linear or NLSE)")
    _add_potential_flags(p, "free")
    _add_grid_flags(p, None, None, None, None)
    p.add_argument("--preset", choices=("soliton",), default=None)
    p.add_argument("--gamma", type=float, default=None, help="cubic coupling; selects the NLSE")
    p.add_argument("--method", choices=prop.METHODS, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--record-every", type=int, default=10)
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--state", default=None, help="initial state file (JSON or CSV)")
    p.add_argument("--initial", choices=("gaussian", "sech"), default=None)
    p.add_argument("--center", type=float, default=0.0)
    p.add_argument("--width", type=float, default=1.0)
    p.add_argument("--momentum", type=float, default=0.0)
    p.add_argument("--save-states", action="store_true")
    p.add_argument("--run-id", default="run", help="run subdirectory under --out")

    p = sub.add_parser("gauge-check", parents=[common], help="local U(1) covariance suite")
    p.add_argument("--state", default=None, help="state file (default: built-in Gaussian packet)")
    p.add_argument("--theta", choices=("zero", "sin", "random"), default="random")
    p.add_argument("--theta-amplitude", type=float, default=1.0)
    p.add_argument("--n-thetas", type=int, default=20)
    p.add_argument("--field-amplitude", type=float, default=0.3)
    p.add_argument("--charge", type=float, default=0.7)
    p.add_argument("--gamma", type=float, default=-1.0, help="cubic term in the Lagrangian (0 disables)")
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--mass", type=float, default=1.0)

    p = sub.add_parser("units", parents=[common], help="dimension catalog and identity checks")
    p.add_argument("identities", nargs="*", help='identities such as "q^2 = E/x"')

    p = sub.add_parser("rag-demo", parents=[common], help="retrieval-augmented anchor demo")
    p.add_argument("--space", default=None, help="token-space JSON (default: shipped fixture)")
    p.add_argument("--chunks", default=None, help="chunk JSON lines (default: shipped fixture)")
    p.add_argument("--context", default=fixtures.DEFAULT_CONTEXT)
    p.add_argument("--question", default=fixtures.DEFAULT_QUESTION)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--turns", type=int, default=10)
    p.add_argument("--noise", type=float, default=0.15, help="response perturbation scale")
    return parser


# -- execution -------------------------------------------------------------------


def _error_message(exc: Exception) -> str:
    return json.dumps({"error": type(exc).__name__, "message": str(exc)})


def execute(args: argparse.Namespace, out: Path) -> int:
    """Run one job into ``out``; return the exit code."""
    out.mkdir(parents=True, exist_ok=True)
    if args.command == "evolve":
        out = out / args.run_id
        out.mkdir(parents=True, exist_ok=True)
    try:
        params, code, extra = COMMANDS[args.command](args, out)
    except SemwaveError as exc:
        print(_error_message(exc), file=sys.stderr)
        return exc.exit_code
    except (OSError, KeyError, ValueError) as exc:
        print(_error_message(exc), file=sys.stderr)
        return EXIT_USAGE
    _write_manifest(out, args.command, params, ["semwave"] + args.argv, code, extra)
    return code


def _run_sweep_item(item):
    args, out = item
    return execute(args, out)


def run_sweep(args: argparse.Namespace) -> int:
    try:
        overrides = json.loads(Path(args.sweep).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        print(_error_message(exc), file=sys.stderr)
        return EXIT_USAGE
    if not isinstance(overrides, list) or not all(isinstance(o, dict) for o in overrides):
        print(_error_message(UsageError("sweep file must be a JSON list of objects")), file=sys.stderr)
        return EXIT_USAGE
    root = Path(args.out)
    jobs = []
    for j, override in enumerate(overrides):
        ns = argparse.Namespace(**vars(args))
        ns.sweep = None
        ns.argv = [t for t in args.argv if t != "--sweep" and t != args.sweep]
        for key, value in override.items():
            dest = key.replace("-", "_")
            if not hasattr(ns, dest):
                print(_error_message(UsageError(f"sweep item {j}: unknown parameter {key!r}")),
                      file=sys.stderr)
                return EXIT_USAGE
            setattr(ns, dest, value)
            ns.argv = ns.argv + [f"--{dest.replace('_', '-')}", str(value)]
        jobs.append((ns, root / f"sweep-{j:03d}"))
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        codes = list(pool.map(_run_sweep_item, jobs))
    root.mkdir(parents=True, exist_ok=True)
    _write_json(root / "sweep.json", {"command": args.command, "overrides": overrides, "exit_codes": codes})
    return max(codes, default=EXIT_OK)


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(argv)
    args.argv = _strip_out(argv)
    if args.sweep:
        return run_sweep(args)
    return execute(args, Path(args.out))


if __name__ == "__main__":
    sys.exit(main())
