"""Command-line entry point: ``twocenter <command> [options]``.

Exit codes: 0 ok, 1 partial failure, 2 usage, 3 domain error, 4 convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import averaging as avg
from . import floquet
from .chaos import mle_batch
from .errors import (DegenerateParameter, DomainError, EmptyRegion, InvalidBranch,
                     NoConvergence, ResonantParameter, SingularShooting, TwoCenterError)
from .integrator import IntegratorConfig, integrate
from .io import digest, now_iso, svg_scatter, write_csv, write_json, write_manifest
from .model import ModelParams, equilibria, potential_grid
from .sections import (energy_from_units, poincare_section, resolve_threads, sample_ics)

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE, EXIT_DOMAIN, EXIT_CONVERGENCE = 0, 1, 2, 3, 4

_SQRT_RE = re.compile(r"^\s*(?:([0-9.eE+-]+)\s*\*\s*)?sqrt\(\s*([0-9.eE+-]+)\s*\)\s*(?:/\s*([0-9.eE+-]+))?\s*$")
_FRAC_RE = re.compile(r"^\s*([0-9.eE+-]+)\s*/\s*([0-9.eE+-]+)\s*$")


def parse_real(text: str) -> float:
    """Parse ``1.5``, ``3/2``, ``sqrt(5)``, ``sqrt(13)/3`` or ``2*sqrt(6)``."""
    m = _SQRT_RE.match(text)
    if m:
        c = float(m.group(1)) if m.group(1) else 1.0
        d = float(m.group(3)) if m.group(3) else 1.0
        return c * math.sqrt(float(m.group(2))) / d
    m = _FRAC_RE.match(text)
    if m:
        return float(m.group(1)) / float(m.group(2))
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse real value {text!r}")


def parse_ratio(text: str) -> tuple[int, int]:
    try:
        l, j = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"ratio must look like l:j, got {text!r}")
    return l, j


def parse_branches(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"branches must be comma-separated integers, got {text!r}")


def _add_common(sp, *, tol=True):
    sp.add_argument("--out-dir", type=Path, default=Path("."), help="output directory")
    sp.add_argument("--threads", type=int, default=1,
                    help="worker threads (TWOCENTER_THREADS overrides)")
    if tol:
        sp.add_argument("--rtol", type=float, default=1e-10)
        sp.add_argument("--atol", type=float, default=1e-12)
        sp.add_argument("--max-step", type=float, default=0.1)


def _add_energy(sp):
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--energy", type=parse_real, help="absolute energy")
    g.add_argument("--energy-in-Es", dest="energy_in_Es", type=parse_real,
                   help="energy as a multiple of E_s = (a-1)^2")


def _cfg(args) -> IntegratorConfig:
    return IntegratorConfig(rel_tol=args.rtol, abs_tol=args.atol, max_step=args.max_step)


def _echo(args) -> dict:
    skip = {"func", "out_dir", "command"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        out[k] = list(v) if isinstance(v, tuple) else v
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twocenter", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("section", help="oriented Poincare section on x=0")
    sp.add_argument("--a", type=parse_real, required=True)
    _add_energy(sp)
    sp.add_argument("--n-ic", type=int, default=120)
    sp.add_argument("--t-max", type=float, default=6000.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--svg", action="store_true", help="also write a scatter plot")
    _add_common(sp)
    sp.set_defaults(func=cmd_section)

    sp = sub.add_parser("orbits", help="periodic orbits from averaging")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--a", type=parse_real)
    g.add_argument("--ratio", type=parse_ratio, help="l:j with omega_x/omega_y = l/j")
    sp.add_argument("--h", type=parse_real, default=1.0)
    sp.add_argument("--epsilon", type=parse_real, default=1e-2)
    sp.add_argument("--branches", type=parse_branches, default=(0, 1))
    sp.add_argument("--refine", action="store_true")
    sp.add_argument("--multipliers", action="store_true", help="implies --refine")
    sp.add_argument("--simulate-periods", type=int, default=20)
    sp.add_argument("--samples-per-period", type=int, default=200)
    _add_common(sp)
    sp.set_defaults(func=cmd_orbits, rtol=1e-12, atol=1e-14)

    sp = sub.add_parser("lyapunov", help="maximal Lyapunov exponents for sampled ICs")
    sp.add_argument("--a", type=parse_real, required=True)
    _add_energy(sp)
    sp.add_argument("--n-ic", type=int, default=16)
    sp.add_argument("--t-max", type=float, default=6000.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--renorm", type=float, default=1.0)
    sp.add_argument("--burn-in", type=float, default=0.0)
    _add_common(sp)
    sp.set_defaults(func=cmd_lyapunov)

    sp = sub.add_parser("equilibria", help="equilibrium table with eigenvalues")
    sp.add_argument("--a", type=parse_real, required=True)
    _add_common(sp, tol=False)
    sp.set_defaults(func=cmd_equilibria)

    sp = sub.add_parser("potential-grid", help="U(x, y) on a square grid")
    sp.add_argument("--a", type=parse_real, required=True)
    sp.add_argument("--range", dest="range_", type=float, default=3.0)
    sp.add_argument("--step", type=float, default=0.05)
    _add_common(sp, tol=False)
    sp.set_defaults(func=cmd_potential_grid)

    sp = sub.add_parser("rerun", help="re-execute a manifest and compare digests")
    sp.add_argument("manifest", type=Path)
    sp.add_argument("--out-dir", type=Path, required=True)
    sp.set_defaults(func=cmd_rerun)
    return ap


def _finish(args, argv, started, files, extra=None) -> None:
    params = _echo(args)
    if "rtol" in params:
        params["tolerances"] = {"rtol": args.rtol, "atol": args.atol, "max_step": args.max_step}
    if extra:
        params.update(extra)
    write_manifest(args.out_dir, args.command, params, files, started, argv=argv)


def cmd_section(args, argv) -> int:
    started = now_iso()
    p = ModelParams(args.a)
    E = energy_from_units(p, args.energy, args.energy_in_Es)
    ics = sample_ics(p, E, args.n_ic, args.seed)
    run = poincare_section(p, E, ics, args.t_max, _cfg(args), seed=args.seed, threads=args.threads)
    out = args.out_dir
    files = [write_csv(out / "section.csv", ["ic_index", "t", "y", "py"],
                       [(q.ic_index, q.t, q.y, q.py) for q in run.points])]
    files.append(write_csv(out / "section_ics.csv", ["ic_index", "x", "y", "px", "py", "energy_drift"],
                           [(i, *tuple(s), d) for i, (s, d) in enumerate(zip(run.ics, run.drifts))]))
    if args.svg:
        arr = run.as_array()
        files.append(svg_scatter(out / "section.svg", arr[:, 2], arr[:, 3],
                                 title=f"a={p.a:.6g}, E={E / p.E_s if p.E_s else E:.4g} E_s"))
    _finish(args, argv, started, files,
            {"E": E, "E_s_units": E / p.E_s if p.E_s else None, "E_s": p.E_s,
             "failures": {str(k): v for k, v in run.failures.items()},
             "max_energy_drift": float(np.nanmax(run.drifts)) if run.drifts else 0.0})
    print(f"{len(run.points)} section points from {run.n_ic} ICs -> {files[0]}")
    if run.failures:
        print(f"{len(run.failures)} IC(s) failed: {sorted(run.failures)}", file=sys.stderr)
    return EXIT_PARTIAL if len(run.failures) > 0.1 * max(run.n_ic, 1) else EXIT_OK


def _orbit_records(p: ModelParams, args):
    q = avg.AveragingQuery(p, args.h, args.epsilon)
    if avg.is_sqrt5(p):
        # zeros sharing an initial condition describe the same orbit
        results, seen = [], []
        for r in avg.solve_zeros_sqrt5(args.h):
            if not r.valid:
                continue
            ic = avg.initial_conditions(q, r).as_array()
            if any(np.max(np.abs(ic - s)) <= 1e-12 for s in seen):
                continue
            seen.append(ic)
            results.append(r)
    else:
        results = []
        for n in args.branches:
            try:
                results.append(avg.candidate_zero(p, args.h, n))
            except InvalidBranch as exc:
                print(f"branch {n}: {exc}", file=sys.stderr)
    return q, results


def cmd_orbits(args, argv) -> int:
    started = now_iso()
    if args.ratio is not None:
        p = avg.a_for_ratio(*args.ratio)
    else:
        p = ModelParams(args.a)
    q, results = _orbit_records(p, args)
    wx, wy, ratio = avg.frequency_ratio(p)
    cfg = _cfg(args)
    refine = args.refine or args.multipliers
    out = args.out_dir
    files = []
    records, reports = [], []
    n_attempted = n_failed = 0
    for res in results:
        rec = {"a": p.a, "h": args.h, "epsilon": args.epsilon, **res.to_dict(),
               "ratio": {"l": ratio[0], "j": ratio[1]} if ratio else None}
        if not res.valid:
            rec["notes"] = list(res.notes)
            records.append(rec)
            continue
        ic = avg.initial_conditions(q, res)
        rec["ic"] = ic.to_dict()
        rec["family"] = [m.to_dict() for m in avg.symmetry_family(ic)]
        orbit_ic, T = ic, (ratio[0] if ratio else 1) * avg.period(p)
        if refine:
            if ratio is None:
                rec["refined"] = {"error": "irrational frequency ratio: orbit is quasi-periodic"}
            else:
                n_attempted += 1
                cand = floquet.OrbitCandidate(ic, T, {"n": res.n}, args.h, args.epsilon)
                try:
                    ref = floquet.refine_orbit(p, cand, cfg)
                except (NoConvergence, SingularShooting) as exc:
                    n_failed += 1
                    rec["refined"] = {"error": str(exc)}
                else:
                    orbit_ic, T = ref.ic, ref.period
                    rec["refined"] = {"ic": ref.ic.to_dict(), "T": ref.period, "closure": ref.closure,
                                      "iterations": ref.iterations,
                                      "correction": float(np.max(np.abs(ref.ic.as_array() - ic.as_array()))),
                                      "oscillations": dict(zip(("x", "y"), floquet.oscillation_counts(p, ref.ic, T, cfg)))}
                    if args.multipliers:
                        rep = floquet.monodromy(p, ref.ic, ref.period, cfg)
                        reports.append(rep)
                        rec["monodromy"] = rep.to_dict()
        n_t = args.simulate_periods * args.samples_per_period
        ts = np.linspace(0.0, args.simulate_periods * T, n_t + 1)
        tr = integrate(p, orbit_ic, (0.0, ts[-1]), cfg, t_eval=ts)
        name = f"orbit_n{res.n}.csv"
        files.append(write_csv(out / name, ["t", "x", "y", "px", "py"],
                               [(t, *s) for t, s in zip(tr.times, tr.states)]))
        rec["trajectory_csv"] = name
        rec["trajectory_energy_drift"] = tr.energy_drift
        records.append(rec)
    payload = {"a": p.a, "h": args.h, "epsilon": args.epsilon,
               "omega_x": wx, "omega_y": wy, "orbits": records}
    if reports:
        payload["integrability"] = floquet.integrability_probe(p, reports).to_dict()
    files.insert(0, write_json(out / "orbits.json", payload))
    _finish(args, argv, started, files)
    for rec in records:
        ic = rec.get("ic")
        if ic:
            print(f"n={rec['n']}: rho={rec['rho_tilde']:.6f} s={rec['s_tilde']:.6f} "
                  f"ic=({ic['x']:.6g}, {ic['y']:.6g}, {ic['px']:.6g}, {ic['py']:.6g})")
    if "integrability" in payload:
        print(payload["integrability"]["verdict"])
    if n_attempted and n_failed == n_attempted:
        return EXIT_CONVERGENCE
    return EXIT_OK


def cmd_lyapunov(args, argv) -> int:
    started = now_iso()
    p = ModelParams(args.a)
    E = energy_from_units(p, args.energy, args.energy_in_Es)
    ics = sample_ics(p, E, args.n_ic, args.seed)
    series = mle_batch(p, ics, args.t_max, args.renorm, _cfg(args), seed=args.seed,
                       threads=args.threads, burn_in=args.burn_in)
    out = args.out_dir
    files = [write_csv(out / "lyapunov_summary.csv", ["ic_index", "y", "py", "mle"],
                       [(i, s.ic.y, s.ic.py, s.final) for i, s in enumerate(series)])]
    for i, s in enumerate(series):
        files.append(write_csv(out / f"lyapunov_ic{i:03d}.csv", ["t", "lambda"], s.checkpoints))
    _finish(args, argv, started, files, {"E": E, "E_s": p.E_s})
    for i, s in enumerate(series):
        print(f"ic {i:3d}: y={s.ic.y:+.5f} py={s.ic.py:+.5f} mle={s.final:.5f}")
    return EXIT_OK


def cmd_equilibria(args, argv) -> int:
    started = now_iso()
    p = ModelParams(args.a)
    eqs = equilibria(p)
    rows = []
    for e in eqs:
        row = [*tuple(e.state), e.kind.value]
        for lam in e.eigenvalues:
            row += [lam.real, lam.imag]
        rows.append(row)
    header = ["x", "y", "px", "py", "kind"] + [f"{c}{k}" for k in range(4) for c in ("re", "im")]
    files = [write_csv(args.out_dir / "equilibria.csv", header, rows)]
    _finish(args, argv, started, files)
    for e in eqs:
        eig = ", ".join(f"{l.real:+.6g}{l.imag:+.10g}i" for l in e.eigenvalues)
        print(f"({e.state.x:+.10g}, {e.state.y:+.10g}, 0, 0)  {e.kind.value:14s}  {eig}")
    return EXIT_OK


def cmd_potential_grid(args, argv) -> int:
    started = now_iso()
    p = ModelParams(args.a)
    if not (args.step > 0 and args.range_ > 0):
        raise DomainError("range and step must be positive")
    n = int(round(args.range_ / args.step))
    xs = np.linspace(-n * args.step, n * args.step, 2 * n + 1)
    U = potential_grid(p, xs, xs)
    rows = [(x, y, U[j, i]) for j, y in enumerate(xs) for i, x in enumerate(xs)]
    files = [write_csv(args.out_dir / "potential_grid.csv", ["x", "y", "U"], rows)]
    _finish(args, argv, started, files)
    j, i = np.unravel_index(np.argmin(U), U.shape)
    print(f"grid {len(xs)}x{len(xs)}; min U={U[j, i]:.6g} at ({xs[i]:.4g}, {xs[j]:.4g})")
    return EXIT_OK


def cmd_rerun(args, argv) -> int:
    man = json.loads(Path(args.manifest).read_text())
    old_argv = man.get("argv")
    if not old_argv:
        raise DomainError("manifest has no argv to replay")
    new_argv = []
    skip = False
    for tok in old_argv:
        if skip:
            skip = False
            continue
        if tok == "--out-dir":
            skip = True
            continue
        if tok.startswith("--out-dir="):
            continue
        new_argv.append(tok)
    new_argv += ["--out-dir", str(args.out_dir)]
    code = main(new_argv)
    if code not in (EXIT_OK, EXIT_PARTIAL):
        return code
    mismatched = [o["file"] for o in man["outputs"]
                  if digest(Path(args.out_dir) / o["file"]) != o["sha256"]]
    for f in mismatched:
        print(f"digest mismatch: {f}", file=sys.stderr)
    print("all outputs reproduced" if not mismatched else f"{len(mismatched)} output(s) differ")
    return EXIT_PARTIAL if mismatched else code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "threads"):
        args.threads = resolve_threads(args.threads)
    if args.command != "rerun":
        args.out_dir.mkdir(parents=True, exist_ok=True)
    try:
        return args.func(args, argv)
    except (ResonantParameter, EmptyRegion, DomainError, DegenerateParameter, InvalidBranch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (NoConvergence, SingularShooting) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except TwoCenterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
