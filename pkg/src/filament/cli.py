"""Command line entry point.

Exit codes: 0 success, 1 failed check, 2 usage or parse error,
3 non-exact input (no local antiderivative), 4 numerical blow-up.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

import numpy as np

from . import curvegeom as cg
from . import hamiltonian as hm
from . import pfsim
from .derivations import commutator
from .diffalg import (
    DegenerateGrid,
    NotExact,
    antiderivative,
    euler_derivative,
    is_exact,
    total_derivative,
)
from .exprio import ParseError, format_field, format_functional, format_poly, parse, parse_field
from .sampling import LOW_DEGREE, random_arc_field, random_exact, random_field, random_non_exact, random_poly

HARD_DEPTH_CAP = 8

EXIT_FAILED, EXIT_PARSE, EXIT_NOT_EXACT, EXIT_BLOWUP = 1, 2, 3, 4

PRESETS = {
    "soliton": dict(N=512, L=40.0, dt=1e-4, T=0.5),
    "circle": dict(N=64, L=2 * np.pi, dt=1e-3, T=0.1),
    "random-smooth": dict(N=256, L=20.0, dt=1e-3, T=0.1),
}


def _positive(kind):
    def conv(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return conv


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="filament",
        description="Curvature-polynomial calculus, plane-curve Lie brackets and the planar filament flow.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hierarchy", help="print V_0..V_n and the matching mKdV flows")
    p.add_argument("--n", type=int, default=2, help="last hierarchy level (default 2)")
    p.add_argument("--depth-cap", type=int, default=hm.DEFAULT_DEPTH_LIMIT,
                   help=f"largest level allowed (default {hm.DEFAULT_DEPTH_LIMIT}, hard cap {HARD_DEPTH_CAP})")

    p = sub.add_parser("check", help="run the invariant suite and print a report")
    p.add_argument("--seed", type=int, default=0, help="seed for the random property batches")
    p.add_argument("--n", type=int, default=3, help="mKdV hierarchy depth for the commutator table (default 3)")
    p.add_argument("--cases", type=int, default=50, help="random cases per Lie-algebra law (default 50)")

    p = sub.add_parser("euler", help="variational derivative of an expression")
    p.add_argument("expr")

    p = sub.add_parser("integrate", help="antiderivative of an exact expression")
    p.add_argument("expr")

    p = sub.add_parser("bracket", help="Lie bracket of two fields written 'f | g'")
    p.add_argument("v")
    p.add_argument("w")

    p = sub.add_parser("simulate", help="evolve a preset curve under a planar filament hierarchy flow")
    p.add_argument("--preset", choices=sorted(PRESETS), default="soliton")
    p.add_argument("--n", type=int, default=0, help="hierarchy level of the flow (0 = planar filament)")
    p.add_argument("--N", type=int, help="grid points (even, >= 16)")
    p.add_argument("--L", type=_positive(float), help="curve length")
    p.add_argument("--dt", type=_positive(float), help="time step")
    p.add_argument("--T", type=_positive(float), help="final time")
    p.add_argument("--seed", type=int, default=0, help="seed for the random-smooth preset")
    p.add_argument("--snapshots", type=_positive(int), default=50, help="recorded states (default 50)")
    p.add_argument("--out", type=Path, default=Path("filament-run"), help="output directory")
    p.add_argument("--format", action="append", choices=["csv", "json", "svg"],
                   help="artifact to write; repeatable (default: all)")
    p.add_argument("--depth-cap", type=int, default=hm.DEFAULT_DEPTH_LIMIT)
    return parser


def _depth(parser, n: int, cap: int) -> None:
    if cap > HARD_DEPTH_CAP:
        parser.error(f"--depth-cap may not exceed {HARD_DEPTH_CAP}")
    if n < 0:
        parser.error("--n must be non-negative")
    if n > cap:
        parser.error(f"--n {n} exceeds the depth cap {cap}")


def cmd_hierarchy(args, out) -> int:
    fields = cg.pf_hierarchy(args.n, depth_limit=args.depth_cap)
    flows = hm.mkdv_hierarchy(args.n, depth_limit=args.depth_cap)
    for i, v in enumerate(fields):
        print(f"V{i}: {format_field(v)}", file=out)
    for i, a in enumerate(flows):
        print(f"a{i}: {format_poly(a.a)}", file=out)
    sigma = hm.check_bihamiltonian().sigma
    print(f"sigma = {sigma:+d}: reference V_n = sigma^n Rbar^n V_0", file=out)
    return 0


def _status(ok: bool) -> str:
    return "pass" if ok else "FAIL"


def cmd_check(args, out) -> int:
    rng = random.Random(args.seed)
    ok_all = True

    def report(line: str, ok: bool) -> None:
        nonlocal ok_all
        ok_all &= ok
        print(line, file=out)

    flows = hm.mkdv_hierarchy(args.n, depth_limit=max(args.n, hm.DEFAULT_DEPTH_LIMIT))
    comm = hm.hierarchy_commutators(flows)
    zero = all(c.is_zero for c in comm.values())
    report(f"commutators [0..{args.n}]x[0..{args.n}]: {'all zero' if zero else 'NONZERO'}", zero)

    fields = cg.pf_hierarchy(2)
    pf_zero = all(cg.bracket(fields[i], fields[j]).is_zero for i in range(3) for j in range(i + 1, 3))
    report(f"pf brackets [0..2]x[0..2]: {'all zero' if pf_zero else 'NONZERO'}", pf_zero)

    ok = True
    for _ in range(args.cases):
        a, b, c = (random_field(rng, g_power=1, **LOW_DEGREE) for _ in range(3))
        jac = cg.bracket(a, cg.bracket(b, c)) + cg.bracket(b, cg.bracket(c, a)) + cg.bracket(c, cg.bracket(a, b))
        ok &= jac.is_zero
    report(f"jacobi ({args.cases} random triples): {_status(ok)}", ok)

    closure = hom = True
    for _ in range(args.cases):
        v, w = random_arc_field(rng, g_power=1), random_arc_field(rng, g_power=1)
        br = cg.bracket(v, w)
        closure &= cg.rho_of(br).is_zero
        hom &= cg.phi_hom(br).a == commutator(cg.phi_hom(v), cg.phi_hom(w)).a
    report(f"closure ({args.cases} random arc-preserving pairs): {_status(closure)}", closure)
    report(f"homomorphism ({args.cases} random arc-preserving pairs): {_status(hom)}", hom)

    rep = hm.check_bihamiltonian()
    for line in rep.lines():
        print(line, file=out)
    ok_all &= rep.c1_is_mkdv and rep.sigma is not None

    inv = hm.poisson_pi1(hm.H0, hm.H1)
    report(f"involution {{H0, H1}}: {'zero' if inv.is_zero else format_functional(inv)}", inv.is_zero)

    kernel = roundtrip = consistent = True
    for _ in range(200):
        p = random_poly(rng)
        kernel &= euler_derivative(total_derivative(p)).is_zero
        q = p.without_constant()
        roundtrip &= antiderivative(total_derivative(q)) == q
        cand = random_exact(rng) if rng.random() < 0.5 else random_non_exact(rng)
        try:
            antiderivative(cand)
            succeeded = True
        except NotExact:
            succeeded = False
        consistent &= succeeded == is_exact(cand)
    report(f"euler kernel (200): {_status(kernel)}", kernel)
    report(f"antiderivative roundtrip (200): {_status(roundtrip)}", roundtrip)
    report(f"is_exact vs antiderivative (200): {_status(consistent)}", consistent)
    print(f"overall: {_status(ok_all)}", file=out)
    return 0 if ok_all else EXIT_FAILED


def cmd_euler(args, out) -> int:
    print(format_poly(euler_derivative(parse(args.expr))), file=out)
    return 0


def cmd_integrate(args, out) -> int:
    print(format_poly(antiderivative(parse(args.expr))), file=out)
    return 0


def cmd_bracket(args, out) -> int:
    v = cg.VariationField(*parse_field(args.v))
    w = cg.VariationField(*parse_field(args.w))
    print(format_field(cg.bracket(v, w)), file=out)
    return 0


def _initial_state(preset: str, n: int, length: float, seed: int) -> pfsim.CurvatureState:
    if preset == "soliton":
        return pfsim.soliton_state(n, length)
    if preset == "circle":
        return pfsim.circle_state(n, length)
    return pfsim.random_smooth_state(n, length, seed=seed)


def cmd_simulate(args, out, parser) -> int:
    _depth(parser, args.n, args.depth_cap)
    cfg = dict(PRESETS[args.preset])
    for key in ("N", "L", "dt", "T"):
        if getattr(args, key) is not None:
            cfg[key] = getattr(args, key)
    if cfg["N"] < 16 or cfg["N"] % 2:
        parser.error(f"--N must be even and at least 16, got {cfg['N']}")
    formats = args.format or ["csv", "json", "svg"]

    flow = cg.pf_hierarchy(args.n, depth_limit=args.depth_cap)[args.n]
    state = _initial_state(args.preset, cfg["N"], cfg["L"], args.seed)
    n_steps = max(1, int(round(cfg["T"] / cfg["dt"])))
    every = max(1, n_steps // args.snapshots)
    traj = pfsim.simulate(state, flow, cfg["dt"], cfg["T"], record_every=every)
    probe = pfsim.simulate(state, flow, cfg["dt"], 2 * cfg["dt"])
    velocity = pfsim.verify_pf_velocity(probe, flow)
    cons = pfsim.conserved_report(traj)

    args.out.mkdir(parents=True, exist_ok=True)
    if "csv" in formats:
        pfsim.write_csv(args.out / "trajectory.csv", traj)
    if "json" in formats:
        pfsim.write_manifest(args.out / "manifest.json", n=cfg["N"], length=cfg["L"], dt=cfg["dt"],
                             t_end=cfg["T"], characteristic=format_poly(cg.v_of_k(flow, 0)),
                             seed=args.seed, preset=args.preset, level=args.n)
    if "svg" in formats:
        pfsim.write_svg(args.out / "curves.svg", traj)

    stationary = float(np.max(np.abs(traj[-1].samples - traj[0].samples))) <= 1e-10
    print(f"preset: {args.preset} N={cfg['N']} L={cfg['L']:g} dt={cfg['dt']:g} T={cfg['T']:g} level={args.n}",
          file=out)
    for row in cons.table():
        print(row, file=out)
    h0 = cons.rel_drift["H0"]
    print(f"H0 drift {'<=' if h0 <= 1e-6 else '>'} 1e-6 (relative {h0:.3e})", file=out)
    print(f"TK drift {cons.drift['TK']:.3e}", file=out)
    print(f"pf velocity residual rms {velocity.rms:.3e} max {velocity.max:.3e}", file=out)
    print(f"stationary: {str(stationary).lower()}", file=out)
    print(f"artifacts: {', '.join(formats)} in {args.out}", file=out)
    return 0


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "hierarchy":
            _depth(parser, args.n, args.depth_cap)
            return cmd_hierarchy(args, out)
        if args.command == "check":
            return cmd_check(args, out)
        if args.command == "euler":
            return cmd_euler(args, out)
        if args.command == "integrate":
            return cmd_integrate(args, out)
        if args.command == "bracket":
            return cmd_bracket(args, out)
        return cmd_simulate(args, out, parser)
    except ParseError as err:
        print(f"parse error {err}", file=sys.stderr)
        return EXIT_PARSE
    except NotExact as err:
        print(f"not exact: {err}", file=out)
        print(f"euler witness: {format_poly(err.witness)}", file=out)
        return EXIT_NOT_EXACT
    except (pfsim.Blowup, FloatingPointError) as err:
        print(f"numerical blow-up: {err}", file=sys.stderr)
        return EXIT_BLOWUP
    except DegenerateGrid as err:
        parser.error(str(err))


if __name__ == "__main__":
    sys.exit(main())
