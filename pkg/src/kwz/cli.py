"""Command line interface.

Subcommands
-----------
check       run the full verification on a mesh file and print a JSON report
gen         write a generated mesh in the interchange format
selftest    check the Kac-Ward identity on random small planar graphs
weights     dump the per-edge weights as JSON lines
unfold-svg  draw the planar decomposition of a mesh

Exit codes: 0 on success, 1 when a verification fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .errors import KWZError
from .immersion import edge_angles, generate, load_mesh, mesh_to_json, validate_immersion
from .oracle import MAX_CYCLE_DIM
from .pipeline import Tolerances, run
from .weights import lb_weight

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _finite(x):
    """Replace non-finite floats, which JSON cannot carry, by strings."""
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    return x


def _dumps(obj) -> str:
    return json.dumps(_finite(obj), sort_keys=True)


def _write(path, text: str) -> None:
    """Write ``text`` to ``path`` atomically, or to stdout for ``None`` / ``-``."""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _error(exc: Exception) -> dict:
    out = {"error": getattr(exc, "category", type(exc).__name__),
           "detail": type(exc).__name__, "message": str(exc)}
    seed = getattr(exc, "seed", None)
    if seed is not None:
        out["seed"] = seed
    return out


def _tolerances(args) -> Tolerances:
    return Tolerances(zero=args.tol_zero, holonomy=args.tol_holonomy,
                      residual=args.tol_residual, oracle=args.tol_oracle,
                      kernel=args.tol_kernel, gap=args.tol_gap)


# --- subcommands --------------------------------------------------------------------

def cmd_check(args) -> int:
    t, x = load_mesh(args.mesh)
    report, art = run(t, x, tol=_tolerances(args), seed=args.seed, oracle=args.oracle,
                      routing=args.routing)
    out = report.to_dict()
    out["mesh"] = str(args.mesh)
    _write(args.output, _dumps(out) + "\n")
    if args.svg:
        from .plotting import save_svg
        save_svg(art.decomposition, args.svg, title=Path(args.mesh).name)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_gen(args) -> int:
    t, x = generate(args.kind, n=args.n, amplitude=args.amplitude, seed=args.seed)
    _write(args.output, mesh_to_json(t, x) + "\n")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .kac_ward import kw_selftest
    rep = kw_selftest(seed=args.seed, trials=args.trials, max_edges=args.max_edges,
                      flip_turning=args.flip_turning)
    d = rep.to_dict()
    if not args.records:
        d.pop("records")
    _write(args.output, _dumps(d) + "\n")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_weights(args) -> int:
    t, x = load_mesh(args.mesh)
    imm = validate_immersion(t, x)
    ang = edge_angles(imm)
    lines = []
    for e, de in enumerate(imm.dual.edges):
        y = lb_weight(ang.theta[e], ang.phi_u[e], ang.phi_up[e])
        rec = {"u": de.u, "u'": de.up, "theta": float(ang.theta[e]),
               "phi_uu": float(ang.phi_u[e]), "phi_u'u": float(ang.phi_up[e]),
               "y_re": y.real, "y_im": y.imag}
        lines.append(json.dumps(rec) + "\n")
    _write(args.output, "".join(lines))
    return EXIT_OK


def cmd_unfold_svg(args) -> int:
    from .plotting import save_svg
    from .pipeline import build
    t, x = load_mesh(args.mesh)
    art = build(t, x, routing=args.routing)
    save_svg(art.decomposition, args.output, title=Path(args.mesh).name)
    return EXIT_OK


# --- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kwz", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="verify a mesh end to end")
    c.add_argument("mesh", help="mesh file (JSON interchange format)")
    c.add_argument("--seed", type=int, default=0, help="seed for the weight re-split check")
    c.add_argument("--tol-zero", type=float, default=1e-9)
    c.add_argument("--tol-holonomy", type=float, default=1e-8)
    c.add_argument("--tol-residual", type=float, default=1e-8)
    c.add_argument("--tol-oracle", type=float, default=1e-9)
    c.add_argument("--tol-kernel", type=float, default=1e-8,
                   help="bound on the two smallest singular values, relative")
    c.add_argument("--tol-gap", type=float, default=1e-4,
                   help="lower bound on the third singular value, relative")
    g = c.add_mutually_exclusive_group()
    g.add_argument("--oracle", dest="oracle", action="store_true", default=None,
                   help=f"force the brute-force cross-check (cycle dimension <= {MAX_CYCLE_DIM})")
    g.add_argument("--no-oracle", dest="oracle", action="store_false")
    c.add_argument("--routing", choices=("auto", "straight", "bent"), default="auto")
    c.add_argument("--svg", help="also draw the decomposition to this file")
    c.add_argument("-o", "--output", help="report file (default: stdout)")
    c.set_defaults(func=cmd_check)

    g = sub.add_parser("gen", help="generate a mesh")
    g.add_argument("kind", choices=("tetrahedron", "bipyramid", "random-convex", "random_convex",
                                    "perturbed"))
    g.add_argument("-n", type=int, default=12, help="number of vertices (random kinds)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--amplitude", type=float, default=0.2, help="radial noise (perturbed)")
    g.add_argument("-o", "--output", help="output file (default: stdout)")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("selftest", help="Kac-Ward identity on random planar graphs")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=50)
    s.add_argument("--max-edges", type=int, default=14)
    s.add_argument("--flip-turning", action="store_true",
                   help="debug: negate the turning phase at one vertex (must fail)")
    s.add_argument("--records", action="store_true", help="include per-trial records")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_selftest)

    w = sub.add_parser("weights", help="dump per-edge weights as JSON lines")
    w.add_argument("mesh")
    w.add_argument("-o", "--output")
    w.set_defaults(func=cmd_weights)

    u = sub.add_parser("unfold-svg", help="draw the planar decomposition")
    u.add_argument("mesh")
    u.add_argument("-o", "--output", required=True)
    u.add_argument("--routing", choices=("auto", "straight", "bent"), default="auto")
    u.set_defaults(func=cmd_unfold_svg)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KWZError as exc:
        print(_dumps(_error(exc)))
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(_dumps(_error(exc)))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
