"""Command-line front end.

Every command reads configurations from a path, from ``-`` (standard input)
or from a catalog reference such as ``@handles:8`` or ``@double-handles:2,3``,
and prints one JSON document on standard output.

Exit codes: 0 success, 2 parse error, 3 domain error, 4 no convergence,
5 I/O error, 6 combination hypothesis violated.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .catalog import CATALOG, combine, from_catalog
from .config import Configuration, force_report, genus
from .document import DocumentError, config_document, dumps, pairs, parse_config
from .errors import (AssemblyError, DegenerateConfigurationError, GridError, HypothesisError,
                     QuadratureError, RootFindingError, UnbalancedConfigurationError)
from .meshgen import MeshParams, assemble_surface
from .objio import export_obj
from .solver import force_jacobian, is_roots_of_unity_class, solve_balance
from .weierstrass import limit_F

EXIT_OK, EXIT_PARSE, EXIT_DOMAIN, EXIT_CONVERGENCE, EXIT_IO, EXIT_HYPOTHESIS = 0, 2, 3, 4, 5, 6


class CommandError(Exception):
    """Failure with an exit code; ``doc``, if given, is still printed."""

    def __init__(self, code, message, doc=None):
        super().__init__(message)
        self.code = code
        self.doc = doc


def parse_reference(ref: str) -> tuple:
    """``"@name:1,2"`` -> ``("name", (1, 2))``."""
    body = ref[1:]
    name, _, rest = body.partition(":")
    if name not in CATALOG:
        raise DocumentError(f"unknown catalog entry {name!r}; known: {', '.join(sorted(CATALOG))}", ref)
    try:
        args = tuple(int(x) for x in rest.split(",")) if rest else ()
    except ValueError:
        raise DocumentError("catalog arguments must be integers", ref) from None
    return name, args


def load_config(source: str, stdin=None) -> Configuration:
    if source.startswith("@"):
        name, args = parse_reference(source)
        try:
            return from_catalog(name, *args)
        except (ValueError, RootFindingError) as exc:
            raise CommandError(EXIT_DOMAIN, f"{source}: {exc}") from None
    if source == "-":
        text = (stdin or sys.stdin).read()
        label = "<stdin>"
    else:
        try:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise CommandError(EXIT_IO, f"cannot read {source}: {exc.strerror or exc}") from None
        label = source
    return parse_config(text, label)


def _levels(values, counts):
    out, pos = [], 0
    for n in counts:
        out.append(pairs(values[pos:pos + n]))
        pos += n
    return out


def cmd_forces(args, stdin=None) -> dict:
    cfg = load_config(args.input, stdin)
    rep = force_report(cfg)
    c = cfg.counts
    return {
        "name": cfg.name, "N": cfg.N, "counts": list(c),
        "forces": _levels(rep.flat(), c),
        "plus": _levels(np.concatenate(rep.plus_parts), c),
        "minus": _levels(np.concatenate(rep.minus_parts), c),
        "mutual": _levels(np.concatenate(rep.mutual_parts), c),
        "total": rep.total,
        "residual_norm": rep.residual_norm,
        "genus": genus(cfg),
    }


def cmd_solve(args, stdin=None) -> dict:
    cfg = load_config(args.input, stdin)
    if args.seed_perturb:
        rng = np.random.default_rng(args.seed)
        p = cfg.flat()
        noise = rng.normal(size=p.shape) + 1j * rng.normal(size=p.shape)
        p = p + args.seed_perturb * noise * np.abs(p)
        p[0] = cfg.flat()[0]
        cfg = cfg.with_flat(p)
    try:
        out = solve_balance(cfg, tol=args.tol, max_iter=args.max_iter)
    except DegenerateConfigurationError as exc:
        raise CommandError(EXIT_CONVERGENCE, f"solver left the admissible set: {exc}") from None
    doc = {
        "converged": out.converged, "iterations": out.iterations, "residual": out.residual,
        "gauge": out.gauge, "history": list(out.history),
        "roots_of_unity_class": is_roots_of_unity_class(out.config),
        "config": config_document(out.config, provenance="solve"),
    }
    if not out.converged:
        raise CommandError(EXIT_CONVERGENCE, f"no convergence after {out.iterations} iterations "
                                             f"(residual {out.residual:.3e})", doc)
    return doc


def cmd_rank(args, stdin=None) -> dict:
    cfg = load_config(args.input, stdin)
    rep = force_jacobian(cfg, tol=args.tol)
    return {"name": cfg.name, "m": rep.m, "rank": rep.rank, "nondegenerate": rep.nondegenerate,
            "tol": rep.tol, "spectral_gap": rep.gap, "singular_values": rep.singular_values}


def cmd_catalog(args, stdin=None) -> dict:
    try:
        cfg = from_catalog(args.name, *args.args)
    except KeyError as exc:
        raise CommandError(EXIT_PARSE, str(exc.args[0])) from None
    except (ValueError, RootFindingError) as exc:
        raise CommandError(EXIT_DOMAIN, str(exc)) from None
    doc = config_document(cfg, provenance="catalog")
    doc["genus"] = genus(cfg)
    return doc


def cmd_combine(args, stdin=None) -> dict:
    c1 = load_config(args.first, stdin)
    c2 = load_config(args.second, stdin)
    try:
        cfg = combine(c1, c2)
    except HypothesisError as exc:
        raise CommandError(EXIT_HYPOTHESIS, str(exc)) from None
    doc = config_document(cfg, provenance="combine")
    doc["genus"] = genus(cfg)
    doc["residual_norm"] = force_report(cfg).residual_norm
    return doc


def cmd_verify_limit(args, stdin=None) -> dict:
    cfg = load_config(args.input, stdin)
    v = limit_F(cfg, tol=args.tol)
    return {"name": cfg.name, "passed": v.passed, "component_max": v.component_max,
            "F5_exact": v.f5_exact, "oracle_deviation": v.oracle_deviation,
            "tol": v.tol, "oracle_tol": v.oracle_tol}


def cmd_mesh(args, stdin=None) -> dict:
    cfg = load_config(args.input, stdin)
    params = MeshParams(t=args.t, sigma=args.sigma, copies=args.copies,
                        level_grid=tuple(args.level_grid), neck_grid=tuple(args.neck_grid),
                        mismatch_ceiling=args.mismatch_ceiling)
    mesh = assemble_surface(cfg, params)
    try:
        export_obj(mesh, args.out, comment=f"dpsurf mesh of {cfg.name or 'configuration'}")
    except OSError as exc:
        raise CommandError(EXIT_IO, f"cannot write {args.out}: {exc.strerror or exc}") from None
    return {"name": cfg.name, "out": args.out, "vertices": len(mesh.vertices),
            "faces": len(mesh.faces), "diagnostics": mesh.diagnostics}


def _positive_float(text):
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dpsurf", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    src_help = "configuration file, '-' for stdin, or @name[:args]"

    s = sub.add_parser("forces", help="forces, residual and genus")
    s.add_argument("input", help=src_help)
    s.set_defaults(func=cmd_forces)

    s = sub.add_parser("solve", help="Newton-solve the balance equations")
    s.add_argument("input", help=src_help)
    s.add_argument("--tol", type=_positive_float, default=1e-12)
    s.add_argument("--max-iter", type=int, default=50)
    s.add_argument("--seed-perturb", type=float, default=0.0,
                   help="relative complex Gaussian noise added to every point but p[1,1]")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("rank", help="Jacobian rank certificate")
    s.add_argument("input", help=src_help)
    s.add_argument("--tol", type=_positive_float, default=1e-8)
    s.set_defaults(func=cmd_rank)

    s = sub.add_parser("catalog", help="emit a catalog configuration")
    s.add_argument("name", choices=sorted(CATALOG))
    s.add_argument("args", type=int, nargs="*")
    s.set_defaults(func=cmd_catalog)

    s = sub.add_parser("combine", help="stack two configurations")
    s.add_argument("first", help=src_help)
    s.add_argument("second", help=src_help)
    s.set_defaults(func=cmd_combine)

    s = sub.add_parser("verify-limit", help="limit period problem at r = 0")
    s.add_argument("input", help=src_help)
    s.add_argument("--tol", type=_positive_float, default=1e-8)
    s.set_defaults(func=cmd_verify_limit)

    s = sub.add_parser("mesh", help="near-limit OBJ mesh with diagnostics")
    s.add_argument("input", help=src_help)
    s.add_argument("--t", type=float, default=0.25)
    s.add_argument("--sigma", type=float, default=0.3)
    s.add_argument("--copies", type=int, default=1)
    s.add_argument("--level-grid", type=int, nargs=2, default=(64, 128), metavar=("NR", "NTHETA"))
    s.add_argument("--neck-grid", type=int, nargs=2, default=(32, 64), metavar=("NU", "NPHI"))
    s.add_argument("--mismatch-ceiling", type=float, default=MeshParams.mismatch_ceiling)
    s.add_argument("--out", required=True, help="OBJ destination")
    s.set_defaults(func=cmd_mesh)
    return p


def run(argv=None, stdout=None, stderr=None, stdin=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        doc = args.func(args, stdin)
    except CommandError as exc:
        if exc.doc is not None:
            stdout.write(dumps(exc.doc) + "\n")
        print(f"dpsurf: {exc}", file=stderr)
        return exc.code
    except DocumentError as exc:
        print(f"dpsurf: parse error: {exc}", file=stderr)
        return EXIT_PARSE
    except HypothesisError as exc:
        print(f"dpsurf: {exc}", file=stderr)
        return EXIT_HYPOTHESIS
    except (DegenerateConfigurationError, UnbalancedConfigurationError, AssemblyError,
            GridError, QuadratureError, RootFindingError, ValueError) as exc:
        print(f"dpsurf: {exc}", file=stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"dpsurf: {exc}", file=stderr)
        return EXIT_IO
    stdout.write(dumps(doc) + "\n")
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))
