"""Command-line interface.

Exit codes: 0 success, 2 parse/input error, 3 validation failure,
4 numeric failure.
"""
import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import catalog
from .config import get_tol, tolerance
from .errors import DimensionError, NumericError, ParseError, ValidationError
from .exterior import Endomorphism, KForm
from .liealg import LieAlgebra

EXIT_OK, EXIT_PARSE, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3, 4

CSV_HELP = """\
CSV columns: t, then the 35 coefficients phi_ijk of phi(t) on e^{ijk}
(1 <= i < j < k <= 7, lexicographic), then closedness_residual (max |d phi|),
det_g (determinant of g_phi) and tau_norm_sq (|tau|^2 in g_phi)."""


class InputError(Exception):
    """Bad command-line input (unknown name, unreadable file)."""


def _params(pairs):
    out = {}
    for p in pairs or []:
        key, sep, val = p.partition("=")
        if not sep:
            raise InputError(f"--param expects name=value, got {p!r}")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise InputError(f"--param {key}: {val!r} is not a number") from None
    return out


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _form(obj, deg, params):
    from .dsl import parse_form

    if isinstance(obj, str):
        return parse_form(obj, 6, params, deg=deg)
    f = KForm.from_json(obj)
    if f.deg != deg:
        raise InputError(f"expected a {deg}-form, got degree {f.deg}")
    return f


def _algebra(obj, params):
    if isinstance(obj, dict):
        merged = dict(obj.get("params") or {})
        merged.update(params)
        return LieAlgebra.from_json({**obj, "params": merged})
    if isinstance(obj, str):
        if obj.lstrip().startswith("("):
            return LieAlgebra.parse(obj, params)
        return catalog.load(obj, params).L
    raise InputError("'algebra' must be an object, a structure tuple or a catalog name")


def load_input(spec, params):
    """(SU3Structure, catalog row or None) from a catalog name or a JSON file."""
    from .su3 import build_su3

    if spec in catalog.BY_NAME:
        row = catalog.load(spec, params)
        return row.su3, row
    path = Path(spec)
    if not path.exists():
        raise InputError(f"{spec!r} is neither a catalog entry ({', '.join(catalog.names())}) nor a file")
    obj = _read_json(path)
    try:
        L = _algebra(obj["algebra"], params)
        omega = _form(obj["omega"], 2, params)
        psi = _form(obj["psi_plus"], 3, params)
    except KeyError as exc:
        raise InputError(f"{spec}: missing field {exc.args[0]!r}") from None
    return build_su3(L, omega, psi, name=obj.get("name") or path.stem), None


def _emit(data, args):
    if getattr(args, "json", False):
        print(json.dumps(data, indent=1, default=float))


# commands --------------------------------------------------------------------


def cmd_validate(args):
    from .report import validate_su3

    S, row = load_input(args.input, _params(args.param))
    sec = validate_su3(S, row)
    if args.json:
        _emit(sec.to_json(), args)
    else:
        print(f"{S.name}: {'PASS' if sec.passed else 'FAIL'}")
        for c in sec.checks:
            print("  " + c.line())
        if "c" in sec.info:
            tag = "eigenform" if sec.info["eigenform"] else "not an eigenform"
            print(f"  c = {sec.info['c']:.10g} ({tag}, residual {sec.info['eigen_residual']:.2e})")
        print(f"  |w2-|^2 = {sec.info['w2_norm_sq']:.10g}, Scal(h) = {sec.info['scal']:.10g}")
    return EXIT_OK if sec.passed else EXIT_INVALID


def _write_curve(curve, out, suffix=""):
    p = Path(out)
    if p.suffix in (".csv", ".json"):
        base = p.with_suffix("")
        kinds = [p.suffix]
    else:
        base, kinds = p, [".csv", ".json"]
    written = []
    for kind in kinds:
        target = Path(f"{base}{suffix}{kind}")
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", newline="") as fh:
            if kind == ".csv":
                curve.write_csv(fh)
            else:
                json.dump(curve.to_json(), fh, indent=1)
        written.append(str(target))
    return written


def cmd_flow(args):
    from .flow import (
        ANSATZ_IDX,
        closed_form_curve,
        from_su3,
        integrate_flow,
        integrate_reduced,
        maximal_time,
    )
    from .g2warp import build_warped

    S, row = load_input(args.input, _params(args.param))
    G = build_warped(S, args.a)
    if not G.closed:
        raise ValidationError("the warped 3-form is not closed; the Laplacian flow needs dphi = 0")
    t_eval = None
    if args.samples:
        t_eval = np.linspace(0.0, args.t_end, args.samples)
    numeric = closed = None
    code = EXIT_OK
    if args.method in ("numeric", "both"):
        numeric = integrate_flow(G.phi, G.Lhat, args.t_end, args.tol, t_eval=t_eval)
        print(f"numeric: status {numeric.status}, {len(numeric)} samples, "
              f"t in [{numeric.t_span[0]:.6g}, {numeric.t_span[1]:.6g}], "
              f"max closedness residual {numeric.diagnostics['closedness_residual'].max():.2e}")
        if not numeric.ok:
            print(f"numeric: stopped early: {numeric.message}")
            code = EXIT_NUMERIC
    if args.method in ("closed", "both"):
        cf = from_su3(S, args.a)
        T = maximal_time(cf)
        times = numeric.times if numeric is not None else (
            t_eval if t_eval is not None else np.linspace(0.0, args.t_end, 101))
        if np.any(times <= T):
            raise ValidationError(f"t-end {args.t_end} is outside the maximal interval (T = {T:.6g}, +inf)")
        closed = closed_form_curve(cf, times)
        print(f"closed form: c = {cf.c:.10g}, |w2-|^2 = {cf.n2:.10g}, T = {T:.10g}"
              + (" (exponential limit, extrapolated)" if cf.extrapolated else ""))
    if numeric is not None and closed is not None:
        print(f"max deviation numeric vs closed form: {numeric.max_deviation(closed):.3e}")
    if numeric is not None and row is not None and row.name == "g654-noneigen":
        red = integrate_reduced(numeric.t_span[1], t_eval=numeric.times)
        A = np.stack([numeric.column(i) for i in ANSATZ_IDX], axis=1)
        dev = float(np.max(np.abs(A - red.coefficients())))
        support = sorted({tuple(k) for i in range(len(numeric)) for k in numeric.phi(i).terms})
        on_pattern = set(support) <= set(ANSATZ_IDX)
        print("ansatz support: " + ("yes" if on_pattern else "no") + "; "
              + ", ".join("e" + "".join(map(str, s)) for s in support))
        print(f"max deviation from the reduced (v1, v4) system: {dev:.3e}")
    if args.out:
        primary = numeric if numeric is not None else closed
        files = _write_curve(primary, args.out)
        if numeric is not None and closed is not None:
            files += _write_curve(closed, args.out, "-closed")
        print("wrote " + ", ".join(files))
    return code


def _parse_D(text, row, params):
    if text is None or text == "catalog":
        if row is None or row.D is None:
            return None
        return row.D
    if text == "zero":
        return Endomorphism(np.zeros((7, 7)))
    if text.startswith("diag:"):
        vals = [float(x) for x in text[5:].split(",")]
        if len(vals) != 7:
            raise InputError("--D diag: needs 7 entries")
        return Endomorphism.diag(vals)
    obj = _read_json(text)
    M = np.array(obj["matrix"] if isinstance(obj, dict) else obj, dtype=float)
    if M.shape != (7, 7):
        raise InputError(f"--D matrix must be 7x7, got {M.shape}")
    return Endomorphism(M)


def cmd_soliton(args):
    from .g2warp import build_warped
    from .soliton import SolitonCandidate, best_fit_soliton, report

    params = _params(args.param)
    S, row = load_input(args.input, params)
    G = build_warped(S, args.a)
    if not G.closed:
        raise ValidationError("the warped 3-form is not closed")
    D = _parse_D(args.D, row, params)
    lam = args.lam if args.lam is not None else (row.lam if row is not None and args.D in (None, "catalog") else None)
    if D is not None and lam is not None and not args.best_fit:
        cand = SolitonCandidate(G, D, lam)
        rep = report(cand)
        ok = rep["derivation_residual"] < 1e-10 and rep["soliton_residual"] < args.threshold
        rep["verdict"] = "algebraic soliton" if ok else "not a soliton for this (D, lambda)"
        rep["sign_convention"] = cand.sign
        code = EXIT_OK if ok else EXIT_INVALID
    else:
        fit = best_fit_soliton(G)
        ok = fit.residual < args.threshold
        rep = {
            "derivation_residual": 0.0,
            "soliton_residual": fit.residual,
            "lambda": fit.lam,
            "type": fit.type,
            "best_fit": True,
            "symmetric_derivations": fit.dim,
            "D": fit.D.matrix.tolist(),
            "verdict": "algebraic soliton" if ok else "not an algebraic soliton",
        }
        code = EXIT_OK
    if args.json:
        _emit(rep, args)
    else:
        for k in ("derivation_residual", "soliton_residual", "lambda", "type", "verdict"):
            v = rep[k]
            print(f"{k}: {v:.6g}" if isinstance(v, float) else f"{k}: {v}")
    return code


def cmd_paper_report(args):
    from .report import format_sections, paper_report

    sections = paper_report(args.only, _params(args.param), jobs=args.jobs, with_flow=not args.no_flow)
    if args.json:
        _emit([s.to_json() for s in sections], args)
    else:
        print(format_sections(sections))
    return EXIT_OK if all(s.passed for s in sections) else EXIT_INVALID


def cmd_catalog(args):
    for e in catalog.ENTRIES:
        tags = [t for t, on in (("table", e.table_row), ("soliton", e.soliton), ("nilpotent", e.nilpotent)) if on]
        print(f"{e.name:10s} {e.structure:58s} {e.label}  [{', '.join(tags)}]")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(
        prog="g2flow",
        description="SU(3)- and G2-structures on Lie algebras and the Laplacian flow.",
        epilog="Environment: G2FLOW_TOL overrides the global tolerance (default 1e-9). "
        "Exit codes: 0 ok, 2 parse/input error, 3 validation failure, 4 numeric failure.",
    )
    p.add_argument("--tol-global", type=float, default=None, help="global pruning/equality tolerance")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("input", help="catalog name or SU(3)-structure JSON file")
        sp.add_argument("--param", action="append", metavar="NAME=VALUE", help="parameter binding, e.g. alpha=0.5")
        sp.add_argument("--json", action="store_true", help="machine-readable output")

    sp = sub.add_parser("validate", help="check an SU(3)-structure and its torsion")
    common(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("flow", help="Laplacian flow of the warped G2-structure",
                        epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    common(sp)
    sp.add_argument("--a", type=float, default=1.0, help="constant warping f(0) = a")
    sp.add_argument("--t-end", type=float, default=1.0, help="final time (negative flows backwards)")
    sp.add_argument("--method", choices=("closed", "numeric", "both"), default="both")
    sp.add_argument("--tol", type=float, default=1e-9, help="relative tolerance of the integrator")
    sp.add_argument("--samples", type=int, default=0, help="evenly spaced output times (default: accepted steps)")
    sp.add_argument("--out", help="output prefix, or a .csv/.json path")
    sp.set_defaults(func=cmd_flow)

    sp = sub.add_parser("soliton", help="check the algebraic soliton equation")
    common(sp)
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--D", help="'catalog', 'zero', 'diag:d1,...,d7' or a JSON file with a 7x7 'matrix'")
    sp.add_argument("--lambda", dest="lam", type=float, help="soliton constant")
    sp.add_argument("--best-fit", action="store_true", help="least-squares search over symmetric derivations")
    sp.add_argument("--threshold", type=float, default=1e-8, help="residual below which the equation holds")
    sp.set_defaults(func=cmd_soliton)

    sp = sub.add_parser("paper-report", help="reproduce the catalog data in one run")
    sp.add_argument("--only", choices=("nilpotent", "soliton", "table"))
    sp.add_argument("--tol", type=float, default=None, help="global tolerance for this run")
    sp.add_argument("--param", action="append", metavar="NAME=VALUE")
    sp.add_argument("--jobs", type=int, default=1, help="rows processed in parallel")
    sp.add_argument("--no-flow", action="store_true", help="skip the numeric flows")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_paper_report)

    sp = sub.add_parser("catalog", help="list the built-in structures")
    sp.set_defaults(func=cmd_catalog)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    tol = getattr(args, "tol", None) if args.command == "paper-report" else None
    tol = args.tol_global if args.tol_global is not None else tol
    try:
        with tolerance(tol if tol is not None else get_tol()):
            return args.func(args)
    except (ParseError, DimensionError, InputError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"validation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
