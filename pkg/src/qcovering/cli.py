"""Command-line driver.

Subcommands mirror the library: ``validate``, ``upsilon``, ``theta``,
``theta-i``, ``idp``, ``module``, ``icb``, ``stabilize``, ``verify``.
Reports are deterministic (sorted keys, canonical scalar text) so golden
files diff cleanly.  Exit codes: 0 success, 1 validation errors, 2
failed checks or engine errors (with a machine-readable report), 64
usage errors, 74 I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import canonical, iqsp, modules, quasi
from .coveringu import CoveringAlgebra
from .datum import (
    BUILTIN_NAMES,
    IParams,
    builtin_datum,
    datum_from_json,
    validate_datum,
    validate_params,
)
from .errors import QCoveringError
from .freehalf import HalfAlgebra
from .scalars import parse_scalar, render_qpi, render_rf
from .verify import run_suite

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CHECK = 2
EXIT_USAGE = 64
EXIT_IO = 74


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = Parser(prog="qcovering", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--datum", default="rank1",
                        help=f"built-in name {BUILTIN_NAMES} or a JSON descriptor path")
        sp.add_argument("--height", type=int, default=None,
                        help="weight-height bound (default 8 in rank 1, 4 above)")
        sp.add_argument("--varsigma", default=None,
                        help="embedding parameters, one scalar or a comma list")
        sp.add_argument("--pi", type=int, choices=(1, -1), default=None,
                        help="render the chosen specialization instead of pi-form")
        sp.add_argument("--format", choices=("json", "tex", "text"), default="text")
        sp.add_argument("--out", default=None)
        sp.add_argument("--seed", type=int, default=0)
        return sp

    common(sub.add_parser("validate", help="validate a datum and its parameters"))
    common(sub.add_parser("upsilon", help="quasi-K-matrix pieces"))
    common(sub.add_parser("theta", help="quasi-R-matrix pieces"))
    common(sub.add_parser("theta-i", help="coideal quasi-R-matrix pieces"))
    sp = common(sub.add_parser("idp", help="i^pi-divided power table"))
    sp.add_argument("--max-m", type=int, default=4)
    sp = common(sub.add_parser("module", help="build a simple module"))
    sp.add_argument("--weight", required=True, help="dominant weight, comma coordinates")
    sp = common(sub.add_parser("icb", help="i-canonical basis of L or L x L"))
    sp.add_argument("--weight", default=None, help="single simple module weight")
    sp.add_argument("--weights", default=None, help="tensor pair 'm,n' (rank 1)")
    sp.add_argument("--check-oracle", action="store_true")
    sp = common(sub.add_parser("stabilize", help="projective-system coefficient tables"))
    sp.add_argument("--degrees", default="1,0")
    sp.add_argument("--base", default="2,1")
    sp.add_argument("--steps", type=int, default=4)
    common(sub.add_parser("verify", help="run the invariant suite"))
    return p


def load_setup(args):
    if args.datum in ("rank1", "bo1", "bo2", "bo3", "km2"):
        datum, root = builtin_datum(args.datum)
        params = IParams.split(datum)
    else:
        try:
            with open(args.datum) as f:
                obj = json.load(f)
        except OSError as e:
            raise IOFailure(str(e))
        datum, root, params = datum_from_json(obj)
    if args.varsigma:
        parts = [s.strip() for s in args.varsigma.split(",")]
        if len(parts) == 1:
            parts = parts * datum.rank
        if len(parts) != datum.rank:
            raise UsageError("varsigma list length must match the rank")
        params = IParams(params.tau, [parse_scalar(s) for s in parts])
    height = args.height
    if height is None:
        height = 8 if datum.rank == 1 else 4
    return datum, root, params, height


class IOFailure(Exception):
    pass


def scalar_text(x, pi_spec):
    if pi_spec is None:
        return render_qpi(x)
    return render_rf(x.specialize(pi_spec))


def weight_key(nu):
    return ",".join(map(str, nu))


def render_free(half, el, pi_spec):
    from .freehalf import render_word

    if not el:
        return "0"
    labels = half.datum.labels
    parts = []
    for w in sorted(el):
        parts.append(f"({scalar_text(el[w], pi_spec)})*{render_word(w, labels)}")
    return " + ".join(parts)


# -- commands ------------------------------------------------------------------


def cmd_validate(args):
    datum, root, params, _ = load_setup(args)
    dv = validate_datum(datum, root)
    pv = validate_params(params, datum)
    data = {"datum_violations": dv, "parameter_violations": pv}
    code = EXIT_OK if not (dv or pv) else EXIT_VALIDATION
    return data, code


def cmd_upsilon(args):
    datum, root, params, height = load_setup(args)
    half = HalfAlgebra(datum, root, height_bound=height)
    ups = quasi.upsilon(half, params, height, check=True)
    data = {}
    for mu in sorted(ups.pieces):
        piece = ups.pieces[mu]
        if piece:
            data[weight_key(mu)] = render_free(half, piece, args.pi)
    return {"pieces": data}, EXIT_OK


def cmd_theta(args):
    datum, root, params, height = load_setup(args)
    half = HalfAlgebra(datum, root, height_bound=height)
    alg = CoveringAlgebra(half)
    th = quasi.theta(alg, height)
    data = {}
    for nu in sorted(th.pieces):
        piece = th.pieces[nu]
        if piece.terms:
            data[weight_key(nu)] = piece.render()
    return {"pieces": data}, EXIT_OK


def cmd_theta_i(args):
    datum, root, params, height = load_setup(args)
    cap = min(height, 4)
    half = HalfAlgebra(datum, root, height_bound=2 * cap + 3)
    alg = CoveringAlgebra(half)
    ti = quasi.theta_i(alg, params, leg2_height=cap + 1, leg1_e_cap=cap + 2)
    data = {}
    for mu in sorted(ti.pieces):
        if sum(mu) <= cap and ti.pieces[mu].terms:
            data[weight_key(mu)] = ti.pieces[mu].render()
    checks = {
        "parity_matched": quasi.thetai_parity_matched(ti),
        "derivation_identity": all(
            quasi.verify_irRt(ti, params, i, cap) for i in range(datum.rank)
        ),
    }
    code = EXIT_OK if all(checks.values()) else EXIT_CHECK
    return {"pieces": data, "checks": checks}, code


def cmd_idp(args):
    datum, root, params, height = load_setup(args)
    half = HalfAlgebra(datum, root, height_bound=max(4, min(height, 6)))
    alg = CoveringAlgebra(half)
    data = {}
    for i in range(datum.rank):
        for m in range(args.max_m + 1):
            for par in (0, 1):
                dp = iqsp.idivided_power(alg, params, i, m, par)
                key = f"i{datum.labels[i]}.m{m}.parity{par}"
                data[key] = iqsp.render_ipoly(dp.poly)
    return {"table": data}, EXIT_OK


def _parse_weight(text, expect_len):
    try:
        coords = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"bad weight {text!r}")
    if len(coords) != expect_len:
        raise UsageError(f"weight needs {expect_len} coordinates")
    return coords


def cmd_module(args):
    datum, root, params, height = load_setup(args)
    lam = _parse_weight(args.weight, root.x_rank)
    half = HalfAlgebra(datum, root, height_bound=max(height, 6))
    L = modules.simple(half, lam, max_height=half.height_bound)
    dims = {}
    for w in L.labels:
        k = weight_key(L.weight[w])
        dims[k] = dims.get(k, 0) + 1
    data = {"dims": dims, "dim": L.dim}
    if datum.rank == 1:
        cb = modules.canonical_basis_rank1(half, L)
        data["canonical_basis"] = {
            f"F({lab[1]})": render_free(half, cb.vectors[lab], args.pi)
            for lab in cb.labels
        }
    return data, EXIT_OK


def cmd_icb(args):
    datum, root, params, height = load_setup(args)
    if datum.rank != 1:
        raise QCoveringError("i-canonical bases are computed in rank one")
    if (args.weight is None) == (args.weights is None):
        raise UsageError("give exactly one of --weight or --weights")
    half_bound = max(height, 10)
    half = HalfAlgebra(datum, root, height_bound=half_bound)
    if args.weight is not None:
        lam = _parse_weight(args.weight, 1)
        L = modules.simple(half, lam)
        based = modules.canonical_basis_rank1(half, L)
        span = lam[0]
        name = f"L({lam[0]})"
    else:
        m, n = _parse_weight(args.weights, 2)
        L1 = modules.simple(half, (m,))
        L2 = modules.simple(half, (n,))
        T = modules.tensor(half, L1, L2)
        based = canonical.cb_tensor(
            half, T,
            modules.canonical_basis_rank1(half, L1),
            modules.canonical_basis_rank1(half, L2),
            check_oracle=args.check_oracle,
        )
        span = m + n
        name = f"L({m})(x)L({n})"
    ups = canonical.upsilon_for(half, params, span)
    icb = canonical.icanonical_basis(based, ups, check_oracle=args.check_oracle)
    data = {"module": name, "elements": {}}
    for lab in icb.labels:
        coords = icb.in_cb_coords[lab]
        data["elements"][_cb_label(lab)] = {
            _cb_label(l2): scalar_text(c, args.pi) for l2, c in coords.items()
        }
    ok = canonical.coefficients_in_lattice(icb)
    data["coefficients_in_lattice"] = ok
    return data, EXIT_OK if ok else EXIT_CHECK


def _cb_label(lab):
    if isinstance(lab, tuple) and len(lab) == 2 and lab[0] == "F":
        return f"F({lab[1]})"
    if isinstance(lab, tuple):
        return "(" + ",".join(_cb_label(x) for x in lab) + ")"
    return str(lab)


def cmd_stabilize(args):
    datum, root, params, height = load_setup(args)
    if datum.rank != 1:
        raise QCoveringError("the stabilization table is a rank-one computation")
    a, b = _parse_weight(args.degrees, 2)
    l0, m0 = _parse_weight(args.base, 2)
    steps = [(l0 + s, m0 + s) for s in range(args.steps)]
    bound = max(height, l0 + m0 + 2 * args.steps)
    half = HalfAlgebra(datum, root, height_bound=bound)
    alg = CoveringAlgebra(half)
    rep = canonical.stabilization(half, alg, params, a, b, steps)
    data = {
        "degree": rep.degree,
        "steps": [list(s) for s in rep.steps],
        "tables": [
            {str(j): scalar_text(c, args.pi) for j, c in t.items()} for t in rep.tables
        ],
        "stable_from": rep.stable_from,
        "window": rep.window,
    }
    return data, EXIT_OK if rep.stabilized else EXIT_CHECK


def cmd_verify(args):
    datum, root, params, height = load_setup(args)
    results = run_suite(datum, root, params, height, seed=args.seed)
    data = {
        "checks": [c.as_json() for c in results],
        "passed": sum(1 for c in results if c.ok and not c.skipped),
        "skipped": sum(1 for c in results if c.skipped),
        "failed": sum(1 for c in results if not c.ok),
    }
    return data, EXIT_OK if data["failed"] == 0 else EXIT_CHECK


COMMANDS = {
    "validate": cmd_validate,
    "upsilon": cmd_upsilon,
    "theta": cmd_theta,
    "theta-i": cmd_theta_i,
    "idp": cmd_idp,
    "module": cmd_module,
    "icb": cmd_icb,
    "stabilize": cmd_stabilize,
    "verify": cmd_verify,
}


# -- report emission -----------------------------------------------------------------


def emit_report(args, data):
    envelope = {
        "command": args.command,
        "datum": args.datum,
        "options": {
            "height": args.height,
            "pi": args.pi,
            "varsigma": args.varsigma,
            "seed": args.seed,
        },
        "data": data,
    }
    if args.format == "json":
        text = json.dumps(envelope, sort_keys=True, indent=2) + "\n"
    elif args.format == "tex":
        text = _tex_report(envelope)
    else:
        text = _text_report(envelope)
    if args.out:
        try:
            with open(args.out, "w") as f:
                f.write(text)
        except OSError as e:
            raise IOFailure(str(e))
    else:
        sys.stdout.write(text)


def _flatten(data, prefix=""):
    rows = []
    if isinstance(data, dict):
        for k in sorted(data, key=str):
            rows.extend(_flatten(data[k], f"{prefix}{k}."))
    elif isinstance(data, list):
        for a, v in enumerate(data):
            rows.extend(_flatten(v, f"{prefix}{a}."))
    else:
        rows.append((prefix[:-1], data))
    return rows


def _text_report(envelope):
    lines = [f"# qcovering {envelope['command']} --datum {envelope['datum']}"]
    for k, v in _flatten(envelope["data"]):
        lines.append(f"{k}: {v}")
    return "\n".join(lines) + "\n"


def _tex_report(envelope):
    # table-only output: paste into any article-class document with
    # \usepackage{longtable}; cells are verbatim to survive ^ and _
    lines = [
        f"% qcovering {envelope['command']} --datum {envelope['datum']}",
        "% requires: \\usepackage{longtable}",
        "\\begin{longtable}{ll}",
    ]
    for k, v in _flatten(envelope["data"]):
        lines.append(f"\\verb|{k}| & \\verb|{v}| \\\\")
    lines.append("\\end{longtable}")
    return "\n".join(lines) + "\n"


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"usage error: {e}\n")
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        data, code = COMMANDS[args.command](args)
        emit_report(args, data)
        return code
    except UsageError as e:
        sys.stderr.write(f"usage error: {e}\n")
        return EXIT_USAGE
    except IOFailure as e:
        sys.stderr.write(f"io error: {e}\n")
        return EXIT_IO
    except QCoveringError as e:
        report = {"error": type(e).__name__, "message": str(e)}
        sys.stderr.write(json.dumps(report, sort_keys=True) + "\n")
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
