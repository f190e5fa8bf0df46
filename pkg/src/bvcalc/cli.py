"""Command-line front-end.

Subcommands: euler, schouten, laplacian, check, example, evaluate.
Exit codes: 0 all checks pass, 1 mathematical failure, 2 usage/parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from fractions import Fraction

from .algebra import Expr
from .cohomology import Functional, functional_equal
from .jetcalc import BvModel, collapse, euler_left, euler_right
from .bv import (
    GEOMETRIC,
    NAIVE,
    check_coboundary_preservation,
    check_cocycle_preservation,
    check_gauge_closure,
    check_laplacian_power,
    check_master_equation,
    check_omega_squared,
    check_schouten_power,
    laplacian,
    omega,
    schouten,
)
from .grammar import ParseError, format_expr, parse_expr, parse_model_file
from .models import (
    LieAlgebraData,
    build_scalar_example,
    build_yang_mills_bv,
    random_functional,
)
from .oracle import FrequencyError, GrassmannNumber, SectionSpec, evaluate

SUITES = (
    "leibniz-1a",
    "laplacian-1b",
    "derivation-1c",
    "delta-squared-1d",
    "jacobi",
    "skew",
    "powers",
    "omega",
    "gauge-closure",
    "cocycles",
)

SCHEMA_VERSION = 1


def _default_seed() -> int:
    env = os.environ.get("BVCALC_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SystemExit(f"bvcalc: invalid BVCALC_SEED {env!r}")
    return 0


def _load_model(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"bvcalc: cannot read model file: {exc}", file=sys.stderr)
        raise SystemExit(2)
    try:
        return parse_model_file(text)
    except ParseError as exc:
        print(f"bvcalc: {path}: {exc}", file=sys.stderr)
        raise SystemExit(2)


def _parse(text: str, model) -> Expr:
    try:
        return parse_expr(text, model)
    except ParseError as exc:
        print(f"bvcalc: {exc}", file=sys.stderr)
        raise SystemExit(2)


def _print_functional(F: Functional, do_collapse: bool):
    F = F.collapse() if do_collapse else F.canonicalize()
    if F.is_zero():
        print("0")
        return
    for blocks in sorted(F.terms, key=lambda bs: tuple(b.key() for b in bs)):
        c = F.terms[blocks]
        from .grammar import format_coefficient
        cs = format_coefficient(c)
        body = " * ".join(f"<{format_expr(b)}>" for b in blocks) or "<vol>"
        print(f"  ({cs}) {body}")


# ---------------------------------------------------------------------------
# simple commands


def cmd_euler(args) -> int:
    model, _ = _load_model(args.model)
    e = _parse(args.expr, model)
    fn = euler_left if args.side == "left" else euler_right
    result = fn(model, e, args.field, args.dagger)
    print(format_expr(result))
    return 0


def cmd_schouten(args) -> int:
    model, _ = _load_model(args.model)
    f = _parse(args.f, model)
    g = _parse(args.g, model)
    F = Functional.from_density(model, f)
    G = Functional.from_density(model, g)
    _print_functional(schouten(F, G, args.mode), args.collapse)
    return 0


def cmd_laplacian(args) -> int:
    model, _ = _load_model(args.model)
    e = _parse(args.expr, model)
    F = Functional.from_density(model, e)
    _print_functional(laplacian(F, args.mode), args.collapse)
    return 0


def cmd_evaluate(args) -> int:
    model, sections = _load_model(args.model)
    e = _parse(args.expr, model)
    if args.section not in sections:
        print(f"bvcalc: no section {args.section!r} in model file", file=sys.stderr)
        return 2
    spec = _build_section(model, sections[args.section])
    F = Functional.from_density(model, e)
    try:
        value = evaluate(F, spec, args.points)
    except FrequencyError as exc:
        print(f"bvcalc: {exc}", file=sys.stderr)
        return 2
    print(f"integral value: {value!r}")
    return 0


def _build_section(model, raw: dict) -> SectionSpec:
    components = {}
    for key, text in raw.items():
        components[key] = _parse_trig_poly(model, text)
    return SectionSpec(model, components)


def _parse_trig_poly(model, text: str):
    """Parse 'c * sin(k x1) * cos(m x2) + ...' with float or g<k> coefficients."""
    import re

    terms = []
    for chunk in re.split(r"(?=[+-])", text.replace(" ", "")):
        if not chunk or chunk in "+-":
            continue
        sign = -1.0 if chunk.startswith("-") else 1.0
        chunk = chunk.lstrip("+-")
        coeff = GrassmannNumber.scalar(sign)
        factors = [("one", 0)] * model.base_dim
        for factor in chunk.split("*"):
            if not factor:
                continue
            m = re.fullmatch(r"(sin|cos)\((\d*)x(\d+)\)", factor)
            if m:
                freq = int(m.group(2)) if m.group(2) else 1
                coord = int(m.group(3)) - 1
                if not 0 <= coord < model.base_dim:
                    raise ParseError(f"coordinate x{coord + 1} out of range")
                factors[coord] = (m.group(1), freq)
                continue
            m = re.fullmatch(r"g(\d+)", factor)
            if m:
                coeff = coeff * GrassmannNumber.generator(int(m.group(1)) - 1)
                continue
            try:
                coeff = coeff.scale(float(Fraction(factor)))
            except ValueError:
                raise ParseError(f"bad section factor {factor!r}")
        terms.append((coeff, tuple(factors)))
    return terms


# ---------------------------------------------------------------------------
# identity suites


def _suite_model() -> BvModel:
    return BvModel(1, [("q", 0)])


def _case_result(index, seed, passed, extra=None):
    out = {"case": index, "seed": seed, "passed": bool(passed)}
    if extra:
        out.update(extra)
    return out


def run_suite(suite: str, cases: int, seed: int, max_order: int,
              mode: str = GEOMETRIC, scalar_pair: bool = False):
    """Run one named identity suite; returns (passed, result dicts)."""
    model = _suite_model()
    results = []
    rng = random.Random(seed)

    def rf(parity, case_seed, blocks=1):
        return random_functional(model, max_order, 3, parity, case_seed,
                                 n_blocks=blocks)

    if suite == "derivation-1c" and scalar_pair:
        smodel, F, G = build_scalar_example()
        res = _check_1c(smodel, F, G, mode)
        results.append(_case_result(0, seed, res["collapse"], res))
        return all(r["passed"] for r in results), results

    for i in range(cases):
        cs = seed * 10_000 + i
        r = random.Random(cs)
        if suite == "skew":
            F = rf(r.randint(0, 1), cs + 1)
            G = rf(r.randint(0, 1), cs + 2)
            e = ((F.parity() - 1) * (G.parity() - 1)) & 1
            s, t = schouten(F, G, mode), schouten(G, F, mode)
            tot = s + (t if e == 0 else -t)
            ok = functional_equal(tot, Functional.zero(model), "structural")
            results.append(_case_result(i, cs, ok))
        elif suite == "leibniz-1a":
            F, G, H = rf(r.randint(0, 1), cs + 1), rf(r.randint(0, 1), cs + 2), rf(r.randint(0, 1), cs + 3)
            pF, pG = F.parity(), G.parity()
            lhs = schouten(F, G * H, mode)
            rhs = schouten(F, G, mode) * H + (G * schouten(F, H, mode)).scale(
                (-1) ** (((pF - 1) * pG) & 1))
            ok = functional_equal(lhs, rhs, "structural")
            results.append(_case_result(i, cs, ok))
        elif suite == "laplacian-1b":
            F, G = rf(r.randint(0, 1), cs + 1), rf(r.randint(0, 1), cs + 2)
            pF = F.parity()
            lhs = laplacian(F * G, mode)
            sgn = (-1) ** (pF & 1)
            rhs = laplacian(F, mode) * G + schouten(F, G, mode).scale(sgn) + (
                F * laplacian(G, mode)).scale(sgn)
            ok = functional_equal(lhs, rhs, "structural")
            results.append(_case_result(i, cs, ok))
        elif suite == "derivation-1c":
            F, G = rf(r.randint(0, 1), cs + 1), rf(r.randint(0, 1), cs + 2)
            res = _check_1c(model, F, G, mode)
            results.append(_case_result(i, cs, res["collapse"], res))
        elif suite == "delta-squared-1d":
            F = rf(r.randint(0, 1), cs + 1, blocks=r.choice((1, 2)))
            d2 = laplacian(laplacian(F, mode), mode)
            ok = functional_equal(d2, Functional.zero(model), "collapse")
            structural = ok and functional_equal(
                d2, Functional.zero(model), "structural")
            results.append(_case_result(i, cs, ok, {"structural": structural}))
        elif suite == "jacobi":
            F, G, H = rf(r.randint(0, 1), cs + 1), rf(r.randint(0, 1), cs + 2), rf(r.randint(0, 1), cs + 3)
            pF, pG, pH = F.parity(), G.parity(), H.parity()
            j = (schouten(F, schouten(G, H, mode), mode).scale((-1) ** (((pF - 1) * (pH - 1)) & 1))
                 + schouten(G, schouten(H, F, mode), mode).scale((-1) ** (((pF - 1) * (pG - 1)) & 1))
                 + schouten(H, schouten(F, G, mode), mode).scale((-1) ** (((pG - 1) * (pH - 1)) & 1)))
            ok = functional_equal(j, Functional.zero(model), "collapse")
            results.append(_case_result(i, cs, ok))
        elif suite == "powers":
            F = rf(0, cs + 1)
            G = rf(r.randint(0, 1), cs + 2)
            ok = True
            for n in (1, 2, 3, 4):
                ok = ok and bool(check_schouten_power(G, F, n, mode))
            for n in (2, 3, 4):
                ok = ok and bool(check_laplacian_power(F, n, mode))
            results.append(_case_result(i, cs, ok))
        elif suite == "omega":
            O = rf(0, cs + 1)
            S = rf(0, cs + 2)
            rep = check_omega_squared(O, S, mode)
            results.append(_case_result(i, cs, rep.data["agrees"]))
        elif suite == "gauge-closure":
            S = Functional.from_density(
                model, model.jet("q", dagger=True) * model.jet("q"))
            F1 = rf(1, cs + 1)
            F2 = rf(1, cs + 2)
            rep = check_gauge_closure(F1, F2, S, mode)
            results.append(_case_result(i, cs, rep.passed))
        elif suite == "cocycles":
            S = rf(0, cs + 4)
            O = rf(0, cs + 1)
            F = rf(1, cs + 2)
            xi = rf(1, cs + 3)
            ok = bool(check_cocycle_preservation(O, F, S, mode)) and bool(
                check_coboundary_preservation(xi, F, S, mode))
            results.append(_case_result(i, cs, ok))
        else:
            raise SystemExit(f"bvcalc: unknown suite {suite!r}")
    return all(r["passed"] for r in results), results


def _check_1c(model, F, G, mode):
    pF = F.parity()
    L = laplacian(schouten(F, G, mode), mode)
    R = schouten(laplacian(F, mode), G, mode) + schouten(
        F, laplacian(G, mode), mode).scale((-1) ** ((pF - 1) & 1))
    structural = functional_equal(L, R, "structural")
    collapse_ok = functional_equal(L, R, "collapse")
    out = {"structural": structural, "collapse": collapse_ok}
    if not collapse_ok:
        diff = (L - R).collapse()
        out["discrepancy"] = repr(diff)
    return out


def cmd_check(args) -> int:
    t0 = time.time()
    passed, results = run_suite(
        args.suite, args.cases, args.seed, args.max_order,
        mode=args.mode, scalar_pair=args.scalar_pair,
    )
    structural_rate = None
    if args.suite == "derivation-1c":
        n = len(results)
        structural_rate = sum(1 for r in results if r.get("structural")) / n if n else 1.0
    payload = {
        "schema": SCHEMA_VERSION,
        "suite": args.suite,
        "mode": args.mode,
        "cases": len(results),
        "seed": args.seed,
        "max_order": args.max_order,
        "passed": passed,
        "failures": sum(1 for r in results if not r["passed"]),
        "elapsed_s": round(time.time() - t0, 3),
        "results": results,
    }
    if structural_rate is not None:
        payload["structural_pass_rate"] = structural_rate
    if args.json:
        print(json.dumps(payload, indent=2, default=str))
    else:
        print(f"suite {args.suite} ({args.mode}): "
              f"{payload['cases'] - payload['failures']}/{payload['cases']} passed "
              f"in {payload['elapsed_s']}s")
        if structural_rate is not None:
            print(f"  structural pass rate: {structural_rate:.2f}")
        for r in results:
            if not r["passed"]:
                print(f"  FAIL case {r['case']} (seed {r['seed']})")
                if "discrepancy" in r:
                    print(f"    discrepancy density: {r['discrepancy']}")
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# worked examples


def cmd_example(args) -> int:
    if args.which == "scalar":
        return _example_scalar(args)
    return _example_ym(args)


def _example_scalar(args) -> int:
    model, F, G = build_scalar_example()
    fd = next(iter(F.blocks()))
    gd = next(iter(G.blocks()))
    lines = []
    ok = True

    ef = euler_left(model, fd, "q")
    eg = euler_left(model, gd, "q")
    lines.append(f"delta F / delta q = {format_expr(ef)}")
    lines.append(f"delta G / delta q = {format_expr(eg)}")
    expected_eg = -(model.jet("q", (2,), dagger=True) * model.sin("q"))
    ok &= (eg == expected_eg)

    dF = laplacian(F)
    dG = laplacian(G)
    lines.append(f"Delta F (structured) = {repr(dF.canonicalize())}")
    lines.append(f"Delta G (structured) = {repr(dG.canonicalize())}")

    bracket_dFG = schouten(dF, G)
    lines.append(f"[[Delta F, G]] = {repr(bracket_dFG)}")
    ok &= bracket_dFG.is_zero()

    L = laplacian(schouten(F, G))
    R = schouten(F, dG) + bracket_dFG
    structural = functional_equal(L, R, "structural")
    cohomological = functional_equal(L, R, "collapse")
    ok &= structural and cohomological
    lines.append(f"Delta[[F,G]] (canonical) = {repr(L.canonicalize())}")
    lines.append(f"[[F,Delta G]] + [[Delta F,G]] (canonical) = {repr(R.canonicalize())}")
    lines.append(f"collapsed common value = {repr(L.collapse())}")

    nL = laplacian(schouten(F, G, NAIVE), NAIVE)
    nR = schouten(laplacian(F, NAIVE), G, NAIVE) + schouten(F, laplacian(G, NAIVE), NAIVE)
    naive_bracket = schouten(F, laplacian(G, NAIVE), NAIVE)
    naive_holds = functional_equal(nL, nR, "collapse")
    lines.append(f"naive [[F,Delta G]] = {repr(naive_bracket)}")
    lines.append(f"naive mode satisfies the derivation identity: {naive_holds}")
    if not naive_holds:
        lines.append(f"naive discrepancy density = {repr((nL - nR).collapse())}")
    ok &= (not naive_holds) and naive_bracket.is_zero()

    verdict = (f"LHS {'=' if structural else '!='} RHS (structural) ; "
               f"LHS {'~' if cohomological else '!~'} RHS (cohomological)")
    lines.append(verdict)
    if args.json:
        print(json.dumps({"schema": SCHEMA_VERSION, "example": "scalar",
                          "passed": bool(ok), "lines": lines}, indent=2))
    else:
        for line in lines:
            print(line)
    return 0 if ok else 1


def _example_ym(args) -> int:
    algebra = LieAlgebraData.su2()
    n = args.dim
    model, S = build_yang_mills_bv(algebra, n)
    lines = [f"su(2) Yang-Mills over a {n}-dimensional base; "
             f"{len(model.fields)} field pairs"]
    ok = True

    dS = laplacian(S)
    lines.append(f"Delta(S_BV) = {'0' if dS.is_zero() else repr(dS)} (exact)")
    ok &= dS.is_zero()

    # the diagonal trace pattern behind Delta(S_BV) = 0
    lines.append("cancellation pattern: the A-sector contributes the trace "
                 "f^d_dc gam^c and the ghost sector -f^d_db gam^b; both vanish "
                 "for traceless structure constants")

    ss = schouten(S, S).collapse()
    bad = []
    for blocks, _ in ss.terms.items():
        for b in blocks:
            for name, dagger in model.variables():
                if not euler_left(model, b, name, dagger).is_zero():
                    bad.append((name, dagger))
    lines.append("classical master equation: every Euler operator of the "
                 f"collapsed [[S,S]] vanishes: {not bad}")
    ok &= not bad

    rep = check_master_equation(S)
    lines.extend("  " + l for l in rep.lines)
    lines.append(f"quantum master-equation report: {'PASS' if rep.passed else 'FAIL'}")
    ok &= rep.passed

    if args.json:
        print(json.dumps({"schema": SCHEMA_VERSION, "example": "ym-su2",
                          "passed": bool(ok), "lines": lines}, indent=2))
    else:
        for line in lines:
            print(line)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bvcalc",
        description="variational Schouten bracket and BV-Laplacian calculator",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("euler", help="variational derivative of a density")
    pe.add_argument("model")
    pe.add_argument("--expr", required=True)
    pe.add_argument("--field", required=True)
    pe.add_argument("--dagger", action="store_true")
    pe.add_argument("--side", choices=("left", "right"), default="left")
    pe.set_defaults(func=cmd_euler)

    ps = sub.add_parser("schouten", help="variational Schouten bracket")
    ps.add_argument("model")
    ps.add_argument("--f", required=True)
    ps.add_argument("--g", required=True)
    ps.add_argument("--mode", choices=(GEOMETRIC, NAIVE), default=GEOMETRIC)
    ps.add_argument("--collapse", action="store_true")
    ps.set_defaults(func=cmd_schouten)

    pl = sub.add_parser("laplacian", help="BV-Laplacian of a density")
    pl.add_argument("model")
    pl.add_argument("--expr", required=True)
    pl.add_argument("--mode", choices=(GEOMETRIC, NAIVE), default=GEOMETRIC)
    pl.add_argument("--collapse", action="store_true")
    pl.set_defaults(func=cmd_laplacian)

    pc = sub.add_parser("check", help="run an identity suite")
    pc.add_argument("suite", choices=SUITES)
    pc.add_argument("--cases", type=int, default=100)
    pc.add_argument("--seed", type=int, default=_default_seed())
    pc.add_argument("--max-order", type=int, default=2)
    pc.add_argument("--mode", choices=(GEOMETRIC, NAIVE), default=GEOMETRIC)
    pc.add_argument("--scalar-pair", action="store_true",
                    help="restrict derivation-1c to the worked scalar pair")
    pc.add_argument("--json", action="store_true")
    pc.set_defaults(func=cmd_check)

    px = sub.add_parser("example", help="reproduce a worked computation")
    px.add_argument("which", choices=("scalar", "ym-su2"))
    px.add_argument("--dim", type=int, default=4,
                    help="base dimension for ym-su2")
    px.add_argument("--json", action="store_true")
    px.set_defaults(func=cmd_example)

    pv = sub.add_parser("evaluate", help="numeric value at a section")
    pv.add_argument("model")
    pv.add_argument("--expr", required=True)
    pv.add_argument("--section", required=True)
    pv.add_argument("--points", type=int, default=32)
    pv.set_defaults(func=cmd_evaluate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except ParseError as exc:
        print(f"bvcalc: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"bvcalc: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
