"""
BRST Reduction - Command Line Interface

Usage:
    python -m brst_reduction verify --n 1
    python -m brst_reduction reduce-product --n 1 --u h11 --v h12 --order 2
    python -m brst_reduction kirwan --n 1 --class omega-J
    python -m brst_reduction equivalence-check --n 1 --c 1 --order 1
    python -m brst_reduction main-theorem --n 1 --c 1

Exit codes: 0 all checks PASS, 1 any FAIL, 2 usage error.
"""

import argparse
import json
import logging
import random
import sys
import time
from pathlib import Path
from tokenize import TokenError

import sympy as sp
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from .cartan import (
    EquivariantForm,
    classes_equal,
    contraction_suite,
    d_equivariant,
    exact_samples,
    kirwan,
)
from .config import Settings, load_settings
from .errors import (
    DegreeBoundExceeded,
    ExpressionParseError,
    NotClosedError,
    NotEquivariantError,
    NotInvariantError,
    ReductionError,
    UnsupportedScenarioError,
)
from .geometry import PolyForm
from .koszul import delta, h0, iota_star, koszul_suite, prolong
from .qreduction import (
    I_star,
    ReducedFunction,
    fubini_study_bracket,
    in_normalizer,
    parse_reduced,
    quantized_koszul_suite,
    reduce_equivalence,
    reduced_product_suite,
    reduced_product_table,
    reduced_star,
)
from .report import FAIL, PASS, CheckResult, RunReport, validate_descriptor, validate_report
from .ring import format_scalar, to_scalar
from .scenario import Scenario, axiom_suite, build_scenario, canonical_point, chart_homotopy_defect
from .series import NuSeries
from .starprod import GaugeEquivalence, find_equivalence, verify_intertwining, verify_qmm

logger = logging.getLogger("brst_reduction.cli")

USAGE_ERRORS = (
    UnsupportedScenarioError,
    ExpressionParseError,
    NotInvariantError,
    NotEquivariantError,
    NotClosedError,
    DegreeBoundExceeded,
)

BUILTIN_CLASSES = ("omega-J", "e*", "dg-exact")


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------

def parse_kappa(text: str | None, order: int) -> NuSeries | None:
    """κ as a polynomial in nu with Gaussian rational coefficients, e.g. "1", "nu", "1/2 + nu"."""
    if text is None:
        return None
    nu = sp.Symbol("nu")
    try:
        expr = parse_expr(text, local_dict={"nu": nu}, transformations=standard_transformations + (convert_xor,))
        unknown = {str(s) for s in expr.free_symbols} - {"nu"}
        if unknown:
            raise ExpressionParseError(f"Unknown identifiers in kappa {text!r}: {', '.join(sorted(unknown))}")
        poly = sp.Poly(sp.expand(expr), nu)
    except (SyntaxError, TokenError, TypeError, ValueError, sp.SympifyError, sp.PolynomialError) as exc:
        if isinstance(exc, ExpressionParseError):
            raise
        raise ExpressionParseError(f"Cannot parse kappa {text!r}: {exc}") from exc
    return NuSeries({k: to_scalar(c) for (k,), c in poly.terms()}, order)


def parse_rational(text: str | None, default="0"):
    try:
        return to_scalar(text if text is not None else default)
    except (ValueError, ZeroDivisionError) as exc:
        raise ExpressionParseError(f"Not a rational number: {text!r}") from exc


def _form_from_json(scenario: Scenario, data: list) -> PolyForm:
    ring = scenario.ring
    names = {"d" + ring.coordinate_name(j): j for j in range(ring.nvars)}
    terms = {}
    for term in data:
        try:
            key = tuple(names[name] for name in term["dx"])
        except KeyError as exc:
            raise ExpressionParseError(f"unknown differential {exc}") from exc
        terms[key] = ring.from_json(term["coefficient"])
    return PolyForm(ring, terms)


def equivariant_form_from_json(scenario: Scenario, data: list) -> EquivariantForm:
    """Inverse of EquivariantForm.to_json."""
    if not isinstance(data, list):
        raise ExpressionParseError("an equivariant form is a list of {sym_monomial, form} objects")
    terms = {}
    try:
        for entry in data:
            terms[tuple(entry["sym_monomial"])] = _form_from_json(scenario, entry["form"])
        return EquivariantForm(scenario.ring, scenario.lie.dimension, terms)
    except (KeyError, TypeError, ValueError) as exc:
        raise ExpressionParseError(f"malformed equivariant form: {exc}") from exc


def resolve_class(scenario: Scenario, spec: str, c, order: int):
    """A built-in closed equivariant form, or a JSON form given inline or as a file path."""
    if spec == "omega-J":
        return scenario.equivariant_symplectic_form(c, order)
    if spec == "e*":
        return EquivariantForm.generator(scenario.ring)
    if spec in ("dg-exact", "d_g-exact sample"):
        return d_equivariant(exact_samples(scenario.ring)[0], scenario.connection)
    text = spec
    if not spec.lstrip().startswith("["):
        path = Path(spec)
        if not path.exists():
            raise ExpressionParseError(
                f"unknown class {spec!r}; use one of {', '.join(BUILTIN_CLASSES)} or a JSON form")
        text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ExpressionParseError(f"invalid JSON form: {exc}") from exc
    return equivariant_form_from_json(scenario, data)


def _timed(fn, *args, **kwargs):
    start = time.perf_counter()
    value = fn(*args, **kwargs)
    return value, time.perf_counter() - start


def _suite_result(name: str, suite, *args, **certificate) -> CheckResult:
    (checked, failures), seconds = _timed(suite, *args)
    return CheckResult.from_failures(name, checked, failures, certificate=certificate, seconds=seconds)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _fuzz_functions(scenario: Scenario, rng: random.Random, count: int = 8, degree: int = 4) -> list:
    """Random charge-0 polynomials with small integer coefficients."""
    ring = scenario.ring
    monomials = [e for d in range(0, degree + 1, 2) for e in ring.coordinate_monomials(d, charge=0)]
    functions = []
    for _ in range(count):
        f = ring.zero
        for exps in rng.sample(monomials, min(3, len(monomials))):
            f = f + ring.from_poly(ring.monomial(exps)) * rng.randint(-3, 3)
        functions.append(f)
    return functions


def cmd_verify(scenario: Scenario, args, settings: Settings) -> RunReport:
    report = RunReport("verify", scenario.descriptor(), timing=args.timing)
    suite_degree = min(6, settings.degree_bound)
    order = settings.nu_order

    report.add(CheckResult.from_failures("scenario_axioms", 1, axiom_suite(scenario)))
    star = scenario.star_product(order)
    report.add(CheckResult.from_failures("star_conventions", 1, star.check_conventions(scenario.symplectic)))
    qmm_report, seconds = _timed(verify_qmm, scenario.quantum_momentum_map(0, order), star,
                                 scenario.symplectic, min(3, suite_degree))
    report.add(CheckResult("quantum_momentum_map", qmm_report.status, qmm_report.checked,
                           qmm_report.failures, seconds=seconds))

    report.add(_suite_result("koszul", koszul_suite, scenario.momentum, scenario.symplectic.fundamental_fields,
                             suite_degree, degree_bound=suite_degree))
    point = canonical_point(scenario.ring)
    chart_failures = []
    tests = [scenario.ring.z_element(1) * scenario.ring.zb_element(1), scenario.momentum,
             scenario.ring.z_element(1) * scenario.ring.s]
    for f in tests:
        chart_failures += chart_homotopy_defect(f, scenario.momentum, point)
    report.add(CheckResult.from_failures("chart_homotopy", len(tests), chart_failures))

    cfg = scenario.koszul_config(0, parse_kappa(args.kappa, order), order)
    koszul_degree = settings.koszul_suite_degree
    report.add(_suite_result("quantized_koszul", quantized_koszul_suite, cfg, koszul_degree,
                             degree_bound=koszul_degree, order=order))
    report.add(_suite_result("contraction", contraction_suite, scenario.connection, scenario.ideal, 3, 3,
                             min(4, suite_degree), sym_degree=3, form_degree=3,
                             coefficient_degree=min(4, suite_degree)))

    normalizer_bound = min(settings.normalizer_degree_bound, 2)
    h11 = prolong(iota_star(scenario.ring.z_element(1) * scenario.ring.zb_element(1) * scenario.ring.w))
    member, seconds = _timed(in_normalizer, h11, cfg, normalizer_bound)
    report.add(CheckResult("normalizer_contains_invariants", PASS if member else FAIL, 1,
                           [] if member else [{"witness": str(h11)}],
                           certificate={"degree_bound": normalizer_bound}, seconds=seconds))

    report.add(_cartan_corollary(scenario, settings))
    product_order = min(3, order)
    product_degree = settings.reduced_product_degree
    report.add(_suite_result("reduced_product", reduced_product_suite, cfg, product_degree, product_order,
                             degree=product_degree, order=product_order))

    if args.fuzz:
        rng = random.Random(settings.seed)
        failures = []
        functions = _fuzz_functions(scenario, rng)
        for f in functions:
            u = iota_star(f)
            if I_star(prolong(u), cfg) != NuSeries.constant(u, order):
                failures.append({"identity": "I_star_prol", "witness": str(f)})
            chain = delta(h0(f, scenario.momentum), [scenario.momentum]).component(zero=scenario.ring.zero)
            if prolong(u) + chain != f:
                failures.append({"identity": "koszul_homotopy", "witness": str(f)})
        report.add(CheckResult.from_failures("fuzz", 2 * len(functions), failures,
                                             certificate={"seed": settings.seed}))
    return report


def _cartan_corollary(scenario: Scenario, settings: Settings) -> CheckResult:
    """K(ω − J) = ι*ω, K(e^*) = −dθ, K(d_g β) exact and the surjectivity witness."""
    start = time.perf_counter()
    connection, ideal = scenario.connection, scenario.ideal
    failures = []
    omega_red = scenario.reduced_symplectic_form()
    if kirwan(scenario.equivariant_symplectic_form(), connection, ideal) != omega_red:
        failures.append({"identity": "kirwan_omega_minus_J"})
    if kirwan(EquivariantForm.generator(scenario.ring), connection, ideal) != -scenario.curvature():
        failures.append({"identity": "kirwan_generator"})
    exact_bound = min(4, settings.degree_bound)
    zero = PolyForm.zero(scenario.ring)
    for beta in exact_samples(scenario.ring):
        image = kirwan(d_equivariant(beta, connection), connection, ideal)
        if not classes_equal(image, zero, ideal, exact_bound).equal:
            failures.append({"identity": "kirwan_exact", "witness": repr(beta)})
    surjectivity = classes_equal(omega_red, zero, ideal, settings.degree_bound)
    if surjectivity.equal != (scenario.n == 0):
        failures.append({"identity": "surjectivity", "witness": surjectivity.label()})
    return CheckResult.from_failures(
        "cartan_corollary", 3 + len(exact_samples(scenario.ring)), failures,
        certificate={"degree_bound": settings.degree_bound},
        data={"omega_red_vs_zero": surjectivity.label()},
        seconds=time.perf_counter() - start)


def _series_json(series: NuSeries) -> list[dict]:
    return [{"k": k, "value": str(f.normal_form), "terms": f.normal_form.to_json()} for k, f in series.items()]


def cmd_reduce_product(scenario: Scenario, args, settings: Settings) -> RunReport:
    if args.u is None or args.v is None:
        raise ExpressionParseError("reduce-product needs --u and --v")
    order = settings.nu_order
    cfg = scenario.koszul_config(parse_rational(args.c), parse_kappa(args.kappa, order), order)
    u = parse_reduced(args.u, scenario.ring, scenario.symplectic)
    v = parse_reduced(args.v, scenario.ring, scenario.symplectic)
    report = RunReport("reduce-product", scenario.descriptor(), timing=args.timing)
    series, seconds = _timed(reduced_star, u, v, cfg, order)
    if series.truncated:
        logger.warning("u ⋆_red v was truncated at order %d", order)
    report.add(CheckResult("reduced_product", PASS, 1, seconds=seconds, data={
        "u": args.u, "v": args.v, "order": order, "truncated": series.truncated,
        "series": _series_json(series)}))
    zero = ReducedFunction(scenario.ring.zero)
    pointwise = series.coefficient(0, zero) == u * v
    report.add(CheckResult("order_zero_pointwise", PASS if pointwise else FAIL, 1,
                           [] if pointwise else [{"witness": str(series.coefficient(0, zero))}]))
    if order >= 1:
        bracket = series.coefficient(1, zero) - reduced_star(v, u, cfg, 1).coefficient(1, zero)
        ok = bracket == fubini_study_bracket(u, v, scenario.symplectic)
        report.add(CheckResult("order_one_bracket", PASS if ok else FAIL, 1,
                               [] if ok else [{"witness": str(bracket)}]))
    return report


def _class_comparisons(scenario: Scenario, representative: PolyForm, degree_bound: int, prefix: str) -> list:
    zero = PolyForm.zero(scenario.ring)
    results = []
    for target, form in (("reduced_omega", scenario.reduced_symplectic_form()),
                         ("curvature", scenario.curvature()), ("zero", zero)):
        comparison, seconds = _timed(classes_equal, representative, form, scenario.ideal, degree_bound)
        results.append(CheckResult(f"{prefix}class_vs_{target}", PASS, comparison.unknowns,
                                   certificate={"degree_bound": degree_bound},
                                   data={"verdict": comparison.label()}, seconds=seconds))
    return results


def cmd_kirwan(scenario: Scenario, args, settings: Settings) -> RunReport:
    c = parse_rational(args.c)
    alpha = resolve_class(scenario, args.class_spec, c, settings.nu_order)
    report = RunReport("kirwan", scenario.descriptor(), timing=args.timing)
    image, seconds = _timed(kirwan, alpha, scenario.connection, scenario.ideal)
    degree_bound = settings.degree_bound
    if isinstance(image, NuSeries):
        report.add(CheckResult("kirwan", PASS, 1, seconds=seconds, data={
            "class": args.class_spec,
            "representative": [{"k": k, "form": form.to_json()} for k, form in image.items()]}))
        for k, form in image.items():
            for result in _class_comparisons(scenario, form, degree_bound, f"order_{k}_"):
                report.add(result)
    else:
        report.add(CheckResult("kirwan", PASS, 1, seconds=seconds, data={
            "class": args.class_spec, "representative": image.to_json()}))
        for result in _class_comparisons(scenario, image, degree_bound, ""):
            report.add(result)
    return report


def _equivalence_bounds(args, settings: Settings) -> tuple[int, int]:
    class_order = 1 if args.order is None else args.order
    degree_bound = settings.equivalence_degree_bound if args.degree_bound is None else args.degree_bound
    return class_order, degree_bound


def _reduced_tables(scenario: Scenario, c1, c2, degree_bound: int, order: int, kappa):
    cfg1 = scenario.koszul_config(c1, kappa, order)
    cfg2 = scenario.koszul_config(c2, kappa, order)
    t1 = reduced_product_table(cfg1, degree_bound, order, label=f"c={format_scalar(c1)}")
    t2 = t1 if c1 == c2 else reduced_product_table(cfg2, degree_bound, order, label=f"c={format_scalar(c2)}")
    return cfg2, t1, t2


def cmd_equivalence_check(scenario: Scenario, args, settings: Settings) -> RunReport:
    class_order, degree_bound = _equivalence_bounds(args, settings)
    order = class_order + 1
    c1, c2 = parse_rational(args.c), parse_rational(args.c2)
    report = RunReport("equivalence-check", scenario.descriptor(), timing=args.timing)
    (cfg2, t1, t2), seconds = _timed(_reduced_tables, scenario, c1, c2, degree_bound, order,
                                     parse_kappa(args.kappa, order))
    result, search_seconds = _timed(find_equivalence, t1, t2, class_order)
    failures = verify_intertwining(result.operator, t1, t2) if result.found else []
    report.add(CheckResult.from_failures(
        "equivalence_search", len(t1.pairs()), failures,
        certificate={"order": class_order, "degree_bound": degree_bound},
        data=result.to_json(), seconds=seconds + search_seconds))
    if args.gauge is not None:
        b = scenario.ring.from_expr(args.gauge)
        T = GaugeEquivalence(scenario.symplectic, b, order)
        reduced, seconds = _timed(reduce_equivalence, T, cfg2, degree_bound, order)
        failures = verify_intertwining(reduced, t2, t2)
        report.add(CheckResult.from_failures(
            "gauge_transfer", len(t2.pairs()), failures,
            certificate={"order": order, "degree_bound": degree_bound},
            data={"generator": str(b), "operator": reduced.to_json()}, seconds=seconds))
    return report


def _expects_equivalence(scenario: Scenario, c) -> bool:
    """Whether the shifted and unshifted reductions should be equivalent.

    The curvature class is nonzero in H²(ℂPⁿ) for n ≥ 1, and H² of a point
    vanishes.
    """
    return not c or scenario.n == 0


def cmd_main_theorem(scenario: Scenario, args, settings: Settings) -> RunReport:
    c = parse_rational(args.c, default="1")
    class_order, degree_bound = _equivalence_bounds(args, settings)
    report = RunReport("main-theorem", scenario.descriptor(), timing=args.timing)
    equivalent = _expects_equivalence(scenario, c)

    image, seconds = _timed(kirwan, scenario.equivariant_symplectic_form(c, 1) if c else
                            NuSeries.constant(scenario.equivariant_symplectic_form(), 1),
                            scenario.connection, scenario.ideal)
    expected = NuSeries({0: scenario.reduced_symplectic_form(), 1: scenario.curvature() * c}, 1)
    ok = image == expected
    report.add(CheckResult("kirwan_characteristic_class", PASS if ok else FAIL, 1,
                           [] if ok else [{"witness": repr(image)}], seconds=seconds,
                           data={"c": format_scalar(c)}))

    zero = PolyForm.zero(scenario.ring)
    comparison, seconds = _timed(classes_equal, image.coefficient(1, zero), zero, scenario.ideal,
                                 settings.degree_bound)
    ok = comparison.equal == equivalent
    witness = {"witness": comparison.label(), "expected": "EQUAL" if equivalent else "NOT_EQUAL"}
    report.add(CheckResult("class_difference", PASS if ok else FAIL, comparison.unknowns,
                           [] if ok else [witness],
                           certificate={"degree_bound": settings.degree_bound},
                           data={"verdict": comparison.label()}, seconds=seconds))

    order = class_order + 1
    (_, t1, t2), seconds = _timed(_reduced_tables, scenario, c, to_scalar(0), degree_bound, order,
                                  parse_kappa(args.kappa, order))
    result, search_seconds = _timed(find_equivalence, t1, t2, class_order)
    ok = result.found == equivalent
    witness = {"witness": result.status, "expected": "FOUND" if equivalent else "NONE_UP_TO"}
    report.add(CheckResult("equivalence_search", PASS if ok else FAIL, len(t1.pairs()),
                           [] if ok else [witness],
                           certificate={"order": class_order, "degree_bound": degree_bound},
                           data=result.to_json(), seconds=seconds + search_seconds))

    consistent = comparison.equal == result.found
    report.add(CheckResult("consistency", PASS if consistent else FAIL, 1,
                           [] if consistent else [{"witness": f"{comparison.label()} vs {result.status}"}],
                           data={"class": comparison.label(), "equivalence": result.status}))
    return report


COMMANDS = {
    "verify": cmd_verify,
    "reduce-product": cmd_reduce_product,
    "kirwan": cmd_kirwan,
    "equivalence-check": cmd_equivalence_check,
    "main-theorem": cmd_main_theorem,
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=1, help="Scenario: M = C^(n+1), n in {0, 1, 2}.")
    common.add_argument("--order", type=int, help="Truncation order in nu (class order for equivalence verbs).")
    common.add_argument("--degree-bound", type=int, help="Polynomial degree bound.")
    output = common.add_mutually_exclusive_group()
    output.add_argument("--json", dest="output", action="store_const", const="json", help="JSON report (default).")
    output.add_argument("--text", dest="output", action="store_const", const="text", help="Plain text report.")
    common.add_argument("--kappa", help="Modular-class shift kappa, a polynomial in nu.")
    common.add_argument("--fuzz", action="store_true", help="Add seeded random samples to the property suites.")
    common.add_argument("--seed", type=int, help="Seed for --fuzz (default: BRST_SEED).")
    common.add_argument("--timing", action="store_true", help="Include wall-clock timings in the report.")
    common.add_argument("--log-level", help="Logging level (default: BRST_LOG_LEVEL or WARNING).")
    common.add_argument("--config", help="YAML settings file (default: BRST_CONFIG or data/defaults.yaml).")
    common.set_defaults(output="json")

    parser = argparse.ArgumentParser(prog="brst_reduction",
                                     description="BRST quantum reduction and Kirwan map checks on Hopf scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="Run all property suites.")
    p = sub.add_parser("reduce-product", parents=[common], help="Expand u ⋆_red v.")
    p.add_argument("--u", help="Expression in h<j><k>, rationals, + - * ^.")
    p.add_argument("--v", help="Expression in h<j><k>, rationals, + - * ^.")
    p.add_argument("--c", help="Quantum momentum map shift: J + nu*c (default 0).")
    p = sub.add_parser("kirwan", parents=[common], help="Kirwan map of an equivariant class.")
    p.add_argument("--class", dest="class_spec", default="omega-J",
                   help=f"One of {', '.join(BUILTIN_CLASSES)}, inline JSON or a JSON file.")
    p.add_argument("--c", help="Shift c in omega - (J + nu*c) (default 0).")
    p = sub.add_parser("equivalence-check", parents=[common], help="Search an equivalence of reduced products.")
    p.add_argument("--c", help="Shift of the first product (default 0).")
    p.add_argument("--c2", help="Shift of the second product (default 0).")
    p.add_argument("--gauge", help="Generator b of exp(nu{b, .}) to transfer to the reduced space.")
    p = sub.add_parser("main-theorem", parents=[common], help="Characteristic class desk check.")
    p.add_argument("--c", help="Shift c in J + nu*c (default 1).")
    return parser


def _resolve_settings(args) -> Settings:
    settings = load_settings(args.config)
    overrides = {"log_level": args.log_level.upper() if args.log_level else None, "seed": args.seed}
    if args.command in ("verify", "reduce-product", "kirwan"):
        overrides["nu_order"] = args.order
        overrides["degree_bound"] = args.degree_bound
    return settings.with_overrides(**overrides)


def _emit(args, data: dict, text: str) -> None:
    if args.output == "text":
        print(text)
    else:
        print(json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = _resolve_settings(args)
    logging.basicConfig(
        level=getattr(logging, settings.log_level, logging.WARNING),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        scenario = build_scenario(args.n, settings)
        descriptor_errors = validate_descriptor(scenario.descriptor())
        if descriptor_errors:
            logger.error("Scenario descriptor does not match its schema: %s", descriptor_errors)
            return 1
        report = COMMANDS[args.command](scenario, args, settings)
    except ReductionError as exc:
        code = 2 if isinstance(exc, USAGE_ERRORS) else 1
        logger.error("%s: %s", exc.code, exc.message)
        _emit(args, {"command": args.command, "status": "ERROR", "error": exc.to_dict()},
              f"{args.command}: ERROR {exc.code}: {exc.message}")
        return code
    data = report.to_json()
    schema_errors = validate_report(data)
    if schema_errors:
        for err in schema_errors:
            logger.error("Report schema violation at %s: %s", err["path"], err["message"])
        return 1
    _emit(args, data, report.to_text())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
