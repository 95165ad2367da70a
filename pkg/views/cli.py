"""
Command-line front end: one subcommand per pipeline, reports on standard output.
"""

import argparse
import logging
import sys
from itertools import product

from app import QilineApp
from controllers.report_controller import RunResult
from models.action import CANDIDATE_FAMILIES
from models.map_expr import PeriodicLift
from models.ordering import Order
from utils.constants import (
    APP_NAME, APP_VERSION, OUTPUT_FORMATS, RELATION_IDS, PROFILE_CSV_HEADER, ORBIT_CSV_HEADER,
    EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE,
)
from utils.errors import QilineError, MapSyntaxError, InvariantViolation
from utils.precision import format_real, json_real
from utils.validation import validate_grid, validate_number, validate_params

logger = logging.getLogger(__name__)

# (c1, c2, kappa) points scanned by ``obstruction`` when none are given
DEFAULT_CANDIDATE_PARAMS = tuple(product((1.0, 2.0), (0.5, -1.0), (1.0, 3.0)))
DEFAULT_ORBIT_STEPS = 100


def _checked(validator):
    """argparse type from an (ok, value, error) validator."""
    def convert(text):
        ok, value, error = validator(text)
        if not ok:
            raise argparse.ArgumentTypeError(error)
        return value
    return convert


def _candidate_params(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("candidate parameters must be c1,c2,kappa")
    return tuple(_checked(validate_number)(part) for part in parts)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=_checked(validate_grid), help="x0,ratio,count")
    common.add_argument("--tol", type=_checked(validate_number), help="absolute tolerance")
    common.add_argument("--bits", type=int, help="working precision in bits")
    common.add_argument("--format", choices=OUTPUT_FORMATS)
    common.add_argument("--seed", type=int)
    common.add_argument("--max-len", type=int, dest="max_len")
    common.add_argument("--out", help="directory for the report bundle")
    common.add_argument("--config", default="config.json", help="configuration file")
    common.add_argument("--save-config", action="store_true", dest="save_config",
                        help="write the overridden settings back to the configuration file")
    common.add_argument("--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog=APP_NAME, description="Quasi-isometries of the line")
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {APP_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate a map")
    p.add_argument("expr")
    p.add_argument("--at", type=_checked(validate_number), action="append", required=True)
    p.add_argument("--loose", action="store_true", help="skip the germ-domain check")

    p = sub.add_parser("classify", parents=[common], help="sublinear-drift classification")
    p.add_argument("expr")

    p = sub.add_parser("qi-constants", parents=[common], help="estimate K and C")
    p.add_argument("expr")

    p = sub.add_parser("equiv", parents=[common], help="bounded-distance verdict")
    p.add_argument("f")
    p.add_argument("g")
    p.add_argument("--full-line", action="store_true", dest="full_line")

    p = sub.add_parser("order", parents=[common], help="compare two maps")
    p.add_argument("f")
    p.add_argument("g")

    p = sub.add_parser("orderability", parents=[common], help="sign assignment and word check")
    p.add_argument("exprs", nargs="+")

    p = sub.add_parser("relations", parents=[common], help="check the generator relations")
    p.add_argument("--all", action="store_true")
    p.add_argument("--relation", choices=RELATION_IDS)
    p.add_argument("--param", action="append", default=[], help="name=value")

    p = sub.add_parser("independence", parents=[common], help="displacement exponent of a B-word")
    p.add_argument("word")

    p = sub.add_parser("holder", parents=[common], help="translation numbers of a commuting pair")
    p.add_argument("g")
    p.add_argument("h")
    p.add_argument("--x0", type=_checked(validate_number), default=0.0)
    p.add_argument("--n", type=int)
    p.add_argument("--orbit-steps", type=int, default=DEFAULT_ORBIT_STEPS, dest="orbit_steps")

    p = sub.add_parser("obstruction", parents=[common], help="affine obstruction and candidate scan")
    p.add_argument("--ainv", help="check one inverse A_2 candidate instead of scanning")
    p.add_argument("--family", choices=sorted(CANDIDATE_FAMILIES), default="translation")
    p.add_argument("--params", type=_candidate_params, action="append")

    p = sub.add_parser("diffz", parents=[common], help="escape check for a periodic lift")
    p.add_argument("lift")
    return parser


def configure_logging(verbose):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


# -- subcommand handlers -----------------------------------------------------------


def _grid(app, *maps):
    return app.metrics_controller.fit_grid(app.metrics_controller.default_grid(), *maps)


def cmd_eval(app, args):
    f = app.homeo_controller.parse(args.expr)
    values = [(x, app.homeo_controller.eval(f, x, strict=not args.loose)) for x in args.at]
    payload = {
        "expr": f.to_text(),
        "points": [{"x": x, "value": json_real(v)} for x, v in values],
    }
    plain = "".join(f"{format_real(v)}\n" for _, v in values)
    return [RunResult("eval", payload, csv_header=("x", "value"), csv_rows=tuple(values), plain_text=plain)]


def cmd_classify(app, args):
    f = app.homeo_controller.parse(args.expr)
    grid = _grid(app, f)
    drift = app.metrics_controller.drift_classify(f, grid)
    ratios = app.metrics_controller.drift_ratios(f, grid)
    payload = dict(drift.to_dict(), grid=grid.to_dict())
    rows = tuple(zip(grid.points(), ratios))
    return [RunResult("classify", payload, csv_header=("x", "ratio"), csv_rows=rows)]


def cmd_qi_constants(app, args):
    f = app.homeo_controller.parse(args.expr)
    grid = _grid(app, f)
    estimate = app.metrics_controller.estimate_qi_constants(f, grid)
    profile = app.metrics_controller.displacement_profile(f, grid)
    return [
        RunResult("qi-constants", dict(estimate.to_dict(), expr=f.to_text())),
        RunResult("profile", {"expr": f.to_text(), "grid": grid.to_dict()},
                  csv_header=PROFILE_CSV_HEADER, csv_rows=tuple(profile)),
    ]


def cmd_equiv(app, args):
    f = app.homeo_controller.parse(args.f)
    g = app.homeo_controller.parse(args.g)
    grid = _grid(app, f, g)
    verdict = app.metrics_controller.bounded_distance(f, g, grid, full_line=args.full_line)
    return [RunResult("equiv", dict(verdict.to_dict(), grid=grid.to_dict()))]


def cmd_order(app, args):
    f = app.homeo_controller.parse(args.f)
    g = app.homeo_controller.parse(args.g)
    grid = _grid(app, f, g)
    verdict = app.ordering_controller.compare(f, g, grid)
    payload = dict(verdict.to_dict(), grid=grid.to_dict())
    return [RunResult("order", payload, passed=verdict.kind is not Order.UNRESOLVED)]


def cmd_orderability(app, args):
    fs = [app.homeo_controller.parse(text) for text in args.exprs]
    grid = _grid(app, *fs)
    ordering = app.ordering_controller
    assignment = ordering.assign_signs(fs, grid)
    check = ordering.semigroup_word_check(assignment, fs, app.config.max_word_length, grid)
    payload = {
        "maps": [f.to_text() for f in fs],
        "grid": grid.to_dict(),
        "assignment": assignment.to_dict(),
        "semigroupCheck": check.to_dict(),
    }
    return [RunResult("orderability", payload, passed=check.all_positive)]


def cmd_relations(app, args):
    generators = app.generator_controller
    grid = app.metrics_controller.default_grid()
    if args.all or not args.relation:
        reports = generators.certify_relations(grid)
    else:
        ok, params, error = validate_params(args.param)
        if not ok:
            raise InvariantViolation(error)
        reports = [generators.verify_relation(args.relation, params, grid)]
    rows = tuple(
        (r.relation, " ".join(f"{k}={v}" for k, v in r.params), r.measured_sup,
         r.stated_bound, r.passed)
        for r in reports
    )
    return [RunResult(
        "relations", [r.to_dict() for r in reports], passed=all(r.passed for r in reports),
        csv_header=("relation", "params", "measuredSup", "paperBound", "pass"), csv_rows=rows,
    )]


def cmd_independence(app, args):
    generators = app.generator_controller
    word = generators.parse_word(args.word)
    result = generators.independence_test(word, app.metrics_controller.default_grid())
    return [RunResult("independence", dict(result.to_dict(), word=word.to_text()))]


def cmd_holder(app, args):
    g = app.homeo_controller.parse(args.g)
    h = app.homeo_controller.parse(args.h)
    actions = app.action_controller
    n = args.n or app.config.tau_iterations
    check = actions.holder_homomorphism_check(g, h, args.x0, n)
    payload = {
        "generators": {"g": g.to_text(), "h": h.to_text()},
        "tau": {name: json_real(tau.value) for name, tau in check.taus},
        "errorEstimate": {name: json_real(tau.error_estimate) for name, tau in check.taus},
        "residual": json_real(check.residual),
        "additive": check.additive,
    }
    orbit = actions.orbit(g, args.x0, args.orbit_steps)
    return [RunResult("holder", payload, passed=check.additive,
                      csv_header=ORBIT_CSV_HEADER, csv_rows=tuple(orbit))]


def cmd_obstruction(app, args):
    actions = app.action_controller
    if args.ainv:
        ainv = app.homeo_controller.parse(args.ainv)
        report = actions.affine_obstruction(ainv, app.metrics_controller.default_grid())
        return [RunResult("obstruction", [report.to_dict()])]
    params = args.params or DEFAULT_CANDIDATE_PARAMS
    reports = actions.relation_violation_scan(args.family, params, app.metrics_controller.default_grid())
    conclusion = actions.scan_conclusion(reports)
    tolerance = app.config.obstruction_tolerance
    payload = {
        "family": args.family,
        "reports": [r.to_dict() for r in reports],
        "conclusion": conclusion,
    }
    rows = tuple(
        (*[value for _, value in r.parameters], r.max_violation, r.conclusion) for r in reports
    )
    return [RunResult(
        "obstruction", payload, passed=all(r.max_violation >= tolerance for r in reports),
        csv_header=("c1", "c2", "kappa", "maxViolation", "conclusion"), csv_rows=rows,
    )]


def cmd_diffz(app, args):
    lift = app.homeo_controller.parse(args.lift)
    if not isinstance(lift, PeriodicLift):
        raise InvariantViolation("diffz needs a lift[...] expression")
    generators = app.generator_controller
    escape = generators.diffz_escape_check(lift)
    trivial = generators.diffz_h_triviality_check(lift, app.metrics_controller.default_grid())
    payload = dict(escape.to_dict(), lift=lift.to_text(), hTrivial=trivial)
    rows = tuple(enumerate(escape.witness_growth, start=1))
    return [RunResult("diffz", payload, passed=escape.escaped or escape.vacuous,
                      csv_header=("n", "growth"), csv_rows=rows)]


HANDLERS = {
    "eval": cmd_eval,
    "classify": cmd_classify,
    "qi-constants": cmd_qi_constants,
    "equiv": cmd_equiv,
    "order": cmd_order,
    "orderability": cmd_orderability,
    "relations": cmd_relations,
    "independence": cmd_independence,
    "holder": cmd_holder,
    "obstruction": cmd_obstruction,
    "diffz": cmd_diffz,
}

# Subcommands whose natural output is a bare value
PLAIN_BY_DEFAULT = ("eval",)


def run(argv=None, stdout=None, stderr=None):
    """
    Run one subcommand.

    Returns:
        int: 0 when every check passed, 1 on a failed check or runtime error, 2 on usage errors
    """
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    configure_logging(args.verbose)

    try:
        app = QilineApp(args.config)
        run_config = app.configure(
            save=args.save_config,
            grid=args.grid, abs_tol=args.tol, precision_bits=args.bits,
            output_format=args.format, seed=args.seed, max_len=args.max_len,
        )
        results = HANDLERS[args.command](app, args)
    except (MapSyntaxError, InvariantViolation) as e:
        print(f"{APP_NAME}: error: {e}", file=stderr)
        return EXIT_USAGE
    except QilineError as e:
        print(f"{APP_NAME}: {type(e).__name__}: {e}", file=stderr)
        return EXIT_CHECK_FAILED

    reports = app.report_controller
    output_format = args.format or ("plain" if args.command in PLAIN_BY_DEFAULT else run_config.output_format)
    primary = results[0]
    if output_format == "csv":
        primary = next((r for r in results if r.csv_header), primary)
    stdout.write(reports.render(primary, run_config, output_format))

    if args.out:
        try:
            reports.report_bundle(results, args.out, run_config)
        except QilineError as e:
            print(f"{APP_NAME}: {e}", file=stderr)
            return EXIT_CHECK_FAILED
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


def main():
    sys.exit(run())
