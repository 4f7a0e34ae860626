"""Command implementations shared by the scripts; each returns a Report."""

import argparse
import logging
import os
import sys
import time
from contextlib import contextmanager
from typing import Iterator, Optional, Sequence

from .catalog import BUILTINS, builtin
from .closure import is_closure_operator
from .extensions import (
    ExtensionKind,
    ExtensionProblem,
    NaturalExtensionLattice,
    check_chain,
    enumerate_natural_extensions,
    extension_relation,
    inclusion_check,
    is_natural_extension,
    lattice_checks,
    minus_extension,
    restriction_report,
)
from .files import PresentationFile, StructureFile
from .filters import (
    TheoryPerturbation,
    adjunction_report,
    check_naturality,
    filter_invariance_report,
    filter_system,
    filters_equal_theories,
    intersections_closed,
    natext_theoryfamily_roundtrip,
    preimage_table,
    theory_families_distinct,
)
from .logic import (
    LogicPresentation,
    SearchBounds,
    arity_profile,
    derivability,
    derive,
    kary_cut_failure,
    structurality_check,
)
from .report import Check, Report
from .search import DEFAULT_BUDGET, DEFAULT_SEED, Witness, search_counterexample
from .terms import VarSet, formula_structure, parse_formula, parse_formula_list

logger = logging.getLogger(__name__)

BUILTIN_PREFIX = "builtin:"
SUITES = ("chain", "closure", "filters", "roundtrip")


@contextmanager
def timed(report: Report, key: str) -> Iterator[None]:
    start = time.perf_counter()
    try:
        yield
    finally:
        report.timing[key] = round(time.perf_counter() - start, 6)


def load_presentation(source: str, bounds: Optional[str] = None) -> LogicPresentation:
    """Reads a presentation file, or `builtin:<name>` for a built-in one."""
    if source.startswith(BUILTIN_PREFIX):
        presentation = builtin(source[len(BUILTIN_PREFIX):])
    elif os.path.exists(source):
        presentation = PresentationFile().read_presentation(source)
    else:
        raise ValueError(f"{source} does not exist; built-ins are {', '.join(BUILTIN_PREFIX + n for n in BUILTINS)}")
    if bounds:
        presentation = presentation.with_bounds(SearchBounds.parse(bounds))
    return presentation


def target_variables(presentation: LogicPresentation, to_vars: Optional[str]) -> VarSet:
    if to_vars:
        return VarSet.parse(to_vars)
    return presentation.variables.fresh(1, avoid=[name for name, _ in presentation.signature.connectives])


def parse_arity(text: Optional[str]) -> Optional[int]:
    if text is None or text == "omega":
        return None
    if not text.isdigit() or int(text) < 1:
        raise ValueError(f"arity must be a positive number or 'omega', got {text!r}")
    return int(text)


def cmd_derive(
    logic: str,
    premises: str = "",
    goal: str = "",
    bounds: Optional[str] = None,
    strict: bool = False,
) -> Report:
    report = Report("derive", strict=strict)
    with timed(report, "derive"):
        try:
            presentation = load_presentation(logic, bounds)
            gamma = presentation.parse_list(premises)
            phi = presentation.parse(goal)
        except ValueError as e:
            return report.error(str(e))
        verdict = derive(presentation, gamma, phi)
        report.add_verdict(f"{premises} |- {goal}", verdict)
        if verdict.is_yes:
            problem = verdict.derivation.replay(presentation, gamma)
            report.add_check(Check.ok("replay") if problem is None else Check.failed("replay", {"step": problem}))
        report.data["presentation"] = presentation.name
        report.data["exact"] = presentation.is_exact()
    return report


def cmd_extend(
    logic: str,
    to_vars: Optional[str] = None,
    method: str = "minus",
    arity: Optional[str] = None,
    premises: str = "",
    goal: str = "",
    bounds: Optional[str] = None,
    strict: bool = False,
) -> Report:
    report = Report("extend", strict=strict)
    with timed(report, "extend"):
        try:
            presentation = load_presentation(logic, bounds)
            problem = ExtensionProblem(presentation, target_variables(presentation, to_vars))
            relation = extension_relation(problem, method, parse_arity(arity))
            gamma = parse_formula_list(premises, presentation.signature, problem.target)
            phi = parse_formula(goal, presentation.signature, problem.target)
        except ValueError as e:
            return report.error(str(e))
        verdict = relation.query(gamma, phi)
        report.add_verdict(f"{premises} |-{relation.name} {goal}", verdict)
        if verdict.note == "likely-yes":
            report.notes.append(f"{relation.name} was checked on finitely many substitutions only")
        if verdict.is_yes and relation.kind is ExtensionKind.MINUS and verdict.derivation is not None:
            problem_step = verdict.derivation.replay(problem.extended, gamma)
            report.add_check(
                Check.ok("replay") if problem_step is None else Check.failed("replay", {"step": problem_step})
            )
        report.data.update({"relation": relation.name, "target": list(problem.target)})
    return report


def cmd_compare(
    logic: str,
    first: str,
    second: str,
    to_vars: Optional[str] = None,
    arity: Optional[str] = None,
    strict: bool = False,
) -> Report:
    """Checks first ⊆ second pointwise and reports whether they coincide."""
    report = Report("compare", strict=strict)
    with timed(report, "compare"):
        try:
            presentation = load_presentation(logic)
            problem = ExtensionProblem(presentation, target_variables(presentation, to_vars))
            n = parse_arity(arity)
            left = extension_relation(problem, first, n).operator()
            right = extension_relation(problem, second, n).operator()
        except ValueError as e:
            return report.error(str(e))
        report.add_check(inclusion_check(f"{left.name} ⊆ {right.name}", left, right))
        converse = inclusion_check(f"{right.name} ⊆ {left.name}", right, left)
        report.data["equal"] = bool(converse) and bool(report.checks[0])
        report.data["converse"] = converse.to_dict()
        report.data["exhaustive"] = left.carrier.exhaustive
    return report


def chain_suite(report: Report, problem: ExtensionProblem, n: Optional[int], premise_sets: Optional[Sequence[str]]) -> None:
    sets = None
    if premise_sets:
        sets = [parse_formula_list(text, problem.base.signature, problem.target) for text in premise_sets]
    chain = check_chain(problem, n, sets)
    for check in chain.checks:
        report.add_check(check)
    report.data["chain"] = {"arity": chain.arity, "exhaustive": chain.exhaustive, "observations": chain.observations}
    if problem.constants_only:
        wider = problem.target.fresh(1, avoid=[name for name, _ in problem.base.signature.connectives])
        for check in restriction_report(problem, wider):
            report.add_check(check)


def closure_suite(report: Report, presentation: LogicPresentation) -> None:
    relation = derivability(presentation)
    operator = relation.operator()
    closure = is_closure_operator(operator)
    if closure.ok:
        report.add_check(Check.ok(f"closure:{operator.name}"))
    else:
        report.add_check(Check.failed(f"closure:{operator.name}", {"property": closure.failure()}))
    report.add_check(structurality_check(operator, presentation.variables))
    profile = arity_profile(operator)
    parts = {}
    for n in range(1, profile):
        failure = kary_cut_failure(presentation, n)
        parts[str(n)] = None if failure is None else failure.to_dict()
    report.data["arity_profile"] = profile
    report.data["kary_cut_failures"] = parts
    report.notes.append("the arity profile stands in for cardinality at finite scale")


def filters_suite(report: Report, presentation: LogicPresentation, perturb: Optional[TheoryPerturbation]) -> None:
    report.add_check(filters_equal_theories(presentation, perturb))
    structure = formula_structure(presentation.signature, presentation.variables)
    for check in adjunction_report(presentation, structure):
        report.add_check(check)


def roundtrip_suite(report: Report, problem: ExtensionProblem) -> None:
    lattice = enumerate_natural_extensions(problem)
    for check in lattice_checks(problem, lattice):
        report.add_check(check)
    operators = [lattice.operator(i) for i in range(len(lattice))]
    for operator in operators:
        report.add_check(natext_theoryfamily_roundtrip(problem, operator))
    report.add_check(theory_families_distinct(problem, operators))
    minus = minus_extension(problem)
    report.add_check(is_natural_extension(problem, minus))
    structure = formula_structure(problem.base.signature, problem.target)
    invariance = filter_invariance_report(problem, minus, structure)
    report.data["filter_invariance"] = invariance.to_dict()
    report.data["natural_extensions"] = lattice.labels


def cmd_check(
    logic: str,
    suite: str = "all",
    to_vars: Optional[str] = None,
    arity: Optional[str] = None,
    premise_sets: Optional[Sequence[str]] = None,
    perturb: Optional[TheoryPerturbation] = None,
    strict: bool = False,
) -> Report:
    """Runs the property suites; `perturb` edits the theory set before the filters comparison."""
    report = Report("check", strict=strict)
    suites = SUITES if suite == "all" else (suite,)
    try:
        unknown = [s for s in suites if s not in SUITES]
        if unknown:
            raise ValueError(f"unknown suite {unknown[0]!r}; choose from {', '.join(SUITES + ('all',))}")
        presentation = load_presentation(logic)
        problem = ExtensionProblem(presentation, target_variables(presentation, to_vars))
        n = parse_arity(arity)
        for name in suites:
            with timed(report, name):
                if name == "chain":
                    if not presentation.is_constants_only and not premise_sets:
                        report.add_check(Check.skip("chain", "needs premise sets outside constants-only signatures"))
                    else:
                        chain_suite(report, problem, n, premise_sets)
                elif not presentation.is_constants_only:
                    report.add_check(Check.skip(name, "needs a finite formula algebra"))
                elif name == "closure":
                    closure_suite(report, presentation)
                elif name == "filters":
                    filters_suite(report, presentation, perturb)
                else:
                    roundtrip_suite(report, problem)
    except ValueError as e:
        return report.error(str(e))
    return report


def cmd_filters(
    structures: str,
    logic: str,
    generate: Optional[str] = None,
    structure_name: Optional[str] = None,
    strict: bool = False,
) -> Report:
    """Filters on every structure of a file, naturality of its homomorphisms, and one generated filter."""
    report = Report("filters", strict=strict)
    with timed(report, "filters"):
        try:
            presentation = load_presentation(logic)
            catalog = StructureFile().read_catalog(structures)
            if catalog.signature != presentation.signature:
                raise ValueError(f"{structures} and {presentation.name} use different signatures")
            lattices = {}
            for name, structure in catalog.structures.items():
                system = filter_system(presentation, structure)
                lattices[name] = system.lattice().to_dict()
                report.add_check(intersections_closed(system.lattice()))
            report.data["filters"] = lattices
            tables = {}
            for hom in catalog.homomorphisms:
                report.add_check(check_naturality(presentation, hom))
                tables[hom.name] = [
                    {"filter": sorted(str(e) for e in f), "preimage": sorted(str(e) for e in p)}
                    for f, p in preimage_table(presentation, hom)
                ]
            report.data["preimages"] = tables
            if generate is not None:
                name = structure_name or next(iter(catalog.structures))
                system = filter_system(presentation, catalog.structures[name])
                subset = [e for e in generate.split()]
                unknown = [e for e in subset if e not in system.carrier]
                if unknown:
                    raise ValueError(f"{unknown[0]} is not an element of {name}")
                generated = system.carrier.members(system.generated(subset))
                report.data["generated"] = {"structure": name, "set": subset, "filter": [str(e) for e in generated]}
        except KeyError as e:
            return report.error(f"unknown structure {e.args[0]!r}")
        except (OSError, ValueError) as e:
            return report.error(str(e))
    return report


def cmd_natext_lattice(
    logic: str,
    to_vars: Optional[str] = None,
    emit: str = "json",
    output: Optional[str] = None,
    strict: bool = False,
) -> Report:
    report = Report("natext-lattice", strict=strict)
    with timed(report, "natext-lattice"):
        try:
            if emit not in ("json", "dot"):
                raise ValueError(f"cannot emit {emit!r}; choose json or dot")
            presentation = load_presentation(logic)
            problem = ExtensionProblem(presentation, target_variables(presentation, to_vars))
            lattice = enumerate_natural_extensions(problem)
        except ValueError as e:
            return report.error(str(e))
        for check in lattice_checks(problem, lattice):
            report.add_check(check)
        try:
            NaturalExtensionLattice.from_json(lattice.to_json())
            report.add_check(Check.ok("tables reload"))
        except ValueError as e:
            report.add_check(Check.failed("tables reload", {"error": str(e)}))
        if not lattice.complete:
            report.bounds.append("natural extension search budget")
        report.data["lattice"] = lattice.to_dict()
        text = lattice.to_dot() if emit == "dot" else lattice.to_json()
        if emit == "dot":
            report.data["dot"] = text
        if output:
            with open(output, "w", encoding="utf-8") as file:
                file.write(text)
    return report


def cmd_search(
    property: str,
    seed: int = DEFAULT_SEED,
    budget: int = DEFAULT_BUDGET,
    output: Optional[str] = None,
    strict: bool = False,
) -> Report:
    report = Report("search", strict=strict)
    with timed(report, "search"):
        try:
            result = search_counterexample(property, seed, budget)
        except ValueError as e:
            return report.error(str(e))
        report.data["search"] = result.to_dict()
        report.notes += result.notes
        if result.witness is None:
            if not result.exhausted:
                report.bounds.append(f"budget={budget}")
            return report
        report.add_check(result.witness.replay())
        if output:
            result.witness.write_file(output)
            report.data["witness_file"] = output
    return report


def cmd_replay(witness: str, strict: bool = False) -> Report:
    report = Report("replay", strict=strict)
    with timed(report, "replay"):
        try:
            loaded = Witness.read_file(witness)
            report.add_check(loaded.replay())
        except (OSError, ValueError) as e:
            return report.error(str(e))
        report.data["witness"] = loaded.to_dict()
    return report


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--strict", action="store_true", help="Exit with 3 when a search bound was hit")
    parser.add_argument("--no-timing", action="store_true", help="Leave timings out of the report")
    parser.add_argument("--report", type=str, help="Also write the report to this file", default=None)
    parser.add_argument("--verbose", "-v", action="store_true", help="Log progress")


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


def emit(report: Report, args: argparse.Namespace) -> None:
    include_timing = not args.no_timing
    print(report.to_json(include_timing))
    if args.report:
        report.dump(args.report, include_timing)
    sys.exit(report.exit_code)
