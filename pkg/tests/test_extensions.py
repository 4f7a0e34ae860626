import pytest

from natlogic.catalog import (
    CONSTANTS_ONLY,
    collapse_problem,
    cut_failure_problem,
    extension_problem,
    running_problem,
    structurality_failure_problem,
)
from natlogic.closure import Carrier, IntersectionFamily, operators_equal
from natlogic.extensions import (
    ExtensionKind,
    ExtensionProblem,
    NaturalExtensionLattice,
    check_chain,
    default_chain_arity,
    enumerate_natural_extensions,
    extension_relation,
    is_natural_extension,
    lattice_checks,
    los_suszko,
    ls_operator,
    minus_extension,
    natural_extension_checks,
    plus_extension,
    plus_query,
    restriction_report,
    shoesmith_smiley,
    ss_closure,
    ss_operator,
)
from natlogic.logic import InexactUniverseError, is_conservative_extension
from natlogic.terms import SignatureError, VarSet, parse_formula, parse_formula_list


def formulas(problem: ExtensionProblem, text: str):
    return parse_formula_list(text, problem.base.signature, problem.target)


def formula(problem: ExtensionProblem, text: str):
    return parse_formula(text, problem.base.signature, problem.target)


def test_problem_validation():
    base = running_problem().base
    with pytest.raises(SignatureError):
        ExtensionProblem(base, VarSet.of("y"))
    with pytest.raises(SignatureError):
        ExtensionProblem(base, VarSet.of("x", "a"))
    fresh = ExtensionProblem.with_fresh(base, 2)
    assert fresh.target.vars == ("x", "y", "z")
    assert fresh.describe() == "running: x -> x y z"


def test_running_example_in_every_relation():
    problem = running_problem()
    y, a = formulas(problem, "y"), formula(problem, "a")
    assert los_suszko(problem, y, a).is_yes
    assert shoesmith_smiley(problem, y, a).is_yes
    assert extension_relation(problem, "minus").query(y, a).is_yes
    assert plus_query(problem, y, a).is_yes
    assert plus_query(problem, formulas(problem, "a"), formula(problem, "y")).is_no
    assert not extension_relation(problem, ExtensionKind.SS).entails(formulas(problem, "a"), formula(problem, "y"))


def test_sup_is_not_a_single_relation():
    with pytest.raises(ValueError):
        extension_relation(running_problem(), "sup")
    with pytest.raises(ValueError):
        extension_relation(running_problem(), "widest")


@pytest.mark.parametrize("name", CONSTANTS_ONLY)
def test_inclusion_chain(name):
    problem = extension_problem(name)
    assert len(problem.universe()) <= 8
    chain = check_chain(problem)
    assert chain.exhaustive
    assert chain.passed, chain.first_failure()
    assert [check.name for check in chain.checks] == [
        "ls ⊆ ss",
        "ss ⊆ minus",
        f"minus ⊆ plus_{chain.arity}",
        "ss = SC(ls)",
        "minus = hull(ss)",
    ]


@pytest.mark.parametrize("name", CONSTANTS_ONLY)
def test_minus_is_conservative_over_every_chain(name):
    problem = extension_problem(name)
    assert is_conservative_extension(problem.base, minus_extension(problem))
    checks = restriction_report(problem, VarSet.of("x", "y", "z"))
    assert len(checks) == 2
    assert all(checks)


def test_chain_arity_covers_minus():
    assert default_chain_arity(running_problem()) == 2
    assert default_chain_arity(collapse_problem()) == 1
    assert default_chain_arity(extension_problem("singular-analog")) == 5


def test_singular_analog_chain():
    chain = check_chain(extension_problem("singular-analog"))
    assert chain.passed, chain.first_failure()
    assert chain.arity == 5


def test_cut_failure_of_shoesmith_smiley():
    problem = cut_failure_problem()
    gamma = formulas(problem, "f(x), g(y)")
    closed = ss_closure(problem, gamma)
    assert closed == frozenset(formulas(problem, "f(x), g(y), c"))
    assert shoesmith_smiley(problem, gamma, formula(problem, "c")).is_yes
    assert shoesmith_smiley(problem, gamma + formulas(problem, "c"), formula(problem, "d")).is_yes
    assert shoesmith_smiley(problem, gamma, formula(problem, "d")).is_no
    assert extension_relation(problem, "minus").query(gamma, formula(problem, "d")).is_yes


def test_pointwise_chain_outside_constants():
    problem = cut_failure_problem()
    with pytest.raises(InexactUniverseError):
        check_chain(problem)
    chain = check_chain(problem, premise_sets=[formulas(problem, "f(x), g(y)")])
    assert chain.passed, chain.first_failure()
    assert not chain.exhaustive
    assert [check.name for check in chain.checks if check.skipped] == ["minus ⊆ plus", "ss = SC(ls)"]
    assert chain.observations == [
        {"observation": "ss is not cut-closed", "premises": ["f(x)", "g(y)"], "lemmas": ["c"], "goal": "d"}
    ]


def test_los_suszko_is_not_structural():
    problem = structurality_failure_problem()
    assert los_suszko(problem, formulas(problem, "y"), formula(problem, "a")).is_yes
    assert los_suszko(problem, formulas(problem, "h(x, y)"), formula(problem, "a")).is_no
    assert shoesmith_smiley(problem, formulas(problem, "h(x, y)"), formula(problem, "a")).is_yes


def test_tabulated_relations_need_constants():
    with pytest.raises(InexactUniverseError):
        ls_operator(cut_failure_problem())
    with pytest.raises(InexactUniverseError):
        ss_operator(cut_failure_problem())


def test_plus_is_unknown_outside_constants():
    problem = cut_failure_problem()
    verdict = plus_query(problem, formulas(problem, "f(x)"), formula(problem, "c"))
    assert verdict.is_unknown
    assert verdict.note == "likely-yes"
    assert plus_query(problem, formulas(problem, "f(x)"), formula(problem, "d")).is_no


def test_collapse_plus_and_its_unary_part():
    problem = collapse_problem()
    x, y = formulas(problem, "x"), formula(problem, "y")
    assert plus_query(problem, x, y).is_yes
    assert plus_query(problem, x, y, 1).is_no
    assert operators_equal(plus_extension(problem, 1).operator(), minus_extension(problem).operator())


def test_minus_and_plus_are_natural_on_the_running_example():
    problem = running_problem()
    assert is_natural_extension(problem, minus_extension(problem))
    assert is_natural_extension(problem, plus_extension(problem, 2))
    assert [check.name for check in natural_extension_checks(problem, minus_extension(problem))] == [
        "closure:minus",
        "structural:minus",
        "conservative:minus",
        "arity:minus",
    ]


def test_unbounded_plus_is_not_natural_on_collapse():
    problem = collapse_problem()
    check = is_natural_extension(problem, plus_extension(problem))
    assert not check
    assert check.witness == {"check": "arity:plus", "base": 1, "extension": 2}


@pytest.mark.parametrize("name", ["running", "collapse"])
def test_natural_extension_is_unique_on_small_instances(name):
    lattice = enumerate_natural_extensions(extension_problem(name))
    assert lattice.mode == "moore"
    assert lattice.complete
    assert lattice.labels == ["minus"]
    assert lattice.bottom == lattice.top == 0


@pytest.mark.parametrize("name", CONSTANTS_ONLY)
def test_natural_extensions_form_a_lattice(name):
    problem = extension_problem(name)
    lattice = enumerate_natural_extensions(problem)
    assert lattice.labels[lattice.bottom] == "minus"
    checks = lattice_checks(problem, lattice)
    assert all(checks), [check.to_dict() for check in checks if not check]
    for i in range(len(lattice)):
        assert is_natural_extension(problem, lattice.operator(i))


def _diamond() -> NaturalExtensionLattice:
    carrier = Carrier(["p", "q"])
    members = [
        IntersectionFamily(carrier, [0b00, 0b01, 0b10, 0b11]),
        IntersectionFamily(carrier, [0b01, 0b11]),
        IntersectionFamily(carrier, [0b10, 0b11]),
        IntersectionFamily(carrier, [0b11]),
    ]
    return NaturalExtensionLattice(carrier, members, 1)


def test_lattice_tables():
    lattice = _diamond()
    assert lattice.bottom == 0
    assert lattice.top == 3
    assert lattice.leq(1, 3) and not lattice.leq(1, 2)
    assert lattice.meet_table[1][2] == 0
    assert lattice.join_table[1][2] == 3
    assert lattice.is_lattice()
    assert sorted(lattice.to_graph().edges()) == [(0, 1), (0, 2), (1, 3), (2, 3)]
    assert lattice.index_of(IntersectionFamily(lattice.carrier, [0b11])) == 3
    assert lattice.index_of(IntersectionFamily(lattice.carrier, [0b00, 0b11])) is None


def test_lattice_dot_output():
    dot = _diamond().to_dot()
    assert dot.startswith("digraph natural_extensions {")
    assert "rankdir=BT;" in dot
    assert 'n0 [label="E0", shape=doublecircle];' in dot
    assert 'n1 [label="E1", shape=circle];' in dot
    assert "n1 -> n3;" in dot


def test_lattice_json_reload():
    lattice = _diamond()
    again = NaturalExtensionLattice.from_json(lattice.to_json())
    assert again.order == lattice.order
    assert again.labels == lattice.labels
    data = lattice.to_dict()
    data["join"][1][2] = 0
    with pytest.raises(ValueError):
        NaturalExtensionLattice.from_dict(data)
