import pytest
from conftest import root_path

from natlogic.catalog import BUILTINS, CONSTANTS_ONLY, builtin, collapse_problem, extension_problem
from natlogic.closure import Carrier, IntersectionFamily, operators_equal, top_operator
from natlogic.extensions import ExtensionProblem, default_chain_arity, minus_extension, plus_extension
from natlogic.files import PresentationFile
from natlogic.filters import (
    AbstractFilterPairInstance,
    FilterPairError,
    FilterLattice,
    FilterSystem,
    adjunction_report,
    all_filters,
    canonical_filter_pair,
    check_initiality,
    check_naturality,
    directed_unions_closed,
    filter_invariance_report,
    filters_equal_theories,
    generated_filter,
    induced_logic,
    intersections_closed,
    is_filter,
    logic_arity,
    natext_theoryfamily_roundtrip,
    relation_filters,
    structurality_of_induced,
    theory_families_distinct,
    theory_family_pair,
)
from natlogic.logic import as_closure_operator
from natlogic.terms import Homomorphism, SignatureError, VarSet, formula_structure


def presentation_named(name: str):
    if name in BUILTINS:
        return builtin(name)
    return PresentationFile().read_presentation(root_path("logics", f"{name}.logic"))


def test_filters_on_each_structure(a_implies_b, two_point):
    structures = two_point.structures
    assert [sorted(s) for s in all_filters(a_implies_b, structures["A"]).as_sets()] == [[], ["1"], ["0", "1"]]
    assert len(all_filters(a_implies_b, structures["B"])) == 2
    assert len(all_filters(a_implies_b, structures["C"])) == 6
    assert generated_filter(a_implies_b, structures["A"], ["0"]) == frozenset({"0", "1"})
    assert generated_filter(a_implies_b, structures["C"], ["p", "r"]) == frozenset({"p", "q", "r"})


def test_membership_witness(a_implies_b, two_point):
    check = is_filter(a_implies_b, two_point.structures["A"], ["0"])
    assert not check
    assert check.witness == {"rule": "a => b", "valuation": {}, "premises": ["0"], "conclusion": "1", "set": ["0"]}
    assert is_filter(a_implies_b, two_point.structures["A"], ["1"])


def test_signature_must_match(running, two_point):
    with pytest.raises(SignatureError):
        FilterSystem(running, two_point.structures["A"])


def test_preimages_of_filters_are_filters(a_implies_b, two_point):
    for hom in two_point.homomorphisms:
        assert check_naturality(a_implies_b, hom)


def test_identity_is_natural(a_implies_b, two_point):
    pair = canonical_filter_pair(a_implies_b, list(two_point.structures.values()))
    for structure in two_point.structures.values():
        identity = Homomorphism.identity(structure)
        check = check_naturality(a_implies_b, identity)
        assert check
        assert check.name == f"naturality:id_{structure.name}"
        assert pair.naturality(identity)


def test_canonical_pair(a_implies_b, two_point):
    pair = canonical_filter_pair(a_implies_b, list(two_point.structures.values()), two_point.homomorphisms)
    assert all(pair.verify())
    check = check_initiality(a_implies_b, pair)
    assert check
    assert check.note == "G equals the filters everywhere"


def test_initiality_notes_strict_inclusion(a_implies_b, two_point):
    structure = two_point.structures["A"]
    carrier = Carrier(structure.carrier)
    smaller = AbstractFilterPairInstance({"A": structure}, {"A": IntersectionFamily(carrier, [0b10, 0b11])}, name="G")
    check = check_initiality(a_implies_b, smaller)
    assert check
    assert check.note == "strict inclusion on A"
    wrong = AbstractFilterPairInstance({"A": structure}, {"A": IntersectionFamily(carrier, [0b01, 0b11])}, name="G")
    check = check_initiality(a_implies_b, wrong)
    assert not check
    assert check.witness == {"structure": "A", "member": ["0"]}


def test_invalid_pairs_are_rejected(two_point):
    structure = two_point.structures["A"]
    pair = AbstractFilterPairInstance(
        {"A": structure}, {"A": IntersectionFamily(Carrier(structure.carrier), [0b01])}, name="bad"
    )
    assert not all(pair.verify())
    with pytest.raises(FilterPairError):
        pair.require_valid()
    with pytest.raises(FilterPairError):
        induced_logic(pair, "A", VarSet.of("x"))


@pytest.mark.parametrize("name", CONSTANTS_ONLY + ["singular-analog", "a-implies-b"])
def test_filters_are_the_theories(name):
    presentation = presentation_named(name)
    assert len(formula_structure(presentation.signature, presentation.variables)) <= 12
    assert filters_equal_theories(presentation)


def test_perturbed_theories_are_caught(a_implies_b):
    check = filters_equal_theories(a_implies_b, lambda theories: theories - {max(theories)})
    assert not check
    assert check.witness == {"set": ["a", "b", "x"], "filter": True, "theory": False}


def test_theory_family_roundtrip(a_implies_b):
    problem = ExtensionProblem(a_implies_b, VarSet.of("x", "y"))
    minus = minus_extension(problem)
    pair = theory_family_pair(problem, minus)
    assert sorted(pair.families) == ["Fm(x y)", "Fm(x)"]
    assert all(pair.verify())
    assert natext_theoryfamily_roundtrip(problem, minus)
    assert structurality_of_induced(pair, "Fm(x y)", problem.target)


def test_theory_families_tell_extensions_apart(a_implies_b):
    problem = ExtensionProblem(a_implies_b, VarSet.of("x", "y"))
    minus = minus_extension(problem)
    check = theory_families_distinct(problem, [minus, top_operator(problem.carrier())])
    assert check
    assert check.note == "2 extension(s)"
    check = theory_families_distinct(problem, [minus, minus])
    assert not check
    assert check.witness == {"same": ["minus", "minus"]}


@pytest.mark.parametrize("name", CONSTANTS_ONLY)
@pytest.mark.parametrize("method", ["minus", "plus_n"])
def test_roundtrip_on_every_small_instance(name, method):
    problem = extension_problem(name)
    if method == "minus":
        extension = minus_extension(problem)
    else:
        extension = plus_extension(problem, default_chain_arity(problem))
    check = natext_theoryfamily_roundtrip(problem, extension)
    assert check, check.witness


@pytest.mark.parametrize("name", CONSTANTS_ONLY)
def test_theory_families_follow_the_operator(name):
    problem = extension_problem(name)
    minus = minus_extension(problem).operator()
    plus = plus_extension(problem, default_chain_arity(problem)).operator()
    check = theory_families_distinct(problem, [minus, plus])
    assert bool(check) == (not operators_equal(minus, plus))


def test_unbounded_plus_has_its_own_theory_family():
    problem = collapse_problem()
    minus = minus_extension(problem)
    plus = plus_extension(problem)
    assert natext_theoryfamily_roundtrip(problem, plus)
    check = theory_families_distinct(problem, [minus, plus])
    assert check
    assert check.note == "2 extension(s)"
    assert set(theory_family_pair(problem, plus).families["Fm(x y)"]) == {0b00, 0b11}


def test_adjunction(a_implies_b, two_point):
    for structure in two_point.structures.values():
        checks = adjunction_report(a_implies_b, structure)
        assert [check.name for check in checks] == [
            f"adjunction:{structure.name}",
            f"i∘j∘i = i:{structure.name}",
            f"j∘i∘j = j:{structure.name}",
            f"closure:i∘j:{structure.name}",
            f"intersections:{structure.name}",
            f"directed unions:{structure.name}",
        ]
        assert all(checks)


def test_unions_of_filters_for_unary_logics(running, a_implies_b, two_point):
    assert logic_arity(running) == 2
    lattice = all_filters(running, formula_structure(running.signature, running.variables))
    check = directed_unions_closed(lattice)
    assert check
    assert check.name == "directed unions:Fm(x)"
    for structure in two_point.structures.values():
        assert directed_unions_closed(all_filters(a_implies_b, structure))


def test_unions_of_filters_depend_on_the_arity(singular):
    lattice = all_filters(singular, formula_structure(singular.signature, singular.variables))
    assert intersections_closed(lattice)
    assert logic_arity(singular) == 5
    check = directed_unions_closed(lattice)
    assert check
    assert check.note == "finite 5-directed families have a greatest member"
    check = directed_unions_closed(lattice, 2)
    assert not check
    assert check.witness == {"arity": 2, "filters": [["m11"], ["m12"]], "union": ["m11", "m12"]}


def test_unions_of_a_hand_made_family(a_implies_b, two_point):
    system = FilterSystem(a_implies_b, two_point.structures["C"])
    family = FilterLattice(system, [0b000, 0b001, 0b010, 0b111])
    assert intersections_closed(family)
    check = directed_unions_closed(family, 2)
    assert not check
    assert check.witness["union"] == ["p", "q"]
    assert directed_unions_closed(family, 3)


def test_premise_free_logics_use_unions_too():
    axioms = PresentationFile().parse_presentation("sig a:0 b:0\nvars x\nrule => a\n", "axioms")
    assert logic_arity(axioms) == 1
    lattice = all_filters(axioms, formula_structure(axioms.signature, axioms.variables))
    assert directed_unions_closed(lattice)


def test_filters_from_the_closure_operator(running):
    structure = formula_structure(running.signature, running.variables)
    found = relation_filters(as_closure_operator(running), running.variables, structure)
    assert found == [0b00, 0b01, 0b11]
    assert set(found) == set(all_filters(running, structure).family)


def test_filter_invariance_on_a_small_structure(a_implies_b, two_point):
    problem = ExtensionProblem(a_implies_b, VarSet.of("x", "y"))
    check = filter_invariance_report(problem, minus_extension(problem), two_point.structures["A"])
    assert check
    assert check.name == "filter invariance:minus on A"
