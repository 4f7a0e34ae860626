import pytest
from hypothesis import given, strategies as st

from natlogic.terms import (
    ArityError,
    FiniteStructure,
    Formula,
    FormulaSyntaxError,
    Homomorphism,
    NotAHomomorphismError,
    Signature,
    SignatureError,
    StructureError,
    Substitution,
    UnboundVariableError,
    UnknownSymbolError,
    VarSet,
    anti_instances,
    enumerate_formulas,
    enumerate_substitutions,
    evaluate,
    format_formula,
    formula_structure,
    match,
    parse_formula,
    parse_formula_list,
    substitute,
    substitution_homomorphisms,
)

SIG = Signature.parse("a:0 f:1 h:2")
VARS = VarSet.of("x", "y", "z")

leaves = st.sampled_from([Formula.const("a")] + [Formula.var(name) for name in VARS])


def formulas(max_leaves: int = 6):
    return st.recursive(
        leaves,
        lambda children: st.one_of(
            children.map(lambda t: Formula.apply("f", t)),
            st.tuples(children, children).map(lambda pair: Formula.apply("h", *pair)),
        ),
        max_leaves=max_leaves,
    )


substitutions = st.dictionaries(st.sampled_from(VARS.vars), formulas(3), max_size=3).map(Substitution)
valuations = st.fixed_dictionaries({name: st.sampled_from([0, 1, 2]) for name in VARS})

Z3 = FiniteStructure.from_functions(
    SIG,
    [0, 1, 2],
    {"a": lambda: 0, "f": lambda v: (v + 1) % 3, "h": lambda u, v: (u + 2 * v) % 3},
    name="Z3",
)


@given(formulas())
def test_format_then_parse_is_identity(phi):
    assert parse_formula(format_formula(phi), SIG, VARS) == phi


@given(substitutions, substitutions, formulas())
def test_composition_applies_right_first(sigma, tau, phi):
    assert sigma.compose(tau)(phi) == sigma(tau(phi))


@given(substitutions, formulas(), valuations)
def test_evaluation_commutes_with_substitution(sigma, phi, valuation):
    moved = {name: evaluate(valuation, sigma.image(name), Z3) for name in VARS}
    assert evaluate(valuation, substitute(sigma, phi), Z3) == evaluate(moved, phi, Z3)


@given(substitutions, formulas())
def test_match_recovers_an_instance(sigma, phi):
    target = sigma(phi)
    found = match(phi, target)
    assert found is not None
    assert found(phi) == target


@given(substitutions, formulas(4))
def test_anti_instances_are_exact_preimages(sigma, phi):
    target = sigma(phi)
    found = anti_instances(target, sigma, VARS)
    assert phi in found
    assert all(sigma(psi) == target for psi in found)


def test_match_fails_on_clash():
    x = Formula.var("x")
    pattern = Formula.apply("h", x, x)
    assert match(pattern, Formula.apply("h", Formula.const("a"), Formula.apply("f", Formula.const("a")))) is None
    assert match(Formula.apply("f", x), Formula.var("y")) is None


def test_identity_bindings_are_dropped():
    assert Substitution({"x": Formula.var("x")}) == Substitution.identity()
    assert len(Substitution({"x": Formula.var("x"), "y": Formula.const("a")})) == 1


def test_signature_parsing():
    assert SIG.constants == ("a",)
    assert SIG.operations == (("f", 1), ("h", 2))
    assert not SIG.is_constants_only
    with pytest.raises(SignatureError):
        Signature.parse("a")
    with pytest.raises(SignatureError):
        Signature.parse("a:0 a:1")


def test_parse_errors_carry_positions():
    with pytest.raises(FormulaSyntaxError) as error:
        parse_formula("f(x", SIG, VARS)
    assert error.value.position == 3
    with pytest.raises(FormulaSyntaxError):
        parse_formula("x(a)", SIG, VARS)
    with pytest.raises(FormulaSyntaxError):
        parse_formula("f(x) y", SIG, VARS)
    with pytest.raises(ArityError):
        parse_formula("f(x, x)", SIG, VARS)
    with pytest.raises(UnknownSymbolError):
        parse_formula("q(x)", SIG, VARS)


def test_formula_lists_respect_parentheses():
    parsed = parse_formula_list("h(x, y), a", SIG, VARS)
    assert [format_formula(f) for f in parsed] == ["h(x, y)", "a"]
    assert parse_formula_list("", SIG, VARS) == []


def test_formula_helpers():
    phi = parse_formula("h(f(x), y)", SIG, VARS)
    assert phi.depth == 2
    assert phi.variables == frozenset({"x", "y"})
    assert [str(t) for t in phi.subterms] == ["x", "f(x)", "y", "h(f(x), y)"]
    assert phi.is_over(["x", "y"])
    assert not phi.is_over(["x"])


def test_fresh_variables_avoid_clashes():
    assert VarSet.of("x").fresh(2).vars == ("x", "y", "z")
    assert VarSet.of("x").fresh(2, avoid=["y"]).vars == ("x", "z", "w")


def test_inclusion_respects_order():
    assert VarSet.of("x").issubset(VarSet.of("x", "y"))
    assert not VarSet.of("y", "x").issubset(VarSet.of("x", "y"))
    with pytest.raises(SignatureError):
        VarSet.of("x", "x")


def test_enumeration_order():
    signature = Signature.parse("a:0 f:1")
    found = enumerate_formulas(signature, VarSet.of("x"), 1)
    assert [str(f) for f in found] == ["a", "x", "f(a)", "f(x)"]


def test_enumeration_is_lexicographic_over_declared_symbols():
    signature = Signature.parse("b:0 a:0 g:1 f:2")
    found = enumerate_formulas(signature, VarSet.of("x"), 1)
    assert [str(f) for f in found] == [
        "b",
        "a",
        "x",
        "g(b)",
        "g(a)",
        "g(x)",
        "f(b, b)",
        "f(b, a)",
        "f(b, x)",
        "f(a, b)",
        "f(a, a)",
        "f(a, x)",
        "f(x, b)",
        "f(x, a)",
        "f(x, x)",
    ]
    deeper = enumerate_formulas(Signature.parse("a:0 g:1"), VarSet.of("x"), 2)
    assert [str(f) for f in deeper] == ["a", "x", "g(a)", "g(x)", "g(g(a))", "g(g(x))"]


def test_unbound_variable():
    with pytest.raises(UnboundVariableError):
        evaluate({}, Formula.var("x"), Z3)


def test_structures_need_total_tables():
    signature = Signature.parse("a:0 f:1")
    with pytest.raises(StructureError):
        FiniteStructure(signature, [0, 1], {"a": {(): 0}, "f": {(0,): 1}})
    with pytest.raises(StructureError):
        FiniteStructure(signature, [0, 1], {"a": {(): 5}, "f": {(0,): 1, (1,): 0}})


def test_homomorphisms_are_verified():
    signature = Signature.parse("a:0 f:1")
    cycle = FiniteStructure(signature, [0, 1], {"a": {(): 0}, "f": {(0,): 1, (1,): 0}}, "cycle")
    point = FiniteStructure(signature, ["*"], {"a": {(): "*"}, "f": {("*",): "*"}}, "point")
    Homomorphism(cycle, point, {0: "*", 1: "*"}).verify()
    with pytest.raises(NotAHomomorphismError):
        Homomorphism(cycle, cycle, {0: 0, 1: 0}).verify()
    with pytest.raises(NotAHomomorphismError):
        Homomorphism(cycle, point, {0: "*"}).verify()


def test_formula_structure_is_finite_only_for_constants():
    signature = Signature.parse("a:0 b:0")
    structure = formula_structure(signature, VarSet.of("x", "y"))
    assert structure.name == "Fm(x y)"
    assert [str(e) for e in structure.carrier] == ["a", "b", "x", "y"]
    with pytest.raises(SignatureError):
        formula_structure(SIG, VARS)


def test_substitution_enumeration():
    codomain = parse_formula_list("a, x", SIG, VARS)
    found = enumerate_substitutions(VarSet.of("x", "y"), codomain)
    assert [s.format() for s in found] == ["x := a, y := a", "x := a, y := x", "y := a", "y := x"]


def test_substitution_homomorphisms():
    signature = Signature.parse("a:0")
    homs = substitution_homomorphisms(signature, VarSet.of("x"), VarSet.of("x", "y"))
    assert len(homs) == 3
    for hom in homs:
        assert hom.verify() is hom
