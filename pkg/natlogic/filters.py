"""Filters of rule-presented logics on finite structures, and filter pairs built from them."""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Iterator, Optional, Sequence, Union

from .closure import (
    Carrier,
    CarrierTooLargeError,
    ClosureOperator,
    IntersectionFamily,
    MonotoneOperator,
    bits,
    family_to_operator,
    first_difference,
    is_closure_operator,
)
from .extensions import ExtensionProblem, InternalConsistencyError
from .logic import (
    ConsequenceRelation,
    InexactUniverseError,
    LogicPresentation,
    Rule,
    Verdict,
    arity_profile,
    as_closure_operator,
    preimage_mask,
    structurality_check,
)
from .report import Check
from .terms import (
    FiniteStructure,
    Formula,
    Homomorphism,
    SignatureError,
    VarSet,
    evaluate,
    format_formulas,
    formula_structure,
    substitution_homomorphisms,
)

logger = logging.getLogger(__name__)

FILTER_LIMIT = 16
INTERSECTION_CHECK_LIMIT = 8

TheoryPerturbation = Callable[[set[int]], set[int]]


class FilterPairError(ValueError):
    pass


@dataclass(frozen=True)
class RuleInstance:
    """One rule under one valuation into a structure, as carrier positions."""

    premises: int
    conclusion: int
    rule: Rule
    valuation: tuple[tuple[str, Hashable], ...]

    def to_dict(self, structure: FiniteStructure) -> dict:
        return {
            "rule": self.rule.format(),
            "valuation": {name: str(value) for name, value in self.valuation},
            "premises": [str(structure.carrier[i]) for i in bits(self.premises)],
            "conclusion": str(structure.carrier[self.conclusion]),
        }


def _check_signature(presentation: LogicPresentation, structure: FiniteStructure) -> None:
    if presentation.signature != structure.signature:
        raise SignatureError(f"{structure.name} does not interpret the signature of {presentation.name}")


def rule_instances(presentation: LogicPresentation, structure: FiniteStructure) -> list[RuleInstance]:
    _check_signature(presentation, structure)
    instances = []
    for rule in presentation.rules:
        used = rule.premise_variables | set(rule.free_variables)
        names = [name for name in presentation.variables if name in used]
        for valuation in structure.valuations(names):
            premises = 0
            for premise in rule.premises:
                premises |= 1 << structure.index(evaluate(valuation, premise, structure))
            conclusion = structure.index(evaluate(valuation, rule.conclusion, structure))
            instances.append(RuleInstance(premises, conclusion, rule, tuple(valuation.items())))
    return instances


class FilterSystem:
    """The filters of one presentation on one structure."""

    def __init__(self, presentation: LogicPresentation, structure: FiniteStructure):
        if len(structure) > FILTER_LIMIT:
            raise CarrierTooLargeError(f"{structure.name} has more than {FILTER_LIMIT} elements")
        self.presentation = presentation
        self.structure = structure
        self.carrier = Carrier(structure.carrier)
        self.instances = rule_instances(presentation, structure)
        self._lattice: Optional[FilterLattice] = None

    def violation(self, mask: int) -> Optional[RuleInstance]:
        for instance in self.instances:
            if instance.premises & mask == instance.premises and not mask >> instance.conclusion & 1:
                return instance
        return None

    def is_filter(self, subset: Union[int, Iterable]) -> Check:
        mask = subset if isinstance(subset, int) else self.carrier.mask(subset)
        name = f"filter:{self.structure.name}"
        instance = self.violation(mask)
        if instance is None:
            return Check.ok(name)
        witness = instance.to_dict(self.structure)
        witness["set"] = [str(e) for e in self.carrier.members(mask)]
        return Check.failed(name, witness)

    def saturate(self, mask: int) -> int:
        """Fires rule instances until nothing new is added."""
        changed = True
        while changed:
            changed = False
            for instance in self.instances:
                if instance.premises & mask == instance.premises and not mask >> instance.conclusion & 1:
                    mask |= 1 << instance.conclusion
                    changed = True
        return mask

    def lattice(self) -> "FilterLattice":
        if self._lattice is None:
            filters = [mask for mask in self.carrier.masks() if self.violation(mask) is None]
            self._lattice = FilterLattice(self, filters)
            logger.debug("%d filter(s) on %s", len(filters), self.structure.name)
        return self._lattice

    def generated(self, subset: Union[int, Iterable]) -> int:
        """Least filter above the set, by intersection over all filters and by saturation."""
        mask = subset if isinstance(subset, int) else self.carrier.mask(subset)
        by_intersection = self.lattice().family.least_containing(mask)
        by_saturation = self.saturate(mask)
        if by_intersection != by_saturation:
            raise InternalConsistencyError(
                f"generated filter of {[str(e) for e in self.carrier.members(mask)]} "
                f"on {self.structure.name} differs between intersection and saturation"
            )
        return by_saturation

    def operator(self) -> ClosureOperator:
        return ClosureOperator(self.carrier, self.saturate, name=f"Fg[{self.structure.name}]")


class FilterLattice:
    def __init__(self, system: FilterSystem, filters: Iterable[int]):
        self.system = system
        self.carrier = system.carrier
        self.family = IntersectionFamily(self.carrier, filters)

    def __contains__(self, mask: int) -> bool:
        return mask in self.family

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.family, key=lambda m: (bin(m).count("1"), m)))

    def __len__(self) -> int:
        return len(self.family)

    def as_sets(self) -> list[frozenset]:
        return [self.carrier.subset(mask) for mask in self]

    def to_dict(self) -> dict:
        return {
            "structure": self.system.structure.name,
            "carrier": [str(e) for e in self.carrier.elements],
            "filters": [[str(e) for e in self.carrier.members(mask)] for mask in self],
        }


def filter_system(presentation: LogicPresentation, structure: FiniteStructure) -> FilterSystem:
    return FilterSystem(presentation, structure)


def is_filter(presentation: LogicPresentation, structure: FiniteStructure, subset: Iterable) -> Check:
    return FilterSystem(presentation, structure).is_filter(subset)


def all_filters(presentation: LogicPresentation, structure: FiniteStructure) -> FilterLattice:
    return FilterSystem(presentation, structure).lattice()


def generated_filter(presentation: LogicPresentation, structure: FiniteStructure, subset: Iterable) -> frozenset:
    system = FilterSystem(presentation, structure)
    return system.carrier.subset(system.generated(subset))


def intersections_closed(lattice: FilterLattice) -> Check:
    name = f"intersections:{lattice.system.structure.name}"
    if len(lattice.carrier) > INTERSECTION_CHECK_LIMIT:
        return Check.skip(name, f"carrier larger than {INTERSECTION_CHECK_LIMIT}")
    violation = lattice.family.violation()
    if violation is None:
        return Check.ok(name)
    return Check.failed(name, {"filters": [[str(e) for e in lattice.carrier.members(m)] for m in violation]})


def logic_arity(presentation: LogicPresentation) -> int:
    """Arity profile of the logic, or one more than its longest premise list when it has no finite table."""
    try:
        return arity_profile(as_closure_operator(presentation))
    except (InexactUniverseError, CarrierTooLargeError):
        return 1 + max((len(rule.premises) for rule in presentation.rules), default=0)


def directed_unions_closed(lattice: FilterLattice, arity: Optional[int] = None) -> Check:
    """Unions of n-directed families of filters are filters, n the arity of the logic.

    A family is n-directed when every subfamily of fewer than n members has an
    upper bound in it. A finite 3-directed family has a greatest member, so only
    n <= 2 can fail, and then every non-empty union must be a filter.
    """
    name = f"directed unions:{lattice.system.structure.name}"
    n = logic_arity(lattice.system.presentation) if arity is None else arity
    if n >= 3:
        return Check.ok(name, f"finite {n}-directed families have a greatest member")
    if len(lattice.carrier) > INTERSECTION_CHECK_LIMIT:
        return Check.skip(name, f"carrier larger than {INTERSECTION_CHECK_LIMIT}")
    members = lattice.carrier.members
    for first, second in itertools.combinations(list(lattice), 2):
        if first | second not in lattice:
            return Check.failed(
                name,
                {
                    "arity": n,
                    "filters": [[str(e) for e in members(m)] for m in (first, second)],
                    "union": [str(e) for e in members(first | second)],
                },
            )
    return Check.ok(name)


def preimage_table(presentation: LogicPresentation, homomorphism: Homomorphism) -> list[tuple[frozenset, frozenset]]:
    """Each filter on the target next to its preimage on the source."""
    target = all_filters(presentation, homomorphism.target)
    return [(subset, homomorphism.preimage(subset)) for subset in target.as_sets()]


def check_naturality(presentation: LogicPresentation, homomorphism: Homomorphism) -> Check:
    """Preimages of filters under the homomorphism are filters."""
    homomorphism.verify()
    source = all_filters(presentation, homomorphism.source)
    name = f"naturality:{homomorphism.name}"
    for subset, preimage in preimage_table(presentation, homomorphism):
        if source.carrier.mask(preimage) not in source:
            return Check.failed(
                name,
                {"filter": sorted(str(e) for e in subset), "preimage": sorted(str(e) for e in preimage)},
            )
    return Check.ok(name)


def _formula_carrier_check(presentation: LogicPresentation) -> FiniteStructure:
    if not presentation.is_constants_only:
        raise InexactUniverseError(f"Fm({presentation.variables.format()}) is infinite for {presentation.name}")
    return formula_structure(presentation.signature, presentation.variables)


def filters_equal_theories(presentation: LogicPresentation, perturb: Optional[TheoryPerturbation] = None) -> Check:
    """The filters on the formula algebra are exactly the theories.

    `perturb` edits the set of theory masks before the comparison.
    """
    structure = _formula_carrier_check(presentation)
    filters = set(all_filters(presentation, structure).family)
    theories = set(as_closure_operator(presentation).fixed_points())
    if perturb is not None:
        theories = set(perturb(set(theories)))
    name = f"filters = theories:{presentation.name}"
    difference = sorted(filters ^ theories, key=lambda m: (bin(m).count("1"), m))
    if not difference:
        return Check.ok(name)
    mask = difference[0]
    carrier = Carrier(structure.carrier)
    return Check.failed(
        name,
        {"set": format_formulas(carrier.members(mask)), "filter": mask in filters, "theory": mask in theories},
    )


@dataclass
class AbstractFilterPairInstance:
    """A mono filter pair restricted to finitely many structures and homomorphisms.

    Each structure carries an intersection family G(A); the inclusion into the
    power set is implicit.
    """

    structures: dict[str, FiniteStructure]
    families: dict[str, IntersectionFamily]
    homomorphisms: list[Homomorphism] = field(default_factory=list)
    name: str = "G"

    def carrier(self, structure_name: str) -> Carrier:
        return self.families[structure_name].carrier

    def verify(self) -> list[Check]:
        checks = []
        for structure_name, family in self.families.items():
            name = f"intersection family:{self.name}({structure_name})"
            violation = family.violation()
            if violation is None and family.carrier.full in family:
                checks.append(Check.ok(name))
            else:
                checks.append(Check.failed(name, {"sets": [[str(e) for e in family.carrier.members(m)] for m in violation or ()]}))
        for hom in self.homomorphisms:
            checks.append(self.naturality(hom))
        return checks

    def naturality(self, hom: Homomorphism) -> Check:
        name = f"naturality:{self.name}[{hom.name}]"
        source = self.families[hom.source.name]
        target = self.families[hom.target.name]
        for mask in target:
            preimage = source.carrier.mask(hom.preimage(target.carrier.members(mask)))
            if preimage not in source:
                return Check.failed(
                    name,
                    {
                        "member": [str(e) for e in target.carrier.members(mask)],
                        "preimage": [str(e) for e in source.carrier.members(preimage)],
                    },
                )
        return Check.ok(name)

    def require_valid(self) -> "AbstractFilterPairInstance":
        failed = next((check for check in self.verify() if not check), None)
        if failed is not None:
            raise FilterPairError(f"{self.name} fails {failed.name}: {failed.witness}")
        return self


def canonical_filter_pair(
    presentation: LogicPresentation,
    structures: Sequence[FiniteStructure],
    homomorphisms: Sequence[Homomorphism] = (),
) -> AbstractFilterPairInstance:
    families = {s.name: all_filters(presentation, s).family for s in structures}
    return AbstractFilterPairInstance(
        {s.name: s for s in structures}, families, list(homomorphisms), f"Fi[{presentation.name}]"
    )


def induced_logic(pair: AbstractFilterPairInstance, structure_name: str, variables: VarSet) -> ConsequenceRelation:
    """Γ ↦ least member of G(Fm) containing Γ, on a formula structure."""
    pair.require_valid()
    structure = pair.structures[structure_name]
    operator = family_to_operator(pair.families[structure_name], f"C[{pair.name}]")

    def query(premises: frozenset, goal: Formula) -> Verdict:
        if goal in operator.apply(premises):
            return Verdict.yes(support=premises, note=f"least member of {pair.name}({structure_name})")
        return Verdict.no(f"a member of {pair.name}({structure_name}) omits the goal")

    return ConsequenceRelation(
        operator.name,
        structure.signature,
        variables,
        query,
        universe=structure.carrier,
        operator=lambda: operator,
    )


def check_initiality(
    presentation: LogicPresentation,
    pair: AbstractFilterPairInstance,
    formula_structure_name: Optional[str] = None,
) -> Check:
    """Every member of G(M) is a filter on M, for each declared M."""
    name = f"initiality:{pair.name}"
    if formula_structure_name is not None:
        induced = induced_logic(pair, formula_structure_name, presentation.variables).operator()
        mask = first_difference(as_closure_operator(presentation), induced)
        if mask is not None:
            members = format_formulas(induced.carrier.members(mask))
            return Check.failed(name, {"presents": False, "premises": members})
    strict = []
    for structure_name, family in pair.families.items():
        filters = all_filters(presentation, pair.structures[structure_name])
        for mask in family:
            if mask not in filters:
                return Check.failed(
                    name, {"structure": structure_name, "member": [str(e) for e in family.carrier.members(mask)]}
                )
        if len(family) < len(filters):
            strict.append(structure_name)
    note = f"strict inclusion on {', '.join(strict)}" if strict else "G equals the filters everywhere"
    return Check.ok(name, note)


def _inclusion_map(small: Carrier, big: Carrier) -> list[Optional[int]]:
    return [big.find(formula) for formula in small.elements]


def theory_family_pair(problem: ExtensionProblem, relation: Union[ConsequenceRelation, MonotoneOperator]) -> AbstractFilterPairInstance:
    """Theory families of an extension on Fm(X) and Fm(Y), with every substitution between them."""
    if not problem.constants_only:
        raise InexactUniverseError("theory families are tabulated only for constants-only signatures")
    operator = relation.operator() if isinstance(relation, ConsequenceRelation) else relation
    signature = problem.base.signature
    small = formula_structure(signature, problem.source)
    big = formula_structure(signature, problem.target)
    big_family = IntersectionFamily(operator.carrier, operator.fixed_points())
    small_carrier = Carrier(small.carrier)
    inclusion = _inclusion_map(small_carrier, operator.carrier)
    small_family = IntersectionFamily(small_carrier, {preimage_mask(m, inclusion) for m in big_family})
    homs = []
    for source, target in itertools.product((problem.source, problem.target), repeat=2):
        homs += substitution_homomorphisms(signature, source, target)
    return AbstractFilterPairInstance(
        {small.name: small, big.name: big},
        {small.name: small_family, big.name: big_family},
        homs,
        f"Th[{operator.name}]",
    )


def natext_theoryfamily_roundtrip(problem: ExtensionProblem, relation: Union[ConsequenceRelation, MonotoneOperator]) -> Check:
    """extension -> theory families -> induced logics gives back the extension and the base."""
    operator = relation.operator() if isinstance(relation, ConsequenceRelation) else relation
    name = f"roundtrip:{operator.name}"
    pair = theory_family_pair(problem, operator)
    failed = next((check for check in pair.verify() if not check), None)
    if failed is not None:
        return Check.failed(name, {"check": failed.name, **(failed.witness or {})})
    small_name = f"Fm({problem.source.format()})"
    big_name = f"Fm({problem.target.format()})"
    for structure_name, variables, expected in (
        (big_name, problem.target, operator),
        (small_name, problem.source, problem.base_operator),
    ):
        induced = induced_logic(pair, structure_name, variables).operator()
        mask = first_difference(expected, induced)
        if mask is not None:
            return Check.failed(
                name, {"structure": structure_name, "premises": format_formulas(expected.carrier.members(mask))}
            )
    return Check.ok(name)


def theory_families_distinct(problem: ExtensionProblem, relations: Sequence[Union[ConsequenceRelation, MonotoneOperator]]) -> Check:
    operators = [r.operator() if isinstance(r, ConsequenceRelation) else r for r in relations]
    big_name = f"Fm({problem.target.format()})"
    families = [theory_family_pair(problem, op).families[big_name] for op in operators]
    for (i, first), (j, second) in itertools.combinations(enumerate(families), 2):
        if first == second:
            return Check.failed("theory families distinct", {"same": [operators[i].name, operators[j].name]})
    return Check.ok("theory families distinct", f"{len(families)} extension(s)")


def adjunction_report(presentation: LogicPresentation, structure: FiniteStructure) -> list[Check]:
    """j ⊣ i between subsets and filters: j(S) ⊆ F iff S ⊆ F, i∘j∘i = i, j∘i∘j = j."""
    system = FilterSystem(presentation, structure)
    lattice = system.lattice()
    filters = list(lattice)
    suffix = structure.name
    law = f"adjunction:{suffix}"
    failure = None
    for mask in system.carrier.sample_masks():
        generated = system.generated(mask)
        for closed in filters:
            if (generated & ~closed == 0) != (mask & ~closed == 0):
                failure = {"set": [str(e) for e in system.carrier.members(mask)], "filter": [str(e) for e in system.carrier.members(closed)]}
                break
        if failure:
            break
    checks = [Check.failed(law, failure) if failure else Check.ok(law)]

    stable = next((m for m in filters if system.generated(m) != m), None)
    checks.append(
        Check.ok(f"i∘j∘i = i:{suffix}")
        if stable is None
        else Check.failed(f"i∘j∘i = i:{suffix}", {"filter": [str(e) for e in system.carrier.members(stable)]})
    )
    repeat = next((m for m in system.carrier.sample_masks() if system.generated(system.generated(m)) != system.generated(m)), None)
    checks.append(
        Check.ok(f"j∘i∘j = j:{suffix}")
        if repeat is None
        else Check.failed(f"j∘i∘j = j:{suffix}", {"set": [str(e) for e in system.carrier.members(repeat)]})
    )
    closure = is_closure_operator(system.operator())
    checks.append(
        Check.ok(f"closure:i∘j:{suffix}")
        if closure.ok
        else Check.failed(f"closure:i∘j:{suffix}", {"property": closure.failure()})
    )
    checks.append(intersections_closed(lattice))
    checks.append(directed_unions_closed(lattice))
    return checks


def relation_filters(operator: MonotoneOperator, variables: VarSet, structure: FiniteStructure) -> list[int]:
    """F is a filter of a closure operator on formulas iff v⁻¹F is closed for every valuation v."""
    carrier = Carrier(structure.carrier)
    index_maps = [
        [structure.index(evaluate(valuation, formula, structure)) for formula in operator.carrier.elements]
        for valuation in structure.valuations(variables)
    ]
    found = []
    for mask in carrier.masks():
        if all(operator(pre) == pre for pre in (preimage_mask(mask, m) for m in index_maps)):
            found.append(mask)
    return found


def filter_invariance_report(
    problem: ExtensionProblem, extension: Union[ConsequenceRelation, MonotoneOperator], structure: FiniteStructure
) -> Check:
    """Compares the filters of the base and of an extension on one structure."""
    operator = extension.operator() if isinstance(extension, ConsequenceRelation) else extension
    if len(structure) > FILTER_LIMIT:
        raise CarrierTooLargeError(f"{structure.name} has more than {FILTER_LIMIT} elements")
    base = relation_filters(problem.base_operator, problem.source, structure)
    extended = relation_filters(operator, problem.target, structure)
    name = f"filter invariance:{operator.name} on {structure.name}"
    note = "reported only; the cardinality hypotheses have no finite counterpart"
    difference = sorted(set(base) ^ set(extended))
    if not difference:
        return Check.ok(name, note)
    mask = difference[0]
    carrier = Carrier(structure.carrier)
    return Check.failed(
        name,
        {"set": [str(e) for e in carrier.members(mask)], "base filter": mask in base, "extension filter": mask in extended},
        note,
    )


def structurality_of_induced(pair: AbstractFilterPairInstance, structure_name: str, variables: VarSet) -> Check:
    return structurality_check(induced_logic(pair, structure_name, variables).operator(), variables)
