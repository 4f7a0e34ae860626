import itertools
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence, Union

import networkx as nx

from .closure import (
    EXHAUSTIVE_THRESHOLD,
    Carrier,
    ClosureOperator,
    IntersectionFamily,
    MonotoneOperator,
    MooreFamilies,
    bits,
    family_to_operator,
    first_difference,
    idempotent_hull,
    irreducible_arity,
    is_closure_operator,
    join_general,
    kary_part,
    leq_witness,
)
from .logic import (
    ConsequenceRelation,
    InexactUniverseError,
    LogicPresentation,
    Verdict,
    arity_profile,
    as_closure_operator,
    conservativity_violation,
    cut_failure,
    derive,
    is_conservative_extension,
    preimage_mask,
    saturate,
    sorted_formulas,
    structural_closure,
    structurality_check,
    substitution_index_maps,
    theory_of,
)
from .report import Check
from .terms import (
    Formula,
    SignatureError,
    Substitution,
    VarSet,
    anti_instances,
    check_disjoint,
    format_formula,
    format_formulas,
    iter_substitutions,
    substitute,
)

logger = logging.getLogger(__name__)

# full Moore-family enumeration runs alongside the interval search up to this size
MOORE_NATEXT_LIMIT = 4
INTERVAL_BUDGET = 200_000
CROSS_CHECK_LIMIT = 12

ARITY_NOTE = "equal arity profile is the finite stand-in for equal cardinality"


class InternalConsistencyError(RuntimeError):
    pass


class ExtensionKind(str, Enum):
    LS = "ls"
    SS = "ss"
    MINUS = "minus"
    PLUS = "plus"
    SUP = "sup"


@dataclass(frozen=True)
class ExtensionProblem:
    """A base presentation over X and the larger variable set Y to extend it to."""

    base: LogicPresentation
    target: VarSet

    def __post_init__(self):
        if not self.base.variables.issubset(self.target):
            raise SignatureError(
                f"{self.target.format()} does not contain {self.base.variables.format()} in order"
            )
        check_disjoint(self.base.signature, self.target)

    @classmethod
    def with_fresh(cls, base: LogicPresentation, count: int = 1) -> "ExtensionProblem":
        names = [name for name, _ in base.signature.connectives]
        return cls(base, base.variables.fresh(count, avoid=names))

    @property
    def source(self) -> VarSet:
        return self.base.variables

    @property
    def constants_only(self) -> bool:
        return self.base.is_constants_only

    @cached_property
    def extended(self) -> LogicPresentation:
        return self.base.over(self.target)

    def universe(self) -> tuple[Formula, ...]:
        return self.extended.universe()

    def carrier(self) -> Carrier:
        return self.extended.carrier()

    @cached_property
    def base_operator(self) -> ClosureOperator:
        return as_closure_operator(self.base)

    def widen(self, target: VarSet) -> "ExtensionProblem":
        return ExtensionProblem(self.base, target)

    def describe(self) -> str:
        return f"{self.base.name}: {self.source.format()} -> {self.target.format()}"


class ExtensionRelation(ConsequenceRelation):
    def __init__(self, kind: ExtensionKind, problem: ExtensionProblem, name: str, query, operator=None, arity_bound=None):
        super().__init__(
            name,
            problem.base.signature,
            problem.target,
            query,
            universe=problem.universe() if problem.constants_only else None,
            arity_bound=arity_bound,
            operator=operator,
        )
        self.kind = kind
        self.problem = problem


def _require_constants_only(problem: ExtensionProblem, what: str) -> None:
    if not problem.constants_only:
        raise InexactUniverseError(f"{what} is tabulated only for constants-only signatures")


def permutation_substitutions(variables: VarSet) -> Iterator[Substitution]:
    """Automorphisms of the formula algebra, as permutations of its variables; identity first."""
    for perm in itertools.permutations(variables.vars):
        yield Substitution({name: Formula.var(image) for name, image in zip(variables.vars, perm)})


def los_suszko(problem: ExtensionProblem, premises: Iterable[Formula], goal: Formula) -> Verdict:
    source = problem.source
    ordered = sorted_formulas(premises)
    unknown = None
    for automorphism in permutation_substitutions(problem.target):
        moved_goal = substitute(automorphism, goal)
        if not moved_goal.is_over(source):
            continue
        kept = [m for m in (substitute(automorphism, p) for p in ordered) if m.is_over(source)]
        verdict = derive(problem.base, kept, moved_goal)
        if verdict.is_yes:
            return Verdict.yes(verdict.derivation, note=f"automorphism {automorphism.format() or 'id'}")
        if verdict.is_unknown and unknown is None:
            unknown = verdict
    return unknown or Verdict.no("no variable permutation carries the pair into the base")


def ls_operator(problem: ExtensionProblem) -> MonotoneOperator:
    """Γ ↦ ⋃ v⁻¹[C(vΓ ∩ Fm(X))] over the variable permutations v."""
    _require_constants_only(problem, "the Łoś–Suszko relation")
    carrier = problem.carrier()
    base = problem.base_operator
    small = base.carrier
    index_maps = [
        [small.find(substitute(v, formula)) for formula in carrier.elements]
        for v in permutation_substitutions(problem.target)
    ]

    def function(mask: int) -> int:
        result = 0
        for index_map in index_maps:
            source = 0
            for i in bits(mask):
                if index_map[i] is not None:
                    source |= 1 << index_map[i]
            closed = base(source)
            for i, j in enumerate(index_map):
                if j is not None and closed >> j & 1:
                    result |= 1 << i
        return result

    return MonotoneOperator(carrier, function, name="ls")


def ss_substitutions(problem: ExtensionProblem, formulas: Sequence[Formula]) -> Iterator[Substitution]:
    """Candidate maps X -> Fm(Y): every used variable lands on a subterm of the given formulas."""
    if problem.constants_only:
        pool = list(problem.universe())
    else:
        pool = sorted_formulas(itertools.chain.from_iterable(f.subterms for f in formulas))
    choices = []
    for name in problem.source:
        own = Formula.var(name)
        choices.append(pool if own in pool else pool + [own])
    for images in itertools.product(*choices):
        yield Substitution(dict(zip(problem.source.vars, images)))


def lift(problem: ExtensionProblem, formulas: Iterable[Formula], v: Substitution) -> list[Formula]:
    """v⁻¹ of a set of Y-formulas, as X-formulas."""
    lifted = itertools.chain.from_iterable(anti_instances(f, v, problem.source) for f in formulas)
    return sorted_formulas(lifted)


def shoesmith_smiley(problem: ExtensionProblem, premises: Iterable[Formula], goal: Formula) -> Verdict:
    """Γ ⊢ φ when some v: X -> Fm(Y) and Γ' ⊢ φ' over X have v(Γ') ⊆ Γ and v(φ') = φ."""
    ordered = sorted_formulas(premises)
    exact = problem.base.is_exact()
    unknown = None
    for v in ss_substitutions(problem, ordered + [goal]):
        patterns = anti_instances(goal, v, problem.source)
        if not patterns:
            continue
        lifted = lift(problem, ordered, v)
        if exact:
            facts = saturate(problem.base, lifted).facts
            for pattern in patterns:
                if pattern in facts:
                    return Verdict.yes(facts[pattern], note=f"v = {v.format() or 'inclusion'}")
            continue
        for pattern in patterns:
            verdict = derive(problem.base, lifted, pattern)
            if verdict.is_yes:
                return Verdict.yes(verdict.derivation, note=f"v = {v.format() or 'inclusion'}")
            if verdict.is_unknown and unknown is None:
                unknown = verdict
    return unknown or Verdict.no("no pattern of the goal is derivable from the lifted premises")


def ss_closure(problem: ExtensionProblem, premises: Iterable[Formula]) -> frozenset[Formula]:
    """Set form ⋃ v[C(v⁻¹Γ)] for exact base presentations."""
    if not problem.base.is_exact():
        raise InexactUniverseError(f"{problem.base.name} has no exact saturation")
    ordered = sorted_formulas(premises)
    result = set()
    for v in ss_substitutions(problem, ordered):
        result.update(substitute(v, t) for t in theory_of(problem.base, lift(problem, ordered, v)))
    return frozenset(result)


def ss_operator(problem: ExtensionProblem) -> MonotoneOperator:
    _require_constants_only(problem, "the Shoesmith–Smiley relation")
    carrier = problem.carrier()
    base = problem.base_operator
    small = base.carrier
    index_maps = [
        [carrier.find(substitute(v, formula)) for formula in small.elements]
        for v in iter_substitutions(problem.source, carrier.elements)
    ]

    def function(mask: int) -> int:
        result = 0
        for index_map in index_maps:
            for i in bits(base(preimage_mask(mask, index_map))):
                result |= 1 << index_map[i]
        return result

    return MonotoneOperator(carrier, function, name="ss")


def ls_relation(problem: ExtensionProblem) -> ExtensionRelation:
    return ExtensionRelation(
        ExtensionKind.LS,
        problem,
        "ls",
        lambda premises, goal: los_suszko(problem, premises, goal),
        operator=lambda: ls_operator(problem),
    )


def ss_relation(problem: ExtensionProblem) -> ExtensionRelation:
    return ExtensionRelation(
        ExtensionKind.SS,
        problem,
        "ss",
        lambda premises, goal: shoesmith_smiley(problem, premises, goal),
        operator=lambda: ss_operator(problem),
    )


def minus_extension(problem: ExtensionProblem, cross_check: bool = True) -> ExtensionRelation:
    """Least consequence relation over Y containing the base: the rule schemes saturated over Y.

    On constants-only instances it is also computed as the idempotent hull of the
    Shoesmith–Smiley operator, and the two must agree.
    """
    extended = problem.extended

    def operator() -> ClosureOperator:
        saturated = as_closure_operator(extended)
        saturated.name = "minus"
        if cross_check and problem.constants_only and len(saturated.carrier) <= CROSS_CHECK_LIMIT:
            hull = idempotent_hull(ss_operator(problem))
            mask = first_difference(saturated, hull)
            if mask is not None:
                members = format_formulas(saturated.carrier.members(mask))
                raise InternalConsistencyError(
                    f"saturation over {problem.target.format()} and hull(ss) disagree at {members}"
                )
        return saturated

    return ExtensionRelation(
        ExtensionKind.MINUS,
        problem,
        "minus",
        lambda premises, goal: derive(extended, premises, goal),
        operator=operator,
    )


def plus_operator(problem: ExtensionProblem) -> ClosureOperator:
    """Γ ↦ ⋂σ σ⁻¹[C(σΓ)] over all σ: Y -> Fm(X)."""
    _require_constants_only(problem, "the maximal extension")
    carrier = problem.carrier()
    base = problem.base_operator
    small = base.carrier
    index_maps = [
        [small.find(substitute(sigma, formula)) for formula in carrier.elements]
        for sigma in iter_substitutions(problem.target, small.elements)
    ]

    def function(mask: int) -> int:
        result = carrier.full
        for index_map in index_maps:
            image = 0
            for i in bits(mask):
                image |= 1 << index_map[i]
            closed = base(image)
            result &= sum(1 << i for i, j in enumerate(index_map) if closed >> j & 1)
        return result

    return ClosureOperator(carrier, function, name="plus")


def _plus_all_substitutions(problem: ExtensionProblem, premises: Sequence[Formula], goal: Formula) -> Verdict:
    codomain = problem.base.universe()
    undecided = None
    count = 0
    for sigma in iter_substitutions(problem.target, codomain):
        count += 1
        verdict = derive(problem.base, [substitute(sigma, p) for p in premises], substitute(sigma, goal))
        if verdict.is_no:
            return Verdict.no(f"counter-substitution {sigma.format() or 'id'}")
        if verdict.is_unknown and undecided is None:
            undecided = verdict
    if undecided is not None:
        return Verdict.unknown(undecided.bound)
    if problem.constants_only:
        return Verdict.yes(support=premises, note=f"all {count} substitutions into Fm({problem.source.format()}) agree")
    return Verdict.unknown(
        f"substitutions into formulas of depth <= {problem.base.bounds.max_depth}", note="likely-yes"
    )


def plus_query(problem: ExtensionProblem, premises: Iterable[Formula], goal: Formula, n: Optional[int] = None) -> Verdict:
    ordered = sorted_formulas(premises)
    if goal in ordered:
        return Verdict.yes(support=[goal], note="reflexivity")
    size = len(ordered) if n is None else min(n - 1, len(ordered))
    unknown = None
    for subset in itertools.combinations(ordered, size):
        verdict = _plus_all_substitutions(problem, subset, goal)
        if verdict.is_yes:
            return verdict
        if verdict.is_unknown and unknown is None:
            unknown = verdict
    return unknown or Verdict.no("a counter-substitution exists for every small premise subset")


def plus_extension(problem: ExtensionProblem, n: Optional[int] = None) -> ExtensionRelation:
    name = "plus" if n is None else f"plus_{n}"

    def operator() -> MonotoneOperator:
        maximal = plus_operator(problem)
        part = maximal if n is None else kary_part(maximal, n)
        part.name = name
        return part

    return ExtensionRelation(
        ExtensionKind.PLUS,
        problem,
        name,
        lambda premises, goal: plus_query(problem, premises, goal, n),
        operator=operator,
        arity_bound=n,
    )


def extension_relation(problem: ExtensionProblem, kind: Union[ExtensionKind, str], n: Optional[int] = None) -> ExtensionRelation:
    kind = ExtensionKind(kind)
    if kind is ExtensionKind.LS:
        return ls_relation(problem)
    if kind is ExtensionKind.SS:
        return ss_relation(problem)
    if kind is ExtensionKind.MINUS:
        return minus_extension(problem)
    if kind is ExtensionKind.PLUS:
        return plus_extension(problem, n)
    raise ValueError(f"{kind.value} is built from a family, use natext_sup")


def default_chain_arity(problem: ExtensionProblem) -> int:
    """Arity of the maximal extension in chain checks: large enough that minus ⊆ plus_n."""
    return max(arity_profile(problem.base_operator), arity_profile(minus_extension(problem).operator()))


def inclusion_check(name: str, first: MonotoneOperator, second: MonotoneOperator) -> Check:
    mask = leq_witness(first, second)
    if mask is None:
        return Check.ok(name)
    carrier = first.carrier
    extra = carrier.members(first(mask) & ~second(mask))
    return Check.failed(name, {"premises": format_formulas(carrier.members(mask)), "goal": format_formula(extra[0])})


def equality_check(name: str, first: MonotoneOperator, second: MonotoneOperator) -> Check:
    mask = first_difference(first, second)
    if mask is None:
        return Check.ok(name)
    carrier = first.carrier
    return Check.failed(
        name,
        {
            "premises": format_formulas(carrier.members(mask)),
            "left": format_formulas(carrier.members(first(mask))),
            "right": format_formulas(carrier.members(second(mask))),
        },
    )


def _set_inclusion(name: str, premises: Sequence[Formula], first: frozenset, second: frozenset) -> Check:
    extra = sorted_formulas(first - second)
    if not extra:
        return Check.ok(name)
    return Check.failed(name, {"premises": format_formulas(premises), "goal": format_formula(extra[0])})


@dataclass
class ChainReport:
    problem: ExtensionProblem
    arity: Optional[int]
    checks: list[Check] = field(default_factory=list)
    observations: list[dict] = field(default_factory=list)
    exhaustive: bool = True

    @property
    def passed(self) -> bool:
        return all(self.checks)

    def first_failure(self) -> Optional[Check]:
        return next((check for check in self.checks if not check), None)


def check_chain(
    problem: ExtensionProblem,
    n: Optional[int] = None,
    premise_sets: Optional[Iterable[Iterable[Formula]]] = None,
) -> ChainReport:
    """ls ⊆ ss ⊆ minus ⊆ plus_n, ss = SC(ls) and minus = hull(ss).

    Constants-only instances are checked over every premise set; other exact
    instances only over the given premise sets, with plus and SC(ls) skipped.
    """
    if problem.constants_only:
        return _check_chain_tabulated(problem, n)
    if premise_sets is None:
        raise InexactUniverseError("premise sets are needed outside constants-only signatures")
    return _check_chain_pointwise(problem, [sorted_formulas(p) for p in premise_sets])


def _check_chain_tabulated(problem: ExtensionProblem, n: Optional[int]) -> ChainReport:
    ls = ls_operator(problem)
    ss = ss_operator(problem)
    minus = minus_extension(problem).operator()
    n = default_chain_arity(problem) if n is None else n
    plus = plus_extension(problem, n).operator()
    report = ChainReport(problem, n, exhaustive=problem.carrier().exhaustive)
    report.checks += [
        inclusion_check("ls ⊆ ss", ls, ss),
        inclusion_check("ss ⊆ minus", ss, minus),
        inclusion_check(f"minus ⊆ plus_{n}", minus, plus),
        equality_check("ss = SC(ls)", ss, structural_closure(ls, problem.target)),
        equality_check("minus = hull(ss)", minus, idempotent_hull(ss)),
    ]
    strict = leq_witness(minus, ss)
    if strict is not None:
        carrier = ss.carrier
        report.observations.append(
            {
                "observation": "ss ⊊ minus",
                "premises": format_formulas(carrier.members(strict)),
                "goal": format_formula(carrier.members(minus(strict) & ~ss(strict))[0]),
            }
        )
    failure = cut_failure(ss)
    if failure is not None:
        report.observations.append({"observation": "ss is not cut-closed", **failure.to_dict()})
    logger.info("chain on %s: %s", problem.describe(), "pass" if report.passed else "fail")
    return report


def _check_chain_pointwise(problem: ExtensionProblem, premise_sets: list[list[Formula]]) -> ChainReport:
    if not problem.base.is_exact():
        raise InexactUniverseError(f"{problem.base.name} has no exact saturation")
    report = ChainReport(problem, None, exhaustive=False)
    universe = problem.universe()
    for premises in premise_sets:
        minus = theory_of(problem.extended, premises)
        ss = ss_closure(problem, premises)
        goals = sorted_formulas(set(universe) | minus | ss)
        ls = frozenset(g for g in goals if los_suszko(problem, premises, g).is_yes)
        hull = ss
        while True:
            following = ss_closure(problem, hull)
            if following == hull:
                break
            hull = following
        report.checks += [
            _set_inclusion("ls ⊆ ss", premises, ls, ss),
            _set_inclusion("ss ⊆ minus", premises, ss, minus),
            _set_inclusion("hull(ss) ⊆ minus", premises, hull, minus),
            _set_inclusion("minus ⊆ hull(ss)", premises, minus, hull),
        ]
        if minus - ss:
            lemmas = sorted_formulas(ss - frozenset(premises))
            report.observations.append(
                {
                    "observation": "ss is not cut-closed",
                    "premises": format_formulas(premises),
                    "lemmas": format_formulas(lemmas),
                    "goal": format_formula(sorted_formulas(minus - ss)[0]),
                }
            )
    report.checks.append(Check.skip("minus ⊆ plus", "the substitution space of plus is infinite here"))
    report.checks.append(Check.skip("ss = SC(ls)", "needs a finite universe"))
    return report


def restriction_report(problem: ExtensionProblem, wider: VarSet) -> list[Check]:
    """For X ⊆ Y ⊆ Z: minus over Z restricted to Fm(Y) is minus over Y, and to Fm(X) is the base."""
    outer = problem.widen(wider)
    minus_y = minus_extension(problem).operator()
    minus_z = minus_extension(outer).operator()
    checks = []
    for name, small in ((f"restrict to {problem.target.format()}", minus_y), (f"restrict to {problem.source.format()}", problem.base_operator)):
        violation = conservativity_violation(small, minus_z)
        if violation is None:
            checks.append(Check.ok(name))
        else:
            mask, formula, side = violation
            checks.append(
                Check.failed(
                    name,
                    {"premises": format_formulas(small.carrier.members(mask)), "goal": format_formula(formula), "derivable": side},
                )
            )
    return checks


def natural_extension_checks(problem: ExtensionProblem, relation: Union[ConsequenceRelation, MonotoneOperator]) -> list[Check]:
    operator = relation.operator() if isinstance(relation, ConsequenceRelation) else relation
    closure = is_closure_operator(operator)
    checks = []
    if closure.ok:
        checks.append(Check.ok(f"closure:{operator.name}"))
    else:
        failure = closure.failure()
        witness = getattr(closure, failure)
        masks = witness if isinstance(witness, tuple) else (witness,)
        checks.append(
            Check.failed(
                f"closure:{operator.name}",
                {"property": failure, "premises": [format_formulas(operator.carrier.members(m)) for m in masks]},
            )
        )
    checks.append(structurality_check(operator, problem.target))
    checks.append(is_conservative_extension(problem.base_operator, operator))
    base_profile = arity_profile(problem.base_operator)
    profile = arity_profile(operator)
    if profile == base_profile:
        checks.append(Check.ok(f"arity:{operator.name}", ARITY_NOTE))
    else:
        checks.append(Check.failed(f"arity:{operator.name}", {"base": base_profile, "extension": profile}, ARITY_NOTE))
    return checks


def is_natural_extension(problem: ExtensionProblem, relation: Union[ConsequenceRelation, MonotoneOperator]) -> Check:
    checks = natural_extension_checks(problem, relation)
    name = checks[0].name.partition(":")[2]
    failed = next((check for check in checks if not check), None)
    if failed is None:
        return Check.ok(f"natural:{name}", ARITY_NOTE)
    return Check.failed(f"natural:{name}", {"check": failed.name, **(failed.witness or {})}, ARITY_NOTE)


class NaturalExtensionLattice:
    """Natural extensions as intersection families, weakest first, with order and bound tables."""

    def __init__(
        self,
        carrier: Carrier,
        members: Sequence[IntersectionFamily],
        arity: int,
        labels: Optional[Sequence[str]] = None,
        complete: bool = True,
        mode: str = "interval",
    ):
        self.carrier = carrier
        self.members = list(members)
        self.arity = arity
        self.labels = list(labels) if labels else [f"E{i}" for i in range(len(self.members))]
        self.complete = complete
        self.mode = mode
        closed = [set(member) for member in self.members]
        count = len(self.members)
        # order[i][j]: member i is weaker than or equal to member j
        self.order = [[closed[j] <= closed[i] for j in range(count)] for i in range(count)]
        self.meet_table = [[self._greatest_lower(i, j) for j in range(count)] for i in range(count)]
        self.join_table = [[self._least_upper(i, j) for j in range(count)] for i in range(count)]

    def __len__(self) -> int:
        return len(self.members)

    def leq(self, i: int, j: int) -> bool:
        return self.order[i][j]

    def _greatest_lower(self, i: int, j: int) -> Optional[int]:
        lower = [k for k in range(len(self)) if self.order[k][i] and self.order[k][j]]
        greatest = [k for k in lower if all(self.order[m][k] for m in lower)]
        return greatest[0] if greatest else None

    def _least_upper(self, i: int, j: int) -> Optional[int]:
        upper = [k for k in range(len(self)) if self.order[i][k] and self.order[j][k]]
        least = [k for k in upper if all(self.order[k][m] for m in upper)]
        return least[0] if least else None

    @property
    def bottom(self) -> Optional[int]:
        return next((i for i in range(len(self)) if all(self.order[i])), None)

    @property
    def top(self) -> Optional[int]:
        return next((j for j in range(len(self)) if all(row[j] for row in self.order)), None)

    def is_lattice(self) -> bool:
        tables = self.meet_table + self.join_table
        return all(entry is not None for row in tables for entry in row)

    def operator(self, i: int) -> ClosureOperator:
        return family_to_operator(self.members[i], self.labels[i])

    def index_of(self, family: IntersectionFamily) -> Optional[int]:
        return next((i for i, member in enumerate(self.members) if member == family), None)

    def to_graph(self) -> nx.DiGraph:
        """Hasse diagram, edges pointing from weaker to stronger."""
        graph = nx.DiGraph()
        for i, label in enumerate(self.labels):
            graph.add_node(i, label=label, closed_sets=len(self.members[i]))
        for i in range(len(self)):
            for j in range(len(self)):
                if i != j and self.order[i][j]:
                    graph.add_edge(i, j)
        hasse = nx.transitive_reduction(graph)
        hasse.add_nodes_from(graph.nodes(data=True))
        return hasse

    def to_dot(self) -> str:
        graph = self.to_graph()
        lines = ["digraph natural_extensions {", "    rankdir=BT;"]
        for node, data in sorted(graph.nodes(data=True)):
            shape = "doublecircle" if node in (self.bottom, self.top) else "circle"
            lines.append(f'    n{node} [label="{data["label"]}", shape={shape}];')
        for source, target in sorted(graph.edges()):
            lines.append(f"    n{source} -> n{target};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "universe": [str(e) for e in self.carrier.elements],
            "arity": self.arity,
            "mode": self.mode,
            "complete": self.complete,
            "labels": self.labels,
            "members": [[sorted(str(e) for e in s) for s in member.as_sets()] for member in self.members],
            "order": self.order,
            "meet": self.meet_table,
            "join": self.join_table,
            "bottom": self.bottom,
            "top": self.top,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=4, ensure_ascii=False)

    @classmethod
    def from_dict(cls, data: dict) -> "NaturalExtensionLattice":
        """Rebuilds the lattice over the formula texts and re-verifies every table."""
        carrier = Carrier(data["universe"])
        members = [IntersectionFamily(carrier, [carrier.mask(s) for s in member]) for member in data["members"]]
        lattice = cls(carrier, members, data["arity"], data["labels"], data["complete"], data["mode"])
        for key, table in (("order", lattice.order), ("meet", lattice.meet_table), ("join", lattice.join_table)):
            if data[key] != table:
                raise ValueError(f"stored {key} table does not match the members")
        if data["bottom"] != lattice.bottom or data["top"] != lattice.top:
            raise ValueError("stored bottom or top does not match the members")
        return lattice

    @classmethod
    def from_json(cls, text: str) -> "NaturalExtensionLattice":
        return cls.from_dict(json.loads(text))


def _is_natural_family(
    family: IntersectionFamily,
    index_maps: Sequence[Sequence[Optional[int]]],
    base: ClosureOperator,
    arity: int,
) -> bool:
    for closed in family:
        for index_map in index_maps:
            if preimage_mask(closed, index_map) not in family:
                return False
    operator = family_to_operator(family)
    if conservativity_violation(base, operator) is not None:
        return False
    return irreducible_arity(operator) == arity


def _strength_key(family: IntersectionFamily) -> tuple:
    return -len(family), sorted(family)


def enumerate_natural_extensions(problem: ExtensionProblem, budget: int = INTERVAL_BUDGET) -> NaturalExtensionLattice:
    """Every structural conservative closure operator over Fm(Y) with the base's arity profile.

    Every such operator lies between minus and plus_n, so the search runs over
    intersection families in that interval; on the smallest universes the full
    Moore-family enumeration runs too and must agree.
    """
    _require_constants_only(problem, "natural extension enumeration")
    carrier = problem.carrier()
    if len(carrier) > EXHAUSTIVE_THRESHOLD:
        raise InexactUniverseError(f"Fm({problem.target.format()}) has more than {EXHAUSTIVE_THRESHOLD} formulas")
    base = problem.base_operator
    arity = arity_profile(base)
    minus = minus_extension(problem).operator()
    plus = plus_extension(problem, arity).operator()
    index_maps = [index_map for _, index_map in substitution_index_maps(carrier, problem.target)]

    search = MooreFamilies(carrier, minus.fixed_points(), plus.fixed_points(), budget)
    members = [family for family in search if _is_natural_family(family, index_maps, base, arity)]
    mode = "interval"
    if len(carrier) <= MOORE_NATEXT_LIMIT:
        mode = "moore"
        everything = [family for family in MooreFamilies(carrier) if _is_natural_family(family, index_maps, base, arity)]
        if search.complete and set(everything) != set(members):
            raise InternalConsistencyError("interval search and full enumeration found different natural extensions")
        members = everything
    elif not search.complete:
        logger.warning("natural extension search on %s hit its budget; the list may be incomplete", problem.describe())

    members.sort(key=_strength_key)
    minus_family = IntersectionFamily(carrier, minus.fixed_points())
    plus_family = IntersectionFamily(carrier, plus.fixed_points()) if plus.idempotent is not False else None
    labels = []
    for i, member in enumerate(members):
        if member == minus_family:
            labels.append("minus")
        elif member == plus_family:
            labels.append(f"plus_{arity}")
        else:
            labels.append(f"E{i}")
    logger.info("%d natural extension(s) for %s", len(members), problem.describe())
    return NaturalExtensionLattice(carrier, members, arity, labels, search.complete or mode == "moore", mode)


def natext_sup(relations: Sequence[Union[ConsequenceRelation, MonotoneOperator]], n: Optional[int] = None) -> MonotoneOperator:
    """Least n-ary upper bound: ∪ over small N ⊆ M of the least set above N closed for every member."""
    operators = [r.operator() if isinstance(r, ConsequenceRelation) else r for r in relations]
    return join_general(operators, n)


def lattice_checks(problem: ExtensionProblem, lattice: NaturalExtensionLattice) -> list[Check]:
    """Bounds, pairwise meets and joins, and closure of the members under natext_sup."""
    checks = []
    labels = lattice.labels
    checks.append(
        Check.ok("bottom is minus")
        if lattice.bottom is not None and labels[lattice.bottom] == "minus"
        else Check.failed("bottom is minus", {"bottom": lattice.bottom})
    )
    top_label = f"plus_{lattice.arity}"
    if top_label in labels:
        checks.append(
            Check.ok("top is plus")
            if lattice.top is not None and labels[lattice.top] == top_label
            else Check.failed("top is plus", {"top": lattice.top})
        )
    else:
        checks.append(Check.skip("top is plus", f"{top_label} is not a natural extension here"))
    checks.append(Check.ok("pairwise bounds") if lattice.is_lattice() else Check.failed("pairwise bounds", {"meet": lattice.meet_table, "join": lattice.join_table}))

    operators = [lattice.operator(i) for i in range(len(lattice))]
    for i, j in itertools.combinations_with_replacement(range(len(lattice)), 2):
        sup = natext_sup([operators[i], operators[j]], lattice.arity)
        match = next((k for k, op in enumerate(operators) if first_difference(sup, op) is None), None)
        if match is None or match != lattice.join_table[i][j]:
            checks.append(Check.failed("closed under sup", {"pair": [labels[i], labels[j]], "found": match}))
            break
    else:
        checks.append(Check.ok("closed under sup"))
    return checks
