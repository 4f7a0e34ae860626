import itertools
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

from .closure import (
    Carrier,
    ClosureOperator,
    MonotoneOperator,
    bits,
    irreducible_arity,
    is_idempotent,
    kary_part,
    popcount,
)
from .report import Check
from .terms import (
    ArityError,
    Formula,
    Signature,
    SignatureError,
    Substitution,
    UnknownSymbolError,
    VarSet,
    check_disjoint,
    enumerate_formulas,
    extend_match,
    format_formula,
    format_formulas,
    iter_substitutions,
    parse_formula,
    parse_formula_list,
    substitute,
)

logger = logging.getLogger(__name__)

DEFAULT_DEPTH = 2
DEFAULT_ITERATIONS = 64


class InexactUniverseError(ValueError):
    pass


def check_formula(formula: Formula, signature: Signature, variables: VarSet) -> None:
    if formula.is_variable:
        if formula.symbol not in variables:
            raise UnknownSymbolError(f"unknown variable {formula.symbol!r}")
        return
    arity = signature.arity(formula.symbol)
    if len(formula.args) != arity:
        raise ArityError(f"{formula.symbol} takes {arity} argument(s), got {len(formula.args)}")
    for arg in formula.args:
        check_formula(arg, signature, variables)


def variable_depths(formula: Formula, depth: int = 0, found: Optional[dict] = None) -> dict[str, int]:
    """Deepest position of every variable occurring in the formula."""
    found = {} if found is None else found
    if formula.is_variable:
        found[formula.symbol] = max(depth, found.get(formula.symbol, 0))
    for arg in formula.args:
        variable_depths(arg, depth + 1, found)
    return found


def sorted_formulas(formulas: Iterable[Formula]) -> list[Formula]:
    return sorted(set(formulas), key=Formula.sort_key)


@dataclass(frozen=True)
class Rule:
    premises: tuple[Formula, ...]
    conclusion: Formula

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))

    @classmethod
    def parse(cls, text: str, signature: Signature, variables: VarSet) -> "Rule":
        premises, sep, conclusion = text.partition("=>")
        if not sep:
            raise ValueError(f"rule {text!r} has no '=>'")
        return cls(
            tuple(parse_formula_list(premises, signature, variables)),
            parse_formula(conclusion, signature, variables),
        )

    @cached_property
    def premise_variables(self) -> frozenset[str]:
        return frozenset().union(*(p.variables for p in self.premises))

    @cached_property
    def free_variables(self) -> tuple[str, ...]:
        """Conclusion variables that no premise binds, in name order."""
        return tuple(sorted(self.conclusion.variables - self.premise_variables))

    def is_non_deepening(self) -> bool:
        premise_depths = {}
        for premise in self.premises:
            variable_depths(premise, found=premise_depths)
        for name, depth in variable_depths(self.conclusion).items():
            if name not in premise_depths or depth > premise_depths[name]:
                return False
        return True

    def format(self) -> str:
        premises = ", ".join(format_formulas(self.premises))
        return f"{premises} => {format_formula(self.conclusion)}" if premises else f"=> {format_formula(self.conclusion)}"

    def __str__(self) -> str:
        return self.format()


@dataclass(frozen=True)
class SearchBounds:
    max_depth: int = DEFAULT_DEPTH
    max_iterations: int = DEFAULT_ITERATIONS
    exact: bool = False

    @classmethod
    def parse(cls, text: str) -> "SearchBounds":
        values = {}
        for entry in text.split():
            key, sep, value = entry.partition("=")
            if not sep or key not in ("depth", "iters") or not value.isdigit():
                raise ValueError(f"bad bounds entry {entry!r}, expected depth=N or iters=N")
            values[key] = int(value)
        return cls(values.get("depth", DEFAULT_DEPTH), values.get("iters", DEFAULT_ITERATIONS))

    def format(self) -> str:
        return f"depth={self.max_depth} iters={self.max_iterations}"


@dataclass(frozen=True)
class LogicPresentation:
    signature: Signature
    variables: VarSet
    rules: tuple[Rule, ...] = ()
    bounds: SearchBounds = SearchBounds()
    name: str = "l"

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        if not len(self.variables):
            raise SignatureError("a presentation needs at least one variable")
        check_disjoint(self.signature, self.variables)
        for rule in self.rules:
            for formula in rule.premises + (rule.conclusion,):
                check_formula(formula, self.signature, self.variables)
        object.__setattr__(self, "bounds", replace(self.bounds, exact=self._exact()))

    def _exact(self) -> bool:
        if self.signature.is_constants_only:
            return True
        return all(not rule.free_variables and rule.is_non_deepening() for rule in self.rules)

    @property
    def is_constants_only(self) -> bool:
        return self.signature.is_constants_only

    def is_exact(self) -> bool:
        """Saturation from any finite premise set terminates with a sound No."""
        return self.bounds.exact

    def over(self, variables: VarSet) -> "LogicPresentation":
        """The same rule schemes read over another variable set."""
        if not self.variables.issubset(variables):
            raise SignatureError(f"{variables.format()} does not extend {self.variables.format()}")
        return replace(self, variables=variables, name=f"{self.name}[{variables.format()}]")

    def with_bounds(self, bounds: SearchBounds) -> "LogicPresentation":
        return replace(self, bounds=bounds)

    @cached_property
    def conclusion_depth(self) -> int:
        return max((rule.conclusion.depth for rule in self.rules), default=0)

    def universe(self, depth: Optional[int] = None) -> tuple[Formula, ...]:
        if self.is_constants_only:
            return self._finite_universe
        return tuple(enumerate_formulas(self.signature, self.variables, self.bounds.max_depth if depth is None else depth))

    @cached_property
    def _finite_universe(self) -> tuple[Formula, ...]:
        return tuple(enumerate_formulas(self.signature, self.variables, 0))

    def carrier(self, depth: Optional[int] = None) -> Carrier:
        if self.is_constants_only:
            return self._finite_carrier
        return Carrier(self.universe(depth))

    @cached_property
    def _finite_carrier(self) -> Carrier:
        return Carrier(self._finite_universe)

    def parse(self, text: str) -> Formula:
        return parse_formula(text, self.signature, self.variables)

    def parse_list(self, text: str) -> list[Formula]:
        return parse_formula_list(text, self.signature, self.variables)


@dataclass(frozen=True, eq=False)
class Derivation:
    conclusion: Formula
    rule: Optional[Rule] = None
    substitution: Substitution = field(default_factory=Substitution)
    children: tuple["Derivation", ...] = ()

    @property
    def is_premise(self) -> bool:
        return self.rule is None

    def leaves(self) -> frozenset[Formula]:
        if self.is_premise:
            return frozenset([self.conclusion])
        return frozenset().union(*(child.leaves() for child in self.children))

    @property
    def height(self) -> int:
        return 1 + max((child.height for child in self.children), default=-1)

    def replay(self, presentation: LogicPresentation, premises: Iterable[Formula]) -> Optional[str]:
        """Re-checks every step; returns a description of the first bad step."""
        premises = set(premises)
        if self.is_premise:
            return None if self.conclusion in premises else f"{self.conclusion} is not a premise"
        if self.rule not in presentation.rules:
            return f"{self.rule} is not a rule of {presentation.name}"
        if substitute(self.substitution, self.rule.conclusion) != self.conclusion:
            return f"{self.rule} does not conclude {self.conclusion} under {self.substitution.format()}"
        expected = [substitute(self.substitution, p) for p in self.rule.premises]
        if expected != [child.conclusion for child in self.children]:
            return f"premises of {self.rule} do not match the subderivations of {self.conclusion}"
        for child in self.children:
            problem = child.replay(presentation, premises)
            if problem:
                return problem
        return None

    def to_dict(self) -> dict:
        if self.is_premise:
            return {"conclusion": format_formula(self.conclusion), "rule": "premise"}
        return {
            "conclusion": format_formula(self.conclusion),
            "rule": self.rule.format(),
            "substitution": {name: format_formula(term) for name, term in self.substitution.items()},
            "children": [child.to_dict() for child in self.children],
        }


class Answer(str, Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Verdict:
    answer: Answer
    derivation: Optional[Derivation] = None
    support: tuple[Formula, ...] = ()
    bound: Optional[str] = None
    note: Optional[str] = None

    @classmethod
    def yes(cls, derivation: Optional[Derivation] = None, support: Iterable[Formula] = (), note: Optional[str] = None) -> "Verdict":
        if derivation is not None and not support:
            support = derivation.leaves()
        return cls(Answer.YES, derivation, tuple(sorted_formulas(support)), note=note)

    @classmethod
    def no(cls, note: Optional[str] = None) -> "Verdict":
        return cls(Answer.NO, note=note)

    @classmethod
    def unknown(cls, bound: str, note: Optional[str] = None) -> "Verdict":
        return cls(Answer.UNKNOWN, bound=bound, note=note)

    @property
    def is_yes(self) -> bool:
        return self.answer is Answer.YES

    @property
    def is_no(self) -> bool:
        return self.answer is Answer.NO

    @property
    def is_unknown(self) -> bool:
        return self.answer is Answer.UNKNOWN

    def to_dict(self) -> dict:
        data = {"answer": self.answer.value}
        if self.support:
            data["support"] = format_formulas(self.support)
        if self.derivation is not None:
            data["derivation"] = self.derivation.to_dict()
        if self.bound:
            data["bound"] = self.bound
        if self.note:
            data["note"] = self.note
        return data


@dataclass
class Saturation:
    facts: dict[Formula, Derivation]
    closed: bool
    truncated: bool
    rounds: int
    bound: Optional[str] = None

    @property
    def complete(self) -> bool:
        return self.closed and not self.truncated


def premise_bindings(
    premises: Sequence[Formula], facts: Sequence[Formula], bound: Optional[dict] = None
) -> Iterator[dict[str, Formula]]:
    """Every binding sending all premises into `facts`, in fact order."""
    bound = {} if bound is None else bound
    if not premises:
        yield bound
        return
    first, rest = premises[0], premises[1:]
    for fact in facts:
        attempt = dict(bound)
        if extend_match(first, fact, attempt):
            yield from premise_bindings(rest, facts, attempt)


def saturate(
    presentation: LogicPresentation, premises: Iterable[Formula], goal: Optional[Formula] = None
) -> Saturation:
    """Forward chaining from the premises, round by round.

    Rules fire in declaration order against the facts known at the start of the
    round. Without exact bounds, conclusions deeper than the depth limit are
    dropped and the round count is capped; either marks the result truncated.
    """
    exact = presentation.is_exact()
    constants_only = presentation.is_constants_only
    ordered = sorted_formulas(premises)
    facts = {premise: Derivation(premise) for premise in ordered}
    inputs = ordered + ([goal] if goal is not None else [])
    depth_limit = max([presentation.bounds.max_depth] + [f.depth for f in inputs])

    universe = None
    truncated = False
    bound = None
    closed = False
    rounds = 0
    while goal is None or goal not in facts:
        if not exact and rounds >= presentation.bounds.max_iterations:
            bound = bound or f"max_iterations={presentation.bounds.max_iterations}"
            truncated = True
            break
        rounds += 1
        known = list(facts)
        fresh: dict[Formula, Derivation] = {}
        for rule in presentation.rules:
            for binding in premise_bindings(rule.premises, known):
                images: Iterable[tuple] = [()]
                if rule.free_variables:
                    if universe is None:
                        universe = presentation.universe(depth_limit)
                    if not constants_only:
                        truncated = True
                        bound = bound or f"max_depth={depth_limit}"
                    images = itertools.product(universe, repeat=len(rule.free_variables))
                for values in images:
                    full = dict(binding)
                    full.update(zip(rule.free_variables, values))
                    conclusion = substitute(full, rule.conclusion)
                    if conclusion in facts or conclusion in fresh:
                        continue
                    if not exact and conclusion.depth > depth_limit:
                        truncated = True
                        bound = bound or f"max_depth={depth_limit}"
                        continue
                    children = tuple(facts[substitute(full, p)] for p in rule.premises)
                    fresh[conclusion] = Derivation(conclusion, rule, Substitution(full), children)
        if not fresh:
            closed = True
            break
        facts.update(fresh)

    logger.debug("saturated %s in %d round(s), %d facts", presentation.name, rounds, len(facts))
    return Saturation(facts, closed, truncated, rounds, bound)


def derive(presentation: LogicPresentation, premises: Iterable[Formula], goal: Formula) -> Verdict:
    saturation = saturate(presentation, premises, goal)
    if goal in saturation.facts:
        return Verdict.yes(saturation.facts[goal])
    if saturation.complete:
        return Verdict.no("saturation closed")
    return Verdict.unknown(saturation.bound or "bounds")


def theory_of(presentation: LogicPresentation, premises: Iterable[Formula]) -> frozenset[Formula]:
    saturation = saturate(presentation, premises)
    if not saturation.complete:
        raise InexactUniverseError(
            f"the theory generated in {presentation.name} is not finite within {saturation.bound}; "
            "ask membership questions with derive instead"
        )
    return frozenset(saturation.facts)


def theory_violation(presentation: LogicPresentation, theory: Iterable[Formula]) -> Optional[tuple[Rule, Substitution]]:
    """A rule instance with premises inside the set and conclusion outside, if any."""
    members = set(theory)
    facts = sorted_formulas(members)
    for rule in presentation.rules:
        for binding in premise_bindings(rule.premises, facts):
            images: Iterable[tuple] = [()]
            if rule.free_variables:
                if not presentation.is_constants_only:
                    raise InexactUniverseError(f"{rule} instantiates over an infinite universe")
                images = itertools.product(presentation.universe(), repeat=len(rule.free_variables))
            for values in images:
                full = dict(binding)
                full.update(zip(rule.free_variables, values))
                if substitute(full, rule.conclusion) not in members:
                    return rule, Substitution(full)
    return None


def is_theory(presentation: LogicPresentation, theory: Iterable[Formula]) -> bool:
    return theory_violation(presentation, theory) is None


def as_closure_operator(presentation: LogicPresentation, depth: Optional[int] = None) -> ClosureOperator:
    """C(Γ) = theory of Γ, on the constants-only universe or an exact depth-bounded one."""
    if not presentation.is_constants_only:
        if not presentation.is_exact():
            raise InexactUniverseError(f"{presentation.name} has no finite universe closed under its rules")
        depth = presentation.bounds.max_depth if depth is None else depth
        if depth < presentation.conclusion_depth:
            raise InexactUniverseError(f"depth {depth} is below the depth of a rule conclusion")
    carrier = presentation.carrier(depth)

    def function(mask: int) -> int:
        theory = theory_of(presentation, carrier.members(mask))
        return carrier.mask(f for f in theory if f in carrier)

    return ClosureOperator(carrier, function, name=presentation.name)


class ConsequenceRelation:
    """Three-valued query interface, optionally backed by an operator on a finite universe."""

    def __init__(
        self,
        name: str,
        signature: Signature,
        variables: VarSet,
        query: Callable[[frozenset, Formula], Verdict],
        universe: Optional[Sequence[Formula]] = None,
        arity_bound: Optional[int] = None,
        operator: Optional[Callable[[], MonotoneOperator]] = None,
    ):
        self.name = name
        self.signature = signature
        self.variables = variables
        self._query = query
        self.universe = tuple(universe) if universe is not None else None
        self.arity_bound = arity_bound
        self._operator_factory = operator
        self._operator = None

    def query(self, premises: Iterable[Formula], goal: Formula) -> Verdict:
        return self._query(frozenset(premises), goal)

    def entails(self, premises: Iterable[Formula], goal: Formula) -> bool:
        return self.query(premises, goal).is_yes

    @property
    def carrier(self) -> Carrier:
        if self.universe is None:
            raise InexactUniverseError(f"{self.name} has no finite universe")
        return self.operator().carrier

    def operator(self) -> MonotoneOperator:
        if self._operator is None:
            if self._operator_factory is not None:
                self._operator = self._operator_factory()
            else:
                self._operator = self._tabulate()
        return self._operator

    def _tabulate(self) -> MonotoneOperator:
        if self.universe is None:
            raise InexactUniverseError(f"{self.name} has no finite universe")
        carrier = Carrier(self.universe)

        def function(mask: int) -> int:
            premises = carrier.members(mask)
            result = mask
            for i, goal in enumerate(carrier.elements):
                if result >> i & 1:
                    continue
                verdict = self.query(premises, goal)
                if verdict.is_unknown:
                    raise InexactUniverseError(f"{self.name}: {verdict.bound} reached")
                if verdict.is_yes:
                    result |= 1 << i
            return result

        return MonotoneOperator(carrier, function, self.arity_bound, self.name)

    def closure(self, premises: Iterable[Formula]) -> frozenset[Formula]:
        return self.operator().apply(premises)

    def __repr__(self) -> str:
        return f"ConsequenceRelation({self.name!r})"


def derivability(presentation: LogicPresentation) -> ConsequenceRelation:
    universe = presentation.universe() if presentation.is_constants_only else None
    return ConsequenceRelation(
        presentation.name,
        presentation.signature,
        presentation.variables,
        lambda premises, goal: derive(presentation, premises, goal),
        universe=universe,
        operator=lambda: as_closure_operator(presentation),
    )


def kary_part_of_logic(presentation: LogicPresentation, n: Optional[int] = None) -> ConsequenceRelation:
    """Γ ⊢ₙ φ iff φ ∈ Γ or some Γ' ⊆ Γ with |Γ'| < n derives φ."""
    if n is None:
        return derivability(presentation)

    def query(premises: frozenset, goal: Formula) -> Verdict:
        if goal in premises:
            return Verdict.yes(Derivation(goal), note="reflexivity")
        ordered = sorted_formulas(premises)
        size = min(n - 1, len(ordered))
        unknown = None
        for subset in itertools.combinations(ordered, size):
            verdict = derive(presentation, subset, goal)
            if verdict.is_yes:
                return verdict
            if verdict.is_unknown and unknown is None:
                unknown = verdict
        return unknown or Verdict.no(f"no premise subset of size {size} suffices")

    universe = presentation.universe() if presentation.is_constants_only else None
    return ConsequenceRelation(
        f"{presentation.name}_{n}",
        presentation.signature,
        presentation.variables,
        query,
        universe=universe,
        arity_bound=n,
        operator=lambda: kary_part(as_closure_operator(presentation), n),
    )


@dataclass(frozen=True)
class CutFailure:
    """Γ yields every lemma, Γ plus the lemmas yields the goal, Γ alone does not."""

    premises: tuple[Formula, ...]
    lemmas: tuple[Formula, ...]
    goal: Formula
    support: tuple[Formula, ...]

    def to_dict(self) -> dict:
        return {
            "premises": format_formulas(self.premises),
            "lemmas": format_formulas(self.lemmas),
            "goal": format_formula(self.goal),
            "support": format_formulas(self.support),
        }


def cut_failure(operator: MonotoneOperator) -> Optional[CutFailure]:
    witness = is_idempotent(operator)
    if witness is None:
        return None
    carrier = operator.carrier
    first = operator(witness)
    second = operator(first)
    goal_index = bits(second & ~first)[0]
    support = ()
    for size in range(popcount(first) + 1):
        found = next(
            (
                sub
                for sub in itertools.combinations(bits(first), size)
                if operator(sum(1 << i for i in sub)) >> goal_index & 1
            ),
            None,
        )
        if found is not None:
            support = tuple(carrier.elements[i] for i in found)
            break
    return CutFailure(
        carrier.members(witness),
        carrier.members(first & ~witness),
        carrier.elements[goal_index],
        support,
    )


def kary_cut_failure(presentation: LogicPresentation, n: int) -> Optional[CutFailure]:
    return cut_failure(kary_part_of_logic(presentation, n).operator())


def substitution_index_maps(carrier: Carrier, variables: Iterable[str]) -> Iterator[tuple[Substitution, list[Optional[int]]]]:
    """For each substitution into the carrier, where it sends each carrier element."""
    for sigma in iter_substitutions(variables, carrier.elements):
        yield sigma, [carrier.find(substitute(sigma, formula)) for formula in carrier.elements]


def image_mask(mask: int, index_map: Sequence[Optional[int]]) -> Optional[int]:
    result = 0
    for i in bits(mask):
        j = index_map[i]
        if j is None:
            return None
        result |= 1 << j
    return result


def preimage_mask(mask: int, index_map: Sequence[Optional[int]]) -> int:
    result = 0
    for i, j in enumerate(index_map):
        if j is not None and mask >> j & 1:
            result |= 1 << i
    return result


def structural_violation(
    operator: MonotoneOperator, variables: Iterable[str]
) -> Optional[tuple[Substitution, int, Formula]]:
    """(σ, S, φ) with φ ∈ E(S) but σφ ∉ E(σS), over substitutions into the carrier."""
    carrier = operator.carrier
    for sigma, index_map in substitution_index_maps(carrier, variables):
        for mask in carrier.sample_masks():
            moved = image_mask(mask, index_map)
            if moved is None:
                continue
            target = operator(moved)
            for i in bits(operator(mask)):
                j = index_map[i]
                if j is not None and not target >> j & 1:
                    return sigma, mask, carrier.elements[i]
    return None


def structurality_check(relation: Union[ConsequenceRelation, MonotoneOperator], variables: Optional[VarSet] = None) -> Check:
    if isinstance(relation, ConsequenceRelation):
        variables = variables or relation.variables
        operator = relation.operator()
    else:
        operator = relation
    violation = structural_violation(operator, variables)
    if violation is None:
        return Check.ok(f"structural:{operator.name}")
    sigma, mask, formula = violation
    return Check.failed(
        f"structural:{operator.name}",
        {
            "substitution": sigma.format(),
            "premises": format_formulas(operator.carrier.members(mask)),
            "goal": format_formula(formula),
        },
    )


def arity_profile(relation: Union[ConsequenceRelation, MonotoneOperator]) -> int:
    """Least n whose n-ary part is the whole relation; a finite stand-in for cardinality."""
    operator = relation.operator() if isinstance(relation, ConsequenceRelation) else relation
    return irreducible_arity(operator)


def structural_closure(
    relation: Union[MonotoneOperator, Iterable[tuple[Iterable[Formula], Formula]]],
    variables: Iterable[str],
    carrier: Optional[Carrier] = None,
) -> MonotoneOperator:
    """Least reflexive, monotone, substitution-stable relation containing the given pairs.

    SC(Δ) = Δ ∪ ⋃σ σ[R(σ⁻¹Δ)] for a monotone R.
    """
    if not isinstance(relation, MonotoneOperator):
        if carrier is None:
            raise ValueError("a carrier is needed to read a relation given as pairs")
        pairs = [(carrier.mask(premises), carrier.find(goal)) for premises, goal in relation]

        def base(mask: int) -> int:
            result = 0
            for premises, goal in pairs:
                if premises & mask == premises and goal is not None:
                    result |= 1 << goal
            return result

        relation = MonotoneOperator(carrier, base, name="R")
    carrier = relation.carrier
    index_maps = [index_map for _, index_map in substitution_index_maps(carrier, variables)]

    def function(mask: int) -> int:
        result = mask
        for index_map in index_maps:
            for i in bits(relation(preimage_mask(mask, index_map))):
                j = index_map[i]
                if j is not None:
                    result |= 1 << j
        return result

    return MonotoneOperator(carrier, function, name=f"SC({relation.name})")


def conservativity_violation(
    base: MonotoneOperator, extension: MonotoneOperator
) -> Optional[tuple[int, Formula, str]]:
    """(S, φ, side) where the extension and the base disagree on S ⊆ base carrier."""
    small, big = base.carrier, extension.carrier
    embed = []
    for formula in small.elements:
        position = big.find(formula)
        if position is None:
            raise ValueError(f"{formula} is missing from the extension's universe")
        embed.append(position)
    for mask in small.sample_masks():
        image = extension(sum(1 << embed[i] for i in bits(mask)))
        actual = sum(1 << i for i, j in enumerate(embed) if image >> j & 1)
        expected = base(mask)
        if actual != expected:
            i = bits(actual ^ expected)[0]
            side = "extension only" if actual >> i & 1 else "base only"
            return mask, small.elements[i], side
    return None


def is_conservative_extension(
    base: Union[LogicPresentation, ConsequenceRelation, MonotoneOperator],
    extension: Union[ConsequenceRelation, MonotoneOperator],
    variables: Optional[VarSet] = None,
) -> Check:
    """Γ ⊢ φ in the base iff in the extension, for all Γ ∪ {φ} over the base variables."""
    if isinstance(base, LogicPresentation):
        if variables is not None and variables != base.variables:
            base = replace(base, variables=variables)
        base_operator = as_closure_operator(base)
    elif isinstance(base, ConsequenceRelation):
        base_operator = base.operator()
    else:
        base_operator = base
    extension_operator = extension.operator() if isinstance(extension, ConsequenceRelation) else extension
    name = f"conservative:{extension_operator.name}"
    violation = conservativity_violation(base_operator, extension_operator)
    if violation is None:
        return Check.ok(name)
    mask, formula, side = violation
    return Check.failed(
        name,
        {
            "premises": format_formulas(base_operator.carrier.members(mask)),
            "goal": format_formula(formula),
            "derivable": side,
        },
    )
