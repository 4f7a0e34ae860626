"""Seeded searches over small presentation spaces for the failures the extensions can show."""

import itertools
import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from .extensions import (
    ExtensionProblem,
    enumerate_natural_extensions,
    los_suszko,
    shoesmith_smiley,
    ss_closure,
)
from .files import PresentationFile, Records, WitnessFile
from .logic import LogicPresentation, Rule, SearchBounds, sorted_formulas
from .report import Check
from .terms import (
    Formula,
    Signature,
    Substitution,
    VarSet,
    iter_substitutions,
    parse_formula,
    parse_formula_list,
    substitute,
)

logger = logging.getLogger(__name__)

DEFAULT_SEED = 0
DEFAULT_BUDGET = 5000

SS_CUT_FAILURE = "ss-cut-failure"
LS_STRUCTURALITY_FAILURE = "ls-structurality-failure"
MULTIPLE_NATEXTS = "multiple-natexts"

SEARCH_BOUNDS = SearchBounds(max_depth=1, max_iterations=16)
BASE_VARIABLES = VarSet.of("x")
TARGET_VARIABLES = VarSet.of("x", "y")


@dataclass
class Witness:
    """A replayable counterexample: a presentation, its extension variables and the claim data."""

    property: str
    presentation: LogicPresentation
    target: VarSet
    premises: tuple[Formula, ...] = ()
    lemmas: Optional[tuple[Formula, ...]] = None
    goal: Optional[Formula] = None
    substitution: Optional[Substitution] = None
    count: Optional[int] = None

    @property
    def problem(self) -> ExtensionProblem:
        return ExtensionProblem(self.presentation, self.target)

    def to_records(self) -> Records:
        records = PresentationFile.records_of(self.presentation)
        records.update(
            {
                "extend": list(self.target),
                "claim": self.property,
                "premises": ", ".join(str(f) for f in self.premises),
                "lemmas": None if self.lemmas is None else ", ".join(str(f) for f in self.lemmas),
                "goal": None if self.goal is None else str(self.goal),
                "subst": [[name, str(term)] for name, term in (self.substitution or {}).items()],
                "count": self.count,
            }
        )
        return records

    @classmethod
    def from_records(cls, records: Records) -> "Witness":
        presentation = WitnessFile.build(records)
        target = VarSet(tuple(records.get("extend") or presentation.variables.vars))
        signature = presentation.signature

        def formulas(key: str) -> Optional[tuple[Formula, ...]]:
            text = records.get(key)
            return None if text is None else tuple(parse_formula_list(text, signature, target))

        goal = records.get("goal")
        subst = records.get("subst") or []
        if not records.get("claim"):
            raise ValueError("witness file has no claim line")
        return cls(
            records["claim"],
            presentation,
            target,
            formulas("premises") or (),
            formulas("lemmas"),
            parse_formula(goal, signature, target) if goal else None,
            Substitution({name: parse_formula(term, signature, target) for name, term in subst}) if subst else None,
            records.get("count"),
        )

    def write(self) -> str:
        return WitnessFile().write(self.to_records())

    def write_file(self, filename: str) -> None:
        WitnessFile().write_file(self.to_records(), filename)

    @classmethod
    def read_file(cls, filename: str) -> "Witness":
        return cls.from_records(WitnessFile().read_file(filename))

    @classmethod
    def parse(cls, text: str) -> "Witness":
        return cls.from_records(WitnessFile().loads(text))

    def replay(self) -> Check:
        try:
            replayer = REPLAYERS[self.property]
        except KeyError:
            raise ValueError(f"unknown claim {self.property!r}") from None
        return replayer(self)

    def to_dict(self) -> dict:
        data = {"property": self.property, "presentation": self.presentation.name, "target": list(self.target)}
        data["premises"] = [str(f) for f in self.premises]
        if self.lemmas is not None:
            data["lemmas"] = [str(f) for f in self.lemmas]
        if self.goal is not None:
            data["goal"] = str(self.goal)
        if self.substitution is not None:
            data["substitution"] = self.substitution.format()
        if self.count is not None:
            data["count"] = self.count
        return data


def _replay_ss_cut_failure(witness: Witness) -> Check:
    problem = witness.problem
    premises = list(witness.premises)
    lemmas = list(witness.lemmas or ())
    name = f"replay:{witness.property}"
    for lemma in lemmas:
        if not shoesmith_smiley(problem, premises, lemma).is_yes:
            return Check.failed(name, {"step": "lemma", "formula": str(lemma)})
    if not shoesmith_smiley(problem, premises + lemmas, witness.goal).is_yes:
        return Check.failed(name, {"step": "premises and lemmas yield the goal"})
    if not shoesmith_smiley(problem, premises, witness.goal).is_no:
        return Check.failed(name, {"step": "premises alone do not yield the goal"})
    return Check.ok(name)


def _replay_ls_structurality_failure(witness: Witness) -> Check:
    problem = witness.problem
    sigma = witness.substitution or Substitution.identity()
    name = f"replay:{witness.property}"
    if not los_suszko(problem, witness.premises, witness.goal).is_yes:
        return Check.failed(name, {"step": "premises yield the goal"})
    moved = [substitute(sigma, p) for p in witness.premises]
    if not los_suszko(problem, moved, substitute(sigma, witness.goal)).is_no:
        return Check.failed(name, {"step": "substituted premises do not yield the substituted goal"})
    return Check.ok(name)


def _replay_multiple_natexts(witness: Witness) -> Check:
    name = f"replay:{witness.property}"
    lattice = enumerate_natural_extensions(witness.problem)
    if len(lattice) < 2 or (witness.count is not None and len(lattice) != witness.count):
        return Check.failed(name, {"found": len(lattice), "claimed": witness.count})
    return Check.ok(name)


REPLAYERS: dict[str, Callable[[Witness], Check]] = {
    SS_CUT_FAILURE: _replay_ss_cut_failure,
    LS_STRUCTURALITY_FAILURE: _replay_ls_structurality_failure,
    MULTIPLE_NATEXTS: _replay_multiple_natexts,
}


def _presentations(signature: Signature, rules: list[Rule], sizes: tuple[int, ...], prefix: str) -> list[LogicPresentation]:
    found = []
    for size in sizes:
        for chosen in itertools.combinations(rules, size):
            found.append(
                LogicPresentation(signature, BASE_VARIABLES, chosen, SEARCH_BOUNDS, f"{prefix}{len(found)}")
            )
    return found


def _rules(signature: Signature, texts: list[str]) -> list[Rule]:
    return [Rule.parse(text, signature, BASE_VARIABLES) for text in texts]


def ss_cut_space() -> list[tuple]:
    """(presentation, premises): unary guards f, g and conclusions among two constants."""
    signature = Signature.parse("c:0 d:0 f:1 g:1")
    atoms = ["f(x)", "g(x)", "c", "x"]
    texts = []
    for size in (1, 2):
        for premises in itertools.combinations(atoms, size):
            for conclusion in ("c", "d"):
                if conclusion not in premises:
                    texts.append(f"{', '.join(premises)} => {conclusion}")
    presentations = _presentations(signature, _rules(signature, texts), (1, 2), "ss-cut-")
    pool = [parse_formula(text, signature, TARGET_VARIABLES) for text in ("x", "y", "f(x)", "f(y)", "g(x)", "g(y)")]
    premise_sets = [tuple(c) for size in (1, 2) for c in itertools.combinations(pool, size)]
    return [(p, premises) for p in presentations for premises in premise_sets]


def ls_structurality_space() -> list[tuple]:
    """(presentation, premises, goal, substitution) over one constant and a binary connective."""
    signature = Signature.parse("a:0 h:2")
    texts = ["x => a", "h(x, x) => a", "x, h(x, x) => a", "h(x, x) => x", "a, h(x, x) => x"]
    presentations = _presentations(signature, _rules(signature, texts), (1, 2), "ls-struct-")

    def parse(text: str) -> Formula:
        return parse_formula(text, signature, TARGET_VARIABLES)

    premise_sets = [(parse(text),) for text in ("x", "y", "h(x, y)", "a")]
    goals = [parse("a")]
    images = [parse(text) for text in ("x", "y", "a", "h(x, y)", "h(y, x)")]
    substitutions = list(iter_substitutions(TARGET_VARIABLES, images))
    return list(itertools.product(presentations, premise_sets, goals, substitutions))


def multiple_natexts_space() -> list[tuple]:
    """Constants-only presentations with at most one premise per rule."""
    candidates = []
    empty = Signature()
    candidates += _presentations(empty, _rules(empty, ["=> x"]), (0, 1), "natext-empty-")
    one = Signature.parse("a:0")
    candidates += _presentations(one, _rules(one, ["=> a", "=> x", "a => x", "x => a"]), (0, 1, 2), "natext-a-")
    return [(p,) for p in candidates]


def _try_ss_cut(candidate: tuple) -> Optional[Witness]:
    presentation, premises = candidate
    problem = ExtensionProblem(presentation, TARGET_VARIABLES)
    first = ss_closure(problem, premises)
    second = ss_closure(problem, first)
    gained = sorted_formulas(second - first)
    if not gained:
        return None
    goal = gained[0]
    lemmas = sorted_formulas(first - set(premises))
    for lemma in list(lemmas):
        fewer = [m for m in lemmas if m != lemma]
        if shoesmith_smiley(problem, list(premises) + fewer, goal).is_yes:
            lemmas = fewer
    return Witness(SS_CUT_FAILURE, presentation, TARGET_VARIABLES, tuple(premises), tuple(lemmas), goal)


def _try_ls_structurality(candidate: tuple) -> Optional[Witness]:
    presentation, premises, goal, sigma = candidate
    problem = ExtensionProblem(presentation, TARGET_VARIABLES)
    if not los_suszko(problem, premises, goal).is_yes:
        return None
    moved = [substitute(sigma, p) for p in premises]
    if not los_suszko(problem, moved, substitute(sigma, goal)).is_no:
        return None
    return Witness(LS_STRUCTURALITY_FAILURE, presentation, TARGET_VARIABLES, tuple(premises), None, goal, sigma)


def _try_multiple_natexts(candidate: tuple) -> Optional[Witness]:
    (presentation,) = candidate
    lattice = enumerate_natural_extensions(ExtensionProblem(presentation, TARGET_VARIABLES))
    if len(lattice) < 2:
        return None
    return Witness(MULTIPLE_NATEXTS, presentation, TARGET_VARIABLES, count=len(lattice))


SEARCHES: dict[str, tuple[Callable[[], list[tuple]], Callable[[tuple], Optional[Witness]]]] = {
    SS_CUT_FAILURE: (ss_cut_space, _try_ss_cut),
    LS_STRUCTURALITY_FAILURE: (ls_structurality_space, _try_ls_structurality),
    MULTIPLE_NATEXTS: (multiple_natexts_space, _try_multiple_natexts),
}


@dataclass
class SearchResult:
    property: str
    seed: int
    budget: int
    examined: int = 0
    space: int = 0
    witness: Optional[Witness] = None
    notes: list[str] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.witness is not None

    @property
    def exhausted(self) -> bool:
        """The whole space was examined without a witness."""
        return self.witness is None and self.examined == self.space

    def to_dict(self) -> dict:
        data = {
            "property": self.property,
            "seed": self.seed,
            "budget": self.budget,
            "examined": self.examined,
            "space": self.space,
            "found": self.found,
            "exhausted": self.exhausted,
        }
        if self.witness is not None:
            data["witness"] = self.witness.to_dict()
        return data


def shuffled(candidates: list[tuple], seed: int) -> Iterator[tuple]:
    order = list(range(len(candidates)))
    random.Random(seed).shuffle(order)
    for i in order:
        yield candidates[i]


def search_counterexample(property: str, seed: int = DEFAULT_SEED, budget: int = DEFAULT_BUDGET) -> SearchResult:
    """Examines up to `budget` candidates in an order fixed by `seed`."""
    try:
        space, attempt = SEARCHES[property]
    except KeyError:
        raise ValueError(f"unknown property {property!r}; choose from {sorted(SEARCHES)}") from None
    if budget < 0:
        raise ValueError("budget must not be negative")
    candidates = space()
    result = SearchResult(property, seed, budget, space=len(candidates))
    for candidate in shuffled(candidates, seed):
        if result.examined >= budget:
            result.notes.append(f"budget of {budget} candidates spent")
            break
        result.examined += 1
        witness = attempt(candidate)
        if witness is not None:
            result.witness = witness
            logger.info("%s: witness after %d candidate(s)", property, result.examined)
            break
    else:
        result.notes.append(f"search space exhausted: all {result.space} candidate(s) examined without a witness")
    return result

