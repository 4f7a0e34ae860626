import itertools
import re
from collections.abc import Mapping
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Hashable, Iterable, Iterator, Optional, Sequence

SYMBOL_PATTERN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
TOKEN_PATTERN = re.compile(
    r"(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[(),])|(?P<space>\s+)|(?P<bad>.)"
)

# names handed out when a variable set has to grow
FRESH_NAMES = ["y", "z", "w", "v", "u"]


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position} in {text!r}")
        self.text = text
        self.position = position


class ArityError(ValueError):
    pass


class UnknownSymbolError(ValueError):
    pass


class SignatureError(ValueError):
    pass


class UnboundVariableError(ValueError):
    pass


class StructureError(ValueError):
    pass


class NotAHomomorphismError(ValueError):
    pass


def check_symbol(name: str) -> str:
    if not SYMBOL_PATTERN.fullmatch(name):
        raise SignatureError(f"{name!r} is not a valid symbol")
    return name


@dataclass(frozen=True)
class Signature:
    """Ranked alphabet, kept in declaration order."""

    connectives: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        connectives = tuple((check_symbol(name), int(arity)) for name, arity in self.connectives)
        names = [name for name, _ in connectives]
        if len(set(names)) != len(names):
            raise SignatureError(f"duplicate connective in {names}")
        for name, arity in connectives:
            if arity < 0:
                raise SignatureError(f"negative arity for {name}")
        object.__setattr__(self, "connectives", connectives)

    @classmethod
    def parse(cls, text: str) -> "Signature":
        """Reads `name:arity` entries separated by whitespace."""
        connectives = []
        for entry in text.split():
            name, sep, arity = entry.partition(":")
            if not sep or not arity.isdigit():
                raise SignatureError(f"expected name:arity, got {entry!r}")
            connectives.append((name, int(arity)))
        return cls(tuple(connectives))

    def format(self) -> str:
        return " ".join(f"{name}:{arity}" for name, arity in self.connectives)

    @cached_property
    def arities(self) -> dict[str, int]:
        return dict(self.connectives)

    @property
    def constants(self) -> tuple[str, ...]:
        return tuple(name for name, arity in self.connectives if arity == 0)

    @property
    def operations(self) -> tuple[tuple[str, int], ...]:
        return tuple((name, arity) for name, arity in self.connectives if arity > 0)

    @property
    def is_constants_only(self) -> bool:
        return all(arity == 0 for _, arity in self.connectives)

    def arity(self, name: str) -> int:
        try:
            return self.arities[name]
        except KeyError:
            raise UnknownSymbolError(f"unknown connective {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.arities


@dataclass(frozen=True)
class VarSet:
    vars: tuple[str, ...] = ()

    def __post_init__(self):
        names = tuple(check_symbol(name) for name in self.vars)
        if len(set(names)) != len(names):
            raise SignatureError(f"duplicate variable in {names}")
        object.__setattr__(self, "vars", names)

    @classmethod
    def of(cls, *names: str) -> "VarSet":
        return cls(tuple(names))

    @classmethod
    def parse(cls, text: str) -> "VarSet":
        return cls(tuple(text.replace(",", " ").split()))

    def __iter__(self) -> Iterator[str]:
        return iter(self.vars)

    def __len__(self) -> int:
        return len(self.vars)

    def __contains__(self, name: str) -> bool:
        return name in self.vars

    def index(self, name: str) -> int:
        return self.vars.index(name)

    def issubset(self, other: "VarSet") -> bool:
        """Inclusion as ordered sets: members and their relative order."""
        if not set(self.vars) <= set(other.vars):
            return False
        positions = [other.index(name) for name in self.vars]
        return positions == sorted(positions)

    def extend(self, names: Iterable[str]) -> "VarSet":
        return VarSet(self.vars + tuple(name for name in names if name not in self.vars))

    def fresh(self, count: int, avoid: Iterable[str] = ()) -> "VarSet":
        """Adds `count` new variable names that clash with nothing in `avoid`."""
        taken = set(self.vars) | set(avoid)
        candidates = itertools.chain(FRESH_NAMES, (f"x{i}" for i in itertools.count(1)))
        added = []
        for name in candidates:
            if len(added) == count:
                break
            if name not in taken:
                added.append(name)
                taken.add(name)
        return self.extend(added)

    def format(self) -> str:
        return " ".join(self.vars)


def check_disjoint(signature: Signature, variables: VarSet) -> None:
    clashes = [name for name in variables if name in signature]
    if clashes:
        raise SignatureError(f"variables collide with connectives: {clashes}")


@dataclass(frozen=True)
class Formula:
    symbol: str
    args: tuple["Formula", ...] = ()
    is_variable: bool = False

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.symbol, self.args, self.is_variable)))

    def __hash__(self) -> int:
        return self._hash

    @classmethod
    def var(cls, name: str) -> "Formula":
        return cls(name, (), True)

    @classmethod
    def const(cls, name: str) -> "Formula":
        return cls(name)

    @classmethod
    def apply(cls, name: str, *args: "Formula") -> "Formula":
        return cls(name, tuple(args))

    @cached_property
    def depth(self) -> int:
        if not self.args:
            return 0
        return 1 + max(arg.depth for arg in self.args)

    @cached_property
    def variables(self) -> frozenset[str]:
        if self.is_variable:
            return frozenset([self.symbol])
        return frozenset().union(*(arg.variables for arg in self.args))

    @cached_property
    def subterms(self) -> tuple["Formula", ...]:
        """Distinct subterms, children before parents."""
        seen = {}
        for arg in self.args:
            for term in arg.subterms:
                seen.setdefault(term, None)
        seen.setdefault(self, None)
        return tuple(seen)

    def sort_key(self) -> tuple[int, str]:
        return self.depth, format_formula(self)

    def is_over(self, variables: Iterable[str]) -> bool:
        return self.variables <= frozenset(variables)

    def __str__(self) -> str:
        return format_formula(self)

    def __repr__(self) -> str:
        return f"Formula({format_formula(self)!r})"


def format_formula(formula: Formula) -> str:
    if not formula.args:
        return formula.symbol
    return f"{formula.symbol}({', '.join(format_formula(arg) for arg in formula.args)})"


def format_formulas(formulas: Iterable[Formula]) -> list[str]:
    return [format_formula(formula) for formula in formulas]


class _FormulaParser:
    def __init__(self, text: str, signature: Signature, variables: VarSet):
        self.text = text
        self.signature = signature
        self.variables = variables
        self.tokens = []
        for match in TOKEN_PATTERN.finditer(text):
            kind = match.lastgroup
            if kind == "space":
                continue
            if kind == "bad":
                raise FormulaSyntaxError(
                    f"unexpected character {match.group()!r}", text, match.start()
                )
            self.tokens.append((kind, match.group(), match.start()))
        self.tokens.append(("end", "", len(text)))
        self.index = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.index]

    def take(self) -> tuple[str, str, int]:
        token = self.tokens[self.index]
        if token[0] != "end":
            self.index += 1
        return token

    def at(self, value: str) -> bool:
        kind, text, _ = self.peek()
        return kind == "punct" and text == value

    def expect(self, value: str) -> None:
        kind, text, position = self.take()
        if kind != "punct" or text != value:
            found = text or "end of input"
            raise FormulaSyntaxError(f"expected {value!r} but found {found!r}", self.text, position)

    def expect_end(self) -> None:
        kind, text, position = self.peek()
        if kind != "end":
            raise FormulaSyntaxError(f"unexpected {text!r}", self.text, position)

    def formula(self) -> Formula:
        kind, name, position = self.take()
        if kind != "name":
            found = name or "end of input"
            raise FormulaSyntaxError(f"expected a symbol but found {found!r}", self.text, position)

        if name in self.variables:
            if self.at("("):
                raise FormulaSyntaxError(f"variable {name!r} applied to arguments", self.text, position)
            return Formula.var(name)

        if name not in self.signature:
            raise UnknownSymbolError(f"unknown symbol {name!r} at position {position} in {self.text!r}")

        args = []
        if self.at("("):
            self.take()
            args.append(self.formula())
            while self.at(","):
                self.take()
                args.append(self.formula())
            self.expect(")")

        arity = self.signature.arity(name)
        if len(args) != arity:
            raise ArityError(
                f"{name} takes {arity} argument(s), got {len(args)} at position {position} in {self.text!r}"
            )
        return Formula(name, tuple(args))


def parse_formula(text: str, signature: Signature, variables: VarSet) -> Formula:
    parser = _FormulaParser(text, signature, variables)
    formula = parser.formula()
    parser.expect_end()
    return formula


def parse_formula_list(text: str, signature: Signature, variables: VarSet) -> list[Formula]:
    """Comma separated formulas; commas inside parentheses belong to the formula."""
    parser = _FormulaParser(text, signature, variables)
    if parser.peek()[0] == "end":
        return []
    formulas = [parser.formula()]
    while parser.at(","):
        parser.take()
        formulas.append(parser.formula())
    parser.expect_end()
    return formulas


class Substitution(Mapping):
    """Finite variable-to-formula map; variables outside the domain stay put."""

    __slots__ = ("_map", "_hash")

    def __init__(self, mapping: Optional[Mapping[str, Formula]] = None):
        items = dict(mapping or {})
        self._map = {
            name: term
            for name, term in items.items()
            if not (term.is_variable and term.symbol == name)
        }
        self._hash = None

    @classmethod
    def identity(cls) -> "Substitution":
        return cls()

    def __getitem__(self, name: str) -> Formula:
        return self._map[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._map.items()))
        return self._hash

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, Substitution):
            return self._map == other._map
        return NotImplemented

    def __call__(self, formula: Formula) -> Formula:
        return substitute(self, formula)

    def image(self, name: str) -> Formula:
        return self._map.get(name) or Formula.var(name)

    def compose(self, other: "Substitution") -> "Substitution":
        """The substitution applying `other` first, then `self`."""
        composed = {name: substitute(self, term) for name, term in other.items()}
        for name, term in self.items():
            composed.setdefault(name, term)
        return Substitution(composed)

    def format(self) -> str:
        return ", ".join(f"{name} := {format_formula(term)}" for name, term in self._map.items())

    def __repr__(self) -> str:
        return f"Substitution({{{self.format()}}})"


def substitute(substitution: Mapping[str, Formula], formula: Formula) -> Formula:
    if not substitution:
        return formula
    if formula.is_variable:
        return substitution.get(formula.symbol, formula)
    if not formula.args:
        return formula
    return Formula(formula.symbol, tuple(substitute(substitution, arg) for arg in formula.args))


def extend_match(pattern: Formula, target: Formula, bound: dict[str, Formula]) -> bool:
    """Extends `bound` in place so that it sends pattern to target, if possible.

    On failure `bound` may hold partial bindings; callers pass a copy.
    """
    if pattern.is_variable:
        seen = bound.get(pattern.symbol)
        if seen is None:
            bound[pattern.symbol] = target
            return True
        return seen == target
    if target.is_variable or pattern.symbol != target.symbol or len(pattern.args) != len(target.args):
        return False
    return all(extend_match(p, t, bound) for p, t in zip(pattern.args, target.args))


def match(
    pattern: Formula, target: Formula, binding: Optional[Mapping[str, Formula]] = None
) -> Optional[Substitution]:
    bound = dict(binding or {})
    if extend_match(pattern, target, bound):
        return Substitution(bound)
    return None


def anti_instances(
    target: Formula, substitution: Substitution, variables: Iterable[str]
) -> list[Formula]:
    """All formulas over `variables` that `substitution` sends to `target`."""
    variables = tuple(variables)
    found = [Formula.var(name) for name in variables if substitution.image(name) == target]
    if not target.is_variable:
        choices = [anti_instances(arg, substitution, variables) for arg in target.args]
        for args in itertools.product(*choices):
            found.append(Formula(target.symbol, args))
    return found


def enumerate_formulas(signature: Signature, variables: VarSet, max_depth: int) -> list[Formula]:
    """Every formula of depth at most `max_depth`, by depth then lexicographically.

    Symbols are ranked by declaration: constants, then variables, then the other
    connectives. Within a depth level formulas compare by head symbol, then by
    their argument tuples under this same order. Names are never compared as
    strings.
    """
    formulas = [Formula.const(name) for name in signature.constants]
    formulas += [Formula.var(name) for name in variables]
    for depth in range(1, max_depth + 1):
        level = []
        for name, arity in signature.operations:
            for args in itertools.product(formulas, repeat=arity):
                if max(arg.depth for arg in args) == depth - 1:
                    level.append(Formula(name, args))
        if not level:
            break
        formulas.extend(level)
    return formulas


def iter_substitutions(
    domain: Iterable[str], codomain: Sequence[Formula]
) -> Iterator[Substitution]:
    domain = tuple(domain)
    for images in itertools.product(codomain, repeat=len(domain)):
        yield Substitution(dict(zip(domain, images)))


def enumerate_substitutions(domain: Iterable[str], codomain: Sequence[Formula]) -> list[Substitution]:
    return list(iter_substitutions(domain, codomain))


class FiniteStructure:
    """A finite Σ-algebra given by explicit operation tables."""

    def __init__(
        self,
        signature: Signature,
        carrier: Sequence[Hashable],
        interpretation: Mapping[str, Mapping[tuple, Hashable]],
        name: str = "A",
    ):
        self.signature = signature
        self.carrier = tuple(carrier)
        self.name = name
        if len(set(self.carrier)) != len(self.carrier):
            raise StructureError(f"{name}: repeated carrier element")
        members = set(self.carrier)
        self.tables = {}
        for symbol, arity in signature.connectives:
            if symbol not in interpretation:
                raise StructureError(f"{name}: no interpretation for {symbol}")
            table = {tuple(args): value for args, value in interpretation[symbol].items()}
            for args in itertools.product(self.carrier, repeat=arity):
                if args not in table:
                    raise StructureError(f"{name}: {symbol}{args} is undefined")
                if table[args] not in members:
                    raise StructureError(f"{name}: {symbol}{args} = {table[args]!r} is outside the carrier")
            self.tables[symbol] = table
        extra = set(interpretation) - set(signature.arities)
        if extra:
            raise StructureError(f"{name}: interpretation of unknown symbols {sorted(extra)}")
        self._index = {element: i for i, element in enumerate(self.carrier)}

    @classmethod
    def from_functions(
        cls,
        signature: Signature,
        carrier: Sequence[Hashable],
        functions: Mapping[str, Callable[..., Hashable]],
        name: str = "A",
    ) -> "FiniteStructure":
        interpretation = {
            symbol: {
                args: functions[symbol](*args)
                for args in itertools.product(carrier, repeat=arity)
            }
            for symbol, arity in signature.connectives
        }
        return cls(signature, carrier, interpretation, name)

    def apply(self, symbol: str, args: tuple) -> Hashable:
        try:
            return self.tables[symbol][args]
        except KeyError:
            raise StructureError(f"{self.name}: cannot apply {symbol} to {args}") from None

    def index(self, element: Hashable) -> int:
        return self._index[element]

    def valuations(self, variables: Iterable[str]) -> Iterator[dict[str, Hashable]]:
        variables = tuple(variables)
        for values in itertools.product(self.carrier, repeat=len(variables)):
            yield dict(zip(variables, values))

    def __contains__(self, element: Hashable) -> bool:
        return element in self._index

    def __len__(self) -> int:
        return len(self.carrier)

    def __repr__(self) -> str:
        return f"FiniteStructure({self.name!r}, carrier={list(self.carrier)!r})"


def evaluate(valuation: Mapping[str, Hashable], formula: Formula, structure: FiniteStructure) -> Hashable:
    if formula.is_variable:
        try:
            return valuation[formula.symbol]
        except KeyError:
            raise UnboundVariableError(f"variable {formula.symbol!r} has no value") from None
    values = tuple(evaluate(valuation, arg, structure) for arg in formula.args)
    return structure.apply(formula.symbol, values)


class Homomorphism:
    def __init__(
        self,
        source: FiniteStructure,
        target: FiniteStructure,
        mapping: Mapping[Hashable, Hashable],
        name: Optional[str] = None,
    ):
        self.source = source
        self.target = target
        self.mapping = dict(mapping)
        self.name = name or f"{source.name}->{target.name}"

    @classmethod
    def identity(cls, structure: FiniteStructure) -> "Homomorphism":
        return cls(structure, structure, {e: e for e in structure.carrier}, f"id_{structure.name}")

    def __call__(self, element: Hashable) -> Hashable:
        return self.mapping[element]

    def violation(self) -> Optional[tuple[str, tuple]]:
        """First (connective, arguments) where the map fails to commute, if any."""
        missing = [e for e in self.source.carrier if e not in self.mapping]
        if missing:
            return "<total>", tuple(missing)
        outside = [e for e in self.source.carrier if self.mapping[e] not in self.target]
        if outside:
            return "<into>", tuple(outside)
        for symbol, arity in self.source.signature.connectives:
            for args in itertools.product(self.source.carrier, repeat=arity):
                image = self.mapping[self.source.apply(symbol, args)]
                if image != self.target.apply(symbol, tuple(self.mapping[a] for a in args)):
                    return symbol, args
        return None

    def verify(self) -> "Homomorphism":
        failure = self.violation()
        if failure is not None:
            symbol, args = failure
            raise NotAHomomorphismError(f"{self.name} does not preserve {symbol} at {args}")
        return self

    def preimage(self, subset: Iterable[Hashable]) -> frozenset:
        subset = set(subset)
        return frozenset(e for e in self.source.carrier if self.mapping[e] in subset)


def formula_structure(signature: Signature, variables: VarSet, name: Optional[str] = None) -> FiniteStructure:
    """The formula algebra of a constants-only signature as a finite structure."""
    if not signature.is_constants_only:
        raise SignatureError("the formula algebra is infinite unless every connective is a constant")
    carrier = enumerate_formulas(signature, variables, 0)
    interpretation = {c: {(): Formula.const(c)} for c in signature.constants}
    return FiniteStructure(signature, carrier, interpretation, name or f"Fm({variables.format()})")


def substitution_homomorphisms(
    signature: Signature, source: VarSet, target: VarSet
) -> list[Homomorphism]:
    """Every substitution Fm(source) -> Fm(target) as a map of formula structures."""
    domain = formula_structure(signature, source)
    codomain = formula_structure(signature, target)
    homs = []
    for sigma in iter_substitutions(source, codomain.carrier):
        mapping = {formula: substitute(sigma, formula) for formula in domain.carrier}
        label = sigma.format() or "id"
        homs.append(Homomorphism(domain, codomain, mapping, f"{domain.name}->{codomain.name} [{label}]"))
    return homs
