import itertools
import logging
import random
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Generic, Hashable, Iterable, Iterator, Optional, Sequence, TypeVar

logger = logging.getLogger(__name__)

# every subset is inspected up to this many elements, larger carriers are sampled
EXHAUSTIVE_THRESHOLD = 16
SAMPLE_SIZE = 10_000
MOORE_LIMIT = 5
NAIVE_MOORE_LIMIT = 4

T = TypeVar("T", bound=Hashable)


class CarrierTooLargeError(ValueError):
    pass


class CarrierMismatchError(ValueError):
    pass


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def bits(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def subsets_of_size(mask: int, size: int) -> Iterator[int]:
    for chosen in itertools.combinations(bits(mask), size):
        yield sum(1 << i for i in chosen)


class Carrier(Generic[T]):
    """Finite ordered set; subsets are bitmasks over the element positions."""

    def __init__(self, elements: Iterable[T]):
        self.elements = tuple(elements)
        self._index = {element: i for i, element in enumerate(self.elements)}
        if len(self._index) != len(self.elements):
            raise ValueError("carrier elements must be distinct")

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[T]:
        return iter(self.elements)

    def __contains__(self, element: T) -> bool:
        return element in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, Carrier) and self.elements == other.elements

    def __hash__(self) -> int:
        return hash(self.elements)

    @property
    def full(self) -> int:
        return (1 << len(self.elements)) - 1

    def index(self, element: T) -> int:
        return self._index[element]

    def find(self, element: T) -> Optional[int]:
        return self._index.get(element)

    def mask(self, subset: Iterable[T]) -> int:
        result = 0
        for element in subset:
            try:
                result |= 1 << self._index[element]
            except KeyError:
                raise ValueError(f"{element!r} is not in the carrier") from None
        return result

    def members(self, mask: int) -> tuple[T, ...]:
        return tuple(self.elements[i] for i in bits(mask))

    def subset(self, mask: int) -> frozenset:
        return frozenset(self.members(mask))

    def masks(self) -> range:
        return range(1 << len(self.elements))

    def sample_masks(self, rng: Optional[random.Random] = None) -> Iterable[int]:
        """All subsets on small carriers, a seeded sample otherwise."""
        if len(self) <= EXHAUSTIVE_THRESHOLD:
            return self.masks()
        rng = rng or random.Random(0)
        return [rng.getrandbits(len(self)) for _ in range(SAMPLE_SIZE)]

    @property
    def exhaustive(self) -> bool:
        return len(self) <= EXHAUSTIVE_THRESHOLD

    def __repr__(self) -> str:
        return f"Carrier({[str(e) for e in self.elements]})"


class MonotoneOperator:
    """Inflationary monotone map on subsets of a carrier, memoized per mask.

    `arity_bound` of None stands for ω.
    """

    def __init__(
        self,
        carrier: Carrier,
        function: Callable[[int], int],
        arity_bound: Optional[int] = None,
        name: str = "E",
    ):
        self.carrier = carrier
        self._function = function
        self.arity_bound = arity_bound
        self.name = name
        self.idempotent: Optional[bool] = None
        self._memo: dict[int, int] = {}

    def __call__(self, mask: int) -> int:
        try:
            return self._memo[mask]
        except KeyError:
            value = self._memo[mask] = self._function(mask)
            return value

    def apply(self, subset: Iterable) -> frozenset:
        return self.carrier.subset(self(self.carrier.mask(subset)))

    def fixed_points(self) -> list[int]:
        return [mask for mask in self.carrier.masks() if self(mask) == mask]

    def __repr__(self) -> str:
        bound = "ω" if self.arity_bound is None else self.arity_bound
        return f"{type(self).__name__}({self.name!r}, |carrier|={len(self.carrier)}, arity={bound})"


class ClosureOperator(MonotoneOperator):
    def __init__(self, carrier, function, arity_bound=None, name="C"):
        super().__init__(carrier, function, arity_bound, name)
        self.idempotent = True


class IntersectionFamily:
    def __init__(self, carrier: Carrier, closed_sets: Iterable[int]):
        self.carrier = carrier
        self.closed_sets = tuple(sorted(set(closed_sets), key=lambda m: (-popcount(m), m)))
        self._members = frozenset(self.closed_sets)

    def __contains__(self, mask: int) -> bool:
        return mask in self._members

    def __len__(self) -> int:
        return len(self.closed_sets)

    def __iter__(self) -> Iterator[int]:
        return iter(self.closed_sets)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IntersectionFamily)
            and self.carrier == other.carrier
            and self._members == other._members
        )

    def __hash__(self) -> int:
        return hash((self.carrier, self._members))

    def violation(self) -> Optional[tuple[int, ...]]:
        """A missing top, or a pair of members whose intersection is missing."""
        if self.carrier.full not in self._members:
            return ()
        for first, second in itertools.combinations(self.closed_sets, 2):
            if first & second not in self._members:
                return first, second
        return None

    def is_valid(self) -> bool:
        return self.violation() is None

    def least_containing(self, mask: int) -> int:
        # the empty intersection is the whole carrier
        result = self.carrier.full
        for closed in self.closed_sets:
            if closed & mask == mask:
                result &= closed
        return result

    def as_sets(self) -> list[frozenset]:
        return [self.carrier.subset(mask) for mask in self.closed_sets]


def family_to_operator(family: IntersectionFamily, name: str = "C") -> ClosureOperator:
    failure = family.violation()
    if failure is not None:
        raise ValueError(f"not an intersection family, failing at {failure}")
    return ClosureOperator(family.carrier, family.least_containing, name=name)


def operator_to_family(operator: MonotoneOperator) -> IntersectionFamily:
    return IntersectionFamily(operator.carrier, operator.fixed_points())


def top_operator(carrier: Carrier) -> ClosureOperator:
    return ClosureOperator(carrier, lambda mask: carrier.full, name="top")


def bottom_operator(carrier: Carrier) -> ClosureOperator:
    return ClosureOperator(carrier, lambda mask: mask, name="bottom")


def is_inflationary(operator: MonotoneOperator, rng: Optional[random.Random] = None) -> Optional[int]:
    for mask in operator.carrier.sample_masks(rng):
        if operator(mask) & mask != mask:
            return mask
    return None


def is_monotone(operator: MonotoneOperator, rng: Optional[random.Random] = None) -> Optional[tuple[int, int]]:
    """Returns a pair S ⊆ T with E(S) ⊄ E(T), if one is found.

    Covering pairs suffice on the exhaustive path.
    """
    carrier = operator.carrier
    if carrier.exhaustive:
        for mask in carrier.masks():
            image = operator(mask)
            for i in range(len(carrier)):
                larger = mask | 1 << i
                if larger != mask and image & operator(larger) != image:
                    return mask, larger
        return None
    rng = rng or random.Random(0)
    for mask in carrier.sample_masks(rng):
        larger = mask | rng.getrandbits(len(carrier))
        if operator(mask) & operator(larger) != operator(mask):
            return mask, larger
    return None


def is_idempotent(operator: MonotoneOperator, rng: Optional[random.Random] = None) -> Optional[int]:
    """First subset S, in ascending mask order, with E(E(S)) != E(S)."""
    for mask in operator.carrier.sample_masks(rng):
        image = operator(mask)
        if operator(image) != image:
            return mask
    return None


@dataclass
class ClosureCheckReport:
    inflationary: Optional[int]
    monotone: Optional[tuple[int, int]]
    idempotent: Optional[int]
    exhaustive: bool

    @property
    def ok(self) -> bool:
        return self.inflationary is None and self.monotone is None and self.idempotent is None

    def failure(self) -> Optional[str]:
        if self.inflationary is not None:
            return "inflationary"
        if self.monotone is not None:
            return "monotone"
        if self.idempotent is not None:
            return "idempotent"
        return None


def is_closure_operator(operator: MonotoneOperator, seed: int = 0) -> ClosureCheckReport:
    return ClosureCheckReport(
        inflationary=is_inflationary(operator, random.Random(seed)),
        monotone=is_monotone(operator, random.Random(seed)),
        idempotent=is_idempotent(operator, random.Random(seed)),
        exhaustive=operator.carrier.exhaustive,
    )


def first_difference(first: MonotoneOperator, second: MonotoneOperator) -> Optional[int]:
    _check_carriers([first, second])
    for mask in first.carrier.sample_masks():
        if first(mask) != second(mask):
            return mask
    return None


def operators_equal(first: MonotoneOperator, second: MonotoneOperator) -> bool:
    return first_difference(first, second) is None


def leq_witness(first: MonotoneOperator, second: MonotoneOperator) -> Optional[int]:
    """A subset S with first(S) ⊄ second(S), if any."""
    _check_carriers([first, second])
    for mask in first.carrier.sample_masks():
        if first(mask) & ~second(mask):
            return mask
    return None


def leq(first: MonotoneOperator, second: MonotoneOperator) -> bool:
    return leq_witness(first, second) is None


def _check_carriers(operators: Sequence[MonotoneOperator]) -> Carrier:
    if not operators:
        raise ValueError("need at least one operator")
    carrier = operators[0].carrier
    for operator in operators[1:]:
        if operator.carrier != carrier:
            raise CarrierMismatchError(f"{operator.name} lives on a different carrier than {operators[0].name}")
    return carrier


def settle(operator: MonotoneOperator, what: str) -> MonotoneOperator:
    """Promotes an idempotent result to a ClosureOperator, otherwise flags it."""
    witness = is_idempotent(operator)
    if witness is None:
        return ClosureOperator(operator.carrier, operator, operator.arity_bound, operator.name)
    logger.warning(
        "%s is not idempotent, first failure at %s",
        what,
        [str(e) for e in operator.carrier.members(witness)],
    )
    operator.idempotent = False
    return operator


def kary_part(operator: MonotoneOperator, n: Optional[int] = None) -> MonotoneOperator:
    """S ↦ ∪ {E(S') : S' ⊆ S, |S'| < n}.

    By monotonicity only the subsets of size min(n - 1, |S|) matter.
    """
    if n is not None and n < 1:
        raise ValueError("arity bound must be at least 1")
    if n is None or n > len(operator.carrier):
        return operator

    def function(mask: int) -> int:
        size = min(n - 1, popcount(mask))
        result = 0
        for sub in subsets_of_size(mask, size):
            result |= operator(sub)
        return result | mask

    part = MonotoneOperator(operator.carrier, function, n, f"{operator.name}_{n}")
    return settle(part, f"{n}-ary part of {operator.name}")


def meet(operators: Sequence[MonotoneOperator], n: Optional[int] = None) -> MonotoneOperator:
    """Pointwise intersection, then its n-ary part."""
    carrier = _check_carriers(operators)

    def function(mask: int) -> int:
        return reduce(lambda acc, op: acc & op(mask), operators, carrier.full)

    name = " ∧ ".join(op.name for op in operators)
    base = ClosureOperator(carrier, function, name=f"({name})")
    if n is None:
        return base
    return kary_part(base, n)


def join_general(operators: Sequence[MonotoneOperator], n: Optional[int] = None) -> MonotoneOperator:
    """Least set above N closed for every member, unioned over the small N ⊆ M."""
    carrier = _check_carriers(operators)
    common = IntersectionFamily(
        carrier, [m for m in carrier.masks() if all(op(m) == m for op in operators)]
    )
    name = " ∨ ".join(op.name for op in operators)
    base = ClosureOperator(carrier, common.least_containing, name=f"({name})")
    if n is None:
        return base
    return kary_part(base, n)


def is_directed(operators: Sequence[MonotoneOperator]) -> bool:
    for first, second in itertools.combinations(operators, 2):
        if not any(leq(first, upper) and leq(second, upper) for upper in operators):
            return False
    return True


def join_directed(operators: Sequence[MonotoneOperator], n: Optional[int] = None) -> MonotoneOperator:
    """Pointwise union of a directed family, then its n-ary part."""
    carrier = _check_carriers(operators)
    if not is_directed(operators):
        raise ValueError("family is not directed")

    def function(mask: int) -> int:
        return reduce(lambda acc, op: acc | op(mask), operators, mask)

    name = " ∨ ".join(op.name for op in operators)
    base = settle(MonotoneOperator(carrier, function, name=f"({name})"), "directed union")
    if n is None:
        return base
    return kary_part(base, n)


def idempotent_hull(operator: MonotoneOperator) -> ClosureOperator:
    """Iterates E until nothing changes; stable after at most |carrier| rounds."""

    def function(mask: int) -> int:
        current = mask
        while True:
            following = operator(current)
            if following == current:
                return current
            current = following

    return ClosureOperator(operator.carrier, function, name=f"hull({operator.name})")


def e_closed_hull(operator: MonotoneOperator, mask: int) -> int:
    """Intersection of every E-closed superset of `mask`."""
    result = operator.carrier.full
    for closed in operator.carrier.masks():
        if closed & mask == mask and operator(closed) == closed:
            result &= closed
    return result


def irreducible_arity(operator: MonotoneOperator) -> int:
    """1 + the size of the largest S with E(S) \\ S not covered by its maximal proper subsets.

    This is the least n with E equal to its n-ary part.
    """
    carrier = operator.carrier
    if not carrier.exhaustive:
        raise CarrierTooLargeError(f"arity scan needs at most {EXHAUSTIVE_THRESHOLD} elements")
    largest = 0
    for mask in carrier.masks():
        size = popcount(mask)
        if size < largest:
            continue
        covered = 0
        for i in bits(mask):
            covered |= operator(mask & ~(1 << i))
        if operator(mask) & ~covered & ~mask:
            largest = size
    return largest + 1


class MooreFamilies:
    """Backtracking enumeration of intersection families F with required ⊆ F ⊆ candidates.

    Candidates are visited by decreasing size, so whether a set is forced as an
    intersection of chosen sets is known when it is reached.
    """

    def __init__(
        self,
        carrier: Carrier,
        candidates: Optional[Iterable[int]] = None,
        required: Iterable[int] = (),
        budget: Optional[int] = None,
    ):
        self.carrier = carrier
        self.pool = set(carrier.masks()) if candidates is None else set(candidates)
        self.required = set(required) | {carrier.full}
        self.order = sorted(self.pool, key=lambda m: (-popcount(m), m))
        self.budget = budget
        self.visited = 0
        self.complete = True

    def __iter__(self) -> Iterator[IntersectionFamily]:
        self.visited = 0
        self.complete = True
        if not self.required <= self.pool:
            return
        for chosen in self._search(0, [], frozenset()):
            yield IntersectionFamily(self.carrier, chosen)

    def _search(self, index: int, chosen: list[int], forced: frozenset) -> Iterator[list[int]]:
        if not self.complete:
            return
        self.visited += 1
        if self.budget is not None and self.visited > self.budget:
            self.complete = False
            logger.warning("family enumeration stopped after %d nodes", self.budget)
            return
        if index == len(self.order):
            yield list(chosen)
            return

        mask = self.order[index]
        must = mask in forced or mask in self.required
        meets = {mask & other for other in chosen}
        if meets <= self.pool:
            chosen.append(mask)
            yield from self._search(index + 1, chosen, forced | meets)
            chosen.pop()
        if not must:
            yield from self._search(index + 1, chosen, forced)


def enumerate_intersection_families(
    carrier: Carrier,
    candidates: Optional[Iterable[int]] = None,
    required: Iterable[int] = (),
    budget: Optional[int] = None,
) -> list[IntersectionFamily]:
    return list(MooreFamilies(carrier, candidates, required, budget))


def enumerate_closure_operators(carrier: Carrier) -> list[ClosureOperator]:
    if len(carrier) > MOORE_LIMIT:
        raise CarrierTooLargeError(f"closure operators are enumerated on at most {MOORE_LIMIT} elements")
    families = enumerate_intersection_families(carrier)
    logger.debug("%d closure operators on %d elements", len(families), len(carrier))
    return [family_to_operator(family, f"C{i}") for i, family in enumerate(families)]


def naive_intersection_families(carrier: Carrier) -> list[IntersectionFamily]:
    """Generate every family of subsets and keep the intersection-closed ones."""
    if len(carrier) > NAIVE_MOORE_LIMIT:
        raise CarrierTooLargeError(f"naive enumeration runs on at most {NAIVE_MOORE_LIMIT} elements")
    masks = list(carrier.masks())
    families = []
    for selector in range(1 << len(masks)):
        family = IntersectionFamily(carrier, [m for m in masks if selector >> m & 1])
        if family.is_valid():
            families.append(family)
    return families


def naive_closure_operators(carrier: Carrier) -> list[ClosureOperator]:
    return [family_to_operator(family) for family in naive_intersection_families(carrier)]
