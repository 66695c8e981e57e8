"""Alphabets, patterns, chains and the three standing assumptions.

Symbols are dense integer indices everywhere inside the package; labels only
appear when reading or printing instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import SubpatternViolation, ValidationError, ZeroPathViolation

Number = Union[Fraction, float]

FLOAT_SUM_TOL = 1e-12


def parse_probability(value, exact: bool = True) -> Number:
    """Parse ``"3/4"``, ``"0.25"``, ints or floats into a probability.

    Decimal strings are read by their literal digits, so ``"0.1"`` is exactly
    ``1/10``. JSON floats go through ``repr`` for the same reason.
    """
    if isinstance(value, bool):
        raise ValidationError(f"not a probability: {value!r}")
    try:
        if isinstance(value, Fraction):
            p = value
        elif isinstance(value, int):
            p = Fraction(value)
        elif isinstance(value, float):
            p = Fraction(repr(value))
        elif isinstance(value, str):
            p = Fraction(value.strip())
        else:
            raise TypeError
    except (ValueError, TypeError, ZeroDivisionError):
        raise ValidationError(f"not a probability: {value!r}") from None
    if not 0 <= p <= 1:
        raise ValidationError(f"probability out of [0, 1]: {value!r}")
    return p if exact else float(p)


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if not symbols:
            raise ValidationError("alphabet must contain at least one symbol")
        if any(s == "" for s in symbols):
            raise ValidationError("symbol labels must be nonempty")
        if len(set(symbols)) != len(symbols):
            raise ValidationError(f"duplicate symbol labels in {symbols}")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def index(self, label: str) -> int:
        try:
            return self.symbols.index(str(label))
        except ValueError:
            raise ValidationError(f"unknown symbol {label!r}") from None

    def label(self, index: int) -> str:
        return self.symbols[index]

    def parse_word(self, word) -> tuple[int, ...]:
        """Turn a label list (or a plain string, for one-character labels) into indices."""
        if isinstance(word, str):
            if all(len(s) == 1 for s in self.symbols):
                word = list(word)
            else:
                word = [w for w in word.replace(",", " ").split() if w]
        return tuple(self.index(w) for w in word)

    def render(self, symbols: Sequence[int]) -> str:
        labels = [self.symbols[i] for i in symbols]
        if all(len(s) == 1 for s in self.symbols):
            return "".join(labels)
        return ",".join(labels)


@dataclass(frozen=True)
class Pattern:
    name: str
    symbols: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))
        if not self.symbols:
            raise ValidationError(f"pattern {self.name!r} is empty")
        if any(s < 0 for s in self.symbols):
            raise ValidationError(f"pattern {self.name!r} has a negative symbol index")

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def first(self) -> int:
        return self.symbols[0]

    @property
    def last(self) -> int:
        return self.symbols[-1]

    def occurs_in(self, other: "Pattern") -> bool:
        """True when this pattern is a contiguous block of ``other``."""
        a, b = self.symbols, other.symbols
        n = len(a)
        return any(b[i:i + n] == a for i in range(len(b) - n + 1))


@dataclass(frozen=True)
class PatternCollection:
    patterns: tuple[Pattern, ...]

    def __post_init__(self):
        patterns = tuple(self.patterns)
        object.__setattr__(self, "patterns", patterns)
        if not patterns:
            raise ValidationError("pattern collection is empty")
        names = [p.name for p in patterns]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate pattern names in {names}")

    @classmethod
    def from_words(cls, alphabet: Alphabet, words: Iterable, names: Iterable[str] | None = None):
        """Build a collection from label words; names default to the rendered word."""
        words = list(words)
        symbol_lists = [alphabet.parse_word(w) for w in words]
        if names is None:
            names = [alphabet.render(s) for s in symbol_lists]
        return cls(tuple(Pattern(n, s) for n, s in zip(names, symbol_lists)))

    def __len__(self) -> int:
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)

    def __getitem__(self, i) -> Pattern:
        return self.patterns[i]

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.patterns]

    def by_name(self, name: str) -> Pattern:
        for p in self.patterns:
            if p.name == name:
                return p
        raise KeyError(name)

    def check_alphabet(self, alphabet: Alphabet) -> None:
        for p in self.patterns:
            if any(s >= alphabet.size for s in p.symbols):
                raise ValidationError(
                    f"pattern {p.name!r} uses a symbol outside the alphabet of size {alphabet.size}"
                )


@dataclass(frozen=True)
class ChainSpec:
    """Initial distribution and one-step transition matrix over an alphabet.

    With ``exact=True`` (the default) every entry is a :class:`Fraction` and the
    stochasticity checks are exact; otherwise entries are floats checked to
    within ``1e-12``.
    """

    alphabet: Alphabet
    initial: tuple
    transition: tuple
    exact: bool = True

    def __post_init__(self):
        m = self.alphabet.size
        conv = lambda v: parse_probability(v, self.exact)  # noqa: E731
        initial = tuple(conv(v) for v in self.initial)
        transition = tuple(tuple(conv(v) for v in row) for row in self.transition)
        if len(initial) != m:
            raise ValidationError(f"initial distribution has length {len(initial)}, expected {m}")
        if len(transition) != m or any(len(row) != m for row in transition):
            raise ValidationError(f"transition matrix must be {m}x{m}")
        _check_sum(initial, self.exact, "initial distribution")
        for i, row in enumerate(transition):
            _check_sum(row, self.exact, f"transition row {self.alphabet.label(i)!r}")
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "transition", transition)

    @property
    def size(self) -> int:
        return self.alphabet.size

    def p(self, i: int, j: int) -> Number:
        return self.transition[i][j]

    def as_float(self) -> "ChainSpec":
        return ChainSpec(self.alphabet, tuple(float(v) for v in self.initial),
                         tuple(tuple(float(v) for v in row) for row in self.transition), exact=False)

    def as_exact(self) -> "ChainSpec":
        """Exact copy; float entries are read through their shortest repr."""
        return ChainSpec(self.alphabet, self.initial, self.transition, exact=True)

    @property
    def is_iid(self) -> bool:
        return all(row == self.initial for row in self.transition)

    @classmethod
    def iid(cls, alphabet: Alphabet, probs: Sequence, exact: bool = True) -> "ChainSpec":
        probs = tuple(probs)
        return cls(alphabet, probs, tuple(probs for _ in probs), exact=exact)

    def successors(self, i: int) -> list[int]:
        return [j for j, pij in enumerate(self.transition[i]) if pij > 0]

    def reachable_from_initial(self) -> set[int]:
        """States the chain visits with positive probability at some time."""
        seen = {i for i, mu in enumerate(self.initial) if mu > 0}
        stack = list(seen)
        while stack:
            i = stack.pop()
            for j in self.successors(i):
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return seen


def _check_sum(values, exact: bool, what: str) -> None:
    total = sum(values)
    if exact:
        if total != 1:
            raise ValidationError(f"{what} sums to {total}, not 1")
    elif abs(total - 1.0) > FLOAT_SUM_TOL:
        raise ValidationError(f"{what} sums to {total!r}, not 1 within {FLOAT_SUM_TOL}")


def validate_a1(collection: PatternCollection) -> None:
    """Raise :class:`SubpatternViolation` if a pattern occurs inside another one."""
    for inner in collection:
        for outer in collection:
            if inner is outer:
                continue
            if inner.occurs_in(outer):
                raise SubpatternViolation(inner.name, outer.name)


def validate_a2(chain: ChainSpec, collection: PatternCollection) -> None:
    """Every pattern's internal transitions must have positive probability.

    ``position`` in the error is the 1-based index of the symbol entered
    through the zero transition.
    """
    collection.check_alphabet(chain.alphabet)
    for pat in collection:
        s = pat.symbols
        for k in range(1, len(s)):
            if chain.p(s[k - 1], s[k]) == 0:
                raise ZeroPathViolation(pat.name, k + 1)


def validate_a3(chain: ChainSpec, collection: PatternCollection) -> None:
    """Check that tau is almost surely finite (hence of finite mean).

    Runs a reachability search on the automaton/chain product: every product
    state reachable from the start must be able to reach an absorbing state.
    """
    from .oracle import embed

    embed(chain, collection).check_absorbing()


def validate(chain: ChainSpec, collection: PatternCollection) -> None:
    validate_a1(collection)
    validate_a2(chain, collection)
    validate_a3(chain, collection)
