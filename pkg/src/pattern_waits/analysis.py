"""Generating functions, scan statistics and Penney's game on top of the solvers."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BadSpec, NoCandidates, PatternWaitsError
from .linear_system import solve_instance
from .model import Alphabet, ChainSpec, Pattern, PatternCollection, validate
from .oracle import exact_distribution

FLOAT_TOL = 1e-9


@dataclass(frozen=True)
class GfPoint:
    """``f(z) = E(z**-tau)`` and ``F(z) = sum_{n>=0} P(tau > n) z**-n`` at one point."""

    z: object
    f_total: object
    F_total: object
    per_pattern: dict
    F: tuple = ()


def evaluate_gf(chain: ChainSpec, collection: PatternCollection, z, check: bool = True) -> GfPoint:
    sol = solve_instance(chain, collection, z=z, check=check)
    z = sol.z
    point = GfPoint(z, sol.f_total, sol.F_total, dict(sol.f), sol.F)
    lhs = (z - 1) * point.F_total + z * point.f_total
    ok = lhs == z if chain.exact else abs(lhs - z) <= FLOAT_TOL * z
    if not ok:
        raise ArithmeticError(f"(z-1)F(z) + z f(z) = {lhs}, expected {z}")
    return point


def evaluate_gf_alpha(chain: ChainSpec, collection: PatternCollection, alpha) -> GfPoint:
    """``E(alpha**tau)`` for ``0 < alpha <= 1`` by evaluating at ``z = 1/alpha``."""
    alpha = Fraction(alpha) if chain.exact else float(alpha)
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    return evaluate_gf(chain, collection, 1 / alpha)


@dataclass(frozen=True)
class ScanSpec:
    window: int
    threshold: int
    horizon: int = 1

    def __post_init__(self):
        if self.window < 1:
            raise BadSpec(f"BadSpec: window must be >= 1, got {self.window}")
        if not 1 <= self.threshold <= self.window:
            raise BadSpec(f"BadSpec: threshold must lie in [1, {self.window}], got {self.threshold}")
        if self.horizon < 1:
            raise BadSpec(f"BadSpec: horizon must be >= 1, got {self.horizon}")


BINARY = Alphabet(("0", "1"))


def _binary_indices(alphabet: Alphabet) -> tuple[int, int]:
    if set(alphabet.symbols) != {"0", "1"}:
        raise BadSpec(f"BadSpec: scan statistics need the states '0' and '1', got {alphabet.symbols}")
    return alphabet.index("0"), alphabet.index("1")


def scan_patterns(spec: ScanSpec, alphabet: Alphabet = BINARY) -> PatternCollection:
    """Words that start and end with a success, contain ``threshold`` successes
    and fit in the window.

    ``S_T >= threshold`` happens by time T exactly when one of them has
    occurred. Ordered by length, then lexicographically.
    """
    zero, one = _binary_indices(alphabet)
    k, w = spec.threshold, spec.window
    if k == 1:
        words = [(one,)]
    else:
        words = []
        for length in range(k, w + 1):
            inner = length - 2
            for ones in itertools.combinations(range(inner), k - 2):
                middle = [one if i in ones else zero for i in range(inner)]
                words.append(tuple([one] + middle + [one]))
    words.sort(key=lambda s: (len(s), [alphabet.label(x) for x in s]))
    return PatternCollection(tuple(Pattern(alphabet.render(s), s) for s in words))


def scan_probability(chain: ChainSpec, spec: ScanSpec):
    """``P(S_T >= threshold)`` for ``T = spec.horizon``, by exact propagation."""
    collection = scan_patterns(spec, chain.alphabet)
    return exact_distribution(chain, collection, spec.horizon).stop_by(spec.horizon)


@dataclass(frozen=True)
class PenneyReport:
    opponent: Pattern
    candidates: list
    best: Pattern
    best_prob: object
    excluded: list = field(default_factory=list)


def penney_search(chain: ChainSpec, opponent: Pattern, length: int | None = None) -> PenneyReport:
    """Win probability of every same-length reply to ``opponent``.

    A reply B wins with probability ``P(tau = tau_B)`` for the pair
    ``{opponent, B}``. Replies that break the standing assumptions with the
    opponent are listed in ``excluded`` with the reason. Candidates are sorted
    by win probability, descending, ties by symbol order.
    """
    if length is None:
        length = len(opponent)
    if length != len(opponent):
        raise ValueError(f"opponent has length {len(opponent)}, not {length}")
    alphabet = chain.alphabet
    opp = Pattern("opponent", opponent.symbols)
    results, excluded = [], []
    for word in itertools.product(range(alphabet.size), repeat=length):
        if word == opponent.symbols:
            continue
        cand = Pattern(alphabet.render(word), word)
        pair = PatternCollection((opp, Pattern("reply", word)))
        try:
            validate(chain, pair)
        except PatternWaitsError as exc:
            excluded.append((cand, type(exc).__name__))
            continue
        sol = solve_instance(chain, pair, z=1, check=False)
        results.append((cand, sol.f["reply"]))
    if not results:
        raise NoCandidates(f"NoCandidates: no admissible reply to {opponent.name!r}")
    results.sort(key=lambda item: (-item[1], item[0].symbols))
    best, best_prob = results[0]
    return PenneyReport(opponent, results, best, best_prob, excluded)
