"""Suffix-prefix overlaps and the Markov-weighted correlation polynomials."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import DivisorZero, NotIID, ZeroMass
from .model import ChainSpec, Number, Pattern, PatternCollection


@dataclass(frozen=True)
class CorrelationSet:
    k_pattern: str
    t_pattern: str
    members: tuple[int, ...]

    def __contains__(self, r: int) -> bool:
        return r in self.members


@dataclass(frozen=True)
class CorrelationPolynomial:
    """Sparse polynomial ``sum(c_r * z**r)`` keyed by exponent."""

    k_pattern: str
    t_pattern: str
    coefficients: dict = field(default_factory=dict)

    def __call__(self, z) -> Number:
        return sum((c * z**r for r, c in self.coefficients.items()), Fraction(0) if _is_exact(z) else 0.0)

    evaluate = __call__

    @property
    def degree(self) -> int:
        return max(self.coefficients, default=0)

    def leading_coefficient(self):
        return self.coefficients.get(self.degree, 0)


def _is_exact(z) -> bool:
    return isinstance(z, (int, Fraction))


def _overlaps(k: Sequence[int], t: Sequence[int]) -> tuple[int, ...]:
    s = len(k)
    return tuple(r for r in range(1, min(s, len(t)) + 1) if tuple(k[s - r:]) == tuple(t[:r]))


def correlation_set(K: Pattern, T: Pattern) -> CorrelationSet:
    """Overlap lengths ``r`` where the last ``r`` symbols of K equal the first ``r`` of T."""
    return CorrelationSet(K.name, T.name, _overlaps(K.symbols, T.symbols))


def path_probability(chain: ChainSpec, i: int, symbols: Sequence[int]) -> Number:
    """Probability of emitting ``symbols`` in the next steps given the chain sits at ``i``.

    The empty word has probability one.
    """
    prob = Fraction(1) if chain.exact else 1.0
    prev = i
    for s in symbols:
        prob *= chain.p(prev, s)
        prev = s
    return prob


def tail_probability(chain: ChainSpec, T: Pattern, r: int) -> Number:
    """``P_{T_r -> T_{r+1} ... T_|T|}`` with ``r`` 1-based."""
    return path_probability(chain, T.symbols[r - 1], T.symbols[r:])


def last_symbol_indicator(K: Pattern, j: int) -> int:
    return int(K.last == j)


def gtilde(chain: ChainSpec, K: Pattern, T: Pattern) -> CorrelationPolynomial:
    """Correlation polynomial of K against T, normalised by T's internal path probability.

    Overlaps ``r < |T|`` contribute ``z**r`` times the probability of finishing
    T from its r-th symbol; the full self-overlap adds ``z**|T|`` when K is T.
    """
    divisor = tail_probability(chain, T, 1)
    if divisor == 0:
        raise DivisorZero(f"DivisorZero: internal path probability of {T.name!r} is zero")
    t = len(T)
    coeffs = {}
    for r in _overlaps(K.symbols, T.symbols):
        if r < t:
            coeffs[r] = tail_probability(chain, T, r) / divisor
    if K.symbols == T.symbols:
        coeffs[t] = coeffs.get(t, 0) + 1 / divisor
    coeffs = {r: c for r, c in sorted(coeffs.items()) if c != 0}
    return CorrelationPolynomial(K.name, T.name, coeffs)


@dataclass(frozen=True)
class CorrelationTable:
    """All pairwise overlap sets and polynomials, keyed by ``(K.name, T.name)``."""

    sets: dict
    polys: dict

    def g(self, k_name: str, t_name: str) -> CorrelationPolynomial:
        return self.polys[k_name, t_name]


def correlation_table(chain: ChainSpec, collection: PatternCollection) -> CorrelationTable:
    sets, polys = {}, {}
    for K in collection:
        for T in collection:
            sets[K.name, T.name] = correlation_set(K, T)
            polys[K.name, T.name] = gtilde(chain, K, T)
    return CorrelationTable(sets, polys)


def _require_iid(chain: ChainSpec) -> None:
    if not chain.is_iid:
        raise NotIID("NotIID: transition rows differ from the initial distribution")
    if any(mu == 0 for mu in chain.initial):
        raise ZeroMass("ZeroMass: i.i.d. reduction needs every symbol to have positive mass")


def iid_correlation_sum(chain: ChainSpec, K: Pattern, T: Pattern, z) -> Number:
    """``sum over r in {KT} of z**(r-1) / (mu_{T_1} ... mu_{T_r})``."""
    _require_iid(chain)
    mu = chain.initial
    total = Fraction(0) if chain.exact else 0.0
    for r in _overlaps(K.symbols, T.symbols):
        denom = Fraction(1) if chain.exact else 1.0
        for s in T.symbols[:r]:
            denom *= mu[s]
        total += z ** (r - 1) / denom
    return total


def iid_correlation_via_gtilde(chain: ChainSpec, K: Pattern, T: Pattern, z) -> Number:
    """``gtilde_KT(z) / (z * mu_{T_1})``."""
    _require_iid(chain)
    return gtilde(chain, K, T)(z) / (z * chain.initial[T.first])


def iid_correlation(chain: ChainSpec, K: Pattern, T: Pattern, z) -> Number:
    """Correlation ``c_KT(z)`` of an i.i.d. source.

    Computed both from the overlap sum and from ``gtilde``; the two must agree.
    They can differ only when T is a proper suffix of K, which the
    no-subpattern assumption excludes, so that case raises ``ValueError``.
    """
    direct = iid_correlation_sum(chain, K, T, z)
    via_g = iid_correlation_via_gtilde(chain, K, T, z)
    if chain.exact and direct != via_g:
        raise ValueError(f"{T.name!r} is a proper suffix of {K.name!r}; correlations disagree")
    return direct
