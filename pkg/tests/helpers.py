"""Shared instances and generators for the test suite."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from pattern_waits import Alphabet, ChainSpec, PatternCollection, validate
from pattern_waits.errors import PatternWaitsError

EX1_ALPHABET = Alphabet(("1", "2", "3"))
EX2_ALPHABET = Alphabet(("1", "2"))
COIN = Alphabet(("0", "1"))


def example1(initial=("1/3", "1/3", "1/3")):
    chain = ChainSpec(EX1_ALPHABET, initial,
                      (("3/4", "0", "1/4"), ("0", "3/4", "1/4"), ("1/4", "1/4", "1/2")))
    coll = PatternCollection.from_words(EX1_ALPHABET, ["323", "313", "33"], names=["A", "B", "C"])
    return chain, coll


def example2():
    chain = ChainSpec(EX2_ALPHABET, ("9/13", "4/13"), (("1/4", "3/4"), ("3/4", "1/4")))
    coll = PatternCollection.from_words(EX2_ALPHABET, ["22", "121"], names=["A", "B"])
    return chain, coll


def fair_coin():
    return ChainSpec.iid(COIN, ("1/2", "1/2"))


def words(*ws, alphabet=COIN):
    return PatternCollection.from_words(alphabet, list(ws))


def random_distribution(rng: random.Random, m: int, max_den: int = 8):
    """Random probability vector with a common denominator <= max_den."""
    d = rng.randint(1, max_den)
    cuts = sorted(rng.randint(0, d) for _ in range(m - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [d])]
    return tuple(Fraction(p, d) for p in parts)


def random_instance(rng: random.Random, max_states=4, max_patterns=3, max_len=4, iid=False):
    m = rng.randint(1, max_states)
    alphabet = Alphabet(tuple(str(i) for i in range(m)))
    mu = random_distribution(rng, m)
    if iid:
        chain = ChainSpec.iid(alphabet, mu)
    else:
        chain = ChainSpec(alphabet, mu, tuple(random_distribution(rng, m) for _ in range(m)))
    n = rng.randint(1, max_patterns)
    ws = [tuple(rng.randrange(m) for _ in range(rng.randint(1, max_len))) for _ in range(n)]
    names = [f"K{i}" for i in range(n)]
    coll = PatternCollection.from_words(alphabet, [[str(s) for s in w] for w in ws], names=names)
    return chain, coll


def valid_random_instances(count: int, seed: int, **kwargs):
    """First ``count`` random instances that satisfy all three assumptions."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        chain, coll = random_instance(rng, **kwargs)
        try:
            validate(chain, coll)
        except PatternWaitsError:
            continue
        out.append((chain, coll))
    return out


def all_paths(chain: ChainSpec, length: int):
    """Every symbol sequence of ``length`` with its probability (brute force)."""
    m = chain.size
    for path in itertools.product(range(m), repeat=length):
        p = chain.initial[path[0]]
        for a, b in zip(path, path[1:]):
            p *= chain.transition[a][b]
        yield path, p
