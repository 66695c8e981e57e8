"""Independent check by Markov chain embedding.

A multi-pattern matching automaton is run on the emitted symbols; pairing its
node with the chain's current state gives a finite Markov chain in which each
pattern is an absorbing state. The law of ``tau`` then comes from forward
propagation (exact distribution) or from the fundamental matrix (moments and
absorption probabilities). Linear algebra here goes through sympy's
``DomainMatrix`` so it shares no code with the main solver.
"""

from __future__ import annotations

import math
import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .errors import SingularFundamental, StepCapExceeded, TauMayBeInfinite
from .model import Alphabet, ChainSpec, PatternCollection

DEFAULT_STEP_CAP = 10**7
STEP_CAP_ENV = "PATTERN_WAITS_STEP_CAP"
BLOCK_SIZE = 1 << 16


@dataclass(frozen=True)
class Automaton:
    """Complete DFA over symbol indices built from a trie with failure links.

    Node 0 is the empty prefix. ``accepting`` maps a node to the index of the
    pattern that has just been completed when the DFA enters it.
    """

    delta: tuple
    accepting: dict
    prefixes: tuple
    names: tuple

    @property
    def node_count(self) -> int:
        return len(self.delta)

    @property
    def non_accepting(self) -> list[int]:
        return [v for v in range(self.node_count) if v not in self.accepting]

    def run(self, stream: Iterable[int]) -> Optional[tuple[str, int]]:
        """First ``(pattern name, time)`` completed by ``stream``, 1-based, or None."""
        node = 0
        for t, s in enumerate(stream, start=1):
            node = self.delta[node][s]
            if node in self.accepting:
                return self.names[self.accepting[node]], t
        return None


def build_automaton(collection: PatternCollection, alphabet: Alphabet) -> Automaton:
    collection.check_alphabet(alphabet)
    m = alphabet.size
    children: list[dict[int, int]] = [{}]
    prefixes: list[tuple[int, ...]] = [()]
    terminal: dict[int, int] = {}
    for idx, pat in enumerate(collection):
        node = 0
        for s in pat.symbols:
            nxt = children[node].get(s)
            if nxt is None:
                nxt = len(children)
                children[node][s] = nxt
                children.append({})
                prefixes.append(prefixes[node] + (s,))
            node = nxt
        terminal.setdefault(node, idx)

    n = len(children)
    fail = [0] * n
    delta = [[0] * m for _ in range(n)]
    # output[v]: pattern completed on entering v, either v itself or via a suffix
    output: dict[int, int] = dict(terminal)
    queue = deque()
    for s in range(m):
        child = children[0].get(s)
        if child is None:
            delta[0][s] = 0
        else:
            delta[0][s] = child
            queue.append(child)
    while queue:
        v = queue.popleft()
        if v not in output and fail[v] in output:
            output[v] = output[fail[v]]
        for s in range(m):
            child = children[v].get(s)
            if child is None:
                delta[v][s] = delta[fail[v]][s]
            else:
                fail[child] = delta[fail[v]][s]
                delta[v][s] = child
                queue.append(child)
    return Automaton(tuple(tuple(r) for r in delta), output, tuple(prefixes), tuple(collection.names))


@dataclass
class EmbeddedAutomaton:
    """Product of the matching automaton with the chain, pruned to reachable states.

    Transient states are ``(node, last symbol)`` pairs; absorbing targets are
    encoded as ``-(k + 1)`` for pattern ``k``.
    """

    chain: ChainSpec
    automaton: Automaton
    states: list
    start: dict
    start_absorb: dict
    step: dict
    absorb: dict = field(default_factory=dict)

    def _index(self):
        return {s: k for k, s in enumerate(self.states)}

    def describe(self, state) -> str:
        node, sym = state
        alpha = self.chain.alphabet
        return (f"chain state {alpha.label(sym)!r} after matching prefix "
                f"{alpha.render(self.automaton.prefixes[node])!r}")

    def check_absorbing(self) -> None:
        """Raise :class:`TauMayBeInfinite` unless every reachable state can absorb."""
        preds: dict = {s: [] for s in self.states}
        good = set()
        for s, outs in self.step.items():
            for target, _ in outs:
                if isinstance(target, int):
                    good.add(s)
                else:
                    preds[target].append(s)
        queue = deque(good)
        while queue:
            s = queue.popleft()
            for p in preds[s]:
                if p not in good:
                    good.add(p)
                    queue.append(p)
        for s in self.states:
            if s not in good:
                raise TauMayBeInfinite(self.describe(s))

    def kernel_matrices(self):
        """``(start, Q, R)`` as nested lists over transient states and patterns."""
        idx = self._index()
        n, c = len(self.states), len(self.automaton.names)
        zero = Fraction(0) if self.chain.exact else 0.0
        Q = [[zero] * n for _ in range(n)]
        R = [[zero] * c for _ in range(n)]
        for s, outs in self.step.items():
            i = idx[s]
            for target, p in outs:
                if isinstance(target, int):
                    R[i][-target - 1] += p
                else:
                    Q[i][idx[target]] += p
        start = [self.start.get(s, zero) for s in self.states]
        return start, Q, R


def embed(chain: ChainSpec, collection: PatternCollection) -> EmbeddedAutomaton:
    auto = build_automaton(collection, chain.alphabet)
    delta, accepting = auto.delta, auto.accepting
    P = chain.transition

    def enter(node: int, sym: int):
        nxt = delta[node][sym]
        if nxt in accepting:
            return -(accepting[nxt] + 1)
        return (nxt, sym)

    start, start_absorb = {}, {}
    for s, mu in enumerate(chain.initial):
        if mu == 0:
            continue
        target = enter(0, s)
        if isinstance(target, int):
            name = auto.names[-target - 1]
            start_absorb[name] = start_absorb.get(name, 0) + mu
        else:
            start[target] = start.get(target, 0) + mu

    states = sorted(start)
    seen = set(states)
    step = {}
    queue = deque(states)
    while queue:
        state = queue.popleft()
        node, sym = state
        outs = []
        for t, p in enumerate(P[sym]):
            if p == 0:
                continue
            target = enter(node, t)
            outs.append((target, p))
            if not isinstance(target, int) and target not in seen:
                seen.add(target)
                states.append(target)
                queue.append(target)
        step[state] = outs
    absorb = {name: -(k + 1) for k, name in enumerate(auto.names)}
    return EmbeddedAutomaton(chain, auto, states, start, start_absorb, step, absorb)


@dataclass(frozen=True)
class DistributionTable:
    """``S_K(n) = P(tau = tau_K = n)`` and ``S_i(n) = P(Z_n = i, tau > n)`` for n = 1..horizon."""

    horizon: int
    pattern_rows: tuple
    state_rows: tuple

    def stop_by(self, n: int):
        """``P(tau <= n)``."""
        return sum(sum(row.values()) for row in self.pattern_rows[:n])

    def survival(self, n: int):
        """``P(tau > n)``."""
        return sum(self.state_rows[n - 1])


def exact_distribution(chain: ChainSpec, collection: PatternCollection, horizon: int) -> DistributionTable:
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    emb = embed(chain, collection)
    names = collection.names
    zero = Fraction(0) if chain.exact else 0.0
    m = chain.size
    current = dict(emb.start)
    absorbed = {name: emb.start_absorb.get(name, zero) for name in names}
    pattern_rows, state_rows = [], []
    for n in range(1, horizon + 1):
        if n > 1:
            nxt: dict = {}
            absorbed = {name: zero for name in names}
            for state, mass in current.items():
                for target, p in emb.step[state]:
                    if isinstance(target, int):
                        absorbed[names[-target - 1]] += mass * p
                    else:
                        nxt[target] = nxt.get(target, zero) + mass * p
            current = nxt
        per_state = [zero] * m
        for (node, sym), mass in current.items():
            per_state[sym] += mass
        pattern_rows.append(dict(absorbed))
        state_rows.append(tuple(per_state))
    return DistributionTable(horizon, tuple(pattern_rows), tuple(state_rows))


@dataclass(frozen=True)
class ExactSummary:
    mean: object
    stop_probs: dict
    second_moment: object

    @property
    def variance(self):
        return self.second_moment - self.mean**2


def _solve_exact(A, B):
    from sympy import QQ
    from sympy.polys.matrices import DomainMatrix
    from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

    n = len(A)
    k = len(B[0])
    to_qq = lambda v: QQ(v.numerator, v.denominator)  # noqa: E731
    dA = DomainMatrix([[to_qq(v) for v in row] for row in A], (n, n), QQ)
    dB = DomainMatrix([[to_qq(v) for v in row] for row in B], (n, k), QQ)
    try:
        X = dA.lu_solve(dB)
    except DMNonInvertibleMatrixError:
        raise SingularFundamental("SingularFundamental: I - Q is singular") from None
    return [[Fraction(int(v.numerator), int(v.denominator)) for v in row] for row in X.to_list()]


def _solve_float(A, B):
    A = np.asarray(A, dtype=float)
    try:
        X = np.linalg.solve(A, np.asarray(B, dtype=float))
    except np.linalg.LinAlgError:
        raise SingularFundamental("SingularFundamental: I - Q is singular") from None
    if np.linalg.cond(A) > 1e14:
        raise SingularFundamental("SingularFundamental: I - Q is numerically singular")
    return X.tolist()


def exact_summary(chain: ChainSpec, collection: PatternCollection) -> ExactSummary:
    """Mean, stopping probabilities and second moment of ``tau`` via ``N = (I - Q)^-1``."""
    emb = embed(chain, collection)
    names = collection.names
    start, Q, R = emb.kernel_matrices()
    n = len(start)
    zero = Fraction(0) if chain.exact else 0.0
    one = Fraction(1) if chain.exact else 1.0
    stop = {name: emb.start_absorb.get(name, zero) for name in names}
    if n == 0:
        return ExactSummary(one, stop, one)
    solve = _solve_exact if chain.exact else _solve_float
    I_minus_Q = [[(one if i == j else zero) - Q[i][j] for j in range(n)] for i in range(n)]
    # columns: expected steps t = N 1, then absorption probabilities N R
    X = solve(I_minus_Q, [[one] + R[i] for i in range(n)])
    t = [row[0] for row in X]
    u = [row[0] for row in solve(I_minus_Q, [[v] for v in t])]
    for k, name in enumerate(names):
        stop[name] += sum(start[i] * X[i][k + 1] for i in range(n))
    steps = sum(start[i] * t[i] for i in range(n))
    steps_sq = sum(start[i] * (2 * u[i] - t[i]) for i in range(n))
    mean = 1 + steps
    second = 1 + 2 * steps + steps_sq
    return ExactSummary(mean, stop, second)


@dataclass(frozen=True)
class SimulationResult:
    trials: int
    seed: int
    mean: float
    mean_se: float
    stop_freqs: dict
    stop_se: dict
    counts: dict
    total_steps: int
    sum_squares: int

    @property
    def second_moment(self) -> float:
        return self.sum_squares / self.trials


def step_cap_from_env() -> int:
    raw = os.environ.get(STEP_CAP_ENV)
    if not raw:
        return DEFAULT_STEP_CAP
    cap = int(raw)
    if cap < 1:
        raise ValueError(f"{STEP_CAP_ENV} must be a positive integer")
    return cap


def _cumulative(row) -> np.ndarray:
    # exact running sums, normalised so the last entry is exactly 1.0
    acc = Fraction(0)
    sums = []
    for v in row:
        acc += Fraction(v)
        sums.append(acc)
    return np.array([float(a / acc) for a in sums])


class _Sampler:
    def __init__(self, chain: ChainSpec, collection: PatternCollection, seed: int, step_cap: int):
        auto = build_automaton(collection, chain.alphabet)
        self.delta = np.array(auto.delta, dtype=np.int64)
        accept = np.full(auto.node_count, -1, dtype=np.int64)
        for node, k in auto.accepting.items():
            accept[node] = k
        self.accept = accept
        self.cum_mu = _cumulative(chain.initial)
        self.cum_p = np.vstack([_cumulative(r) for r in chain.transition])
        self.n_patterns = len(collection)
        self.seed = seed
        self.step_cap = step_cap

    def run_block(self, block: int, size: int):
        rng = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(block,)))
        sym = np.searchsorted(self.cum_mu, rng.random(size), side="right")
        sym = np.minimum(sym, len(self.cum_mu) - 1)
        node = self.delta[0, sym]
        winner = self.accept[node]
        tau = np.ones(size, dtype=np.int64)
        active = np.flatnonzero(winner < 0)
        k = 1
        while active.size:
            k += 1
            if k > self.step_cap:
                raise StepCapExceeded(block * BLOCK_SIZE + int(active[0]), self.step_cap)
            u = rng.random(active.size)
            cum = self.cum_p[sym[active]]
            new_sym = np.minimum((u[:, None] >= cum).sum(axis=1), cum.shape[1] - 1)
            new_node = self.delta[node[active], new_sym]
            sym[active] = new_sym
            node[active] = new_node
            hit = self.accept[new_node]
            done = hit >= 0
            finished = active[done]
            winner[finished] = hit[done]
            tau[finished] = k
            active = active[~done]
        if tau.max() < (1 << 21):
            sum_sq = int((tau * tau).sum())
        else:
            sum_sq = sum(int(x) * int(x) for x in tau)
        counts = np.bincount(winner, minlength=self.n_patterns)
        return int(tau.sum()), sum_sq, [int(c) for c in counts]


def simulate(chain: ChainSpec, collection: PatternCollection, trials: int, seed: int,
             workers: int = 1, step_cap: int | None = None) -> SimulationResult:
    """Monte Carlo estimate of ``E(tau)`` and the stopping frequencies.

    Trials are cut into fixed blocks of ``BLOCK_SIZE``; block ``b`` draws from
    ``SeedSequence(seed, spawn_key=(b,))``. Block boundaries depend only on
    ``trials``, so results do not depend on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if step_cap is None:
        step_cap = step_cap_from_env()
    sampler = _Sampler(chain, collection, seed, step_cap)
    blocks = [(b, min(BLOCK_SIZE, trials - b * BLOCK_SIZE)) for b in range(math.ceil(trials / BLOCK_SIZE))]
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda bs: sampler.run_block(*bs), blocks))
    else:
        results = [sampler.run_block(*bs) for bs in blocks]
    total = sum(r[0] for r in results)
    total_sq = sum(r[1] for r in results)
    counts = [sum(r[2][k] for r in results) for k in range(len(collection))]
    mean = total / trials
    if trials > 1:
        var = (total_sq - total * total / trials) / (trials - 1)
        mean_se = math.sqrt(max(var, 0.0) / trials)
    else:
        mean_se = 0.0
    names = collection.names
    freqs = {name: c / trials for name, c in zip(names, counts)}
    se = {name: math.sqrt(p * (1 - p) / trials) for name, p in freqs.items()}
    return SimulationResult(trials, seed, mean, mean_se, freqs, se,
                            dict(zip(names, counts)), total, total_sq)
