"""Generating-function system for sojourn times and stopping probabilities.

Unknowns are ``F_i(z)`` (generating function of ``P(Z_n = i, tau > n)``) for
each state and ``f_K(z)`` (generating function of ``P(tau = tau_K = n)``) for
each pattern, both in powers of ``1/z``. At ``z = 1`` these are the expected
sojourn times before ``tau`` and the stopping probabilities, and
``E(tau) = 1 + sum_i F_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .correlation import CorrelationTable, correlation_table, last_symbol_indicator, tail_probability
from .errors import HeadsDiffer, NotIrreducible, SingularAtZ, WrongShape
from .linalg import SingularMatrix, bareiss_solve, float_solve
from .model import ChainSpec, PatternCollection, validate

FLOAT_RTOL = 1e-9


def _as_z(z, exact: bool):
    if exact:
        z = Fraction(z) if not isinstance(z, str) else Fraction(z.strip())
        if z < 1:
            raise ValueError(f"z must be >= 1, got {z}")
        return z
    z = float(Fraction(z)) if isinstance(z, str) else float(z)
    if z < 1:
        raise ValueError(f"z must be >= 1, got {z}")
    return z


@dataclass(frozen=True)
class SystemMatrix:
    """``Q(z) x = rhs`` with ``x = (F_1..F_m, f_A..f_T)``."""

    z: object
    entries: tuple
    rhs: tuple
    state_count: int
    pattern_names: tuple
    exact: bool = True

    @property
    def dimension(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class SystemSolution:
    z: object
    F: tuple
    f: dict
    mean_tau: Optional[object] = None
    mode: str = "exact"
    determinant: Optional[object] = None

    @property
    def F_total(self):
        """``F(z) = 1 + sum_i F_i(z)``."""
        return 1 + sum(self.F)

    @property
    def f_total(self):
        return sum(self.f.values())


def assemble(chain: ChainSpec, collection: PatternCollection,
             corr: CorrelationTable | None = None, z=1) -> SystemMatrix:
    """Build ``Q(z)`` and the right-hand side.

    Rows ``j < m`` balance the flow into state ``j``; the remaining rows, one
    per pattern T, balance entries into ``T_1`` against the weighted overlaps.
    """
    z = _as_z(z, chain.exact)
    if corr is None:
        corr = correlation_table(chain, collection)
    m = chain.size
    P = chain.transition
    rows, rhs = [], []
    for j in range(m):
        row = [P[i][j] for i in range(m)]
        row[j] = row[j] - z
        row += [-z * last_symbol_indicator(K, j) for K in collection]
        rows.append(tuple(row))
        rhs.append(-chain.initial[j])
    for T in collection:
        h = T.first
        row = [P[i][h] for i in range(m)]
        row += [-corr.g(K.name, T.name)(z) for K in collection]
        rows.append(tuple(row))
        rhs.append(-chain.initial[h])
    return SystemMatrix(z, tuple(rows), tuple(rhs), m, tuple(collection.names), chain.exact)


def solve(matrix: SystemMatrix) -> SystemSolution:
    """Solve an assembled system; raises :class:`SingularAtZ` on a zero determinant."""
    solver = bareiss_solve if matrix.exact else float_solve
    try:
        x, det = solver(matrix.entries, matrix.rhs)
    except SingularMatrix:
        raise SingularAtZ(matrix.z) from None
    m = matrix.state_count
    F = tuple(x[:m])
    f = dict(zip(matrix.pattern_names, x[m:]))
    mean_tau = 1 + sum(F) if matrix.z == 1 else None
    return SystemSolution(matrix.z, F, f, mean_tau,
                          "exact" if matrix.exact else "float", det)


def solve_instance(chain: ChainSpec, collection: PatternCollection, z=1,
                   check: bool = True) -> SystemSolution:
    """Validate, assemble and solve at ``z``.

    ``Q(z)`` can be singular at an isolated point even for a valid instance
    (at ``z = 1`` this happens when a closed set of states is entered only
    through a partial pattern match that always completes). The generating
    functions are continuous from the right, so in exact mode the system is
    then solved over the rational functions of ``z`` and evaluated at the
    requested point after cancellation.
    """
    if check:
        validate(chain, collection)
    matrix = assemble(chain, collection, z=z)
    try:
        return solve(matrix)
    except SingularAtZ:
        if not chain.exact:
            raise
    return _solve_by_limit(chain, collection, matrix.z)


def _symbolic_system(chain: ChainSpec, collection: PatternCollection):
    """``Q(z)`` and the right-hand side as sympy expressions in the symbol ``z``."""
    import sympy

    z = sympy.Symbol("z")
    corr = correlation_table(chain, collection)
    Q = lambda v: sympy.Rational(v.numerator, v.denominator)  # noqa: E731
    m = chain.size
    P = chain.transition
    rows, rhs = [], []
    for j in range(m):
        row = [Q(P[i][j]) - (z if i == j else 0) for i in range(m)]
        row += [-z * last_symbol_indicator(K, j) for K in collection]
        rows.append(row)
        rhs.append(-Q(chain.initial[j]))
    for T in collection:
        row = [Q(P[i][T.first]) for i in range(m)]
        for K in collection:
            g = corr.g(K.name, T.name)
            row.append(-sum((Q(c) * z**r for r, c in g.coefficients.items()), sympy.Integer(0)))
        rows.append(row)
        rhs.append(-Q(chain.initial[T.first]))
    return z, rows, rhs


def _solve_by_limit(chain: ChainSpec, collection: PatternCollection, z0: Fraction) -> SystemSolution:
    from sympy import QQ
    from sympy.polys.matrices import DomainMatrix
    from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

    z, rows, rhs = _symbolic_system(chain, collection)
    field_ = QQ.frac_field(z)
    n = len(rows)
    A = DomainMatrix([[field_.convert(v) for v in row] for row in rows], (n, n), field_)
    b = DomainMatrix([[field_.convert(v)] for v in rhs], (n, 1), field_)
    try:
        x = A.lu_solve(b).to_list()
    except DMNonInvertibleMatrixError:
        raise SingularAtZ(z0) from None
    at = QQ(z0.numerator, z0.denominator)
    values = []
    for (el,) in x:
        den = el.denom(at)
        if den == 0:
            raise SingularAtZ(z0)
        v = el.numer(at) / den
        values.append(Fraction(int(v.numerator), int(v.denominator)))
    m = chain.size
    F = tuple(values[:m])
    f = dict(zip(collection.names, values[m:]))
    return SystemSolution(z0, F, f, 1 + sum(F) if z0 == 1 else None, "exact", None)


def solve_length_one(chain: ChainSpec, collection: PatternCollection, z=1) -> SystemSolution:
    """Reduced ``|states|``-dimensional system when every pattern is one symbol.

    State ``j`` covered by a pattern carries ``f_j`` as its unknown (its
    ``F_j`` is identically zero); every other state carries ``F_j``.
    """
    if any(len(K) != 1 for K in collection):
        raise WrongShape("WrongShape: every pattern must have length 1")
    z = _as_z(z, chain.exact)
    m = chain.size
    P = chain.transition
    owner = {K.first: K.name for K in collection}
    rows, rhs = [], []
    for j in range(m):
        row = []
        for i in range(m):
            coeff = 0 if i in owner else P[i][j]
            if i == j:
                coeff = coeff - z
            row.append(coeff)
        rows.append(row)
        rhs.append(-chain.initial[j])
    solver = bareiss_solve if chain.exact else float_solve
    try:
        x, det = solver(rows, rhs)
    except SingularMatrix:
        raise SingularAtZ(z) from None
    zero = Fraction(0) if chain.exact else 0.0
    F = tuple(zero if j in owner else x[j] for j in range(m))
    f = {K.name: x[K.first] for K in collection}
    return SystemSolution(z, F, f, 1 + sum(F) if z == 1 else None,
                          "exact" if chain.exact else "float", det)


def common_head_system(chain: ChainSpec, collection: PatternCollection):
    """Rows and right-hand side of the ``|C|``-equation system for a shared first symbol.

    The first row is ``sum f_K = 1``; the row for each other pattern T is
    ``sum_K f_K (g_KT - g_KA) = 0`` with A the first pattern.
    """
    heads = {K.first for K in collection}
    if len(heads) != 1:
        raise HeadsDiffer("HeadsDiffer: patterns do not share a first symbol")
    corr = correlation_table(chain, collection)
    one = Fraction(1) if chain.exact else 1.0
    A = collection[0]
    rows = [[one] * len(collection)]
    rhs = [one]
    for T in collection.patterns[1:]:
        rows.append([corr.g(K.name, T.name)(one) - corr.g(K.name, A.name)(one) for K in collection])
        rhs.append(0 * one)
    return rows, rhs


def solve_common_head(chain: ChainSpec, collection: PatternCollection) -> dict:
    """Stopping probabilities from the shared-first-symbol reduction."""
    rows, rhs = common_head_system(chain, collection)
    solver = bareiss_solve if chain.exact else float_solve
    try:
        x, _ = solver(rows, rhs)
    except SingularMatrix:
        raise SingularAtZ(1) from None
    return dict(zip(collection.names, x))


def is_irreducible(chain: ChainSpec) -> bool:
    m = chain.size
    for start in range(m):
        seen = {start}
        stack = [start]
        while stack:
            i = stack.pop()
            for j in chain.successors(i):
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(seen) != m:
            return False
    return True


def stationary_distribution(chain: ChainSpec) -> tuple:
    """Unique stationary law of an irreducible chain."""
    if not is_irreducible(chain):
        raise NotIrreducible("NotIrreducible: transition graph is not strongly connected")
    m = chain.size
    P = chain.transition
    one = Fraction(1) if chain.exact else 1.0
    rows = [[P[i][j] - (one if i == j else 0) for i in range(m)] for j in range(m - 1)]
    rows.append([one] * m)
    rhs = [0 * one] * (m - 1) + [one]
    solver = bareiss_solve if chain.exact else float_solve
    x, _ = solver(rows, rhs)
    return tuple(x)


@dataclass(frozen=True)
class RestartReport:
    """Whether ``Z_tau`` has the initial law, i.e. ``F_i = c * pi_i`` for one constant."""

    holds: bool
    pi: tuple
    c: Optional[object] = None
    mean_tau: Optional[object] = None
    c_by_pattern: dict = field(default_factory=dict)
    c_consistent: bool = False


def check_stationary_restart(chain: ChainSpec, solution: SystemSolution,
                             collection: PatternCollection | None = None) -> RestartReport:
    if solution.z != 1:
        raise ValueError("the restart check needs the solution at z = 1")
    pi = stationary_distribution(chain)
    c = sum(solution.F)
    if chain.exact:
        holds = all(Fi == c * p for Fi, p in zip(solution.F, pi))
    else:
        holds = all(abs(Fi - c * p) <= FLOAT_RTOL * max(1.0, abs(c)) for Fi, p in zip(solution.F, pi))
    if not holds:
        return RestartReport(False, pi)
    c_by_pattern = {}
    if collection is not None:
        corr = correlation_table(chain, collection)
        one = Fraction(1) if chain.exact else 1.0
        for T in collection:
            weighted = sum(solution.f[K.name] * corr.g(K.name, T.name)(one) for K in collection)
            c_by_pattern[T.name] = (weighted - chain.initial[T.first]) / pi[T.first]
    if chain.exact:
        consistent = all(v == c for v in c_by_pattern.values())
    else:
        consistent = all(abs(v - c) <= FLOAT_RTOL * max(1.0, abs(c)) for v in c_by_pattern.values())
    return RestartReport(True, pi, c, 1 + c, c_by_pattern, consistent)


def determinant_polynomial(chain: ChainSpec, collection: PatternCollection) -> list[Fraction]:
    """Coefficients (ascending powers of z) of ``det Q(z)``, expanded symbolically."""
    import sympy

    if not chain.exact:
        raise ValueError("symbolic expansion needs an exact chain")
    z, rows, _ = _symbolic_system(chain, collection)
    det = sympy.Matrix(rows).det(method="berkowitz")
    coeffs = sympy.Poly(sympy.expand(det), z).all_coeffs()[::-1]
    return [Fraction(int(c.p), int(c.q)) for c in coeffs]


def expected_leading_term(chain: ChainSpec, collection: PatternCollection):
    """``(degree, coefficient)`` predicted for the top monomial of ``det Q(z)``."""
    degree = chain.size + sum(len(T) for T in collection)
    denom = Fraction(1)
    for T in collection:
        denom *= tail_probability(chain, T, 1)
    return degree, (-1) ** (chain.size + len(collection)) / denom
