"""Affine and canonical additive CA rules over prime fields.

An affine rule on V = F_p^d applies one d x d matrix per neighborhood
position and adds a constant.  States are encoded positionally, vector
(v_1, ..., v_d) as sum(v_t * p^(d-t)), so converting to and from truth
tables is pure base-p arithmetic.  The canonical additive case is d=1
with zero constant: scalar coefficients a_{-r}, ..., a_r.

The polynomial machinery lives here too: the one-cell seed evolution
F^n(e^0) is the coefficient sequence of l(x)^n with
l(x) = a_r x^(-r) + ... + a_{-r} x^r, and the n-th power's component
matrices are banded Toeplitz matrices read off that sequence.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from . import ca_core
from .ca_core import LocalAlgebra
from .caps import DEFAULT_CAPS, Caps, require
from .fp_linalg import (FpMatrix, Subspace, is_prime, nullspace_basis, solve)

Vector = tuple[int, ...]


def _decode_vector(value: int, p: int, d: int) -> Vector:
    digits = []
    for _ in range(d):
        digits.append(value % p)
        value //= p
    digits.reverse()
    return tuple(digits)


def _encode_vector(vec: Sequence[int], p: int) -> int:
    value = 0
    for x in vec:
        value = value * p + x % p
    return value


@dataclass(frozen=True)
class AffineAlgebra:
    """Affine local rule over F_p^d: one matrix per position plus a constant.

    d = 0 is allowed and denotes the singleton algebra (empty matrices,
    empty constant); it shows up as the degenerate result of carving a
    sub- or quotient rule out of a trivial subspace.
    """

    p: int
    d: int
    r: int
    components: tuple[FpMatrix, ...]
    constant: Vector

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")
        if self.d < 0 or self.r < 0:
            raise ValueError("dimension and radius must be nonnegative")
        if self.d == 0:
            if self.components or self.constant:
                raise ValueError("zero-dimensional rules carry no matrices")
            return
        if len(self.components) != self.arity:
            raise ValueError(f"expected {self.arity} component matrices")
        for mat in self.components:
            if (mat.p, mat.rows, mat.cols) != (self.p, self.d, self.d):
                raise ValueError("component matrices must be d x d over p")
        if len(self.constant) != self.d:
            raise ValueError("constant length must equal the dimension")
        if any(not 0 <= x < self.p for x in self.constant):
            raise ValueError("constant entries out of range")

    @property
    def arity(self) -> int:
        return 2 * self.r + 1

    @property
    def m(self) -> int:
        return self.p ** self.d

    @staticmethod
    def additive(p: int, r: int, components: Sequence[FpMatrix]) -> "AffineAlgebra":
        d = components[0].rows
        return AffineAlgebra(p, d, r, tuple(components), (0,) * d)

    @staticmethod
    def singleton(p: int, r: int) -> "AffineAlgebra":
        return AffineAlgebra(p, 0, r, (), ())

    def component(self, i: int) -> FpMatrix:
        if not -self.r <= i <= self.r:
            raise ValueError(f"position {i} outside radius {self.r}")
        if self.d == 0:
            raise ValueError("zero-dimensional rules have no component matrices")
        return self.components[i + self.r]

    def encode_state(self, vec: Sequence[int]) -> int:
        return _encode_vector(vec, self.p)

    def decode_state(self, value: int) -> Vector:
        return _decode_vector(value, self.p, self.d)

    def apply_vectors(self, vectors: Sequence[Sequence[int]]) -> Vector:
        if self.d == 0:
            return ()
        p = self.p
        acc = list(self.constant)
        for mat, vec in zip(self.components, vectors):
            img = mat.apply(vec)
            for t in range(self.d):
                acc[t] = (acc[t] + img[t]) % p
        return tuple(acc)

    def component_sum(self) -> FpMatrix:
        total = FpMatrix.zero(self.p, self.d)
        for mat in self.components:
            total = total.add(mat)
        return total

    def idempotent(self) -> Vector | None:
        """A state v with f(v, ..., v) = v, when one exists."""
        if self.d == 0:
            return ()
        lhs = self.component_sum().add(FpMatrix.identity(self.p, self.d).scale(-1))
        rhs = tuple((-c) % self.p for c in self.constant)
        return solve(lhs, rhs)

    def is_additive(self) -> bool:
        return all(c == 0 for c in self.constant)


@dataclass(frozen=True)
class CanonicalAdditive:
    """Additive rule with state space exactly F_p: scalar coefficients."""

    p: int
    r: int
    coefficients: Vector

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")
        if len(self.coefficients) != 2 * self.r + 1:
            raise ValueError("expected 2r+1 coefficients")
        if any(not 0 <= a < self.p for a in self.coefficients):
            raise ValueError("coefficients must be residues mod p")

    @property
    def m(self) -> int:
        return self.p

    @property
    def arity(self) -> int:
        return 2 * self.r + 1

    def coefficient(self, i: int) -> int:
        return self.coefficients[i + self.r]

    def support(self) -> list[int]:
        """Positions with nonzero coefficient, as offsets in -r..r."""
        return [i - self.r for i, a in enumerate(self.coefficients) if a]

    def as_affine(self) -> AffineAlgebra:
        mats = tuple(FpMatrix.from_rows(self.p, [[a]]) for a in self.coefficients)
        return AffineAlgebra(self.p, 1, self.r, mats, (0,))

    def to_table(self) -> LocalAlgebra:
        p, arity = self.p, self.arity
        coeffs = self.coefficients
        table = tuple(
            sum(a * x for a, x in zip(coeffs, nb)) % p
            for nb in itertools.product(range(p), repeat=arity))
        return LocalAlgebra(p, self.r, table)


def canonical_additive(p: int, coefficients: Sequence[int], r: int | None = None) -> CanonicalAdditive:
    coefficients = tuple(x % p for x in coefficients)
    if r is None:
        if len(coefficients) % 2 == 0:
            raise ValueError("coefficient count must be odd (positions -r..r)")
        r = len(coefficients) // 2
    return CanonicalAdditive(p, r, coefficients)


def to_table(algebra: AffineAlgebra | CanonicalAdditive, caps: Caps = DEFAULT_CAPS) -> LocalAlgebra:
    """Truth table of an affine rule under the positional state encoding."""
    if isinstance(algebra, CanonicalAdditive):
        algebra = algebra.as_affine()
    if algebra.d == 0:
        return ca_core.singleton(algebra.r)
    p, d, arity = algebra.p, algebra.d, algebra.arity
    m = algebra.m
    require(m ** arity <= caps.table_cap,
            f"affine truth table needs {m ** arity} entries, cap {caps.table_cap}")
    # per-position lookup: state value -> encoded image under that component
    vectors = [_decode_vector(v, p, d) for v in range(m)]
    images = [[mat.apply(vec) for vec in vectors] for mat in algebra.components]
    constant = algebra.constant
    table = []
    for nb in itertools.product(range(m), repeat=arity):
        acc = list(constant)
        for pos, state in enumerate(nb):
            img = images[pos][state]
            for t in range(d):
                acc[t] = acc[t] + img[t]
        table.append(_encode_vector([x % p for x in acc], p))
    return LocalAlgebra(m, algebra.r, tuple(table))


def _dimension_over(m: int, p: int) -> int | None:
    d = 0
    while m % p == 0:
        m //= p
        d += 1
    return d if m == 1 else None


def fit_affine(algebra: LocalAlgebra, p: int) -> AffineAlgebra | None:
    """Recover the affine form of a truth table, if it has one.

    The constant is f(0, ..., 0); candidate matrix columns are probed
    with one-hot states, and the candidate is then verified against the
    whole table.  Returns None when verification fails.
    """
    if not is_prime(p):
        raise ValueError(f"modulus {p} is not prime")
    d = _dimension_over(algebra.m, p)
    if d is None:
        raise ValueError(f"state count {algebra.m} is not a power of {p}")
    if d == 0:
        raise ValueError("singleton algebras carry no affine structure")
    arity = algebra.arity
    m = algebra.m
    zero_nb = [0] * arity
    constant = _decode_vector(algebra.apply(zero_nb), p, d)
    components = []
    for pos in range(arity):
        cols = []
        for t in range(d):
            nb = zero_nb[:]
            nb[pos] = p ** (d - 1 - t)  # the one-hot vector e_t, encoded
            image = _decode_vector(algebra.apply(nb), p, d)
            cols.append(tuple((x - c) % p for x, c in zip(image, constant)))
        components.append(FpMatrix(p, d, d, tuple(zip(*cols))))
    candidate = AffineAlgebra(p, d, algebra.r, tuple(components), constant)
    if to_table(candidate).table != algebra.table:
        return None
    return candidate


def fit_canonical_additive(algebra: LocalAlgebra) -> CanonicalAdditive | None:
    """Canonical additive form (prime state count, linear, no constant)."""
    if not is_prime(algebra.m):
        return None
    affine = fit_affine(algebra, algebra.m)
    if affine is None or not affine.is_additive():
        return None
    return CanonicalAdditive(affine.p, affine.r,
                             tuple(mat.entries[0][0] for mat in affine.components))


def _relabeled_table(algebra: LocalAlgebra, sigma: Sequence[int]) -> LocalAlgebra:
    """The algebra with states renamed by sigma: f'(sigma x) = sigma f(x)."""
    m, arity = algebra.m, algebra.arity
    inverse = [0] * m
    for s, image in enumerate(sigma):
        inverse[image] = s
    table = [0] * len(algebra.table)
    for nb in itertools.product(range(m), repeat=arity):
        idx = 0
        for y in nb:
            idx = idx * m + y
        table[idx] = sigma[algebra.apply([inverse[y] for y in nb])]
    return LocalAlgebra(m, algebra.r, tuple(table))


def is_affine_up_to_iso(algebra: LocalAlgebra, p: int,
                        caps: Caps = DEFAULT_CAPS) -> tuple[Vector, AffineAlgebra] | None:
    """Search state relabelings for one that makes the table affine.

    Returns (bijection, affine form) for the first success in
    lexicographic bijection order, or None.  State counts that are not
    powers of p are rejected immediately: no relabeling can help.
    """
    d = _dimension_over(algebra.m, p) if is_prime(p) else None
    if not is_prime(p):
        raise ValueError(f"modulus {p} is not prime")
    if d is None:
        return None
    if d == 0:
        raise ValueError("singleton algebras carry no affine structure")
    m = algebra.m
    require(m <= caps.relabel_cap,
            f"relabeling search needs m <= {caps.relabel_cap}, got {m}")
    for sigma in itertools.permutations(range(m)):
        affine = fit_affine(_relabeled_table(algebra, sigma), p)
        if affine is not None:
            return (tuple(sigma), affine)
    return None


@dataclass(frozen=True)
class CoefficientProfile:
    """The sequence F^n(e^0) on positions -nr..nr for an additive rule."""

    p: int
    n: int
    values: Vector

    def __post_init__(self) -> None:
        if len(self.values) % 2 != 1:
            raise ValueError("profile covers symmetric positions -nr..nr")
        if any(not 0 <= x < self.p for x in self.values):
            raise ValueError("profile entries must be residues mod p")

    @property
    def reach(self) -> int:
        """nr: the largest tracked offset."""
        return len(self.values) // 2

    def value_at(self, k: int) -> int:
        if abs(k) > self.reach:
            return 0
        return self.values[k + self.reach]


def e0_evolution(rule: CanonicalAdditive, n: int) -> CoefficientProfile:
    """Coefficients of l(x)^n, re-indexed so position k holds F^n(e^0)_k.

    l(x) = a_r x^(-r) + ... + a_{-r} x^r, so a single step places a_{-k}
    at position k; powers are computed by binary exponentiation of the
    dense coefficient list mod p.
    """
    if n < 1:
        raise ValueError("the seed evolution needs n >= 1")
    p, r = rule.p, rule.r
    # dense coefficients on exponents -r..r; exponent k holds a_{-k}
    base = [rule.coefficient(-k) for k in range(-r, r + 1)]

    def multiply(f: list[int], g: list[int]) -> list[int]:
        out = [0] * (len(f) + len(g) - 1)
        for i, a in enumerate(f):
            if a:
                for j, b in enumerate(g):
                    if b:
                        out[i + j] = (out[i + j] + a * b) % p
        return out

    result = [1]
    power = base
    k = n
    while k:
        if k & 1:
            result = multiply(result, power)
        k >>= 1
        if k:
            power = multiply(power, power)
    reach = (len(result) - 1) // 2
    padded = [0] * (n * r - reach) + result + [0] * (n * r - reach)
    return CoefficientProfile(p, n, tuple(padded))


def component_matrices(rule: CanonicalAdditive, n: int) -> list[FpMatrix]:
    """Component matrices of the n-th iterative power in the canonical basis.

    Each matrix is Toeplitz in the seed evolution: the block for
    position i has entry c_{-i*n + (row - col)}, which concatenates row
    by row into shifted copies of the reflected profile.
    """
    profile = e0_evolution(rule, n)
    matrices = []
    for i in range(-rule.r, rule.r + 1):
        center = -i * n
        entries = tuple(
            tuple(profile.value_at(center + t - j) for j in range(n))
            for t in range(n))
        matrices.append(FpMatrix(rule.p, n, n, entries))
    return matrices


@dataclass(frozen=True)
class StructureCheck:
    name: str
    passed: bool
    expected: object
    actual: object


@dataclass(frozen=True)
class StructureReport:
    """Structural facts about the n-th power's component matrices.

    Data, not an assertion: each named check records expected and
    actual values so the caller can render or test them.
    """

    rule: CanonicalAdditive
    n: int
    least: int
    greatest: int
    checks: tuple[StructureCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> list[StructureCheck]:
        return [check for check in self.checks if not check.passed]


def check_structure(rule: CanonicalAdditive, n: int) -> StructureReport:
    """Check the banded-triangular shape of the outermost component
    matrices: zero blocks outside the support, powers of the outermost
    coefficients on the diagonal, and the two closest off-diagonal bands
    given by the first-order expansion of the rule's n-fold composition.
    """
    if n < 1:
        raise ValueError("structure checks need n >= 1")
    support = rule.support()
    if not support:
        raise ValueError("the all-zero rule has no structure to check")
    i, j = support[0], support[-1]
    p = rule.p
    matrices = component_matrices(rule, n)
    checks: list[StructureCheck] = []

    def coefficient(offset: int) -> int:
        if not -rule.r <= offset <= rule.r:
            return 0
        return rule.coefficient(offset)

    def band(mat: FpMatrix, k: int) -> tuple[int, ...]:
        """Band at row - col = k (negative k is above the diagonal)."""
        return tuple(mat.entries[t][t - k] for t in range(max(0, k), min(n, n + k)))

    for offset in range(-rule.r, rule.r + 1):
        mat = matrices[offset + rule.r]
        if offset < i or offset > j:
            checks.append(StructureCheck(
                f"component {offset} zero", mat.is_zero(), "zero matrix", mat.entries))
    a_i, a_j = rule.coefficient(i), rule.coefficient(j)
    mat_i = matrices[i + rule.r]
    mat_j = matrices[j + rule.r]
    lower = tuple(x for k in range(1, n) for x in band(mat_i, k))
    checks.append(StructureCheck(
        f"component {i} upper triangular", all(x == 0 for x in lower), "zeros", lower))
    upper = tuple(x for k in range(1, n) for x in band(mat_j, -k))
    checks.append(StructureCheck(
        f"component {j} lower triangular", all(x == 0 for x in upper), "zeros", upper))
    diag_i = band(mat_i, 0)
    expected = pow(a_i, n, p)
    checks.append(StructureCheck(
        f"component {i} diagonal", diag_i == (expected,) * n, (expected,) * n, diag_i))
    diag_j = band(mat_j, 0)
    expected = pow(a_j, n, p)
    checks.append(StructureCheck(
        f"component {j} diagonal", diag_j == (expected,) * n, (expected,) * n, diag_j))
    if n >= 2:
        expected = (n * pow(a_i, n - 1, p) * coefficient(i + 1)) % p
        actual = band(mat_i, -1)
        checks.append(StructureCheck(
            f"component {i} first superdiagonal",
            actual == (expected,) * (n - 1), (expected,) * (n - 1), actual))
        expected = (n * pow(a_j, n - 1, p) * coefficient(j - 1)) % p
        actual = band(mat_j, 1)
        checks.append(StructureCheck(
            f"component {j} first subdiagonal",
            actual == (expected,) * (n - 1), (expected,) * (n - 1), actual))
    if n >= 3:
        expected = (n * pow(a_i, n - 1, p) * coefficient(i + 2)
                    + math.comb(n, 2) * pow(a_i, n - 2, p) * coefficient(i + 1) ** 2) % p
        actual = band(mat_i, -2)
        checks.append(StructureCheck(
            f"component {i} second superdiagonal",
            actual == (expected,) * (n - 2), (expected,) * (n - 2), actual))
        expected = (n * pow(a_j, n - 1, p) * coefficient(j - 2)
                    + math.comb(n, 2) * pow(a_j, n - 2, p) * coefficient(j - 1) ** 2) % p
        actual = band(mat_j, 2)
        checks.append(StructureCheck(
            f"component {j} second subdiagonal",
            actual == (expected,) * (n - 2), (expected,) * (n - 2), actual))
    return StructureReport(rule, n, i, j, tuple(checks))


def is_doubly_bijective(rule: CanonicalAdditive) -> bool:
    """With i least and j greatest nonzero positions, requires the inner
    neighbors a_{i+1} and a_{j-1} to be nonzero as well.  Rules with
    fewer than two nonzero coefficients are not doubly bijective."""
    support = rule.support()
    if len(support) < 2:
        return False
    i, j = support[0], support[-1]
    return rule.coefficient(i + 1) != 0 and rule.coefficient(j - 1) != 0


def interleaving_bijection(block: int, copies: int, m: int) -> Vector:
    """State bijection from blocks of block*copies cells to a
    copies-fold product of block-cell states, transposing the cell grid.

    Cell at (b, u) of the grouped state (block-major) moves to (u, b)
    (factor-major).  For block == 1 or copies == 1 this is the identity.
    """
    total = block * copies
    size = m ** total
    result = []
    for value in range(size):
        cells = _decode_vector(value, m, total)
        transposed = [cells[b * copies + u] for u in range(copies) for b in range(block)]
        result.append(_encode_vector(transposed, m))
    return tuple(result)


@dataclass(frozen=True)
class SplittingResult:
    """Outcome of checking B^[p^k * l] against the product of p^k copies
    of B^[l], with the explicit cell-transposition witness."""

    ok: bool
    k: int
    l: int
    power: LocalAlgebra
    split: LocalAlgebra
    witness: Vector
    detail: str

    def __bool__(self) -> bool:
        return self.ok


def verify_splitting(rule: CanonicalAdditive, k: int, l: int,
                     caps: Caps = DEFAULT_CAPS) -> SplittingResult:
    """Certify B^[p^k * l] ~ B^[l] x ... x B^[l] (p^k factors).

    The witness is the de-interleaving of cells; for l = 1 it is the
    identity and the tables agree entry for entry (the coefficients of
    the p^k-th power recur with spacing p^k, so grouping p^k cells acts
    coordinatewise).  The witness is replayed against both full tables.
    """
    if k < 0 or l < 1:
        raise ValueError("need k >= 0 and l >= 1")
    p = rule.p
    copies = p ** k
    n = copies * l
    base = rule.to_table()
    power = ca_core.iterative_power(base, n, caps)
    factor = ca_core.iterative_power(base, l, caps)
    split = ca_core.product([factor] * copies, caps) if copies > 1 else factor
    witness = interleaving_bijection(l, copies, p)
    ok = _bijection_conjugates(power, split, witness)
    detail = "identity witness, tables equal" if witness == tuple(range(len(witness))) \
        else "cell-transposition witness"
    return SplittingResult(ok, k, l, power, split, witness, detail)


def _bijection_conjugates(a: LocalAlgebra, b: LocalAlgebra, phi: Sequence[int]) -> bool:
    """Does phi satisfy phi(f(x)) = g(phi(x)) on every neighborhood?"""
    if a.m != b.m or a.r != b.r:
        return False
    m, arity = a.m, a.arity
    if list(phi) == list(range(m)):
        return a.table == b.table
    for nb in itertools.product(range(m), repeat=arity):
        if phi[a.apply(nb)] != b.apply([phi[x] for x in nb]):
            return False
    return True


def _check_invariant(algebra: AffineAlgebra, space: Subspace) -> None:
    for offset in range(-algebra.r, algebra.r + 1):
        mat = algebra.component(offset)
        for vec in space.basis:
            image = mat.apply(vec)
            if not space.contains(image):
                raise ValueError(
                    f"subspace not invariant: component {offset} maps {vec} to {image}")


def subalgebra_affine(algebra: AffineAlgebra, space: Subspace, anchor: Sequence[int],
                      caps: Caps = DEFAULT_CAPS) -> AffineAlgebra:
    """Affine rule on the coset anchor + space, in the coordinates of the
    subspace basis.  Requires the space invariant under every component
    and f(anchor, ..., anchor) inside the coset; the embedding is
    verified against the full truth table before returning.
    """
    if algebra.d == 0:
        raise ValueError("cannot restrict a zero-dimensional rule")
    if (space.p, space.ambient) != (algebra.p, algebra.d):
        raise ValueError("subspace does not match the rule's state space")
    p = algebra.p
    anchor = tuple(x % p for x in anchor)
    _check_invariant(algebra, space)
    fixed = algebra.apply_vectors([anchor] * algebra.arity)
    drift = tuple((a - b) % p for a, b in zip(fixed, anchor))
    if not space.contains(drift):
        raise ValueError(
            f"f(v,...,v) - v = {drift} is outside the subspace for anchor {anchor}")
    e = space.dim
    if e == 0:
        result = AffineAlgebra.singleton(p, algebra.r)
    else:
        mats = []
        for offset in range(-algebra.r, algebra.r + 1):
            mat = algebra.component(offset)
            cols = [space.coordinates(mat.apply(w)) for w in space.basis]
            mats.append(FpMatrix(p, e, e, tuple(zip(*cols))))
        result = AffineAlgebra(p, e, algebra.r, tuple(mats), space.coordinates(drift))
    _verify_coset_embedding(algebra, space, anchor, result, caps)
    return result


def _coset_states(algebra: AffineAlgebra, space: Subspace, anchor: Vector) -> list[int]:
    p = algebra.p
    states = []
    for w in space.vectors():
        states.append(algebra.encode_state([(a + b) % p for a, b in zip(anchor, w)]))
    return states


def _verify_coset_embedding(algebra: AffineAlgebra, space: Subspace, anchor: Vector,
                            sub: AffineAlgebra, caps: Caps) -> None:
    p = algebra.p
    sub_table = to_table(sub, caps)
    embed = []
    for t in range(sub_table.m):
        coords = _decode_vector(t, p, sub.d)
        vec = list(anchor)
        for c, w in zip(coords, space.basis):
            for idx in range(algebra.d):
                vec[idx] = (vec[idx] + c * w[idx]) % p
        embed.append(tuple(vec))
    for nb in itertools.product(range(sub_table.m), repeat=sub_table.arity):
        expected = algebra.apply_vectors([embed[t] for t in nb])
        actual = embed[sub_table.apply(nb)]
        assert actual == expected, "coset embedding failed to commute"


def quotient_affine(algebra: AffineAlgebra, space: Subspace,
                    caps: Caps = DEFAULT_CAPS) -> AffineAlgebra:
    """Affine rule induced on V / space, coordinatized by the non-pivot
    positions of the subspace's echelon basis."""
    if algebra.d == 0:
        raise ValueError("cannot quotient a zero-dimensional rule")
    if (space.p, space.ambient) != (algebra.p, algebra.d):
        raise ValueError("subspace does not match the rule's state space")
    p, d = algebra.p, algebra.d
    _check_invariant(algebra, space)
    pivots = space.pivots()
    free = [t for t in range(d) if t not in pivots]
    e = len(free)

    def reduce_mod(vec: Sequence[int]) -> Vector:
        out = list(x % p for x in vec)
        for w, pivot in zip(space.basis, pivots):
            factor = out[pivot]
            if factor:
                for t in range(d):
                    out[t] = (out[t] - factor * w[t]) % p
        return tuple(out)

    def coords(vec: Sequence[int]) -> Vector:
        reduced = reduce_mod(vec)
        return tuple(reduced[t] for t in free)

    if e == 0:
        return AffineAlgebra.singleton(p, algebra.r)

    def lift(coeffs: Sequence[int]) -> Vector:
        vec = [0] * d
        for c, t in zip(coeffs, free):
            vec[t] = c
        return tuple(vec)

    mats = []
    for offset in range(-algebra.r, algebra.r + 1):
        mat = algebra.component(offset)
        cols = []
        for t in range(e):
            unit = [0] * e
            unit[t] = 1
            cols.append(coords(mat.apply(lift(unit))))
        mats.append(FpMatrix(p, e, e, tuple(zip(*cols))))
    return AffineAlgebra(p, e, algebra.r, tuple(mats), coords(algebra.constant))


def coset_congruence(algebra: AffineAlgebra, space: Subspace,
                     caps: Caps = DEFAULT_CAPS) -> ca_core.Congruence:
    """The congruence on the truth table whose classes are the cosets of
    an invariant subspace."""
    _check_invariant(algebra, space)
    table = to_table(algebra, caps)
    p, d = algebra.p, algebra.d
    pivots = space.pivots()
    blocks: dict[Vector, list[int]] = {}
    for value in range(table.m):
        vec = list(_decode_vector(value, p, d))
        for w, pivot in zip(space.basis, pivots):
            factor = vec[pivot]
            if factor:
                for t in range(d):
                    vec[t] = (vec[t] - factor * w[t]) % p
        blocks.setdefault(tuple(vec), []).append(value)
    return ca_core.Congruence.from_blocks(table, blocks.values())


@dataclass(frozen=True)
class AffineClassification:
    """Shape summary of an affine rule: which components permute the
    state space, the outermost effective positions, and whether the rule
    is additive after a change of origin."""

    p: int
    d: int
    r: int
    component_bijective: tuple[bool, ...]
    bijective_condition: bool
    left_witness: int | None
    right_witness: int | None
    in_witness_class: bool
    additive: bool
    idempotent: Vector | None
    canonical_additive: bool


def classify_affine(algebra: AffineAlgebra) -> AffineClassification:
    if algebra.d == 0:
        return AffineClassification(algebra.p, 0, algebra.r, (), False, None, None,
                                    False, True, (), False)
    bijective = tuple(mat.is_invertible() for mat in algebra.components)
    effective = [idx for idx, mat in enumerate(algebra.components) if not mat.is_zero()]
    left = right = None
    if effective:
        if bijective[effective[0]]:
            left = effective[0] - algebra.r
        if bijective[effective[-1]]:
            right = effective[-1] - algebra.r
    idempotent = algebra.idempotent()
    return AffineClassification(
        p=algebra.p,
        d=algebra.d,
        r=algebra.r,
        component_bijective=bijective,
        bijective_condition=sum(bijective) >= 2,
        left_witness=left,
        right_witness=right,
        in_witness_class=left is not None and right is not None and left < right,
        additive=idempotent is not None,
        idempotent=idempotent,
        canonical_additive=algebra.d == 1 and algebra.is_additive(),
    )


def affine_isomorphism(a: AffineAlgebra, b: AffineAlgebra,
                       caps: Caps = DEFAULT_CAPS) -> Vector | None:
    """State bijection of the form x -> Tx + u conjugating a onto b.

    The matrices T commuting a's components onto b's form a linear
    space, found by solving the Sylvester-type system; each invertible
    member is then paired with a translation that matches the constants.
    Only affine-shaped bijections are searched.
    """
    if (a.p, a.d, a.r) != (b.p, b.d, b.r):
        return None
    if a.d == 0:
        return (0,)
    p, d = a.p, a.d
    unknowns = d * d
    rows = []
    for mat_a, mat_b in zip(a.components, b.components):
        # T M - N T = 0, entry (s, t): sum_k T[s,k] M[k,t] - N[s,k] T[k,t]
        for s in range(d):
            for t in range(d):
                row = [0] * unknowns
                for k in range(d):
                    row[s * d + k] = (row[s * d + k] + mat_a.entries[k][t]) % p
                    row[k * d + t] = (row[k * d + t] - mat_b.entries[s][k]) % p
                rows.append(tuple(row))
    basis = nullspace_basis(FpMatrix(p, len(rows), unknowns, tuple(rows)))
    require(p ** len(basis) <= 1_000_000,
            f"conjugacy space too large: p^{len(basis)} candidates")
    shift = b.component_sum().add(FpMatrix.identity(p, d).scale(-1))
    for coeffs in itertools.product(range(p), repeat=len(basis)):
        if not any(coeffs):
            continue
        flat = [0] * unknowns
        for c, vec in zip(coeffs, basis):
            if c:
                for idx in range(unknowns):
                    flat[idx] = (flat[idx] + c * vec[idx]) % p
        matrix = FpMatrix(p, d, d, tuple(
            tuple(flat[s * d + t] for t in range(d)) for s in range(d)))
        if not matrix.is_invertible():
            continue
        rhs = matrix.apply(a.constant)
        rhs = tuple((x - y) % p for x, y in zip(rhs, b.constant))
        translation = solve(shift, rhs)
        if translation is None:
            continue
        bijection = []
        for value in range(a.m):
            vec = _decode_vector(value, p, d)
            image = matrix.apply(vec)
            bijection.append(_encode_vector(
                [(x + u) % p for x, u in zip(image, translation)], p))
        return tuple(bijection)
    return None
