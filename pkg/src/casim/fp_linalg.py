"""Exact linear algebra over prime fields.

Matrices carry their modulus, entries are plain ints reduced to 0..p-1,
and every value is immutable, so equality is structural and instances
can be shared freely between threads.  Subspaces are kept in reduced
row-echelon form, which makes them canonical: two subspaces are equal
exactly when their fields compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .caps import DEFAULT_CAPS, Caps, require

Vector = tuple[int, ...]


def is_prime(p: int) -> bool:
    """Trial-division primality test; the moduli used here are tiny."""
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def _check_prime(p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"modulus {p} is not prime")


def inverse_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse mod {p}")
    return pow(a, p - 2, p)


@dataclass(frozen=True)
class FpMatrix:
    """Dense matrix over F_p with row-major tuple storage."""

    p: int
    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        _check_prime(self.p)
        if self.rows <= 0 or self.cols <= 0:
            raise ValueError("matrix dimensions must be positive")
        if len(self.entries) != self.rows:
            raise ValueError("row count does not match entries")
        for row in self.entries:
            if len(row) != self.cols:
                raise ValueError("column count does not match entries")
            for x in row:
                if not 0 <= x < self.p:
                    raise ValueError(f"entry {x} out of range mod {self.p}")

    @staticmethod
    def from_rows(p: int, rows: Sequence[Sequence[int]]) -> "FpMatrix":
        entries = tuple(tuple(x % p for x in row) for row in rows)
        return FpMatrix(p, len(entries), len(entries[0]) if entries else 0, entries)

    @staticmethod
    def identity(p: int, n: int) -> "FpMatrix":
        return FpMatrix.from_rows(p, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @staticmethod
    def zero(p: int, rows: int, cols: int | None = None) -> "FpMatrix":
        cols = rows if cols is None else cols
        return FpMatrix.from_rows(p, [[0] * cols for _ in range(rows)])

    @staticmethod
    def shift(p: int, n: int) -> "FpMatrix":
        """The nilpotent single-chain matrix J with ones just below the
        diagonal, so J maps e_k to e_{k+1} and kills e_n."""
        return FpMatrix.from_rows(p, [[1 if i == j + 1 else 0 for j in range(n)] for i in range(n)])

    def transpose(self) -> "FpMatrix":
        return FpMatrix(self.p, self.cols, self.rows,
                        tuple(zip(*self.entries)) if self.entries else ())

    def add(self, other: "FpMatrix") -> "FpMatrix":
        self._compatible(other, same_shape=True)
        p = self.p
        return FpMatrix(p, self.rows, self.cols, tuple(
            tuple((a + b) % p for a, b in zip(ra, rb))
            for ra, rb in zip(self.entries, other.entries)))

    def scale(self, k: int) -> "FpMatrix":
        p = self.p
        k %= p
        return FpMatrix(p, self.rows, self.cols,
                        tuple(tuple((k * x) % p for x in row) for row in self.entries))

    def mul(self, other: "FpMatrix") -> "FpMatrix":
        self._compatible(other)
        if self.cols != other.rows:
            raise ValueError("inner dimensions do not match")
        p = self.p
        cols_b = list(zip(*other.entries))
        data = tuple(
            tuple(sum(a * b for a, b in zip(row, col)) % p for col in cols_b)
            for row in self.entries)
        return FpMatrix(p, self.rows, other.cols, data)

    def __matmul__(self, other: "FpMatrix") -> "FpMatrix":
        return self.mul(other)

    def power(self, k: int) -> "FpMatrix":
        if self.rows != self.cols:
            raise ValueError("only square matrices have powers")
        if k < 0:
            raise ValueError("negative matrix powers are not supported")
        result = FpMatrix.identity(self.p, self.rows)
        base = self
        while k:
            if k & 1:
                result = result.mul(base)
            base = base.mul(base)
            k >>= 1
        return result

    def apply(self, vec: Sequence[int]) -> Vector:
        if len(vec) != self.cols:
            raise ValueError("vector length does not match matrix columns")
        p = self.p
        return tuple(sum(a * x for a, x in zip(row, vec)) % p for row in self.entries)

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.entries for x in row)

    def rank(self) -> int:
        return rref(self)[1]

    def is_invertible(self) -> bool:
        return self.rows == self.cols and self.rank() == self.rows

    def _compatible(self, other: "FpMatrix", same_shape: bool = False) -> None:
        if self.p != other.p:
            raise ValueError(f"modulus mismatch: {self.p} vs {other.p}")
        if same_shape and (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("matrix shapes do not match")

    def __str__(self) -> str:
        return "\n".join(" ".join(str(x) for x in row) for row in self.entries)


def rref(matrix: FpMatrix) -> tuple[FpMatrix, int]:
    """Reduced row-echelon form and rank.  Total and deterministic; the
    row space of the input is preserved."""
    p = matrix.p
    rows = [list(row) for row in matrix.entries]
    n_rows, n_cols = matrix.rows, matrix.cols
    pivot_row = 0
    for col in range(n_cols):
        pivot = next((r for r in range(pivot_row, n_rows) if rows[r][col] % p != 0), None)
        if pivot is None:
            continue
        rows[pivot_row], rows[pivot] = rows[pivot], rows[pivot_row]
        inv = inverse_mod(rows[pivot_row][col], p)
        rows[pivot_row] = [(x * inv) % p for x in rows[pivot_row]]
        for r in range(n_rows):
            if r != pivot_row and rows[r][col] % p != 0:
                factor = rows[r][col] % p
                rows[r] = [(a - factor * b) % p for a, b in zip(rows[r], rows[pivot_row])]
        pivot_row += 1
        if pivot_row == n_rows:
            break
    reduced = FpMatrix(p, n_rows, n_cols, tuple(tuple(row) for row in rows))
    return reduced, pivot_row


@dataclass(frozen=True)
class Subspace:
    """Subspace of F_p^n, stored as the nonzero rows of its RREF basis.

    The representation is canonical, so dataclass equality coincides
    with equality of subspaces.
    """

    p: int
    ambient: int
    basis: tuple[Vector, ...]

    def __post_init__(self) -> None:
        _check_prime(self.p)
        if self.ambient < 0:
            raise ValueError("ambient dimension must be nonnegative")
        last_pivot = -1
        for row in self.basis:
            if len(row) != self.ambient:
                raise ValueError("basis vector length does not match ambient dimension")
            pivot = next((i for i, x in enumerate(row) if x % self.p != 0), None)
            if pivot is None:
                raise ValueError("basis contains a zero vector")
            if pivot <= last_pivot:
                raise ValueError("basis pivots must be strictly increasing")
            if row[pivot] != 1:
                raise ValueError("basis rows must be pivot-normalized")
            last_pivot = pivot
        # each pivot must be the only nonzero entry in its column
        pivots = [next(i for i, x in enumerate(row) if x) for row in self.basis]
        for k, row in enumerate(self.basis):
            for other_k, pivot in enumerate(pivots):
                if other_k != k and row[pivot] != 0:
                    raise ValueError("basis is not fully reduced")

    @staticmethod
    def span(p: int, ambient: int, vectors: Iterable[Sequence[int]]) -> "Subspace":
        vecs = [tuple(x % p for x in v) for v in vectors]
        for v in vecs:
            if len(v) != ambient:
                raise ValueError("seed vector length does not match ambient dimension")
        if not vecs:
            return Subspace(p, ambient, ())
        reduced, rank = rref(FpMatrix(p, len(vecs), ambient, tuple(vecs)))
        return Subspace(p, ambient, reduced.entries[:rank])

    @staticmethod
    def zero(p: int, ambient: int) -> "Subspace":
        return Subspace(p, ambient, ())

    @staticmethod
    def full(p: int, ambient: int) -> "Subspace":
        return Subspace(p, ambient, FpMatrix.identity(p, ambient).entries if ambient else ())

    @property
    def dim(self) -> int:
        return len(self.basis)

    def pivots(self) -> tuple[int, ...]:
        return tuple(next(i for i, x in enumerate(row) if x) for row in self.basis)

    def is_zero(self) -> bool:
        return not self.basis

    def is_full(self) -> bool:
        return self.dim == self.ambient

    def is_trivial(self) -> bool:
        return self.is_zero() or self.is_full()

    def contains(self, vec: Sequence[int]) -> bool:
        p = self.p
        residue = [x % p for x in vec]
        for row, pivot in zip(self.basis, self.pivots()):
            factor = residue[pivot]
            if factor:
                for i, b in enumerate(row):
                    residue[i] = (residue[i] - factor * b) % p
        return all(x == 0 for x in residue)

    def contains_space(self, other: "Subspace") -> bool:
        return all(self.contains(v) for v in other.basis)

    def join(self, other: "Subspace") -> "Subspace":
        if (self.p, self.ambient) != (other.p, other.ambient):
            raise ValueError("subspaces live in different ambient spaces")
        return Subspace.span(self.p, self.ambient, self.basis + other.basis)

    def coordinates(self, vec: Sequence[int]) -> Vector:
        """Coefficients of `vec` in the RREF basis.  With a reduced basis
        these are just the entries at the pivot positions."""
        if not self.contains(vec):
            raise ValueError(f"vector {tuple(vec)} is not in the subspace")
        p = self.p
        return tuple(vec[pivot] % p for pivot in self.pivots())

    def vectors(self) -> Iterator[Vector]:
        """All p^dim member vectors, in lexicographic coefficient order."""
        p, ambient = self.p, self.ambient
        coeffs = [0] * self.dim
        while True:
            vec = [0] * ambient
            for c, row in zip(coeffs, self.basis):
                if c:
                    for i, b in enumerate(row):
                        vec[i] = (vec[i] + c * b) % p
            yield tuple(vec)
            k = self.dim - 1
            while k >= 0 and coeffs[k] == p - 1:
                coeffs[k] = 0
                k -= 1
            if k < 0:
                return
            coeffs[k] += 1

    def sort_key(self) -> tuple:
        return (self.dim, self.basis)

    def __str__(self) -> str:
        if self.is_zero():
            return "{0}"
        return " + ".join("<" + ",".join(str(x) for x in row) + ">" for row in self.basis)


def one_dim_representatives(p: int, n: int) -> Iterator[Vector]:
    """One normalized vector (first nonzero entry 1) per line of F_p^n."""
    for value in range(1, p ** n):
        digits = []
        v = value
        for _ in range(n):
            digits.append(v % p)
            v //= p
        digits.reverse()
        if next(x for x in digits if x) == 1:
            yield tuple(digits)


def _check_maps(maps: Sequence[FpMatrix], n: int, p: int | None) -> int:
    for m in maps:
        if m.rows != n or m.cols != n:
            raise ValueError(f"map dimensions {m.rows}x{m.cols} do not match ambient {n}")
        if p is None:
            p = m.p
        elif m.p != p:
            raise ValueError("maps have mismatched moduli")
    if p is None:
        raise ValueError("cannot infer modulus from an empty map list; pass p explicitly")
    return p


def invariant_closure(seed: Iterable[Sequence[int]], maps: Sequence[FpMatrix],
                      *, p: int | None = None, ambient: int | None = None) -> Subspace:
    """Smallest subspace containing `seed` and invariant under every map.

    Fixpoint iteration: span the seed, push every basis vector through
    every map, re-span, repeat until the dimension stops growing.
    """
    seed = [tuple(v) for v in seed]
    if ambient is None:
        if seed:
            ambient = len(seed[0])
        elif maps:
            ambient = maps[0].rows
        else:
            raise ValueError("cannot infer ambient dimension")
    p = _check_maps(maps, ambient, p) if maps else p
    if p is None:
        raise ValueError("cannot infer modulus; pass p explicitly")
    space = Subspace.span(p, ambient, seed)
    while True:
        images = [m.apply(v) for m in maps for v in space.basis]
        grown = Subspace.span(p, ambient, list(space.basis) + images)
        if grown.dim == space.dim:
            return space
        space = grown


def common_invariant_subspaces(maps: Sequence[FpMatrix], n: int, *, p: int | None = None,
                               caps: Caps = DEFAULT_CAPS) -> list[Subspace]:
    """The full lattice of subspaces of F_p^n invariant under all maps.

    Every invariant subspace is the join of the invariant closures of
    its one-dimensional subspaces, so the lattice is the join-closure of
    those closures, plus the zero space.  Output is ordered by dimension
    and then lexicographically by RREF basis.
    """
    p = _check_maps(maps, n, p)
    reps = (p ** n - 1) // (p - 1)
    require(reps <= caps.onedim_cap,
            f"{reps} one-dimensional subspaces exceed cap {caps.onedim_cap}")
    closures: dict[tuple, Subspace] = {}
    for v in one_dim_representatives(p, n):
        space = invariant_closure([v], maps, p=p, ambient=n)
        closures.setdefault(space.basis, space)
    lattice: dict[tuple, Subspace] = {(): Subspace.zero(p, n)}
    worklist = list(closures.values())
    for space in worklist:
        lattice[space.basis] = space
    pending = list(worklist)
    while pending:
        current = pending.pop()
        for other in list(lattice.values()):
            joined = current.join(other)
            if joined.basis not in lattice:
                lattice[joined.basis] = joined
                pending.append(joined)
    return sorted(lattice.values(), key=Subspace.sort_key)


def is_simple(maps: Sequence[FpMatrix], n: int, *, p: int | None = None) -> bool:
    """True when only the trivial subspaces are invariant under all maps,
    i.e. every nonzero vector generates the full space."""
    p = _check_maps(maps, n, p)
    if n == 0:
        return True
    for v in one_dim_representatives(p, n):
        if not invariant_closure([v], maps, p=p, ambient=n).is_full():
            return False
    return True


def all_subspaces(p: int, n: int, *, caps: Caps = DEFAULT_CAPS) -> list[Subspace]:
    """Every subspace of F_p^n, by join-closure of the one-dimensional
    subspaces.  Exhaustive-oracle helper, intended for p^n <= 81."""
    _check_prime(p)
    require(p ** n <= 729, f"all_subspaces is an oracle for small spaces, got p^n={p ** n}")
    lattice: dict[tuple, Subspace] = {(): Subspace.zero(p, n)}
    lines = [Subspace.span(p, n, [v]) for v in one_dim_representatives(p, n)]
    for line in lines:
        lattice[line.basis] = line
    pending = list(lines)
    while pending:
        current = pending.pop()
        for line in lines:
            joined = current.join(line)
            if joined.basis not in lattice:
                lattice[joined.basis] = joined
                pending.append(joined)
    return sorted(lattice.values(), key=Subspace.sort_key)


def is_invariant(space: Subspace, maps: Sequence[FpMatrix]) -> bool:
    return all(space.contains(m.apply(v)) for m in maps for v in space.basis)


def solve(matrix: FpMatrix, rhs: Sequence[int]) -> Vector | None:
    """One solution of M x = rhs (free variables set to 0), or None."""
    if len(rhs) != matrix.rows:
        raise ValueError("right-hand side length does not match matrix rows")
    p = matrix.p
    augmented = FpMatrix(p, matrix.rows, matrix.cols + 1, tuple(
        row + (b % p,) for row, b in zip(matrix.entries, rhs)))
    reduced, rank = rref(augmented)
    solution = [0] * matrix.cols
    for row in reduced.entries[:rank]:
        pivot = next(i for i, x in enumerate(row) if x)
        if pivot == matrix.cols:
            return None  # 0 = nonzero row: inconsistent
        solution[pivot] = row[matrix.cols]
    return tuple(solution)


def nullspace_basis(matrix: FpMatrix) -> list[Vector]:
    """Basis of the right nullspace {x : M x = 0}."""
    p, n = matrix.p, matrix.cols
    reduced, rank = rref(matrix)
    pivots = [next(i for i, x in enumerate(row) if x) for row in reduced.entries[:rank]]
    pivot_set = set(pivots)
    basis = []
    for free in range(n):
        if free in pivot_set:
            continue
        vec = [0] * n
        vec[free] = 1
        for row, pivot in zip(reduced.entries[:rank], pivots):
            vec[pivot] = (-row[free]) % p
        basis.append(tuple(vec))
    return basis
