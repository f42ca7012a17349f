"""Truth-table cellular automaton local algebras and their operators.

A local algebra is a finite state set {0..m-1} together with a local
rule of arity 2r+1 stored as an explicit table.  The table index of a
neighborhood (x_{-r}, ..., x_r) is the base-m value with the leftmost
cell most significant, so for m=2, r=1 the table coincides with the
Wolfram numbering of elementary CAs (bit v of the rule number is the
output for the neighborhood worth v = 4*x_{-1} + 2*x_0 + x_1).

Block encodings follow the same convention: a block (s_1, ..., s_n) of
states is the integer sum(s_t * m^(n-t)), leftmost cell most
significant, and products use mixed radix with the leftmost factor most
significant.  Unpacking a block configuration is therefore plain digit
expansion.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

from .caps import DEFAULT_CAPS, Caps, require

Word = tuple[int, ...]


def encode_word(word: Sequence[int], m: int) -> int:
    value = 0
    for x in word:
        value = value * m + x
    return value


def decode_word(value: int, m: int, length: int) -> Word:
    digits = []
    for _ in range(length):
        digits.append(value % m)
        value //= m
    digits.reverse()
    return tuple(digits)


def unpack(word: Sequence[int], n: int, m: int) -> Word:
    """Expand block-encoded states into base states (the map o_n).

    Each block value below m^n becomes its n base-m digits, leftmost
    digit first, so the output is n times longer than the input.
    """
    if n < 1:
        raise ValueError("block size must be at least 1")
    limit = m ** n
    out: list[int] = []
    for block in word:
        if not 0 <= block < limit:
            raise ValueError(f"block value {block} out of range for m={m}, n={n}")
        out.extend(decode_word(block, m, n))
    return tuple(out)


def pack(word: Sequence[int], n: int, m: int) -> Word:
    """Inverse of unpack: group runs of n cells into block-encoded states."""
    if len(word) % n != 0:
        raise ValueError("word length is not a multiple of the block size")
    return tuple(encode_word(word[i:i + n], m) for i in range(0, len(word), n))


@dataclass(frozen=True)
class LocalAlgebra:
    """A CA local rule of radius r on m states, as an explicit table."""

    m: int
    r: int
    table: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("state count must be at least 1")
        if self.r < 0:
            raise ValueError("radius must be nonnegative")
        expected = self.m ** self.arity
        if len(self.table) != expected:
            raise ValueError(f"table length {len(self.table)} != m^(2r+1) = {expected}")
        for out in self.table:
            if not 0 <= out < self.m:
                raise ValueError(f"table output {out} out of range")

    @property
    def arity(self) -> int:
        return 2 * self.r + 1

    @staticmethod
    def from_function(m: int, r: int, fn: Callable[..., int]) -> "LocalAlgebra":
        arity = 2 * r + 1
        table = tuple(fn(*nb) % m for nb in itertools.product(range(m), repeat=arity))
        return LocalAlgebra(m, r, table)

    def apply(self, neighborhood: Sequence[int]) -> int:
        m = self.m
        idx = 0
        for x in neighborhood:
            idx = idx * m + x
        return self.table[idx]

    def neighborhoods(self) -> Iterator[Word]:
        return itertools.product(range(self.m), repeat=self.arity)

    def is_singleton(self) -> bool:
        return self.m == 1

    def states(self) -> range:
        return range(self.m)

    def __repr__(self) -> str:
        if self.m <= 10 and len(self.table) <= 32:
            body = "".join(str(x) for x in self.table)
        else:
            body = f"<{len(self.table)} entries>"
        return f"LocalAlgebra(m={self.m}, r={self.r}, table={body})"


def eca(number: int) -> LocalAlgebra:
    """Elementary CA by Wolfram number."""
    if not 0 <= number <= 255:
        raise ValueError("ECA numbers range over 0..255")
    return LocalAlgebra(2, 1, tuple((number >> v) & 1 for v in range(8)))


def wolfram_number(algebra: LocalAlgebra) -> int:
    if algebra.m != 2 or algebra.r != 1:
        raise ValueError("Wolfram numbering applies to 2-state radius-1 rules")
    return sum(bit << v for v, bit in enumerate(algebra.table))


def singleton(r: int) -> LocalAlgebra:
    """The one-state algebra SING_r, minimum of the simulation preorder."""
    return LocalAlgebra(1, r, (0,))


def unravel(algebra: LocalAlgebra, word: Sequence[int], iterations: int = 1) -> Word:
    """Apply the local rule at every window, `iterations` times.

    Each pass shortens the word by 2r, so the input must have at least
    2*iterations*r + 1 cells.
    """
    if iterations < 0:
        raise ValueError("iteration count must be nonnegative")
    m, r = algebra.m, algebra.r
    word = tuple(word)
    for x in word:
        if not 0 <= x < m:
            raise ValueError(f"state {x} out of range for m={m}")
    if len(word) < 2 * iterations * r + 1:
        raise ValueError(
            f"word of length {len(word)} too short for {iterations} passes of radius {r}")
    table = algebra.table
    arity = algebra.arity
    window = m ** (arity - 1)
    current = list(word)
    for _ in range(iterations):
        out = []
        idx = 0
        for x in current[:arity - 1]:
            idx = idx * m + x
        for x in current[arity - 1:]:
            idx = (idx % window) * m + x
            out.append(table[idx])
        current = out
    return tuple(current)


def _pass_lut(algebra: LocalAlgebra, length: int) -> list[int]:
    """Table of one unravelling pass on all m^length words, word-encoded."""
    m, r = algebra.m, algebra.r
    arity = algebra.arity
    table = algebra.table
    size = m ** length
    window = m ** (arity - 1)
    out_positions = length - 2 * r
    lut = [0] * size
    digits = [0] * length
    for value in range(size):
        if value:
            k = length - 1
            while digits[k] == m - 1:
                digits[k] = 0
                k -= 1
            digits[k] += 1
        idx = 0
        for x in digits[:arity - 1]:
            idx = idx * m + x
        acc = 0
        for pos in range(out_positions):
            idx = (idx % window) * m + digits[arity - 1 + pos]
            acc = acc * m + table[idx]
        lut[value] = acc
    return lut


def iterative_power(algebra: LocalAlgebra, n: int, caps: Caps = DEFAULT_CAPS) -> LocalAlgebra:
    """The grouped algebra on blocks of n states realizing n steps.

    The new rule keeps radius r; a neighborhood of 2r+1 blocks is the
    word of its n*(2r+1) cells, and the output block is the middle n
    cells after n unravelling passes.
    """
    if n < 1:
        raise ValueError("iterative power exponent must be at least 1")
    if n == 1:
        return algebra
    m, r = algebra.m, algebra.r
    arity = algebra.arity
    entries = m ** (n * arity)
    require(entries <= caps.table_cap,
            f"iterative power table needs {entries} entries, cap {caps.table_cap}")
    if r == 0:
        # radius 0: blockwise n-fold self-composition of the unary map
        lut = list(range(m))
        for _ in range(n):
            lut = [algebra.table[x] for x in lut]
        table = []
        block_count = m ** n
        for block in range(block_count):
            table.append(encode_word([lut[x] for x in decode_word(block, m, n)], m))
        return LocalAlgebra(block_count, r, tuple(table))
    # chain of single-pass lookup tables on ever shorter words; the full
    # neighborhood of blocks is already the base-m encoding of its cells
    length = n * arity
    luts = []
    while length > n:
        luts.append(_pass_lut(algebra, length))
        length -= 2 * r
    table = [0] * entries
    for value in range(entries):
        w = value
        for lut in luts:
            w = lut[w]
        table[value] = w
    return LocalAlgebra(m ** n, r, tuple(table))


def product(algebras: Sequence[LocalAlgebra], caps: Caps = DEFAULT_CAPS) -> LocalAlgebra:
    """Componentwise rule on mixed-radix-encoded tuples of states."""
    if not algebras:
        raise ValueError("product needs at least one factor")
    r = algebras[0].r
    for a in algebras:
        if a.r != r:
            raise ValueError("product factors must share one radius")
    sizes = [a.m for a in algebras]
    m_total = 1
    for s in sizes:
        m_total *= s
    arity = 2 * r + 1
    require(m_total ** arity <= caps.table_cap,
            f"product table needs {m_total ** arity} entries, cap {caps.table_cap}")
    # decode lookup: combined state -> per-factor states
    decode: list[tuple[int, ...]] = []
    for value in range(m_total):
        parts = []
        v = value
        for s in reversed(sizes):
            parts.append(v % s)
            v //= s
        parts.reverse()
        decode.append(tuple(parts))
    tables = [a.table for a in algebras]
    k = len(algebras)
    table = []
    for nb in itertools.product(range(m_total), repeat=arity):
        parts = [decode[x] for x in nb]
        value = 0
        for t in range(k):
            mt = sizes[t]
            idx = 0
            for cell in parts:
                idx = idx * mt + cell[t]
            value = value * mt + tables[t][idx]
        table.append(value)
    return LocalAlgebra(m_total, r, tuple(table))


@dataclass(frozen=True)
class SpaceTimeDiagram:
    """Rows of a finite evolution, padded to a common width.

    In background mode row t is exact on the light cone of the initial
    word and equals background[t] outside it; origin is the cell index
    of the leftmost column.  In cyclic mode all rows have the ring
    length and origin is 0.
    """

    m: int
    rows: tuple[Word, ...]
    origin: int
    background: Word
    mode: str

    def __post_init__(self) -> None:
        if self.mode not in ("background", "cyclic"):
            raise ValueError("mode must be 'background' or 'cyclic'")
        if len(self.background) != len(self.rows):
            raise ValueError("one background state per row is required")
        width = len(self.rows[0]) if self.rows else 0
        for row in self.rows:
            if len(row) != width:
                raise ValueError("rows must have equal length")
            for x in row:
                if not 0 <= x < self.m:
                    raise ValueError("row entry out of range")

    @property
    def steps(self) -> int:
        return len(self.rows) - 1

    @property
    def width(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def window(self, t: int, r: int) -> Word:
        """Row t restricted to the light cone of the initial word."""
        if self.mode == "cyclic":
            return self.rows[t]
        pad = (self.steps - t) * r
        return self.rows[t][pad:self.width - pad] if pad else self.rows[t]

    def cell(self, t: int, i: int) -> int:
        """State of cell i at time t; outside the stored window the
        background value is reported (cyclic rows wrap around)."""
        if self.mode == "cyclic":
            return self.rows[t][(i - self.origin) % self.width]
        offset = i - self.origin
        if 0 <= offset < self.width:
            return self.rows[t][offset]
        return self.background[t]


def evolve(algebra: LocalAlgebra, word: Sequence[int], background: int = 0,
           steps: int = 0, mode: str = "background") -> SpaceTimeDiagram:
    """Run the global rule for `steps` steps from a finite word.

    Background mode embeds the word at cells [0, len-1] in a uniform
    background; the tracked window widens by r per side each step and
    the background itself evolves by b <- f(b, ..., b), which matters
    for rules without a quiescent state.  Cyclic mode keeps the word
    length fixed and wraps indices around.
    """
    m, r = algebra.m, algebra.r
    word = tuple(word)
    if not word:
        raise ValueError("initial word must be nonempty")
    for x in word:
        if not 0 <= x < m:
            raise ValueError(f"state {x} out of range for m={m}")
    if not 0 <= background < m:
        raise ValueError(f"background state {background} out of range")
    if steps < 0:
        raise ValueError("step count must be nonnegative")
    diagonal = [algebra.apply((s,) * algebra.arity) for s in range(m)]
    backgrounds = [background]
    for _ in range(steps):
        backgrounds.append(diagonal[backgrounds[-1]])
    if mode == "cyclic":
        rows = [word]
        n = len(word)
        for _ in range(steps):
            prev = rows[-1]
            rows.append(tuple(
                algebra.apply([prev[(i + k) % n] for k in range(-r, r + 1)])
                for i in range(n)))
        return SpaceTimeDiagram(m, tuple(rows), 0, tuple(backgrounds), "cyclic")
    if mode != "background":
        raise ValueError("mode must be 'background' or 'cyclic'")
    windows = [word]
    for t in range(steps):
        prev, b = windows[-1], backgrounds[t]
        padded = (b,) * (2 * r) + prev + (b,) * (2 * r)
        windows.append(unravel(algebra, padded, 1))
    full_width = len(word) + 2 * steps * r
    rows = []
    for t, win in enumerate(windows):
        pad = (steps - t) * r
        rows.append((backgrounds[t],) * pad + win + (backgrounds[t],) * pad)
        assert len(rows[-1]) == full_width
    return SpaceTimeDiagram(m, tuple(rows), -steps * r, tuple(backgrounds), "background")


@dataclass(frozen=True)
class Congruence:
    """A rule-compatible partition of the state set, canonically labeled:
    blocks sorted by least element, elements ascending within a block."""

    algebra: LocalAlgebra
    blocks: tuple[Word, ...]

    def __post_init__(self) -> None:
        seen = sorted(x for block in self.blocks for x in block)
        if seen != list(range(self.algebra.m)):
            raise ValueError("blocks do not partition the state set")
        for block in self.blocks:
            if list(block) != sorted(block):
                raise ValueError("block elements must be ascending")
        leads = [block[0] for block in self.blocks]
        if leads != sorted(leads):
            raise ValueError("blocks must be sorted by least element")
        label = self.class_labels()
        table = self.algebra.table
        m, arity = self.algebra.m, self.algebra.arity
        # compatibility: substituting a related state in one coordinate
        # must keep outputs related; checked exhaustively
        for block in self.blocks:
            if len(block) == 1:
                continue
            rep = block[0]
            for other in block[1:]:
                for pos in range(arity):
                    for ctx in itertools.product(range(m), repeat=arity - 1):
                        nb1 = ctx[:pos] + (rep,) + ctx[pos:]
                        nb2 = ctx[:pos] + (other,) + ctx[pos:]
                        idx1 = idx2 = 0
                        for a, b in zip(nb1, nb2):
                            idx1 = idx1 * m + a
                            idx2 = idx2 * m + b
                        if label[table[idx1]] != label[table[idx2]]:
                            raise ValueError(
                                f"partition is not compatible: states {rep},{other} at "
                                f"position {pos - self.algebra.r} with context {ctx} map to "
                                f"unrelated outputs")

    @staticmethod
    def from_blocks(algebra: LocalAlgebra, blocks: Iterable[Iterable[int]]) -> "Congruence":
        return Congruence(algebra, canonical_partition(blocks))

    def class_labels(self) -> list[int]:
        label = [0] * self.algebra.m
        for k, block in enumerate(self.blocks):
            for x in block:
                label[x] = k
        return label

    def is_discrete(self) -> bool:
        return len(self.blocks) == self.algebra.m

    def is_full(self) -> bool:
        return len(self.blocks) == 1

    def __str__(self) -> str:
        return "|".join(",".join(str(x) for x in block) for block in self.blocks)


def canonical_partition(blocks: Iterable[Iterable[int]]) -> tuple[Word, ...]:
    normalized = [tuple(sorted(block)) for block in blocks]
    normalized.sort(key=lambda b: b[0])
    return tuple(normalized)


def _partition_of_labels(labels: Sequence[int]) -> tuple[Word, ...]:
    groups: dict[int, list[int]] = {}
    for x, lab in enumerate(labels):
        groups.setdefault(lab, []).append(x)
    return canonical_partition(groups.values())


class _UnionFind:
    __slots__ = ("parent",)

    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def labels(self) -> list[int]:
        return [self.find(x) for x in range(len(self.parent))]


def _principal_congruence(algebra: LocalAlgebra, a: int, b: int) -> tuple[Word, ...]:
    """Partition of the smallest congruence identifying a and b, by
    union-find propagation of one-coordinate substitutions."""
    m, arity = algebra.m, algebra.arity
    table = algebra.table
    uf = _UnionFind(m)
    contexts = list(itertools.product(range(m), repeat=arity - 1))
    queue = [(a, b)]
    while queue:
        x, y = queue.pop()
        if not uf.union(x, y):
            continue
        for pos in range(arity):
            for ctx in contexts:
                idx1 = idx2 = 0
                for k in range(arity):
                    if k == pos:
                        idx1 = idx1 * m + x
                        idx2 = idx2 * m + y
                    else:
                        c = ctx[k if k < pos else k - 1]
                        idx1 = idx1 * m + c
                        idx2 = idx2 * m + c
                u, v = table[idx1], table[idx2]
                if uf.find(u) != uf.find(v):
                    queue.append((u, v))
    return _partition_of_labels(uf.labels())


def _join_partitions(p1: tuple[Word, ...], p2: tuple[Word, ...], m: int) -> tuple[Word, ...]:
    uf = _UnionFind(m)
    for part in (p1, p2):
        for block in part:
            first = block[0]
            for x in block[1:]:
                uf.union(first, x)
    return _partition_of_labels(uf.labels())


def enumerate_congruences(algebra: LocalAlgebra, caps: Caps = DEFAULT_CAPS) -> list[Congruence]:
    """All congruences, as the join-closure of the principal congruences.

    Every congruence is the join of the principal congruences of its
    related pairs, and the join of congruences (transitive closure of
    the union) is again a congruence, so this enumeration is complete.
    Ordered finest to coarsest (block count descending, then blocks).
    """
    m = algebra.m
    require(m <= caps.congruence_cap,
            f"congruence enumeration needs m <= {caps.congruence_cap}, got {m}")
    discrete = tuple((x,) for x in range(m))
    found: dict[tuple, tuple[Word, ...]] = {discrete: discrete}
    principals = []
    for a in range(m):
        for b in range(a + 1, m):
            part = _principal_congruence(algebra, a, b)
            if part not in found:
                found[part] = part
                principals.append(part)
    pending = list(principals)
    while pending:
        require(len(found) <= caps.lattice_cap,
                f"congruence lattice exceeds {caps.lattice_cap} members")
        current = pending.pop()
        for other in list(found.values()):
            joined = _join_partitions(current, other, m)
            if joined not in found:
                found[joined] = joined
                pending.append(joined)
    ordered = sorted(found.values(), key=lambda part: (-len(part), part))
    return [Congruence(algebra, part) for part in ordered]


def quotient(algebra: LocalAlgebra, congruence: Congruence) -> LocalAlgebra:
    """Quotient algebra on the blocks, computed on representatives."""
    if congruence.algebra is not algebra and congruence.algebra != algebra:
        raise ValueError("congruence belongs to a different algebra")
    label = congruence.class_labels()
    reps = [block[0] for block in congruence.blocks]
    k = len(reps)
    table = tuple(
        label[algebra.apply([reps[x] for x in nb])]
        for nb in itertools.product(range(k), repeat=algebra.arity))
    return LocalAlgebra(k, algebra.r, table)


def _subalgebra_closure(algebra: LocalAlgebra, seed: Iterable[int]) -> tuple[int, ...]:
    """Smallest carrier containing `seed` and closed under the rule."""
    m, arity = algebra.m, algebra.arity
    table = algebra.table
    members = sorted(set(seed))
    in_set = [False] * m
    for x in members:
        in_set[x] = True
    scanned = 0
    while scanned < len(members):
        count = len(members)
        for nb in itertools.product(range(count), repeat=arity):
            if max(nb) < scanned:
                continue  # all coordinates already scanned together
            idx = 0
            for i in nb:
                idx = idx * m + members[i]
            out = table[idx]
            if not in_set[out]:
                in_set[out] = True
                members.append(out)
        scanned = count
    return tuple(sorted(members))


def enumerate_subalgebras(algebra: LocalAlgebra, caps: Caps = DEFAULT_CAPS) -> list[Word]:
    """All nonempty carriers closed under the rule, by breadth-first
    extension of closed sets; ordered by size then lexicographically.

    Every subalgebra is reachable by repeatedly adjoining one of its
    states to a smaller closed subset, so the search is complete.
    """
    m = algebra.m
    require(m <= caps.subalgebra_cap,
            f"subalgebra enumeration needs m <= {caps.subalgebra_cap}, got {m}")
    closed: set[Word] = set()
    frontier: list[Word] = []
    for s in range(m):
        carrier = _subalgebra_closure(algebra, [s])
        if carrier not in closed:
            closed.add(carrier)
            frontier.append(carrier)
    while frontier:
        require(len(closed) <= caps.lattice_cap,
                f"subalgebra lattice exceeds {caps.lattice_cap} members")
        carrier = frontier.pop()
        base = set(carrier)
        for s in range(m):
            if s in base:
                continue
            grown = _subalgebra_closure(algebra, carrier + (s,))
            if grown not in closed:
                closed.add(grown)
                frontier.append(grown)
    return sorted(closed, key=lambda c: (len(c), c))


def restrict(algebra: LocalAlgebra, carrier: Sequence[int]) -> LocalAlgebra:
    """Subalgebra on `carrier`, relabeled to 0..|carrier|-1 in carrier order."""
    carrier = tuple(sorted(carrier))
    index = {s: i for i, s in enumerate(carrier)}
    k = len(carrier)
    table = []
    for nb in itertools.product(carrier, repeat=algebra.arity):
        out = algebra.apply(nb)
        if out not in index:
            raise ValueError(f"carrier {carrier} is not closed: f{nb} = {out}")
        table.append(index[out])
    return LocalAlgebra(k, algebra.r, tuple(table))


def idempotents(algebra: LocalAlgebra) -> list[int]:
    """States s with f(s, ..., s) = s."""
    return [s for s in range(algebra.m)
            if algebra.apply((s,) * algebra.arity) == s]


def _diagonal_signature(algebra: LocalAlgebra) -> list[tuple]:
    """Relabeling-invariant unary fingerprint per state, used to prune
    isomorphism search: orbit shape under s -> f(s,...,s), in-degree of
    the diagonal map, and how often the state occurs as an output."""
    m = algebra.m
    diag = [algebra.apply((s,) * algebra.arity) for s in range(m)]
    indeg = [0] * m
    for t in diag:
        indeg[t] += 1
    occurrences = [0] * m
    for out in algebra.table:
        occurrences[out] += 1
    signatures = []
    for s in range(m):
        seen = {s: 0}
        x = s
        while True:
            x = diag[x]
            if x in seen:
                tail, cycle = seen[x], len(seen) - seen[x]
                break
            seen[x] = len(seen)
        signatures.append((tail, cycle, indeg[s], occurrences[s]))
    return signatures


def algebra_fingerprint(algebra: LocalAlgebra) -> tuple:
    """Cheap isomorphism invariant: size, radius and sorted state signatures."""
    return (algebra.m, algebra.r, tuple(sorted(_diagonal_signature(algebra))))


def are_isomorphic(a: LocalAlgebra, b: LocalAlgebra,
                   caps: Caps = DEFAULT_CAPS) -> Word | None:
    """Search for a state bijection phi with phi(f(x)) = g(phi(x)).

    Backtracking over images in ascending order with signature pruning
    and forced-assignment propagation; the first witness found is the
    lexicographically least one.  Returns None when no bijection exists.
    """
    if a.r != b.r:
        return None
    if a.m != b.m:
        return None
    m = a.m
    if a.table == b.table:
        return tuple(range(m))
    require(m <= caps.iso_cap, f"isomorphism search needs m <= {caps.iso_cap}, got {m}")
    sig_a = _diagonal_signature(a)
    sig_b = _diagonal_signature(b)
    if sorted(sig_a) != sorted(sig_b):
        return None
    candidates = [[t for t in range(m) if sig_b[t] == sig_a[s]] for s in range(m)]
    arity = a.arity
    table_a, table_b = a.table, b.table
    neighborhoods = list(itertools.product(range(m), repeat=arity))

    def propagate(phi: list[int], used: list[bool]) -> bool:
        """Close the partial map under forced constraints; False on clash."""
        changed = True
        while changed:
            changed = False
            for nb in neighborhoods:
                idx_a = 0
                ok = True
                for x in nb:
                    if phi[x] < 0:
                        ok = False
                        break
                    idx_a = idx_a * m + x
                if not ok:
                    continue
                idx_b = 0
                for x in nb:
                    idx_b = idx_b * m + phi[x]
                out_a, out_b = table_a[idx_a], table_b[idx_b]
                img = phi[out_a]
                if img >= 0:
                    if img != out_b:
                        return False
                elif used[out_b] or sig_b[out_b] != sig_a[out_a]:
                    return False
                else:
                    phi[out_a] = out_b
                    used[out_b] = True
                    changed = True
        return True

    def search(phi: list[int], used: list[bool]) -> Word | None:
        s = next((x for x in range(m) if phi[x] < 0), None)
        if s is None:
            return tuple(phi)
        for t in candidates[s]:
            if used[t]:
                continue
            phi2 = phi[:]
            used2 = used[:]
            phi2[s] = t
            used2[t] = True
            if propagate(phi2, used2):
                result = search(phi2, used2)
                if result is not None:
                    return result
        return None

    return search([-1] * m, [False] * m)


def permutivity(algebra: LocalAlgebra) -> tuple[int | None, int | None]:
    """Outermost-essential bijectivity witnesses (left, right).

    The left witness is the least position i (as an offset in -r..r)
    such that the rule ignores every position left of i and, for each
    fixed assignment of the remaining positions, x_i -> f(...) permutes
    the states.  The right witness is symmetric.  A position that is
    outermost-essential but not bijective yields None on that side.
    """
    m, r, arity = algebra.m, algebra.r, algebra.arity

    def essential(pos: int) -> bool:
        for ctx in itertools.product(range(m), repeat=arity - 1):
            outputs = set()
            for x in range(m):
                nb = ctx[:pos] + (x,) + ctx[pos:]
                outputs.add(algebra.apply(nb))
                if len(outputs) > 1:
                    return True
        return False

    def bijective(pos: int) -> bool:
        for ctx in itertools.product(range(m), repeat=arity - 1):
            outputs = {algebra.apply(ctx[:pos] + (x,) + ctx[pos:]) for x in range(m)}
            if len(outputs) != m:
                return False
        return True

    essentials = [pos for pos in range(arity) if essential(pos)]
    if not essentials:
        return (None, None)
    left_pos, right_pos = essentials[0], essentials[-1]
    left = left_pos - r if bijective(left_pos) else None
    right = right_pos - r if bijective(right_pos) else None
    return (left, right)


@dataclass(frozen=True)
class TranslationCheck:
    """Outcome of a commutation check between two global rules."""

    ok: bool
    counterexample: Word | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_translation(a: LocalAlgebra, b: LocalAlgebra, state_map: dict[int, int] | Sequence[int],
                      kind: str, width: int = 7, steps: int = 1,
                      sample: int = 512, seed: int = 0) -> TranslationCheck:
    """Verify that the cellwise extension of `state_map` commutes with
    the global rules on all width-bounded windows.

    kind "embed": map iota from a-states into b-states, checked as
    iota(F(w)) = G(iota(w)) on words over a.  kind "project": map pi
    from b-states onto a-states, checked as F(pi(w)) = pi(G(w)) on
    words over b.  Windows are unravelled `steps` times so only cells
    unaffected by the boundary are compared.  All words are scanned
    when there are few enough, otherwise a seeded random sample.
    """
    if a.r != b.r:
        raise ValueError("translation checks need equal radii")
    if kind not in ("embed", "project"):
        raise ValueError("kind must be 'embed' or 'project'")
    r = a.r
    if width < 2 * r * steps + 1:
        raise ValueError("window too narrow for the requested step count")
    if kind == "embed":
        source, target = a, b
    else:
        source, target = b, a
    mapping = dict(enumerate(state_map)) if not isinstance(state_map, dict) else dict(state_map)
    for s in range(source.m):
        if s not in mapping:
            raise ValueError(f"state map is not total: missing {s}")
        if not 0 <= mapping[s] < target.m:
            raise ValueError(f"state map image {mapping[s]} out of range")
    if kind == "embed" and len(set(mapping.values())) != source.m:
        raise ValueError("embedding state maps must be injective")

    def commutes(word: Word) -> bool:
        translated = tuple(mapping[x] for x in word)
        if kind == "embed":
            lhs = tuple(mapping[x] for x in unravel(a, word, steps))
            rhs = unravel(b, translated, steps)
        else:
            lhs = unravel(a, translated, steps)
            rhs = tuple(mapping[x] for x in unravel(b, word, steps))
        return lhs == rhs

    total = source.m ** width
    if total <= 65536:
        words: Iterable[Word] = itertools.product(range(source.m), repeat=width)
    else:
        rng = random.Random(seed)
        words = (tuple(rng.randrange(source.m) for _ in range(width)) for _ in range(sample))
    for word in words:
        if not commutes(word):
            return TranslationCheck(False, word)
    return TranslationCheck(True, None)
