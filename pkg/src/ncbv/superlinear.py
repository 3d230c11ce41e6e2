"""Exact Z/2-graded linear algebra.

Bases with parities, sparse multilinear tensors over the rationals, the
Koszul sign calculus that governs every slot permutation, scalar-product
inversion, and the handful of fraction-free matrix routines the rest of
the engine leans on.  No floating point anywhere: coefficients are
``fractions.Fraction`` throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from .errors import ContractionError, SingularPairingError

EVEN = 0
ODD = 1

VECTOR = "vector"
COVECTOR = "covector"

Entry = Tuple[int, ...]
Coeffs = Dict[Entry, Fraction]


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class GradedBasis:
    """An ordered basis of a Z/2-graded vector space.

    ``parities[i]`` is 0 for even, 1 for odd.  The order is canonical and
    fixed: every tensor index below refers to positions in this list.
    """

    names: Tuple[str, ...]
    parities: Tuple[int, ...]

    def __post_init__(self):
        if len(self.names) != len(self.parities):
            raise ValueError("names and parities must have equal length")
        if len(self.names) == 0:
            raise ValueError("basis must have dimension >= 1")
        if len(set(self.names)) != len(self.names):
            raise ValueError("basis names must be unique")
        if any(p not in (EVEN, ODD) for p in self.parities):
            raise ValueError("parities must be 0 or 1")

    @property
    def dimension(self) -> int:
        return len(self.names)

    def parity(self, i: int) -> int:
        return self.parities[i]

    def index(self, name: str) -> int:
        return self.names.index(name)

    @staticmethod
    def from_pairs(pairs: Iterable[Tuple[str, int]]) -> "GradedBasis":
        names, parities = zip(*pairs)
        return GradedBasis(tuple(names), tuple(parities))


@dataclass(frozen=True)
class Slot:
    """One tensor slot: which basis it indexes, vector vs covector, and
    whether the slot carries the parity shift (lives on the shifted copy
    of the space).  The shift changes the parity entering sign bookkeeping
    but never the index range."""

    basis: GradedBasis
    variance: str
    shifted: bool = False

    def __post_init__(self):
        if self.variance not in (VECTOR, COVECTOR):
            raise ValueError("variance must be 'vector' or 'covector'")

    def parity_of(self, index: int) -> int:
        p = self.basis.parities[index]
        return p ^ 1 if self.shifted else p

    def dual(self) -> "Slot":
        other = COVECTOR if self.variance == VECTOR else VECTOR
        return Slot(self.basis, other, self.shifted)


def koszul_sign(perm: Sequence[int], parities: Sequence[int]) -> int:
    """Sign of rearranging graded objects.

    ``perm[i]`` is the target position of the object currently at position
    ``i``.  Every pair of objects that swaps relative order contributes
    (-1)^(parity_i * parity_j).
    """
    n = len(perm)
    if len(parities) != n:
        raise ValueError("permutation and parity list must have equal length")
    if sorted(perm) != list(range(n)):
        raise ValueError("perm is not a bijection on 0..n-1")
    sign = 1
    for i in range(n):
        if not parities[i]:
            continue
        for j in range(i + 1, n):
            if parities[j] and perm[i] > perm[j]:
                sign = -sign
    return sign


class SparseTensor:
    """A sparse multilinear tensor with graded slots and exact entries.

    Entries map index tuples to nonzero Fractions; zeros are never stored.
    """

    __slots__ = ("slots", "entries")

    def __init__(self, slots: Sequence[Slot], entries: Mapping[Entry, Fraction] | None = None):
        self.slots: Tuple[Slot, ...] = tuple(slots)
        self.entries: Coeffs = {}
        if entries:
            for idx, c in entries.items():
                c = _frac(c)
                if c == 0:
                    continue
                idx = tuple(idx)
                if len(idx) != len(self.slots):
                    raise ValueError(f"index {idx} has wrong arity")
                for k, slot in zip(idx, self.slots):
                    if not 0 <= k < slot.basis.dimension:
                        raise ValueError(f"index {idx} out of range")
                self.entries[idx] = c

    # -- basic algebra ------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparseTensor)
            and self.slots == other.slots
            and self.entries == other.entries
        )

    def __repr__(self) -> str:
        sig = ",".join(
            ("^" if s.variance == COVECTOR else "_") + ("s" if s.shifted else "")
            for s in self.slots
        )
        return f"SparseTensor[{sig}]({len(self.entries)} entries)"

    def is_zero(self) -> bool:
        return not self.entries

    def scale(self, c) -> "SparseTensor":
        c = _frac(c)
        return SparseTensor(self.slots, {k: v * c for k, v in self.entries.items()})

    def add(self, other: "SparseTensor") -> "SparseTensor":
        if self.slots != other.slots:
            raise ContractionError("cannot add tensors with different signatures")
        out = dict(self.entries)
        for k, v in other.entries.items():
            w = out.get(k, Fraction(0)) + v
            if w == 0:
                out.pop(k, None)
            else:
                out[k] = w
        return SparseTensor(self.slots, out)

    def __add__(self, other):
        return self.add(other)

    def __sub__(self, other):
        return self.add(other.scale(-1))

    def entry_parities(self, idx: Entry) -> Tuple[int, ...]:
        return tuple(slot.parity_of(k) for slot, k in zip(self.slots, idx))

    def parity(self) -> int:
        """Total parity of the tensor, if homogeneous; error otherwise."""
        seen = None
        for idx in self.entries:
            p = sum(self.entry_parities(idx)) & 1
            if seen is None:
                seen = p
            elif seen != p:
                raise ValueError("tensor is not parity-homogeneous")
        return 0 if seen is None else seen

    # -- slot surgery --------------------------------------------------

    def shift_slot(self, k: int) -> "SparseTensor":
        """Apply the parity shift to slot ``k`` (an odd identity map moved
        into position k, crossing the slots before it)."""
        slots = list(self.slots)
        slots[k] = Slot(slots[k].basis, slots[k].variance, not slots[k].shifted)
        out: Coeffs = {}
        for idx, c in self.entries.items():
            cross = sum(self.slots[s].parity_of(idx[s]) for s in range(k)) & 1
            out[idx] = -c if cross else c
        return SparseTensor(slots, out)

    def shift_all(self) -> "SparseTensor":
        """Shift every slot; applications run right-to-left so the result
        is the canonical simultaneous shift."""
        t = self
        for k in range(len(self.slots) - 1, -1, -1):
            t = t.shift_slot(k)
        return t


def tensor_product(t: SparseTensor, u: SparseTensor) -> SparseTensor:
    out: Coeffs = {}
    for i, a in t.entries.items():
        for j, b in u.entries.items():
            out[i + j] = a * b
    return SparseTensor(t.slots + u.slots, out)


def tensor_contract(
    t: SparseTensor, u: SparseTensor, pairs: Sequence[Tuple[int, int]]
) -> SparseTensor:
    """Contract slot pairs of ``t`` against ``u``.

    Each pair (i, j) joins slot i of t with slot j of u; the two slots must
    index the same basis with the same shift and opposite variance.  The
    sign is the Koszul sign of pulling each pair to the front of the
    combined slot list, covector directly left of its vector; evaluation
    then consumes the pair with no further sign.  Remaining slots keep
    their order: t's first, then u's.
    """
    nt, nu = len(t.slots), len(u.slots)
    seen_t, seen_u = set(), set()
    for i, j in pairs:
        if not (0 <= i < nt and 0 <= j < nu):
            raise ContractionError(f"pair ({i},{j}) out of range")
        if i in seen_t or j in seen_u:
            raise ContractionError("slot used in more than one pair")
        seen_t.add(i)
        seen_u.add(j)
        a, b = t.slots[i], u.slots[j]
        if a.basis != b.basis:
            raise ContractionError(f"pair ({i},{j}): bases differ")
        if a.shifted != b.shifted:
            raise ContractionError(f"pair ({i},{j}): shift flags differ")
        if a.variance == b.variance:
            raise ContractionError(f"pair ({i},{j}): need opposite variance")

    pairs = sorted(pairs)
    # target positions: contracted pairs (covector first) occupy the front,
    # remaining slots follow in original order.
    target = {}
    pos = 0
    for i, j in pairs:
        if t.slots[i].variance == COVECTOR:
            target[("t", i)] = pos
            target[("u", j)] = pos + 1
        else:
            target[("u", j)] = pos
            target[("t", i)] = pos + 1
        pos += 2
    rest_slots: List[Slot] = []
    for i in range(nt):
        if i not in seen_t:
            target[("t", i)] = pos
            rest_slots.append(t.slots[i])
            pos += 1
    for j in range(nu):
        if j not in seen_u:
            target[("u", j)] = pos
            rest_slots.append(u.slots[j])
            pos += 1
    perm = [target[("t", i)] for i in range(nt)] + [target[("u", j)] for j in range(nu)]

    # bucket u's entries by the tuple of paired coordinates
    u_pair_slots = [j for _, j in pairs]
    buckets: Dict[Entry, List[Tuple[Entry, Fraction]]] = {}
    for jdx, b in u.entries.items():
        key = tuple(jdx[j] for j in u_pair_slots)
        buckets.setdefault(key, []).append((jdx, b))

    t_pair_slots = [i for i, _ in pairs]
    out: Coeffs = {}
    rest_t = [i for i in range(nt) if i not in seen_t]
    rest_u = [j for j in range(nu) if j not in seen_u]
    for idx, a in t.entries.items():
        key = tuple(idx[i] for i in t_pair_slots)
        for jdx, b in buckets.get(key, ()):
            parities = [t.slots[s].parity_of(idx[s]) for s in range(nt)]
            parities += [u.slots[s].parity_of(jdx[s]) for s in range(nu)]
            sign = koszul_sign(perm, parities)
            new = tuple(idx[i] for i in rest_t) + tuple(jdx[j] for j in rest_u)
            w = out.get(new, Fraction(0)) + sign * a * b
            if w == 0:
                out.pop(new, None)
            else:
                out[new] = w
    return SparseTensor(rest_slots, out)


# ---------------------------------------------------------------------------
# exact matrix routines (dense lists of Fractions)
# ---------------------------------------------------------------------------

Matrix = List[List[Fraction]]


def mat_zero(n: int, m: int) -> Matrix:
    return [[Fraction(0)] * m for _ in range(n)]


def mat_identity(n: int) -> Matrix:
    out = mat_zero(n, n)
    for i in range(n):
        out[i][i] = Fraction(1)
    return out


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, k, m = len(a), len(b), len(b[0])
    out = mat_zero(n, m)
    for i in range(n):
        ai = a[i]
        for t in range(k):
            c = ai[t]
            if c == 0:
                continue
            bt = b[t]
            oi = out[i]
            for j in range(m):
                if bt[j]:
                    oi[j] += c * bt[j]
    return out


def mat_inverse(a: Matrix) -> Matrix:
    """Exact inverse by Gauss-Jordan; raises SingularPairingError with the
    kernel of ``a`` as the radical when singular."""
    n = len(a)
    work = [[_frac(x) for x in row] + [Fraction(1) if i == j else Fraction(0) for j in range(n)]
            for i, row in enumerate(a)]
    col = 0
    for col in range(n):
        pivot = next((r for r in range(col, n) if work[r][col] != 0), None)
        if pivot is None:
            raise SingularPairingError(
                "matrix is singular", radical=mat_kernel(a)
            )
        work[col], work[pivot] = work[pivot], work[col]
        inv = Fraction(1) / work[col][col]
        work[col] = [x * inv for x in work[col]]
        for r in range(n):
            if r != col and work[r][col] != 0:
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[col])]
    return [row[n:] for row in work]


def mat_rref(a: Matrix) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form and pivot column list; lowest-index pivots."""
    if not a:
        return [], []
    rows = [[_frac(x) for x in row] for row in a]
    n, m = len(rows), len(rows[0])
    pivots: List[int] = []
    r = 0
    for c in range(m):
        pivot = next((i for i in range(r, n) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = Fraction(1) / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(n):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == n:
            break
    return rows, pivots


def mat_kernel(a: Matrix) -> List[List[Fraction]]:
    """Basis of the right null space, deterministic (free columns ascending)."""
    if not a:
        return []
    m = len(a[0])
    rref, pivots = mat_rref(a)
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * m
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -rref[r][fc]
        basis.append(v)
    return basis


def mat_column_space(a: Matrix) -> List[List[Fraction]]:
    """Basis of the column space: the pivot columns, lowest index first."""
    if not a or not a[0]:
        return []
    _, pivots = mat_rref(a)
    return [[row[c] for row in a] for c in pivots]


def mat_solve(a: Matrix, b: List[Fraction]):
    """One exact solution of a x = b, or None if inconsistent."""
    n = len(a)
    m = len(a[0]) if a else 0
    aug = [[_frac(x) for x in a[i]] + [_frac(b[i])] for i in range(n)]
    rref, pivots = mat_rref(aug)
    for row in rref:
        if all(x == 0 for x in row[:m]) and row[m] != 0:
            return None
    x = [Fraction(0)] * m
    for r, pc in enumerate(pivots):
        if pc == m:
            return None
        x[pc] = rref[r][m]
    return x


# ---------------------------------------------------------------------------
# operators (plain graded matrices; composition has no Koszul signs)
# ---------------------------------------------------------------------------


@dataclass
class Operator:
    """A linear map of the base space in matrix form: ``op(e_j) = sum_i
    matrix[i,j] e_i``.  ``parity`` enters sign bookkeeping when the map is
    moved past tensor slots, never its own matrix algebra."""

    basis: GradedBasis
    matrix: Dict[Tuple[int, int], Fraction]
    parity: int

    def __post_init__(self):
        self.matrix = {k: _frac(v) for k, v in self.matrix.items() if v != 0}

    @staticmethod
    def zero(basis: GradedBasis, parity: int = ODD) -> "Operator":
        return Operator(basis, {}, parity)

    @staticmethod
    def identity(basis: GradedBasis) -> "Operator":
        return Operator(basis, {(i, i): Fraction(1) for i in range(basis.dimension)}, EVEN)

    def __call__(self, j: int) -> Dict[int, Fraction]:
        return {i: c for (i, jj), c in self.matrix.items() if jj == j}

    def compose(self, other: "Operator") -> "Operator":
        """self after other (matrix product)."""
        out: Dict[Tuple[int, int], Fraction] = {}
        by_col: Dict[int, List[Tuple[int, Fraction]]] = {}
        for (i, j), c in self.matrix.items():
            by_col.setdefault(j, []).append((i, c))
        for (k, j), c in other.matrix.items():
            for i, d in by_col.get(k, ()):
                w = out.get((i, j), Fraction(0)) + d * c
                if w == 0:
                    out.pop((i, j), None)
                else:
                    out[(i, j)] = w
        return Operator(self.basis, out, (self.parity + other.parity) & 1)

    def add(self, other: "Operator", sign: int = 1) -> "Operator":
        if self.parity != other.parity:
            raise ValueError("cannot add operators of different parity")
        out = dict(self.matrix)
        for k, v in other.matrix.items():
            w = out.get(k, Fraction(0)) + sign * v
            if w == 0:
                out.pop(k, None)
            else:
                out[k] = w
        return Operator(self.basis, out, self.parity)

    def scale(self, c) -> "Operator":
        c = _frac(c)
        return Operator(self.basis, {k: c * v for k, v in self.matrix.items()}, self.parity)

    def is_zero(self) -> bool:
        return not self.matrix

    def parity_violations(self) -> List[Tuple[int, int]]:
        """Entries whose parities contradict the declared operator parity."""
        bad = []
        for (i, j) in self.matrix:
            if (self.basis.parities[i] ^ self.basis.parities[j]) != self.parity:
                bad.append((i, j))
        return sorted(bad)

    def dense(self) -> Matrix:
        n = self.basis.dimension
        out = mat_zero(n, n)
        for (i, j), c in self.matrix.items():
            out[i][j] = c
        return out

    @staticmethod
    def from_dense(basis: GradedBasis, m: Matrix, parity: int) -> "Operator":
        entries = {}
        for i, row in enumerate(m):
            for j, c in enumerate(row):
                if c != 0:
                    entries[(i, j)] = _frac(c)
        return Operator(basis, entries, parity)


def apply_operator(t: SparseTensor, slot: int, op: Operator) -> SparseTensor:
    """Apply ``op`` to one slot of a tensor.

    Vector slots transform by the matrix, covector slots by its transpose
    (precomposition).  An odd operator picks up the Koszul sign of moving
    past every slot to the left of the target.
    """
    s = t.slots[slot]
    if s.basis != op.basis:
        raise ContractionError("operator basis does not match slot")
    out: Coeffs = {}
    vector = s.variance == VECTOR
    by_in: Dict[int, List[Tuple[int, Fraction]]] = {}
    for (i, j), c in op.matrix.items():
        if vector:
            by_in.setdefault(j, []).append((i, c))
        else:
            by_in.setdefault(i, []).append((j, c))
    for idx, a in t.entries.items():
        cross = 0
        if op.parity:
            cross = sum(t.slots[k].parity_of(idx[k]) for k in range(slot)) & 1
        for new_i, c in by_in.get(idx[slot], ()):
            new = idx[:slot] + (new_i,) + idx[slot + 1 :]
            w = out.get(new, Fraction(0)) + (-1 if cross else 1) * c * a
            if w == 0:
                out.pop(new, None)
            else:
                out[new] = w
    return SparseTensor(t.slots, out)


def beta_inverse(beta: SparseTensor) -> SparseTensor:
    """Invert a 2-covector pairing into its 2-vector dual.

    Contracting slot 1 of ``beta`` against slot 0 of the result yields the
    identity operator tensor.  Degenerate pairings raise
    SingularPairingError carrying the radical.
    """
    if len(beta.slots) != 2 or any(s.variance != COVECTOR for s in beta.slots):
        raise ContractionError("beta must be a 2-covector tensor")
    basis = beta.slots[0].basis
    if beta.slots[1].basis != basis:
        raise ContractionError("beta slots must share one basis")
    n = basis.dimension
    g = mat_zero(n, n)
    for (i, j), c in beta.entries.items():
        g[i][j] = c
    inv = mat_inverse(g)
    vec = Slot(basis, VECTOR, beta.slots[0].shifted)
    entries = {
        (i, j): inv[i][j] for i in range(n) for j in range(n) if inv[i][j] != 0
    }
    return SparseTensor((vec, Slot(basis, VECTOR, beta.slots[1].shifted)), entries)
