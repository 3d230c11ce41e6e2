"""Small concrete algebras used by the test suite, the demos and the docs.

Each constructor returns a fully populated AlgebraSpec (validation is the
caller's job).  The names describe the algebra, not its role in any test.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from .algebra import ASSOCIATIVE, AlgebraSpec, raw_product_slots
from .superlinear import COVECTOR, GradedBasis, Operator, Slot, SparseTensor


def build_product(basis: GradedBasis, table: Dict[Tuple[str, str], List[Tuple[str, int]]]) -> SparseTensor:
    """Binary product tensor from a name-keyed multiplication table."""
    entries = {}
    for (a, b), outs in table.items():
        ia, ib = basis.index(a), basis.index(b)
        for c, coeff in outs:
            entries[(ia, ib, basis.index(c))] = Fraction(coeff)
    return SparseTensor(raw_product_slots(basis, 2), entries)


def build_pairing(basis: GradedBasis, table: Dict[Tuple[str, str], int]) -> SparseTensor:
    cov = Slot(basis, COVECTOR)
    entries = {
        (basis.index(a), basis.index(b)): Fraction(c) for (a, b), c in table.items()
    }
    return SparseTensor((cov, cov), entries)


def build_operator(basis: GradedBasis, table: Dict[str, List[Tuple[str, Fraction]]], parity=1) -> Operator:
    entries = {}
    for src, outs in table.items():
        j = basis.index(src)
        for dst, c in outs:
            entries[(basis.index(dst), j)] = Fraction(c)
    return Operator(basis, entries, parity)


def dual_grassmann() -> AlgebraSpec:
    """Dual numbers tensored with a Grassmann line: k[x, t]/(x^2, t^2) with
    x even and t odd, unit u and socle w = xt.  The pairing reads off the
    socle coefficient of a product; the symmetry sends t to x and the
    homotopy sends x back to t, so the retract is spanned by u and w and
    the symmetry dies on it."""
    basis = GradedBasis(("u", "w", "x", "t"), (0, 1, 0, 1))
    unital = {("u", n): [(n, 1)] for n in basis.names}
    unital.update({(n, "u"): [(n, 1)] for n in basis.names if n != "u"})
    unital[("x", "t")] = [("w", 1)]
    unital[("t", "x")] = [("w", 1)]
    products = {2: build_product(basis, unital)}
    beta = build_pairing(basis, {("u", "w"): 1, ("w", "u"): 1, ("x", "t"): 1, ("t", "x"): 1})
    i_op = build_operator(basis, {"t": [("x", 1)]})
    h_op = build_operator(basis, {"x": [("t", 1)]})
    return AlgebraSpec(basis, products, beta, i_op, h_op, ASSOCIATIVE)


def grassmann_line(with_i: bool = False) -> AlgebraSpec:
    """The exterior algebra on one odd generator, with its trace pairing."""
    basis = GradedBasis(("one", "theta"), (0, 1))
    products = {
        2: build_product(
            basis,
            {
                ("one", "one"): [("one", 1)],
                ("one", "theta"): [("theta", 1)],
                ("theta", "one"): [("theta", 1)],
            },
        )
    }
    beta = build_pairing(basis, {("one", "theta"): 1, ("theta", "one"): 1})
    i_op = build_operator(basis, {"theta": [("one", 1)]} if with_i else {})
    return AlgebraSpec(basis, products, beta, i_op, None, ASSOCIATIVE)


def q1(c: Fraction = Fraction(1)) -> AlgebraSpec:
    """The rank-one odd matrix algebra: an odd involution pi with pi^2 = 1
    and the odd trace; the symmetry is the bracket with c*pi, and the
    standard homotopy contracts everything (empty retract)."""
    c = Fraction(c)
    basis = GradedBasis(("one", "pi"), (0, 1))
    products = {
        2: build_product(
            basis,
            {
                ("one", "one"): [("one", 1)],
                ("one", "pi"): [("pi", 1)],
                ("pi", "one"): [("pi", 1)],
                ("pi", "pi"): [("one", 1)],
            },
        )
    }
    beta = build_pairing(basis, {("one", "pi"): 1, ("pi", "one"): 1})
    i_op = build_operator(basis, {"pi": [("one", 2 * c)]})
    h_op = build_operator(basis, {"one": [("pi", Fraction(1, 2) / c)]})
    return AlgebraSpec(basis, products, beta, i_op, h_op, ASSOCIATIVE)


def q2() -> AlgebraSpec:
    """The rank-two odd matrix algebra with its odd trace.

    Basis E_ij (even matrix units) and F_ij (odd ones, F_ij F_kl =
    delta_jk E_il); the symmetry is the bracket with F_11, whose square is
    the bracket with E_11 and does not vanish.  No homotopy is attached;
    construct one with the recipe."""
    names = tuple(f"E{i}{j}" for i in (1, 2) for j in (1, 2)) + tuple(
        f"F{i}{j}" for i in (1, 2) for j in (1, 2)
    )
    parities = (0, 0, 0, 0, 1, 1, 1, 1)
    basis = GradedBasis(names, parities)

    def mk(kind: str, i: int, j: int) -> str:
        return f"{kind}{i}{j}"

    table: Dict[Tuple[str, str], List[Tuple[str, int]]] = {}
    for i in (1, 2):
        for j in (1, 2):
            for k in (1, 2):
                for l in (1, 2):
                    if j != k:
                        continue
                    table[(mk("E", i, j), mk("E", k, l))] = [(mk("E", i, l), 1)]
                    table[(mk("E", i, j), mk("F", k, l))] = [(mk("F", i, l), 1)]
                    table[(mk("F", i, j), mk("E", k, l))] = [(mk("F", i, l), 1)]
                    table[(mk("F", i, j), mk("F", k, l))] = [(mk("E", i, l), 1)]
    products = {2: build_product(basis, table)}
    beta_table = {}
    for i in (1, 2):
        for j in (1, 2):
            beta_table[(mk("E", i, j), mk("F", j, i))] = 1
            beta_table[(mk("F", i, j), mk("E", j, i))] = 1
    beta = build_pairing(basis, beta_table)
    i_table: Dict[str, List[Tuple[str, Fraction]]] = {}
    # bracket with F11: E_ij -> [F11, E_ij], F_ij -> {F11, F_ij}
    for i in (1, 2):
        for j in (1, 2):
            outs: List[Tuple[str, Fraction]] = []
            if i == 1:
                outs.append((mk("F", 1, j), Fraction(1)))
            if j == 1:
                outs.append((mk("F", i, 1), Fraction(-1)))
            if outs:
                i_table[mk("E", i, j)] = _merge(outs)
            outs = []
            if i == 1:
                outs.append((mk("E", 1, j), Fraction(1)))
            if j == 1:
                outs.append((mk("E", i, 1), Fraction(1)))
            if outs:
                i_table[mk("F", i, j)] = _merge(outs)
    i_op = build_operator(basis, i_table)
    return AlgebraSpec(basis, products, beta, i_op, None, ASSOCIATIVE)


def _merge(outs: List[Tuple[str, Fraction]]) -> List[Tuple[str, Fraction]]:
    acc: Dict[str, Fraction] = {}
    for n, c in outs:
        acc[n] = acc.get(n, Fraction(0)) + c
    return [(n, c) for n, c in acc.items() if c != 0]


def grassmann_line_bare() -> Tuple[GradedBasis, Dict[int, SparseTensor], Operator]:
    """The Grassmann line without a pairing, with the odd derivative; the
    doubling input of choice."""
    basis = GradedBasis(("one", "theta"), (0, 1))
    products = {
        2: build_product(
            basis,
            {
                ("one", "one"): [("one", 1)],
                ("one", "theta"): [("theta", 1)],
                ("theta", "one"): [("theta", 1)],
            },
        )
    }
    i_op = build_operator(basis, {"theta": [("one", 1)]})
    return basis, products, i_op


def point_algebra_bare() -> Tuple[GradedBasis, Dict[int, SparseTensor], Operator]:
    """The ground field as a one-dimensional even unital algebra, bare."""
    basis = GradedBasis(("one",), (0,))
    products = {2: build_product(basis, {("one", "one"): [("one", 1)]})}
    return basis, products, Operator.zero(basis)


def direct_sum(a: AlgebraSpec, b: AlgebraSpec) -> AlgebraSpec:
    """Product of two algebras with block pairing, symmetry and homotopy."""
    na = a.basis.dimension
    names = tuple(f"a.{n}" for n in a.basis.names) + tuple(f"b.{n}" for n in b.basis.names)
    parities = a.basis.parities + b.basis.parities
    basis = GradedBasis(names, parities)
    entries = {}
    for idx, c in a.products[2].entries.items():
        entries[idx] = c
    for idx, c in b.products[2].entries.items():
        entries[tuple(i + na for i in idx)] = c
    products = {2: SparseTensor(raw_product_slots(basis, 2), entries)}
    cov = Slot(basis, COVECTOR)
    beta_entries = dict(a.beta.entries)
    for (i, j), c in b.beta.entries.items():
        beta_entries[(i + na, j + na)] = c
    beta = SparseTensor((cov, cov), beta_entries)
    i_entries = dict(a.i_op.matrix)
    for (i, j), c in b.i_op.matrix.items():
        i_entries[(i + na, j + na)] = c
    i_op = Operator(basis, i_entries, 1)
    h_entries = dict(a.h_op.matrix) if a.h_op else {}
    if b.h_op:
        for (i, j), c in b.h_op.matrix.items():
            h_entries[(i + na, j + na)] = c
    h_op = Operator(basis, h_entries, 1) if h_entries else None
    return AlgebraSpec(basis, products, beta, i_op, h_op, ASSOCIATIVE)
