"""Functionals on products of cyclic words and their BV structure.

The target algebra of the whole construction: exact-rational functionals
on multisets of cyclic words over a shifted graded basis, the second-order
dissection operator, the odd bracket, the dual action of an odd operator,
and the residual of the quantum master equation evaluated inside a
truncation window.

A monomial is stored as a tuple of cycles, each cycle a tuple of basis
indices.  The sign conventions all flow from one rule: a monomial is
identified with its linearization (cycles in canonical order, each from
its canonical rotation), and any other presentation differs by the Koszul
sign of the letter permutation, computed in shifted parities.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import WindowError
from .superlinear import (
    GradedBasis,
    Operator,
    SparseTensor,
    koszul_sign,
)

Word = Tuple[int, ...]
Monomial = Tuple[Word, ...]


def shifted_parities(basis: GradedBasis) -> Tuple[int, ...]:
    """Letter parities as they enter sign bookkeeping (parity-shifted)."""
    return tuple(p ^ 1 for p in basis.parities)


def canonical_cyclic_form(
    letters: Sequence[int], parities: Sequence[int]
) -> Tuple[Optional[Word], int]:
    """Minimal rotation of a cyclic word with its Koszul sign.

    ``parities[i]`` is the (shifted) parity of ``letters[i]``.  Returns
    ``(None, 0)`` when the word is its own rotation with sign -1, i.e. the
    cyclic class vanishes identically.
    """
    n = len(letters)
    if n == 0:
        raise ValueError("cyclic word must be nonempty")
    letters = tuple(letters)
    best = None
    best_k: List[int] = []
    for k in range(n):
        rot = letters[k:] + letters[:k]
        if best is None or rot < best:
            best, best_k = rot, [k]
        elif rot == best:
            best_k.append(k)
    signs = []
    for k in best_k:
        perm = [(i - k) % n for i in range(n)]
        signs.append(koszul_sign(perm, parities))
    if any(s != signs[0] for s in signs):
        return None, 0
    return best, signs[0]


def word_parity(word: Word, qpar: Sequence[int]) -> int:
    return sum(qpar[i] for i in word) & 1


def monomial_parity(mono: Monomial, qpar: Sequence[int]) -> int:
    return sum(word_parity(w, qpar) for w in mono) & 1


def canonical_monomial(
    words: Sequence[Sequence[int]], qpar: Sequence[int]
) -> Tuple[Optional[Monomial], int]:
    """Canonical form of a list of cyclic words, with the total Koszul sign
    of the letter permutation from the given linearization to the canonical
    one.  Returns ``(None, 0)`` for vanishing classes (a self-annihilating
    rotation, or a repeated odd cycle)."""
    if any(len(w) == 0 for w in words):
        raise ValueError("cyclic words must be nonempty")
    canon: List[Word] = []
    rot_perm: List[int] = []  # target position of each input letter, pre-sort
    offsets: List[int] = []
    pos = 0
    for w in words:
        cw, _s = canonical_cyclic_form(w, [qpar[i] for i in w])
        if cw is None:
            return None, 0
        k = _rotation_offset(tuple(w), cw)
        offsets.append(pos)
        n = len(w)
        for i in range(n):
            rot_perm.append(pos + (i - k) % n)
        canon.append(cw)
        pos += n
    order = sorted(range(len(canon)), key=lambda t: (len(canon[t]), canon[t], t))
    # repeated odd cycles square to zero
    for a, b in zip(order, order[1:]):
        if canon[a] == canon[b] and word_parity(canon[a], qpar) == 1:
            return None, 0
    new_offsets = {}
    pos = 0
    for t in order:
        new_offsets[t] = pos
        pos += len(canon[t])
    # compose: input letter -> rotated position within its block -> block move
    perm = [0] * pos
    cursor = 0
    for bi, w in enumerate(words):
        n = len(w)
        for i in range(n):
            within = rot_perm[cursor + i] - offsets[bi]
            perm[cursor + i] = new_offsets[bi] + within
        cursor += n
    parities = []
    for w in words:
        parities.extend(qpar[i] for i in w)
    sign = koszul_sign(perm, parities)
    return tuple(canon[t] for t in order), sign


def _rotation_offset(w: Word, target: Word) -> int:
    n = len(w)
    for k in range(n):
        if w[k:] + w[:k] == target:
            return k
    raise AssertionError("target is not a rotation of the word")


def monomial_letters(mono: Monomial) -> int:
    return sum(len(w) for w in mono)


# ---------------------------------------------------------------------------
# the functional container
# ---------------------------------------------------------------------------


class BVFunctional:
    """Exact functional on products of cyclic words, graded by loop order.

    ``terms`` maps (hbar_power, monomial) to a nonzero Fraction.  All
    monomial keys are canonical; constructors canonicalize on the way in.
    """

    __slots__ = ("basis", "terms")

    def __init__(self, basis: GradedBasis, terms: Optional[Dict] = None):
        self.basis = basis
        self.terms: Dict[Tuple[int, Monomial], Fraction] = {}
        if terms:
            for key, c in terms.items():
                if c != 0:
                    self.terms[key] = Fraction(c)

    def qpar(self) -> Tuple[int, ...]:
        return shifted_parities(self.basis)

    def accumulate(self, hbar: int, words: Sequence[Sequence[int]], coeff) -> None:
        """Add ``coeff`` times the (possibly non-canonical) monomial."""
        coeff = Fraction(coeff)
        if coeff == 0:
            return
        mono, sign = canonical_monomial(words, self.qpar())
        if mono is None:
            return
        key = (hbar, mono)
        w = self.terms.get(key, Fraction(0)) + sign * coeff
        if w == 0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = w

    def add(self, other: "BVFunctional") -> "BVFunctional":
        if self.basis != other.basis:
            raise ValueError("cannot add functionals over different bases")
        out = BVFunctional(self.basis, dict(self.terms))
        for k, v in other.terms.items():
            w = out.terms.get(k, Fraction(0)) + v
            if w == 0:
                out.terms.pop(k, None)
            else:
                out.terms[k] = w
        return out

    def __add__(self, other):
        return self.add(other)

    def scale(self, c) -> "BVFunctional":
        c = Fraction(c)
        return BVFunctional(self.basis, {k: c * v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self.add(other.scale(-1))

    def hbar_shift(self, d: int) -> "BVFunctional":
        return BVFunctional(self.basis, {(k + d, m): v for (k, m), v in self.terms.items()})

    def restrict(self, n_max: int, k_max: int) -> "BVFunctional":
        return BVFunctional(
            self.basis,
            {
                (k, m): v
                for (k, m), v in self.terms.items()
                if k <= k_max and monomial_letters(m) <= n_max
            },
        )

    def is_zero(self) -> bool:
        return not self.terms

    def sorted_terms(self):
        return sorted(
            self.terms.items(), key=lambda kv: (kv[0][0], monomial_letters(kv[0][1]), kv[0][1])
        )

    def __eq__(self, other):
        return (
            isinstance(other, BVFunctional)
            and self.basis == other.basis
            and self.terms == other.terms
        )

    def __repr__(self):
        return f"BVFunctional({len(self.terms)} terms)"


# ---------------------------------------------------------------------------
# surgery helpers
# ---------------------------------------------------------------------------


def _linearize(mono: Monomial):
    """Positions, letters and cycle ids of the canonical linearization."""
    letters: List[int] = []
    cycle_of: List[int] = []
    starts: List[int] = []
    for ci, w in enumerate(mono):
        starts.append(len(letters))
        letters.extend(w)
        cycle_of.extend([ci] * len(w))
    return letters, cycle_of, starts


def _extraction_sign(letters, qpar_list, p, q, new_order):
    """Koszul sign of reordering the linearization to [x_p, x_q] ++ new_order.

    ``new_order`` lists the remaining original positions in their target
    sequence."""
    n = len(letters)
    perm = [0] * n
    perm[p] = 0
    perm[q] = 1
    for t, pos in enumerate(new_order):
        perm[pos] = t + 2
    return koszul_sign(perm, qpar_list)


def glue_pairing(beta_inv: SparseTensor) -> Dict[Tuple[int, int], Fraction]:
    """Gluing coefficients for the dissection operators.

    The plain inverse-Gram entries, required to be graded-symmetric in
    shifted parities; without that symmetry a sum over unordered letter
    pairs would be ill-defined.
    """
    basis = beta_inv.slots[0].basis
    q = shifted_parities(basis)
    entries = dict(beta_inv.entries)
    for (i, j), c in entries.items():
        back = entries.get((j, i), Fraction(0))
        sign = -1 if (q[i] * q[j]) & 1 else 1
        if back != sign * c:
            raise ValueError(
                "inverse pairing is not graded-symmetric; the dissection "
                "operators need a symmetric gluing tensor"
            )
    return entries


def delta(f: BVFunctional, beta_inv_b: SparseTensor) -> BVFunctional:
    """Second-order dissection operator.

    For each monomial, sums over unordered letter pairs, excluding pairs
    cyclically adjacent on one cycle and pairs filling two distinct
    one-letter cycles; the pair is consumed by the inverse pairing and the
    cycles are cut or merged accordingly.  Loop order is untouched here.
    """
    qpar = f.qpar()
    pairing = glue_pairing(beta_inv_b)
    out = BVFunctional(f.basis)
    for (k, mono), c in f.terms.items():
        letters, cycle_of, starts = _linearize(mono)
        qlist = [qpar[i] for i in letters]
        n = len(letters)
        for p in range(n):
            for q in range(p + 1, n):
                cp, cq = cycle_of[p], cycle_of[q]
                lp, lq = len(mono[cp]), len(mono[cq])
                if cp == cq:
                    ip, iq = p - starts[cp], q - starts[cp]
                    d = (iq - ip) % lp
                    if d == 1 or d == lp - 1:
                        continue
                else:
                    if lp == 1 and lq == 1:
                        continue
                g = pairing.get((letters[p], letters[q]))
                if not g:
                    continue
                new_words, new_order = _surgery(mono, starts, p, q, cp, cq)
                sign = _extraction_sign(letters, qlist, p, q, new_order)
                out.accumulate(k, new_words, c * g * sign)
    return out


def _surgery(mono: Monomial, starts, p, q, cp, cq):
    """Cut (same cycle) or merge (two cycles) at letter positions p < q.

    Returns the new word list (letters) and the list of original positions
    in the order the new linearization visits them."""
    positions: List[List[int]] = []
    if cp == cq:
        w = mono[cp]
        base = starts[cp]
        ip, iq = p - base, q - base
        lw = len(w)
        arc1 = [(ip + 1 + t) % lw for t in range((iq - ip) % lw - 1)]
        arc2 = [(iq + 1 + t) % lw for t in range((ip - iq) % lw - 1)]
        replacement = [[base + i for i in arc1], [base + i for i in arc2]]
        for ci in range(len(mono)):
            if ci == cp:
                positions.extend(replacement)
            else:
                positions.append(list(range(starts[ci], starts[ci] + len(mono[ci]))))
    else:
        wp, wq = mono[cp], mono[cq]
        bp, bq = starts[cp], starts[cq]
        ip, iq = p - bp, q - bq
        arc_p = [bp + (ip + 1 + t) % len(wp) for t in range(len(wp) - 1)]
        arc_q = [bq + (iq + 1 + t) % len(wq) for t in range(len(wq) - 1)]
        merged = arc_p + arc_q
        for ci in range(len(mono)):
            if ci == cp:
                positions.append(merged)
            elif ci == cq:
                continue
            else:
                positions.append(list(range(starts[ci], starts[ci] + len(mono[ci]))))
    flat_letters, _, _ = _linearize(mono)
    new_words = [[flat_letters[i] for i in cyc] for cyc in positions]
    new_order = [i for cyc in positions for i in cyc]
    return new_words, new_order


def bracket(f: BVFunctional, g: BVFunctional, beta_inv_b: SparseTensor) -> BVFunctional:
    """Odd bracket: one letter of each factor is consumed by the inverse
    pairing and their two cycles merge; pairs of one-letter cycles are
    excluded.  Loop orders add.

    Defined as the cross-cycle part of the dissection of a product, with
    the sign that makes the dissection a second-order operator over it:
    ``delta(F G) = delta(F) G + (-1)^F F delta(G) + (-1)^F {F, G}``.
    """
    if f.basis != g.basis:
        raise ValueError("bracket arguments must share a basis")
    qpar = f.qpar()
    pairing = glue_pairing(beta_inv_b)
    out = BVFunctional(f.basis)
    for (kf, mf), cf in f.terms.items():
        nf = monomial_letters(mf)
        f_par = monomial_parity(mf, qpar)
        for (kg, mg), cg in g.terms.items():
            combined: Monomial = mf + mg
            letters, cycle_of, starts = _linearize(combined)
            qlist = [qpar[i] for i in letters]
            for p in range(nf):
                for q in range(nf, len(letters)):
                    cp, cq = cycle_of[p], cycle_of[q]
                    if len(combined[cp]) == 1 and len(combined[cq]) == 1:
                        continue
                    gv = pairing.get((letters[p], letters[q]))
                    if not gv:
                        continue
                    new_words, new_order = _surgery(combined, starts, p, q, cp, cq)
                    sign = _extraction_sign(letters, qlist, p, q, new_order)
                    if f_par:
                        sign = -sign
                    out.accumulate(kf + kg, new_words, cf * cg * gv * sign)
    return out


def i_dual(f: BVFunctional, i_b: Operator) -> BVFunctional:
    """Dual action of an odd operator: replace one letter at a time by its
    image under the transpose, with the sign of carrying the operator past
    the preceding letters."""
    qpar = f.qpar()
    out = BVFunctional(f.basis)
    by_row: Dict[int, List[Tuple[int, Fraction]]] = {}
    for (i, j), c in i_b.matrix.items():
        by_row.setdefault(i, []).append((j, c))
    for (k, mono), c in f.terms.items():
        letters, cycle_of, starts = _linearize(mono)
        qlist = [qpar[i] for i in letters]
        for p, lit in enumerate(letters):
            for j, w in by_row.get(lit, ()):
                cross = sum(qlist[:p]) & 1
                new_words = [list(wd) for wd in mono]
                ci = cycle_of[p]
                new_words[ci][p - starts[ci]] = j
                out.accumulate(k, new_words, c * w * (-1 if cross else 1))
    return out


def quadratic_term(i_b: Operator, beta_b: SparseTensor) -> BVFunctional:
    """The two-letter functional carrying the pairing against the operator
    image; only licensed when the operator squares to zero."""
    if not i_b.compose(i_b).is_zero():
        raise ValueError("quadratic term requires the squared operator to vanish")
    basis = i_b.basis
    n = basis.dimension
    gram: Dict[Tuple[int, int], Fraction] = dict(beta_b.entries)
    qpar = shifted_parities(basis)
    raw: Dict[Tuple[int, int], Fraction] = {}
    for (i, a), c in i_b.matrix.items():
        for b in range(n):
            g = gram.get((i, b))
            if g:
                key = (a, b)
                raw[key] = raw.get(key, Fraction(0)) + c * g
    out = BVFunctional(basis)
    seen: Dict[Tuple[int, Monomial], Fraction] = {}
    for (a, b), v in raw.items():
        if v == 0:
            continue
        mono, sign = canonical_monomial([[a, b]], qpar)
        if mono is None:
            if v != 0:
                raise ValueError("pairing lands on a vanishing cyclic class")
            continue
        key = (0, mono)
        val = sign * v
        if key in seen:
            if seen[key] != val:
                raise ValueError("quadratic pairing is not cyclically consistent")
        else:
            seen[key] = val
    out.terms = {k: v for k, v in seen.items() if v != 0}
    return out


# ---------------------------------------------------------------------------
# residual of the master equation
# ---------------------------------------------------------------------------


@dataclass
class ResidualReport:
    window: Tuple[int, int]
    entries: List[Tuple[int, Monomial, Fraction]]
    passed: bool

    def render(self) -> str:
        n_max, k_max = self.window
        lines = [f"window letters<={n_max} hbar<={k_max}"]
        if not self.entries:
            lines.append("all coefficients zero: PASS")
        else:
            for k, mono, v in self.entries:
                lines.append(f"nonzero hbar={k} cycles={_cycles_repr(mono)} value={v}")
            lines.append(f"{len(self.entries)} nonzero coefficients: FAIL")
        return "\n".join(lines)


def bv_residual(
    s: BVFunctional,
    i_b: Operator,
    beta_inv_b: SparseTensor,
    window: Tuple[int, int],
    s_bounds: Optional[Tuple[int, int]] = None,
) -> ResidualReport:
    """Evaluate the master-equation residual inside a window.

    The window (n_max, k_max) lists every coefficient with at most n_max
    letters and loop order at most k_max.  Those coefficients are fully
    determined only when ``s`` is complete through n_max + 2 letters and
    loop order k_max; pass ``s_bounds`` to have that checked.
    """
    n_max, k_max = window
    if s_bounds is not None:
        sn, sk = s_bounds
        if sn < n_max + 2 or sk < k_max:
            raise WindowError(
                f"window ({n_max},{k_max}) needs S complete through "
                f"letters<={n_max + 2}, hbar<={k_max}; supplied ({sn},{sk})",
                required=(n_max + 2, k_max),
            )
    residual = (
        delta(s, beta_inv_b).hbar_shift(1)
        + bracket(s, s, beta_inv_b).scale(Fraction(1, 2))
        + i_dual(s, i_b)
    )
    bad = [
        (k, m, v)
        for (k, m), v in residual.sorted_terms()
        if k <= k_max and monomial_letters(m) <= n_max
    ]
    return ResidualReport(window=(n_max, k_max), entries=bad, passed=not bad)


# ---------------------------------------------------------------------------
# serialization (line format and json mirror)
# ---------------------------------------------------------------------------

_TERM_RE = re.compile(r"^hbar=(\d+)\s+cycles=(\[.*\])\s+coeff=(-?\d+(?:/\d+)?)$")


def _cycles_repr(mono: Monomial) -> str:
    return "[" + ",".join("[" + ",".join(str(i) for i in w) + "]" for w in mono) + "]"


def to_text(f: BVFunctional, manifest: Optional[Dict[str, str]] = None) -> str:
    lines = []
    for key in sorted(manifest or {}):
        lines.append(f"# {key}={manifest[key]}")
    for (k, mono), v in f.sorted_terms():
        lines.append(f"hbar={k} cycles={_cycles_repr(mono)} coeff={v}")
    return "\n".join(lines) + "\n"


def from_text(text: str, basis: GradedBasis) -> Tuple[BVFunctional, Dict[str, str]]:
    manifest: Dict[str, str] = {}
    out = BVFunctional(basis)
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, val = body.split("=", 1)
                manifest[key.strip()] = val.strip()
            continue
        m = _TERM_RE.match(line)
        if not m:
            raise ValueError(f"line {ln}: cannot parse functional term: {line!r}")
        k = int(m.group(1))
        cycles = json.loads(m.group(2))
        coeff = Fraction(m.group(3))
        mono = tuple(tuple(c) for c in cycles)
        key = (k, mono)
        out.terms[key] = out.terms.get(key, Fraction(0)) + coeff
    out.terms = {k: v for k, v in out.terms.items() if v != 0}
    return out, manifest


def to_json(f: BVFunctional, manifest: Optional[Dict[str, str]] = None) -> str:
    terms = [
        {"hbar": k, "cycles": [list(w) for w in mono], "coeff": str(v)}
        for (k, mono), v in f.sorted_terms()
    ]
    return json.dumps({"manifest": manifest or {}, "terms": terms}, indent=1)


def from_json(text: str, basis: GradedBasis) -> Tuple[BVFunctional, Dict[str, str]]:
    data = json.loads(text)
    out = BVFunctional(basis)
    for t in data["terms"]:
        mono = tuple(tuple(c) for c in t["cycles"])
        out.terms[(int(t["hbar"]), mono)] = Fraction(t["coeff"])
    return out, dict(data.get("manifest", {}))
