"""Algebraic input: graded associative and A-infinity algebras with an odd
invariant pairing and an odd symmetry.

Everything here validates rather than assumes: cyclicity, associativity
(in raw and in contracted form), the Leibniz rule, invariance of the
pairing, and the tadpole condition are all checked exhaustively over
basis tuples and reported with witnesses.  The square of the symmetry is
deliberately never constrained.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import bvcalc
from .errors import ContractionError, SingularPairingError
from .superlinear import (
    COVECTOR,
    VECTOR,
    GradedBasis,
    Operator,
    Slot,
    SparseTensor,
    beta_inverse,
    mat_inverse,
    tensor_contract,
)

ASSOCIATIVE = "associative"
A_INFINITY = "a_infinity"


def raw_product_slots(basis: GradedBasis, n: int) -> Tuple[Slot, ...]:
    cov = Slot(basis, COVECTOR)
    return tuple([cov] * n + [Slot(basis, VECTOR)])


def cyclic_product_slots(basis: GradedBasis, n: int) -> Tuple[Slot, ...]:
    cov = Slot(basis, COVECTOR, shifted=True)
    return tuple([cov] * (n + 1))


def is_cyclic_form(t: SparseTensor) -> bool:
    return all(s.variance == COVECTOR and s.shifted for s in t.slots)


@dataclass
class AlgebraSpec:
    """A declared algebra: basis, products, pairing, odd symmetry, optional
    homotopy.  Products may be given raw (inputs plus one output slot) or
    already in cyclic form (all covector slots on the shifted space)."""

    basis: GradedBasis
    products: Dict[int, SparseTensor]
    beta: SparseTensor
    i_op: Operator
    h_op: Optional[Operator] = None
    kind: str = ASSOCIATIVE
    validated: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.kind not in (ASSOCIATIVE, A_INFINITY):
            raise ValueError(f"unknown kind {self.kind!r}")
        for n, t in self.products.items():
            if is_cyclic_form(t):
                if len(t.slots) != n + 1:
                    raise ValueError(f"cyclic product m_{n} must have {n + 1} slots")
            elif len(t.slots) != n + 1:
                raise ValueError(f"raw product m_{n} must have {n} inputs and one output")
        self._cyclic_cache: Dict[int, SparseTensor] = {}

    def arities(self) -> List[int]:
        return sorted(self.products)

    def cyclic(self, n: int) -> SparseTensor:
        """The pairing-lowered cyclic tensor of the arity-n product."""
        if n not in self._cyclic_cache:
            t = self.products.get(n)
            if t is None:
                self._cyclic_cache[n] = SparseTensor(cyclic_product_slots(self.basis, n), {})
            elif is_cyclic_form(t):
                self._cyclic_cache[n] = t
            else:
                self._cyclic_cache[n] = cyclic_tensor_from_product(t, self.beta)
        return self._cyclic_cache[n]

    def beta_dual(self) -> SparseTensor:
        return beta_inverse(self.beta)


def cyclic_tensor_from_product(raw: SparseTensor, beta: SparseTensor) -> SparseTensor:
    """Lower the output of a raw product with the pairing.

    For a binary product the entry at (a, b, c) is
    ``(-1)^parity(b) * beta(m2(a, b), c)``; higher arities generalize the
    sign to ``sum_k (k-1) * parity(input_k)``.
    """
    n = len(raw.slots) - 1
    basis = raw.slots[0].basis
    par = basis.parities
    gram: Dict[int, List[Tuple[int, Fraction]]] = {}
    for (i, j), c in beta.entries.items():
        gram.setdefault(i, []).append((j, c))
    out_entries: Dict[Tuple[int, ...], Fraction] = {}
    for idx, mu in raw.entries.items():
        inputs, k = idx[:n], idx[n]
        eps = sum(t * par[inputs[t]] for t in range(n)) & 1
        for c, b in gram.get(k, ()):
            key = inputs + (c,)
            val = out_entries.get(key, Fraction(0)) + (-1 if eps else 1) * mu * b
            if val == 0:
                out_entries.pop(key, None)
            else:
                out_entries[key] = val
    return SparseTensor(cyclic_product_slots(basis, n), out_entries)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    witnesses: List[tuple] = field(default_factory=list)


@dataclass
class ValidationReport:
    checks: List[CheckResult]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def render(self) -> str:
        lines = []
        for c in self.checks:
            mark = "pass" if c.passed else "FAIL"
            lines.append(f"[{mark}] {c.name}")
            for w in c.witnesses[:5]:
                lines.append(f"       witness {w}")
        return "\n".join(lines)


def _check(name: str, witnesses: List[tuple]) -> CheckResult:
    return CheckResult(name, not witnesses, witnesses)


def _parity_witnesses(spec: AlgebraSpec) -> Dict[str, List[tuple]]:
    par = spec.basis.parities
    out: Dict[str, List[tuple]] = {"products": [], "i": [], "h": [], "beta": []}
    for n, t in spec.products.items():
        if is_cyclic_form(t):
            # every entry of a cyclic tensor must be even in shifted parities
            for idx, c in t.entries.items():
                if sum((par[i] + 1) for i in idx) & 1:
                    out["products"].append((n,) + idx + (c,))
        else:
            for idx, c in t.entries.items():
                if (sum(par[i] for i in idx[:-1]) & 1) != par[idx[-1]]:
                    out["products"].append((n,) + idx + (c,))
    out["i"] = [w + (spec.i_op.matrix[w],) for w in spec.i_op.parity_violations()] if spec.i_op.parity == 1 else [("I must be odd",)]
    if spec.h_op is not None:
        out["h"] = (
            [w + (spec.h_op.matrix[w],) for w in spec.h_op.parity_violations()]
            if spec.h_op.parity == 1
            else [("H must be odd",)]
        )
    for (i, j), c in spec.beta.entries.items():
        if (par[i] + par[j]) & 1 == 0:
            out["beta"].append((i, j, c))
    return out


def _beta_nondegenerate(spec: AlgebraSpec) -> CheckResult:
    try:
        spec.beta_dual()
    except SingularPairingError as e:
        return CheckResult("beta nondegenerate", False, [tuple(v) for v in e.radical])
    return CheckResult("beta nondegenerate", True)


def _beta_invariance_witnesses(spec: AlgebraSpec) -> List[tuple]:
    par = spec.basis.parities
    n = spec.basis.dimension
    gram = {k: v for k, v in spec.beta.entries.items()}
    bad = []
    for a in range(n):
        for b in range(n):
            total = Fraction(0)
            for i, c in spec.i_op(a).items():
                total += c * gram.get((i, b), Fraction(0))
            for i, c in spec.i_op(b).items():
                total += (-1 if par[a] else 1) * c * gram.get((a, i), Fraction(0))
            if total != 0:
                bad.append((a, b, total))
    return bad


def _cyclicity_witnesses(cten: SparseTensor) -> List[tuple]:
    """A cyclic tensor must reproduce itself under rotation with the Koszul
    sign of the rotation in shifted parities."""
    basis = cten.slots[0].basis
    q = [p ^ 1 for p in basis.parities]
    bad = []
    for idx, c in cten.entries.items():
        last = idx[-1]
        rot = (last,) + idx[:-1]
        sign = -1 if (q[last] * (sum(q[i] for i in idx[:-1]) & 1)) & 1 else 1
        if cten.entries.get(rot, Fraction(0)) != sign * c:
            bad.append(idx + (c,))
    return bad


def _raw_associativity_witnesses(spec: AlgebraSpec) -> List[tuple]:
    m2 = spec.products.get(2)
    if m2 is None or is_cyclic_form(m2):
        return []
    n = spec.basis.dimension
    mu: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
    for (a, b, k), c in m2.entries.items():
        mu.setdefault((a, b), {})[k] = c
    bad = []
    for a in range(n):
        for b in range(n):
            for c in range(n):
                left: Dict[int, Fraction] = {}
                for k, x in mu.get((a, b), {}).items():
                    for l, y in mu.get((k, c), {}).items():
                        left[l] = left.get(l, Fraction(0)) + x * y
                for k, x in mu.get((b, c), {}).items():
                    for l, y in mu.get((a, k), {}).items():
                        left[l] = left.get(l, Fraction(0)) - x * y
                for l, v in left.items():
                    if v != 0:
                        bad.append((a, b, c, l, v))
    return bad


def _contracted_associativity_witnesses(spec: AlgebraSpec) -> List[tuple]:
    """Gluing two cyclic products through the inverse pairing and rotating
    one external argument around reproduces the tensor up to a Koszul sign;
    with a nondegenerate pairing this is associativity.  The glued tensor
    is odd, so the honest rotation sign reduces to the parities of the
    first and third arguments."""
    m = spec.cyclic(2)
    if m.is_zero():
        return []
    binv = spec.beta_dual().shift_all()
    half = tensor_contract(m, binv, [(2, 0)])
    z = tensor_contract(half, m, [(2, 0)])
    basis = spec.basis
    q = [p ^ 1 for p in basis.parities]
    bad = []
    keys = set(z.entries)
    for idx in keys:
        a, b, c, d = idx
        rot = (d, a, b, c)
        sign = -1 if (q[a] + q[c]) & 1 else 1
        if z.entries.get(rot, Fraction(0)) != sign * z.entries.get(idx, Fraction(0)):
            bad.append(idx + (z.entries.get(idx),))
    return bad


def _leibniz_witnesses(spec: AlgebraSpec) -> List[tuple]:
    """The cyclic-tensor form of the Leibniz rule: inserting the symmetry
    into each slot, with the sign of carrying the odd operator past the
    earlier arguments.  Arguments live on the shifted space, so the
    prefixes use shifted parities."""
    m = spec.cyclic(2)
    q = [p ^ 1 for p in spec.basis.parities]
    n = spec.basis.dimension
    rows: Dict[int, Dict[int, Fraction]] = {}
    for (i, j), c in spec.i_op.matrix.items():
        rows.setdefault(j, {})[i] = c
    bad = []
    for a in range(n):
        for b in range(n):
            for c in range(n):
                total = Fraction(0)
                for k, x in rows.get(a, {}).items():
                    total += x * m.entries.get((k, b, c), Fraction(0))
                sa = -1 if q[a] else 1
                for k, x in rows.get(b, {}).items():
                    total += sa * x * m.entries.get((a, k, c), Fraction(0))
                sab = -1 if (q[a] + q[b]) & 1 else 1
                for k, x in rows.get(c, {}).items():
                    total += sab * x * m.entries.get((a, b, k), Fraction(0))
                if total != 0:
                    bad.append((a, b, c, total))
    return bad


def validate_cyclic_dga(spec: AlgebraSpec) -> ValidationReport:
    """Exhaustive validation of a cyclic differential-graded algebra input.

    The square of the odd symmetry is intentionally unconstrained.
    """
    if spec.kind != ASSOCIATIVE:
        raise ValueError("validate_cyclic_dga expects an associative spec")
    par_w = _parity_witnesses(spec)
    checks = [
        _check("product parities", par_w["products"]),
        _check("I odd", par_w["i"]),
        _check("beta odd", par_w["beta"]),
        _beta_nondegenerate(spec),
        _check("beta I-invariant", _beta_invariance_witnesses(spec)),
        _check("m cyclic", _cyclicity_witnesses(spec.cyclic(2))),
        _check("associativity (raw)", _raw_associativity_witnesses(spec)),
        _check("associativity (contracted)", _contracted_associativity_witnesses(spec)),
        _check("Leibniz", _leibniz_witnesses(spec)),
    ]
    if spec.h_op is not None:
        checks.insert(2, _check("H odd", par_w["h"]))
    report = ValidationReport(checks)
    spec.validated = report.all_passed
    return report


def product_functional(spec: AlgebraSpec, arities: Optional[Sequence[int]] = None) -> bvcalc.BVFunctional:
    """All cyclic product tensors of the spec bundled as one single-cycle
    functional over the full basis (loop order zero)."""
    out = bvcalc.BVFunctional(spec.basis)
    for n in arities if arities is not None else spec.arities():
        cten = spec.cyclic(n)
        seen: Dict[Tuple[int, bvcalc.Monomial], Fraction] = {}
        qpar = out.qpar()
        for idx, c in cten.entries.items():
            mono, sign = bvcalc.canonical_monomial([list(idx)], qpar)
            if mono is None:
                if c != 0:
                    raise ValueError(f"cyclic product hits a vanishing class at {idx}")
                continue
            key = (0, mono)
            val = sign * c
            if key in seen and seen[key] != val:
                raise ValueError(f"cyclic product not rotation-consistent at {idx}")
            seen[key] = val
        # different arities never collide: letter counts differ
        for key, val in seen.items():
            if val != 0:
                out.terms[key] = val
    return out


def validate_a_infinity(spec: AlgebraSpec) -> ValidationReport:
    """Check the homotopy-associativity constraints with the first one
    relaxed: the bracket self-composition of the bundled cyclic products
    must cancel the symmetry action, arity by arity."""
    if spec.kind != A_INFINITY:
        raise ValueError("validate_a_infinity expects an a_infinity spec")
    par_w = _parity_witnesses(spec)
    checks = [
        _check("product parities", par_w["products"]),
        _check("I odd", par_w["i"]),
        _check("beta odd", par_w["beta"]),
        _beta_nondegenerate(spec),
        _check("beta I-invariant", _beta_invariance_witnesses(spec)),
    ]
    for n in spec.arities():
        checks.append(_check(f"m_{n} cyclic", _cyclicity_witnesses(spec.cyclic(n))))
    if all(c.passed for c in checks):
        m_tot = product_functional(spec)
        binv = spec.beta_dual()
        res = bvcalc.bracket(m_tot, m_tot, binv).scale(Fraction(1, 2)) + bvcalc.i_dual(
            m_tot, spec.i_op
        )
        by_arity: Dict[int, List[tuple]] = {}
        for (k, mono), v in res.sorted_terms():
            by_arity.setdefault(bvcalc.monomial_letters(mono), []).append((mono, v))
        max_real = max((len(spec.cyclic(n).slots) for n in spec.arities()), default=0)
        # arities beyond what the given products can produce are vacuous
        realizable = 2 * max_real - 2
        for letters in sorted(by_arity):
            if letters <= realizable:
                checks.append(_check(f"homotopy relation at {letters} letters", by_arity[letters]))
    report = ValidationReport(checks)
    spec.validated = report.all_passed
    return report


def check_delta_m_zero(spec: AlgebraSpec) -> ValidationReport:
    """Tadpole condition: every non-adjacent self-contraction of each
    cyclic product must vanish.  Trivially true for binary products, where
    all slot pairs are cyclically adjacent."""
    binv = spec.beta_dual()
    checks = []
    for n in spec.arities():
        f = product_functional(spec, [n])
        d = bvcalc.delta(f, binv)
        witnesses = [(mono, v) for (k, mono), v in d.sorted_terms()]
        checks.append(_check(f"tadpole-free m_{n}", witnesses))
    return ValidationReport(checks)


# ---------------------------------------------------------------------------
# doubling: adjoin the shifted dual as a bimodule
# ---------------------------------------------------------------------------


def double(
    basis: GradedBasis,
    products: Dict[int, SparseTensor],
    i_op: Operator,
    kind: str = ASSOCIATIVE,
) -> AlgebraSpec:
    """Adjoin the shifted dual space to an algebra without a pairing.

    The result lives on A + dual(A), carries the natural odd pairing, the
    bimodule products (one dual factor acts by evaluation against the
    product, two dual factors multiply to zero), and the symmetry extended
    by its dual action.  Validation of the output is the caller's witness
    that the input satisfied its own identities.
    """
    n0 = basis.dimension
    names = tuple(basis.names) + tuple(f"{nm}^" for nm in basis.names)
    parities = tuple(basis.parities) + tuple(p ^ 1 for p in basis.parities)
    big = GradedBasis(names, parities)

    new_products: Dict[int, SparseTensor] = {}
    for arity, raw in products.items():
        if is_cyclic_form(raw):
            raise ValueError("double expects raw products (with an output slot)")
        entries: Dict[Tuple[int, ...], Fraction] = {}
        for idx, mu in raw.entries.items():
            entries[idx] = entries.get(idx, Fraction(0)) + mu
        # One dual input at slot r dualizes the output: the dual letter
        # evaluates the product of the remaining arguments read cyclically
        # from the slot after r, the output partner included.  Two dual
        # inputs multiply to zero (no entries emitted).
        for idx, mu in raw.entries.items():
            ins, i = idx[:arity], idx[arity]
            for r in range(arity):
                n_after = arity - 1 - r
                after = ins[:n_after]
                k = ins[n_after]
                before = ins[n_after + 1 :]
                key = before + (n0 + i,) + after + (n0 + k,)
                entries[key] = entries.get(key, Fraction(0)) + mu
        new_products[arity] = SparseTensor(raw_product_slots(big, arity), entries)

    beta_entries: Dict[Tuple[int, int], Fraction] = {}
    for i in range(n0):
        beta_entries[(i, n0 + i)] = Fraction(1)
        beta_entries[(n0 + i, i)] = Fraction(1)
    cov = Slot(big, COVECTOR)
    beta = SparseTensor((cov, cov), beta_entries)

    i_entries: Dict[Tuple[int, int], Fraction] = {}
    for (i, j), c in i_op.matrix.items():
        i_entries[(i, j)] = c
        # dual action: I(f_i) = (-1)^parity(i) * sum_j iota_{ij} f_j
        s = -1 if basis.parities[i] else 1
        i_entries[(n0 + j, n0 + i)] = i_entries.get((n0 + j, n0 + i), Fraction(0)) + s * c
    big_i = Operator(big, i_entries, parity=1)

    return AlgebraSpec(basis=big, products=new_products, beta=beta, i_op=big_i, kind=kind)
