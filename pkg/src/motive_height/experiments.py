"""Verifiable identities and conjecture bookkeeping.

Three families of checks live here.  The s = t identity ties the graded
dimensions of a pure type to its weight (s = sum_r r h(r) against
t = w n / 2); a failure flags data that cannot come from a pure motive.
The sublattice construction replaces the integral data by the kernel of a
surjection onto a quotient modulo p^n, and the invariance experiment
verifies the resulting exact identities: the integral line rescales by
exactly p^{n s(U)}, the Betti lattice index accounts for the metric change,
and the height is unchanged.  This triple of assertions is the strongest
internal audit that the local integral structure really is the determinant
of the lattice quotients.  Finally, the conductor-style quantity
n(M) = sum log p over bad primes is tabulated next to heights; no
inequality between them is asserted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from mpmath import mp, mpf, svd as mp_svd, matrix as mp_matrix

from .balls import ComplexBall, PrecisionExhausted, RealBall, current_bits
from .fl import FilPhiModule, check_strong_divisibility
from .lines import Lattice
from .motive import HeightReport, MotiveData, MotiveType, height, validate
from .rational import QMatrix, hnf_rational, integer_kernel, smith_normal_form, vp


class IncompatibleSpec(ValueError):
    """The declared quotient data fail a compatibility requirement."""


class StrongDivisibilityLost(ValueError):
    """The sublattice construction produced a non-strongly-divisible module:
    the quotient spec is inconsistent with the Frobenius."""


# ---------------------------------------------------------------------------
# s and t
# ---------------------------------------------------------------------------

def _type_of(m: Union[MotiveData, MotiveType]) -> MotiveType:
    return m.type if isinstance(m, MotiveData) else m


def s_invariant(m: Union[MotiveData, MotiveType]) -> int:
    """sum_r r * h(r): the total filtration slope of the type."""
    t = _type_of(m)
    return sum(r * h for r, h in t.hodge_numbers)


def t_invariant(m: Union[MotiveData, MotiveType]) -> Fraction:
    """w * rank / 2."""
    t = _type_of(m)
    return Fraction(t.weight * t.rank, 2)


@dataclass
class STReport:
    s: int
    t: Fraction
    defect: Fraction

    @property
    def passed(self) -> bool:
        return self.defect == 0


def check_s_equals_t(m: Union[MotiveData, MotiveType]) -> STReport:
    """Pass iff s = t; the defect s - t is reported.  Works on the type
    alone, so deliberately broken data can be diagnosed without passing
    full validation."""
    s, t = s_invariant(m), t_invariant(m)
    return STReport(s, t, s - t)


# ---------------------------------------------------------------------------
# quotient specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuotientSpec:
    """Surjection of the p-adic realization onto a rank-k quotient.

    q_dr acts on coordinates with respect to the (canonical) basis of the
    lattice D at p; q_betti acts on the standard Betti coordinates.  The
    declared quotient carries its own Frobenius and filtration on Z^k.
    ``exponent`` is the default p-power depth n.
    """

    p: int
    k: int
    q_dr: QMatrix
    q_betti: QMatrix
    phi_u: QMatrix
    filtration_u: tuple[tuple[int, QMatrix], ...]  # interior steps (i, basis)
    exponent: int = 1

    def u_filtration_matrix(self, i: int, window: tuple[int, int]) -> QMatrix:
        a, b = window
        if i <= a:
            return QMatrix.identity(self.k)
        if i >= b:
            return QMatrix.zeros(self.k, 0)
        return dict(self.filtration_u)[i]

    def u_rank(self, i: int, window: tuple[int, int]) -> int:
        return self.u_filtration_matrix(i, window).cols

    def s_of_quotient(self, window: tuple[int, int]) -> int:
        a, b = window
        return sum(r * (self.u_rank(r, window) - self.u_rank(r + 1, window))
                   for r in range(a, b))

    def t_of_quotient(self, weight: int) -> Fraction:
        return Fraction(weight * self.k, 2)


def full_quotient_spec(m: MotiveData, p: int, exponent: int = 1) -> QuotientSpec:
    """The identity surjection T_p -> T_p as a quotient spec."""
    fl = m.local.get(p)
    if not isinstance(fl, FilPhiModule):
        raise IncompatibleSpec(f"no filtered module at p={p}")
    n = m.rank
    binv = fl.lattice.basis.inverse()
    phi_d = binv @ fl.phi @ fl.lattice.basis
    a, b = m.window
    fil_u = tuple((i, binv @ fl.filtration_matrix(i)) for i in range(a + 1, b))
    return QuotientSpec(p, n, QMatrix.identity(n), QMatrix.identity(n),
                        phi_d, fil_u, exponent)


def _is_saturated_at_p(coords: QMatrix, p: int) -> bool:
    if coords.cols == 0:
        return True
    divisors, _, _ = smith_normal_form(coords.scale(coords.denominator_lcm()))
    return all(d == 0 or d % p != 0 for d in divisors)


def _rank_mod_p(m: QMatrix, p: int) -> int:
    scale = m.denominator_lcm()
    if scale % p == 0:
        raise IncompatibleSpec("matrix is not p-integral")
    red = [[(x.numerator * pow(x.denominator, -1, p)) % p for x in row]
           for row in m.data]
    rank = 0
    rows, cols = len(red), len(red[0]) if red else 0
    for c in range(cols):
        piv = next((r for r in range(rank, rows) if red[r][c]), None)
        if piv is None:
            continue
        red[rank], red[piv] = red[piv], red[rank]
        inv = pow(red[rank][c], -1, p)
        red[rank] = [v * inv % p for v in red[rank]]
        for r in range(rows):
            if r != rank and red[r][c]:
                f = red[r][c]
                red[r] = [(v - f * w) % p for v, w in zip(red[r], red[rank])]
        rank += 1
    return rank


def validate_spec(m: MotiveData, spec: QuotientSpec) -> None:
    """Raise IncompatibleSpec unless all declared compatibilities hold."""
    rep = validate(m)
    if not rep.ok:
        raise IncompatibleSpec("motive itself is invalid: " + "; ".join(rep.issues))
    p, k, n = spec.p, spec.k, m.rank
    fl = m.local.get(p)
    if not isinstance(fl, FilPhiModule):
        raise IncompatibleSpec(f"no filtered module at p={p}")
    a, b = m.window
    if spec.q_dr.rows != k or spec.q_dr.cols != n:
        raise IncompatibleSpec("q_dr shape mismatch")
    if spec.q_betti.rows != k or spec.q_betti.cols != n:
        raise IncompatibleSpec("q_betti shape mismatch")
    if not spec.q_dr.is_integer() or not spec.q_betti.is_integer():
        raise IncompatibleSpec("quotient maps must be integer matrices")
    if k == 0:
        return
    if _rank_mod_p(spec.q_dr, p) != k:
        raise IncompatibleSpec("q_dr is not surjective at p")
    divisors, _, _ = smith_normal_form(spec.q_betti)
    if list(divisors[:k]) != [1] * k:
        raise IncompatibleSpec("q_betti is not surjective")
    # Frobenius compatibility in D-coordinates, exactly
    binv = fl.lattice.basis.inverse()
    phi_d = binv @ fl.phi @ fl.lattice.basis
    if spec.phi_u @ spec.q_dr != spec.q_dr @ phi_d:
        raise IncompatibleSpec("phi_U does not intertwine q_dr with phi")
    # filtration: q maps D^i onto U^i at p, and U^i is saturated
    for i in range(a + 1, b):
        u_i = spec.u_filtration_matrix(i, (a, b))
        if not u_i.is_integer():
            raise IncompatibleSpec(f"U^{i} must be an integer sublattice")
        if not _is_saturated_at_p(u_i, p):
            raise IncompatibleSpec(f"U^{i} is not saturated at p")
        d_i = binv @ fl.filtration_matrix(i)
        image = spec.q_dr @ d_i
        if not _lattice_equal_at_p(image, u_i, p, k):
            raise IncompatibleSpec(f"q(D^{i}) differs from U^{i} at p")
    # Betti/de-Rham kernel compatibility through the period matrix
    _check_kernel_compatibility(m, fl, spec)


def _lattice_equal_at_p(gens_a: QMatrix, gens_b: QMatrix, p: int, dim: int) -> bool:
    basis_a = hnf_rational(gens_a) if gens_a.cols else gens_a
    basis_b = hnf_rational(gens_b) if gens_b.cols else gens_b
    if basis_a.cols != basis_b.cols:
        return False
    if basis_a.cols == 0:
        return True
    if basis_a.hstack(basis_b).rank() != basis_a.cols:
        return False
    for inner, outer in ((basis_a, basis_b), (basis_b, basis_a)):
        gram = outer.transpose() @ outer
        coords = gram.solve(outer.transpose() @ inner)
        if outer @ coords != inner:
            return False
        if any(not _p_int(x, p) for row in coords.data for x in row):
            return False
    return True


def _p_int(x: Fraction, p: int) -> bool:
    return x.denominator % p != 0


def _check_kernel_compatibility(m: MotiveData, fl: FilPhiModule,
                                spec: QuotientSpec) -> None:
    n, k = m.rank, spec.k
    if k == n:
        return
    ker_d = integer_kernel(spec.q_dr)           # in D-coordinates
    ker_ambient = fl.lattice.basis @ ker_d      # in dR reference coordinates
    ker_b = integer_kernel(spec.q_betti)
    cols = []
    for j in range(ker_ambient.cols):
        col = [ComplexBall.zero() for _ in range(n)]
        for i in range(n):
            acc = ComplexBall.zero()
            for t in range(n):
                acc = acc + m.period[i][t] * ComplexBall.from_rationals(ker_ambient[t, j])
            col[i] = acc
        cols.append(col)
    for j in range(ker_b.cols):
        cols.append([ComplexBall.from_rationals(ker_b[i, j]) for i in range(n)])
    a = mp_matrix(n, len(cols))
    for j, col in enumerate(cols):
        for i in range(n):
            a[i, j] = col[i].mid_complex()
    sig = mp_svd(a, compute_uv=False)
    tau = mpf(2) ** (-(current_bits() // 2))
    scale = max(sig[0], mpf(1))
    sigmas = [sig[i] for i in range(sig.rows)]
    small = [s for s in sigmas if s <= tau * scale]
    if any(tau * scale / 256 < s < tau * scale * 256 for s in sigmas):
        raise PrecisionExhausted("kernel comparison sits in the ambiguity band")
    # spans agree iff the stacked kernels have rank n - k
    if len(sigmas) - len(small) != n - k:
        raise IncompatibleSpec(
            "Betti and de Rham kernels disagree through the period matrix")


# ---------------------------------------------------------------------------
# the sublattice construction
# ---------------------------------------------------------------------------

def kernel_mod(a: QMatrix, modulus: int) -> QMatrix:
    """Basis of { c in Z^cols : a c = 0 mod modulus } (a integer)."""
    if modulus == 1:
        return QMatrix.identity(a.cols)
    divisors, _, v = smith_normal_form(a)
    cols = []
    from math import gcd
    for j in range(a.cols):
        if j < len(divisors):
            scale = modulus // gcd(divisors[j], modulus)
        else:
            scale = 1
        cols.append([x * scale for x in v.column(j)])
    return QMatrix.from_columns(cols, rows=a.cols)


def sublattice_motive(m: MotiveData, spec: QuotientSpec,
                      n: Optional[int] = None) -> MotiveData:
    """The motive with integral data replaced by ker(T -> U/p^n U).

    Same rational data and periods; the filtered module at p shrinks to the
    declared kernels, the Betti lattice shrinks to ker(q_betti mod p^n) and
    the period matrix is rewritten in a basis of the new lattice.
    """
    n_exp = spec.exponent if n is None else int(n)
    if n_exp < 0:
        raise ValueError("exponent must be nonnegative")
    validate_spec(m, spec)
    if n_exp == 0 or spec.k == 0:
        return m
    p = spec.p
    q = p ** n_exp
    fl = m.local[p]
    a, b = m.window
    rank = m.rank

    kd = kernel_mod(spec.q_dr, q)                     # D-coordinates
    new_lattice = Lattice(fl.lattice.basis @ kd)      # ambient
    binv = fl.lattice.basis.inverse()
    new_fil = {}
    for i in range(a + 1, b):
        fil_i = fl.filtration_matrix(i)
        if fil_i.cols == 0:
            new_fil[i] = fil_i
            continue
        w_map = spec.q_dr @ (binv @ fil_i)            # k x k_i, p-integral
        u_i = spec.u_filtration_matrix(i, (a, b))
        target = u_i.scale(q)
        stacked = w_map.hstack(target.scale(-1))
        ker = integer_kernel(stacked)
        coeff = QMatrix([ker.data[t] for t in range(fil_i.cols)])
        new_fil[i] = fil_i @ coeff
    try:
        new_fl = FilPhiModule(p, new_lattice, fl.phi, new_fil, (a, b))
    except ValueError as exc:
        raise StrongDivisibilityLost(f"kernel module is malformed: {exc}")
    if not check_strong_divisibility(new_fl).ok:
        raise StrongDivisibilityLost(
            "kernel lattice is not strongly divisible: the quotient spec is "
            "inconsistent with the Frobenius")

    kb = kernel_mod(spec.q_betti, q)
    kb_inv = kb.inverse()
    period = [[None] * rank for _ in range(rank)]
    for i in range(rank):
        for j in range(rank):
            acc = ComplexBall.zero()
            for t in range(rank):
                acc = acc + ComplexBall.from_rationals(kb_inv[i, t]) * m.period[t][j]
            period[i][j] = acc
    local = dict(m.local)
    local[p] = new_fl
    return MotiveData(m.type, period, local, m.bad_primes,
                      label=f"{m.label}^({n_exp})")


# ---------------------------------------------------------------------------
# the invariance experiment
# ---------------------------------------------------------------------------

@dataclass
class InvarianceReport:
    label: str
    p: int
    exponent: int
    s_u: int
    t_u: Fraction
    lattice_ratio: Fraction
    lattice_ratio_expected: Fraction
    lattice_identity_ok: bool
    betti_index: int
    betti_identity_ok: bool
    base_height: HeightReport
    sub_height: HeightReport
    heights_match: bool
    messages: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (self.lattice_identity_ok and self.betti_identity_ok
                and self.heights_match)


def invariance_experiment(m: MotiveData, spec: QuotientSpec,
                          n: Optional[int] = None) -> InvarianceReport:
    """Audit h(M^(n)) = h(M) and its two exact lattice identities."""
    from .motive import assemble_height_line

    n_exp = spec.exponent if n is None else int(n)
    sub = sublattice_motive(m, spec, n_exp)
    a, b = m.window
    s_u = spec.s_of_quotient((a, b))
    t_u = spec.t_of_quotient(m.weight)

    base_line = assemble_height_line(m)
    sub_line = assemble_height_line(sub)
    ratio = sub_line.lattice_scalar / base_line.lattice_scalar
    expected = Fraction(spec.p) ** (n_exp * s_u)
    lattice_ok = ratio == expected

    if n_exp == 0 or spec.k == 0:
        betti_index = 1
    else:
        kb = kernel_mod(spec.q_betti, spec.p ** n_exp)
        betti_index = abs(int(kb.det()))
    w = m.weight
    betti_ok = Fraction(betti_index) ** w == Fraction(spec.p) ** (2 * n_exp * t_u)

    base_h = height(m)
    sub_h = height(sub)
    match = base_h.h.overlaps(sub_h.h)

    messages = []
    if not lattice_ok:
        messages.append(f"lattice ratio {ratio} != p^(n s(U)) = {expected}")
    if not betti_ok:
        messages.append(f"index {betti_index}^w != p^(2 n t(U))")
    if not match:
        messages.append("heights differ beyond combined radii")
    return InvarianceReport(m.label, spec.p, n_exp, s_u, t_u, ratio, expected,
                            lattice_ok, betti_index, betti_ok, base_h, sub_h,
                            match, messages)


# ---------------------------------------------------------------------------
# conductor-style bookkeeping
# ---------------------------------------------------------------------------

def n_of_m(m: MotiveData) -> RealBall:
    """sum of log p over flagged bad-reduction primes (all residue norms are
    the primes themselves over Q)."""
    total = RealBall.zero()
    for p in sorted(m.bad_primes):
        total = total + RealBall.exact_int(p).log()
    return total


@dataclass
class AbcRow:
    label: str
    window: tuple[int, int]
    h: RealBall
    n_of_m: RealBall


@dataclass
class AbcReport:
    """Height-vs-conductor table over Q: log |D_K| = 0 and [K:Q] = 1, so the
    columns are directly comparable across rows.  Nothing is asserted about
    any inequality between them."""

    rows: list[AbcRow]

    def render(self) -> str:
        out = ["# over Q: log|D_K| = 0, [K:Q] = 1; no inequality asserted",
               "id\ta\tb\th_mid\th_rad\tn_of_M"]
        from mpmath import nstr
        for row in self.rows:
            a, b = row.window
            out.append("\t".join([
                row.label, str(a), str(b),
                nstr(row.h.mid, 25), nstr(row.h.rad, 3),
                nstr(row.n_of_m.mid, 25),
            ]))
        return "\n".join(out)


def abc_report(batch: Sequence[MotiveData]) -> AbcReport:
    rows = []
    for m in batch:
        rep = height(m)
        rows.append(AbcRow(m.label, rep.window, rep.h, n_of_m(m)))
    return AbcReport(rows)
