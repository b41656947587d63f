"""Filtered phi-modules at p: strong divisibility and what it buys.

A filtered module (D, phi, D^i) is usable only when the lattice identity
D = sum_i p^{-i} phi D^i holds.  Once it does, the determinant of each
quotient D / D^r pins down one p-adic valuation per r: the local integral
structure of the motive's determinant line.  The fixed part of phi on D^0
and the cokernel of 1 - phi are exposed as diagnostics.
"""

from fractions import Fraction

from motive_height import (
    FilPhiModule,
    Lattice,
    QMatrix,
    check_strong_divisibility,
    h0,
    h1cf,
    local_valuations,
    tate_twist,
)

p = 5

print("# the Q_p(1) module: rank 1, phi = 1/p, D^{-1} = D, D^0 = 0")
qp1 = FilPhiModule(p, Lattice.standard(1), QMatrix([[Fraction(1, p)]]),
                   {}, (-1, 0))
print(f"strongly divisible : {check_strong_divisibility(qp1).ok}")
print(f"h0 rank            : {h0(qp1).cols}")
print(f"h1cf               : {h1cf(qp1)}  (free rank 1: the local points)")
print(f"valuations         : {dict(local_valuations(qp1).v)}")
print()

print("# it is the Tate twist of the trivial module")
trivial = FilPhiModule(p, Lattice.standard(1), QMatrix.identity(1), {}, (0, 1))
twisted = tate_twist(trivial, 1)
print(f"twist(trivial, 1) has phi = {twisted.phi[0, 0]}, window {twisted.window}")
print()

print("# a module that is NOT strongly divisible: phi = 1 with a shifted window")
bad = FilPhiModule(p, Lattice.standard(1), QMatrix.identity(1), {}, (1, 2))
rep = check_strong_divisibility(bad)
print(f"strongly divisible : {rep.ok}")
print(f"lattice sum basis  : {rep.witness.basis.data}  (p^-1 D, not D)")
print()

print("# an elliptic-curve shaped rank-2 module at an ordinary prime")
phi = QMatrix([[Fraction(-2, p), 1], [Fraction(-1, p), 0]])  # a_p = -2
fil = {0: QMatrix.from_columns([(0, 1)], rows=2)}
ell = FilPhiModule(p, Lattice.standard(2), phi, fil, (-1, 1))
print(f"strongly divisible : {check_strong_divisibility(ell).ok}")
print(f"h1cf               : {h1cf(ell)}")
spec = local_valuations(ell)
print(f"valuations         : {dict(spec.v)}  (good reduction: all zero)")
print()

print("# torsion in the cokernel of 1 - phi")
tors = FilPhiModule(p, Lattice.standard(1), QMatrix([[1 + p]]), {}, (0, 1))
print(f"h1cf of phi = 1 + p: {h1cf(tors)}  (free rank 0, one Z/p)")
