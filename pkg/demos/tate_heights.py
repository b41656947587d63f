"""Heights of Tate objects, the smallest complete examples.

The Tate object Q(r) has rank 1, weight -2r, a single graded piece in
degree -r, and period (2 pi i)^{-r}.  Its height is r-independent up to
sign bookkeeping: h(Q(0)) = 0 on the nose, and h(Q(1)) = h(Q(-1)) =
-log(2 pi), with the lattice part trivial at every prime.
"""

from motive_height import height, tate_motive, working_precision
from motive_height.motive import assemble_height_line, global_lattice

with working_precision(128):
    for r in (0, 1, -1, 2):
        m = tate_motive(r, fl_primes=(2, 3))
        line = assemble_height_line(m)
        rep = height(m)
        print(f"Q({r}):  window {m.window}")
        print(f"  integral line   = {line.label} with scalar {line.lattice_scalar}")
        print(f"  metric |ref|    = {rep.metric}")
        print(f"  height h        = {rep.h}")
        print(f"  global lattices : "
              + ", ".join(f"L_{i} ~ {global_lattice(m, i)}"
                          for i in range(m.window[0], m.window[1] + 1)))
        print()

print("The exact zero for Q(0) is literal: the ball radius is zero, because")
print("every step of that computation stays in exact arithmetic.")
