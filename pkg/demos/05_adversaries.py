"""
Adversarial families: where the natural policies break
======================================================

Three constructions, each certified feasible on the claimed machine count
by the flow oracle before being used as evidence:

- waves of short loose jobs that lure Least Laxity First away from rigid
  long jobs, round after round;
- a one-shot family of instances that only differ in deadlines, on which
  any deadline-ordered policy (EDF included) must burn almost one machine
  per job;
- an adaptive game with equal processing times that forces any policy
  below 8/7 of the optimum into a miss.
"""

from fractions import Fraction

from machmin.adversary import (
    gen_deadline_ordered_family,
    gen_llf_lower_bound,
    play_eight_sevenths,
)
from machmin.engine import EDF, LLF, simulate
from machmin.optimum import is_feasible_preemptive, optimum_preemptive

# -- LLF waves ----------------------------------------------------------------
print("LLF lower-bound family (m=2, c=2): machines LLF needs as k grows")
for k in range(1, 7):
    inst = gen_llf_lower_bound(2, 2, k)
    assert is_feasible_preemptive(inst, 2)
    need = 1
    while simulate(inst, LLF(need)).first_miss is not None:
        need += 1
    print(f"  k={k}: n={inst.n:3d} optimum={optimum_preemptive(inst)} "
          f"LLF needs {need}")
print("  (the miss threshold against cm/2 = 2 machines sits at k=4;")
print("   volume below that is provably insufficient -- see the tests)")

# -- deadline-ordered family ---------------------------------------------------
print()
print("deadline-ordered family (m=2): EDF with n-2 machines must fail")
for n in (4, 6, 8, 10):
    family = gen_deadline_ordered_family(2, n)
    missed = [
        k + 1
        for k, inst in enumerate(family)
        if simulate(inst, EDF(n - 2)).first_miss is not None
    ]
    print(f"  n={n}: EDF@{n-2} misses on J_k for k in {missed}")

# -- the 8/7 game ---------------------------------------------------------------
print()
print("adaptive 8/7 game (m=4, c=9/8, budget floor(c*m)=4):")
for name, factory in (("EDF", EDF), ("LLF", LLF)):
    out = play_eight_sevenths(factory, 4, Fraction(9, 8))
    print(f"  {name}: forced miss {out.miss} after {out.phases_played} phases "
          f"(limit {out.phase_limit}); residues "
          f"{[ph.residue_before for ph in out.phases]}")
    assert out.forced_miss
