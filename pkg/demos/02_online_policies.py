"""
Online policies under the stepping simulator
============================================

A policy sees jobs only at their release dates and picks, per time step,
which active jobs to run.  The simulator records the full trace, the first
deadline miss, and the machine accounting; a miss does not stop the run
(the doomed job is dropped at its deadline), so traces stay comparable.
"""

from fractions import Fraction

from machmin import EDF, LLF, Instance, Job, check_busy, simulate
from machmin.engine import EarlyFit, MediumFit, NonpreemptiveEDF, check_load_inequality
from machmin.optimum import ceil_frac, optimal_witness
from machmin.adversary import gen_random

# EDF at one machine on two unit jobs due at the same time: one must miss.
clash = Instance([Job(0, 0, 1, 1), Job(1, 0, 1, 1)])
run = simulate(clash, EDF(1))
print("EDF@1 on a clash:", "first miss", run.first_miss)

# LLF with the exact optimum never misses when all deadlines are equal.
uniform = Instance([Job(0, 0, 6, 6), Job(1, 0, 6, 3), Job(2, 0, 6, 3)])
print("LLF@2 on a saturated uniform-deadline instance:",
      simulate(uniform, LLF(2)).first_miss)
print("...and at m-1 machines:", simulate(uniform, LLF(1)).first_miss)

# Both base policies are busy: no machine idles while work is waiting.
run = simulate(uniform, LLF(2))
print("LLF run is busy:", check_busy(run, 2))

# Non-preemptive starters: EarlyFit commits to the release date, MediumFit
# to the centered start that keeps half the laxity on each side.
job = Job(0, 0, 10, 4)
print("EarlyFit start:", simulate(Instance([job]), EarlyFit()).starts)
print("MediumFit start:", simulate(Instance([job]), MediumFit()).starts)

# The loose-job guarantee: when every job is alpha-loose, EDF with
# ceil(m/(1-alpha)^2) machines never misses, and the busy-load inequality
#   W_A(t) <= W_OPT(t) + alpha/(1-alpha) * m * (d_max - t)
# holds at every step (W_OPT read off the flow witness).
alpha = Fraction(1, 3)
g = gen_random("alpha-loose", 8, seed=4, alpha=alpha)
m, witness = optimal_witness(g.instance)
budget = ceil_frac(Fraction(m) / (1 - alpha) ** 2)
run = simulate(g.instance, EDF(budget))
ok, _ = check_load_inequality(run, witness, m, alpha)
print(f"loose instance: m={m}, EDF budget={budget}, miss={run.first_miss}, "
      f"load inequality holds: {ok}")

# Non-preemptive EDF keeps running jobs running and tops up by deadline.
run = simulate(g.instance, NonpreemptiveEDF(budget))
print("non-preemptive EDF starts:", dict(sorted(run.starts.items())))
