"""
From semi-online to online, and the general scheduler
=====================================================

The Double reduction turns any a-competitive semi-online policy into a
4a-competitive online one: whenever the running optimum more than doubles,
it opens a fresh block of 2*a*m(t) machines for the jobs released from
then on.  The general scheduler splits jobs into safe (ever loose relative
to the remaining window) and critical (always tight), EDF-ing the safe pool
and spreading critical groups over O(log n) machines each so that nobody
loses more than a constant fraction of its original laxity.
"""

import math

from machmin import Instance, Job
from machmin.adversary import gen_random
from machmin.composite import double_wrap
from machmin.engine import EDF
from machmin.logn import LAXITY_FLOOR, logn_schedule

# A release stream whose optimum jumps 1 -> 3 -> 7: three epochs open.
jobs, t = [], 0
for size in (1, 3, 7):
    for _ in range(size):
        jobs.append(Job(len(jobs), t, t + 4, 4))
    t += 4
stream = Instance(jobs)

run = double_wrap(stream, lambda semi: EDF(2 * semi), factor=2)
print("epochs (start, m(t), block):", run.extras["epochs"])
print("total opened:", run.machines_used,
      "<= 4*a*m(final) =", 4 * 2 * run.extras["m_final"])
assert run.first_miss is None

# The general scheduler on a batch of seeded instances: zero misses, the
# per-job laxity floor respected, and the measured constant C in
# machines <= C * m * log2(n).
print()
print("general scheduler:")
worst_c, floor_seen = 0.0, None
for seed in range(12):
    n = 30 + 10 * seed
    g = gen_random("general", n, seed, horizon=max(10, n), max_len=max(6, n // 3))
    run = logn_schedule(g.instance, g.m_opt)
    assert run.first_miss is None
    c = run.machines_used / (g.m_opt * math.log2(n))
    worst_c = max(worst_c, c)
    ratio = run.extras["min_critical_laxity_ratio"]
    if ratio is not None and (floor_seen is None or ratio < floor_seen):
        floor_seen = ratio
    print(f"  n={n:4d} m={g.m_opt:2d} machines={run.machines_used:4d} "
          f"C={c:05.2f} rebuilds={len(run.extras['rebuilds'])}")
print(f"worst C observed: {worst_c:.2f}")
print(f"laxity floor {LAXITY_FLOOR} (= rational bound for 2 - pi^2/6);",
      "minimum ratio seen:", floor_seen)
