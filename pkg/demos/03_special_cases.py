"""
Special-case schedulers and their worst-case factors
====================================================

Each restricted family gets a scheduler built from the base policies,
with machine budgets derived from the optimum m (semi-online) or opened
on the fly (online).  This demo reproduces the bound table empirically on
seeded instances: factor = machines used / m, never above the guarantee.
"""

from fractions import Fraction

from machmin.adversary import gen_random
from machmin.composite import (
    agreeable_nonpreemptive,
    agreeable_preemptive,
    equal_p_nonpreemptive_semi_run,
    equal_p_offline_approx,
    equal_p_online,
    equal_p_online_budget_factor,
    uniform_deadline_nonpreemptive,
    uniform_deadline_preemptive,
)
from machmin.model import validate_nonpreemptive
from machmin.optimum import optimum_nonpreemptive_exact


def show(label, bound, worst):
    print(f"{label:34s} guarantee {bound:>7}  worst observed {worst}")


# -- agreeable deadlines ----------------------------------------------------
worst = Fraction(0)
for seed in range(40):
    g = gen_random("agreeable", 7, seed)
    run = agreeable_preemptive(g.instance, g.m_opt)
    assert run.first_miss is None
    worst = max(worst, Fraction(run.machines_used, g.m_opt))
show("agreeable, preemptive (18m)", 18, worst)

worst = Fraction(0)
for seed in range(40):
    g = gen_random("agreeable", 6, seed)
    m = optimum_nonpreemptive_exact(g.instance)
    run = agreeable_nonpreemptive(g.instance, m)
    assert run.first_miss is None
    worst = max(worst, Fraction(run.machines_used, m))
show("agreeable, non-preemptive (9m)", 9, worst)

# -- equal processing times -------------------------------------------------
worst = Fraction(0)
for seed in range(40):
    g = gen_random("equal-p", 7, seed, p=3)
    m = optimum_nonpreemptive_exact(g.instance)
    run = equal_p_nonpreemptive_semi_run(g.instance, m)
    assert run.first_miss is None
    worst = max(worst, Fraction(run.machines_used, m))
show("equal-p, semi-online rounding (4m)", 4, worst)

# the offline variant reports its measured approximation ratio
worst = Fraction(0)
for seed in range(40):
    g = gen_random("equal-p", 7, seed + 50, p=2)
    schedule = equal_p_offline_approx(g.instance)
    report = validate_nonpreemptive(g.instance, schedule)
    assert report.feasible
    opt = optimum_nonpreemptive_exact(g.instance)
    worst = max(worst, Fraction(report.machines_used, opt))
show("equal-p, offline rounding (<=4x)", 4, worst)

factor = equal_p_online_budget_factor() + Fraction(10, 3) + 1
worst = Fraction(0)
for seed in range(40):
    g = gen_random("equal-p", 7, seed, p=3)
    run = equal_p_online(g.instance)
    assert run.first_miss is None
    worst = max(worst, Fraction(run.machines_used, g.m_opt))
show(f"equal-p, online ({float(factor):.4f}m)", f"{float(factor):.2f}", worst)

# -- uniform deadlines --------------------------------------------------------
worst = Fraction(0)
for seed in range(40):
    g = gen_random("uniform-d", 7, seed)
    run = uniform_deadline_preemptive(g.instance, g.m_opt)
    assert run.first_miss is None
    worst = max(worst, Fraction(run.peak_concurrency, g.m_opt))
show("uniform deadline, preemptive (1m)", 1, worst)

worst = Fraction(0)
for seed in range(40):
    g = gen_random("uniform-d", 6, seed)
    m = optimum_nonpreemptive_exact(g.instance)
    run = uniform_deadline_nonpreemptive(g.instance, m)
    assert run.first_miss is None
    worst = max(worst, Fraction(run.machines_used, m))
show("uniform deadline, non-preemptive (5.25m)", "21/4", worst)
