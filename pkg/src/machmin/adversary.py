"""Lower-bound instance generators, random instance families, and the
adaptive equal-p adversary game.

Every adversarial instance (or released prefix of one) is certified feasible
on the claimed machine count by the flow oracle before it is trusted; a
certification failure is a generator bug and raises immediately.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .engine import OnlinePolicy, Simulation
from .model import Instance, Job
from .optimum import is_feasible_preemptive, optimum_preemptive

__all__ = [
    "GeneratorError",
    "GeneratedInstance",
    "gen_llf_lower_bound",
    "gen_deadline_ordered_family",
    "PhaseRecord",
    "GameOutcome",
    "play_eight_sevenths",
    "gen_random",
    "PROFILES",
]

_INT64_MAX = 2**62


class GeneratorError(ValueError):
    """A generator was asked for parameters it cannot honour."""


def _certify(instance: Instance, m: int, label: str) -> None:
    if not is_feasible_preemptive(instance, m):
        raise GeneratorError(
            f"{label}: generated instance is not feasible on {m} machines; "
            "construction bug"
        )


# ---------------------------------------------------------------------------
# LLF lower-bound family.
# ---------------------------------------------------------------------------


def gen_llf_lower_bound(m: int, c: int, k: int) -> Instance:
    """The round-based family on which Least Laxity First wastes machines.

    Per round r = 1..k, one group of m/2 identical tight jobs (all deadlines
    at the common horizon) is released at the round start, and c(c-1) waves
    of cm/2 short loose jobs keep preempting them.  All quantities derive
    from x0 = c^(k+2) (c-1), which makes every release time, window length
    and processing time integral.
    """
    if m < 2 or m % 2:
        raise GeneratorError(f"m must be even and >= 2, got {m}")
    if c < 2:
        raise GeneratorError(f"c must be an integer >= 2, got {c} (x_r integrality)")
    if k < 1:
        raise GeneratorError(f"k must be >= 1, got {k}")
    x0 = c ** (k + 2) * (c - 1)
    horizon = c ** (k + 3)  # x0 * c / (c - 1); all tight deadlines land here
    releases: list[tuple[int, int, int, int]] = []  # (release, kind, length, p)
    round_start = 0
    for r in range(1, k + 1):
        # tight group G_t(round_start, r-1): window length c^(k+4-r),
        # laxity c^(k+3-r), so processing x0 / c^(r-1)
        length = c ** (k + 4 - r)
        p_tight = x0 // c ** (r - 1)
        assert round_start + length == horizon
        for _ in range(m // 2):
            releases.append((round_start, 0, length, p_tight))
        x_r = c ** (k + 1 - r)
        for wave in range(c * (c - 1)):
            t = round_start + wave * c * x_r
            for _ in range(c * m // 2):
                releases.append((t, 1, c * x_r, x_r))
        round_start += x0 // c ** (r - 1)
    releases.sort(key=lambda e: (e[0], e[1]))
    jobs = [
        Job(i, t, t + length, p)
        for i, (t, _kind, length, p) in enumerate(releases)
    ]
    instance = Instance(jobs)
    _certify(instance, m, "llf lower bound")
    return instance


# ---------------------------------------------------------------------------
# Deadline-ordered family.
# ---------------------------------------------------------------------------


def gen_deadline_ordered_family(m: int, n: int) -> tuple[Instance, ...]:
    """Instances J_1..J_{n-m} with one job multiset and shifting deadlines.

    All jobs are released at 0.  With q = m/(m-1): the first m jobs are unit
    jobs, job m+j has processing q^j.  In J_k the first m+k jobs are due at
    q^k (so their volume exactly fills m machines up to that deadline) and
    the rest at q^(n-m+1).  Everything is scaled by (m-1)^(n-m+1) to stay
    integral.  Each J_k is certified feasible on m machines; any fixed
    deadline-ordered schedule serving the whole family needs about n-1.
    """
    if not 2 <= m < n:
        raise GeneratorError(f"need 2 <= m < n, got m={m}, n={n}")
    scale = (m - 1) ** (n - m + 1)

    def q_pow(e: int) -> int:  # q^e * scale, exactly
        return m**e * (m - 1) ** (n - m + 1 - e)

    tail_deadline = q_pow(n - m + 1)
    if tail_deadline > _INT64_MAX:
        bits = tail_deadline.bit_length()
        raise GeneratorError(
            f"scaled values need {bits} bits and exceed the 64-bit cap; "
            "shrink n or m"
        )
    processing = [scale] * m + [q_pow(j) for j in range(1, n - m + 1)]
    family = []
    for k in range(1, n - m + 1):
        due_k = q_pow(k)
        jobs = [
            Job(
                j,
                0,
                due_k if j < m + k else tail_deadline,
                processing[j],
            )
            for j in range(n)
        ]
        instance = Instance(jobs)
        _certify(instance, m, f"deadline-ordered J_{k}")
        family.append(instance)
    return tuple(family)


# ---------------------------------------------------------------------------
# The adaptive 8/7 adversary game (equal processing times p = 2).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseRecord:
    t: int
    tight_ids: tuple[int, ...]
    loose_ids: tuple[int, ...]
    residue_before: int  # active work at the phase start, all due t+3
    trapped: bool


@dataclass(frozen=True)
class GameOutcome:
    m: int
    c: Fraction
    budget: int
    phases: tuple[PhaseRecord, ...]
    forced_miss: bool
    miss: tuple[int, int] | None
    trap_ids: tuple[int, ...]
    phase_limit: int
    instance: Instance

    @property
    def phases_played(self) -> int:
        return len(self.phases)


def play_eight_sevenths(
    policy_factory: Callable[[int], OnlinePolicy],
    m: int,
    c: Fraction = Fraction(9, 8),
) -> GameOutcome:
    """Adaptive adversary against a concrete semi-online policy at budget
    floor(c*m), c < 8/7, p = 2 throughout.

    Per phase at time t: release m tight jobs (due t+3) and m/2 loose jobs
    (due t+6).  At t+2, if the policy still owes more than 2m(c-1) work due
    at t+3, spring the trap: release m fresh jobs due t+4, which cannot all
    fit.  Otherwise the loose-work residue grows phase over phase and the
    game ends after ceil(3cm)+2 phases at the latest.  Every released prefix
    is certified feasible on m machines; m/2 loose jobs per phase is the
    most volume that keeps the prefixes feasible (per phase OPT has exactly
    3m slot capacity against 2m tight volume), and it guarantees residue
    growth of m(9/2 - 4c) per non-terminal phase, positive below c = 9/8.
    Machine budgets are integral, so floor(c*m) < c*m usually grants the
    adversary extra slack beyond that floor.
    """
    c = Fraction(c)
    if m < 2 or m % 2:
        raise GeneratorError(f"m must be even and >= 2, got {m}")
    if not 1 <= c < Fraction(8, 7):
        raise GeneratorError(f"c must lie in [1, 8/7), got {c}")
    budget = int(c * m)  # floor
    policy = policy_factory(budget)
    sim = Simulation(policy)
    released: list[Job] = []
    next_id = 0
    threshold = 2 * m * (c - 1)
    phase_limit = math.ceil(3 * c * m) + 2
    phases: list[PhaseRecord] = []
    trap_ids: tuple[int, ...] = ()
    forced = False

    def release(count: int, r: int, d: int) -> tuple[int, ...]:
        nonlocal next_id
        batch = [Job(next_id + i, r, d, 2) for i in range(count)]
        next_id += count
        released.extend(batch)
        sim.add_jobs(batch)
        _certify(Instance(released), m, "8/7 game prefix")
        return tuple(job.id for job in batch)

    for _ in range(phase_limit):
        t = sim.t
        residue = sim.total_remaining()
        tight_ids = release(m, t, t + 3)
        loose_ids = release(m // 2, t, t + 6)
        sim.step()
        sim.step()
        owed = sim.total_remaining(due_by=t + 3)
        trapped = Fraction(owed) > threshold
        phases.append(PhaseRecord(t, tight_ids, loose_ids, residue, trapped))
        if trapped:
            trap_ids = release(m, t + 2, t + 4)
            sim.run_until(t + 4)
            forced = True
            break
        sim.step()
        if sim.misses:
            forced = True
            break
    miss = sim.misses[0] if sim.misses else None
    return GameOutcome(
        m=m,
        c=c,
        budget=budget,
        phases=tuple(phases),
        forced_miss=forced and miss is not None,
        miss=miss,
        trap_ids=trap_ids,
        phase_limit=phase_limit,
        instance=Instance(released),
    )


# ---------------------------------------------------------------------------
# Seeded random instance families.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratedInstance:
    instance: Instance
    profile: str
    seed: int
    m_opt: int  # flow-oracle preemptive optimum


def _frac_floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def _draw_general(rng: random.Random, n: int, horizon: int, max_len: int):
    jobs = []
    for i in range(n):
        r = rng.randrange(0, horizon)
        w = rng.randint(1, max_len)
        p = rng.randint(1, w)
        jobs.append(Job(i, r, r + w, p))
    return jobs


def _draw_agreeable(rng, n, horizon, max_len):
    rs = sorted(rng.randrange(0, horizon) for _ in range(n))
    jobs = []
    d_prev = 0
    for i, r in enumerate(rs):
        d = max(d_prev, r + rng.randint(1, max_len))
        p = rng.randint(1, d - r)
        jobs.append(Job(i, r, d, p))
        d_prev = d
    return jobs


def _draw_equal_p(rng, n, horizon, max_len, p):
    jobs = []
    for i in range(n):
        r = rng.randrange(0, horizon)
        w = rng.randint(p, max(p, max_len))
        jobs.append(Job(i, r, r + w, p))
    return jobs


def _draw_uniform_d(rng, n, horizon, max_len):
    d = horizon + max_len
    jobs = []
    for i in range(n):
        p = rng.randint(1, max_len)
        r = rng.randrange(0, d - p + 1)
        jobs.append(Job(i, r, d, p))
    return jobs


def _loosen(rng, r, w, alpha):
    cap = _frac_floor(alpha * w)
    return rng.randint(1, max(1, cap))


def _tighten(rng, r, w, alpha):
    lo = _frac_floor(alpha * w) + 1
    if lo > w:
        return None
    return rng.randint(lo, w)


def _draw_alpha(rng, n, horizon, max_len, alpha, tight: bool):
    min_w = math.ceil(1 / alpha) if not tight else 1
    jobs = []
    i = 0
    while len(jobs) < n:
        r = rng.randrange(0, horizon)
        w = rng.randint(min_w, max(min_w, max_len))
        p = _tighten(rng, r, w, alpha) if tight else _loosen(rng, r, w, alpha)
        if p is None:
            continue
        jobs.append(Job(i, r, r + w, p))
        i += 1
    return jobs


def _draw_agreeable_alpha(rng, n, horizon, max_len, alpha, tight: bool):
    rs = sorted(rng.randrange(0, horizon) for _ in range(n))
    min_w = math.ceil(1 / alpha) if not tight else 1
    jobs = []
    d_prev = 0
    for i, r in enumerate(rs):
        d = max(d_prev, r + rng.randint(min_w, max(min_w, max_len)))
        w = d - r
        p = _tighten(rng, r, w, alpha) if tight else _loosen(rng, r, w, alpha)
        while p is None:
            d += 1
            w = d - r
            p = _tighten(rng, r, w, alpha)
        jobs.append(Job(i, r, d, p))
        d_prev = d
    return jobs


def _draw_uniform_alpha(rng, n, horizon, max_len, alpha, tight: bool):
    d = horizon + max_len
    jobs = []
    i = 0
    while len(jobs) < n:
        r = rng.randrange(0, d - 1)
        w = d - r
        p = _tighten(rng, r, w, alpha) if tight else _loosen(rng, r, w, alpha)
        if p is None or p > w:
            continue
        jobs.append(Job(i, r, d, p))
        i += 1
    return jobs


PROFILES = (
    "general",
    "agreeable",
    "equal-p",
    "uniform-d",
    "alpha-loose",
    "alpha-tight",
    "agreeable-loose",
    "agreeable-tight",
    "uniform-loose",
    "uniform-tight",
    "half-tight",
)


def gen_random(
    profile: str,
    n: int,
    seed: int,
    *,
    horizon: int | None = None,
    max_len: int | None = None,
    p: int = 3,
    alpha: Fraction = Fraction(1, 2),
) -> GeneratedInstance:
    """Deterministic seeded instance with the profile's predicate holding
    exactly; annotated with the flow-oracle preemptive optimum."""
    if n < 1:
        raise GeneratorError("n must be >= 1")
    rng = random.Random(seed)
    horizon = horizon if horizon is not None else max(2, 2 * n)
    max_len = max_len if max_len is not None else max(3, n)
    if profile == "general":
        jobs = _draw_general(rng, n, horizon, max_len)
    elif profile == "agreeable":
        jobs = _draw_agreeable(rng, n, horizon, max_len)
    elif profile == "equal-p":
        if p < 1:
            raise GeneratorError("equal-p profile needs p >= 1")
        jobs = _draw_equal_p(rng, n, horizon, max_len, p)
    elif profile == "uniform-d":
        jobs = _draw_uniform_d(rng, n, horizon, max_len)
    elif profile == "alpha-loose":
        jobs = _draw_alpha(rng, n, horizon, max_len, alpha, tight=False)
    elif profile == "alpha-tight":
        jobs = _draw_alpha(rng, n, horizon, max_len, alpha, tight=True)
    elif profile == "agreeable-loose":
        jobs = _draw_agreeable_alpha(rng, n, horizon, max_len, alpha, tight=False)
    elif profile == "agreeable-tight":
        jobs = _draw_agreeable_alpha(rng, n, horizon, max_len, alpha, tight=True)
    elif profile == "uniform-loose":
        jobs = _draw_uniform_alpha(rng, n, horizon, max_len, alpha, tight=False)
    elif profile == "uniform-tight":
        jobs = _draw_uniform_alpha(rng, n, horizon, max_len, alpha, tight=True)
    elif profile == "half-tight":
        jobs = _draw_alpha(rng, n, horizon, max_len, Fraction(1, 2), tight=True)
    else:
        raise GeneratorError(
            f"unknown profile {profile!r}; known: {', '.join(PROFILES)}"
        )
    instance = Instance(jobs)
    return GeneratedInstance(
        instance=instance,
        profile=profile,
        seed=seed,
        m_opt=optimum_preemptive(instance),
    )
