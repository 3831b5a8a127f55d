"""Initial assignment construction.

Three greedy builders (gmbf, lmbf, lmbff) grow one team at a time and close
it the moment every skill requirement is met, then start the next; the last
team may fall short when students run out. random_init shuffles students into
a fixed number of near-equal teams. All ties break toward the lowest student
index so every builder is deterministic.
"""

from __future__ import annotations

import numpy as np

from .core import Assignment, Instance, TaskSpec
from .errors import ValidationError
from .rng import as_rng


def _met(team_sums: np.ndarray, requirements: np.ndarray) -> bool:
    return bool(np.all(team_sums >= requirements))


def gmbf(instance: Instance, spec: TaskSpec, b: np.ndarray) -> Assignment:
    """Global max benefit first.

    The next student added is always the unassigned one with the largest
    benefit row sum (how many students they would benefit from if everyone
    were one big team). Since that score never changes, the pick order is a
    single static sort.
    """
    row_sums = b.sum(axis=1)
    order = np.lexsort((np.arange(instance.n), -row_sums))

    team_of = np.empty(instance.n, dtype=np.int64)
    team = 0
    sums = np.zeros(instance.k)
    for student in order:
        team_of[student] = team
        sums += instance.skills[student]
        if _met(sums, spec.requirements):
            team += 1
            sums = np.zeros(instance.k)
    return Assignment(team_of)


def _seed_order(b: np.ndarray) -> np.ndarray:
    # lowest global benefit row sum first; ties toward the lower index
    row_sums = b.sum(axis=1)
    return np.lexsort((np.arange(b.shape[0]), row_sums))


def lmbf(instance: Instance, spec: TaskSpec, b: np.ndarray) -> Assignment:
    """Local max benefit first.

    Each team starts from the unassigned student with the globally lowest
    benefit row sum, then repeatedly adds the unassigned student benefiting
    from the most current team members.
    """
    n = instance.n
    unassigned = np.ones(n, dtype=bool)
    seed_rank = np.empty(n, dtype=np.int64)
    seed_rank[_seed_order(b)] = np.arange(n)

    team_of = np.empty(n, dtype=np.int64)
    team = 0
    while unassigned.any():
        pool = np.flatnonzero(unassigned)
        seed = pool[np.argmin(seed_rank[pool])]
        members = [seed]
        unassigned[seed] = False
        team_of[seed] = team
        sums = instance.skills[seed].copy()
        while not _met(sums, spec.requirements) and unassigned.any():
            pool = np.flatnonzero(unassigned)
            # raw benefited-from count; the 1/|team| factor is constant here
            scores = b[pool][:, members].sum(axis=1)
            pick = pool[int(np.argmax(scores))]
            members.append(pick)
            unassigned[pick] = False
            team_of[pick] = team
            sums += instance.skills[pick]
        team += 1
    return Assignment(team_of)


def lmbff(instance: Instance, spec: TaskSpec, b: np.ndarray) -> Assignment:
    """Local max benefit first with fairness.

    Seeded like lmbf, but each addition picks the candidate minimizing
    gamma * (-y') + delta * z', where y' and z' are the mean benefit and
    group-benefit variance over the students placed so far with the
    candidate included. Placed students keep the individual benefit they had
    at placement time (the candidate contributes only its own benefit
    against the current team), which makes delta=0 coincide with lmbf
    exactly; groups with no placed member yet stay out of the variance.
    """
    n, m = instance.n, instance.m
    gamma, delta = spec.gamma, spec.delta
    unassigned = np.ones(n, dtype=bool)
    seed_rank = np.empty(n, dtype=np.int64)
    seed_rank[_seed_order(b)] = np.arange(n)

    placed_total = 0.0
    placed_count = 0
    group_sums = np.zeros(m)
    group_counts = np.zeros(m, dtype=np.int64)

    def place(student: int, benefit: float):
        nonlocal placed_total, placed_count
        placed_total += benefit
        placed_count += 1
        group_sums[instance.groups[student]] += benefit
        group_counts[instance.groups[student]] += 1

    team_of = np.empty(n, dtype=np.int64)
    team = 0
    while unassigned.any():
        pool = np.flatnonzero(unassigned)
        seed = pool[np.argmin(seed_rank[pool])]
        members = [seed]
        unassigned[seed] = False
        team_of[seed] = team
        place(seed, 0.0)
        sums = instance.skills[seed].copy()
        while not _met(sums, spec.requirements) and unassigned.any():
            pool = np.flatnonzero(unassigned)
            cand_benefit = b[pool][:, members].sum(axis=1) / len(members)
            y_new = (placed_total + cand_benefit) / (placed_count + 1)

            cand_groups = instance.groups[pool]
            one_hot = np.zeros((pool.size, m))
            one_hot[np.arange(pool.size), cand_groups] = 1.0
            new_sums = group_sums[None, :] + one_hot * cand_benefit[:, None]
            new_counts = group_counts[None, :] + one_hot
            present = new_counts > 0
            gben = np.where(present, new_sums / np.maximum(new_counts, 1), 0.0)
            n_present = present.sum(axis=1)
            mean = (gben * present).sum(axis=1) / n_present
            z_new = (((gben - mean[:, None]) ** 2) * present).sum(axis=1) / n_present

            scores = -gamma * y_new + delta * z_new
            idx = int(np.argmin(scores))
            pick = pool[idx]
            members.append(pick)
            unassigned[pick] = False
            team_of[pick] = team
            place(pick, float(cand_benefit[idx]))
            sums += instance.skills[pick]
        team += 1
    return Assignment(team_of)


def random_init(n_students: int, team_count: int,
                rng: int | np.random.Generator | None = 0) -> Assignment:
    """Seeded shuffle into team_count teams with sizes differing by at most 1.

    The first (n mod team_count) teams take the extra students.
    """
    if not 1 <= team_count <= n_students:
        raise ValidationError(
            f"team count must be in [1, {n_students}], got {team_count}")
    rng = as_rng(rng)
    order = rng.permutation(n_students)
    base, extra = divmod(n_students, team_count)
    team_of = np.empty(n_students, dtype=np.int64)
    start = 0
    for team in range(team_count):
        size = base + (1 if team < extra else 0)
        team_of[order[start:start + size]] = team
        start += size
    return Assignment(team_of)
