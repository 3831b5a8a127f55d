"""Shared construction helpers for the test suite."""

import numpy as np

from fairteams.core import Assignment, TaskSpec, make_instance


def make_random_instance(rng, n=None, k=None, m=None):
    """Random valid instance: uniform skills, every group non-empty."""
    n = n if n is not None else int(rng.integers(4, 30))
    k = k if k is not None else int(rng.integers(1, 4))
    m = m if m is not None else int(rng.integers(1, 4))
    skills = rng.random((n, k))
    groups = np.concatenate([np.arange(m), rng.integers(0, m, n - m)])
    rng.shuffle(groups)
    return make_instance(skills, groups)


def make_random_spec(rng, k, max_requirement=3.0):
    return TaskSpec(requirements=rng.random(k) * max_requirement,
                    gamma=float(rng.random() * 2),
                    delta=float(rng.random() * 2),
                    benefit_epsilon=float(rng.random() * 0.2))


def random_partition(rng, n, n_teams):
    """Dense labels with every team in range(n_teams) non-empty."""
    labels = np.concatenate([np.arange(n_teams),
                             rng.integers(0, n_teams, n - n_teams)])
    rng.shuffle(labels)
    return Assignment(labels)
