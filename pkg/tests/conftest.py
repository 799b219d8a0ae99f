import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from koopspec import simulate_ou, trajectory_to_pairs


@pytest.fixture(scope="session")
def ou_pairs_small():
    """200 OU pairs shared by fast tests."""
    return trajectory_to_pairs(simulate_ou(201, seed=11), 1)


def matched_eigenvalue_distance(e1, e2):
    """Max distance under the optimal pairing of two complex eigenvalue sets."""
    from scipy.optimize import linear_sum_assignment

    e1, e2 = np.asarray(e1), np.asarray(e2)
    m = min(len(e1), len(e2))
    e1 = e1[np.argsort(-np.abs(e1))][:m]
    e2 = e2[np.argsort(-np.abs(e2))][:m]
    cost = np.abs(e1[:, None] - e2[None, :])
    rows, cols = linear_sum_assignment(cost)
    return cost[rows, cols].max()


def linear_system_pairs(n, d=3, seed=0):
    """Stable linear dynamics y = A x + noise, for Linear-kernel tests."""
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    a = q @ np.diag(np.linspace(0.9, 0.3, d)) @ q.T
    x = rng.standard_normal((n, d))
    y = x @ a.T + 0.05 * rng.standard_normal((n, d))
    from koopspec import TrajectoryDataset

    return TrajectoryDataset(x, y, 1)
