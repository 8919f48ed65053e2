import numpy as np
import pytest

import fvpopt as f
from fvpopt.operators import ring_edge_sets


def wrap_piece(piece, witnesses, membership=None):
    """Single-label random operator around a deterministic piece."""
    return f.make_random_selection(
        [piece], [1.0], witnesses=witnesses, membership=membership
    )


def euclidean_norm(x):
    return float(np.linalg.norm(x))


def euclidean_subgrad(x):
    return x / np.linalg.norm(x)


def catalogue():
    """The operator catalogue exercised by the property and acceptance suites."""
    ops = {}
    ops["halfspace"] = wrap_piece(
        f.make_halfspace_projector([1.0, 0.0], 0.0),
        witnesses=[[-1.0, 0.0], [0.0, 3.0]],
        membership=lambda x: x[0] <= 1e-9,
    )
    ops["ball"] = wrap_piece(
        f.make_ball_projector([0.0, 0.0], 1.0),
        witnesses=[[0.0, 0.0], [0.5, 0.5]],
        membership=lambda x: np.linalg.norm(x) <= 1.0 + 1e-9,
    )
    ops["subgradient"] = wrap_piece(
        f.make_subgradient_projector(euclidean_norm, euclidean_subgrad, 1.0),
        witnesses=[[0.0, 0.0], [0.9, 0.0]],
        membership=lambda x: np.linalg.norm(x) <= 1.0 + 1e-9,
    )
    ops["gossip_m2"] = f.make_gossip_operator(
        2, 1, ring_edge_sets(2)[:1], mixing=0.8, witnesses=[[1.0, 1.0]]
    )
    ops["gossip_m5"] = f.make_gossip_operator(
        5, 2, ring_edge_sets(5), mixing=1.0,
        witnesses=[np.tile([1.0, 2.0], 5)],
    )
    pieces = [
        f.make_halfspace_projector([1.0, 0.0], 0.0),
        f.make_halfspace_projector([0.0, 1.0], 0.0),
        f.make_ball_projector([0.0, 0.0], 2.0),
    ]
    ops["selection3"] = f.make_random_selection(
        pieces, [1 / 3] * 3, witnesses=[[-1.0, -1.0], [0.0, 0.0]],
        membership=lambda x: (x[0] <= 1e-9 and x[1] <= 1e-9
                              and np.linalg.norm(x) <= 2.0 + 1e-9),
    )
    return ops


@pytest.fixture(scope="session")
def catalogue_ops():
    return catalogue()


@pytest.fixture(scope="session")
def broken_operator():
    from fvpopt.problems import build_broken_fixture

    return build_broken_fixture(dim=2, factor=2.0).operator
