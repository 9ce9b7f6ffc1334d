from collections import deque

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from upcross.cayley import (
    GroupModel,
    NormTable,
    ball,
    ball_size,
    build_norm_table,
    distance,
    estimate_growth,
    inverse,
    multiply,
    word_norm,
)
from upcross.errors import ModelMismatchError, PreconditionError, WindowError

H = GroupModel.heisenberg()
Z1 = GroupModel.zd_standard(1)
Z2 = GroupModel.zd_standard(2)
Z2BOX = GroupModel.zd_box(2)

small = st.integers(-6, 6)
heis = st.tuples(small, small, small)


def as_matrix(g):
    a, b, c = g
    return np.array([[1, a, c], [0, 1, b], [0, 0, 1]], dtype=object)


def naive_bfs(model, radius):
    norms = {model.identity: 0}
    queue = deque([model.identity])
    while queue:
        g = queue.popleft()
        if norms[g] == radius:
            continue
        for s in model.generators:
            h = model.multiply(g, s)
            if h not in norms:
                norms[h] = norms[g] + 1
                queue.append(h)
    return norms


# -- group law -----------------------------------------------------------------


def test_multiply_examples():
    assert multiply((1, 2), (3, -1), Z2) == (4, 1)
    assert multiply((1, 0, 0), (0, 1, 0), H) == (1, 1, 1)
    assert multiply((2, -5, 7), H.identity, H) == (2, -5, 7)


def test_inverse_examples():
    assert inverse((2, -3), Z2) == (-2, 3)
    assert inverse((1, 1, 1), H) == (-1, -1, 0)
    assert inverse(H.identity, H) == H.identity


@given(heis, heis)
def test_heisenberg_law_matches_matrices(g, h):
    assert as_matrix(multiply(g, h, H)).tolist() == (as_matrix(g).dot(as_matrix(h))).tolist()


@given(heis, heis, heis)
def test_heisenberg_associative_with_inverses(g, h, k):
    assert multiply(multiply(g, h, H), k, H) == multiply(g, multiply(h, k, H), H)
    assert multiply(g, inverse(g, H), H) == H.identity


def test_mismatched_dimension():
    with pytest.raises(ModelMismatchError):
        multiply((1, 2), (1, 2, 3), Z2)


def test_invalid_generators():
    with pytest.raises(ValueError):
        GroupModel("zd-custom", 1, ((1,),))
    with pytest.raises(ValueError):
        GroupModel("zd-custom", 1, ((0,),))
    with pytest.raises(ValueError):
        GroupModel("zd-box", 2, ((1, 0), (-1, 0), (0, 1), (0, -1)))


def test_custom_adds_inverses():
    m = GroupModel.zd_custom(1, [[2], [3]])
    assert set(m.generators) == {(2,), (-2,), (3,), (-3,)}


# -- norms and balls -----------------------------------------------------------


def test_word_norm_examples():
    assert word_norm((2, 3), build_norm_table(Z2, 6)) == 5
    assert word_norm((2, 3), build_norm_table(Z2BOX, 6)) == 3
    assert word_norm(H.identity, build_norm_table(H, 4)) == 0


def test_word_norm_outside_window():
    with pytest.raises(WindowError):
        word_norm((9, 0), build_norm_table(Z2, 6))


def test_distance_examples():
    assert distance((1, 0), (0, 1), build_norm_table(Z2, 6), Z2) == 2
    assert distance((3, 3), (3, 3), build_norm_table(Z2, 6), Z2) == 0
    assert distance((1, 1, 1), H.identity, build_norm_table(H, 6), H) == 2


def test_ball_examples():
    t1 = build_norm_table(Z1, 10)
    assert ball((0,), 3, t1) == {(i,) for i in range(-3, 4)}
    assert ball_size(2, build_norm_table(Z2BOX, 5)) == 25
    th = build_norm_table(H, 6)
    assert ball(H.identity, 1, th) == {(0, 0, 0), (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)}
    assert ball_size(4, build_norm_table(GroupModel.zd_box(3), 5)) == 729
    assert ball_size(0, t1) == 1
    # real radii act through the floor
    assert ball((0,), 3.5, t1) == ball((0,), 3, t1)


def test_ball_outside_window():
    t = build_norm_table(Z1, 5)
    with pytest.raises(WindowError):
        ball((3,), 3, t)


@pytest.mark.parametrize("model,R", [(H, 8), (Z2, 8), (Z2BOX, 6), (GroupModel.zd_custom(2, [[1, 0], [0, 1], [1, 1]]), 6)])
def test_table_matches_naive_bfs(model, R):
    table = NormTable.build(model, R)
    assert table.element_norms == naive_bfs(model, R)
    assert table.ball_sizes[0] == 1
    assert (np.diff(table.ball_sizes) > 0).all()


def test_closed_forms():
    t = build_norm_table(Z2, 10)
    for g, n in t.element_norms.items():
        assert n == abs(g[0]) + abs(g[1])
    for d in (1, 2, 3):
        tb = build_norm_table(GroupModel.zd_box(d), 8)
        assert all(n == max(abs(x) for x in g) for g, n in tb.element_norms.items())


@given(heis, heis)
def test_norm_axioms_heisenberg(g, h):
    t = build_norm_table(H, 30)
    gi = inverse(g, H)
    try:
        ng, nh, ngh = t.norm(g), t.norm(h), t.norm(multiply(g, h, H))
    except WindowError:
        return
    assert (ng == 0) == (g == H.identity)
    assert t.norm(gi) == ng
    assert ngh <= ng + nh


@given(st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3)), heis, heis)
def test_right_invariance(x, y, g):
    t = build_norm_table(H, 30)
    try:
        assert distance(multiply(x, g, H), multiply(y, g, H), t) == distance(x, y, t)
    except WindowError:
        pass


def test_ball_sizes_independent_of_center():
    rng = np.random.default_rng(0)
    t = build_norm_table(H, 14)
    for _ in range(50):
        x = t.element(int(rng.integers(t.size(4))))
        for n in range(0, 14 - t.norm(x) + 1):
            assert len(ball(x, n, t)) == ball_size(n, t)
            if n:
                assert ball(x, n - 1, t) <= ball(x, n, t)


def test_spheres_partition_ball():
    t = build_norm_table(H, 10)
    assert int(t.sphere_sizes.sum()) == len(t) == t.size(10)


def test_table_cache_roundtrip(tmp_path):
    t = build_norm_table(H, 6)
    t.save(tmp_path / "h.npz")
    back = NormTable.load(tmp_path / "h.npz", H, 6)
    assert back.element_norms == t.element_norms
    with pytest.raises(ModelMismatchError):
        NormTable.load(tmp_path / "h.npz", Z2)


# -- growth --------------------------------------------------------------------


def test_growth_estimates():
    est = estimate_growth(build_norm_table(Z2BOX, 80), 2)
    assert abs(est.degree_hat - 2) < 0.05
    assert abs(est.pansu_hat - 4) < 0.11
    assert all(b == (2 * n + 1) ** 2 for n, b, _ in est.per_n)
    assert abs(estimate_growth(build_norm_table(Z1, 200)).pansu_hat - 2) < 0.01


def test_growth_needs_room():
    with pytest.raises(PreconditionError):
        estimate_growth(build_norm_table(Z1, 5))
