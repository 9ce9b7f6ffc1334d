import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import expanding_tower
from upcross.cayley import GroupModel, build_norm_table
from upcross.covering import (
    Ball,
    BallCollection,
    BoxSpace,
    CayleySpace,
    CoveringConstants,
    D_constant,
    Delta_constant,
    FillWitness,
    GrowthCertificate,
    K_constant,
    Tower,
    absorption_violations,
    ball_from_json,
    ball_to_json,
    boundary_measure,
    check_delta_fill,
    collection_from_json,
    collection_to_json,
    compute_thresholds,
    delta_expansion,
    delta_interior,
    effective_vitali,
    finitary_vitali,
    find_delta_fill,
    is_delta_expanding,
    maximal_balls,
    measured_vitali,
    radius_ratio_bound,
    sandwich_bound,
    vitali_constant,
    verify_sandwich,
)
from upcross.covering.constants import float_K, min_sandwich_length, vitali_fraction
from upcross.covering.serialize import tower_from_json, tower_to_json
from upcross.covering.vitali import check_vitali_hypotheses, vitali_cover_check
from upcross.errors import DisjointnessError, PreconditionError, UncertifiedWarning

Z1 = GroupModel.zd_standard(1)
Z2BOX = GroupModel.zd_box(2)
H = GroupModel.heisenberg()
Z1T = CayleySpace(build_norm_table(Z1, 60))
Z2T = CayleySpace(build_norm_table(Z2BOX, 30))


def B(c, r):
    return Ball(c if isinstance(c, tuple) else (c,), r)


# -- ball calculus ---------------------------------------------------------------


def test_interior_and_expansion():
    assert delta_interior(B(0, 10), 0.2) == B(0, 8)
    assert delta_interior(B(0, 5), 1e-9).radius == pytest.approx(5)
    half = delta_interior(B(0, 7), 0.5)
    assert half.radius == Fraction(7, 2)
    assert Z1T.ball_size(half) == Z1T.ball_size(B(0, 3))
    assert delta_expansion(B(0, 4), 0.5) == B(0, 6)
    assert delta_expansion(B(0, 4), 0) == B(0, 4)
    assert B(0, 2).scale(3) == B(0, 6)
    with pytest.raises(ValueError):
        delta_interior(B(0, 3), 1.5)


def test_exact_radii_survive_repeated_scaling():
    b = B(0, 3)
    for _ in range(40):
        b = delta_expansion(b, Fraction(1, 3))
    assert b.radius == 3 * Fraction(4, 3) ** 40


def test_collection_rad_and_core():
    c = BallCollection([B(0, 3), B(5, 1), B(9, 2)])
    assert c.rad == 1
    assert c.core == {(0,), (5,), (9,)}


def test_boundary_measure_examples():
    assert boundary_measure([B(0, 10)], 0.1, Z1T) == (19, 2, 21)
    # 9.9 floors to 9, so a tiny delta still trims the two endpoints
    assert boundary_measure([B(0, 10)], 0.01, Z1T) == (19, 2, 21)
    assert boundary_measure([], 0.1, Z1T) == (0, 0, 0)
    with pytest.raises(DisjointnessError):
        boundary_measure([B(0, 3), B(2, 3)], 0.1, Z1T)


def test_is_delta_expanding_examples():
    assert is_delta_expanding(Tower.centered({(0,): [1, 3, 9]}), 1)
    assert not is_delta_expanding(Tower.centered({(0,): [1, 1.5]}), 1)
    assert is_delta_expanding(Tower.centered({(0,): [4]}), 5)


def test_tower_validation():
    t = Tower({(0,): (B(0, 1), B(1, 3))})
    assert t.validate(Z1T) == []
    bad = Tower({(0,): (B(0, 3), B(0, 1))})
    assert bad.validate(Z1T)
    with pytest.raises(PreconditionError):
        Tower({(0,): (B(0, 1),), (1,): (B(1, 1), B(1, 2))})


def test_maximal_balls_examples():
    assert set(maximal_balls([B(0, 1), B(0, 3), B(5, 1)], Z1T)) == {B(0, 3), B(5, 1)}
    disjoint = [B(0, 1), B(10, 2)]
    assert set(maximal_balls(disjoint, Z1T)) == set(disjoint)
    assert list(maximal_balls([B(0, 1), B(0, 2), B(1, 4)], Z1T)) == [B(1, 4)]


# -- geometry cross-check --------------------------------------------------------

box_balls = st.builds(lambda x, y, r: Ball((x, y), r), st.integers(-6, 6), st.integers(-6, 6), st.integers(0, 6))


@given(st.lists(box_balls, min_size=1, max_size=6), box_balls)
def test_box_space_agrees_with_table(balls, probe):
    box = BoxSpace(2)
    for b in balls:
        assert box.ball_size(b) == Z2T.ball_size(b)
        assert box.contains(b, probe) == Z2T.contains(b, probe)
        assert box.intersects(b, probe) == Z2T.intersects(b, probe)
    assert box.measure(balls) == Z2T.measure(balls)
    assert box.intersection_measure(probe, balls) == Z2T.intersection_measure(probe, balls)
    assert box.pairwise_disjoint(balls) == Z2T.pairwise_disjoint(balls)
    assert list(box.contained(balls, probe)) == list(Z2T.contained(balls, probe))


def test_contained_shortcut_matches_point_sets():
    space = CayleySpace(build_norm_table(H, 10))
    rng = np.random.default_rng(1)
    t = space.table
    outer = Ball(t.element(17), 4)
    balls = [Ball(t.element(int(rng.integers(t.size(3)))), int(rng.integers(0, 4))) for _ in range(200)]
    assert list(space.contained(balls, outer)) == [space.contains(b, outer) for b in balls]


# -- Vitali ---------------------------------------------------------------------


def test_finitary_vitali_examples():
    assert list(finitary_vitali([B(0, 2), B(1, 2), B(10, 1)], Z1T)) == [B(0, 2), B(10, 1)]
    assert list(finitary_vitali([B(3, 2)], Z1T)) == [B(3, 2)]
    assert list(finitary_vitali([B(10, 1), B(0, 2)], Z1T)) == [B(0, 2), B(10, 1)]


z1_balls = st.builds(lambda c, r: B(c, r), st.integers(-15, 15), st.integers(0, 8))


@given(st.lists(z1_balls, min_size=1, max_size=15))
def test_finitary_vitali_properties(balls):
    chosen = finitary_vitali(balls, Z1T)
    assert Z1T.pairwise_disjoint(list(chosen))
    for u in balls:
        assert any(w.radius >= u.radius and Z1T.intersects(u, w) for w in chosen)
    assert vitali_cover_check(balls, chosen, Z1T) == []


def test_measured_vitali():
    assert list(measured_vitali([B(0, 4)], 1, Z1T)) == [B(0, 4)]
    assert vitali_fraction(1) == Fraction(1, 9)
    with pytest.warns(UncertifiedWarning):
        measured_vitali([B(0, 0), B(1, 0)], 1, Z1T)


def test_effective_vitali_nested_chain():
    space = BoxSpace(1)
    t = expanding_tower(np.random.default_rng(0), 1, 1, Fraction(1, 2), 1, 10, 0)
    out = effective_vitali(t, Fraction(1, 2), 1, space)
    assert list(out) == [t.level(t.height)[0]]


def test_effective_vitali_two_disjoint_chains():
    space = BoxSpace(1)
    eps = Fraction(1, 2)
    single = expanding_tower(np.random.default_rng(0), 1, 1, eps, 1, 10, 0)
    radii = [b.radius for b in single.chains[(0,)]]
    far = 3 * radii[-1]
    t = Tower.centered({(0,): radii, (far,): radii})
    out = effective_vitali(t, eps, 1, space)
    assert set(out) == {Ball((0,), radii[-1]), Ball((far,), radii[-1])}


def test_effective_vitali_box_thirty_points():
    space = BoxSpace(2)
    eps = Fraction(1, 4)
    s_0 = compute_thresholds(space, 2, 0.25, 0.1).s_0
    t = expanding_tower(np.random.default_rng(30), 2, 30, eps, 2, s_0, 60)
    out = effective_vitali(t, eps, 2, space)
    assert space.measure(out) >= Fraction(3, 4) * space.measure(t.level(1))


def test_effective_vitali_reports_failed_hypotheses():
    t = Tower.centered({(0,): [1, 2, 4]})
    with pytest.raises(PreconditionError) as err:
        effective_vitali(t, 0.5, 1, BoxSpace(1))
    assert "expanding" in str(err.value) and "height" in str(err.value)
    hyp = check_vitali_hypotheses(t, 0.5, 1, BoxSpace(1))
    assert not hyp.expanding and not hyp.height


def test_absorption_on_expanding_towers():
    # lower balls meeting a maximal higher ball lie in its eps-expansion
    rng = np.random.default_rng(34)
    eps = Fraction(1, 2)
    factor = 2 + 4 / eps
    for _ in range(20):
        radii = {}
        for _ in range(int(rng.integers(2, 8))):
            r = int(rng.integers(0, 4))
            chain = [r]
            for _ in range(2):
                r = math.ceil(factor * max(r, 1)) + int(rng.integers(0, 2))
                chain.append(r)
            radii[(int(rng.integers(-60, 61)),)] = chain
        assert absorption_violations(Tower.centered(radii), eps, BoxSpace(1)) == []
    space = CayleySpace(build_norm_table(H, 20))
    for _ in range(10):
        xs = {space.table.element(int(i)) for i in rng.integers(0, space.table.size(2), 6)}
        t = Tower.centered({x: [int(rng.integers(0, 2)), 10] for x in xs})
        assert absorption_violations(t, eps, space) == []


def test_absorption_can_fail_without_expansion():
    t = Tower.centered({(0,): [5, 6], (7,): [1, 1]})
    assert absorption_violations(t, 0.1, BoxSpace(1))


# -- fills ----------------------------------------------------------------------


def test_check_delta_fill_examples():
    parts = [B(-3, 2), B(3, 2)]
    assert check_delta_fill(B(0, 5), parts, 0.10, Z1T)
    assert not check_delta_fill(B(0, 5), parts, 0.05, Z1T)
    assert check_delta_fill(B(0, 5), [B(0, 5)], 1e-9, Z1T)
    assert not check_delta_fill(B(0, 5), [B(4, 2)], 0.9, Z1T)
    with pytest.raises(DisjointnessError):
        check_delta_fill(B(0, 5), [B(-1, 2), B(1, 2)], 0.5, Z1T)


@given(st.lists(z1_balls, max_size=6), st.floats(0.01, 0.99), st.floats(0.0, 0.5))
def test_check_delta_fill_monotone(parts, delta, extra):
    parts = list(finitary_vitali(parts, Z1T))
    target = B(0, 12)
    if check_delta_fill(target, parts, delta, Z1T):
        assert check_delta_fill(target, parts, delta + extra + 1e-9, Z1T)


def test_find_delta_fill_examples():
    found = find_delta_fill(B(0, 5), [B(-3, 2), B(3, 2)], 0.1, Z1T)
    assert found is not None and check_delta_fill(B(0, 5), found, 0.1, Z1T)
    tiles = [B(-4, 1), B(-1, 1), B(2, 1), B(4, 0), B(5, 0)]
    assert find_delta_fill(B(0, 5), tiles, 1e-6, Z1T) is not None
    assert find_delta_fill(B(0, 5), [B(10, 2), B(-4, 3)], 0.5, Z1T) is None


def test_find_delta_fill_second_pass():
    # the big candidate blocks a fill; smaller ones go into the residue
    found = find_delta_fill(B(0, 6), [B(0, 3), B(-5, 1), B(5, 1), B(-6, 0), B(6, 0)], 0.01, Z1T)
    assert found is not None and set(found) == {B(0, 3), B(-5, 1), B(5, 1)} | ({B(-6, 0), B(6, 0)} & set(found))


# -- constants ------------------------------------------------------------------


def test_constant_values():
    assert vitali_constant(1) == 1.125
    assert K_constant(0.25, 1) == 48
    assert sandwich_bound(100, 0.25, 1) == pytest.approx((1 + 0.25 / 9) ** -2, rel=1e-12)
    assert sandwich_bound(100, 0.25, 1) == pytest.approx(0.94668, abs=1e-5)
    assert sandwich_bound(30, 0.25, 1, strict=False) == 1.0
    assert radius_ratio_bound(0.3, 1) == pytest.approx(1.3 / 1.2, rel=1e-12)
    assert radius_ratio_bound(0.3, 2) == pytest.approx(math.sqrt(1.3 / 1.2), rel=1e-12)
    assert radius_ratio_bound(1e-9, 1) == pytest.approx(1, abs=1e-9)
    assert D_constant(0.1, 1) == 283
    assert Delta_constant(1) == 144 and Delta_constant(0.01) == 4
    with pytest.raises(PreconditionError):
        sandwich_bound(40, 0.25, 1)
    with pytest.raises(ValueError):
        radius_ratio_bound(0, 1)


def test_d_constant_by_hand():
    arg = math.log(2 + 5760) / (math.log(1.1) - math.log(1 + 0.2 / 3))
    assert D_constant(0.1, 1) == math.ceil(arg) + 1


@given(st.floats(0.001, 0.999), st.integers(1, 6))
def test_k_matches_double_precision(eps, q):
    exact = K_constant(eps, q)
    C = 3 ** (q + 1) / (3 ** (q + 1) - 1)
    arg = 2 * math.log(4 / eps) / math.log(C)
    if abs(arg - round(arg)) > 1e-9:
        assert exact == float_K(eps, q)
    assert abs(min_sandwich_length(eps, q) - arg) <= 1e-12 * arg


@given(st.floats(0.01, 0.98), st.floats(0.001, 0.01), st.integers(1, 5))
def test_constants_monotone(eps, step, q):
    assert vitali_constant(q + 1) < vitali_constant(q)
    assert K_constant(eps + step, q) <= K_constant(eps, q)


def test_constants_bundle():
    c = CoveringConstants(1, 0.25, 0.1).as_dict()
    assert (c["C_const"], c["K"], c["Delta"], c["D"]) == (1.125, 48, 144, 283)


# -- thresholds -----------------------------------------------------------------


def test_threshold_examples():
    t1 = compute_thresholds(Z1T, 1, 0.25, 0.1)
    assert t1.s_prime == 1 and t1.s_star == 1
    assert t1.certified and t1.s_1 == max(t1.s_0, t1.s_star, t1.s_bang)
    t2 = compute_thresholds(CayleySpace(build_norm_table(Z2BOX, 40)), 2, 0.25, 0.1)
    assert t2.s_prime == 1


def test_threshold_geometries_agree():
    a = compute_thresholds(Z1T, 1, 0.25, 0.1)
    b = compute_thresholds(BoxSpace(1), 1, 0.25, 0.1)
    assert (a.s_prime, a.s_exp, a.s_star, a.s_bang) == (b.s_prime, b.s_exp, b.s_star, b.s_bang)


def test_thresholds_flag_uncertified():
    t = compute_thresholds(CayleySpace(build_norm_table(H, 20)), 4, 0.25, 0.1)
    assert not t.certified
    assert t.s_1 is None
    assert set(t.uncertified) <= {"s_prime", "s_exp", "s_star", "s_bang"}


# -- tower sandwich -------------------------------------------------------------


def _fill_instance():
    L = 48
    U = Tower.centered({(x,): [0] * (L + 1) for x in range(-5, 6)})
    V = Tower.centered({(x,): [0] * L + [5 if x == 0 else 0] for x in range(-5, 6)})
    return U, V


def test_sandwich_fill_witness():
    U, V = _fill_instance()
    with pytest.warns(UncertifiedWarning):
        out = verify_sandwich(U, V, 0.25, 1, BoxSpace(1))
    assert isinstance(out, FillWitness)
    assert out.ball == B(0, 5)
    assert check_delta_fill(out.ball, out.parts, 1.0, BoxSpace(1))
    assert check_delta_fill(out.ball, out.parts, 4 * Fraction(1, 4), BoxSpace(1))


def test_sandwich_growth_certificate():
    L = 48
    u, v = [], []
    r = 1
    for _ in range(L + 1):
        u.append(r)
        r *= 578
        v.append(r)
    U, V = Tower.centered({(0,): u}), Tower.centered({(0,): v})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UncertifiedWarning)
        out = verify_sandwich(U, V, 0.25, 1, BoxSpace(1))
    assert isinstance(out, GrowthCertificate)
    assert out.ratio >= 1 + Fraction(1, 36)
    assert out.union_u1 == 3


def test_sandwich_preconditions():
    with pytest.raises(PreconditionError, match="empty tower"):
        verify_sandwich(Tower({}), Tower({}), 0.25, 1, BoxSpace(1))
    short = Tower.centered({(0,): [1, 600]})
    with pytest.raises(PreconditionError) as err:
        verify_sandwich(short, Tower.centered({(0,): [578, 578 * 600]}), 0.25, 1, BoxSpace(1))
    assert "L=1" in str(err.value)


# -- serialization ---------------------------------------------------------------


def test_json_roundtrip():
    b = Ball((1, -2), Fraction(7, 2))
    assert ball_to_json(b) == {"center": [1, -2], "radius": "7/2"}
    assert ball_from_json(ball_to_json(b)) == b
    c = [B(0, 3), Ball((4,), 2.5)]
    assert list(collection_from_json(collection_to_json(c))) == c
    t = Tower.centered({(0,): [1, Fraction(10, 3)], (9,): [2, 7]})
    assert tower_from_json(tower_to_json(t)).chains == t.chains
