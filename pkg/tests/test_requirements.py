import math

import pytest
from hypothesis import given, strategies as st

from rampuc.requirements import compute_alpha, compute_requirements, error_sigma, study_requirements
from rampuc.system import InvariantError, NetLoadForecast, StudyConfig, net_load

TOY_BLOCKS = [
    ((690, 660, 640, 620), (0, 10, 10), (60, 50, 50)),
    ((660, 640, 620, 590), (10, 10, 0), (50, 50, 60)),
    ((665, 620, 590, 570), (0, 0, 10), (75, 60, 50)),
]


@pytest.mark.parametrize("nl, up, dn", TOY_BLOCKS)
def test_toy_blocks_exact(nl, up, dn):
    req = compute_requirements(nl, 30)
    assert req.upward == tuple(float(v) for v in up)
    assert req.downward == tuple(float(v) for v in dn)


def test_study_requirements_use_fixed_sigma(toy):
    req = study_requirements(toy.forecast, toy.config)
    assert req.alpha == (30.0, 30.0, 30.0)
    assert req.upward == (0.0, 10.0, 10.0)


def test_alpha_combines_demand_and_wind_errors():
    # sigma = hypot(1% of 4000, 4% of 3000) = hypot(40, 120)
    assert compute_alpha([4000], 3000, 3.0) == pytest.approx((3 * math.hypot(40, 120),))


def test_alpha_for_transition_uses_next_period_sigma():
    fc = net_load([1000, 2000, 3000], [0, 0, 0])
    cfg = StudyConfig(installed_wind=0.0, alpha_multiplier=1.0)
    assert error_sigma(fc, cfg) == pytest.approx((10.0, 20.0, 30.0))
    assert study_requirements(fc, cfg).alpha == pytest.approx((20.0, 30.0))


def test_rejects_short_alpha_and_negative():
    with pytest.raises(InvariantError):
        compute_requirements([1, 2, 3], [1.0])
    with pytest.raises(InvariantError):
        compute_requirements([1, 2, 3], -1.0)
    with pytest.raises(InvariantError):
        NetLoadForecast((1.0,))


loads = st.lists(st.floats(0, 1e4, allow_nan=False), min_size=2, max_size=12)


@given(loads, st.floats(0, 500))
def test_requirements_properties(nl, alpha):
    req = compute_requirements(nl, alpha)
    for t, (u, d) in enumerate(zip(req.upward, req.downward)):
        delta = nl[t + 1] - nl[t]
        assert u >= 0 and d >= 0
        assert u + d >= 2 * alpha - 1e-9
        if abs(delta) <= alpha:
            assert u - d == pytest.approx(2 * delta, abs=1e-6)
        # independent restatement of the rule
        assert u == max(delta + alpha, 0.0)
        assert d == max(-delta + alpha, 0.0)


@given(loads, st.floats(0, 100), st.floats(0, 100))
def test_requirements_monotone_in_alpha(nl, a, b):
    lo, hi = sorted((a, b))
    r1, r2 = compute_requirements(nl, lo), compute_requirements(nl, hi)
    assert all(x <= y for x, y in zip(r1.upward, r2.upward))
    assert all(x <= y for x, y in zip(r1.downward, r2.downward))
