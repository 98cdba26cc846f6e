import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vucq.bonus import (BonusConfig, BonusInputs, baseline_bonus, bernstein_b1, bernstein_b1_kernel,
                        bernstein_b1_nb, big_l, combined_bonus, combined_nb, hoeffding_bonus,
                        hoeffding_nb, sigma_hat)

HOEF = BonusConfig(mode="hoeffding")
BERN = BonusConfig(mode="bernstein", beta=4)


def test_big_l_floor_and_log():
    cfg = BonusConfig(c3=1.0, delta=1 / math.e, t_budget=1)
    assert big_l(cfg, 1, 1, 1) == 1.0
    cfg = BonusConfig(c3=1.0, delta=math.exp(-3), t_budget=1)
    assert big_l(cfg, 1, 1, 1) == pytest.approx(3.0, abs=1e-12)
    assert big_l(BonusConfig(c3=0.01), 2, 2, 2) == 1.0


def test_big_l_monotone_in_t():
    vals = [big_l(BonusConfig(t_budget=t), 3, 2, 4) for t in (1, 10, 100, 10**6)]
    assert vals == sorted(vals)


def test_config_validation():
    for bad in (dict(beta=2), dict(delta=1.0), dict(delta=0.0), dict(mode="ucb"), dict(c0=0.0),
                dict(beta=3.5)):
        with pytest.raises(ValueError):
            BonusConfig(**bad)
    with pytest.raises(ValueError):
        BonusInputs(h=0, H=3, j=1, full_lv=0)
    with pytest.raises(ValueError):
        BonusInputs(h=1, H=3, j=1, full_lv=0, sigma_hat=-1.0)


def test_bucket_exponent_follows_mode():
    assert HOEF.bucket_exponent == 3
    assert BonusConfig(mode="bernstein", beta=6).bucket_exponent == 6


def test_hoeffding_examples():
    assert hoeffding_bonus(4.0, BonusInputs(h=3, H=3, j=2, full_lv=5)) == 0.0
    assert hoeffding_bonus(4.0, BonusInputs(h=1, H=3, j=2, full_lv=5)) == pytest.approx(1.0, abs=1e-15)
    assert hoeffding_bonus(4.0, BonusInputs(h=1, H=3, j=5, full_lv=2)) == pytest.approx(1.0, abs=1e-15)
    # unfilled pair: 2^0 in the denominator
    assert hoeffding_bonus(4.0, BonusInputs(h=1, H=3, j=3, full_lv=0)) == pytest.approx(2.0, abs=1e-15)


def test_sigma_hat_examples():
    assert sigma_hat([0.2, 0.3, 0.5], [1.7, 1.7, 1.7]) == 0.0
    assert sigma_hat([0.5, 0.5], [0.0, 2.0]) == pytest.approx(1.0, abs=1e-15)
    assert sigma_hat([0.0, 1.0, 0.0], [3.0, 1.0, 2.0]) == 0.0
    assert sigma_hat([0.0, 0.0], [3.0, 1.0]) == 0.0


def test_b1_examples():
    inp = BonusInputs(h=1, H=3, j=2, full_lv=2, sigma_hat=1.0)
    want = 0.25 + 0.5 + 0.5 + math.sqrt(2) / 4
    assert bernstein_b1(4.0, inp, beta=4) == pytest.approx(want, abs=1e-12)
    assert want == pytest.approx(1.6036, abs=1e-4)
    assert bernstein_b1(4.0, BonusInputs(h=3, H=3, j=2, full_lv=2, sigma_hat=0.0), beta=4) == 0.0
    with pytest.raises(ValueError):
        bernstein_b1(4.0, BonusInputs(h=1, H=3, j=2, full_lv=2), beta=4)


def test_combined_examples():
    inp = BonusInputs(h=1, H=3, j=2, full_lv=2, sigma_hat=1.0)
    assert combined_bonus(4.0, inp, BERN) == pytest.approx(1.0, abs=1e-15)
    assert combined_bonus(4.0, inp, HOEF) == pytest.approx(1.0, abs=1e-15)
    last = BonusInputs(h=3, H=3, j=2, full_lv=2, sigma_hat=2.0)
    assert combined_bonus(4.0, last, BERN) == 0.0 and combined_bonus(4.0, last, HOEF) == 0.0


def test_baseline_examples():
    assert baseline_bonus(4.0, 0, 3.0) == pytest.approx(6.0, abs=1e-15)
    assert baseline_bonus(1.0, 4, 2.0) == pytest.approx(1.0, abs=1e-15)
    assert baseline_bonus(7.0, 10, 0.0) == 0.0


inputs = st.integers(1, 60).flatmap(lambda H: st.tuples(
    st.floats(1, 100),
    st.builds(BonusInputs, h=st.integers(1, H), H=st.just(H), j=st.integers(1, 40),
              full_lv=st.integers(0, 40), sigma_hat=st.floats(0, float(H * H)))))


@given(inputs, st.integers(3, 8))
def test_bonus_properties(args, beta):
    L, inp = args
    cfg = BonusConfig(mode="bernstein", beta=beta)
    b = hoeffding_bonus(L, inp)
    b1 = bernstein_b1(L, inp, beta)
    c = combined_bonus(L, inp, cfg)
    for x in (b, b1, c):
        assert math.isfinite(x) and x >= 0
    assert c <= b
    if inp.h == inp.H:
        assert b == 0 and c == 0
        if inp.sigma_hat == 0:
            assert b1 == 0


@settings(deadline=None)
@given(inputs, st.integers(3, 8))
def test_numba_kernels_match_numpy(args, beta):
    L, inp = args
    rem, m = inp.H - inp.h, inp.level
    assert hoeffding_nb(L, rem, m) == pytest.approx(hoeffding_bonus(L, inp), rel=1e-14, abs=0)
    assert bernstein_b1_nb(L, rem, m, inp.sigma_hat, float(beta)) == pytest.approx(
        bernstein_b1(L, inp, beta), rel=1e-14, abs=0)
    cfg = BonusConfig(mode="bernstein", beta=beta)
    assert combined_nb(L, rem, m, inp.sigma_hat, float(beta), 1) == pytest.approx(
        combined_bonus(L, inp, cfg), rel=1e-14, abs=0)


@given(st.floats(1, 50), st.floats(0, 25), st.integers(3, 8))
def test_b1_monotone_in_l(L, sig, beta):
    lo = bernstein_b1_kernel(L, 3, 2, sig, beta)
    hi = bernstein_b1_kernel(L * 1.5, 3, 2, sig, beta)
    assert hi >= lo


@given(st.lists(st.floats(0, 1), min_size=2, max_size=8), st.data())
def test_sigma_hat_bounds(weights, data):
    w = np.array(weights) + 1e-9
    p = w / w.sum()
    v = np.array(data.draw(st.lists(st.floats(0, 10), min_size=len(p), max_size=len(p))))
    s = sigma_hat(p, v)
    assert 0 <= s <= np.max(v) ** 2 + 1e-12
