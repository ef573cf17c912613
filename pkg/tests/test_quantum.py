"""Quantum-core tests: frozen oracle values plus randomized invariants.

Derived expectations are computed by an independent brute-force oracle
(explicit 4x4 projector matrices via Kronecker products) rather than by
the code under test.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flashlab.quantum import (
    NormalizationError,
    Outcome,
    PureState,
    Setting,
    SettingPair,
    ZeroProbabilityError,
    born_conditional,
    born_joint,
    born_marginal,
    chsh_value,
    collapse,
    correlator,
    eigenvector,
    random_pure_state,
    singlet,
)

CELLS = ((1, 1), (1, -1), (-1, 1), (-1, -1))
SQRT2 = math.sqrt(2.0)


def kron_joint(psi: np.ndarray, a: float, b: float) -> dict:
    """Brute-force Born probabilities by full projector contraction."""
    out = {}
    for alpha in (1, -1):
        for beta in (1, -1):
            va, vb = eigenvector(a, alpha), eigenvector(b, beta)
            proj = np.kron(np.outer(va, va), np.outer(vb, vb))
            out[(alpha, beta)] = float(np.real(np.conj(psi) @ proj @ psi))
    return out


def test_singlet_amplitudes():
    amps = singlet().amplitudes
    assert amps == pytest.approx([0.0, 1 / SQRT2, -1 / SQRT2, 0.0])
    assert singlet().norm() == pytest.approx(1.0, abs=1e-12)


def test_joint_equal_settings_anticorrelated():
    joint = born_joint(singlet(), SettingPair(0.0, 0.0))
    assert joint[(1, 1)] == pytest.approx(0.0, abs=1e-12)
    assert joint[(-1, -1)] == pytest.approx(0.0, abs=1e-12)
    assert joint[(1, -1)] == pytest.approx(0.5, abs=1e-12)
    assert joint[(-1, 1)] == pytest.approx(0.5, abs=1e-12)


def test_joint_opposite_settings_correlated():
    joint = born_joint(singlet(), SettingPair(0.0, math.pi))
    assert joint[(1, 1)] == pytest.approx(0.5, abs=1e-12)
    assert joint[(1, -1)] == pytest.approx(0.0, abs=1e-12)


def test_joint_pi_third():
    # frozen from the kron-projector oracle: (1/2) sin^2(pi/6) = 1/8
    joint = born_joint(singlet(), SettingPair(0.0, math.pi / 3))
    assert joint[(1, 1)] == pytest.approx(0.125, abs=1e-12)
    oracle = kron_joint(singlet().amplitudes, 0.0, math.pi / 3)
    for cell in CELLS:
        assert joint[cell] == pytest.approx(oracle[cell], abs=1e-12)


def test_joint_rejects_unnormalized_state():
    with pytest.raises(NormalizationError):
        PureState(np.array([1.0, 1.0, 0.0, 0.0]))


def test_marginals_singlet_maximally_mixed():
    assert born_marginal(singlet(), "A", 0.0) == pytest.approx((0.5, 0.5), abs=1e-12)
    assert born_marginal(singlet(), "B", 1.234) == pytest.approx((0.5, 0.5), abs=1e-12)


def test_marginal_of_collapsed_state():
    collapsed = collapse(singlet(), "A", 0.0, +1)
    assert born_marginal(collapsed, "B", 0.0) == pytest.approx((0.0, 1.0), abs=1e-12)
    assert born_marginal(collapsed, "A", 0.0) == pytest.approx((1.0, 0.0), abs=1e-12)


def test_conditional_singlet():
    pair = SettingPair(0.0, 0.0)
    assert born_conditional(singlet(), pair, "A", +1) == pytest.approx((0.0, 1.0), abs=1e-12)
    pair = SettingPair(0.0, math.pi / 3)
    cond = born_conditional(singlet(), pair, "A", +1)
    assert cond[0] == pytest.approx(0.25, abs=1e-12)  # (1/8) / (1/2)


def test_conditional_zero_probability_errors():
    state = PureState(np.array([1.0, 0.0, 0.0, 0.0]))  # |++> in z
    with pytest.raises(ZeroProbabilityError):
        born_conditional(state, SettingPair(0.0, 0.0), "A", -1)


def test_collapse_idempotent():
    once = collapse(singlet(), "A", 0.7, +1)
    twice = collapse(once, "A", 0.7, +1)
    np.testing.assert_allclose(once.amplitudes, twice.amplitudes, atol=1e-12)


def test_collapse_zero_probability_errors():
    state = PureState(np.array([1.0, 0.0, 0.0, 0.0]))
    with pytest.raises(ZeroProbabilityError):
        collapse(state, "A", 0.0, -1)


def test_collapse_epsilon_keeps_floor():
    soft = collapse(singlet(), "A", 0.0, +1, epsilon=0.05)
    assert soft.norm() == pytest.approx(1.0, abs=1e-12)
    p_plus, p_minus = born_marginal(soft, "A", 0.0)
    assert p_minus > 0.0  # the other channel is nearly, not exactly, zero
    assert p_plus > 0.99


def test_correlator_values():
    assert correlator(singlet(), SettingPair(0.0, 0.0)) == pytest.approx(-1.0, abs=1e-12)
    assert correlator(singlet(), SettingPair(0.0, math.pi / 2)) == pytest.approx(0.0, abs=1e-12)
    assert correlator(singlet(), SettingPair(0.0, math.pi)) == pytest.approx(1.0, abs=1e-12)


def test_chsh_tsirelson_angles():
    s = chsh_value(singlet(), 0.0, math.pi / 2, math.pi / 4, 3 * math.pi / 4)
    assert s == pytest.approx(-2.0 * SQRT2, abs=1e-12)


def test_chsh_degenerate_settings():
    assert chsh_value(singlet(), 0.0, 0.0, 0.0, 0.0) == pytest.approx(-2.0, abs=1e-12)


def test_chsh_product_state_local_bound():
    plus_plus = PureState(np.array([1.0, 0.0, 0.0, 0.0]))
    s = chsh_value(plus_plus, 0.0, math.pi / 2, math.pi / 4, 3 * math.pi / 4)
    assert abs(s) <= 2.0 + 1e-12


def test_setting_normalized():
    assert Setting(2 * math.pi + 0.5).angle == pytest.approx(0.5)
    assert Setting(-0.5).angle == pytest.approx(2 * math.pi - 0.5)


def test_outcome_validation():
    with pytest.raises(ValueError):
        Outcome(0, 1)
    with pytest.raises(ValueError):
        Outcome(1, 2)


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_probability_simplex_random_states(seed):
    rng = np.random.default_rng(seed)
    state = random_pure_state(rng)
    pair = SettingPair(rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi))
    joint = born_joint(state, pair)
    assert all(p >= -1e-15 for p in joint.values())
    assert sum(joint.values()) == pytest.approx(1.0, abs=1e-12)
    for side in ("A", "B"):
        marg = born_marginal(state, side, rng.uniform(0, 2 * math.pi))
        assert sum(marg) == pytest.approx(1.0, abs=1e-12)


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_chain_rule_random_states(seed):
    rng = np.random.default_rng(seed)
    state = random_pure_state(rng)
    pair = SettingPair(rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi))
    joint = born_joint(state, pair)
    marg = born_marginal(state, "A", pair.a)
    for alpha, p_alpha in zip((1, -1), marg):
        if p_alpha < 1e-9:
            continue
        cond = born_conditional(state, pair, "A", alpha)
        for beta, p_beta in zip((1, -1), cond):
            assert joint[(alpha, beta)] == pytest.approx(p_alpha * p_beta, abs=1e-12)


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_conditioning_symmetry(seed):
    # conditioning through A then reading B reproduces the same joint as
    # conditioning through B then reading A
    rng = np.random.default_rng(seed)
    state = random_pure_state(rng)
    pair = SettingPair(rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi))
    joint = born_joint(state, pair)
    marg_a = born_marginal(state, "A", pair.a)
    marg_b = born_marginal(state, "B", pair.b)
    for (alpha, beta), p in joint.items():
        p_a = marg_a[0 if alpha == 1 else 1]
        p_b = marg_b[0 if beta == 1 else 1]
        if p_a > 1e-9:
            via_a = p_a * born_conditional(state, pair, "A", alpha)[0 if beta == 1 else 1]
            assert via_a == pytest.approx(p, abs=1e-12)
        if p_b > 1e-9:
            via_b = p_b * born_conditional(state, pair, "B", beta)[0 if alpha == 1 else 1]
            assert via_b == pytest.approx(p, abs=1e-12)


def test_tsirelson_bound_random_sweep():
    rng = np.random.default_rng(20260810)
    bound = 2.0 * SQRT2 + 1e-9
    for _ in range(1000):
        state = random_pure_state(rng)
        angles = rng.uniform(0, 2 * math.pi, size=4)
        assert abs(chsh_value(state, *angles)) <= bound


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_collapse_consistency(seed):
    # conditional probabilities equal the collapsed state's marginal
    rng = np.random.default_rng(seed)
    state = random_pure_state(rng)
    pair = SettingPair(rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi))
    marg = born_marginal(state, "A", pair.a)
    for alpha, p_alpha in zip((1, -1), marg):
        if p_alpha < 1e-9:
            continue
        cond = born_conditional(state, pair, "A", alpha)
        collapsed = collapse(state, "A", pair.a, alpha)
        assert collapsed.norm() == pytest.approx(1.0, abs=1e-12)
        got = born_marginal(collapsed, "B", pair.b)
        assert got == pytest.approx(cond, abs=1e-12)
