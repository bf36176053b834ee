"""State algebra: cat normalizations, Bell basis, gates, decay channel."""

import math

import numpy as np
import pytest

from catparity import (
    BELL_KET,
    BELL_ORDER,
    GATES,
    CatParams,
    ConfigError,
    DecayParams,
    amplitude_damp,
    apply_unitary,
    bell_diagonal,
    check_density,
    density,
    fidelity,
    initial_density,
    norm_const,
    random_density,
)

# Independently derived with 50-digit arithmetic.
NORM_FROZEN = [
    (1.0, +1, 1.5068744362000522649),
    (1.0, -1, 1.3150397079657992655),
    (2.0, +1, 1.4271059097969808213),
]


@pytest.mark.parametrize("beta2,sign,expected", NORM_FROZEN)
def test_norm_const_frozen(beta2, sign, expected):
    assert math.isclose(norm_const(beta2, sign), expected, rel_tol=1e-14)


@pytest.mark.parametrize("beta2", [0.0, 0.3, 1.7, 9.0])
def test_norm_const_identity(beta2):
    w = math.exp(-2.0 * beta2)
    assert math.isclose(norm_const(beta2, +1) ** 2, 2.0 + 2.0 * w, rel_tol=1e-14)
    assert math.isclose(norm_const(beta2, -1) ** 2, 2.0 - 2.0 * w, rel_tol=1e-12, abs_tol=1e-300)


def test_norm_const_edge_and_signs():
    assert norm_const(0.0, -1) == 0.0
    assert norm_const(0.0, +1) == 2.0
    assert norm_const(1.0, "+") == norm_const(1.0, 1)
    assert norm_const(1.0, "odd") == norm_const(1.0, -1)
    with pytest.raises(ConfigError):
        norm_const(-1.0, +1)
    with pytest.raises(ConfigError):
        norm_const(1.0, 0)


@pytest.mark.parametrize("alpha2,eta", [(-0.5, 0.5), (math.inf, 0.5), (1.0, -0.1), (1.0, 1.5)])
def test_cat_params_rejects(alpha2, eta):
    with pytest.raises(ConfigError):
        CatParams(alpha2=alpha2, eta=eta)


def test_decay_params_gamma():
    d = DecayParams(t1_ratio=3000.0)
    assert math.isclose(d.gamma, 0.00033327778395010291495, rel_tol=1e-14)
    # explicit gamma must agree with the derived value
    DecayParams(t1_ratio=3000.0, gamma=d.gamma)
    with pytest.raises(ConfigError):
        DecayParams(t1_ratio=3000.0, gamma=0.5)
    with pytest.raises(ConfigError):
        DecayParams(t1_ratio=0.0)


def test_bell_kets_orthonormal():
    kets = np.stack([BELL_KET[name] for name in BELL_ORDER])
    gram = kets @ kets.conj().T
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-15)


def test_density_and_fidelity_roundtrip():
    for name in BELL_ORDER:
        rho = density(BELL_KET[name])
        check_density(rho)
        for other in BELL_ORDER:
            expected = 1.0 if other == name else 0.0
            assert abs(fidelity(rho, BELL_KET[other]) - expected) < 1e-14


def test_check_density_rejects_bad_inputs():
    with pytest.raises(ConfigError):
        check_density(np.eye(4, dtype=complex))  # trace 4
    bad = np.diag([1.2, -0.2, 0.0, 0.0]).astype(complex)
    with pytest.raises(ConfigError):
        check_density(bad)
    skew = np.diag([0.5, 0.5, 0.0, 0.0]).astype(complex)
    skew[0, 1] = 1j
    with pytest.raises(ConfigError):
        check_density(skew)


def test_gates_unitary():
    for u in GATES.values():
        np.testing.assert_allclose(u @ u.conj().T, np.eye(4), atol=1e-15)


# Density-level action of each pulse on the Bell populations
# (ordered bell_e_plus, bell_e_minus, bell_o_plus, bell_o_minus).
GATE_PERMS = [
    ("X_A_pi", (2, 3, 0, 1)),
    ("Z_A_pi", (1, 0, 3, 2)),
    ("Y_both_halfpi", (0, 2, 1, 3)),
]


@pytest.mark.parametrize("gate,perm", GATE_PERMS)
def test_gate_bell_permutation(gate, perm):
    for i, name in enumerate(BELL_ORDER):
        out = apply_unitary(density(BELL_KET[name]), GATES[gate])
        pops = bell_diagonal(out)
        expected = np.zeros(4)
        expected[perm.index(i)] = 1.0
        np.testing.assert_allclose(pops, expected, atol=1e-14)


def test_amplitude_damp_populations():
    gamma = 0.2
    rho = np.diag([0.0, 0.0, 0.0, 1.0]).astype(complex)
    out = amplitude_damp(rho, gamma)
    expected = [gamma**2, gamma * (1 - gamma), (1 - gamma) * gamma, (1 - gamma) ** 2]
    np.testing.assert_allclose(np.real(np.diag(out)), expected, atol=1e-15)
    assert math.isclose(np.trace(out).real, 1.0, rel_tol=1e-14)


def test_amplitude_damp_bell_fidelity_frozen():
    gamma = DecayParams(t1_ratio=3000.0).gamma
    rho = amplitude_damp(initial_density("bell_e_plus"), gamma)
    f = fidelity(rho, BELL_KET["bell_e_plus"])
    assert math.isclose(f, 0.99966677775309053443, rel_tol=1e-13)


def test_amplitude_damp_preserves_trace_on_random_states():
    rng = np.random.default_rng(3)
    for _ in range(20):
        rho = random_density(rng)
        out = amplitude_damp(rho, 0.07)
        assert abs(np.trace(out).real - 1.0) < 1e-12
        check_density(out)


def test_bell_diagonal_sums_to_one():
    rng = np.random.default_rng(11)
    for _ in range(10):
        pops = bell_diagonal(random_density(rng))
        assert abs(pops.sum() - 1.0) < 1e-12
        assert np.all(pops >= -1e-15)


def test_initial_density_names():
    rho = initial_density("plus_x_plus_x")
    np.testing.assert_allclose(rho, np.full((4, 4), 0.25), atol=1e-15)
    for name in BELL_ORDER:
        np.testing.assert_allclose(initial_density(name), density(BELL_KET[name]), atol=1e-15)
    with pytest.raises(ConfigError):
        initial_density("bell_x_plus")


def test_random_density_seeded():
    a = random_density(np.random.default_rng(5))
    b = random_density(np.random.default_rng(5))
    np.testing.assert_array_equal(a, b)
    check_density(a)
