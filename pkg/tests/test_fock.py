import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from metrosim.fock import (
    BilinearGenerator,
    HybridState,
    basis_state,
    beam_splitter_generator,
    build_basis,
    evolve_bilinear,
    expectation_and_variance,
    j_y,
    number_op,
    reduce_to_spin,
    spin_conditional_evolve,
    spin_populations,
    spin_rotation,
)
from metrosim.protocol import encode_phase, prepare_noon_like


# ---------------------------------------------------------------- strategies

def random_state(basis, rng):
    amps = rng.standard_normal(2 * basis.size) + 1j * rng.standard_normal(2 * basis.size)
    return HybridState(basis, amps / np.linalg.norm(amps))


def random_generator(modes, rng):
    x = rng.standard_normal((modes, modes)) + 1j * rng.standard_normal((modes, modes))
    return BilinearGenerator((x + x.conj().T) / 2)


small_sector = st.tuples(st.integers(1, 3), st.integers(0, 4))
angles = st.floats(-6.5, 6.5, allow_nan=False)
seeds = st.integers(0, 2**32 - 1)


# --------------------------------------------------------------------- basis

def test_build_basis_vacuum():
    basis = build_basis(2, 0)
    assert basis.states == ((0, 0),)
    assert basis.size == 1


def test_build_basis_two_modes_two_quanta():
    basis = build_basis(2, 2)
    assert basis.states == ((2, 0), (1, 1), (0, 2))


def test_build_basis_size_matches_brute_force_count():
    # independent count of all 4-tuples of non-negative integers summing to 25
    count = sum(
        1
        for na in range(26)
        for nb in range(26 - na)
        for nc in range(26 - na - nb)
    )
    basis = build_basis(4, 25)
    assert basis.size == count == 3276 == math.comb(28, 3)


def test_build_basis_rejects_zero_modes():
    with pytest.raises(ValueError):
        build_basis(0, 3)


@given(small_sector)
def test_build_basis_is_complete_and_ordered(mn):
    modes, total = mn
    basis = build_basis(modes, total)
    assert len(set(basis.states)) == basis.size == math.comb(total + modes - 1, modes - 1)
    assert all(sum(occ) == total for occ in basis.states)
    assert list(basis.states) == sorted(basis.states, reverse=True)
    assert all(basis.index[occ] == k for k, occ in enumerate(basis.states))


def test_build_basis_is_interned():
    assert build_basis(3, 2) is build_basis(3, 2)


# --------------------------------------------------------------- basis_state

def test_basis_state_down():
    basis = build_basis(2, 1)
    s = basis_state(basis, (1, 0), "down")
    assert s.down[basis.index[(1, 0)]] == 1.0
    assert np.all(s.up == 0)


def test_basis_state_plus():
    basis = build_basis(2, 2)
    s = basis_state(basis, (2, 0), "plus")
    k = basis.index[(2, 0)]
    assert s.down[k] == pytest.approx(1 / math.sqrt(2))
    assert s.up[k] == pytest.approx(1 / math.sqrt(2))
    assert s.norm() == pytest.approx(1.0)


def test_basis_state_rejects_wrong_sector():
    with pytest.raises(ValueError):
        basis_state(build_basis(2, 1), (1, 1), "up")


# ------------------------------------------------------------------ evolving

def test_evolve_zero_angle_is_identity():
    basis = build_basis(2, 3)
    s = basis_state(basis, (2, 1), "plus")
    assert evolve_bilinear(s, j_y(2), 0.0) is s


def test_evolve_jy_half_turn_on_single_excitation():
    # one-excitation block of J_y is sigma_y/2; exp(i*theta*sigma_y/2) applied
    # to (1, 0) gives (cos(theta/2), -sin(theta/2))
    basis = build_basis(2, 1)
    s = basis_state(basis, (1, 0), "down")
    out = evolve_bilinear(s, j_y(2), math.pi / 2)
    expected = np.array([math.cos(math.pi / 4), -math.sin(math.pi / 4)])
    assert np.allclose(out.down, expected, atol=1e-12)


def test_evolve_rejects_dimension_mismatch():
    s = basis_state(build_basis(3, 1), (1, 0, 0), "down")
    with pytest.raises(ValueError):
        evolve_bilinear(s, j_y(2), 0.3)


def test_non_hermitian_generator_rejected():
    with pytest.raises(ValueError):
        BilinearGenerator(np.array([[0.0, 1.0], [0.5, 0.0]]))


@given(small_sector, angles, seeds)
def test_evolve_preserves_norm(mn, theta, seed):
    modes, total = mn
    rng = np.random.default_rng(seed)
    basis = build_basis(modes, total)
    s = random_state(basis, rng)
    out = evolve_bilinear(s, random_generator(modes, rng), theta)
    assert out.norm() == pytest.approx(1.0, abs=1e-10)
    assert out.basis is basis  # number conservation is structural


@given(small_sector, angles, angles, seeds)
def test_evolve_composes_additively(mn, t1, t2, seed):
    modes, total = mn
    rng = np.random.default_rng(seed)
    basis = build_basis(modes, total)
    s = random_state(basis, rng)
    gen = random_generator(modes, rng)
    once = evolve_bilinear(s, gen, t1 + t2)
    twice = evolve_bilinear(evolve_bilinear(s, gen, t1), gen, t2)
    assert np.max(np.abs(once.amplitudes - twice.amplitudes)) < 1e-9


def test_spin_conditional_diagonal_phases():
    basis = build_basis(2, 1)
    s = basis_state(basis, (1, 0), "plus")
    out = spin_conditional_evolve(s, number_op(2, 0), math.pi / 2)
    k = basis.index[(1, 0)]
    assert out.down[k] == pytest.approx(np.exp(-1j * math.pi / 2) / math.sqrt(2))
    assert out.up[k] == pytest.approx(np.exp(1j * math.pi / 2) / math.sqrt(2))


@given(angles, seeds)
def test_spin_conditional_inverse_roundtrip(theta, seed):
    rng = np.random.default_rng(seed)
    basis = build_basis(2, 3)
    s = random_state(basis, rng)
    gen = random_generator(2, rng)
    back = spin_conditional_evolve(spin_conditional_evolve(s, gen, theta), gen, -theta)
    assert np.max(np.abs(back.amplitudes - s.amplitudes)) < 1e-12


# ------------------------------------------------------------ spin rotations

def test_spin_rotation_zero_angle():
    s = basis_state(build_basis(2, 1), (0, 1), "plus")
    out = spin_rotation(s, "x", 0.0)
    assert np.allclose(out.amplitudes, s.amplitudes)


def test_spin_rotation_y_convention():
    # exp(-i pi/4 sigma_y)|down> = (|down> - |up>)/sqrt(2) in our ordering
    basis = build_basis(2, 1)
    s = basis_state(basis, (1, 0), "down")
    out = spin_rotation(s, "y", math.pi / 2)
    k = basis.index[(1, 0)]
    assert out.down[k] == pytest.approx(1 / math.sqrt(2))
    assert out.up[k] == pytest.approx(-1 / math.sqrt(2))


def test_two_pi_rotations_change_only_global_phase():
    basis = build_basis(2, 2)
    rng = np.random.default_rng(7)
    s = random_state(basis, rng)
    out = spin_rotation(spin_rotation(s, "x", math.pi), "x", math.pi)
    assert abs(abs(s.overlap(out)) - 1.0) < 1e-12
    assert spin_populations(out) == pytest.approx(spin_populations(s))


def test_spin_rotation_rejects_unknown_axis():
    s = basis_state(build_basis(2, 1), (1, 0), "down")
    with pytest.raises(ValueError):
        spin_rotation(s, "z", 0.1)


# ----------------------------------------------------------------etc. / rho

def test_spin_populations_basic():
    basis = build_basis(2, 3)
    assert spin_populations(basis_state(basis, (3, 0), "down")) == (1.0, 0.0)
    p = spin_populations(basis_state(basis, (3, 0), "plus"))
    assert p == pytest.approx((0.5, 0.5))


def test_spin_populations_rejects_unnormalized():
    basis = build_basis(2, 1)
    bad = HybridState(basis, np.array([0.5, 0, 0, 0], dtype=complex))
    with pytest.raises(ValueError):
        spin_populations(bad)


def test_full_protocol_population_matches_cosine():
    from metrosim.protocol import full_protocol

    res = full_protocol(4, 0.3)
    assert res.populations[0] == pytest.approx(0.5 * (1 + math.cos(1.2)), abs=1e-12)


def test_reduce_to_spin_product_state():
    rho = reduce_to_spin(basis_state(build_basis(2, 2), (1, 1), "plus"))
    assert rho.rho01 == pytest.approx(0.5)
    assert rho.rho00 == pytest.approx(0.5)


def test_reduce_to_spin_orthogonal_branches_maximally_mixed():
    basis = build_basis(2, 1)
    amps = np.zeros(4, dtype=complex)
    amps[basis.index[(1, 0)]] = 1 / math.sqrt(2)            # |1,0>|down>
    amps[basis.size + basis.index[(0, 1)]] = 1 / math.sqrt(2)  # |0,1>|up>
    rho = reduce_to_spin(HybridState(basis, amps))
    assert np.allclose(rho.rho, np.eye(2) / 2, atol=1e-12)


@given(seeds)
def test_reduce_to_spin_of_product_is_rank_one(seed):
    rng = np.random.default_rng(seed)
    basis = build_basis(2, 3)
    osc = rng.standard_normal(basis.size) + 1j * rng.standard_normal(basis.size)
    osc /= np.linalg.norm(osc)
    spin = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    spin /= np.linalg.norm(spin)
    state = HybridState(basis, np.concatenate([spin[0] * osc, spin[1] * osc]))
    eigs = np.linalg.eigvalsh(reduce_to_spin(state).rho)
    assert eigs[0] == pytest.approx(0.0, abs=1e-12)
    assert eigs[1] == pytest.approx(1.0, abs=1e-12)


# -------------------------------------------------------------- expectations

def test_expectation_number_eigenstate():
    basis = build_basis(2, 5)
    mean, var = expectation_and_variance(basis_state(basis, (5, 0), "down"), number_op(2, 0))
    assert mean == pytest.approx(5.0, abs=1e-12)
    assert var == pytest.approx(0.0, abs=1e-12)


def test_expectation_jy_single_excitation():
    basis = build_basis(2, 1)
    mean, var = expectation_and_variance(basis_state(basis, (1, 0), "down"), j_y(2))
    assert mean == pytest.approx(0.0, abs=1e-12)
    assert var == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("n", range(1, 11))
def test_jy_variance_heisenberg_scaling(n):
    state = encode_phase(prepare_noon_like(n), 0.7)
    _, var = expectation_and_variance(state, j_y(2))
    assert 4 * var == pytest.approx(n * n, abs=1e-9)


def test_beam_splitter_generator_is_hermitian_and_cached():
    gen = beam_splitter_generator(4, 0, 2)
    assert gen is beam_splitter_generator(4, 0, 2)
    assert np.allclose(gen.h, gen.h.conj().T)
