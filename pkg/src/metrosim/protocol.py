"""The interferometer protocol as composable pipeline steps.

The pipeline prepares a spin-conditioned two-mode entangled state, couples
each oscillator mode to its own vacuum environment mode through a beam
splitter (the particle-loss model), encodes the phase with the two-mode
rotation generator, undoes the spin-oscillator entanglement with the inverse
phase gate, and reads the spin out after a pi/2 pulse.

Mode layout for lossy states: (a, b, env_a, env_b) = indices (0, 1, 2, 3).

Sign conventions (fixed here, used consistently everywhere):

* preparation beam-splitter pulse: exp(-i pi/2 * J_y);
* phase gate C = exp(+i pi/2 * n_a * sigma_z), disentangling gate C^dag.

With these signs the prepared branches are proportional to
(a^dag + i b^dag)^N |vac>|down> and (-1)^N (a^dag - i b^dag)^N |vac>|up>,
and the lossless readout fringe is P_down = (1 + cos(N*theta))/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import (
    HybridState,
    SpinDensity,
    basis_state,
    beam_splitter_generator,
    build_basis,
    evolve_bilinear,
    j_y,
    number_op,
    reduce_to_spin,
    spin_conditional_evolve,
    spin_populations,
    spin_rotation,
)

MODE_A, MODE_B, ENV_A, ENV_B = 0, 1, 2, 3


@dataclass(frozen=True)
class LossConfig:
    """Loss rates of the two system modes.

    A rate R is the beam-splitter reflection probability into the environment
    mode; the beam-splitter angle is eta = arcsin(sqrt(R)), so the transmitted
    amplitude is sqrt(1 - R).
    """

    r_a: float = 0.0
    r_b: float = 0.0

    def __post_init__(self) -> None:
        for name, rate in (("r_a", self.r_a), ("r_b", self.r_b)):
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"loss rate {name}={rate} outside [0, 1]")

    @property
    def eta_a(self) -> float:
        return math.asin(math.sqrt(self.r_a))

    @property
    def eta_b(self) -> float:
        return math.asin(math.sqrt(self.r_b))

    @property
    def lossless(self) -> bool:
        return self.r_a == 0.0 and self.r_b == 0.0


@dataclass(frozen=True)
class ProtocolResult:
    """One complete run: the pre-readout state plus everything measured from it.

    `final_state` is the 4-mode state after the disentangling gate and before
    the readout pulse; `spin_density` is its reduced spin state (the fringe
    contrast is ``spin_density.coherence``); `populations` is (P_down, P_up)
    after the readout pulse.
    """

    final_state: HybridState
    spin_density: SpinDensity
    populations: tuple[float, float]
    theta: float
    loss: LossConfig
    n: int


def prepare_noon_like(n: int) -> HybridState:
    """Spin-conditioned NOON-like input on two modes.

    The |N,0>|+> product is split by the exp(-i pi/2 J_y) pulse and entangled
    with the spin by the phase gate; each spin branch carries all N quanta in
    one of the two circular superposition modes (a^dag +/- i b^dag)/sqrt(2).
    """
    if n < 0:
        raise ValueError(f"excitation number must be non-negative, got {n}")
    basis = build_basis(2, n)
    state = basis_state(basis, (n, 0), "plus")
    state = evolve_bilinear(state, j_y(2), -math.pi / 2.0)
    return spin_conditional_evolve(state, number_op(2, MODE_A), math.pi / 2.0)


def embed_with_environment(state: HybridState) -> HybridState:
    """Tensor two vacuum environment modes: (n_a, n_b) -> (n_a, n_b, 0, 0)."""
    if state.basis.modes != 2:
        raise ValueError(f"expected a 2-mode state, got {state.basis.modes} modes")
    basis4 = build_basis(4, state.basis.total)
    amps = np.zeros(2 * basis4.size, dtype=np.complex128)
    for k, occ in enumerate(state.basis.states):
        t = basis4.index[occ + (0, 0)]
        amps[t] = state.down[k]
        amps[basis4.size + t] = state.up[k]
    return HybridState(basis4, amps)


def apply_loss(state: HybridState, loss: LossConfig) -> HybridState:
    """Beam-splitter loss on each system mode toward its environment mode.

    Unitary on the 4-mode sector; with rate R the single-excitation action is
    |1_k> -> sqrt(1-R)|1_k> - sqrt(R)|1_env>.  The two couplings act on
    disjoint mode pairs and commute.
    """
    if state.basis.modes != 4:
        raise ValueError("loss expects the 4-mode layout (a, b, env_a, env_b)")
    out = state
    if loss.r_a:
        out = evolve_bilinear(out, beam_splitter_generator(4, MODE_A, ENV_A), loss.eta_a)
    if loss.r_b:
        out = evolve_bilinear(out, beam_splitter_generator(4, MODE_B, ENV_B), loss.eta_b)
    return out


def encode_phase(state: HybridState, theta: float) -> HybridState:
    """exp(i theta J_y) on the system modes (identity on any environment modes)."""
    return evolve_bilinear(state, j_y(state.basis.modes, (MODE_A, MODE_B)), theta)


def disentangle(state: HybridState) -> HybridState:
    """Inverse phase gate exp(-i pi/2 * n_a * sigma_z).

    For the lossless pipeline the output factorizes: the two spin-branch
    oscillator states coincide up to a phase, so the spin carries the whole
    signal.
    """
    return spin_conditional_evolve(state, number_op(state.basis.modes, MODE_A), -math.pi / 2.0)


def readout(state: HybridState) -> tuple[float, float]:
    """pi/2 pulse about y, then spin populations.

    The pulse axis is fixed so that P_down = (1 + Re coherence)/2; for the
    lossless protocol this is exactly (1 + cos(N*theta))/2.
    """
    return spin_populations(spin_rotation(state, "y", math.pi / 2.0))


def full_protocol(n: int, theta: float, loss: LossConfig = LossConfig()) -> ProtocolResult:
    """prepare -> embed -> loss -> phase -> disentangle, then measure."""
    state = prepare_noon_like(n)
    state = embed_with_environment(state)
    state = apply_loss(state, loss)
    state = encode_phase(state, theta)
    state = disentangle(state)
    rho = reduce_to_spin(state)
    populations = readout(state)
    return ProtocolResult(
        final_state=state,
        spin_density=rho,
        populations=populations,
        theta=theta,
        loss=loss,
        n=n,
    )
