"""Exact state-vector algebra on number-conserving Fock sectors with a spin-1/2 factor.

Everything in this module lives on the subspace of fixed total excitation
number N shared by m bosonic modes, tensored with a single spin-1/2.  All
gates used by the interferometer (beam splitters, number phases, the
two-mode rotation generators) conserve the total excitation number, so the
sector restriction is lossless and keeps states small: a sector holds
binomial(N+m-1, m-1) occupation tuples per spin branch instead of a
truncated product space.  Number conservation is structural -- amplitudes
outside the sector are not representable.

Conventions, fixed package-wide:

* occupation tuples are enumerated in descending lexicographic order;
* hybrid amplitudes form one complex vector, spin-down block first;
* ``|up>`` is the sigma_z eigenstate with eigenvalue +1;
* ``spin_rotation`` applies ``exp(-i*angle/2 * sigma_axis)``;
* global phase carries no meaning -- compare states via :meth:`HybridState.overlap`.

Sectors above N = 60 are out of scope (sizes explode and nothing in the
protocol needs them).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from types import MappingProxyType
from typing import Iterator, Mapping

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

HERMITICITY_TOL = 1e-12
MAX_TOTAL = 60

_NORM_TOL = 1e-6


def _compositions(total: int, modes: int) -> Iterator[tuple[int, ...]]:
    """Occupation tuples (n_1, ..., n_m) with sum `total`, descending lexicographic."""
    if modes == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for tail in _compositions(total - head, modes - 1):
            yield (head,) + tail


@dataclass(frozen=True, eq=False)
class OccupationBasis:
    """Ordered basis of the m-mode sector with total excitation N.

    Instances are interned by :func:`build_basis`; identity comparison is the
    intended equality.
    """

    modes: int
    total: int
    states: tuple[tuple[int, ...], ...]
    index: Mapping[tuple[int, ...], int]

    @property
    def size(self) -> int:
        return len(self.states)

    def __repr__(self) -> str:
        return f"OccupationBasis(modes={self.modes}, total={self.total}, size={self.size})"


@lru_cache(maxsize=None)
def build_basis(modes: int, total: int) -> OccupationBasis:
    """Enumerate the (modes, total) sector deterministically.

    The enumeration is complete and duplicate-free with
    size = binomial(total + modes - 1, modes - 1).
    """
    if modes < 1:
        raise ValueError(f"need at least one mode, got modes={modes}")
    if total < 0:
        raise ValueError(f"total excitation must be non-negative, got {total}")
    if total > MAX_TOTAL:
        raise ValueError(f"sectors above N={MAX_TOTAL} are unsupported, got {total}")
    states = tuple(_compositions(total, modes))
    assert len(states) == math.comb(total + modes - 1, modes - 1)
    index = MappingProxyType({occ: k for k, occ in enumerate(states)})
    return OccupationBasis(modes=modes, total=total, states=states, index=index)


@dataclass(frozen=True, eq=False)
class HybridState:
    """Pure state of spin-1/2 tensor one fixed-N sector.

    ``amplitudes`` has length ``2 * basis.size``: the spin-down block comes
    first, then the spin-up block, each ordered like ``basis.states``.
    Instances are immutable; every operation returns a fresh state.
    """

    basis: OccupationBasis
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2 * self.basis.size,):
            raise ValueError(
                f"expected {2 * self.basis.size} amplitudes for {self.basis}, got shape {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def down(self) -> np.ndarray:
        return self.amplitudes[: self.basis.size]

    @property
    def up(self) -> np.ndarray:
        return self.amplitudes[self.basis.size :]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "HybridState") -> complex:
        """<self|other>; both states must share the same basis object."""
        if other.basis is not self.basis:
            raise ValueError("overlap requires states over the identical sector basis")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class BilinearGenerator:
    """Hermitian coefficient matrix h of H = sum_ij h_ij a_i^dag a_j.

    Such generators commute with the total number operator, so exp(i*theta*H)
    maps a sector onto itself.
    """

    h: np.ndarray

    def __post_init__(self) -> None:
        h = np.ascontiguousarray(self.h, dtype=np.complex128)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError(f"coefficient matrix must be square, got shape {h.shape}")
        dev = float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0
        if dev > HERMITICITY_TOL:
            raise ValueError(f"coefficient matrix is not Hermitian (max deviation {dev:.3e})")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def modes(self) -> int:
        return self.h.shape[0]


@lru_cache(maxsize=None)
def j_x(modes: int = 2, pair: tuple[int, int] = (0, 1)) -> BilinearGenerator:
    """(a^dag b + a b^dag)/2 on the given mode pair."""
    i, j = pair
    h = np.zeros((modes, modes), dtype=np.complex128)
    h[i, j] = 0.5
    h[j, i] = 0.5
    return BilinearGenerator(h)


@lru_cache(maxsize=None)
def j_y(modes: int = 2, pair: tuple[int, int] = (0, 1)) -> BilinearGenerator:
    """(a^dag b - a b^dag)/2i on the given mode pair (the two-mode rotation generator)."""
    i, j = pair
    h = np.zeros((modes, modes), dtype=np.complex128)
    h[i, j] = -0.5j
    h[j, i] = 0.5j
    return BilinearGenerator(h)


@lru_cache(maxsize=None)
def j_z(modes: int = 2, pair: tuple[int, int] = (0, 1)) -> BilinearGenerator:
    """(n_i - n_j)/2 on the given mode pair."""
    i, j = pair
    h = np.zeros((modes, modes), dtype=np.complex128)
    h[i, i] = 0.5
    h[j, j] = -0.5
    return BilinearGenerator(h)


@lru_cache(maxsize=None)
def number_op(modes: int, mode: int) -> BilinearGenerator:
    """Occupation number of a single mode."""
    h = np.zeros((modes, modes), dtype=np.complex128)
    h[mode, mode] = 1.0
    return BilinearGenerator(h)


@lru_cache(maxsize=None)
def beam_splitter_generator(modes: int, mode: int, env: int) -> BilinearGenerator:
    """K with exp(i*eta*K) = exp[eta (a_mode^dag a_env - a_mode a_env^dag)].

    With this sign, a single excitation in `mode` evolves to
    cos(eta)|mode> - sin(eta)|env>: the transmitted amplitude is cos(eta).
    """
    h = np.zeros((modes, modes), dtype=np.complex128)
    h[mode, env] = -1j
    h[env, mode] = 1j
    return BilinearGenerator(h)


@lru_cache(maxsize=None)
def _sector_matrix(gen: BilinearGenerator, basis: OccupationBasis) -> sp.csr_matrix:
    rows: list[int] = []
    cols: list[int] = []
    vals: list[complex] = []
    h = gen.h
    nz = [(int(i), int(j)) for i, j in np.argwhere(np.abs(h) > 0)]
    for k, occ in enumerate(basis.states):
        for i, j in nz:
            if i == j:
                if occ[i]:
                    rows.append(k)
                    cols.append(k)
                    vals.append(h[i, i] * occ[i])
            elif occ[j] > 0:
                target = list(occ)
                target[j] -= 1
                target[i] += 1
                rows.append(basis.index[tuple(target)])
                cols.append(k)
                vals.append(h[i, j] * math.sqrt(occ[j] * (occ[i] + 1)))
    return sp.csr_matrix((vals, (rows, cols)), shape=(basis.size, basis.size), dtype=np.complex128)


def sector_matrix(gen: BilinearGenerator, basis: OccupationBasis) -> sp.csr_matrix:
    """Matrix of H = sum h_ij a_i^dag a_j restricted to the sector."""
    if gen.modes != basis.modes:
        raise ValueError(f"generator acts on {gen.modes} modes, basis has {basis.modes}")
    return _sector_matrix(gen, basis)


def _evolved_blocks(
    state: HybridState, gen: BilinearGenerator, theta_down: float, theta_up: float
) -> np.ndarray:
    """exp(i*theta_s*H) applied per spin block, via the exponential action.

    The dense exponential of the sector matrix is never formed; the action is
    evaluated with a scaled, order-adaptive Taylor scheme (expm_multiply).
    """
    m = sector_matrix(gen, state.basis)
    size = state.basis.size
    if size == 1:
        h00 = complex(m[0, 0]).real
        return np.concatenate(
            [state.down * np.exp(1j * theta_down * h00), state.up * np.exp(1j * theta_up * h00)]
        )
    if theta_down == theta_up:
        blocks = np.stack([state.down, state.up], axis=1)
        out = expm_multiply((1j * theta_up) * m, blocks)
        return np.concatenate([out[:, 0], out[:, 1]])
    down = state.down if theta_down == 0 else expm_multiply((1j * theta_down) * m, state.down)
    up = state.up if theta_up == 0 else expm_multiply((1j * theta_up) * m, state.up)
    return np.concatenate([down, up])


def basis_state(basis: OccupationBasis, occupation: tuple[int, ...], spin: str) -> HybridState:
    """Product state |occupation> tensor the requested spin state.

    `spin` is one of "down", "up", "plus", "minus" with
    ``|plus/minus> = (|up> +/- |down>)/sqrt(2)``.
    """
    occupation = tuple(occupation)
    k = basis.index.get(occupation)
    if k is None:
        raise ValueError(
            f"occupation {occupation} is not in the (modes={basis.modes}, N={basis.total}) sector"
        )
    amps = np.zeros(2 * basis.size, dtype=np.complex128)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    if spin == "down":
        amps[k] = 1.0
    elif spin == "up":
        amps[basis.size + k] = 1.0
    elif spin == "plus":
        amps[k] = inv_sqrt2
        amps[basis.size + k] = inv_sqrt2
    elif spin == "minus":
        amps[k] = -inv_sqrt2
        amps[basis.size + k] = inv_sqrt2
    else:
        raise ValueError(f"unknown spin label {spin!r}")
    return HybridState(basis, amps)


def evolve_bilinear(state: HybridState, gen: BilinearGenerator, theta: float) -> HybridState:
    """exp(i*theta*H) |state>, identically on both spin blocks."""
    if gen.modes != state.basis.modes:
        raise ValueError(f"generator acts on {gen.modes} modes, state has {state.basis.modes}")
    if theta == 0:
        return state
    return HybridState(state.basis, _evolved_blocks(state, gen, theta, theta))


def spin_conditional_evolve(state: HybridState, gen: BilinearGenerator, theta: float) -> HybridState:
    """exp(i*theta*H*sigma_z): +theta on the spin-up block, -theta on spin-down."""
    if gen.modes != state.basis.modes:
        raise ValueError(f"generator acts on {gen.modes} modes, state has {state.basis.modes}")
    if theta == 0:
        return state
    return HybridState(state.basis, _evolved_blocks(state, gen, -theta, theta))


def spin_rotation(state: HybridState, axis: str, angle: float) -> HybridState:
    """exp(-i*angle/2 * sigma_axis) applied to the spin of every oscillator component.

    In the (down, up) block ordering used here, the rotation matrices read
    axis "x": [[c, -i s], [-i s, c]] and axis "y": [[c, s], [-s, c]] with
    c = cos(angle/2), s = sin(angle/2).
    """
    c = math.cos(angle / 2.0)
    s = math.sin(angle / 2.0)
    if axis == "x":
        u00, u01, u10, u11 = c, -1j * s, -1j * s, c
    elif axis == "y":
        u00, u01, u10, u11 = c, s, -s, c
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    new = np.concatenate([u00 * state.down + u01 * state.up, u10 * state.down + u11 * state.up])
    return HybridState(state.basis, new)


def spin_populations(state: HybridState) -> tuple[float, float]:
    """(P_down, P_up) of a normalized state."""
    p_down = float(np.vdot(state.down, state.down).real)
    p_up = float(np.vdot(state.up, state.up).real)
    total = p_down + p_up
    if abs(total - 1.0) > _NORM_TOL:
        raise ValueError(f"state norm deviates from 1 by {abs(total - 1.0):.3e}")
    return p_down, p_up


@dataclass(frozen=True, eq=False)
class SpinDensity:
    """2x2 reduced density matrix of the spin, in the (down, up) basis."""

    rho: np.ndarray

    def __post_init__(self) -> None:
        rho = np.ascontiguousarray(self.rho, dtype=np.complex128)
        if rho.shape != (2, 2):
            raise ValueError(f"spin density must be 2x2, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise ValueError("spin density is not Hermitian")
        if abs(np.trace(rho) - 1.0) > 1e-10:
            raise ValueError(f"spin density trace deviates from 1 by {abs(np.trace(rho)-1.0):.3e}")
        if float(np.min(np.linalg.eigvalsh(rho))) < -1e-10:
            raise ValueError("spin density has a negative eigenvalue")
        bound = math.sqrt(max(rho[0, 0].real, 0.0) * max(rho[1, 1].real, 0.0))
        if abs(rho[0, 1]) > bound + 1e-10:
            raise ValueError("off-diagonal element violates the purity bound")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def rho00(self) -> float:
        return float(self.rho[0, 0].real)

    @property
    def rho11(self) -> float:
        return float(self.rho[1, 1].real)

    @property
    def rho01(self) -> complex:
        """<down| rho |up>."""
        return complex(self.rho[0, 1])

    @property
    def coherence(self) -> complex:
        """Twice the off-diagonal element: unit magnitude for a pure equal superposition."""
        return 2.0 * self.rho01


def reduce_to_spin(state: HybridState) -> SpinDensity:
    """Trace out every oscillator mode about a normalized state."""
    d, u = state.down, state.up
    r00 = complex(np.vdot(d, d))
    r11 = complex(np.vdot(u, u))
    r01 = complex(np.vdot(u, d))  # sum_k d_k * conj(u_k)
    rho = np.array([[r00, r01], [np.conj(r01), r11]], dtype=np.complex128)
    return SpinDensity(rho)


def expectation_and_variance(state: HybridState, gen: BilinearGenerator) -> tuple[float, float]:
    """(<H>, <H^2> - <H>^2) of the sector-restricted bilinear H on a normalized state."""
    if gen.modes != state.basis.modes:
        raise ValueError(f"generator acts on {gen.modes} modes, state has {state.basis.modes}")
    m = sector_matrix(gen, state.basis)
    blocks = np.stack([state.down, state.up], axis=1)
    hpsi = m @ blocks
    mean_c = complex(np.sum(np.conj(blocks) * hpsi))
    if abs(mean_c.imag) > 1e-10:
        raise ValueError(f"expectation value is not real (imag {mean_c.imag:.3e})")
    mean = mean_c.real
    second = float(np.sum(np.abs(hpsi) ** 2))
    return mean, second - mean * mean
