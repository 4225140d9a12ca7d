"""Brute-force cross-checks for every closed-form claim in the package.

Two independent oracle paths compute the lossy spin coherence:

* :func:`oracle_R` runs the full unitary pipeline on the 4-mode sector and
  traces out the oscillator;
* :func:`reduced_spin_from_construction` expands the lossy state as a
  multinomial power of one collective creation operator (pure combinatorics,
  no matrix exponentials) and encodes the phase as a diagonal number-difference
  rotation in the frame where the preparation prefix has been undone.

The two paths share almost no code, so a bug in either shows up as mutual
disagreement before any closed form is even consulted.  :func:`crosscheck`
bundles every comparison into one deterministic report; the rejected
parameterization of the loss fringe ("negative_sum") is exercised as a
negative control that must fail.
"""

from __future__ import annotations

import cmath
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .analytic import (
    coherence_R,
    loss_coefficients,
    lossy_population,
    qfi_coherent_pair,
    sensitivity,
)
from .fock import (
    BilinearGenerator,
    HybridState,
    SpinDensity,
    build_basis,
    expectation_and_variance,
    j_y,
    reduce_to_spin,
)
from .protocol import LossConfig, encode_phase, full_protocol, prepare_noon_like

ORACLE_MAX_N = 12  # 4-mode sector size grows as binomial(N+3, 3)

DEFAULT_MAX_N = 8
DEFAULT_RATES = (0.0, 0.1, 0.3, 0.5)


def default_theta_grid() -> tuple[float, ...]:
    """0, 0.1*pi, ..., pi."""
    return tuple(math.pi * (k / 10.0) for k in range(11))


def worker_count() -> int:
    """Parallelism cap: METROSIM_THREADS if set, else a small multiple of the CPUs."""
    env = os.environ.get("METROSIM_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def _map_ordered(fn, items):
    items = list(items)
    workers = min(worker_count(), len(items)) or 1
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def multinomial_state(
    n: int,
    coeff_a: complex,
    coeff_b: complex,
    coeff_e: complex,
    coeff_c_spin: complex,
) -> HybridState:
    """(c_a a^dag + c_b b^dag + c_e e^dag + c_c c^dag sigma_z)^n |vac>|+> / sqrt(n!).

    Mode order is (a, b, env_a, env_b); the sigma_z-weighted coefficient rides
    on env_a, so it enters with opposite signs on the two spin branches.  The
    amplitude of occupation (n_a, n_b, n_c, n_e) on branch s is
    sqrt(n!/(n_a! n_b! n_c! n_e!)) * c_a^{n_a} c_b^{n_b} (s c_c)^{n_c} c_e^{n_e} / sqrt(2),
    and the norm is (|c_a|^2 + |c_b|^2 + |c_e|^2 + |c_c|^2)^{n/2}.
    """
    if n < 0:
        raise ValueError(f"excitation number must be non-negative, got {n}")
    basis = build_basis(4, n)
    amps = np.zeros(2 * basis.size, dtype=np.complex128)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for k, (na, nb, nc, ne) in enumerate(basis.states):
        weight = math.comb(n, na) * math.comb(n - na, nb) * math.comb(n - na - nb, nc)
        value = (
            math.sqrt(weight)
            * complex(coeff_a) ** na
            * complex(coeff_b) ** nb
            * complex(coeff_e) ** ne
            * inv_sqrt2
        )
        amps[k] = value * (-complex(coeff_c_spin)) ** nc
        amps[basis.size + k] = value * complex(coeff_c_spin) ** nc
    return HybridState(basis, amps)


def pipeline_coefficients(loss: LossConfig) -> tuple[complex, complex, complex, complex]:
    """Collective-mode coefficients equivalent to prepare -> embed -> loss.

    Conjugating the two loss beam splitters through the preparation gates
    turns the lossy state into a single multinomial power with coefficients
    (c_a, c_b, c_e, c_c) = (u, -v, -sqrt(R_b/2), -i sqrt(R_a/2)); undoing the
    preparation prefix of the pipeline state must land exactly on
    ``multinomial_state(n, *pipeline_coefficients(loss))``.  The squared
    magnitudes sum to 1.
    """
    lc = loss_coefficients(loss)
    return (
        complex(lc.u),
        complex(-lc.v),
        complex(-math.sqrt(loss.r_b / 2.0)),
        -1j * math.sqrt(loss.r_a / 2.0),
    )


def reduced_spin_from_construction(n: int, theta: float, loss: LossConfig) -> SpinDensity:
    """Reduced spin state via the combinatorial path.

    In the frame with the preparation prefix undone, the remaining
    phase-encoding conjugation is the spin-conditional number-difference
    rotation exp(-i theta (n_a - n_b)/2 * sigma_z), which is diagonal here:
    no matrix exponentials are involved anywhere on this path.
    """
    state = multinomial_state(n, *pipeline_coefficients(loss))
    basis = state.basis
    half_diff = np.array([(occ[0] - occ[1]) / 2.0 for occ in basis.states])
    phase = np.exp(1j * theta * half_diff)
    down = state.down * phase
    up = state.up * np.conj(phase)
    return reduce_to_spin(HybridState(basis, np.concatenate([down, up])))


def oracle_R(n: int, theta: float, loss: LossConfig) -> complex:
    """Spin coherence 2*rho01 of the pipeline output before the readout pulse."""
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle cost guard: n={n} exceeds {ORACLE_MAX_N}")
    return full_protocol(n, theta, loss).spin_density.coherence


def oracle_qfi(state: HybridState, gen: BilinearGenerator) -> float:
    """QFI of a pure state under the generator: 4 * variance."""
    _, variance = expectation_and_variance(state, gen)
    return 4.0 * variance


def _coherent_cutoff(gamma: complex) -> int:
    nbar = abs(gamma) ** 2
    return int(nbar + 10.0 * math.sqrt(nbar + 1.0) + 10.0)


def coherent_jy_variance(gamma_a: complex, gamma_b: complex) -> float:
    """Var(J_y) on |gamma_a>|gamma_b>, truncated so the Poisson tail mass < 1e-10.

    Works on the raw (n_a, n_b) amplitude grid, independently of the sector
    machinery.
    """
    da = _coherent_cutoff(gamma_a) + 1
    db = _coherent_cutoff(gamma_b) + 1

    def coherent_amplitudes(gamma: complex, dim: int) -> np.ndarray:
        if gamma == 0:
            out = np.zeros(dim, dtype=np.complex128)
            out[0] = 1.0
            return out
        ns = np.arange(dim)
        log_fact = np.cumsum(np.concatenate([[0.0], np.log(np.arange(1, dim))]))
        mags = np.exp(-abs(gamma) ** 2 / 2.0 + ns * math.log(abs(gamma)) - log_fact / 2.0)
        return mags * np.exp(1j * ns * cmath.phase(gamma))

    psi = np.outer(coherent_amplitudes(gamma_a, da), coherent_amplitudes(gamma_b, db))
    factor = np.sqrt(np.outer(np.arange(1, da), np.arange(1, db)))
    jpsi = np.zeros_like(psi)
    jpsi[1:, :-1] += factor * psi[:-1, 1:]  # a^dag b
    jpsi[:-1, 1:] -= factor * psi[1:, :-1]  # a b^dag
    jpsi /= 2j
    mean = complex(np.sum(np.conj(psi) * jpsi)).real
    second = float(np.sum(np.abs(jpsi) ** 2))
    return second - mean * mean


@dataclass(frozen=True)
class ClaimResult:
    """Outcome of one analytic-vs-oracle comparison."""

    name: str
    max_deviation: float
    threshold: float
    passed: bool
    negative_control: bool = False


@dataclass(frozen=True)
class CrosscheckReport:
    claims: tuple[ClaimResult, ...]

    @property
    def passed(self) -> bool:
        return all(claim.passed for claim in self.claims)

    def failing(self) -> tuple[str, ...]:
        return tuple(claim.name for claim in self.claims if not claim.passed)

    def to_text(self) -> str:
        lines = []
        for claim in self.claims:
            status = "PASS" if claim.passed else "FAIL"
            rule = ">=" if claim.negative_control else "<="
            lines.append(
                f"[{status}] {claim.name}: max deviation {claim.max_deviation:.3e} "
                f"(required {rule} {claim.threshold:.0e})"
            )
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)

    def to_json(self) -> str:
        payload = {
            "passed": self.passed,
            "claims": [asdict(claim) for claim in self.claims],
        }
        return json.dumps(payload, indent=2, sort_keys=True)


@dataclass(frozen=True)
class _GridPoint:
    n: int
    r_a: float
    r_b: float
    theta: float
    pipeline_R: complex
    pipeline_p_down: float
    pipeline_rho00: float
    pipeline_rho11: float
    construction_R: complex
    construction_rho00: float
    construction_rho11: float


def _evaluate_cell(args: tuple[int, float, float, tuple[float, ...]]) -> list[_GridPoint]:
    n, r_a, r_b, thetas = args
    loss = LossConfig(r_a, r_b)
    points = []
    for theta in thetas:
        res = full_protocol(n, theta, loss)
        con = reduced_spin_from_construction(n, theta, loss)
        points.append(
            _GridPoint(
                n=n,
                r_a=r_a,
                r_b=r_b,
                theta=theta,
                pipeline_R=res.spin_density.coherence,
                pipeline_p_down=res.populations[0],
                pipeline_rho00=res.spin_density.rho00,
                pipeline_rho11=res.spin_density.rho11,
                construction_R=con.coherence,
                construction_rho00=con.rho00,
                construction_rho11=con.rho11,
            )
        )
    return points


def _sensitivity_vs_finite_difference(w_convention: str) -> float:
    """Max relative deviation of the exact sensitivity from central differences.

    100 (theta, loss) points; points sitting essentially on a fringe extremum
    (|dP/dtheta| < 1e-3) carry no information and are skipped.
    """
    n = 6
    step = 1e-5
    thetas = [0.05 + k * (3.0 - 0.05) / 9.0 for k in range(10)]
    pairs = [
        (0.0, 0.1), (0.0, 0.3), (0.1, 0.1), (0.2, 0.1), (0.3, 0.5),
        (0.5, 0.5), (0.1, 0.3), (0.3, 0.1), (0.2, 0.4), (0.4, 0.2),
    ]
    worst = 0.0
    for r_a, r_b in pairs:
        loss = LossConfig(r_a, r_b)
        for theta in thetas:
            p = lossy_population(n, theta, loss, w_convention)
            dp = (
                lossy_population(n, theta + step, loss, w_convention)
                - lossy_population(n, theta - step, loss, w_convention)
            ) / (2.0 * step)
            if abs(dp) < 1e-3:
                continue
            reference = math.sqrt(max(p - p * p, 0.0)) / abs(dp)
            exact = sensitivity(n, theta, loss, method="exact", w_convention=w_convention)
            worst = max(worst, abs(exact.delta_theta_exact - reference) / reference)
    return worst


def crosscheck(
    max_n: int = DEFAULT_MAX_N,
    theta_grid: tuple[float, ...] | None = None,
    loss_rates: tuple[float, ...] | None = None,
    w_convention: str = "difference",
) -> CrosscheckReport:
    """Run every analytic-vs-oracle comparison and report per-claim deviations.

    Grid cells may be evaluated concurrently (capped by METROSIM_THREADS);
    results are merged in grid order, so the report is deterministic.
    Failures are recorded, not raised.
    """
    if max_n > ORACLE_MAX_N:
        raise ValueError(f"oracle cost guard: max_n={max_n} exceeds {ORACLE_MAX_N}")
    thetas = tuple(theta_grid if theta_grid is not None else default_theta_grid())
    rates = tuple(loss_rates if loss_rates is not None else DEFAULT_RATES)
    rejected = "negative_sum" if w_convention == "difference" else "difference"

    cells = [
        (n, r_a, r_b, thetas)
        for n in range(1, max_n + 1)
        for r_a in rates
        for r_b in rates
    ]
    grid: list[_GridPoint] = []
    for cell_points in _map_ordered(_evaluate_cell, cells):
        grid.extend(cell_points)

    def closed(point: _GridPoint, convention: str) -> complex:
        return coherence_R(point.n, point.theta, LossConfig(point.r_a, point.r_b), convention)

    dev_norm = 0.0
    for r_a in rates:
        for r_b in rates:
            coeffs = pipeline_coefficients(LossConfig(r_a, r_b))
            dev_norm = max(dev_norm, abs(sum(abs(c) ** 2 for c in coeffs) - 1.0))
            for n in (1, max_n):
                dev_norm = max(dev_norm, abs(multinomial_state(n, *coeffs).norm() - 1.0))

    dev_paths = max(abs(p.pipeline_R - p.construction_R) for p in grid)
    dev_closed = max(abs(closed(p, w_convention) - p.pipeline_R) for p in grid)
    dev_population = max(
        abs(lossy_population(p.n, p.theta, LossConfig(p.r_a, p.r_b), w_convention) - p.pipeline_p_down)
        for p in grid
    )
    dev_diag_pipeline = max(
        max(abs(p.pipeline_rho00 - 0.5), abs(p.pipeline_rho11 - 0.5)) for p in grid
    )
    dev_diag_construction = max(
        max(abs(p.construction_rho00 - 0.5), abs(p.construction_rho11 - 0.5)) for p in grid
    )
    dev_rejected = max(abs(closed(p, rejected) - p.pipeline_R) for p in grid)

    nonzero = [r for r in rates if r > 0]
    dev_endpoint_closed = 0.0
    for rate in nonzero:
        for n in range(1, max_n + 1):
            dev_endpoint_closed = max(
                dev_endpoint_closed,
                abs(abs(coherence_R(n, 0.0, LossConfig(0.0, rate), w_convention)) - 1.0),
                abs(abs(coherence_R(n, math.pi, LossConfig(rate, 0.0), w_convention)) - 1.0),
            )
    dev_endpoint_oracle = 0.0
    for p in grid:
        if p.theta == 0.0 and p.r_a == 0.0:
            dev_endpoint_oracle = max(dev_endpoint_oracle, abs(abs(p.pipeline_R) - 1.0))
        if p.theta == math.pi and p.r_b == 0.0:
            dev_endpoint_oracle = max(dev_endpoint_oracle, abs(abs(p.pipeline_R) - 1.0))

    dev_swap = 0.0
    dev_conj = 0.0
    for p in grid:
        loss = LossConfig(p.r_a, p.r_b)
        swapped = LossConfig(p.r_b, p.r_a)
        dev_swap = max(
            dev_swap,
            abs(
                abs(coherence_R(p.n, p.theta, loss, w_convention))
                - abs(coherence_R(p.n, p.theta + math.pi, swapped, w_convention))
            ),
        )
        dev_conj = max(
            dev_conj,
            abs(
                coherence_R(p.n, -p.theta, loss, w_convention)
                - coherence_R(p.n, p.theta, loss, w_convention).conjugate()
            ),
        )

    dev_qfi = 0.0
    for n in range(1, 11):
        state = encode_phase(prepare_noon_like(n), 0.37)
        dev_qfi = max(dev_qfi, abs(oracle_qfi(state, j_y(2)) - n * n))

    dev_coherent = 0.0
    for alpha in (0.5, 1.0, 1.5):
        for beta in (0.5, 1.0, 1.5):
            f_o_oracle = 2.0 * (
                coherent_jy_variance(1j * alpha, beta) + coherent_jy_variance(-1j * alpha, beta)
            )
            dev_coherent = max(dev_coherent, abs(qfi_coherent_pair(alpha, beta).f_o - f_o_oracle))

    dev_fd = _sensitivity_vs_finite_difference(w_convention)

    claims = (
        ClaimResult("multinomial_norm_identity", dev_norm, 1e-10, dev_norm <= 1e-10),
        ClaimResult("construction_vs_pipeline_coherence", dev_paths, 1e-9, dev_paths <= 1e-9),
        ClaimResult("closed_form_coherence_vs_oracle", dev_closed, 1e-8, dev_closed <= 1e-8),
        ClaimResult("population_closed_form_vs_oracle", dev_population, 1e-8, dev_population <= 1e-8),
        ClaimResult("pipeline_spin_diagonals_one_half", dev_diag_pipeline, 1e-10, dev_diag_pipeline <= 1e-10),
        ClaimResult(
            "construction_spin_diagonals_one_half",
            dev_diag_construction,
            1e-12,
            dev_diag_construction <= 1e-12,
        ),
        ClaimResult("single_mode_loss_endpoints_closed_form", dev_endpoint_closed, 1e-12, dev_endpoint_closed <= 1e-12),
        ClaimResult("single_mode_loss_endpoints_oracle", dev_endpoint_oracle, 1e-9, dev_endpoint_oracle <= 1e-9),
        ClaimResult("swap_symmetry", dev_swap, 1e-9, dev_swap <= 1e-9),
        ClaimResult("conjugation_symmetry", dev_conj, 1e-9, dev_conj <= 1e-9),
        ClaimResult("qfi_heisenberg_scaling", dev_qfi, 1e-9, dev_qfi <= 1e-9),
        ClaimResult("coherent_pair_oscillator_qfi", dev_coherent, 1e-6, dev_coherent <= 1e-6),
        ClaimResult("exact_sensitivity_vs_finite_difference", dev_fd, 1e-4, dev_fd <= 1e-4),
        ClaimResult(
            "rejected_w_convention_must_fail",
            dev_rejected,
            1e-3,
            dev_rejected >= 1e-3,
            negative_control=True,
        ),
    )
    return CrosscheckReport(claims=claims)
