"""Hybrid spin / two-mode-oscillator interferometer: simulation and phase metrology.

Subpackages:

* :mod:`metrosim.fock` -- exact linear algebra on number-conserving sectors
  with a spin-1/2 factor;
* :mod:`metrosim.protocol` -- the interferometer pipeline (preparation, loss,
  phase encoding, disentangling, readout);
* :mod:`metrosim.analytic` -- closed-form QFI, fringes, coherence, and
  sensitivity estimates;
* :mod:`metrosim.oracle` -- brute-force adjudication of every closed form;
* :mod:`metrosim.cli` -- deterministic sweeps, figure datasets, validation.
"""

from .analytic import (
    CoherentPairQfi,
    LossCoefficients,
    QfiBreakdown,
    SensitivityPoint,
    VanishingDerivative,
    cat_population,
    coherence_R,
    hl,
    ideal_population,
    ideal_sensitivity,
    loss_coefficients,
    lossy_population,
    qfi_coherent_pair,
    qfi_from_moments,
    sensitivity,
    sql,
)
from .fock import (
    BilinearGenerator,
    HybridState,
    OccupationBasis,
    SpinDensity,
    basis_state,
    beam_splitter_generator,
    build_basis,
    evolve_bilinear,
    expectation_and_variance,
    j_x,
    j_y,
    j_z,
    number_op,
    reduce_to_spin,
    spin_conditional_evolve,
    spin_populations,
    spin_rotation,
)
from .protocol import (
    LossConfig,
    ProtocolResult,
    apply_loss,
    disentangle,
    embed_with_environment,
    encode_phase,
    full_protocol,
    prepare_noon_like,
    readout,
)

__version__ = "0.1.0"
