"""Numerical laboratory for rainbow free-fermion chains.

Builds inhomogeneous hopping chains and their 2D extension, computes
ground-state entanglement exactly through the correlation-matrix method,
and checks the continuum/CFT predictions for spectra, wavefunctions,
entropies and the entanglement spectrum.
"""

__version__ = "0.1.0"

from .lattice import (
    CouplingProfile,
    HoppingMatrix,
    Lattice2D,
    build_lattice_2d,
    build_rainbow_profile,
    hopping_matrix_1d,
    hopping_matrix_2d,
    profile_from_z,
    uniform_profile,
)
from .spectra import (
    FermiVelocityEstimate,
    SpectrumResult,
    ZeroModeError,
    diagonalize,
    fermi_velocity,
    fermi_velocity_fit,
    occupied_orbitals,
    site_occupations,
    velocity_scaling,
)
from .continuum import (
    AnalyticWavefunction,
    ContinuumParams,
    ValidityMap,
    analytic_energy,
    analytic_wavefunction,
    continuum_params,
    coordinate_map,
    deformed_length,
    slater_overlap,
    validity_map,
    wavefunction_overlap,
)
from .entanglement import (
    CorrelationMatrix,
    EntanglementSpectrum,
    EntropyCurve,
    EntropyPoint,
    block_correlation,
    boundary_blocks,
    brute_force_block_entropy,
    correlation_matrix,
    entanglement_spectrum,
    entropy_scan,
    ground_state_correlation,
    halfchain_block,
    halfchain_entropy_prediction,
    renyi_entropies,
    thermal_cft_entropy,
    vn_entropy,
)
from .sdrg import (
    Bond,
    BondList,
    TieError,
    bond_state_orbitals,
    perturbative_orbitals,
    rainbow_bonds,
    render_arcs,
    sdrg_entropy,
    sdrg_run,
)
from .fitting import (
    FitResult,
    RankDeficientError,
    RenyiAnsatz,
    fit_2d,
    fit_central_charge,
    fit_renyi_halfchain,
    fn_constants,
    linear_lsq,
)
from .qubism import (
    AmplitudeTable,
    QubismImage,
    render,
    schmidt_rank,
    slater_amplitudes,
    write_ppm,
)
