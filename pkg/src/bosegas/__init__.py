"""Exact statistics of ideal Bose gases in anisotropic harmonic traps.

Canonical (fixed-N) statistics through the partition-function recursion,
grand-canonical fugacity solves with thermodynamic-limit closed forms, the
one-body density-matrix spectrum, mirror-point correlation functions and the
condensate/quasicondensate crossover temperature.
"""

from .canonical import (
    OccupationSpectrum,
    PartitionTable,
    ThermalState,
    build_partition_table,
    ground_fraction,
    mean_occupation,
    mean_occupations,
    occupancy_distribution,
    occupation_spectrum,
    sticking_ratio,
    temperature_for_fraction,
)
from .coherence import (
    AxisGrid,
    CorrelationProfile,
    find_tph,
    fwhm,
    g1_curve,
    g1_profile,
    mode_function,
)
from .errors import (
    BoseGasError,
    BracketError,
    CutoffError,
    GridExtentError,
    NumericalError,
    ResourceLimitError,
)
from .grand import (
    GrandCanonicalState,
    asymptotic_scaling_exponent,
    atom_number,
    closed_form_sticking,
    log_law_drift,
    solve_fugacity,
    sticking_ratio_gc,
    sticking_ratio_of,
    temperature_for_fraction_gc,
)
from .trap import (
    FiniteSpectrum,
    SpectrumCutoff,
    TrapGeometry,
    characteristic_temperature,
    enumerate_modes,
    mode_energy,
    single_particle_z,
)

__version__ = "0.1.0"
