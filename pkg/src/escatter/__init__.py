"""Momentum- and spin-entanglement entropies for electron-electron
Coulomb scattering: discrete Shannon entropies over detector layouts,
their continuous limit for enormous pixel counts, spin-channel and
post-selection analyses, and the von Neumann entropy of the reduced
one-electron density matrix built from Gaussian wave packets.
"""

__version__ = "0.1.0"

from .amplitudes import (
    AmplitudePair,
    SpinChannel,
    amplitude_pair,
    differential_probability,
    direct_amplitude,
    exchange_amplitude,
)
from .constants import BOHR_RADIUS_NM, HARTREE_EV
from .density_matrix import (
    DensityMatrix,
    build_meridian_matrix,
    eigen_spectrum,
    kernel_element,
    von_neumann_entropy,
)
from .entropy import (
    ProbabilityVector,
    detection_entropy_bits,
    ring_probabilities,
    shannon_discrete,
    shannon_ring_discrete,
    shannon_ring_jaynes,
    shannon_sphere_discrete,
    shannon_sphere_jaynes,
    sweep_energies,
)
from .errors import NumericalError
from .geometry import (
    AngularGrid,
    GridKind,
    cell_probability,
    channel_domain,
    equator_grid,
    range_grid_below,
    ring_grid,
    ring_weight,
    sphere_pixel_count,
    uniform_grid,
)
from .kinematics import (
    ScatterContext,
    ev_to_hartree,
    hartree_to_ev,
    make_context,
    min_scattering_angle,
    nm_to_bohr,
    wave_number,
)
from .spin import (
    EquatorEntropies,
    SpinEntropyResult,
    entropy_antiparallel,
    entropy_distinguishable,
    entropy_parallel,
    equator_entropies,
    postselect_entropies,
    postselect_range_sweep,
)

__all__ = [
    "AmplitudePair",
    "AngularGrid",
    "BOHR_RADIUS_NM",
    "DensityMatrix",
    "EquatorEntropies",
    "GridKind",
    "HARTREE_EV",
    "NumericalError",
    "ProbabilityVector",
    "ScatterContext",
    "SpinChannel",
    "SpinEntropyResult",
    "__version__",
    "amplitude_pair",
    "build_meridian_matrix",
    "cell_probability",
    "channel_domain",
    "detection_entropy_bits",
    "differential_probability",
    "direct_amplitude",
    "eigen_spectrum",
    "entropy_antiparallel",
    "entropy_distinguishable",
    "entropy_parallel",
    "equator_entropies",
    "equator_grid",
    "ev_to_hartree",
    "exchange_amplitude",
    "hartree_to_ev",
    "kernel_element",
    "make_context",
    "min_scattering_angle",
    "nm_to_bohr",
    "postselect_entropies",
    "postselect_range_sweep",
    "range_grid_below",
    "ring_grid",
    "ring_probabilities",
    "ring_weight",
    "shannon_discrete",
    "shannon_ring_discrete",
    "shannon_ring_jaynes",
    "shannon_sphere_discrete",
    "shannon_sphere_jaynes",
    "sphere_pixel_count",
    "sweep_energies",
    "uniform_grid",
    "von_neumann_entropy",
    "wave_number",
]
