"""Two-mode condensate beam splitter in the collective-spin representation."""

from .hilbert import (
    JX,
    JY,
    JZ,
    JZ2,
    NUMBER,
    CollectiveOperator,
    DimensionError,
    SpinState,
    expectation,
    second_moment,
    variance,
)
from .hamiltonian import (
    DegeneracyWarning,
    GroundState,
    TwoModeParams,
    build_hamiltonian,
    ground_state,
    low_spectrum,
    spectral_gap,
)
from .observables import (
    UndefinedResolutionError,
    phase_resolution,
    phase_state_decomposition,
    predicted_rotated_resolution,
    squeezing_report,
    squeezing_xi,
    uncertainty_report,
    visibility,
)

__version__ = "0.1.0"
