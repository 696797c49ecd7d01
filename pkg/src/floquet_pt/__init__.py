"""Floquet PT-symmetry of a two-level system under pulsed measurement."""

__version__ = "0.1.0"

from .models import (  # noqa: E402
    ContinuousModel,
    DimensionlessPoint,
    PhaseLabel,
    PulseProtocol,
    PulseSegment,
    ThreeLevelModel,
    canonical_protocol,
    square_wave_protocol,
    static_classify,
)
from .floquet import (  # noqa: E402
    FloquetSpectrum,
    classify,
    discriminant,
    ep_boundary,
    floquet_spectrum,
    period_propagator,
)
from .dynamics import (  # noqa: E402
    Trajectory,
    continuous_run,
    effective_decay_rate,
    stroboscopic_run,
    three_level_run,
    validate_reduction,
)
from .sweeps import GridSpec, PhaseDiagram, boundary_curve, decay_map, phase_diagram  # noqa: E402
