"""Coherence lifetimes of a finite Bose-Einstein condensate.

Order-parameter collapse for coherent, squeezed and thermal-coherent
states, and thin-spectrum dephasing of quasi-particle excitations.
"""

__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    DecaySeries,
    PhysicalParams,
    Spectrum,
    collapse_time_estimate,
    derive_params,
    extract_collapse_time,
    husimi_q,
    order_parameter_coherent_exact,
    order_parameter_series,
    order_parameter_short_time,
    order_parameter_thermal_coherent,
)
from .states import (  # noqa: E402
    FockVector,
    NumberEnsemble,
    SqueezeSpec,
    coherent_state,
    displaced_number_state,
    squeezed_state,
    thermal_ensemble,
)
from .thinspectrum import (  # noqa: E402
    CondensateLevels,
    OffDiagSeries,
    ThinSpectrumModel,
    combine_collapse_times,
    reduced_offdiag_two_state,
    reduced_offdiag_two_state_oracle,
)
