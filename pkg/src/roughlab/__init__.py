"""roughlab: a desk-scale laboratory for rough power nonlinearities.

Core layers: spectral (grids, multipliers, dyadic projections), spaces
(fractional norms and their characterizations), splines (dyadic
piecewise-linear tables), nonlinearity (the power map and its leading
derivative pieces), evolution (ETD and split-step flows), experiments
(refinement scans and the witness probe) and reports/cli (serialization
and the command-line runner).
"""

__version__ = "0.1.0"

from .spectral import (  # noqa: F401
    Field,
    Grid,
    SpaceTimeField,
    Spectrum,
    SymbolSpec,
    apply_symbol,
    lp_project,
    modulation_project,
    paraproduct,
    to_physical,
    to_spectrum,
)
from .spaces import (  # noqa: F401
    EnvelopeSeq,
    NormSpec,
    admissible_pair,
    besov_norm_lp,
    besov_norm_modulus,
    besov_norm_spline,
    critical_exponent,
    frequency_envelope,
    fubini_norm,
    modulus_of_smoothness,
    sobolev_norm,
    squarefn_difference_norm,
)
from .splines import DiffTable, DyadicSpline, finite_diffs, oswald_sum, sign_change_sets, spline_approx  # noqa: F401
from .nonlinearity import (  # noqa: F401
    HolderProbe,
    PowerLaw,
    estimate_ratio_heat,
    estimate_ratio_interp,
    estimate_ratio_main,
    leading_pieces,
    power_apply,
    precise_holder_probe,
)
from .evolution import (  # noqa: F401
    EvolutionConfig,
    Trajectory,
    difference_probe,
    evolve,
    linear_propagate,
    time_antiderivative,
    time_truncate,
)
from .experiments import (  # noqa: F401
    DivergenceVerdict,
    ScanReport,
    ScanSpec,
    WitnessReport,
    abs_value_scan,
    heat_threshold_scan,
    nls_threshold_scan,
    nonlinear_estimate_scan,
    refinement_classifier,
    witness_probe,
)
from .reports import parse_report, serialize_report, write_report  # noqa: F401
