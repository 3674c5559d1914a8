"""Infinite products of nonnegative 2x2 matrices, Bernoulli convolutions
in quadratic Pisot bases, and weak-Gibbs verification."""

from .errors import DomainError, GuardError
from .matcore import (
    CoefficientReport,
    Mat2,
    Vec2,
    coefficient_report,
    column_distance,
    column_metrics,
    cone_is_stable,
    contraction_coefficient,
    first_coordinate,
    left_contraction_bounds,
    normalize,
    perron_eigenpair,
    row_distance,
)
from .classify import (
    MatrixFamily,
    Verdict,
    ZeroPattern,
    build_delta,
    classify,
    epsilon_sequence,
    zero_pattern,
)
from .prodsim import (
    MVBounds,
    ProbeReport,
    Trajectory,
    Word,
    convergence_probe,
    mv_bounds,
    product_prefix,
    trajectory,
)
from .betanum import (
    AffineMap,
    BetaNumber,
    NumerationSystem,
    QuadraticBase,
    build_system,
    reachable_set,
)
from .measure import (
    CylinderWord,
    MeasureEstimate,
    StationaryVector,
    cylinder_interval,
    cylinder_measure,
    full_cdf,
    full_measure,
    h_profile,
    monte_carlo,
    monte_carlo_batch,
    star_cdf,
    star_interval,
    stationary_vector,
)
from .gibbs import (
    AsymptoticsReport,
    GibbsVerdict,
    PotentialTrace,
    ScanReport,
    divergence_witness_b,
    m0_asymptotics,
    potential_gap_scan,
    potential_trace,
    reduced_product_family,
    step_potential,
    weak_gibbs_verdict,
)

__version__ = "0.1.0"
