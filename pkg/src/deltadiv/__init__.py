"""Delta divergence for classifier incongruence, with classical baselines.

Quick use::

    from deltadiv import delta_divergence, kl, total_variation
    delta_divergence([0.6, 0.3, 0.1], [0.2, 0.7, 0.1]).value   # 0.4
"""

from .classical import (
    GENERATORS,
    ConvexGenerator,
    MeasureValue,
    bregman,
    f_divergence,
    jensen_shannon,
    kl,
    kl_clutter,
    kl_symmetrized,
    renyi,
    renyi_max,
    total_variation,
)
from .delta import (
    CaseTag,
    DeltaBreakdown,
    delta_clutter,
    delta_divergence,
    delta_max,
    delta_relationships,
    delta_star,
)
from .simplex import (
    DiscreteDistribution,
    DominantPair,
    dominant,
    dominant_pair,
    entropy,
    surprisal,
    validate,
)

__version__ = "0.1.0"
