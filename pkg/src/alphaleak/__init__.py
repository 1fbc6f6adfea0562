"""Tunable information-leakage measures on finite alphabets."""

from .capacity import (
    CapacityResult,
    CondCapacityResult,
    ConvergenceError,
    Method,
    conditional_maximal_alpha_leakage,
    grid_oracle_capacity,
    maximal_alpha_leakage,
    shannon_capacity,
    sup_equality_check,
)
from .distfile import SchemaError, load_distribution, parse_distribution
from .measures import (
    MeasureValue,
    alpha_loss,
    arimoto_cond_entropy,
    arimoto_mi,
    conditional_alpha_leakage_by_definition,
    conditional_arimoto_mi,
    event_conditional_sibson_mi,
    renyi_entropy,
    sibson_mi,
)
from .prob_core import (
    Alpha,
    AlphaDomainError,
    Channel,
    Joint2,
    Joint3,
    LabelMismatchError,
    LogBase,
    Pmf,
    ValidationError,
    ZeroProbabilityEventError,
    condition_on_event,
    marginalize,
    restrict_support,
    support,
)

__version__ = "0.1.0"
