"""Wave-particle duality measures for multibeam interferometers with which-way detectors."""

__version__ = "0.1.0"

from .qcore import (
    BeamDetectorConfig,
    BlochVector,
    DetectorState,
    DimensionError,
    PopulationVector,
    ValidationError,
    bloch_to_state,
    gram_matrix,
    overlap_sq,
    reduced_beam_density,
    state_to_bloch,
)
from .measures import (
    DualityReport,
    KnowledgeReport,
    Measurement,
    bayes_posteriors,
    fringe_visibility_check,
    outcome_likelihoods,
    partial_knowledge,
    predictability,
    visibility,
    which_way_knowledge,
)
from .distinguishability import (
    OptimizationResult,
    TwoOutcomeObservable,
    duality_report,
    knowledge_of,
    observable_to_measurement,
    optimize_grid,
    optimize_refined,
)
