"""Random-walk mixing analysis on graphs with bottlenecked region structure.

The package splits into graph construction (:mod:`bottlewalk.graphs`), an
exact dense engine (:mod:`bottlewalk.exact`), seeded trajectory sampling
(:mod:`bottlewalk.mc`), regime checks over both (:mod:`bottlewalk.harness`),
and a config-driven CLI (:mod:`bottlewalk.cli`).
"""

__version__ = "0.1.0"

from .errors import (
    BottleneckNotSeparatingError,
    BottlewalkError,
    ConfigError,
    DisconnectedGraphError,
    EpsilonRangeError,
    ExactBudgetError,
    HorizonTooShortError,
    MissingInputError,
    MissingMarkError,
    PeriodicNoConvergenceWarning,
    PhiRangeError,
    SizeBudgetError,
    StepBudgetError,
)
from .graphs import (
    Marks,
    ParadigmParams,
    Region,
    RegionTaggedGraph,
    build_paradigm1,
    build_paradigm2,
    build_paradigm3,
    dumbbell_graph,
    graph_from_edges,
    path_graph,
    read_graph,
    validate_regions,
    write_edge_list,
    write_region_sidecar,
)
from .exact import (
    bottleneck_ratio,
    bottleneck_report,
    hitting_moments,
    mixing_profile,
    mixing_time,
    profile_to_target,
    restricted_evolution_check,
    stationary_residual,
    subset_mass,
    transition_kernel,
    tv_distance,
)
from .mc import (
    RngConfig,
    core_return_law,
    coupling_experiment,
    hitting_time_stats,
    tail_probability,
)
from .harness import (
    AnalysisParams,
    CutoffDiagnostic,
    RegimeReport,
    cutoff_diagnostic,
    evaluate_regime,
    theorem_verdict,
)
from .fixtures import build_fixture, cutoff_family, get_fixture, list_fixtures
from .config import ExperimentConfig, load_config

__all__ = [name for name in dir() if not name.startswith("_")]
