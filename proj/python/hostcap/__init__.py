"""Hosting-capacity analysis for radial distribution feeders.

Combines an exact branch-flow feasibility check with pool-based active
learning over DER deployment scenarios. The heavy lifting lives in the
compiled ``hostcap._core`` extension; this package re-exports its surface.
"""

from ._core import (
    Classifier,
    DegenerateDataError,
    DimensionMismatchError,
    EmptyPoolError,
    HostcapConfigError,
    Network,
    NoFeasibleScenarioError,
    NotRadialError,
    ProfileSet,
    Scenario,
    evaluate_pool,
    generate_pool,
    hosting_capacity,
    load_network,
    load_pool,
    load_profiles,
    network_from_json,
    run_episode,
    save_pool,
    save_profiles,
    scenario_features,
    solve,
    synth_profiles,
    train_classifier,
)

__version__ = "0.1.0"

__all__ = [
    "Classifier",
    "DegenerateDataError",
    "DimensionMismatchError",
    "EmptyPoolError",
    "HostcapConfigError",
    "Network",
    "NoFeasibleScenarioError",
    "NotRadialError",
    "ProfileSet",
    "Scenario",
    "evaluate_pool",
    "generate_pool",
    "hosting_capacity",
    "load_network",
    "load_pool",
    "load_profiles",
    "network_from_json",
    "run_episode",
    "save_pool",
    "save_profiles",
    "scenario_features",
    "solve",
    "synth_profiles",
    "train_classifier",
    "__version__",
]
