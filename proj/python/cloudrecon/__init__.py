"""Multi-angle reconstruction of 2D cloud boundaries."""

from ._core import (
    AlphaField,
    BetaProfile,
    DetectorCircle,
    DetectorLine,
    DiagnoseArtifacts,
    ForwardArtifacts,
    GraphCloud,
    GraphResult,
    GraphState,
    IdentifiabilityReport,
    InvertArtifacts,
    IterationRecord,
    MeasurementSet,
    PixelStatus,
    PolarCloud,
    PolarResult,
    PolarState,
    Scenario,
    ScenarioError,
    SolverConfig,
    SpeedSweepArtifacts,
    SpeedSweepRow,
    add_noise,
    detect_support,
    diagnose,
    fix_gauge,
    load_scenario,
    measure,
    misr_angles,
    paper_polar_angles,
    reconstruct,
    relative_misfit,
    run_diagnose,
    run_forward,
    run_invert,
    run_speed_demo,
)

__all__ = [
    "AlphaField",
    "BetaProfile",
    "DetectorCircle",
    "DetectorLine",
    "DiagnoseArtifacts",
    "ForwardArtifacts",
    "GraphCloud",
    "GraphResult",
    "GraphState",
    "IdentifiabilityReport",
    "InvertArtifacts",
    "IterationRecord",
    "MeasurementSet",
    "PixelStatus",
    "PolarCloud",
    "PolarResult",
    "PolarState",
    "Scenario",
    "ScenarioError",
    "SolverConfig",
    "SpeedSweepArtifacts",
    "SpeedSweepRow",
    "add_noise",
    "detect_support",
    "diagnose",
    "fix_gauge",
    "load_scenario",
    "measure",
    "misr_angles",
    "paper_polar_angles",
    "reconstruct",
    "relative_misfit",
    "run_diagnose",
    "run_forward",
    "run_invert",
    "run_speed_demo",
]
