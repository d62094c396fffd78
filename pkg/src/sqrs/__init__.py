"""Simulator and estimation toolkit for entanglement-free secure quantum
remote sensing: qubit closed forms, noisy-channel Monte Carlo, the
Alice/Bob/Eve protocol engine, maximum-likelihood phase estimation with
background pre-calibration, and Fisher-information asymmetry analysis."""

from .qubit import (
    Basis,
    Measurement,
    QubitState,
    StateLabel,
    apply_phase,
    born_probability,
    prepare,
    table1_probability,
)
from .channel import (
    ChannelParams,
    DetectionEvent,
    PathKind,
    PRESETS,
    ideal_params,
    paper_50km_params,
    paper_noise_params,
    sample_detection,
    survival_probability,
)
from .engine import (
    CalibrationTable,
    EveView,
    InterceptResend,
    OutcomeCounts,
    QberReport,
    eve_ratio,
    eve_ratio_from_counts,
    intercept_resend,
    run_calibration,
    run_check_path,
    run_sensing,
    run_sensing_counts,
)
from .estimation import (
    CorrectedFrequencies,
    LikelihoodCurve,
    PhaseEstimate,
    apply_calibration,
    estimate_phase,
    estimate_phase_corrected,
    log_likelihood,
)
from .fisher import (
    FisherResult,
    ProbabilityTriplet,
    cfi_analytic,
    cfi_empirical,
    crb,
    eve_cfi_from_ratio,
)
from .experiments import (
    PHI_8,
    PHI_9,
    ExperimentConfig,
    default_phase_grid,
    qber_experiment,
    reproduce_figure,
    simulate_experiment,
)

__version__ = "0.1.0"
