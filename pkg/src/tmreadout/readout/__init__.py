"""Single-shot readout simulation: pulses, rates, classifier, experiments."""

from .budget import ErrorBudget, joint_label_probabilities
from .classify import Thresholds, classify, fit_thresholds, label_probabilities, thresholds_from_means
from .experiments import (
    FidelityReport,
    QndReport,
    ReadoutConfig,
    ShotRecord,
    SweepResult,
    calibrate_rate_model,
    calibrate_thresholds,
    expected_fidelity,
    expected_qnd,
    fidelity_experiment,
    measurement_for,
    qnd_experiment,
    qnd_sweep,
    simulate_shot,
)
from .pulse import CavityResponse, ReadoutPulse, cavity_response, pointer_means, snr_analytic
from .rates import InducedProfile, RateModel, detailed_balance_up_rate, thermal_populations
