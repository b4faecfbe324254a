"""Simulation toolkit for molecular multiplexer arbiter PUFs."""

from .arbiter import (ArbiterConfig, HorizonExhaustedError, Response, ResponseSignature,
                      evaluate_response, generate_signature, signatures_to_csv)
from .crn import (Crn, CrnError, CrnSyntaxError, Reaction, Species, ValidationReport,
                  dual_rail, parse_crn, serialize_crn, validate)
from .delay_model import DelayPuf, monte_carlo_metrics, sample_delay_puf, transform_challenge
from .fabric import (EnvironmentCondition, PufInstance, apply_challenge, as_challenge,
                     draw_condition, nominal_condition, perturb, puf_from_text, puf_to_text,
                     sample_rates, synthesize_puf)
from .harness import (ExperimentConfig, emit_traces, load_config, parse_config,
                      run_reliability_experiment, run_uniqueness_experiment, sweep)
from .kinetics import (Event, IntegrationError, IntegratorConfig, State, Trajectory,
                       compile_crn, integrate, mass_action_rhs, refine_crossing)
from .metrics import (feasible, gaussian_fit, hamming_distance, p_inter, p_intra,
                      reliability, uniqueness, variation_stats)
from .mux import MuxPorts, MuxSpec, synthesize_mux, truth_table_eval

__version__ = "0.1.0"

__all__ = [
    "ArbiterConfig",
    "HorizonExhaustedError",
    "Response",
    "ResponseSignature",
    "evaluate_response",
    "generate_signature",
    "signatures_to_csv",
    "Crn",
    "CrnError",
    "CrnSyntaxError",
    "Reaction",
    "Species",
    "ValidationReport",
    "dual_rail",
    "parse_crn",
    "serialize_crn",
    "validate",
    "DelayPuf",
    "monte_carlo_metrics",
    "sample_delay_puf",
    "transform_challenge",
    "EnvironmentCondition",
    "PufInstance",
    "apply_challenge",
    "as_challenge",
    "draw_condition",
    "nominal_condition",
    "perturb",
    "puf_from_text",
    "puf_to_text",
    "sample_rates",
    "synthesize_puf",
    "ExperimentConfig",
    "emit_traces",
    "load_config",
    "parse_config",
    "run_reliability_experiment",
    "run_uniqueness_experiment",
    "sweep",
    "Event",
    "IntegrationError",
    "IntegratorConfig",
    "State",
    "Trajectory",
    "compile_crn",
    "integrate",
    "mass_action_rhs",
    "refine_crossing",
    "feasible",
    "gaussian_fit",
    "hamming_distance",
    "p_inter",
    "p_intra",
    "reliability",
    "uniqueness",
    "variation_stats",
    "MuxPorts",
    "MuxSpec",
    "synthesize_mux",
    "truth_table_eval",
]
