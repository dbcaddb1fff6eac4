"""Change point detection in interaction networks by comparing degree distributions."""
from .degstats import DegreeSample, EmpiricalCDF, degree_sample, degrees_from_edges, ecdf, subsample
from .detector import (BootstrapConfig, ChangeVerdict, NullDistribution, bootstrap_test, detect_samples,
                       detect_sequence, iter_verdicts, sensitivity_profile)
from .evalbench import EvalResult, GridSpec, Summary, match_events, run_experiment, run_grid, score
from .ingest import InteractionEvent, Window, WindowSpec, aggregate, parse_events, partition, windows_for
from .metrics import MetricKind, ccdh, distance, kl_divergence, ks_distance, rh_distance
from .synth import ModelConfig, ScenarioSpec, Schedule, SizeDist, gen_caveman, gen_er, gen_scenario

__version__ = "0.1.0"
