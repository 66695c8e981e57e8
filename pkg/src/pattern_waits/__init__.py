"""Waiting times and stopping probabilities for patterns in finite Markov chains."""

from .analysis import (GfPoint, PenneyReport, ScanSpec, evaluate_gf, evaluate_gf_alpha,
                       penney_search, scan_patterns, scan_probability)
from .correlation import (CorrelationPolynomial, CorrelationSet, CorrelationTable,
                          correlation_set, correlation_table, gtilde, iid_correlation,
                          last_symbol_indicator, path_probability)
from .errors import *  # noqa: F401,F403
from .instance import dump_instance, load_instance, parse_instance
from .linear_system import (RestartReport, SystemMatrix, SystemSolution, assemble,
                            check_stationary_restart, solve, solve_common_head,
                            solve_instance, solve_length_one, stationary_distribution)
from .model import (Alphabet, ChainSpec, Pattern, PatternCollection, validate, validate_a1,
                    validate_a2, validate_a3)
from .oracle import (DistributionTable, EmbeddedAutomaton, ExactSummary, SimulationResult,
                     build_automaton, embed, exact_distribution, exact_summary, simulate)

__version__ = "0.1.0"
