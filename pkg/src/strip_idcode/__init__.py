"""Exact minimum-density periodic identifying codes in infinite grid strips."""

from .automaton import (AutomatonStats, ResourceError, StripAutomaton, automaton_stats,
                        build_automaton, cycle_to_pattern, enumerate_barcodes)
from .core import (BarPattern, PatternParseError, RationalDensity, SearchBudgetError,
                   VerifyReport, Violation, brute_force_min_density, closed_neighborhood,
                   is_barcode, parse_pattern, pattern_density, verify_periodic_pattern,
                   verify_window_oracle)
from .mcm import (CycleSolution, Feasibility, McmResult, WeightedDigraph, certify_lambda,
                  extract_min_cycle, karp_mcm, lambda_feasibility_oracle, verify_cycle_mean)

__version__ = "0.1.0"
