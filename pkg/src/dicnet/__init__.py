"""Diffusion with uncertain seeds and edge strengths: simulation, adaptive
seed-selection strategies, Monte Carlo estimation, and exact desk-scale
oracles."""

__version__ = "0.1.0"

from .model import (DicNetwork, PropagationDistribution, fixed_distribution,
                    mean_propagation, quantize_exponential,
                    uniform_discrete_distribution, validate_network)
from .realization import (FullRealization, PartialRealization,
                          condition_sample, empty_partial, is_compatible,
                          probability_of, sample_full)
from .diffusion import (EMPTY_COMMAND, DiffusionState, InvalidCommand,
                        PolicyRun, SeedCommand, run_policy, run_to_quiescence,
                        spread_count, start, step_round)
from .strategies import (ADAPTIVE_PATTERN, AGreedyPolicy, RandomPolicy,
                         SeedingPattern, StaticSeedListPolicy,
                         StepGainEvaluator, a_greedy_policy, h_greedy_policy,
                         h_greedy_prune, marginal_gain, observably_quiescent,
                         pattern_a0, random_policy, static_greedy_select)
from .estimator import (Estimate, ReplicationResult, estimate_policy_spread,
                        half_width, hoeffding_samples, run_replications,
                        substream)
from .oracle import (AuxiliaryGraph, EnumerationGuard, ExactGainPolicy,
                     build_auxiliary,
                     check_properties, enumerate_realizations,
                     enumerate_schedules, exact_marginal_gain,
                     exact_policy_value, greedy_adaptive_value,
                     optimal_adaptive_value, realization_count)
from .data import (PresetSpec, SchemaError, generate_power_law,
                   load_edge_list, load_network, parse_preset, save_network)
from .fixtures import (chain_network, fixture_g1, star_network,
                       two_node_fixture)
