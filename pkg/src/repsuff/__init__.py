"""Which mutual-information objectives yield representations sufficient for control."""

from .information import (JointTable, ObjectiveValue, all_objectives, build_joint, entropy,
                          k_step_kernel, mutual_information, objective_value)
from .mdp import (ConvergenceError, QTable, TabularMDP, greedy_policy, greedy_policy_sets,
                  policy_return, q_star, stationary_occupancy, uniform_policy, uniform_start,
                  validate_mdp)
from .mdpfile import MdpFileError, export_mdp, parse_mdp_file
from .representation import (AggregateMDP, BlockPartition, aggregate_mdp, aliases,
                             bell_number, enumerate_partitions, lift_policy, parse_partition,
                             partition_to_representation)
from .scenarios import (ScenarioSpec, get_scenario, jinv_counterexample, jstate_counterexample,
                        noise_mdp, random_mdp, random_reward)
from .sufficiency import (ObjectiveReport, ReturnDistribution, SufficiencyVerdict,
                          SweepContext, aliased_policy_return, check_pi_sufficiency,
                          check_q_sufficiency, check_return_identity, check_sufficiency, maximizer_set,
                          objective_sufficiency, return_distribution)

__version__ = "0.1.0"
