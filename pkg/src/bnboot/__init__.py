"""Bayesian network structure learning with bootstrap confidence estimates."""

__version__ = "0.1.0"

from .bootstrap import (BootstrapConfig, ConfidenceReport, bayesian_weighted_confidence, derive_constraints,
                        nonparametric_bootstrap, parametric_bootstrap, run_bootstrap)
from .core import (BayesianNetwork, Dag, Dataset, Variable, forward_sample, joint_probability,
                   resample_with_replacement, test_log_loss, topological_order)
from .features import Feature, FeatureKind, evaluate_feature, extract_features, feature_universe
from .pdag import Pdag, dag_to_pdag, is_equivalent, markov_neighbors, pdag_ancestors
from .scoring import ScoreCache, family_score, fit_parameters, network_score, normalized_score
from .search import Constraints, Move, MoveKind, SearchConfig, hill_climb, learn_tree, legal_moves, satisfies
from .io import load_alarm, load_five_node, read_dataset, read_network, write_dataset, write_network
