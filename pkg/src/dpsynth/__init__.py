"""Differentially private synthetic data for Boolean tables via noisy Bayesian networks."""

__version__ = "0.1.0"

from .bayesnet import (
    BayesNetStructure,
    NoisyBayesNet,
    chain_structure,
    five_node_structure,
    greedy_structure,
    joint_distribution,
    net_from_conditionals,
    random_net,
    sample,
    validate_structure,
)
from .domain import (
    Dataset,
    ProbTable,
    conditional,
    empirical_distribution,
    l2_distance,
    marginalize,
    tv_distance,
)
from .errors import (
    DegreeViolation,
    DenseGuardError,
    DPSynthError,
    EmptyDatasetError,
    InfeasiblePackingError,
    InvalidParameterError,
    InvalidScopeError,
    ParseError,
    StructureError,
    TopologyViolation,
)
from .mechanism import NoiseSource, PrivacyParams, perturb_table, sample_laplace, sensitivity_of_marginal
from .postprocess import l2_project, normalize
from .synthesizer import (
    PostProcessKind,
    SourceDistribution,
    full_domain_laplace,
    privbayes_fit,
    synthesize_dataset,
)
from .evaluation import BoundReport, packing_adversary, verify_bound, verify_config
from .utility import ErmProblem, erm_fit, rademacher_estimate, utility_metric

__all__ = [
    "BayesNetStructure",
    "BoundReport",
    "chain_structure",
    "conditional",
    "Dataset",
    "DegreeViolation",
    "DenseGuardError",
    "DPSynthError",
    "empirical_distribution",
    "EmptyDatasetError",
    "erm_fit",
    "ErmProblem",
    "five_node_structure",
    "full_domain_laplace",
    "greedy_structure",
    "InfeasiblePackingError",
    "InvalidParameterError",
    "InvalidScopeError",
    "joint_distribution",
    "l2_distance",
    "l2_project",
    "marginalize",
    "net_from_conditionals",
    "NoiseSource",
    "NoisyBayesNet",
    "normalize",
    "packing_adversary",
    "ParseError",
    "perturb_table",
    "PostProcessKind",
    "PrivacyParams",
    "privbayes_fit",
    "ProbTable",
    "rademacher_estimate",
    "random_net",
    "sample",
    "sample_laplace",
    "sensitivity_of_marginal",
    "SourceDistribution",
    "StructureError",
    "synthesize_dataset",
    "TopologyViolation",
    "tv_distance",
    "utility_metric",
    "validate_structure",
    "verify_bound",
    "verify_config",
]
