"""End-to-end generators: noisy Bayesian-network synthesis and the full-domain Laplace baseline."""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .bayesnet import BayesNetStructure, NoisyBayesNet, sample, validate_structure
from .domain import MAX_DENSE_ATTRIBUTES, Dataset, ProbTable, empirical_distribution, marginalize
from .errors import DenseGuardError, EmptyDatasetError, InvalidParameterError
from .mechanism import NoiseSource, PrivacyParams, perturb_table
from .postprocess import l2_project, normalize

MAX_FULL_DOMAIN_ATTRIBUTES = 20


class PostProcessKind(str, enum.Enum):
    NORMALIZATION = "norm"
    L2_PROJECTION = "l2"

    def apply(self, table: ProbTable) -> ProbTable:
        return normalize(table) if self is PostProcessKind.NORMALIZATION else l2_project(table)


@dataclass(frozen=True)
class SourceDistribution:
    """What the generator is run on: a dataset, or an exact joint with a nominal sample size.

    Exact joints let verification runs satisfy the Bayesian-network
    assumption exactly instead of up to sampling error.
    """

    dataset: Dataset | None = None
    table: ProbTable | None = None
    nominal_n: int | None = None

    def __post_init__(self):
        if (self.dataset is None) == (self.table is None):
            raise InvalidParameterError("give exactly one of dataset or table")
        if self.table is not None:
            if self.nominal_n is None or self.nominal_n < 1:
                raise InvalidParameterError("a table source needs nominal_n >= 1")
            if not self.table.consistent:
                raise InvalidParameterError("source table must be consistent")
            if self.table.scope != tuple(range(len(self.table.scope))):
                raise InvalidParameterError("source table must cover attributes 0..d-1 in order")

    @classmethod
    def from_dataset(cls, data: Dataset) -> "SourceDistribution":
        return cls(dataset=data)

    @classmethod
    def from_table(cls, table: ProbTable, n: int) -> "SourceDistribution":
        return cls(table=table, nominal_n=n)

    @property
    def n(self) -> int:
        return self.dataset.n if self.dataset is not None else int(self.nominal_n)

    @property
    def d(self) -> int:
        return self.dataset.d if self.dataset is not None else len(self.table.scope)

    def marginal(self, scope) -> ProbTable:
        if self.dataset is not None:
            return empirical_distribution(self.dataset, scope)
        return marginalize(self.table, scope)

    def joint(self) -> ProbTable:
        """The source distribution over all attributes (the empirical one for datasets)."""
        if self.table is not None:
            return self.table
        return empirical_distribution(self.dataset, tuple(range(self.d)))


def privbayes_fit(
    source: SourceDistribution,
    structure: BayesNetStructure,
    params: PrivacyParams,
    post: PostProcessKind | str,
    noise: NoiseSource,
) -> NoisyBayesNet:
    """Perturb each family marginal with Lap(d / (n eps)) and post-process it.

    Nodes are processed in index order off a single noise stream.
    """
    post = PostProcessKind(post)
    validate_structure(structure)
    if params.d != source.d or structure.d != source.d:
        raise InvalidParameterError(
            f"width mismatch: source d={source.d}, params d={params.d}, structure d={structure.d}"
        )
    _check_n(source, params)
    scale = params.per_marginal_scale
    marginals = []
    for i in range(structure.d):
        exact = source.marginal(structure.family(i))
        marginals.append(post.apply(perturb_table(exact, scale, noise)))
    return NoisyBayesNet(structure, tuple(marginals))


def _check_n(source: SourceDistribution, params: PrivacyParams) -> None:
    if params.n != source.n:
        raise InvalidParameterError(f"params.n={params.n} does not match source size n={source.n}")


def synthesize_dataset(net: NoisyBayesNet, count: int, noise: NoiseSource) -> Dataset:
    if count < 1:
        raise EmptyDatasetError(f"cannot synthesize {count} records")
    return sample(net, count, noise)


def full_domain_laplace(
    source: SourceDistribution,
    params: PrivacyParams,
    noise: NoiseSource,
    post: PostProcessKind | str = PostProcessKind.NORMALIZATION,
) -> ProbTable:
    """Baseline: Lap(1 / (n eps)) on every one of the 2^d cells, then post-process."""
    if source.d > min(MAX_FULL_DOMAIN_ATTRIBUTES, MAX_DENSE_ATTRIBUTES):
        raise DenseGuardError(f"full-domain baseline limited to {MAX_FULL_DOMAIN_ATTRIBUTES} attributes")
    if params.d != source.d:
        raise InvalidParameterError(f"width mismatch: source d={source.d}, params d={params.d}")
    _check_n(source, params)
    noisy = perturb_table(source.joint(), params.full_domain_scale, noise)
    return PostProcessKind(post).apply(noisy)
