"""Random Hermitian matrices over quadratic extensions of Q_p and their cokernels."""

from .classify import CanonicalForm, classify, verify_congruence
from .cokernel import (
    cokernel_type,
    count_automorphisms,
    count_hom,
    count_submodules,
    count_surjections,
    elementary_divisors,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    run_distribution_experiment,
    run_moment_experiment,
    run_universality_sweep,
)
from .partitions import Partition
from .ring import ExtensionSpec, Kind, RingElem, make_spec
from .sampler import EntryDistribution, HermitianMatrix, sample_eps_balanced, sample_haar

__version__ = "0.1.0"
