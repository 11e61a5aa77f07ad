"""Bernoulli trials with harmonic success probabilities.

Exact laws (success counts, passage and gap times, the first-success
Sibuya family), maximum-likelihood and moment estimation, the related
growth-collapse chain, the generalized species-sampling model, and a
seeded simulation engine — each analytic path cross-validated against
brute-force oracles in the test suite.
"""

from .disaster_chain import ChainClassification, ChainSpec
from .estimation import EstimateReport, TrialSequence
from .simulate import RngSpec
from .species_sampling import SampleConfiguration
from .success_counts import AlphaModel, FinitePmf, Weights

__version__ = "0.1.0"

__all__ = [
    "AlphaModel",
    "ChainClassification",
    "ChainSpec",
    "EstimateReport",
    "FinitePmf",
    "RngSpec",
    "SampleConfiguration",
    "TrialSequence",
    "Weights",
    "__version__",
]
