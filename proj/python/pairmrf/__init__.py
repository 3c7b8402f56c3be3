"""Pairwise-interaction Markov random fields on 2-d lattices."""

from ._pairmrf import (
    BoundaryError,
    ConvergenceError,
    HmrfFit,
    MrfFit,
    Potentials,
    cohist,
    conditional_probs,
    energy,
    exact_conditional,
    exact_expected_stats,
    exact_mle,
    fit_ghm,
    fit_pl,
    fit_sa,
    fourier_basis,
    free_dimension,
    linear_sequence,
    log_partition,
    mrfi,
    polynomial_basis,
    pseudo_likelihood,
    sample,
    select_interactions,
    suff_stat,
)

__version__ = "0.1.0"
