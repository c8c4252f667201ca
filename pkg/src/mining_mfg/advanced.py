"""Best response of the risk-neutral cost-advantaged miner.

Its objective is additively separable in time, so the best response is
pointwise in t: given the individual mean hash rate abar, first-order
optimality of -c1*beta + (p/D) * beta/(beta + (M+1)*abar) gives

    beta = -(M+1)*abar + sqrt(p (M+1) abar / (c1 D))

when abar < p / (c1 (M+1) D), and 0 otherwise.  The advanced miner's
intensity denominator uses (M+1)*abar while individuals see M*abar + beta:
the representative miner only affects the advanced miner through the mean
field, and the asymmetry is kept as is.
"""

from __future__ import annotations

import numpy as np

from .params import ModelParams


def best_response_beta(mean_alpha_t, params: ModelParams):
    """Advanced miner's optimal hash rate given the mean hash rate.

    Accepts a scalar or an array (a whole mean-hash path).
    """
    if params.k_c is None:
        raise ValueError("no advanced miner in this parameter set")
    abar = np.asarray(mean_alpha_t, dtype=float)
    if np.any(abar <= 0):
        raise ValueError("mean hash rate must be strictly positive")
    M1 = params.M + 1
    c1 = params.c1
    threshold = params.p / (c1 * M1 * params.D)
    beta = -M1 * abar + np.sqrt(params.p * M1 * abar / (c1 * params.D))
    beta = np.where(abar < threshold, beta, 0.0)
    beta = np.maximum(beta, 0.0)
    if beta.ndim == 0:
        return float(beta)
    return beta


def foc_residual(beta, mean_alpha_t, params: ModelParams):
    """-c1 + p(M+1)abar / (D (beta + (M+1)abar)^2); zero at interior optima."""
    abar = np.asarray(mean_alpha_t, dtype=float)
    M1 = params.M + 1
    denom = params.D * (np.asarray(beta) + M1 * abar) ** 2
    out = -params.c1 + params.p * M1 * abar / denom
    if out.ndim == 0:
        return float(out)
    return out
