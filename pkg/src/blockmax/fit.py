"""Local maximization of the GEV log-likelihood over the admissible region.

The sample log-likelihood generally has no global maximum, so "fit" here
means: find a local maximum inside the open region where every
observation is feasible, verify the first-order conditions with the
analytic gradient, and verify second-order conditions with a numeric
Hessian.  Shape values at or below -1 are excluded from the search: the
likelihood has no local maximum there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize
from scipy.special import gamma as gamma_func

from .blocks import BlockMaximaSeries
from .gev import (
    EULER_GAMMA,
    GAMMA_TINY,
    GevParams,
    gev_loglik3,
    gev_loglik_gradient,
    gev_quantile,
    params_support,
)

GAMMA_FLOOR = -1.0 + 1e-6
GAMMA_CAP = 10.0
INIT_GAMMA_LO = -0.95
INIT_GAMMA_HI = 5.0


@dataclass(frozen=True)
class FitOptions:
    grad_tol: float = 1e-8
    max_iters: int = 500
    init: Optional[GevParams] = None

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be > 0")


@dataclass(frozen=True)
class FitResult:
    """Outcome of a local-maximum search.

    ``converged`` means the gradient norm met the tolerance, the numeric
    Hessian was negative definite, and the optimum sat strictly inside
    the feasible region.  Anything else is reported, never hidden.
    """

    theta_hat: GevParams
    loglik: float
    grad_norm: float
    hessian_negdef: bool
    n_blocks: int
    converged: bool
    iterations: int
    diagnostic: str = ""

    def __post_init__(self):
        assert self.theta_hat.gamma > -1.0


def _as_values(series) -> np.ndarray:
    if isinstance(series, BlockMaximaSeries):
        return np.asarray(series.values, dtype=float)
    return np.asarray(series, dtype=float)


def sample_loglik(theta: GevParams, series) -> float:
    """Mean log-likelihood over the observations; -inf if any is infeasible."""
    x = _as_values(series)
    if x.size == 0:
        raise ValueError("empty series")
    ll = np.atleast_1d(gev_loglik3(theta, x))
    if np.any(np.isneginf(ll)):
        return float("-inf")
    return float(np.mean(ll))


def sample_loglik_gradient(theta: GevParams, series) -> np.ndarray:
    """Mean analytic gradient of the log-likelihood, shape (3,)."""
    x = _as_values(series)
    return np.atleast_2d(gev_loglik_gradient(theta, x)).mean(axis=0)


def feasibility_margin(theta: GevParams, series) -> float:
    """min_k (1 + gamma * (x_k - mu) / sigma); must be > 0 for a finite fit."""
    x = _as_values(series)
    if abs(theta.gamma) < GAMMA_TINY:
        return 1.0
    return float(np.min(1.0 + theta.gamma * (x - theta.mu) / theta.sigma))


def is_feasible(theta: GevParams, series) -> bool:
    return feasibility_margin(theta, series) > 0.0


def _repair_feasibility(theta: GevParams, x: np.ndarray) -> GevParams:
    """Shrink gamma toward 0 and inflate sigma until the data fit inside."""
    gamma, mu, sigma = theta.gamma, theta.mu, theta.sigma
    for _ in range(200):
        cand = GevParams(gamma, mu, sigma)
        if is_feasible(cand, x):
            return cand
        gamma *= 0.5
        sigma *= 2.0
        if abs(gamma) < GAMMA_TINY:
            gamma = 0.0
    raise ValueError("could not repair the starting point into the feasible region")


def pwm_init(series) -> GevParams:
    """Probability-weighted-moment starting point for the optimizer.

    Standard sample L-moments with the rational shape approximation; the
    shape is clamped into a conservative sub-range and the result is
    repaired into strict feasibility so the search starts finite.
    """
    x = np.sort(_as_values(series))
    n = x.size
    if n < 3:
        raise ValueError("need at least 3 observations")
    if x[0] == x[-1]:
        raise ValueError("degenerate data: all observations equal")
    j = np.arange(1, n + 1, dtype=float)
    b0 = x.mean()
    b1 = np.sum((j - 1.0) * x) / (n * (n - 1.0))
    b2 = np.sum((j - 1.0) * (j - 2.0) * x) / (n * (n - 1.0) * (n - 2.0))
    l1 = b0
    l2 = 2.0 * b1 - b0
    l3 = 6.0 * b2 - 6.0 * b1 + b0
    t3 = l3 / l2
    c = 2.0 / (3.0 + t3) - math.log(2.0) / math.log(3.0)
    k = 7.8590 * c + 2.9554 * c * c
    # clamp the shape into (INIT_GAMMA_LO, INIT_GAMMA_HI]; k is minus the shape
    k = float(np.clip(k, -INIT_GAMMA_HI, -INIT_GAMMA_LO - 1e-9))
    if abs(k) < GAMMA_TINY:
        sigma = l2 / math.log(2.0)
        mu = l1 - EULER_GAMMA * sigma
        gamma = 0.0
    else:
        g1 = gamma_func(1.0 + k)
        sigma = l2 * k / ((1.0 - 2.0 ** (-k)) * g1)
        mu = l1 - sigma * (1.0 - g1) / k
        gamma = -k
    if not sigma > 0 or not math.isfinite(sigma) or not math.isfinite(mu):
        # moment estimate degenerate; fall back to a Gumbel-flavored start
        sigma = max(np.std(x), 1e-12 * max(1.0, abs(x[-1])))
        mu = float(np.median(x))
        gamma = 0.0
    return _repair_feasibility(GevParams(gamma, float(mu), float(sigma)), x)


def _newton_polish(theta_vec, x, grad_tol, max_steps=60):
    """Damped Newton ascent on the mean log-likelihood with feasibility
    backtracking.  Returns (theta_vec, n_iterations, stall_reason)."""

    def value(vec):
        return sample_loglik(GevParams.from_array(vec), x)

    current = value(theta_vec)
    g = sample_loglik_gradient(GevParams.from_array(theta_vec), x)
    for it in range(max_steps):
        g_norm = np.linalg.norm(g)
        if g_norm <= grad_tol:
            return theta_vec, it, ""
        h = numeric_hessian(GevParams.from_array(theta_vec), x)
        step = None
        try:
            step = np.linalg.solve(h, -g)
        except np.linalg.LinAlgError:
            step = None
        if step is None or not np.all(np.isfinite(step)) or float(g @ step) <= 0.0:
            step = g / max(1.0, g_norm)  # ascent fallback
        # Close to the optimum the attainable improvement drops below the
        # rounding noise of the mean, so a strict-ascent rule would stall
        # with the gradient still above tolerance.  Accept a step whose
        # value is within noise as long as it halves the gradient norm.
        noise = 1e-12 * (1.0 + abs(current))
        scale = 1.0
        accepted = False
        for _ in range(40):
            cand = theta_vec + scale * step
            if (GAMMA_FLOOR < cand[0] <= GAMMA_CAP) and cand[2] > 0:
                cand_val = value(cand)
                if math.isfinite(cand_val):
                    if cand_val > current:
                        theta_vec, current = cand, cand_val
                        g = sample_loglik_gradient(GevParams.from_array(theta_vec), x)
                        accepted = True
                        break
                    if cand_val >= current - noise:
                        cand_g = sample_loglik_gradient(GevParams.from_array(cand), x)
                        if np.linalg.norm(cand_g) < 0.5 * g_norm:
                            theta_vec, current, g = cand, max(cand_val, current), cand_g
                            accepted = True
                            break
            scale *= 0.5
        if not accepted:
            return theta_vec, it + 1, "plateau: no ascent step found"
    return theta_vec, max_steps, "polish iteration limit reached"


def fit_mle(series, options: FitOptions = FitOptions()) -> FitResult:
    """Find a local maximum of the mean GEV log-likelihood.

    Derivative-free simplex search from the moment start, then damped
    Newton polishing, then first- and second-order verification.  Points
    outside the feasible region (or with shape outside (-1, 10]) score
    -inf and are never accepted.
    """
    x = _as_values(series)
    if x.size < 3:
        raise ValueError("need at least 3 observations to fit three parameters")
    if np.min(x) == np.max(x):
        raise ValueError("degenerate data: all observations equal")

    start = options.init if options.init is not None else pwm_init(x)
    start = _repair_feasibility(start, x)

    def objective(vec):
        gamma, mu, sigma = vec
        if not (GAMMA_FLOOR < gamma <= GAMMA_CAP) or not sigma > 0:
            return math.inf
        v = sample_loglik(GevParams(float(gamma), float(mu), float(sigma)), x)
        return -v if math.isfinite(v) else math.inf

    res = minimize(
        objective,
        start.as_array(),
        method="Nelder-Mead",
        options={
            "maxiter": options.max_iters,
            "xatol": 1e-8,
            "fatol": 1e-12,
            "adaptive": True,
        },
    )
    best = res.x if math.isfinite(res.fun) else start.as_array()
    iterations = int(res.nit)

    best, polish_iters, stall = _newton_polish(best, x, options.grad_tol)
    iterations += polish_iters

    theta_hat = GevParams.from_array(best)
    loglik = sample_loglik(theta_hat, x)
    grad_norm = float(np.linalg.norm(sample_loglik_gradient(theta_hat, x)))

    hessian_negdef = False
    try:
        h = numeric_hessian(theta_hat, x)
        eigs = np.linalg.eigvalsh(h)
        hessian_negdef = bool(np.all(np.isfinite(eigs)) and np.max(eigs) < 0.0)
    except (ValueError, np.linalg.LinAlgError):
        pass

    margin = feasibility_margin(theta_hat, x)
    diagnostics = []
    if stall:
        diagnostics.append(stall)
    if margin <= 1e-6:
        diagnostics.append(f"feasibility boundary: min block margin {margin:.3e}")
    if theta_hat.gamma <= GAMMA_FLOOR + 1e-6:
        diagnostics.append("shape pinned at the lower admissible bound")
    if res.nit >= options.max_iters:
        diagnostics.append("simplex iteration limit reached")
    if grad_norm > options.grad_tol:
        diagnostics.append(f"gradient norm {grad_norm:.3e} above tolerance")
    if not hessian_negdef:
        diagnostics.append("numeric Hessian not negative definite")

    boundary = margin <= 1e-6 or theta_hat.gamma <= GAMMA_FLOOR + 1e-6
    converged = (grad_norm <= options.grad_tol) and hessian_negdef and not boundary

    result = FitResult(
        theta_hat=theta_hat,
        loglik=loglik,
        grad_norm=grad_norm,
        hessian_negdef=hessian_negdef,
        n_blocks=int(x.size),
        converged=converged,
        iterations=iterations,
        diagnostic="; ".join(diagnostics),
    )
    assert is_feasible(theta_hat, x)
    return result


def numeric_hessian(theta: GevParams, series) -> np.ndarray:
    """Central-difference Hessian of the mean log-likelihood, symmetrized.

    Step sizes are relative, 1e-4 * (1 + |component|), balancing
    truncation against round-off for a twice-differenced mean of logs.
    """
    x = _as_values(series)
    if not is_feasible(theta, x):
        raise ValueError("Hessian requested at an infeasible parameter point")
    vec = theta.as_array()
    h = 1e-4 * (1.0 + np.abs(vec))

    def value(v):
        if not v[2] > 0:
            return -math.inf
        return sample_loglik(GevParams.from_array(v), x)

    f0 = value(vec)
    out = np.empty((3, 3))
    for i in range(3):
        ei = np.zeros(3)
        ei[i] = h[i]
        out[i, i] = (value(vec + ei) - 2.0 * f0 + value(vec - ei)) / h[i] ** 2
    for i in range(3):
        for j in range(i + 1, 3):
            ei = np.zeros(3)
            ej = np.zeros(3)
            ei[i] = h[i]
            ej[j] = h[j]
            out[i, j] = out[j, i] = (
                value(vec + ei + ej) - value(vec + ei - ej)
                - value(vec - ei + ej) + value(vec - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return (out + out.T) / 2.0


def kl_divergence(theta0: GevParams, theta: GevParams) -> float:
    """Kullback-Leibler divergence between two GEV laws, base measure theta0.

    Computed as a quadrature of the log-density gap against the theta0
    law via the probability integral transform.  If theta0 puts mass
    outside the support of theta, the divergence is +inf.
    """
    s0 = params_support(theta0)
    s1 = params_support(theta)
    if s0.lower < s1.lower or s0.upper > s1.upper:
        return math.inf

    def integrand(u):
        z = gev_quantile(theta0.gamma, u)
        point = theta0.mu + theta0.sigma * z
        return gev_loglik3(theta0, point) - gev_loglik3(theta, point)

    value, _ = quad(integrand, 0.0, 1.0, limit=200, epsabs=1e-10, epsrel=1e-10)
    return max(float(value), 0.0)
