"""Sampling distributions with known extreme value index and normalization.

Each member carries its quantile function, the tail quantile function
U(t) = quantile(1 - 1/t), and enough closed-form structure to evaluate
the textbook normalization choice a_m, b_m exactly.  The uniform
distribution (index -1) is deliberately absent: the maximum-likelihood
theory this package exercises requires an index above -1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .gev import GAMMA_TINY, gev_cdf, gev_quantile


@dataclass(frozen=True)
class NormalizingConstants:
    """Scale/location pair for block length m; scale must be positive."""

    a_m: float
    b_m: float
    m: int

    def __post_init__(self):
        if not self.a_m > 0:
            raise ValueError(f"a_m must be > 0, got {self.a_m}")


@dataclass(frozen=True)
class ReferenceDistribution:
    """A distribution F in the domain of attraction of the GEV with index gamma0.

    ``quantile`` is the generalized inverse of F on (0,1).  ``cdf`` is
    optional and only used by convergence diagnostics.  For members with
    gamma0 == 0, either ``tail_quantile_integral`` (closed form of
    \\int_0^t U(s) ds) or an integrable tail quantile near 0 is required;
    ``scale_override`` short-circuits the scale-function formula entirely.
    """

    name: str
    gamma0: float
    quantile: Callable[[np.ndarray], np.ndarray]
    right_endpoint: float
    left_endpoint: float
    cdf: Optional[Callable[[np.ndarray], np.ndarray]] = None
    tail_quantile_integral: Optional[Callable[[float], float]] = None
    scale_override: Optional[Callable[[float], float]] = None
    spec: str = ""

    def tail_quantile(self, t) -> float | np.ndarray:
        """U(t) = quantile(1 - 1/t) for t > 1."""
        t = np.asarray(t, dtype=float)
        if np.any(t <= 1.0):
            raise ValueError("tail quantile requires t > 1")
        return self.quantile(1.0 - 1.0 / t)


def norm_constants(dist: ReferenceDistribution, m: int) -> NormalizingConstants:
    """Exact normalization (a_m, b_m) = (a(m), U(m)) for block length m.

    The scale function follows the usual three-way case split on the sign
    of the index; members may supply a closed-form override when the
    generic formula is unavailable (e.g. the integral does not converge).
    """
    if m < 1:
        raise ValueError("block length m must be >= 1")
    b_m = float(dist.tail_quantile(m))
    if not math.isfinite(b_m):
        raise ValueError(f"U({m}) is not finite for member '{dist.name}'")
    g = dist.gamma0
    if dist.scale_override is not None:
        a_m = float(dist.scale_override(m))
    elif abs(g) < GAMMA_TINY:
        if dist.tail_quantile_integral is not None:
            integral = float(dist.tail_quantile_integral(m))
        else:
            integral, err = quad(
                lambda s: dist.quantile(1.0 - 1.0 / s), 0.0, float(m),
                points=[1.0] if m > 1 else None, limit=200, epsabs=1e-10,
            )
            if not math.isfinite(integral) or err > 1e-6 * max(1.0, abs(integral)):
                raise ValueError(
                    f"tail quantile of '{dist.name}' is not reliably integrable near 0; "
                    "provide tail_quantile_integral in closed form"
                )
        a_m = b_m - integral / m
    elif g > 0:
        a_m = g * b_m
    else:
        if not math.isfinite(dist.right_endpoint):
            raise ValueError(
                f"member '{dist.name}' has gamma0 < 0 but no finite right endpoint"
            )
        a_m = -g * (dist.right_endpoint - b_m)
    if not a_m > 0:
        raise ValueError(
            f"scale constant a_m = {a_m} is not positive for '{dist.name}' at m={m}; "
            "the normalization formula is not usable at this block length"
        )
    return NormalizingConstants(a_m=a_m, b_m=b_m, m=int(m))


def sample_iid(dist: ReferenceDistribution, n: int, seed) -> np.ndarray:
    """n i.i.d. draws by inverse transform; deterministic given seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    u[u == 0.0] = np.nextafter(0.0, 1.0)
    return np.asarray(dist.quantile(u), dtype=float)


# --- catalog members ----------------------------------------------------


def pareto(alpha: float = 1.0) -> ReferenceDistribution:
    """Pareto tail F(x) = 1 - x^(-alpha) on [1, inf); index 1/alpha."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    return ReferenceDistribution(
        name=f"pareto(alpha={alpha:g})",
        gamma0=1.0 / alpha,
        quantile=lambda u: (1.0 - np.asarray(u, dtype=float)) ** (-1.0 / alpha),
        cdf=lambda x: np.where(np.asarray(x, dtype=float) >= 1.0,
                               1.0 - np.asarray(x, dtype=float) ** (-alpha), 0.0),
        right_endpoint=math.inf,
        left_endpoint=1.0,
        spec=f"pareto:alpha={alpha:g}",
    )


def exponential() -> ReferenceDistribution:
    """Standard exponential; index 0, U(t) = log t."""
    return ReferenceDistribution(
        name="exponential",
        gamma0=0.0,
        quantile=lambda u: -np.log1p(-np.asarray(u, dtype=float)),
        cdf=lambda x: np.where(np.asarray(x, dtype=float) >= 0.0,
                               -np.expm1(-np.asarray(x, dtype=float)), 0.0),
        right_endpoint=math.inf,
        left_endpoint=0.0,
        tail_quantile_integral=lambda t: t * math.log(t) - t,
        spec="exponential",
    )


def beta_tail(beta: float = 2.0) -> ReferenceDistribution:
    """Bounded tail F(x) = 1 - (1-x)^beta on [0,1]; index -1/beta.

    Requires beta > 1 so the index stays above -1 (beta = 1 would be the
    uniform distribution, which is outside the admissible range).
    """
    if beta <= 1.0:
        raise ValueError("beta must be > 1 (beta = 1 is the uniform case, index -1)")
    return ReferenceDistribution(
        name=f"beta-tail(beta={beta:g})",
        gamma0=-1.0 / beta,
        quantile=lambda u: 1.0 - (1.0 - np.asarray(u, dtype=float)) ** (1.0 / beta),
        cdf=lambda x: np.clip(1.0 - (1.0 - np.clip(np.asarray(x, dtype=float), 0.0, 1.0)) ** beta, 0.0, 1.0),
        right_endpoint=1.0,
        left_endpoint=0.0,
        spec=f"beta-tail:beta={beta:g}",
    )


def cauchy() -> ReferenceDistribution:
    """Standard Cauchy; index 1 with left endpoint -inf."""
    return ReferenceDistribution(
        name="cauchy",
        gamma0=1.0,
        quantile=lambda u: np.tan(np.pi * (np.asarray(u, dtype=float) - 0.5)),
        cdf=lambda x: 0.5 + np.arctan(np.asarray(x, dtype=float)) / np.pi,
        right_endpoint=math.inf,
        left_endpoint=-math.inf,
        spec="cauchy",
    )


def gev_reference(gamma: float) -> ReferenceDistribution:
    """Exact standardized GEV member: block maxima stay exactly GEV.

    For gamma == 0 the scale function is the constant 1 (an admissible
    closed-form choice for the Gumbel; the generic integral formula does
    not apply because U is unbounded below near the origin).
    """
    if abs(gamma) < GAMMA_TINY:
        lo, hi = -math.inf, math.inf
        override = lambda t: 1.0  # noqa: E731
    elif gamma > 0:
        lo, hi = -1.0 / gamma, math.inf
        override = None
    else:
        lo, hi = -math.inf, -1.0 / gamma
        override = None
    return ReferenceDistribution(
        name=f"gev(gamma={gamma:g})",
        gamma0=float(gamma),
        quantile=lambda u: gev_quantile(gamma, u),
        cdf=lambda x: gev_cdf(gamma, x),
        right_endpoint=hi,
        left_endpoint=lo,
        scale_override=override,
        spec=f"gev:gamma={gamma:g}",
    )


def catalog() -> list[ReferenceDistribution]:
    """Built-in members spanning indices in {-1/2, 0, 1/2, 1}."""
    return [
        pareto(1.0),
        pareto(2.0),
        exponential(),
        beta_tail(2.0),
        cauchy(),
        gev_reference(0.5),
    ]


_FAMILIES = {
    "pareto": (pareto, {"alpha": float}),
    "exponential": (exponential, {}),
    "beta-tail": (beta_tail, {"beta": float}),
    "cauchy": (cauchy, {}),
    "gev": (gev_reference, {"gamma": float}),
}


def from_spec(spec: str) -> ReferenceDistribution:
    """Build a member from a spec string like ``pareto:alpha=2``.

    Recognized families: pareto, exponential, beta-tail, cauchy, gev.
    ``uniform`` is rejected explicitly: its index is -1, outside the
    admissible parameter range.
    """
    spec = spec.strip()
    name, _, argstr = spec.partition(":")
    name = name.strip().lower()
    if name == "uniform":
        raise ValueError(
            "the uniform distribution has extreme value index -1 and is excluded "
            "(no consistent MLE exists at or below index -1)"
        )
    if name not in _FAMILIES:
        raise ValueError(f"unknown distribution spec '{spec}'; "
                         f"known families: {', '.join(sorted(_FAMILIES))}, e.g. pareto:alpha=1")
    builder, sig = _FAMILIES[name]
    kwargs = {}
    if argstr.strip():
        for part in argstr.split(","):
            key, eq, value = part.partition("=")
            key = key.strip()
            if not eq or key not in sig:
                raise ValueError(f"bad parameter '{part.strip()}' in spec '{spec}'")
            try:
                kwargs[key] = sig[key](value.strip())
            except ValueError as exc:
                raise ValueError(f"bad value for '{key}' in spec '{spec}'") from exc
    try:
        return builder(**kwargs)
    except TypeError as exc:
        raise ValueError(f"missing parameter in spec '{spec}'") from exc


def quantile_matched_constants(dist: ReferenceDistribution, m: int,
                               x_ref: float = 1.0) -> tuple[float, float]:
    """Alternative admissible constants read off exact quantiles of F^m.

    Location matches the m-th power CDF at probability exp(-1) (the GEV
    value at 0); scale comes from the quantile spacing at ``x_ref``.
    Under the normalizing-sequence equivalence these converge to the
    exact constants: ratio -> 1, normalized gap -> 0.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    b_alt = float(dist.quantile(math.exp(-1.0 / m)))
    p_ref = float(gev_cdf(dist.gamma0, x_ref))
    if not 0.0 < p_ref < 1.0:
        raise ValueError("x_ref must be interior to the limit support")
    a_alt = (float(dist.quantile(p_ref ** (1.0 / m))) - b_alt) / x_ref
    return a_alt, b_alt
