"""Maximum likelihood fitting by damped Newton ascent on the concave
log likelihood, with principled divergence detection.

A small score norm alone cannot distinguish an interior maximum from a fit
drifting to infinity under separation (the gradient decays exponentially
along a separating direction), so ``fit`` first settles existence with the
cone feasibility program. When the groups overlap, Newton converges to the
unique maximizer; when they are separated, the fit follows a certified
separating direction with doubling steps, along which the log likelihood
is provably nondecreasing, until the slope norm crosses the divergence
bound, and reports Diverged with the last iterate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .core import BinregError, Dataset
from .links import LinkFamily
from .overlap import (DEGENERATE, SEPARATED, cone_overlap, scalar_overlap,
                      separating_direction)
from .simplex import LPNumericalFailure

CONVERGED = "Converged"
DIVERGED = "Diverged"
MAX_ITERATIONS = "MaxIterations"
NOT_UNIQUE = "NotUnique"


class ConfigError(BinregError):
    """Invalid fitting options."""


@dataclass(frozen=True)
class Parameters:
    """Intercept and slope vector of the linear predictor."""

    alpha: float
    beta: np.ndarray


@dataclass(frozen=True)
class FitOptions:
    tol: float = 1e-10                # sup-norm score tolerance, standardized scale
    max_iter: int = 100
    diverge_bound: float = 1e4       # slope 2-norm bound, standardized scale
    armijo: float = 1e-4
    max_halvings: int = 50
    starts: int = 7                  # multi-start count for non-log-concave links
    ridge: float = 1e-10             # Hessian eigenvalue floor factor
    rank_tolerance: float = 1e-10

    def validate(self) -> None:
        if self.tol <= 0 or self.diverge_bound <= 0 or self.rank_tolerance <= 0:
            raise ConfigError("tolerances must be positive")
        if self.max_iter <= 0 or self.max_halvings <= 0 or self.starts <= 0:
            raise ConfigError("iteration counts must be positive")


@dataclass(frozen=True)
class FitResult:
    params: Parameters
    loglik: float
    score_norm: float
    iterations: int
    status: str
    hessian_condition: float
    caveat: Optional[str] = None
    history: Tuple[float, ...] = field(default=())


def _theta(p: Parameters) -> np.ndarray:
    return np.concatenate([[p.alpha], np.asarray(p.beta, dtype=float)])


def _extended(ds: Dataset) -> np.ndarray:
    return np.column_stack([np.ones(ds.n), ds.x])


def _loglik(xt: np.ndarray, y: np.ndarray, link: LinkFamily, theta: np.ndarray) -> float:
    z = xt @ theta
    terms = np.where(y == 1, link.log_cdf(z), link.log_sf(z))
    return float(np.sum(terms))


def _weights(xt, y, link, theta):
    """Per-observation score weight w_i and its z-derivative.

    w_i = g/G for successes and -g/(1-G) for failures, computed through log
    forms so extreme linear predictors stay finite. Assumes every linear
    predictor lies in the support interior (fit only evaluates these at
    points of finite log likelihood).
    """
    z = xt @ theta
    with np.errstate(invalid="ignore", over="ignore"):
        u = np.exp(link.log_pdf(z) - link.log_cdf(z))
        v = np.exp(link.log_pdf(z) - link.log_sf(z))
        slope = link.pdf_log_slope(z)
    is1 = y == 1
    w = np.where(is1, u, -v)
    dw = np.where(is1, u * (slope - u), -v * (slope + v))
    return w, dw


def _score(xt, y, link, theta) -> np.ndarray:
    w, _ = _weights(xt, y, link, theta)
    return xt.T @ w


def _hessian(xt, y, link, theta) -> np.ndarray:
    _, dw = _weights(xt, y, link, theta)
    return xt.T @ (dw[:, None] * xt)


def log_likelihood(ds: Dataset, link: LinkFamily, p: Parameters) -> float:
    """Sum of y*log G(z) + (1-y)*log(1-G(z)) with z = alpha + x'beta.

    May be -inf for bounded-support links when some z falls outside the
    support on the wrong side.
    """
    return _loglik(_extended(ds), ds.y, link, _theta(p))


def score(ds: Dataset, link: LinkFamily, p: Parameters) -> np.ndarray:
    """Gradient of the log likelihood in (alpha, beta); length d+1."""
    return _score(_extended(ds), ds.y, link, _theta(p))


def hessian(ds: Dataset, link: LinkFamily, p: Parameters) -> np.ndarray:
    """Analytic second derivative matrix; symmetric, (d+1) x (d+1)."""
    return _hessian(_extended(ds), ds.y, link, _theta(p))


def _ascent_direction(H: np.ndarray, g: np.ndarray, ridge: float) -> np.ndarray:
    # clamp eigenvalues away from zero on the negative side; for concave
    # objectives this is plain Newton, otherwise a descent-safe modification
    evals, evecs = np.linalg.eigh(H)
    floor = ridge * max(1.0, float(np.abs(evals).sum()))
    clamped = np.minimum(evals, -floor)
    return -evecs @ ((evecs.T @ g) / clamped)


def _hessian_condition(H: np.ndarray) -> float:
    evals = np.abs(np.linalg.eigvalsh(H))
    if evals.min() == 0.0:
        return math.inf
    return float(evals.max() / evals.min())


class _Trace:
    def __init__(self):
        self.history = []
        self.iterations = 0

    def accept(self, value: float):
        self.history.append(value)
        self.iterations += 1


def _newton(xt, y, link, theta, opts: FitOptions, trace: _Trace,
            max_iter: Optional[int] = None, stop_on_score: bool = True):
    """Damped Newton with Armijo backtracking. Returns (theta, flag)."""
    limit = opts.max_iter if max_iter is None else max_iter
    f = _loglik(xt, y, link, theta)
    for _ in range(limit):
        g = _score(xt, y, link, theta)
        if stop_on_score and np.max(np.abs(g)) <= opts.tol:
            return theta, "converged"
        if np.linalg.norm(theta[1:]) > opts.diverge_bound:
            return theta, "diverged"
        H = _hessian(xt, y, link, theta)
        direction = _ascent_direction(H, g, opts.ridge)
        slope = float(g @ direction)
        if not np.isfinite(slope) or slope <= 0:
            return theta, "stalled"
        step = 1.0
        accepted = False
        # near the optimum the true gain underflows below the float
        # resolution of the objective; the noise allowance lets the final
        # full Newton steps through instead of stalling on one-ulp dips
        noise = 1e-12 * (1.0 + abs(f))
        for _ in range(opts.max_halvings):
            cand = theta + step * direction
            f_cand = _loglik(xt, y, link, cand)
            if np.isfinite(f_cand) and f_cand >= f + opts.armijo * step * slope - noise:
                theta, f = cand, max(f, f_cand)
                trace.accept(f_cand)
                accepted = True
                break
            step *= 0.5
        if not accepted:
            return theta, "stalled"
    g = _score(xt, y, link, theta)
    if stop_on_score and np.max(np.abs(g)) <= opts.tol:
        return theta, "converged"
    return theta, "maxiter"


def _march_to_divergence(xt, y, link, theta, gamma, opts: FitOptions, trace: _Trace):
    """Doubling steps along a separating direction until the slope norm
    crosses the divergence bound. The log likelihood is nondecreasing along
    gamma by construction (each term's argument moves toward its label's
    favorable side); tiny float wobble is tolerated."""
    f = _loglik(xt, y, link, theta)
    step = 1.0
    while np.linalg.norm(theta[1:]) <= opts.diverge_bound:
        cand = theta + step * gamma
        f_cand = _loglik(xt, y, link, cand)
        if f_cand >= f - 1e-9 * (1.0 + abs(f)):
            theta = cand
            f = max(f, f_cand)
            trace.accept(f_cand)
            step *= 2.0
        else:  # float wobble guard; take smaller moves
            step *= 0.5
            if step < 1e-8:
                break
    return theta


def _standardize(x: np.ndarray):
    center = x.mean(axis=0)
    spread = np.max(np.abs(x - center), axis=0)
    spread[spread == 0.0] = 1.0
    return (x - center) / spread, center, spread


def _to_raw(theta_std: np.ndarray, center: np.ndarray, spread: np.ndarray) -> Parameters:
    beta = theta_std[1:] / spread
    alpha = float(theta_std[0] - center @ beta)
    beta = np.array(beta)
    beta.setflags(write=False)
    return Parameters(alpha=alpha, beta=beta)


def _multistart_points(theta0: np.ndarray, count: int) -> list:
    pts = [theta0.copy()]
    dim = theta0.size
    k = 1
    while len(pts) < count:
        axis = (k - 1) % dim
        magnitude = 2.0 * (1 + (k - 1) // (2 * dim))
        sign = 1.0 if (k - 1) // dim % 2 == 0 else -1.0
        cand = theta0.copy()
        cand[axis] += sign * magnitude
        pts.append(cand)
        k += 1
    return pts


def fit(ds: Dataset, link: LinkFamily, options: Optional[FitOptions] = None) -> FitResult:
    """Maximize the log likelihood; see the module docstring for the
    convergence/divergence protocol.

    Status values: Converged (score within tolerance at an interior
    maximum), Diverged (groups separated; slope escaped the bound with the
    log likelihood still climbing), MaxIterations, NotUnique (design matrix
    numerically rank-deficient; the returned point still maximizes the
    likelihood but not uniquely). Non-log-concave links are fitted from
    ``options.starts`` spread starting points and the best local optimum is
    returned with a caveat.
    """
    opts = options or FitOptions()
    opts.validate()

    xs, center, spread = _standardize(ds.x)
    xt = np.column_stack([np.ones(ds.n), xs])
    y = ds.y

    sv = np.linalg.svd(xt, compute_uv=False)
    rank = int(np.sum(sv > opts.rank_tolerance * sv[0])) if sv[0] > 0 else 0
    rank_ok = rank == ds.d + 1

    p_hat = ds.n1 / ds.n
    theta0 = np.zeros(ds.d + 1)
    theta0[0] = link.inverse(p_hat)

    verdict = None
    if rank_ok:
        try:
            verdict = cone_overlap(xt, y).verdict
        except LPNumericalFailure:
            if ds.d == 1:
                verdict = scalar_overlap(ds).verdict
            # otherwise proceed as if overlapping; Newton's own divergence
            # bound remains as a backstop

    trace = _Trace()
    caveat = None

    if not rank_ok:
        theta, _ = _newton(xt, y, link, theta0, opts, trace)
        status = NOT_UNIQUE
        caveat = "design matrix is rank-deficient; maximizer is not unique"
    elif verdict == SEPARATED or verdict == DEGENERATE:
        gamma = separating_direction(xt, y)
        if gamma is None:
            # margin below t_min but no weakly separating direction: the
            # groups overlap by less than the cone tolerance; fall back to
            # plain Newton and report its natural outcome
            theta, flag = _newton(xt, y, link, theta0, opts, trace)
            status = {"converged": CONVERGED, "diverged": DIVERGED,
                      "maxiter": MAX_ITERATIONS, "stalled": MAX_ITERATIONS}[flag]
            caveat = "overlap margin below tolerance; treat the fit as fragile"
        else:
            theta, flag = _newton(xt, y, link, theta0, opts, trace,
                                  max_iter=min(opts.max_iter, 25))
            if flag != "diverged":
                theta = _march_to_divergence(xt, y, link, theta, gamma, opts, trace)
            status = DIVERGED
    elif link.claims_log_concave:
        theta, flag = _newton(xt, y, link, theta0, opts, trace)
        status = {"converged": CONVERGED, "diverged": DIVERGED,
                  "maxiter": MAX_ITERATIONS, "stalled": MAX_ITERATIONS}[flag]
    else:
        caveat = "link is not log-concave: best local optimum from multi-start"
        best = None
        for point in _multistart_points(theta0, opts.starts):
            sub_trace = _Trace()
            theta_k, flag_k = _newton(xt, y, link, point, opts, sub_trace)
            ll_k = _loglik(xt, y, link, theta_k)
            key = (flag_k == "converged", ll_k)
            if best is None or key > best[0]:
                best = (key, theta_k, flag_k, sub_trace)
        _, theta, flag, sub_trace = best
        trace = sub_trace
        status = {"converged": CONVERGED, "diverged": DIVERGED,
                  "maxiter": MAX_ITERATIONS, "stalled": MAX_ITERATIONS}[flag]

    loglik = _loglik(xt, y, link, theta)
    score_std = _score(xt, y, link, theta)
    score_norm = float(np.max(np.abs(score_std)))
    hess_cond = _hessian_condition(_hessian(xt, y, link, theta))

    return FitResult(
        params=_to_raw(theta, center, spread),
        loglik=loglik,
        score_norm=score_norm,
        iterations=trace.iterations,
        status=status,
        hessian_condition=hess_cond,
        caveat=caveat,
        history=tuple(trace.history),
    )
