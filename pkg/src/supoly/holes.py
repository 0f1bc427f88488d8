"""Hole probabilities: Monte Carlo estimates, an exact lower-bound
certificate, and decay-exponent fits.

A hole event at radius r is "psi has no zero with |z| < r" (open ball).
The Monte Carlo route finds roots per trial; the certificate route bounds
P(hole) from below by the probability of an explicit coefficient event
(large constant term, small higher terms) that forces a hole, computed
term by term in log space so it stays exact arbitrarily deep in the tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .ensemble import (
    EnsembleSpec,
    SUPolynomial,
    _lgamma_sum_by_degree,
    multinomial_log_table,
    sample_alpha_block,
    trial_stream,
)
from .errors import DegeneratePolynomialError
from .zeros import (
    _ZERO_MAG,
    _aberth_batch,
    _resolve_circle,
    expected_counting,
    roots_m1,
)

# log(1 - e^-1): certified floor for a per-term factor once lambda >= 1
_LOG_1ME1 = math.log(-math.expm1(-1.0))


@dataclass(frozen=True)
class HoleEstimate:
    """Monte Carlo hole-probability estimate at one (spec, radius)."""

    spec: EnsembleSpec
    radius: float
    trials: int
    hits: int
    p_hat: float
    stderr: float


@dataclass(frozen=True)
class OmegaBound:
    """Exact lower bound on log P(hole) from the coefficient certificate.

    log_prob = log P(Omega) with
    Omega = { |alpha_0| >= 1 } and, for 0 < |j| <= N,
            { |alpha_j| < binom(N,j)^(-1/2) N^(-m) r^(-|j|) },
    evaluated term by term:  -1 + sum_j log(1 - exp(-lambda_j^2)).
    Every floating-point shortcut rounds downward, so the reported value
    is a true certificate: P(hole) >= P(Omega) >= exp(log_prob).
    """

    spec: EnsembleSpec
    radius: float
    log_prob: float
    term_count: int


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of log(-log p) = log_c + beta log N.

    points holds the (N, log(-log p)) pairs actually fitted; residual_rms
    is the root-mean-square vertical residual of the fit.
    """

    points: tuple
    beta: float
    log_c: float
    residual_rms: float


def _distance_rows(spec: EnsembleSpec, alpha_rows: np.ndarray) -> np.ndarray:
    """Root moduli for each coefficient row; shape (B, N).

    Rows whose extreme weighted coefficients vanish are routed through the
    scalar path and padded with +inf for roots lost to degree deficit.
    """
    if spec.m != 1:
        raise ValueError(f"exact hole counting needs m = 1, got m = {spec.m}")
    N = spec.N
    lw = 0.5 * multinomial_log_table(1, N)
    if float(lw.max()) > 700.0:
        raise ValueError(f"degree N={N} too large for direct root finding")

    amag = np.abs(alpha_rows)
    with np.errstate(divide="ignore"):
        lm = np.where(amag > 0, np.log(np.where(amag > 0, amag, 1.0)) + lw[None, :], -np.inf)
    top = lm.max(axis=1)
    if not np.all(np.isfinite(top)):
        raise DegeneratePolynomialError("a trial drew an all-zero coefficient vector")
    c = np.exp(lm - top[:, None]) * np.where(amag > 0, alpha_rows / np.where(amag > 0, amag, 1.0), 0.0)

    ok = (np.abs(c[:, 0]) > _ZERO_MAG) & (np.abs(c[:, -1]) > _ZERO_MAG)
    out = np.empty((alpha_rows.shape[0], N), dtype=np.float64)
    if ok.any():
        roots = _aberth_batch(c[ok], top[ok], N, 0)
        out[ok] = np.abs(roots)
    for t in np.flatnonzero(~ok):
        rs = roots_m1(SUPolynomial(spec, alpha_rows[t]))
        dist = np.abs(rs.roots)
        out[t] = np.concatenate([dist, np.full(N - len(dist), np.inf)])
    return out


def hole_indicator_m1(psi: SUPolynomial, r: float) -> bool:
    """True iff psi has no root with |z| < r (m = 1).

    Roots exactly on the circle do not break the hole; boundary-ambiguous
    configurations are re-tested on a circle shrunk by a relative 1e-6.
    """
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    if psi.spec.m != 1:
        raise ValueError(f"hole indicator needs m = 1, got m = {psi.spec.m}")
    if psi.spec.N == 0:
        if abs(psi.alpha[0]) == 0.0:
            raise DegeneratePolynomialError("zero constant polynomial")
        return True
    dist = np.abs(roots_m1(psi).roots)
    if len(dist) < psi.spec.N:
        dist = np.concatenate([dist, np.full(psi.spec.N - len(dist), np.inf)])
    r_eff = _resolve_circle(dist[None, :], r)
    return bool((dist >= r_eff[0]).all())


def hole_hits(spec: EnsembleSpec, r: float, start_trial: int, count: int) -> int:
    """Number of hole events among trials start_trial .. start_trial+count-1.

    Per-trial streams make the result independent of how trials are split
    into calls, so workers can chunk this any way they like.
    """
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if spec.N == 0:
        return count
    hits = 0
    batch = 4096
    for lo in range(start_trial, start_trial + count, batch):
        n = min(batch, start_trial + count - lo)
        alpha = sample_alpha_block(spec, lo, n)
        dist = _distance_rows(spec, alpha)
        r_eff = _resolve_circle(dist, r)
        hits += int((dist >= r_eff[:, None]).all(axis=1).sum())
    return hits


def hole_probability_mc(spec: EnsembleSpec, r: float, trials: int) -> HoleEstimate:
    """Monte Carlo hole probability over the given number of trials.

    p_hat = hits / trials; stderr is the binomial standard error
    sqrt(p_hat (1 - p_hat) / trials).
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    hits = hole_hits(spec, r, 0, trials)
    p = hits / trials
    se = math.sqrt(p * (1.0 - p) / trials)
    return HoleEstimate(
        spec=spec, radius=float(r), trials=int(trials), hits=int(hits), p_hat=p, stderr=se
    )


def omega_lower_bound(spec: EnsembleSpec, r: float) -> OmegaBound:
    """Exact log P(Omega), a certified lower bound for log P(hole at r).

    Accumulates -1 + sum over 0 < |j| <= N of log(1 - exp(-lambda_j^2)),
    lambda_j = binom(N,j)^(-1/2) N^(-m) r^(-|j|), grouped by total degree.
    Tail branches: when lambda_j^2 underflows below e^-700 the term equals
    log(lambda_j^2) to machine accuracy; when exp(-lambda_j^2) underflows
    to 0 the term is floored at log(1 - e^-1), which only ever rounds the
    bound down.
    """
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    m, N = spec.m, spec.N
    if N < 1:
        raise ValueError(f"certificate needs N >= 1, got N = {N}")
    log_n = math.log(N)
    log_r = math.log(r)
    lg_top = gammaln(N + 1.0)
    total = -1.0
    terms = 0
    for s in range(1, N + 1):
        lam_sq_log = (
            -(lg_top - gammaln(N - s + 1.0) - _lgamma_sum_by_degree(m, s))
            - 2.0 * m * log_n
            - 2.0 * s * log_r
        )
        with np.errstate(over="ignore"):
            x = np.exp(np.minimum(lam_sq_log, 700.0))
        small = x < math.log(2.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            t_small = np.log(-np.expm1(-np.where(small, x, 1.0)))
            e = np.exp(-np.where(small, 1.0, x))
            t_big = np.where(e > 0.0, np.log1p(-e), _LOG_1ME1)
        term = np.where(small, t_small, t_big)
        term = np.where(lam_sq_log < -700.0, lam_sq_log, term)
        total += float(term.sum())
        terms += len(term)
    return OmegaBound(spec=spec, radius=float(r), log_prob=total, term_count=terms)


def sample_omega_conditioned(spec: EnsembleSpec, r: float, trial: int) -> SUPolynomial:
    """Draw a polynomial from the ensemble conditioned on the Omega event.

    Inverse-CDF sampling on each coefficient modulus: |alpha_0|^2 is a unit
    exponential shifted above 1, each |alpha_j|^2 a unit exponential
    truncated below lambda_j^2; phases are uniform.  Draw order is fixed:
    2 D uniforms per trial, consumed as interleaved (quantile, phase) pairs
    in canonical index order.
    """
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    if spec.N < 1:
        raise ValueError(f"conditioned sampler needs N >= 1, got N = {spec.N}")
    d = spec.dimension
    u = trial_stream(spec.seed, trial).random(2 * d)
    uq = u[0::2]
    up = u[1::2]

    lam_sq_log = _lambda_sq_log_full(spec, r)
    with np.errstate(over="ignore"):
        lam_sq = np.exp(lam_sq_log)
    cap = -np.expm1(-lam_sq)
    mod_sq = -np.log1p(-uq * cap)
    mod_sq[0] = 1.0 - math.log1p(-uq[0])
    alpha = np.sqrt(mod_sq) * np.exp(2j * np.pi * up)
    return SUPolynomial(spec, alpha)


def _lambda_sq_log_full(spec: EnsembleSpec, r: float) -> np.ndarray:
    from .ensemble import degree_table

    deg = degree_table(spec.m, spec.N)
    return (
        -multinomial_log_table(spec.m, spec.N)
        - 2.0 * spec.m * math.log(spec.N)
        - 2.0 * deg * math.log(r)
    )


def sanity_check_omega(spec: EnsembleSpec, r: float, trials: int) -> float:
    """Fraction of Omega-conditioned samples that produce a hole at r.

    The certificate event forces |psi| > 0 on the closed ball of radius r,
    so the fraction must be exactly 1; anything less indicates a defect in
    the certificate, the sampler, or the root finder.
    """
    if spec.m != 1:
        raise ValueError(f"sanity check needs m = 1, got m = {spec.m}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    alpha = np.stack(
        [sample_omega_conditioned(spec, r, t).alpha for t in range(trials)]
    )
    dist = _distance_rows(spec, alpha)
    r_eff = _resolve_circle(dist, r)
    holes = (dist >= r_eff[:, None]).all(axis=1)
    return float(holes.mean())


def _fit_line(x: np.ndarray, y: np.ndarray):
    beta, intercept = np.polyfit(x, y, 1)
    resid = y - (intercept + beta * x)
    return float(beta), float(intercept), float(np.sqrt(np.mean(resid**2)))


def fit_decay_exponent(points) -> DecayFit:
    """Fit log(-log p) = log_c + beta log N to (N, p) pairs.

    Requires at least 3 points, N >= 1, and every p strictly inside (0, 1);
    anything else raises ValueError.  Callers with zero-hit estimates must
    filter them out (and say so) before fitting.
    """
    pts = [(int(n), float(p)) for n, p in points]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points to fit, got {len(pts)}")
    for n, p in pts:
        if n < 1:
            raise ValueError(f"N must be >= 1, got {n}")
        if not (0.0 < p < 1.0):
            raise ValueError(f"p must lie strictly in (0, 1), got p={p!r} at N={n}")
    if len({n for n, _ in pts}) < 2:
        raise ValueError("need at least 2 distinct N values to fit")
    x = np.log([n for n, _ in pts])
    y = np.log([-math.log(p) for _, p in pts])
    beta, log_c, rms = _fit_line(x, np.asarray(y))
    fitted = tuple((n, float(yy)) for (n, _), yy in zip(pts, y))
    return DecayFit(points=fitted, beta=beta, log_c=log_c, residual_rms=rms)


def fit_omega_exponent(bounds) -> DecayFit:
    """Decay fit over certificate bounds, working from log_prob directly.

    Uses y = log(-log_prob) without ever forming p = exp(log_prob), so the
    fit survives bounds far below the smallest positive double.
    """
    bl = list(bounds)
    if len(bl) < 3:
        raise ValueError(f"need at least 3 bounds to fit, got {len(bl)}")
    ms = {b.spec.m for b in bl}
    rs = {b.radius for b in bl}
    if len(ms) != 1 or len(rs) != 1:
        raise ValueError("bounds must share one m and one radius")
    if len({b.spec.N for b in bl}) < 2:
        raise ValueError("need at least 2 distinct N values to fit")
    x = np.log([b.spec.N for b in bl])
    y = np.log([-b.log_prob for b in bl])
    beta, log_c, rms = _fit_line(x, y)
    fitted = tuple((b.spec.N, float(yy)) for b, yy in zip(bl, y))
    return DecayFit(points=fitted, beta=beta, log_c=log_c, residual_rms=rms)


def deviation_counts(spec: EnsembleSpec, r: float, start_trial: int, count: int) -> np.ndarray:
    """Zero counts inside |z| < r for a contiguous block of trials."""
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    out = np.empty(count, dtype=np.int64)
    batch = 4096
    for lo in range(0, count, batch):
        n = min(batch, count - lo)
        alpha = sample_alpha_block(spec, start_trial + lo, n)
        dist = _distance_rows(spec, alpha)
        r_eff = _resolve_circle(dist, r)
        out[lo:lo + n] = (dist < r_eff[:, None]).sum(axis=1)
    return out


def deviation_experiment(
    spec: EnsembleSpec, r: float, delta: float, trials: int
) -> float:
    """Frequency of |count - expected| > delta * N over Monte Carlo trials.

    expected is the ensemble mean N r^2 / (1 + r^2); the returned frequency
    estimates the probability of a macroscopic counting deviation.
    """
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    counts = deviation_counts(spec, r, 0, trials)
    mean = expected_counting(spec.N, r)
    bad = np.abs(counts - mean) > delta * spec.N
    return float(bad.mean())
