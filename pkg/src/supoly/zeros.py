"""Zero statistics on spheres: exact root counting for m = 1 and a
Jensen-type Monte Carlo counter that works in any dimension.

The exact path finds all roots of the degree-N polynomial with a batched
Aberth-Ehrlich iteration (simultaneous Newton corrections with pairwise
repulsion), then counts moduli below the circle radius.  The Jensen path
never touches roots: it estimates sphere averages of log |psi| and converts
their increments to an integrated counting function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .ensemble import (
    SUPolynomial,
    _eval_log_batch,
    log_abs_many,
    multinomial_log_table,
)
from .errors import (
    BoundaryAmbiguityError,
    DegeneratePolynomialError,
    ExactZeroError,
)

# Scaled coefficients below this magnitude count as numerically zero.
_ZERO_MAG = 1.0e-300
# No root may sit within this relative distance of the counting circle.
_BOUNDARY_RTOL = 1.0e-8
_ABERTH_MAX_SWEEPS = 200
_POLISH_MAX_STEPS = 50
_POLISH_TOL = 1.0e-10


@dataclass(frozen=True)
class RootSet:
    """All roots of one polynomial, canonically ordered by (|z|, arg z)."""

    roots: np.ndarray
    residuals: np.ndarray
    degree_deficit: int

    def __post_init__(self):
        r = np.asarray(self.roots, dtype=np.complex128).copy()
        s = np.asarray(self.residuals, dtype=np.float64).copy()
        if r.shape != s.shape or r.ndim != 1:
            raise ValueError("roots and residuals must be matching 1-d arrays")
        r.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "roots", r)
        object.__setattr__(self, "residuals", s)


@dataclass(frozen=True)
class SphereAverage:
    """Monte Carlo sphere average of log |psi| on |z| = radius."""

    radius: float
    samples: int
    mean_log_abs: float
    stderr: float


@dataclass(frozen=True)
class CountingEstimate:
    """Jensen-type estimate of the number of zeros with |z| < r.

    value is the forward difference of integrated counting over [r, kappa*r]
    divided by log kappa; lower_anchor uses [r/kappa, r] instead.  For a
    radial zero distribution the true count lies between the two anchors in
    expectation, and both converge to it as kappa -> 1.
    """

    value: float
    kappa: float
    lower_anchor: float
    upper_anchor: float
    stat_error: float


@lru_cache(maxsize=None)
def _start_phases(d: int) -> np.ndarray:
    """Deterministic near-uniform start angles for degree d.

    Keyed by the degree only, so every trial in a batch gets the same
    starting configuration and results do not depend on batch partition.
    The random offsets break conjugate symmetry, which stalls the sweep.
    """
    g = np.random.Generator(np.random.Philox(key=np.array([0xA8E27B11, d], dtype=np.uint64)))
    u = g.random(d + 1)
    base = 2.0 * np.pi * (np.arange(d) + 0.5) / d
    jitter = (0.8 * np.pi / d) * (u[1:] - 0.5)
    out = base + jitter + 2.0 * np.pi * u[0]
    out.setflags(write=False)
    return out


def _horner_pair(c: np.ndarray, z: np.ndarray):
    """Value and derivative of sum_k c[:, k] z^k, batched over rows."""
    d = c.shape[1] - 1
    p = np.broadcast_to(c[:, d:d + 1], z.shape).copy()
    dp = np.zeros_like(z)
    for k in range(d - 1, -1, -1):
        dp = dp * z + p
        p = p * z + c[:, k:k + 1]
    return p, dp


def _newton_ratio_and_logabs(c: np.ndarray, z: np.ndarray):
    """(p/p', log|p|) at points z, overflow-safe for |z| above 1.

    For |z| > 1 the polynomial is evaluated through its reversal q at
    u = 1/z:  p(z) = z^d q(u)  and  p'/p = (d u - u^2 q'(u)/q(u)).
    """
    d = c.shape[1] - 1
    az = np.abs(z)
    inside = az <= 1.0
    zs = np.where(inside, z, 0.0)
    p_in, dp_in = _horner_pair(c, zs)

    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(inside, 0.0, 1.0 / np.where(z == 0, 1.0, z))
    q, dq = _horner_pair(c[:, ::-1], u)

    with np.errstate(divide="ignore", invalid="ignore"):
        w_in = p_in / dp_in
        inv_w_out = d * u - u * u * (dq / q)
        w_out = 1.0 / inv_w_out
        w = np.where(inside, w_in, w_out)

        la_in = np.log(np.abs(p_in))
        la_out = d * np.log(np.where(az > 0, az, 1.0)) + np.log(np.abs(q))
        la = np.where(inside, la_in, la_out)
    return w, la


def _aberth_batch(c: np.ndarray, slog: np.ndarray, n_full: int, k0: int = 0) -> np.ndarray:
    """Roots of each row of c (ascending powers, scaled to max |c| = 1).

    Rows must have first and last entries above _ZERO_MAG.  slog holds the
    per-row log of the scale factor that was divided out; together with the
    full degree n_full and the count k0 of stripped origin roots it fixes
    the normalized-residual target used while polishing.  Trials that fail
    to converge in _ABERTH_MAX_SWEEPS fall back to companion-matrix
    eigenvalues.  Each trial is frozen the moment its own corrections drop
    below tolerance, so results are independent of which other trials share
    the batch.
    """
    B, width = c.shape
    d = width - 1
    if d < 1:
        return np.empty((B, 0), dtype=np.complex128)

    with np.errstate(divide="ignore", over="ignore"):
        rho = (np.abs(c[:, 0]) / np.abs(c[:, d])) ** (1.0 / d)
    rho = np.where(np.isfinite(rho) & (rho > 0), rho, 1.0)
    z = rho[:, None] * np.exp(1j * _start_phases(d))[None, :]

    active = np.ones(B, dtype=bool)
    eye = np.eye(d, dtype=bool)
    for _ in range(_ABERTH_MAX_SWEEPS):
        if not active.any():
            break
        za = z[active]
        w, _ = _newton_ratio_and_logabs(c[active], za)
        diff = za[:, :, None] - za[:, None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            recip = 1.0 / diff
        recip[:, eye] = 0.0
        recip[~np.isfinite(recip)] = 0.0
        s = recip.sum(axis=2)
        with np.errstate(invalid="ignore"):
            corr = w / (1.0 - w * s)
        corr = np.where(np.isfinite(corr), corr, 0.0)
        z[active] = za - corr
        done = (np.abs(corr) <= 1e-13 * (1.0 + np.abs(za))).all(axis=1)
        idx = np.flatnonzero(active)
        active[idx[done]] = False

    for t in np.flatnonzero(active):
        # np.roots wants descending powers
        z[t] = np.roots(c[t, ::-1])

    return _polish_batch(c, z, slog, n_full, k0)


def _polish_batch(
    c: np.ndarray, z: np.ndarray, slog: np.ndarray, n_full: int, k0: int
) -> np.ndarray:
    """Newton-polish each root until its normalized residual clears the bar.

    The residual checked is |psi(z)| / (1+|z|^2)^(n_full/2) reconstructed
    from the scaled inner polynomial: log-residual =
    log|p_scaled(z)| + slog + k0 log|z| - (n_full/2) log(1+|z|^2).
    """
    log_tol = math.log(_POLISH_TOL)
    for _ in range(_POLISH_MAX_STEPS):
        w, la = _newton_ratio_and_logabs(c, z)
        az = np.abs(z)
        with np.errstate(divide="ignore"):
            lz = np.where(az > 0, np.log(np.where(az > 0, az, 1.0)), -745.0)
        res = la + slog[:, None] + k0 * lz - 0.5 * n_full * np.log1p(az * az)
        live = res > log_tol
        if not live.any():
            break
        step = np.where(live & np.isfinite(w), w, 0.0)
        # clamp runaway Newton steps so a near-multiple root cannot eject
        smag = np.abs(step)
        lim = 0.5 * (1.0 + az)
        step = np.where(smag > lim, step * (lim / np.where(smag > 0, smag, 1.0)), step)
        z = z - step
    return z


def _scaled_coeff_rows(psi: SUPolynomial):
    """Weighted coefficients of a degree-N one-variable polynomial, scaled
    to max magnitude 1.  Returns (coefficients, log of the scale factor)."""
    spec = psi.spec
    if spec.m != 1:
        raise ValueError(f"exact root finding needs m = 1, got m = {spec.m}")
    lw = 0.5 * multinomial_log_table(1, spec.N)
    amag = np.abs(psi.alpha)
    with np.errstate(divide="ignore"):
        lm = np.where(amag > 0, np.log(np.where(amag > 0, amag, 1.0)) + lw, -np.inf)
    top = float(lm.max())
    if not np.isfinite(top) or top < math.log(_ZERO_MAG):
        raise DegeneratePolynomialError(
            "all weighted coefficients are numerically zero"
        )
    mags = np.exp(lm - top)
    phases = np.where(amag > 0, psi.alpha / np.where(amag > 0, amag, 1.0), 0.0)
    return mags * phases, top


def roots_m1(psi: SUPolynomial) -> RootSet:
    """All finite roots of psi for m = 1, with normalized residuals.

    Exact zero leading coefficients reduce the degree (reported as
    degree_deficit); exact zero trailing coefficients contribute roots at
    the origin.  len(roots) + degree_deficit == N always holds.
    """
    spec = psi.spec
    c, slog = _scaled_coeff_rows(psi)
    N = spec.N
    nz = np.flatnonzero(np.abs(c) > _ZERO_MAG)
    k0 = int(nz[0])
    kN = int(nz[-1])
    deficit = N - kN

    inner = c[k0:kN + 1]
    if kN > k0:
        rts = _aberth_batch(inner[None, :], np.array([slog]), N, k0)[0]
    else:
        rts = np.empty(0, dtype=np.complex128)
    roots = np.concatenate([np.zeros(k0, dtype=np.complex128), rts])

    if len(roots):
        with np.errstate(divide="ignore"):
            logres, _ = _eval_log_batch(psi, roots[:, None])
        residuals = np.exp(logres)
    else:
        residuals = np.empty(0)

    order = np.lexsort((np.angle(roots), np.abs(roots)))
    return RootSet(roots=roots[order], residuals=residuals[order], degree_deficit=deficit)


def _resolve_circle(dist: np.ndarray, r: float):
    """Per-row counting radius with boundary-ambiguity retries.

    Shrinks the circle by a relative 1e-6 step until no root of the row
    sits within the relative 1e-8 boundary band.  Raises after 8 shrinks;
    each shrink moves the circle 100x farther than the band is wide, so a
    second round is only ever needed when distinct roots straddle both
    bands.
    """
    rows = dist.shape[0]
    r_eff = np.full(rows, float(r))
    for _ in range(8):
        near = np.abs(dist - r_eff[:, None]) < _BOUNDARY_RTOL * r_eff[:, None]
        bad = near.any(axis=1)
        if not bad.any():
            return r_eff
        r_eff = np.where(bad, r_eff * (1.0 - 1.0e-6), r_eff)
    raise BoundaryAmbiguityError(
        f"roots persistently within {_BOUNDARY_RTOL:g} of circle radius {r:g}"
    )


def counting_exact_m1(psi: SUPolynomial, r: float) -> int:
    """Number of roots with |z| < r, exact for m = 1.

    Raises BoundaryAmbiguityError when some root lies within a relative
    1e-8 band around |z| = r; callers that can tolerate a perturbed circle
    should catch it and retry with r * (1 - 1e-6).
    """
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    rs = roots_m1(psi)
    dist = np.abs(rs.roots)
    near = np.abs(dist - r) < _BOUNDARY_RTOL * r
    if near.any():
        raise BoundaryAmbiguityError(
            f"root at distance {dist[near][0]:.17g} too close to circle r={r:.17g}"
        )
    return int((dist < r).sum())


def sample_sphere(m: int, r: float, n: int, stream: np.random.Generator) -> np.ndarray:
    """n points uniform on the sphere |z| = r in C^m, as an (n, m) array.

    Normalized complex Gaussian directions; draw order is fixed as 2 m n
    standard normals consumed row by row.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    x = stream.standard_normal((n, 2 * m))
    g = x[:, 0::2] + 1j * x[:, 1::2]
    nrm = np.linalg.norm(g, axis=1)
    return r * g / nrm[:, None]


def sphere_log_average(
    psi: SUPolynomial, r: float, n_samples: int, stream: np.random.Generator
) -> SphereAverage:
    """Monte Carlo mean of log |psi| over the sphere |z| = r.

    A sample that lands exactly on a zero (log = -inf) is redrawn once from
    the same stream; a second hit raises ExactZeroError.  Standard error is
    the sample standard deviation over sqrt(n_samples).
    """
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    pts = sample_sphere(psi.spec.m, r, n_samples, stream)
    vals = log_abs_many(psi, pts)
    bad = ~np.isfinite(vals)
    if bad.any():
        retry = sample_sphere(psi.spec.m, r, int(bad.sum()), stream)
        vals[bad] = log_abs_many(psi, retry)
        if not np.all(np.isfinite(vals)):
            raise ExactZeroError(f"exact zero hit twice on sphere r={r:g}")
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(n_samples))
    return SphereAverage(radius=float(r), samples=int(n_samples), mean_log_abs=mean, stderr=stderr)


@lru_cache(maxsize=1)
def jensen_calibration_constant() -> float:
    """Proportionality constant between counting and log-average increments.

    Calibrated once against psi(z) = z in one variable (N = 1), whose unit
    count and sphere averages log r are exact, then snapped to the nearest
    of the two admissible conventions (1 for log |psi|, 2 for log |psi|^2).
    """
    from .ensemble import EnsembleSpec

    spec = EnsembleSpec(m=1, N=1, seed=0)
    psi = SUPolynomial(spec, np.array([0.0, 1.0], dtype=np.complex128))
    g = np.random.Generator(np.random.Philox(key=np.array([0x5EED, 0xCA1], dtype=np.uint64)))
    r, kappa = 0.7, 2.0
    hi = sphere_log_average(psi, kappa * r, 64, g)
    lo = sphere_log_average(psi, r, 64, g)
    raw = (hi.mean_log_abs - lo.mean_log_abs) / math.log(kappa)
    k = 1.0 / raw
    snapped = min((1.0, 2.0), key=lambda v: abs(v - k))
    if abs(k - snapped) > 1.0e-6:
        raise RuntimeError(f"calibration constant {k!r} not near an admissible value")
    return snapped


def counting_jensen(
    psi: SUPolynomial, r: float, kappa: float, n_samples: int, stream: np.random.Generator
) -> CountingEstimate:
    """Root counting from sphere averages of log |psi|, any dimension.

    Uses three sphere averages, at r/kappa, r, and kappa*r, drawn from the
    stream in that order.  value (= upper_anchor) averages the integrated
    counting function over [r, kappa*r], which dominates the true count at
    r; lower_anchor averages over [r/kappa, r] and is dominated by it.
    """
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    if kappa <= 1:
        raise ValueError(f"kappa must exceed 1, got {kappa}")
    K = jensen_calibration_constant()
    lo = sphere_log_average(psi, r / kappa, n_samples, stream)
    mid = sphere_log_average(psi, r, n_samples, stream)
    hi = sphere_log_average(psi, kappa * r, n_samples, stream)
    lk = math.log(kappa)
    upper = K * (hi.mean_log_abs - mid.mean_log_abs) / lk
    lower = K * (mid.mean_log_abs - lo.mean_log_abs) / lk
    err = K * math.sqrt(hi.stderr**2 + mid.stderr**2) / lk
    return CountingEstimate(
        value=upper, kappa=float(kappa), lower_anchor=lower, upper_anchor=upper, stat_error=err
    )


def expected_counting(N: int, r: float) -> float:
    """Ensemble mean number of zeros with |z| < r for m = 1: N r^2 / (1+r^2)."""
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    return N * r * r / (1.0 + r * r)


def max_log_on_ball(
    psi: SUPolynomial, r: float, n_samples: int, stream: np.random.Generator
) -> float:
    """Monte Carlo maximum of log |psi| over the sphere |z| = r.

    By the maximum principle the sup over the closed ball is attained on
    the sphere, so sphere samples alone give a consistent lower estimate.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    pts = sample_sphere(psi.spec.m, r, n_samples, stream)
    return float(log_abs_many(psi, pts).max())


def poisson_kernel(zeta, z, r: float) -> float:
    """Poisson kernel for the ball |z| < r in C^m (real 2m dimensions).

        P_r(zeta, z) = r^(2m-2) (r^2 - |zeta|^2) / |z - zeta|^(2m)

    zeta must lie strictly inside the ball and z on the sphere |z| = r
    (checked to relative 1e-12); averaging it against boundary values of a
    harmonic function reproduces the interior value.
    """
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    zc = np.asarray(
        zeta.coords if hasattr(zeta, "coords") else zeta, dtype=np.complex128
    ).reshape(-1)
    zb = np.asarray(
        z.coords if hasattr(z, "coords") else z, dtype=np.complex128
    ).reshape(-1)
    if zc.shape != zb.shape:
        raise ValueError("zeta and z must have the same number of coordinates")
    m = len(zc)
    nz = float(np.linalg.norm(zc))
    nb = float(np.linalg.norm(zb))
    if nz >= r:
        raise ValueError(f"zeta must lie strictly inside the ball: |zeta|={nz:g}, r={r:g}")
    if abs(nb - r) > 1.0e-12 * r:
        raise ValueError(f"z must lie on the sphere |z| = r: |z|={nb:.17g}, r={r:.17g}")
    gap = float(np.linalg.norm(zb - zc))
    return r ** (2 * m - 2) * (r * r - nz * nz) / gap ** (2 * m)
