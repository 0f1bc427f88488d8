"""Basis transforms for the one-parameter Mobius action on the first variable.

The map z_1 -> (z_1 - zeta) / (1 + conj(zeta) z_1) lifts to a unitary change
of basis on the coefficient space: the shifted weighted monomial

    e_j(z) = sqrt(binom(N, j)) (1+|zeta|^2)^(-(j_1+j_0)/2)
             * (z_1 - zeta)^(j_1) (1 + conj(zeta) z_1)^(j_0)
             * z_2^(j_2) ... z_m^(j_m),        j_0 = N - |j|,

expands exactly in the unweighted monomial basis, and stacking those
expansions (divided by the target weights) gives a D x D unitary matrix U
with alpha = U alpha'.  Sampling alpha' i.i.d. Gaussian and pushing through
U therefore reproduces the original ensemble law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensemble import (
    EnsembleSpec,
    _entries,
    index_position,
    multi_index_matrix,
    multinomial_log_table,
)


@dataclass(frozen=True)
class MobiusParameter:
    """Parameter zeta of the Mobius map acting on the first coordinate."""

    zeta: complex

    def __post_init__(self):
        z = complex(self.zeta)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ValueError("zeta must be finite")
        object.__setattr__(self, "zeta", z)


@dataclass(frozen=True)
class BasisTransform:
    """Unitary coefficient transform for one (spec, zeta) pair."""

    spec: EnsembleSpec
    zeta: complex
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        d = self.spec.dimension
        if mat.shape != (d, d):
            raise ValueError(f"matrix must be ({d}, {d}), got {mat.shape}")
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "zeta", complex(self.zeta))


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def expand_shifted_basis(spec: EnsembleSpec, zeta, j) -> np.ndarray:
    """Expansion column of one shifted basis vector e_j.

    Returns the length-D vector of coefficients of e_j over the weighted
    monomials sqrt(binom(N, i)) z^i, in canonical index order.  Only the
    first coordinate participates in the shift, so the column is supported
    on indices i with (i_2, ..., i_m) = (j_2, ..., j_m).
    """
    if isinstance(zeta, MobiusParameter):
        zeta = zeta.zeta
    zeta = complex(zeta)
    ent = _entries(j)
    if len(ent) != spec.m:
        raise ValueError(f"multi-index has {len(ent)} entries, expected {spec.m}")
    s = sum(ent)
    if s > spec.N or any(v < 0 for v in ent):
        raise ValueError(f"multi-index {ent} out of range for N={spec.N}")

    pos = index_position(spec.m, spec.N)
    lw = multinomial_log_table(spec.m, spec.N)
    col = np.zeros(spec.dimension, dtype=np.complex128)

    j1 = ent[0]
    j0 = spec.N - s
    tail = ent[1:]

    if zeta == 0:
        col[pos[ent]] = 1.0
        return col

    az = abs(zeta)
    th = math.atan2(zeta.imag, zeta.real)
    log_az = math.log(az)
    base = 0.5 * _weight_log(spec, ent) - 0.5 * (j1 + j0) * math.log1p(az * az)

    # (z_1 - zeta)^(j1) (1 + conj(zeta) z_1)^(j0) = sum_p g_p z_1^p with
    # g_p = sum_a binom(j1, a) binom(j0, p-a) (-zeta)^(j1-a) conj(zeta)^(p-a);
    # accumulate each g_p in log-magnitude / phase form.
    for p in range(j1 + j0 + 1):
        a_lo = max(0, p - j0)
        a_hi = min(j1, p)
        if a_lo > a_hi:
            continue
        lmags = []
        phases = []
        for a in range(a_lo, a_hi + 1):
            b = p - a
            lmags.append(_log_binom(j1, a) + _log_binom(j0, b) + (j1 - a + b) * log_az)
            phases.append((j1 - a) * (math.pi + th) - b * th)
        lmags = np.array(lmags)
        phases = np.array(phases)
        mx = lmags.max()
        acc = np.exp(lmags - mx + 1j * phases).sum()
        if acc == 0:
            continue
        target = (p,) + tail
        i = pos[target]
        lm = mx + math.log(abs(acc)) + base - 0.5 * lw[i]
        col[i] = math.exp(lm) * acc / abs(acc)
    return col


def _weight_log(spec: EnsembleSpec, ent) -> float:
    """Table lookup of the log multinomial weight for one multi-index."""
    return float(multinomial_log_table(spec.m, spec.N)[index_position(spec.m, spec.N)[tuple(ent)]])


def shifted_value_normalized(spec: EnsembleSpec, zeta, alpha_prime, z) -> complex:
    """Normalized value of sum_j alpha'_j e_j(z) straight from the closed form.

    Multiplies out (z_1 - zeta)^(j_1) (1 + conj(zeta) z_1)^(j_0) numerically
    per index, with no basis-expansion matrix involved, so it provides an
    independent route for checking transform_coefficients pointwise.  Plain
    double arithmetic: intended for the moderate N used in invariance
    checks, not for large degree.
    """
    if isinstance(zeta, MobiusParameter):
        zeta = zeta.zeta
    zeta = complex(zeta)
    v = np.asarray(alpha_prime, dtype=np.complex128)
    if v.shape != (spec.dimension,):
        raise ValueError(f"alpha' must have shape ({spec.dimension},), got {v.shape}")
    zz = np.asarray(z.coords if hasattr(z, "coords") else z, dtype=np.complex128).reshape(-1)
    if len(zz) != spec.m:
        raise ValueError(f"point has {len(zz)} coordinates, expected {spec.m}")
    J = multi_index_matrix(spec.m, spec.N)
    lw = multinomial_log_table(spec.m, spec.N)
    z1 = zz[0]
    opz = 1.0 + abs(zeta) ** 2
    total = 0.0 + 0.0j
    for k, row in enumerate(J):
        j1 = int(row[0])
        s = int(row.sum())
        j0 = spec.N - s
        term = (
            math.exp(0.5 * lw[k] - 0.5 * (j1 + j0) * math.log(opz))
            * (z1 - zeta) ** j1
            * (1.0 + zeta.conjugate() * z1) ** j0
        )
        for kk in range(1, spec.m):
            term *= zz[kk] ** int(row[kk])
        total += v[k] * term
    norm_sq = float((np.abs(zz) ** 2).sum())
    return complex(total * math.exp(-0.5 * spec.N * math.log1p(norm_sq)))


def build_basis_transform(spec: EnsembleSpec, zeta) -> BasisTransform:
    """Full D x D transform: column k is the expansion of e_{j_k}."""
    if isinstance(zeta, MobiusParameter):
        zeta = zeta.zeta
    zeta = complex(zeta)
    J = multi_index_matrix(spec.m, spec.N)
    mat = np.empty((spec.dimension, spec.dimension), dtype=np.complex128)
    for k, row in enumerate(J):
        mat[:, k] = expand_shifted_basis(spec, zeta, tuple(int(v) for v in row))
    return BasisTransform(spec=spec, zeta=zeta, matrix=mat)


def transform_coefficients(transform: BasisTransform, alpha_prime) -> np.ndarray:
    """alpha = U alpha' for a coefficient vector in canonical order."""
    v = np.asarray(alpha_prime, dtype=np.complex128)
    d = transform.spec.dimension
    if v.shape != (d,):
        raise ValueError(f"alpha' must have shape ({d},), got {v.shape}")
    return transform.matrix @ v


def unitarity_defect(transform: BasisTransform) -> float:
    """max |U U^H - I|, a cheap certificate that the transform is unitary."""
    u = transform.matrix
    d = u.shape[0]
    return float(np.abs(u @ u.conj().T - np.eye(d)).max())


def invariant_norm(psi) -> float:
    """L^2 norm of psi on C^m under the Gaussian-normalized SU(m+1) metric.

    By orthonormality of the weighted monomials this is just the l2 norm of
    the coefficient vector; the Mobius action leaves it invariant.
    """
    return float(np.linalg.norm(psi.alpha))


def invariant_norm_mc(psi, n_samples: int, stream: np.random.Generator) -> float:
    """Monte Carlo estimate of invariant_norm by direct integration.

    Samples Z from the Fubini-Study probability density proportional to
    (1+|z|^2)^(-(m+1)) dV(z); against it the norm integral reduces to

        norm^2 = binom(N+m, m) * E |psi(Z)|^2 / (1+|Z|^2)^N,

    with every constant cancelling exactly.  The radial law is realized by
    inverse-CDF: |Z|^2/(1+|Z|^2) ~ Beta(m, 1), i.e. U^(1/m) for uniform U;
    directions are uniform on the sphere.  The integrand is bounded by
    ||alpha||^2, so the estimate converges at the plain 1/sqrt(n) rate.
    This is the cross-check route, kept deliberately independent of the
    coefficient-space identity.
    """
    from .ensemble import (
        _direct_values_possible,
        _eval_log_batch,
        _normalized_values_direct,
    )

    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    spec = psi.spec
    m = spec.m

    x = stream.random(n_samples) ** (1.0 / m)
    radius = np.sqrt(x / (1.0 - x))
    g = stream.standard_normal((n_samples, 2 * m))
    gc = g[:, 0::2] + 1j * g[:, 1::2]
    gn = np.linalg.norm(gc, axis=1)
    pts = radius[:, None] * gc / gn[:, None]

    if _direct_values_possible(psi):
        vals = _normalized_values_direct(psi, pts)
        vmag = np.abs(vals)
        with np.errstate(divide="ignore"):
            two_la = 2.0 * np.where(vmag > 0, np.log(np.where(vmag > 0, vmag, 1.0)), -np.inf)
    else:
        logmag, _ = _eval_log_batch(psi, pts)
        two_la = 2.0 * logmag
    # mean of |normalized value|^2 via log-sum-exp, safe for any scale
    mx = two_la.max()
    if not np.isfinite(mx):
        return 0.0
    mean_log = mx + math.log(np.exp(two_la - mx).mean())
    return math.sqrt(spec.dimension) * math.exp(0.5 * mean_log)
