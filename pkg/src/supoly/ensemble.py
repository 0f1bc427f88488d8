"""Gaussian SU(m+1) polynomial ensembles.

Multi-index bookkeeping, seeded coefficient sampling, and overflow-safe
evaluation of

    psi(z) = sum_{|j| <= N} alpha_j * sqrt(binom(N, j)) * z^j,

with alpha_j i.i.d. standard complex Gaussians (E|alpha_j|^2 = 1) and
binom(N, j) the multinomial coefficient N! / (j_1! ... j_m! (N - |j|)!).
All magnitude arithmetic runs in log space so degrees in the thousands
stay representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

GENERATOR_ID = "philox4x64"

_SQRT_HALF = math.sqrt(0.5)
# Stand-in for log(0) of a coordinate magnitude.  Large enough that any
# positive multiple underflows exp(), small enough that j * _LOG_TINY stays
# finite for every multi-index entry we can enumerate.
_LOG_TINY = -1.0e300


def binomial(n: int, k: int) -> int:
    """Exact binomial coefficient as a Python integer."""
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def _entries(j) -> tuple[int, ...]:
    if isinstance(j, MultiIndex):
        return j.entries
    return tuple(int(v) for v in j)


@dataclass(frozen=True)
class MultiIndex:
    """Multi-index j = (j_1, ..., j_m) with nonnegative integer entries."""

    entries: tuple[int, ...]

    def __post_init__(self):
        ent = tuple(int(v) for v in self.entries)
        if len(ent) < 1:
            raise ValueError("multi-index needs at least one entry")
        if any(v < 0 for v in ent):
            raise ValueError(f"multi-index entries must be nonnegative: {ent}")
        object.__setattr__(self, "entries", ent)

    @property
    def degree(self) -> int:
        """Total degree |j| = j_1 + ... + j_m."""
        return sum(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def multinomial_log(N: int, j) -> float:
    """log of N! / (j_1! ... j_m! (N - |j|)!) via log-gamma.

    Raises ValueError when |j| > N or any entry is negative.
    """
    ent = _entries(j)
    if any(v < 0 for v in ent):
        raise ValueError(f"multi-index entries must be nonnegative: {ent}")
    s = sum(ent)
    if s > N:
        raise ValueError(f"total degree {s} exceeds N={N}")
    out = math.lgamma(N + 1) - math.lgamma(N - s + 1)
    for v in ent:
        out -= math.lgamma(v + 1)
    return out


@lru_cache(maxsize=None)
def _compositions(m: int, s: int) -> np.ndarray:
    """All m-tuples of nonnegative ints summing to s, lexicographically ascending."""
    if m == 1:
        out = np.array([[s]], dtype=np.int64)
    else:
        blocks = []
        for first in range(s + 1):
            rest = _compositions(m - 1, s - first)
            block = np.empty((rest.shape[0], m), dtype=np.int64)
            block[:, 0] = first
            block[:, 1:] = rest
            blocks.append(block)
        out = np.concatenate(blocks, axis=0)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _lgamma_sum_by_degree(m: int, s: int) -> np.ndarray:
    """sum_k lgamma(j_k + 1) for every composition in _compositions(m, s)."""
    comps = _compositions(m, s)
    out = gammaln(comps + 1.0).sum(axis=1)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def multi_index_matrix(m: int, N: int) -> np.ndarray:
    """All multi-indices with |j| <= N as a (D, m) int64 array.

    Rows are ordered by total degree ascending, ties broken lexicographically
    ascending on (j_1, ..., j_m).  This ordering is load-bearing: coefficient
    draws, dump files, and basis-transform rows all follow it.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    rows = [_compositions(m, s) for s in range(N + 1)]
    out = np.concatenate(rows, axis=0)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def multinomial_log_table(m: int, N: int) -> np.ndarray:
    """log multinomial weights aligned with multi_index_matrix(m, N)."""
    lg_n = gammaln(N + 1.0)
    parts = []
    for s in range(N + 1):
        parts.append(lg_n - gammaln(N - s + 1.0) - _lgamma_sum_by_degree(m, s))
    out = np.concatenate(parts)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def degree_table(m: int, N: int) -> np.ndarray:
    """Total degree |j| per row of multi_index_matrix(m, N)."""
    out = multi_index_matrix(m, N).sum(axis=1)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def index_position(m: int, N: int) -> dict:
    """Map multi-index tuple -> row position in multi_index_matrix(m, N)."""
    mat = multi_index_matrix(m, N)
    return {tuple(int(v) for v in row): i for i, row in enumerate(mat)}


@dataclass(frozen=True)
class EnsembleSpec:
    """Ensemble parameters: m complex variables, degree N, master seed."""

    m: int
    N: int
    seed: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.N < 0:
            raise ValueError(f"N must be >= 0, got {self.N}")
        if not (0 <= self.seed < 2**64):
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")

    @property
    def dimension(self) -> int:
        """Number of coefficients, binom(N + m, m)."""
        return binomial(self.N + self.m, self.m)

    def indices(self) -> np.ndarray:
        """(D, m) matrix of multi-indices in canonical order (read-only)."""
        return multi_index_matrix(self.m, self.N)


@dataclass(frozen=True)
class ComplexPoint:
    """A point z in C^m."""

    coords: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(complex(v) for v in self.coords))
        if len(self.coords) < 1:
            raise ValueError("point needs at least one coordinate")

    @classmethod
    def of(cls, coords: Iterable[complex]) -> "ComplexPoint":
        return cls(tuple(coords))

    @property
    def norm_sq(self) -> float:
        return float(sum(abs(c) ** 2 for c in self.coords))

    def __len__(self) -> int:
        return len(self.coords)


class SUPolynomial:
    """A sampled polynomial: an EnsembleSpec plus its coefficient vector.

    alpha holds the raw Gaussian coefficients in the canonical index order;
    the multinomial weights are applied at evaluation time, in log space.
    """

    __slots__ = ("spec", "alpha")

    def __init__(self, spec: EnsembleSpec, alpha):
        arr = np.asarray(alpha, dtype=np.complex128)
        if arr.shape != (spec.dimension,):
            raise ValueError(
                f"alpha must have shape ({spec.dimension},), got {arr.shape}"
            )
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise ValueError("alpha entries must be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        self.spec = spec
        self.alpha = arr

    def alpha_at(self, j) -> complex:
        """Coefficient alpha_j for a single multi-index j."""
        ent = _entries(j)
        pos = index_position(self.spec.m, self.spec.N).get(ent)
        if pos is None:
            raise ValueError(f"multi-index {ent} out of range for N={self.spec.N}")
        return complex(self.alpha[pos])

    def __eq__(self, other):
        return (
            isinstance(other, SUPolynomial)
            and self.spec == other.spec
            and np.array_equal(self.alpha, other.alpha)
        )

    def __repr__(self):
        return f"SUPolynomial(spec={self.spec!r}, dim={self.spec.dimension})"


def trial_stream(seed: int, trial: int, offset: int = 0) -> np.random.Generator:
    """Independent counter-based stream for one trial.

    Streams are keyed by (seed, trial) so any subset of trials can be
    generated in any order, on any number of workers, with identical output.
    A nonzero offset advances the counter, carving out a draw range disjoint
    from the coefficient draws; measurement streams (sphere samples and the
    like) use offset 2**96 so they never overlap the sampling stream.
    """
    if not (0 <= seed < 2**64):
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    if not (0 <= trial < 2**64):
        raise ValueError(f"trial must fit in 64 unsigned bits, got {trial}")
    key = np.array([seed, trial], dtype=np.uint64)
    bg = np.random.Philox(key=key)
    if offset:
        bg.advance(offset)
    return np.random.Generator(bg)


MEASUREMENT_OFFSET = 2**96


def sample_polynomial(spec: EnsembleSpec, stream: np.random.Generator) -> SUPolynomial:
    """Draw one polynomial from the ensemble using the given stream.

    Draw order is fixed: 2 D standard normals, consumed as interleaved
    (real, imag) pairs in canonical index order, scaled by sqrt(1/2) so
    E|alpha_j|^2 = 1.
    """
    d = spec.dimension
    x = stream.standard_normal(2 * d)
    alpha = (x[0::2] + 1j * x[1::2]) * _SQRT_HALF
    return SUPolynomial(spec, alpha)


def sample_trial(spec: EnsembleSpec, trial: int) -> SUPolynomial:
    """Polynomial for one trial index: sample_polynomial on its own stream."""
    return sample_polynomial(spec, trial_stream(spec.seed, trial))


def sample_alpha_block(spec: EnsembleSpec, start_trial: int, count: int) -> np.ndarray:
    """Coefficient rows for trials start_trial .. start_trial+count-1.

    Row t equals sample_trial(spec, start_trial + t).alpha exactly; batching
    only amortizes Python overhead.
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    d = spec.dimension
    out = np.empty((count, d), dtype=np.complex128)
    for t in range(count):
        x = trial_stream(spec.seed, start_trial + t).standard_normal(2 * d)
        out[t] = (x[0::2] + 1j * x[1::2]) * _SQRT_HALF
    return out


def _as_point_matrix(m: int, z) -> np.ndarray:
    """Coerce a point or sequence of points to a (P, m) complex matrix."""
    if isinstance(z, ComplexPoint):
        pts = np.array([z.coords], dtype=np.complex128)
    else:
        pts = np.asarray(z, dtype=np.complex128)
        if pts.ndim == 0:
            pts = pts.reshape(1, 1)
        elif pts.ndim == 1:
            # one point given as a flat coordinate sequence
            pts = pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[1] != m:
        raise ValueError(f"expected points in C^{m}, got shape {pts.shape}")
    return pts


def _eval_log_batch(psi: SUPolynomial, pts: np.ndarray):
    """Normalized evaluation in polar form.

    Returns (logmag, phase) with
        psi(z) / (1 + |z|^2)^(N/2) = exp(logmag) * exp(i * phase),
    logmag = -inf when the value is exactly zero.  The sum over terms is
    done by factoring out the largest term log-magnitude, so no intermediate
    overflows for any N.
    """
    spec = psi.spec
    J = multi_index_matrix(spec.m, spec.N).astype(np.float64)
    logw = 0.5 * multinomial_log_table(spec.m, spec.N)
    amag = np.abs(psi.alpha)
    with np.errstate(divide="ignore"):
        la = np.where(amag > 0.0, np.log(np.where(amag > 0.0, amag, 1.0)), -np.inf)
    logw = logw + la
    aph = np.angle(psi.alpha)

    P = pts.shape[0]
    norm_sq = np.abs(pts) ** 2 if spec.m == 1 else (np.abs(pts) ** 2).sum(axis=1)
    norm_sq = norm_sq.reshape(P)
    half_n_log = 0.5 * spec.N * np.log1p(norm_sq)

    zmag = np.abs(pts)
    logz = np.where(zmag > 0.0, np.log(np.where(zmag > 0.0, zmag, 1.0)), _LOG_TINY)
    ang = np.angle(pts)

    logmag = np.empty(P)
    phase = np.empty(P)
    chunk = max(1, 2_000_000 // max(1, len(logw)))
    for lo in range(0, P, chunk):
        hi = min(P, lo + chunk)
        T = J @ logz[lo:hi].T + logw[:, None] - half_n_log[None, lo:hi]
        PH = J @ ang[lo:hi].T + aph[:, None]
        M = T.max(axis=0)
        finite = np.isfinite(M)
        Ms = np.where(finite, M, 0.0)
        with np.errstate(invalid="ignore"):
            S = np.exp((T - Ms[None, :]) + 1j * PH).sum(axis=0)
        smag = np.abs(S)
        with np.errstate(divide="ignore"):
            lm = np.where(smag > 0.0, np.log(np.where(smag > 0.0, smag, 1.0)), -np.inf)
        val = Ms + lm
        # anything this far down can only come from the log-zero sentinel
        # (a zero coordinate raised to a positive power): the value is 0
        val = np.where(val > 0.5 * _LOG_TINY, val, -np.inf)
        logmag[lo:hi] = np.where(finite, val, -np.inf)
        phase[lo:hi] = np.where(finite, np.angle(S), 0.0)
    return logmag, phase


def evaluate_normalized_many(psi: SUPolynomial, pts) -> np.ndarray:
    """psi(z) / (1 + |z|^2)^(N/2) for a (P, m) batch of points."""
    mat = _as_point_matrix(psi.spec.m, pts)
    logmag, phase = _eval_log_batch(psi, mat)
    out = np.zeros(len(mat), dtype=np.complex128)
    finite = np.isfinite(logmag)
    out[finite] = np.exp(logmag[finite]) * np.exp(1j * phase[finite])
    return out


def evaluate_normalized(psi: SUPolynomial, z) -> complex:
    """Normalized value psi(z) / (1 + |z|^2)^(N/2) at a single point.

    The normalized magnitude is bounded by ||alpha||_2 * sqrt(D), so the
    result never overflows even when psi(z) itself would.
    """
    mat = _as_point_matrix(psi.spec.m, z)
    if mat.shape[0] != 1:
        raise ValueError("evaluate_normalized takes a single point")
    return complex(evaluate_normalized_many(psi, mat)[0])


def log_abs_many(psi: SUPolynomial, pts) -> np.ndarray:
    """log |psi(z)| for a batch of points; -inf at exact zeros."""
    mat = _as_point_matrix(psi.spec.m, pts)
    logmag, _ = _eval_log_batch(psi, mat)
    norm_sq = (np.abs(mat) ** 2).sum(axis=1)
    return logmag + 0.5 * psi.spec.N * np.log1p(norm_sq)


def log_abs(psi: SUPolynomial, z) -> float:
    """log |psi(z)| at a single point, finite even when |psi(z)| overflows."""
    mat = _as_point_matrix(psi.spec.m, z)
    if mat.shape[0] != 1:
        raise ValueError("log_abs takes a single point")
    return float(log_abs_many(psi, mat)[0])


def _direct_values_possible(psi: SUPolynomial) -> bool:
    """True when weighted coefficients fit in double precision directly."""
    return float(multinomial_log_table(psi.spec.m, psi.spec.N).max()) < 1400.0


def _normalized_values_direct(psi: SUPolynomial, pts: np.ndarray) -> np.ndarray:
    """Fast normalized evaluation via scaled coordinate powers.

    Writes psi(z)/(1+|z|^2)^(N/2) = sum_j c_j w^j u^(N-|j|) with
    w_k = z_k / sqrt(1+|z|^2), u = 1 / sqrt(1+|z|^2), |w|, u <= 1, and
    c_j = alpha_j exp(L_j / 2).  Valid only while max L_j / 2 < ~700
    (checked by the caller via _direct_values_possible); the factored
    powers themselves cannot overflow.
    """
    spec = psi.spec
    m, N = spec.m, spec.N
    J = multi_index_matrix(m, N)
    deg = degree_table(m, N)
    c = psi.alpha * np.exp(0.5 * multinomial_log_table(m, N))

    P = pts.shape[0]
    out = np.empty(P, dtype=np.complex128)
    chunk = max(1, 2_000_000 // max(1, len(c)))
    for lo in range(0, P, chunk):
        zz = pts[lo:min(P, lo + chunk)]
        n = zz.shape[0]
        inv = 1.0 / np.sqrt(1.0 + (np.abs(zz) ** 2).sum(axis=1))
        w = zz * inv[:, None]
        # power tables: W[k][p] = w_k^p, U[p] = u^p, p = 0..N
        U = np.ones((N + 1, n))
        for p in range(1, N + 1):
            U[p] = U[p - 1] * inv
        vals = c[:, None] * U[N - deg]
        for k in range(m):
            Wk = np.ones((N + 1, n), dtype=np.complex128)
            for p in range(1, N + 1):
                Wk[p] = Wk[p - 1] * w[:, k]
            vals = vals * Wk[J[:, k]]
        out[lo:lo + n] = vals.sum(axis=0)
    return out


def write_coefficient_dump(psi: SUPolynomial, path) -> None:
    """Plain-text coefficient dump: header line "m N seed", then one line
    per index in canonical order: j_1 ... j_m  Re(alpha)  Im(alpha)."""
    spec = psi.spec
    J = multi_index_matrix(spec.m, spec.N)
    with open(path, "w") as fh:
        fh.write(f"{spec.m} {spec.N} {spec.seed}\n")
        for row, a in zip(J, psi.alpha):
            idx = " ".join(str(int(v)) for v in row)
            fh.write(f"{idx} {a.real:.17g} {a.imag:.17g}\n")


def read_coefficient_dump(path) -> SUPolynomial:
    """Inverse of write_coefficient_dump."""
    with open(path) as fh:
        head = fh.readline().split()
        if len(head) != 3:
            raise ValueError(f"malformed dump header in {path}")
        m, N, seed = int(head[0]), int(head[1]), int(head[2])
        spec = EnsembleSpec(m=m, N=N, seed=seed)
        J = multi_index_matrix(m, N)
        alpha = np.empty(spec.dimension, dtype=np.complex128)
        for i in range(spec.dimension):
            parts = fh.readline().split()
            if len(parts) != m + 2:
                raise ValueError(f"malformed dump row {i} in {path}")
            if any(int(parts[k]) != J[i, k] for k in range(m)):
                raise ValueError(f"dump row {i} out of canonical order in {path}")
            alpha[i] = float(parts[m]) + 1j * float(parts[m + 1])
        if fh.readline().strip():
            raise ValueError(f"trailing data in {path}")
    return SUPolynomial(spec, alpha)
