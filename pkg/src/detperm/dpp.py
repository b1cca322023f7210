"""Exact determinantal sampling.

The workhorse is the projection sampler: a rank-r projection process is
drawn one point at a time, selecting each point from the current intensity
and then restricting the range space to the orthocomplement of the
selected point's kernel column.  General kernels reduce to a random
projection by drawing an independent Bernoulli indicator per eigenvalue;
counts in any subset therefore follow an explicit Bernoulli convolution.

Note that the Bernoulli indicators are an auxiliary construction: they are
not a measurable function of the sampled configuration, so no API here
exposes "which eigenfunctions were kept" as if it were observable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    CountDistribution,
    DegenerateDistributionError,
    DetpermError,
    GroundSet,
    KernelValidationError,
    NumericalDegeneracyError,
    PointConfiguration,
    bernoulli_sum_pmf,
    sample_categorical,
)
from .kernels import HermitianKernel, restrict, spectrum, validate_determinantal

ORTHONORMALITY_TOL = 1e-8
IDEMPOTENCE_TOL = 1e-6
RANK_DROP_TOL = 1e-6


def _mu_norm(v, w):
    return math.sqrt(float((np.abs(v) ** 2 * w).sum()))


def _orthonormalize_rows(rows, w, drop_tol=None):
    """Modified Gram-Schmidt on rows under the weighted inner product.

    With ``drop_tol`` set, rows whose residual norm falls below it are
    dropped and the number of dropped rows is returned alongside.
    """
    kept = []
    dropped = 0
    for row in rows:
        v = np.array(row, dtype=complex)
        for u in kept:
            v -= ((u.conj() * w) @ v) * u
        nrm = _mu_norm(v, w)
        if drop_tol is not None and nrm < drop_tol:
            dropped += 1
            continue
        if nrm == 0.0:
            raise NumericalDegeneracyError("zero row in orthonormalization")
        kept.append(v / nrm)
    out = np.array(kept) if kept else np.zeros((0, len(w)), dtype=complex)
    return out, dropped


@dataclass(frozen=True)
class ProjectionBasis:
    """Rows are weighted-orthonormal functions spanning the range of a
    projection kernel."""

    functions: np.ndarray
    ground: GroundSet

    def __post_init__(self):
        f = np.asarray(self.functions, dtype=complex)
        if f.ndim != 2 or f.shape[1] != self.ground.size:
            raise DetpermError("basis must be rank x ground-size")
        object.__setattr__(self, "functions", f)
        w = self.ground.weights
        gram = (f * w) @ f.conj().T
        if f.shape[0] and np.abs(gram - np.eye(f.shape[0])).max() > ORTHONORMALITY_TOL:
            raise DetpermError("basis rows are not orthonormal under the weights")

    @property
    def rank(self):
        return self.functions.shape[0]

    def kernel_matrix(self):
        f = self.functions
        return f.T @ f.conj()

    def kernel(self):
        return HermitianKernel(self.kernel_matrix(), self.ground)

    def check_idempotent(self, tol=IDEMPOTENCE_TOL):
        k = self.kernel_matrix()
        w = self.ground.weights
        dev = np.abs((k * w) @ k - k).max() if k.size else 0.0
        if dev > tol:
            raise DetpermError(f"induced kernel is not idempotent (dev {dev:.3e})")

    @staticmethod
    def from_spectrum(spec, indices):
        """Basis from selected eigenfunction columns of a spectrum."""
        rows = spec.eigenvectors[:, list(indices)].T
        return ProjectionBasis(rows, spec.ground)

    @staticmethod
    def from_kernel(kernel, tol=1e-6):
        """Basis of a projection kernel (eigenvalues within tol of {0, 1})."""
        spec = spectrum(kernel)
        vals = spec.eigenvalues
        near_one = vals > 0.5
        if np.any(np.abs(vals - np.round(vals)) > tol):
            raise DetpermError("kernel is not a projection within tolerance")
        return ProjectionBasis.from_spectrum(spec, np.nonzero(near_one)[0])


def sample_projection(basis, rng):
    """Draw the projection process spanned by ``basis``: exactly
    ``basis.rank`` distinct points, in selection order.

    Each step picks an atom x with probability proportional to
    mu(x) * sum_i |phi_i(x)|^2, then replaces the basis by an orthonormal
    spanning set of the orthocomplement of the selected kernel column.
    Exactly one basis row must collapse per step; anything else is a
    numerical degeneracy and raises.
    """
    w = basis.ground.weights
    b = np.array(basis.functions, dtype=complex)
    chosen = []
    for step in range(basis.rank):
        weights = w * (np.abs(b) ** 2).sum(axis=0)
        if chosen:
            weights[chosen] = 0.0  # selected atoms carry no residual mass
        total = weights.sum()
        if total <= 0:
            raise DegenerateDistributionError("projection sampler ran out of mass")
        x = sample_categorical(weights, rng)
        chosen.append(x)
        # psi = kernel column at x expressed in the current row basis
        coeff = b[:, x].conj()
        psi = coeff @ b
        nrm = _mu_norm(psi, w)
        if nrm == 0.0:
            raise NumericalDegeneracyError("selected point has a zero kernel column")
        psi /= nrm
        b = b - np.outer((b * (psi.conj() * w)).sum(axis=1), psi)
        b[:, chosen] = 0.0  # functions in the reduced space vanish there
        b, dropped = _orthonormalize_rows(b, w, drop_tol=RANK_DROP_TOL)
        if dropped != 1:
            raise NumericalDegeneracyError(
                f"rank update dropped {dropped} rows instead of exactly 1"
            )
    return PointConfiguration(tuple(chosen), simple=True)


def sample_dpp(kernel, rng):
    """Draw one determinantal sample for a general admissible kernel.

    Bernoulli indicators are drawn first (one per eigenvalue, in
    descending eigenvalue order, so replay is deterministic), then the
    projection process on the kept eigenfunctions is sampled.
    """
    verdict = validate_determinantal(kernel)
    if not verdict:
        raise KernelValidationError(f"kernel not determinantal: {verdict.reason}")
    spec = spectrum(kernel)
    from .core import clamp_unit_interval

    lams = clamp_unit_interval(spec.eigenvalues)
    keep = np.nonzero(rng.random(len(lams)) < lams)[0]
    basis = ProjectionBasis.from_spectrum(spec, keep)
    return sample_projection(basis, rng)


def count_pmf(kernel, subset):
    """Exact count distribution over a subset of atoms: the Bernoulli
    convolution of the restricted kernel's eigenvalues."""
    idx = list(subset)
    if not idx:
        return CountDistribution(np.array([1.0]), 0.0)
    sub = restrict(kernel, idx)
    return bernoulli_sum_pmf(spectrum(sub).eigenvalues)


def joint_counts_observable(lambda_matrix, rng, tol=1e-9):
    """One draw of joint counts in r cells for a simultaneously observable
    family, as an independent ball-into-cell assignment.

    Row k of ``lambda_matrix`` holds the per-cell probabilities for ball k;
    the leftover 1 - sum(row) is the probability the ball lands nowhere.
    """
    lm = np.atleast_2d(np.asarray(lambda_matrix, dtype=float))
    if np.any(lm < 0):
        raise DetpermError("cell probabilities must be non-negative")
    r = lm.shape[1]
    counts = np.zeros(r, dtype=np.int64)
    for row in lm:
        s = row.sum()
        if s > 1 + tol:
            raise DetpermError(f"row sums to {s!r} > 1")
        rest = max(0.0, 1.0 - s)
        cell = sample_categorical(np.concatenate([row, [rest]]), rng)
        if cell < r:
            counts[cell] += 1
    return counts


def projection_density(basis, points):
    """Ordered-tuple density of a projection process against mu^r:
    |det(phi_i(x_j))|^2 / r!."""
    idx = [int(p) for p in points]
    if len(idx) != basis.rank:
        raise DetpermError(
            f"need exactly rank={basis.rank} points, got {len(idx)}"
        )
    if any(i < 0 or i >= basis.ground.size for i in idx):
        raise DetpermError("point index outside the ground set")
    if basis.rank == 0:
        return 1.0
    m = basis.functions[:, idx]
    det = np.linalg.det(m)
    return float(abs(det) ** 2 / math.factorial(basis.rank))
