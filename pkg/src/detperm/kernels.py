"""Hermitian kernel matrices: spectra, admissibility, and the exact
determinant / permanent / alpha-determinant evaluators behind joint
intensities.

All spectral computations work in the weighted inner product
``<f, g> = sum_x f(x) conj(g(x)) mu(x)`` induced by the ground set, by
symmetrizing with W^(1/2) on both sides before calling a dense Hermitian
eigensolver.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import CapacityError, DetpermError, GroundSet, SymmetryError

HERMITIAN_TOL = 1e-10
# Minors with a pivot below this (relative) threshold report determinant 0,
# so repeated-point minors come out exactly zero.
SINGULARITY_TOL = 1e-12

PERMANENT_CAP = 20  # Ryser is O(2^n n)
ALPHA_DET_CAP = 9   # explicit S_n iteration


def _check_hermitian(matrix):
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DetpermError(f"kernel matrix must be square, got shape {m.shape}")
    scale = 1.0 + (np.abs(m).max() if m.size else 0.0)
    dev = np.abs(m - m.conj().T).max() if m.size else 0.0
    if dev > HERMITIAN_TOL * scale:
        raise SymmetryError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    return m


@dataclass(frozen=True)
class HermitianKernel:
    """An n x n Hermitian matrix of kernel values over a ground set."""

    matrix: np.ndarray
    ground: GroundSet

    def __post_init__(self):
        m = _check_hermitian(self.matrix)
        object.__setattr__(self, "matrix", m)
        if m.shape[0] != self.ground.size:
            raise DetpermError("kernel size does not match ground set size")

    @property
    def size(self):
        return self.ground.size

    def to_json(self):
        return {
            "ground": self.ground.to_json(),
            "matrix": [[[z.real, z.imag] for z in row] for row in self.matrix],
        }

    @staticmethod
    def from_json(obj):
        ground, matrix = parse_kernel_json(obj)
        return HermitianKernel(matrix, ground)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @staticmethod
    def load(path):
        with open(path) as fh:
            return HermitianKernel.from_json(json.load(fh))


def parse_kernel_json(obj):
    """Parse the kernel file format without enforcing Hermitian symmetry.

    Accepts ``{"ground": ..., "matrix": [[[re, im], ...], ...]}`` or the
    real shorthand ``{"matrix_real": [[...]]}``.  A missing ground defaults
    to indices 0..n-1 with unit weights.  Returns ``(ground, matrix)``.
    """
    if "matrix_real" in obj:
        matrix = np.asarray(obj["matrix_real"], dtype=float).astype(complex)
    elif "matrix" in obj:
        raw = obj["matrix"]
        matrix = np.array(
            [[complex(entry[0], entry[1]) for entry in row] for row in raw],
            dtype=complex,
        )
    else:
        raise DetpermError("kernel JSON needs a 'matrix' or 'matrix_real' field")
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DetpermError(f"kernel matrix must be square, got shape {matrix.shape}")
    if "ground" in obj:
        ground = GroundSet.from_json(obj["ground"])
    else:
        ground = GroundSet.uniform(matrix.shape[0])
    return ground, matrix


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (descending) and eigenfunction columns, orthonormal in
    the weighted inner product of the ground set."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    ground: GroundSet

    @property
    def size(self):
        return len(self.eigenvalues)

    def reconstruct(self):
        """Rebuild the kernel matrix sum_k lambda_k phi_k(x) conj(phi_k(y))."""
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def spectrum(kernel):
    """Eigendecompose a kernel in the weighted inner product.

    Solves the symmetrized problem W^(1/2) K W^(1/2) and un-weights the
    eigenvectors, so columns of the result are orthonormal against the
    ground weights and the kernel reconstructs as
    sum_k lambda_k phi_k(x) conj(phi_k(y)).  The decomposition is cached
    on the (immutable) kernel object, so repeated sampling from one kernel
    pays for it once.
    """
    cached = getattr(kernel, "_spectrum_cache", None)
    if cached is not None:
        return cached
    w = kernel.ground.weights
    s = np.sqrt(w)
    b = s[:, None] * kernel.matrix * s[None, :]
    b = (b + b.conj().T) / 2
    try:
        vals, vecs = np.linalg.eigh(b)
    except np.linalg.LinAlgError as exc:
        raise DetpermError(f"eigensolver failed to converge: {exc}") from exc
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order] / s[:, None]
    result = Spectrum(vals, vecs, kernel.ground)
    object.__setattr__(kernel, "_spectrum_cache", result)
    return result


@dataclass(frozen=True)
class KernelVerdict:
    valid: bool
    reason: str | None = None
    eigenvalue: float | None = None

    def __bool__(self):
        return self.valid


def validate_determinantal(kernel, ground=None, tol=None):
    """Decide whether a kernel can carry a determinantal process.

    Valid iff the matrix is Hermitian and every eigenvalue (in the
    weighted inner product) lies in [0, 1] up to clamping tolerance.
    Accepts a HermitianKernel, or a raw matrix plus optional ground set so
    that non-Hermitian input yields an invalid verdict instead of an error.
    """
    from .core import EIGENVALUE_TOL

    tol = EIGENVALUE_TOL if tol is None else tol
    if not isinstance(kernel, HermitianKernel):
        m = np.asarray(kernel, dtype=complex)
        try:
            _check_hermitian(m)
        except (SymmetryError, DetpermError) as exc:
            return KernelVerdict(False, str(exc))
        if ground is None:
            ground = GroundSet.uniform(m.shape[0])
        kernel = HermitianKernel(m, ground)
    vals = spectrum(kernel).eigenvalues
    if vals.size and vals.max() > 1 + tol:
        lam = float(vals.max())
        return KernelVerdict(False, f"eigenvalue {lam!r} above 1", lam)
    if vals.size and vals.min() < -tol:
        lam = float(vals.min())
        return KernelVerdict(False, f"eigenvalue {lam!r} below 0", lam)
    return KernelVerdict(True)


def restrict(kernel, subset):
    """Principal submatrix of the kernel on a subset of atoms."""
    idx = [int(i) for i in subset]
    if len(set(idx)) != len(idx):
        raise DetpermError("restriction subset must have distinct indices")
    if any(i < 0 or i >= kernel.size for i in idx):
        raise DetpermError("restriction index outside the ground set")
    ground = GroundSet(
        tuple(kernel.ground.labels[i] for i in idx),
        kernel.ground.weights[idx],
    )
    return HermitianKernel(kernel.matrix[np.ix_(idx, idx)], ground)


def permanent(matrix):
    """Exact permanent via Ryser's inclusion-exclusion with Gray-code
    column updates; capped at n <= 20."""
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DetpermError("permanent needs a square matrix")
    n = m.shape[0]
    if n == 0:
        return complex(1.0)
    if n > PERMANENT_CAP:
        raise CapacityError(f"permanent capped at n={PERMANENT_CAP}, got {n}")
    total = complex(0.0)
    row_sums = np.zeros(n, dtype=complex)
    gray = 0
    for k in range(1, 2**n):
        new_gray = k ^ (k >> 1)
        bit = gray ^ new_gray
        j = bit.bit_length() - 1
        if new_gray & bit:
            row_sums += m[:, j]
        else:
            row_sums -= m[:, j]
        gray = new_gray
        sign = -1 if (n - new_gray.bit_count()) % 2 else 1
        total += sign * np.prod(row_sums)
    return complex(total)


def _cycle_count(perm):
    n = len(perm)
    seen = [False] * n
    cycles = 0
    for start in range(n):
        if seen[start]:
            continue
        cycles += 1
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
    return cycles


def alpha_det(matrix, alpha):
    """Permutation sum weighted by alpha^(n - #cycles); interpolates the
    determinant (alpha = -1) and permanent (alpha = +1).  Brute force over
    S_n, capped at n <= 9."""
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DetpermError("alpha_det needs a square matrix")
    n = m.shape[0]
    if n == 0:
        return complex(1.0)
    if n > ALPHA_DET_CAP:
        raise CapacityError(f"alpha_det capped at n={ALPHA_DET_CAP}, got {n}")
    total = complex(0.0)
    idx = range(n)
    for perm in itertools.permutations(idx):
        prod = complex(1.0)
        for i in idx:
            prod *= m[i, perm[i]]
        total += alpha ** (n - _cycle_count(perm)) * prod
    return complex(total)


def _lu_det(matrix):
    """Determinant via pivoted LU; pivots below SINGULARITY_TOL (relative)
    report an exact zero."""
    m = np.asarray(matrix, dtype=complex)
    n = m.shape[0]
    if n == 0:
        return complex(1.0)
    lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    diag = np.diag(lu)
    scale = max(1.0, float(np.abs(m).max()))
    if np.any(np.abs(diag) < SINGULARITY_TOL * scale):
        return complex(0.0)
    sign = 1.0
    for i, p in enumerate(piv):
        if p != i:
            sign = -sign
    return complex(sign * np.prod(diag))


def joint_intensity(kernel, points, kind="determinantal", alpha=None):
    """Joint intensity of a point tuple: the determinant, permanent or
    alpha-determinant of the corresponding kernel minor.

    Repeats are allowed (and meaningful) for the permanental and alpha
    kinds; a determinantal intensity with a repeated point is exactly 0.
    """
    idx = [int(p) for p in points]
    if any(i < 0 or i >= kernel.size for i in idx):
        raise DetpermError("point index outside the ground set")
    minor = kernel.matrix[np.ix_(idx, idx)]
    if kind == "determinantal":
        if len(set(idx)) != len(idx):
            return 0.0
        value = _lu_det(minor)
    elif kind == "permanental":
        value = permanent(minor)
    elif kind == "alpha":
        if alpha is None:
            raise DetpermError("alpha kind requires the alpha parameter")
        value = alpha_det(minor, alpha)
    else:
        raise DetpermError(f"unknown intensity kind {kind!r}")
    if abs(value.imag) > 1e-9 * (1 + abs(value.real)):
        raise DetpermError(f"joint intensity came out non-real: {value!r}")
    return float(value.real)


def projection_from_rank(ground, rank, rng):
    """Random rank-r projection kernel on a ground set (test fixture
    helper): orthonormalizes r random rows in the weighted inner product."""
    n = ground.size
    if rank > n:
        raise DetpermError("rank cannot exceed the ground size")
    w = ground.weights
    raw = rng.normal(size=(rank, n)) + 1j * rng.normal(size=(rank, n))
    rows = []
    for i in range(rank):
        v = raw[i].astype(complex)
        for u in rows:
            v = v - ((u.conj() * w) @ v) * u
        nrm = math.sqrt(float((np.abs(v) ** 2 * w).sum()))
        rows.append(v / nrm)
    b = np.array(rows) if rows else np.zeros((0, n), dtype=complex)
    return HermitianKernel(b.T @ b.conj(), ground)


def kernel_from_spectrum(ground, eigenvalues, rng):
    """Kernel with prescribed eigenvalues and a random weighted-orthonormal
    eigenbasis (test fixture helper)."""
    lams = np.asarray(eigenvalues, dtype=float)
    n = ground.size
    if len(lams) > n:
        raise DetpermError("more eigenvalues than ground points")
    lams = np.concatenate([lams, np.zeros(n - len(lams))])
    proj = projection_from_rank(ground, n, rng)  # full basis
    basis = spectrum(proj).eigenvectors  # columns orthonormal under weights
    matrix = (basis * lams) @ basis.conj().T
    matrix = (matrix + matrix.conj().T) / 2
    return HermitianKernel(matrix, ground)
