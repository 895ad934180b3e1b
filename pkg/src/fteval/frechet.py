"""Fréchet distance between Gaussian feature statistics (the FID computation).

The matrix square root is taken on the symmetric similarity
``S = sqrt(Ca) Cb sqrt(Ca)`` so that every eigenproblem stays symmetric, and
the eigensolver is a self-contained cyclic Jacobi sweep (off-diagonal
Frobenius threshold 1e-12 * ||A||_F, at most 100 sweeps).  Eigenvalues below
-1e-8 signal an invalid covariance and raise; values in [-1e-8, 0) are
rounding noise and are clipped to zero.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IngestError, NumericsError, PreconditionError
from .model import FeatureSet, _frozen

SYMMETRY_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-8
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
DEFAULT_FID_EPS = 1e-6


@dataclass(frozen=True, eq=False)
class GaussianStats:
    """Mean vector and symmetric covariance of a feature distribution."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.cov, dtype=np.float64)
        if mean.ndim != 1:
            raise PreconditionError(f"mean must be a vector, got shape {mean.shape}")
        d = mean.shape[0]
        if cov.shape != (d, d):
            raise PreconditionError(f"covariance must be {d}x{d}, got {cov.shape}")
        if not (np.isfinite(mean).all() and np.isfinite(cov).all()):
            raise PreconditionError("non-finite entry in Gaussian statistics")
        if float(np.abs(cov - cov.T).max(initial=0.0)) > SYMMETRY_TOL:
            raise PreconditionError("covariance is not symmetric (max asymmetry "
                                    f"> {SYMMETRY_TOL})")
        object.__setattr__(self, "mean", _frozen(mean))
        object.__setattr__(self, "cov", _frozen((cov + cov.T) / 2.0))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def read_stats(path) -> GaussianStats:
    """Load ``{"mean": [...], "cov": [[...]]}`` from a JSON file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as e:
        raise IngestError(f"cannot read stats file: {e}", path=path) from e
    except json.JSONDecodeError as e:
        raise IngestError(f"invalid stats JSON: {e.msg}", path=path, line=e.lineno) from e
    if not isinstance(doc, dict) or "mean" not in doc or "cov" not in doc:
        raise IngestError('stats file must be {"mean": [...], "cov": [[...]]}', path=path)
    return GaussianStats(np.asarray(doc["mean"], dtype=np.float64),
                         np.asarray(doc["cov"], dtype=np.float64))


def symmetric_eigh(a: np.ndarray, *, tol: float = JACOBI_TOL,
                   max_sweeps: int = JACOBI_MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues ascending, eigenvectors as columns).
    """
    A = np.array(a, dtype=np.float64, copy=True)
    n = A.shape[0]
    if A.shape != (n, n):
        raise PreconditionError(f"matrix must be square, got {A.shape}")
    V = np.eye(n)
    if n == 1:
        return A.diagonal().copy(), V
    threshold = tol * float(np.linalg.norm(A))
    diag_mask = ~np.eye(n, dtype=bool)

    def offdiag(m: np.ndarray) -> float:
        # summed directly over off-diagonal entries; the subtract-the-diagonal
        # form cancels catastrophically near convergence
        return float(np.linalg.norm(m[diag_mask]))

    for _ in range(max_sweeps):
        if offdiag(A) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                app, aqq = A[p, p], A[q, q]
                with np.errstate(over="ignore"):
                    tau = (aqq - app) / (2.0 * apq)
                if math.isinf(tau):
                    t = 0.0
                elif tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                mask = np.ones(n, dtype=bool)
                mask[p] = mask[q] = False
                aip = A[mask, p].copy()
                aiq = A[mask, q].copy()
                A[mask, p] = c * aip - s * aiq
                A[mask, q] = s * aip + c * aiq
                A[p, mask] = A[mask, p]
                A[q, mask] = A[mask, q]
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = A[q, p] = 0.0
                vip = V[:, p].copy()
                viq = V[:, q].copy()
                V[:, p] = c * vip - s * viq
                V[:, q] = s * vip + c * viq
    else:
        if offdiag(A) > threshold:
            raise NumericsError(f"Jacobi eigensolver did not converge within "
                                f"{max_sweeps} sweeps")
    w = A.diagonal().copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def _nonnegative_eigenvalues(w: np.ndarray, context: str) -> np.ndarray:
    if float(w.min()) < EIGENVALUE_FLOOR:
        raise NumericsError(f"{context}: eigenvalue {float(w.min()):.3e} below "
                            f"{EIGENVALUE_FLOOR:g}; covariance is not PSD")
    return np.maximum(w, 0.0)


def _sqrt_psd(m: np.ndarray, context: str) -> np.ndarray:
    w, v = symmetric_eigh(m)
    w = _nonnegative_eigenvalues(w, context)
    return (v * np.sqrt(w)) @ v.T


def estimate_stats(features: FeatureSet) -> GaussianStats:
    """Sample mean and unbiased (N-1) covariance of a feature set."""
    x = features.values
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (x.shape[0] - 1)
    return GaussianStats(mean, (cov + cov.T) / 2.0)


def frechet_distance(a: GaussianStats, b: GaussianStats) -> float:
    """||mu_a - mu_b||^2 + Tr(Ca + Cb - 2 (Ca Cb)^{1/2}), clamped at 0."""
    if a.dim != b.dim:
        raise PreconditionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    sqrt_a = _sqrt_psd(a.cov, "first covariance")
    inner = sqrt_a @ b.cov @ sqrt_a
    inner = (inner + inner.T) / 2.0
    w = _nonnegative_eigenvalues(symmetric_eigh(inner)[0], "cross covariance")
    mean_term = float(((a.mean - b.mean) ** 2).sum())
    trace_term = float(np.trace(a.cov)) + float(np.trace(b.cov)) - 2.0 * float(np.sqrt(w).sum())
    return max(mean_term + trace_term, 0.0)


def fid(gen: FeatureSet, gt: FeatureSet, eps: float = DEFAULT_FID_EPS) -> float:
    """Fréchet distance between Gaussian fits, with eps*I jitter on both covariances."""
    if gen.dim != gt.dim:
        raise PreconditionError(f"feature dimension mismatch: {gen.dim} vs {gt.dim}")
    if not (math.isfinite(eps) and eps >= 0):
        raise PreconditionError(f"eps must be a finite non-negative real, got {eps}")
    sa = estimate_stats(gen)
    sb = estimate_stats(gt)
    jitter = eps * np.eye(gen.dim)
    return frechet_distance(GaussianStats(sa.mean, sa.cov + jitter),
                            GaussianStats(sb.mean, sb.cov + jitter))
