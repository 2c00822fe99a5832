"""
Dense linear-algebra kernels: Householder QR, one-sided Jacobi SVD,
norms, projector application, and triangular half-splitting.

All functions are pure: inputs are never mutated, outputs are fresh
arrays. Matrices are plain float64 2-d numpy arrays throughout.
"""

import math
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_triangular

# Gram residual allowed for a matrix to count as orthonormal, relative
# to the column count.
ORTH_TOL = 1e-13

# One-sided Jacobi: relative threshold on off-diagonal Gram entries,
# and the hard sweep limit before giving up.
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 30


class ConvergenceError(RuntimeError):
    """Iterative kernel failed to converge within its sweep limit."""


class RankDeficiencyError(ValueError):
    """Matrix is numerically rank deficient; carries sigma_min/sigma_max."""

    def __init__(self, message, ratio=None):
        super().__init__(message)
        self.ratio = ratio


class ThinQR(NamedTuple):
    q: np.ndarray  # m x n, orthonormal columns
    r: np.ndarray  # n x n, upper triangular, nonnegative diagonal


class SvdResult(NamedTuple):
    u: np.ndarray      # m x k, orthonormal columns
    sigma: np.ndarray  # length k, nonincreasing, nonnegative
    v: np.ndarray      # n x k, orthonormal columns


class MatrixNorms(NamedTuple):
    two_norm: float
    frobenius_norm: float
    row_norms: np.ndarray


def as_matrix(a, name="matrix"):
    """Coerce to a float64 2-d array and reject NaN/Inf entries."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={a.ndim}")
    if a.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def gram_residual(q):
    """Frobenius norm of Q^T Q - I."""
    q = as_matrix(q, "q")
    n = q.shape[1]
    return float(np.linalg.norm(q.T @ q - np.eye(n), "fro"))


def check_orthonormal(q, tol, name="q"):
    q = as_matrix(q, name)
    res = gram_residual(q)
    if res > tol:
        raise ValueError(
            f"{name} is not orthonormal: Gram residual {res:.3e} exceeds {tol:.3e}"
        )
    return q


def _range_exponent(a):
    """
    Power-of-two exponent for prescaling matrices whose squared
    entries would overflow or underflow. Zero for ordinary
    magnitudes, so the common path is untouched bit for bit.
    """
    peak = float(np.max(np.abs(a)))
    if peak == 0.0 or 1e-150 < peak < 1e150:
        return 0
    return math.frexp(peak)[1]


def householder_qr(a):
    """
    Thin QR decomposition via Householder reflections.

    Parameters
    ----------
    a : (m, n) array_like, m >= n
        Matrix to factor; entries must be finite.

    Returns
    -------
    ThinQR
        q with orthonormal columns (m x n) and upper-triangular r
        (n x n) whose diagonal is nonnegative; q @ r reconstructs a
        to machine precision.

    Notes
    -----
    Column signs are normalized so that diag(r) >= 0, which makes the
    factorization of a full-rank matrix unique and runs reproducible.
    Rank deficiency is not an error here; it surfaces downstream via
    singular values of r.
    """
    a = as_matrix(a, "a")
    m, n = a.shape
    if m < n:
        raise ValueError(f"householder_qr needs m >= n, got shape {a.shape}")

    exponent = _range_exponent(a)
    if exponent:
        q, r = householder_qr(np.ldexp(a, -exponent))
        return ThinQR(q, np.ldexp(r, exponent))

    r = a.copy()
    # Unit reflector vectors, padded with leading zeros to length m.
    ws = np.zeros((n, m))
    for k in range(n):
        x = r[k:, k]
        norm_x = np.linalg.norm(x)
        if norm_x == 0.0:
            continue  # zero column: no reflection needed
        alpha = -norm_x if x[0] >= 0 else norm_x
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        ws[k, k:] = v
        r[k:, k:] -= 2.0 * np.outer(v, v @ r[k:, k:])
        r[k, k] = alpha
        r[k + 1:, k] = 0.0

    q = np.zeros((m, n))
    q[:n, :n] = np.eye(n)
    for k in range(n - 1, -1, -1):
        v = ws[k, k:]
        if v.any():
            q[k:, :] -= 2.0 * np.outer(v, v @ q[k:, :])

    r = r[:n, :]
    signs = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    q = q * signs
    r = r * signs[:, None]
    return ThinQR(q, np.triu(r))


def _jacobi_kernel(a):
    """
    One-sided Jacobi sweeps on a matrix with m >= n columns.

    Rotations are chosen to zero the off-diagonal Gram entries
    u[:, p] . u[:, q]; a pair is skipped once its entry falls below
    JACOBI_TOL relative to the diagonal. The Gram matrix is kept
    current incrementally within a sweep and recomputed fresh at each
    sweep start so accumulated round-off cannot fake convergence.
    """
    n = a.shape[1]
    u = a.copy()
    v = np.eye(n)
    for _ in range(JACOBI_MAX_SWEEPS):
        g = u.T @ u
        rotated = False
        for p in range(n - 1):
            for q_ in range(p + 1, n):
                app = g[p, p]
                aqq = g[q_, q_]
                apq = g[p, q_]
                if app == 0.0 or aqq == 0.0:
                    continue
                if abs(apq) <= JACOBI_TOL * np.sqrt(app * aqq):
                    continue
                rotated = True
                zeta = (aqq - app) / (2.0 * apq)
                if zeta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(zeta) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                for mat in (u, v):
                    col_p = c * mat[:, p] - s * mat[:, q_]
                    col_q = s * mat[:, p] + c * mat[:, q_]
                    mat[:, p] = col_p
                    mat[:, q_] = col_q
                # Two-sided rotation of the Gram matrix, exact zero
                # in the annihilated pair.
                gp = c * g[:, p] - s * g[:, q_]
                gq = s * g[:, p] + c * g[:, q_]
                g[:, p] = gp
                g[:, q_] = gq
                rp = c * g[p, :] - s * g[q_, :]
                rq = s * g[p, :] + c * g[q_, :]
                g[p, :] = rp
                g[q_, :] = rq
                g[p, q_] = 0.0
                g[q_, p] = 0.0
        if not rotated:
            break
    else:
        raise ConvergenceError(
            f"Jacobi SVD did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )

    sigma = np.linalg.norm(u, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    u = u[:, order]
    v = v[:, order]

    # Normalize columns; complete an orthonormal basis where sigma == 0.
    nonzero = sigma > 0.0
    u[:, nonzero] /= sigma[nonzero]
    if not nonzero.all():
        u = _complete_basis(u, np.flatnonzero(~nonzero))
    return u, sigma, v


def _complete_basis(u, missing):
    """Fill the listed columns with unit vectors orthogonal to the rest."""
    u = u.copy()
    m = u.shape[0]
    have = [u[:, j] for j in range(u.shape[1]) if j not in set(missing)]
    for j in missing:
        for k in range(m):
            cand = np.zeros(m)
            cand[k] = 1.0
            for w in have:
                cand -= (w @ cand) * w
            norm = np.linalg.norm(cand)
            if norm > 0.5:
                cand /= norm
                u[:, j] = cand
                have.append(cand)
                break
        else:
            raise ValueError("could not complete orthonormal basis")
    return u


def jacobi_svd(a):
    """
    Singular value decomposition by one-sided Jacobi rotations.

    Parameters
    ----------
    a : (m, n) array_like
        Matrix with finite entries; intended for small n (a few
        hundred at most).

    Returns
    -------
    SvdResult
        u (m x k), sigma (nonincreasing, k = min(m, n)), v (n x k)
        with a ~= u @ diag(sigma) @ v.T.

    Notes
    -----
    Tall matrices are first reduced by Householder QR and the Jacobi
    sweeps run on the triangular factor, keeping the kernel n x n.
    Non-convergence after the sweep limit raises ConvergenceError
    rather than returning a silently inaccurate result.
    """
    a = as_matrix(a, "a")
    exponent = _range_exponent(a)
    if exponent:
        res = jacobi_svd(np.ldexp(a, -exponent))
        return SvdResult(res.u, np.ldexp(res.sigma, exponent), res.v)
    m, n = a.shape
    if m < n:
        res = jacobi_svd(a.T)
        return SvdResult(res.v, res.sigma, res.u)
    if m > n:
        q, r = householder_qr(a)
        u_r, sigma, v = _jacobi_kernel(r)
        return SvdResult(q @ u_r, sigma, v)
    u, sigma, v = _jacobi_kernel(a)
    return SvdResult(u, sigma, v)


def singular_values(a):
    """Singular values only (nonincreasing)."""
    return jacobi_svd(a).sigma


def two_norm(a):
    """Largest singular value of a."""
    a = as_matrix(a, "a")
    if not a.any():
        return 0.0
    return float(singular_values(a)[0])


def matrix_norms(a):
    """
    Two-norm, Frobenius norm, and per-row two-norms of a matrix.

    The two-norm is computed as the largest singular value; the
    Frobenius norm satisfies fro**2 == sum(row_norms**2).
    """
    a = as_matrix(a, "a")
    return MatrixNorms(
        two_norm=two_norm(a),
        frobenius_norm=float(np.linalg.norm(a, "fro")),
        row_norms=np.linalg.norm(a, axis=1),
    )


def project_complement(q, x, tol=None):
    """
    Apply the projector onto the orthogonal complement of range(q).

    Returns (I - q q^T) x for q with orthonormal columns (Gram
    residual at most tol, default the QR-output tolerance
    ORTH_TOL * n). The result plus q q^T x reconstructs x exactly up
    to round-off.
    """
    q = as_matrix(q, "q")
    x = as_matrix(x, "x")
    check_orthonormal(q, ORTH_TOL * q.shape[1] if tol is None else tol, "q")
    if q.shape[0] != x.shape[0]:
        raise ValueError(
            f"row count mismatch: q has {q.shape[0]} rows, x has {x.shape[0]}"
        )
    return x - q @ (q.T @ x)


def triu_half(z):
    """
    Extract the upper-triangular half of a square matrix: half the
    diagonal plus the strict upper triangle.

    For symmetric z this is the unique upper-triangular t with
    t + t.T == z.
    """
    z = as_matrix(z, "z")
    if z.shape[0] != z.shape[1]:
        raise ValueError(f"triu_half needs a square input, got shape {z.shape}")
    return np.triu(z, 1) + 0.5 * np.diag(np.diag(z))


def solve_upper(r, b, transpose=False):
    """Solve r x = b (or r^T x = b) for upper-triangular r."""
    return solve_triangular(r, b, trans="T" if transpose else "N", lower=False)
