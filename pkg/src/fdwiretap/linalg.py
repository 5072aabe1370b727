"""Complex-Hermitian matrix primitives used throughout the package.

All covariance matrices in the model are Hermitian positive semidefinite;
these helpers keep them that way under floating-point drift and give the
rest of the code a single place for log-determinants, PSD-safe inverses
and dominant eigenvectors with a deterministic phase convention.
"""

import numpy as np
import scipy.linalg

from .errors import NonPositiveDefinite

# Tolerance below which the top two eigenvalues count as degenerate.
DEGENERATE_GAP = 1e-10


def hermitize(m: np.ndarray) -> np.ndarray:
    """Average a matrix with its conjugate transpose.

    Re-enforced after arithmetic compositions so accumulated drift does not
    break downstream PSD checks.
    """
    return 0.5 * (m + m.conj().T)


def is_hermitian(m: np.ndarray, tol: float = 1e-10) -> bool:
    return bool(np.all(np.abs(m - m.conj().T) <= tol * max(1.0, np.abs(m).max())))


def logdet(m: np.ndarray) -> float:
    """Natural-log determinant of a Hermitian positive definite matrix.

    Computed via Cholesky factorization, never via an explicit determinant.
    Raises NonPositiveDefinite if the factorization fails.
    """
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NonPositiveDefinite("matrix is not positive definite") from exc
    return 2.0 * float(np.sum(np.log(np.real(np.diagonal(chol)))))


def logdet_stack(ms: np.ndarray) -> np.ndarray:
    """Natural-log determinants of a stack of Hermitian PD matrices."""
    try:
        chol = np.linalg.cholesky(ms)
    except np.linalg.LinAlgError as exc:
        raise NonPositiveDefinite("a matrix in the stack is not PD") from exc
    diag = np.real(np.diagonal(chol, axis1=-2, axis2=-1))
    return 2.0 * np.sum(np.log(diag), axis=-1)


def psd_inverse(m: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    """Inverse of (m + ridge*I) through a Cholesky factorization.

    The optional ridge restores positive definiteness of near-singular
    covariances (e.g. vanishing jamming power with small noise).
    """
    a = m if ridge == 0.0 else m + ridge * np.eye(m.shape[0])
    try:
        cho = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NonPositiveDefinite("matrix + ridge*I is not positive definite") from exc
    inv = scipy.linalg.cho_solve(cho, np.eye(a.shape[0], dtype=complex),
                                 check_finite=False)
    return hermitize(inv)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate a vector so its first nonzero entry is real nonnegative."""
    idx = np.flatnonzero(np.abs(v) > 1e-12)
    if idx.size == 0:
        return v
    pivot = v[idx[0]]
    return v * (np.conj(pivot) / np.abs(pivot))


def dominant_eigenpair(m: np.ndarray) -> tuple[float, np.ndarray, bool]:
    """Largest eigenvalue, unit-norm eigenvector and a degeneracy flag.

    The eigenvector phase is fixed so the first nonzero entry is real
    nonnegative.  When the top two eigenvalues coincide (gap < 1e-10) the
    returned vector is the normalized projection of the first canonical
    basis vector with nonvanishing projection onto the dominant eigenspace,
    which makes the output deterministic and basis-independent.
    """
    vals, vecs = np.linalg.eigh(m)
    lam = float(vals[-1])
    degenerate = m.shape[0] > 1 and (lam - float(vals[-2])) < DEGENERATE_GAP
    if not degenerate:
        return lam, _fix_phase(vecs[:, -1]), False
    space = vecs[:, vals > lam - DEGENERATE_GAP]
    for k in range(m.shape[0]):
        proj = space @ space[k, :].conj()
        nrm = np.linalg.norm(proj)
        if nrm > 1e-6:
            return lam, _fix_phase(proj / nrm), True
    return lam, _fix_phase(vecs[:, -1]), True


def dominant_eigenvector(m: np.ndarray) -> np.ndarray:
    """Unit-norm eigenvector of the largest eigenvalue of a Hermitian matrix."""
    return dominant_eigenpair(m)[1]


def psd_clip(m: np.ndarray, floor: float = 0.0) -> np.ndarray:
    """Project a Hermitian matrix onto the PSD cone by eigenvalue clipping."""
    vals, vecs = np.linalg.eigh(hermitize(m))
    if vals[0] >= floor:
        return hermitize(m)
    vals = np.maximum(vals, floor)
    return hermitize((vecs * vals) @ vecs.conj().T)


def min_eigenvalue(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(hermitize(m))[0])


def real_trace(m: np.ndarray) -> float:
    return float(np.real(np.trace(m)))


def inner(a: np.ndarray, b: np.ndarray) -> float:
    """Real inner product Re tr(a^H b) on the space of complex matrices."""
    return float(np.real(np.sum(np.conj(a) * b)))
