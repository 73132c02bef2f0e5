"""Complex matrix primitives: norms, determinants, eigenangles, Haar sampling.

Matrices are plain numpy arrays (row-major, complex128). ``UnitaryMatrix`` is a
thin validated wrapper used where unitarity is a contract rather than a hope;
every function below also accepts raw arrays.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, NumericalError, ValidationError

__all__ = [
    "UnitaryMatrix",
    "as_complex_matrix",
    "determinant",
    "frobenius_norm",
    "haar_sample",
    "stacked_logabsdet",
    "unitarity_residual",
    "unitary_eigenangles",
]


def as_complex_matrix(m):
    """Coerce ``m`` to a 2-d complex128 array, rejecting malformed input.

    Raises DimensionError for non-2-d input and ValidationError for empty
    matrices or non-finite entries.
    """
    if isinstance(m, UnitaryMatrix):
        m = m.array
    try:
        a = np.asarray(m, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"matrix entries must be numeric: {exc}") from exc
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValidationError("matrix must have at least one row and column")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix entries must be finite")
    return a


def _as_array(m):
    if isinstance(m, UnitaryMatrix):
        return m.array
    return as_complex_matrix(m)


def frobenius_norm(m):
    """Frobenius norm: sqrt of the sum of squared entry moduli."""
    a = _as_array(m)
    return float(np.sqrt(np.sum(np.abs(a) ** 2)))


def determinant(m):
    """Determinant by row-pivoted Gaussian elimination.

    Partial pivoting picks the largest column modulus below the diagonal,
    ties broken by the lowest row index; the result is the product of pivots
    times the permutation sign. A zero pivot short-circuits to 0.
    """
    a = _as_array(m)
    rows, cols = a.shape
    if rows != cols:
        raise DimensionError(f"determinant needs a square matrix, got {rows}x{cols}")
    a = a.copy()
    sign = 1.0
    det = 1.0 + 0.0j
    for k in range(rows):
        p = k + int(np.argmax(np.abs(a[k:, k])))  # argmax takes the first max: lowest index wins ties
        if a[p, k] == 0:
            return 0j
        if p != k:
            a[[k, p]] = a[[p, k]]
            sign = -sign
        pivot = a[k, k]
        det *= pivot
        if k + 1 < rows:
            a[k + 1 :, k:] -= np.outer(a[k + 1 :, k] / pivot, a[k, k:])
    return complex(sign * det)


def stacked_logabsdet(mats):
    """log|det| over a stack of square matrices, shape (..., n, n) -> (...).

    Same pivoted elimination as ``determinant`` but batched and in the log
    domain so near-singular differences of unitaries stay representable.
    Singular matrices map to -inf.
    """
    a = np.asarray(mats, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise DimensionError(f"expected a stack of square matrices, got shape {a.shape}")
    lead = a.shape[:-2]
    n = a.shape[-1]
    a = a.reshape(-1, n, n).copy()
    b = a.shape[0]
    logabs = np.zeros(b)
    batch = np.arange(b)
    for k in range(n):
        piv = k + np.argmax(np.abs(a[:, k:, k]), axis=1)
        rows_k = a[batch, k].copy()
        a[batch, k] = a[batch, piv]
        a[batch, piv] = rows_k
        pk = a[:, k, k]
        absp = np.abs(pk)
        with np.errstate(divide="ignore"):
            logabs += np.log(absp)
        if k + 1 < n:
            safe = np.where(absp > 0, pk, 1.0)
            factors = a[:, k + 1 :, k] / safe[:, None]
            a[:, k + 1 :, k:] -= factors[:, :, None] * a[:, k, k:][:, None, :]
    return logabs.reshape(lead)


def unitarity_residual(m):
    """Frobenius norm of M*M - I (0 for exactly unitary M)."""
    a = _as_array(m)
    rows, cols = a.shape
    if rows != cols:
        raise DimensionError(f"unitarity residual needs a square matrix, got {rows}x{cols}")
    return float(np.linalg.norm(a.conj().T @ a - np.eye(rows)))


def unitary_eigenangles(u, residual_tol=1e-6):
    """Eigenvalue angles of a unitary matrix, sorted ascending in [-pi, pi).

    Uses a complex Schur decomposition (stable for normal matrices; plain
    eigensolvers lose orthogonality of eigenvectors at clustered spectra).
    The reconstruction from the Schur basis is checked to 1e-8.
    """
    a = _as_array(u)
    rows, cols = a.shape
    if rows != cols:
        raise DimensionError(f"eigenangles need a square matrix, got {rows}x{cols}")
    res = unitarity_residual(a)
    if res > residual_tol:
        raise ValidationError(f"matrix is not unitary: residual {res:.3e} > {residual_tol:.1e}")
    try:
        t, z = scipy.linalg.schur(a, output="complex")
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"Schur decomposition failed: {exc}") from exc
    theta = np.angle(np.diagonal(t))
    theta = np.where(theta >= np.pi, theta - 2.0 * np.pi, theta)  # branch [-pi, pi)
    order = np.argsort(theta, kind="stable")
    theta = np.ascontiguousarray(theta[order])
    recon = (z[:, order] * np.exp(1j * theta)) @ z[:, order].conj().T
    recon_err = float(np.linalg.norm(recon - a))
    if recon_err > 1e-8:
        raise NumericalError(f"eigenangle reconstruction residual {recon_err:.3e} > 1e-8")
    return theta


def haar_sample(n, rng):
    """Draw a Haar-distributed element of U(n).

    ``rng`` is a numpy Generator or an integer seed. Complex Ginibre matrix,
    QR, then the Q columns are rephased by the R diagonal so the distribution
    is exactly Haar rather than QR-convention dependent.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise ValidationError(f"dimension must be a positive integer, got {n!r}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    absd = np.abs(d)
    phase = np.where(absd > 0, d, 1.0) / np.where(absd > 0, absd, 1.0)
    return UnitaryMatrix(q * phase)


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    """A validated element of U(n).

    Rejects non-unitary input instead of renormalizing it; the wrapped array
    is read-only. ``validation_tol`` bounds the allowed unitarity residual.
    """

    array: np.ndarray
    validation_tol: float = 1e-9

    def __post_init__(self):
        a = as_complex_matrix(self.array)
        rows, cols = a.shape
        if rows != cols:
            raise DimensionError(f"unitary matrix must be square, got {rows}x{cols}")
        res = unitarity_residual(a)
        if res > self.validation_tol:
            raise ValidationError(
                f"matrix is not unitary: residual {res:.3e} > {self.validation_tol:.1e}"
            )
        dmod = abs(determinant(a))
        if abs(dmod - 1.0) > 1e-6:
            raise ValidationError(f"determinant modulus {dmod:.9f} is not within 1e-6 of 1")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "array", a)

    @property
    def n(self):
        return self.array.shape[0]
