"""Linear-algebra helpers for Hermitian matrices."""
import numpy as np
import scipy.linalg
import structlog

logger = structlog.get_logger(__name__)

CHOLESKY_FALLBACK_TOLERANCE = 1e-8


def hermitian(matrix: np.ndarray) -> np.ndarray:
    """Return the Hermitian part of a square matrix (or a stack of them).

    :param matrix: Array whose last two axes are square.
    :return: (M + M^H) / 2.
    """
    return 0.5 * (matrix + np.swapaxes(matrix.conj(), -1, -2))


def gram(matrix: np.ndarray) -> np.ndarray:
    """Return [X]^2 = X X^H for a matrix or a stack of matrices."""
    return matrix @ np.swapaxes(matrix.conj(), -1, -2)


def logdet_pd(matrix: np.ndarray) -> float:
    """Compute ln|M| of a Hermitian positive definite matrix.

    The determinant comes from a Cholesky factor of the symmetrised matrix. If the
    factorisation fails, an LU-based `slogdet` is used instead and the failure is logged.

    :param matrix: Hermitian positive definite matrix.
    :return: The natural log-determinant.
    """
    sym = hermitian(matrix)
    try:
        factor = scipy.linalg.cholesky(sym, lower=True)
        return float(2.0 * np.sum(np.log(np.real(np.diag(factor)))))
    except np.linalg.LinAlgError:
        min_eig = float(np.min(np.linalg.eigvalsh(sym)))
        logger.warning(
            "Cholesky failed, using slogdet instead.",
            min_eigenvalue=min_eig,
            positive_definite=min_eig > -CHOLESKY_FALLBACK_TOLERANCE,
        )
        _, logabsdet = np.linalg.slogdet(sym)
        return float(logabsdet)


def inv_pd(matrix: np.ndarray) -> np.ndarray:
    """Invert a Hermitian positive definite matrix."""
    sym = hermitian(matrix)
    identity = np.eye(sym.shape[-1], dtype=sym.dtype)
    try:
        return hermitian(scipy.linalg.cho_solve(scipy.linalg.cho_factor(sym, lower=True), identity))
    except np.linalg.LinAlgError:
        return hermitian(scipy.linalg.solve(sym, identity))


def psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Return the PSD square root of a Hermitian PSD matrix.

    Negative eigenvalues produced by roundoff are clipped to zero.
    """
    eigvals, eigvecs = scipy.linalg.eigh(hermitian(matrix))
    roots = np.sqrt(np.clip(eigvals, 0.0, None))
    return hermitian((eigvecs * roots) @ eigvecs.conj().T)


def real_trace(matrix: np.ndarray) -> float:
    """Return the real part of the trace."""
    return float(np.real(np.trace(matrix)))
