"""Dense complex matrix helpers shared by the learners and their oracles.

Matrices are plain ``numpy`` arrays. Indices are 0-based throughout the
package; CSV exports convert to 1-based antenna indices.
"""

from __future__ import annotations

import json
from typing import NamedTuple

import numpy as np

PSD_RTOL = 1e-9


class RotationParams(NamedTuple):
    """Parameters of one plane rotation acting on coordinates ``l < m``."""

    l: int
    m: int
    theta: float
    phi: float


def hermitian(A) -> np.ndarray:
    """Return the Hermitian matrix defined by the upper triangle of ``A``.

    The strictly lower triangle of ``A`` is ignored and the diagonal is
    made real, so the result satisfies ``B == B.conj().T`` exactly.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    upper = np.triu(A, 1)
    return upper + upper.conj().T + np.diag(A.diagonal().real).astype(complex)


def is_hermitian(A, tol: float = 1e-12) -> bool:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return False
    scale = max(np.linalg.norm(A), 1.0)
    return bool(np.linalg.norm(A - A.conj().T) <= tol * scale)


def rotation_column(n_t: int, l: int, m: int, theta: float, phi: float) -> np.ndarray:
    """Column ``l`` of :func:`rotation_matrix`: ``cos(theta) e_l + e^{-i phi} sin(theta) e_m``."""
    r = np.zeros(n_t, dtype=complex)
    r[l] = np.cos(theta)
    r[m] = np.exp(-1j * phi) * np.sin(theta)
    return r


def rotation_block(theta: float, phi: float) -> np.ndarray:
    """The 2x2 active block of the plane rotation, rows/cols ``(l, m)``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array(
        [[c, -np.exp(1j * phi) * s], [np.exp(-1j * phi) * s, c]], dtype=complex
    )


def rotation_matrix(n_t: int, p: RotationParams) -> np.ndarray:
    """Unitary plane rotation equal to the identity outside rows/cols ``l, m``.

    Entries: ``R[l,l] = R[m,m] = cos(theta)``, ``R[m,l] = e^{-i phi} sin(theta)``
    and ``R[l,m] = -e^{i phi} sin(theta)``.
    """
    l, m = p.l, p.m
    if not (0 <= l < m < n_t):
        raise IndexError(f"rotation indices ({l}, {m}) invalid for n_t={n_t}")
    R = np.eye(n_t, dtype=complex)
    R[np.ix_((l, m), (l, m))] = rotation_block(p.theta, p.phi)
    return R


def rotate_columns(W: np.ndarray, p: RotationParams) -> np.ndarray:
    """Return ``W @ R`` touching only columns ``l`` and ``m``."""
    out = W.copy()
    out[:, [p.l, p.m]] = W[:, [p.l, p.m]] @ rotation_block(p.theta, p.phi)
    return out


def gram(H) -> np.ndarray:
    """``G = H^* H`` as an exactly Hermitian ``n_t x n_t`` matrix."""
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    return hermitian(H.conj().T @ H)


def off_diag_norm(A) -> float:
    """Frobenius norm of the strict upper triangle of ``A``."""
    return float(np.linalg.norm(np.triu(np.asarray(A), 1)))


def quadratic_form(A, x) -> float:
    """Real part of ``x^* A x``."""
    A = np.asarray(A)
    x = np.asarray(x)
    if A.shape[1] != x.shape[0]:
        raise ValueError(f"dimension mismatch: {A.shape} vs {x.shape}")
    return float(np.vdot(x, A @ x).real)


def is_psd(G, rtol: float = PSD_RTOL) -> bool:
    G = np.asarray(G)
    eigs = np.linalg.eigvalsh(G)
    return bool(eigs.min() >= -rtol * max(np.linalg.norm(G), 1e-300))


def reference_evd(G) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition through LAPACK, independent of the Jacobi code.

    Returns eigenvalues in descending order and a unitary matrix whose
    columns are the matching eigenvectors. Each eigenvector's phase is fixed
    so its largest-magnitude component is real and positive.
    """
    G = np.asarray(G, dtype=complex)
    if not is_hermitian(G, tol=1e-10):
        raise ValueError("reference_evd requires a Hermitian matrix")
    w, V = np.linalg.eigh(G)
    order = np.argsort(w)[::-1]
    w, V = w[order], V[:, order]
    for j in range(V.shape[1]):
        k = int(np.argmax(np.abs(V[:, j])))
        V[:, j] *= np.abs(V[k, j]) / V[k, j]
    return w, V


def numerical_rank(G, rtol: float = 1e-10) -> int:
    """Number of eigenvalues above ``rtol * ||G||_F``; smaller ones count as zero."""
    eigs = np.linalg.eigvalsh(np.asarray(G))
    return int(np.sum(eigs > rtol * np.linalg.norm(G)))


def null_space_basis(H, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of the null space of ``H``."""
    G = gram(H)
    w, V = reference_evd(G)
    return V[:, w <= rtol * max(np.linalg.norm(G), 1e-300)]


def matrix_to_json(A) -> str:
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    rows, cols = A.shape
    flat = A.reshape(-1)
    return json.dumps(
        {"rows": rows, "cols": cols, "re": flat.real.tolist(), "im": flat.imag.tolist()}
    )


def matrix_from_json(text) -> np.ndarray:
    """Inverse of :func:`matrix_to_json`; accepts a JSON string or a parsed dict."""
    d = json.loads(text) if isinstance(text, (str, bytes)) else text
    rows, cols = int(d["rows"]), int(d["cols"])
    re = np.asarray(d["re"], dtype=float)
    im = np.asarray(d.get("im", np.zeros_like(re)), dtype=float)
    if re.size != rows * cols or im.size != rows * cols:
        raise ValueError("entry count does not match rows * cols")
    A = (re + 1j * im).reshape(rows, cols)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


def random_channel(rng: np.random.Generator, n_r: int, n_t: int) -> np.ndarray:
    """i.i.d. CN(0, 1) entries."""
    return (rng.standard_normal((n_r, n_t)) + 1j * rng.standard_normal((n_r, n_t))) / np.sqrt(2)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    Q, R = np.linalg.qr(random_channel(rng, n, n))
    d = R.diagonal()
    return Q * (d / np.abs(d))


def hermitian_with_spectrum(rng: np.random.Generator, eigenvalues) -> np.ndarray:
    """``V diag(eigenvalues) V^*`` with Haar-random ``V``."""
    lam = np.asarray(eigenvalues, dtype=float)
    V = random_unitary(rng, lam.size)
    return hermitian((V * lam) @ V.conj().T)
