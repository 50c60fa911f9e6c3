"""Spectral kernel built on LAPACK through scipy.

Every projected operator is handled in its compressed ``r x r`` form
``B^dagger O B``; the ``N x N`` product ``P O P`` is never formed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import ConfigError, GapClosed, IllConditioned, NumericalError, RankDeficient

HERMITIAN_TOL = 1e-10
RESIDUAL_TOL = 1e-8
GAP_TOL = 1e-8
COND_MAX = 1e10
SINGULAR_FLOOR = 1e-10


@dataclass
class Frame:
    """Orthonormal columns ``B``; the projector is ``B B^dagger``."""

    columns: np.ndarray
    provenance: str = ""

    @property
    def n(self) -> int:
        return self.columns.shape[0]

    @property
    def rank(self) -> int:
        return self.columns.shape[1]

    def projector(self) -> np.ndarray:
        B = self.columns
        return B @ B.conj().T

    def orthonormality_error(self) -> float:
        B = self.columns
        if B.shape[1] == 0:
            return 0.0
        return float(np.abs(B.conj().T @ B - np.eye(B.shape[1])).max())


@dataclass
class EigResult:
    values: np.ndarray
    vectors: np.ndarray
    residual: float = 0.0   # max_k ||A v_k - lambda_k v_k|| / ||A||_2


def _residual(A, values, vectors, norm2: float) -> float:
    if vectors.shape[1] == 0:
        return 0.0
    R = A @ vectors - vectors * values[None, :]
    return float(np.linalg.norm(R, axis=0).max() / (norm2 or 1.0))


def hermitian_eig(A: np.ndarray, check: bool = True) -> EigResult:
    """Full eigendecomposition of a Hermitian matrix, values ascending."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ConfigError("hermitian_eig needs a square matrix")
    if A.size and np.abs(A - A.conj().T).max() >= HERMITIAN_TOL:
        raise ConfigError("matrix is not Hermitian")
    w, V = sla.eigh(A, driver="evd" if A.shape[0] < 64 else "evr")
    res = _residual(A, w, V, float(np.abs(w).max(initial=0.0))) if check else 0.0
    if res > RESIDUAL_TOL:
        raise NumericalError(f"eigen-residual {res:.2e} above tolerance")
    return EigResult(w, V, res)


def occupied_frame(H, n_occ: int) -> Frame:
    """Frame of the ``n_occ`` lowest eigenvectors of ``H``.

    Only eigenpairs ``0..n_occ`` are computed; the extra one is used for the
    gap check against the first empty level.
    """
    M = getattr(H, "matrix", H)
    M = np.asarray(M)
    n = M.shape[0]
    if not 0 <= n_occ <= n:
        raise ConfigError(f"n_occ={n_occ} outside [0, {n}]")
    if n_occ == 0:
        return Frame(np.zeros((n, 0), dtype=complex), "fermi")
    if np.abs(M - M.conj().T).max() >= HERMITIAN_TOL:
        raise ConfigError("Hamiltonian is not Hermitian")
    hi = min(n_occ, n - 1)
    w, V = sla.eigh(M, subset_by_index=[0, hi], driver="evr")
    if n_occ < n and w[n_occ] - w[n_occ - 1] <= GAP_TOL:
        raise GapClosed(f"no gap between levels {n_occ} and {n_occ + 1} "
                        f"({w[n_occ - 1]:.3e} vs {w[n_occ]:.3e})")
    B = np.ascontiguousarray(V[:, :n_occ]).astype(complex, copy=False)
    return Frame(B, "fermi")


def restricted_operator(B, O) -> np.ndarray:
    """``B^dagger O B``; ``O`` may be dense, sparse, or a 1-D diagonal."""
    Bc = getattr(B, "columns", B)
    n = Bc.shape[0]
    if sp.issparse(O):
        if O.shape != (n, n):
            raise ConfigError(f"operator shape {O.shape} does not match frame rows {n}")
        OB = O @ Bc
    else:
        O = np.asarray(O)
        if O.ndim == 1:
            if O.shape[0] != n:
                raise ConfigError(f"diagonal length {O.shape[0]} does not match frame rows {n}")
            OB = O[:, None] * Bc
        else:
            if O.shape != (n, n):
                raise ConfigError(f"operator shape {O.shape} does not match frame rows {n}")
            OB = O @ Bc
    return Bc.conj().T @ OB


def general_eig(M: np.ndarray) -> EigResult:
    """Right eigenpairs of a general square matrix, unit-norm vectors."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConfigError("general_eig needs a square matrix")
    if M.shape[0] == 0:
        return EigResult(np.zeros(0, dtype=complex), np.zeros((0, 0), dtype=complex))
    w, V = sla.eig(M, check_finite=True)
    V = V / np.linalg.norm(V, axis=0)[None, :]
    s = np.linalg.svd(V, compute_uv=False)
    cond = s[0] / s[-1] if s[-1] > 0 else np.inf
    if cond > COND_MAX:
        raise IllConditioned(f"eigenvector condition number {cond:.2e} exceeds {COND_MAX:.0e}")
    res = _residual(M, w, V, float(np.linalg.norm(M, 2)))
    if res > RESIDUAL_TOL:
        raise NumericalError(f"eigen-residual {res:.2e} above tolerance")
    return EigResult(w, V, res)


def loewdin(V: np.ndarray, provenance: str = "loewdin") -> Frame:
    """Closest orthonormal frame to ``V``: ``U W^dagger`` from the thin SVD."""
    V = np.asarray(V)
    if V.shape[1] == 0:
        return Frame(V.astype(complex), provenance)
    U, s, Wh = np.linalg.svd(V, full_matrices=False)
    if s[-1] <= SINGULAR_FLOOR:
        raise RankDeficient(f"smallest singular value {s[-1]:.2e} at or below {SINGULAR_FLOOR:.0e}")
    return Frame(U @ Wh, provenance)
