"""Position observables and eigenvalue sort keys.

An observable is diagonal in a fixed *mode basis*.  Without the time-reversal
breaker the modes are the orbitals.  With it, every Kane-Mele cell carries the
same 4x4 block ``m I + A``; its eigenvectors ``Q`` (shared by all cells) give
four modes per cell, and a functional ``f`` acts as ``Q diag(f(m +- 1/2)) Q^T``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, NearZeroModulus
from .lattice import Lattice
from .models import OrbitalLayout, layout_for

FUNCTIONALS = ("linear", "complex_exp", "sin", "cos")
SORT_KINDS = ("real_value", "imag_log")

# per-cell coupling of equal-sublattice up/down orbitals (A-up, B-up, A-down, B-down)
TRB_BLOCK = np.array([[0, 0, 1, 0],
                      [0, 0, 0, 1],
                      [1, 0, 0, 0],
                      [0, 1, 0, 0]], dtype=float)


@dataclass(frozen=True)
class PositionSpec:
    functional: str = "linear"
    axis: int = 1
    trb: bool = False
    trb_strength: float = 0.5

    def validate(self) -> None:
        if self.functional not in FUNCTIONALS:
            raise ConfigError(f"unknown functional {self.functional!r}")
        if self.axis not in (1, 2):
            raise ConfigError("axis must be 1 or 2")

    @property
    def periodic(self) -> bool:
        return self.functional != "linear"

    @property
    def sort_kind(self) -> str:
        return "imag_log" if self.functional == "complex_exp" else "real_value"

    def label(self) -> str:
        coord = "XY"[self.axis - 1] + ("_TRB" if self.trb else "")
        if self.functional == "linear":
            return coord
        return f"{self.functional}({coord})"

    def to_dict(self) -> dict:
        return {"functional": self.functional, "axis": self.axis, "trb": self.trb,
                "trb_strength": self.trb_strength}

    @classmethod
    def from_dict(cls, d: dict) -> "PositionSpec":
        return cls(**d)


@dataclass
class Observable:
    """Operator diagonal in a mode basis.

    ``mode_values[i]`` is the eigenvalue of mode ``i``.  ``block_basis`` is
    ``None`` when modes are orbitals, else the shared per-cell 4x4 basis.
    """

    spec: PositionSpec
    mode_values: np.ndarray
    block_basis: Optional[np.ndarray] = None

    @property
    def hermitian(self) -> bool:
        return self.spec.functional != "complex_exp"

    @property
    def n(self) -> int:
        return len(self.mode_values)

    @property
    def basis_tag(self) -> str:
        return "orbital" if self.block_basis is None else "trb"

    def operator(self):
        """1-D diagonal array, or a sparse block-diagonal matrix."""
        if self.block_basis is None:
            return self.mode_values
        Q = self.block_basis
        vals = self.mode_values.reshape(-1, 4)
        blocks = np.einsum("ij,cj,kj->cik", Q, vals, Q.conj())
        return sp.block_diag(list(blocks), format="csr")

    def dense(self) -> np.ndarray:
        op = self.operator()
        if sp.issparse(op):
            return op.toarray()
        return np.diag(op)


def base_coordinate(lattice: Lattice, axis: int) -> np.ndarray:
    """Cell index (honeycomb) or Cartesian coordinate (Ammann-Beenker) per site."""
    if axis not in (1, 2):
        raise ConfigError("axis must be 1 or 2")
    if lattice.kind == "honeycomb":
        return lattice.cells[:, axis - 1].astype(float)
    return lattice.positions[:, axis - 1].copy()


def _period(lattice: Lattice, axis: int) -> int:
    return lattice.L1 if axis == 1 else lattice.L2


def _apply(functional: str, x: np.ndarray, L: float) -> np.ndarray:
    if functional == "linear":
        return x
    theta = 2 * np.pi * x / L
    if functional == "sin":
        return np.sin(theta)
    if functional == "cos":
        return np.cos(theta)
    return np.exp(1j * theta)


def a_trb(lattice: Lattice, layout: Optional[OrbitalLayout] = None, strength: float = 0.5):
    """Block-diagonal time-reversal breaker, ``strength`` times ``TRB_BLOCK`` per cell."""
    layout = layout or layout_for("kane_mele", lattice)
    if layout.model != "kane_mele":
        raise ConfigError("A_TRB needs the Kane-Mele orbital layout")
    n_cells = layout.n_orbitals // 4
    return sp.block_diag([strength * TRB_BLOCK] * n_cells, format="csr")


def _trb_basis() -> tuple:
    w, Q = np.linalg.eigh(TRB_BLOCK)
    return w, Q


def build_observable(spec: PositionSpec, lattice: Lattice, model: str) -> Observable:
    spec.validate()
    if spec.periodic and lattice.kind != "honeycomb":
        raise ConfigError(f"{spec.functional} needs a honeycomb lattice with known period")
    if spec.trb and model != "kane_mele":
        raise ConfigError("the time-reversal breaker needs the Kane-Mele model")
    layout = layout_for(model, lattice)
    x = base_coordinate(lattice, spec.axis)
    L = _period(lattice, spec.axis) if lattice.kind == "honeycomb" else 1.0
    if not spec.trb:
        return Observable(spec, _apply(spec.functional, x[layout.site], L))
    w, Q = _trb_basis()
    # cell coordinate is shared by the four orbitals of a cell
    xc = x[layout.site[::4]]
    modes = xc[:, None] + spec.trb_strength * w[None, :]
    return Observable(spec, _apply(spec.functional, modes, L).ravel(), Q)


@dataclass
class SortResult:
    keys: np.ndarray      # key per input value (input order)
    order: np.ndarray     # stable permutation sorting the keys
    branch_cut: float     # angle of the cut (imag_log), 0 for real_value


def sort_key(values, kind: str, min_modulus: float = 0.5) -> SortResult:
    """Real sort keys for eigenvalues.

    ``imag_log`` uses ``arg`` rotated so the branch cut sits in the middle of
    the largest angular gap, mapped to ``[0, 2 pi)``.
    """
    values = np.asarray(values)
    if kind == "real_value":
        keys = np.real(values).astype(float)
        return SortResult(keys, np.argsort(keys, kind="stable"), 0.0)
    if kind != "imag_log":
        raise ConfigError(f"unknown sort key {kind!r}")
    if values.size == 0:
        return SortResult(np.zeros(0), np.zeros(0, dtype=np.int64), 0.0)
    mod = np.abs(values)
    if mod.min() <= min_modulus:
        raise NearZeroModulus(f"eigenvalue modulus {mod.min():.3e} at or below {min_modulus}")
    ang = np.mod(np.angle(values), 2 * np.pi)
    s = np.sort(ang)
    gaps = np.diff(np.concatenate([s, [s[0] + 2 * np.pi]]))
    g = int(np.argmax(gaps))
    cut = float(np.mod(s[g] + gaps[g] / 2, 2 * np.pi))
    keys = np.mod(ang - cut, 2 * np.pi)
    return SortResult(keys, np.argsort(keys, kind="stable"), cut)


def display_arcsin(values: np.ndarray) -> np.ndarray:
    """Monotone relabelling used by the spectrum plots of sin observables."""
    return np.arcsin(np.clip(np.real(values), -1.0, 1.0))
