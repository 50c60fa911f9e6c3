"""Wannier charge centre sweeps on ribbons, Chern numbers and the Z2 index.

A ribbon is ``L1`` cells wide, periodic along ``a1``, and one cell tall; the
bonds crossing the ``a2`` boundary carry the Bloch phase ``exp(i kappa2 w2)``.
Centres come from the restricted ``exp(2 pi i X / L1)`` operator on the
occupied frame at each ``kappa2``, in cell units in ``[0, L1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ConfigError, PairingAmbiguous, TrackingAmbiguous
from .lattice import Lattice, ribbon
from .linalg import general_eig, occupied_frame, restricted_operator
from .models import Hamiltonian, assemble
from .position import PositionSpec, build_observable

KRAMERS_TOL = 1e-6
CLOSE_FRACTION = 1e-3
ROUNDING_TOL = 0.1


@dataclass
class BlochFamily:
    model: str
    params: dict
    L1: int
    kappa2: np.ndarray
    lattice: Lattice

    @property
    def n_k(self) -> int:
        return len(self.kappa2)

    def hamiltonian(self, kappa2: float) -> Hamiltonian:
        return assemble(self.model, self.lattice, self.params, kappa=(0.0, float(kappa2)))

    def half_filling(self) -> int:
        return self.hamiltonian(0.0).half_filling()


def kappa_grid(n_k: int) -> np.ndarray:
    """``n_k`` points ``-pi + 2 pi j / n_k``; ``+pi`` is identified with ``-pi``."""
    return -np.pi + 2 * np.pi * np.arange(n_k) / n_k


def bloch_family(model: str, params: dict, L1: int = 10, n_k: int = 128,
                 disorder=None) -> BlochFamily:
    if model not in ("haldane", "kane_mele"):
        raise ConfigError("Bloch families need a honeycomb model")
    if disorder is not None and getattr(disorder, "variance", 0) > 0:
        raise ConfigError("disorder breaks translation symmetry along a2; no Bloch family")
    if n_k < 32 or n_k % 2:
        raise ConfigError("n_k must be even and at least 32")
    if L1 < 2:
        raise ConfigError("ribbon width must be at least 2")
    return BlochFamily(model, dict(params), L1, kappa_grid(n_k), ribbon(L1))


@dataclass
class WCCSweep:
    kappa2: np.ndarray          # (n_k,)
    centers: np.ndarray         # (n_k, n_branches) sorted per slice, in [0, L1)
    tracked: np.ndarray         # (n_k + 1, n_branches) unwrapped along the loop
    L1: int
    min_branch_gap: float
    ambiguous_steps: list = field(default_factory=list)
    trb: bool = False

    @property
    def n_branches(self) -> int:
        return self.centers.shape[1]

    def rows(self):
        """(kappa2, branch, centre) rows for CSV export."""
        for j, k in enumerate(self.kappa2):
            for b, x in enumerate(self.centers[j]):
                yield float(k), b, float(x)


def _circ(d: np.ndarray, L: float) -> np.ndarray:
    return d - L * np.round(d / L)


def slice_centers(family: BlochFamily, kappa2: float, n_occ: int, trb: bool = False) -> np.ndarray:
    H = family.hamiltonian(kappa2)
    B = occupied_frame(H, n_occ)
    obs = build_observable(PositionSpec("complex_exp", 1, trb), family.lattice, family.model)
    eig = general_eig(restricted_operator(B, obs.operator()))
    L = family.L1
    return np.sort(np.mod(L * np.angle(eig.values) / (2 * np.pi), L))


def _match(prev: np.ndarray, cur: np.ndarray, L: float):
    """Optimal circular matching; returns (assignment, displacement, ambiguous)."""
    d = _circ(cur[None, :] - prev[:, None], L)
    cost = d ** 2
    rows, cols = linear_sum_assignment(cost)
    close = CLOSE_FRACTION * L
    ambiguous = False
    order = np.argsort(prev)
    for a, b in zip(order[:-1], order[1:]):
        if abs(_circ(prev[b] - prev[a], L)) < close:
            swap = cost[a, cols[b]] + cost[b, cols[a]] - cost[a, cols[a]] - cost[b, cols[b]]
            if abs(swap) <= 1e-12 * L * L and cols[a] != cols[b]:
                ambiguous = True
    return cols, d[rows, cols], ambiguous


def wcc_sweep(family: BlochFamily, n_occ: Optional[int] = None, trb: bool = False) -> WCCSweep:
    n_occ = family.half_filling() if n_occ is None else n_occ
    L = family.L1
    centers = np.array([slice_centers(family, k, n_occ, trb) for k in family.kappa2])
    tracked = np.empty((family.n_k + 1, centers.shape[1]))
    tracked[0] = centers[0]
    cur = centers[0].copy()
    ambiguous = []
    for j in range(1, family.n_k + 1):
        nxt = centers[j % family.n_k]
        cols, disp, amb = _match(cur, nxt, L)
        if amb:
            ambiguous.append(j)
        tracked[j] = tracked[j - 1] + disp
        cur = nxt[cols]
    gaps = []
    for row in centers:
        if len(row) > 1:
            g = np.diff(np.concatenate([row, [row[0] + L]]))
            gaps.append(g.min())
    return WCCSweep(family.kappa2, centers, tracked, L, float(min(gaps)) if gaps else np.inf,
                    ambiguous, trb)


@dataclass
class ChernResult:
    chern: int
    residual: float
    winding: float


def chern_from_winding(sweep: WCCSweep, strict: bool = True) -> ChernResult:
    """Total displacement of all branches around the loop, in units of ``L1``."""
    if strict and sweep.ambiguous_steps:
        raise TrackingAmbiguous(f"branch assignment not unique at steps {sweep.ambiguous_steps[:5]}")
    total = float(np.sum(sweep.tracked[-1] - sweep.tracked[0])) / sweep.L1
    c = int(np.round(total))
    res = abs(total - c)
    if res >= ROUNDING_TOL:
        raise TrackingAmbiguous(f"winding {total:.4f} is not close to an integer")
    return ChernResult(c, res, total)


def _kramers_pairs(x: np.ndarray, L: float, tol: float) -> np.ndarray:
    """Pair sorted centres into degenerate doublets; returns (n/2, 2) indices."""
    n = len(x)
    if n % 2:
        raise PairingAmbiguous("odd number of branches cannot form Kramers pairs")
    o = np.argsort(x)
    best = None
    for shift in (0, 1):
        idx = np.roll(o, -shift).reshape(-1, 2)
        split = np.abs(_circ(x[idx[:, 1]] - x[idx[:, 0]], L))
        if split.max() <= tol:
            if best is not None:
                raise PairingAmbiguous("more than two branches are degenerate")
            best = idx
    if best is None:
        worst = np.abs(_circ(x[o[1::2]] - x[o[0::2]], L)).max()
        raise PairingAmbiguous(f"Kramers splitting {worst:.2e} exceeds {tol:.0e}")
    return best


@dataclass
class Z2Result:
    z2: int
    residual: float
    per_pair: np.ndarray


def z2_from_wcc(sweep: WCCSweep, tol: float = KRAMERS_TOL) -> Z2Result:
    """Time-reversal polarization from tracked Kramers partners between 0 and pi.

    Pairs are formed at ``kappa2 = 0``; both partners are tracked to
    ``kappa2 = pi`` and the change of their separation, in cell units, is
    taken mod 2.
    """
    k = sweep.kappa2
    n_k = len(k)
    j0 = int(np.argmin(np.abs(k)))
    if abs(k[j0]) > 1e-12 or abs(k[0] + np.pi) > 1e-12:
        raise ConfigError("grid must contain kappa2 = 0 and kappa2 = -pi")
    L = sweep.L1
    x0 = sweep.centers[j0]
    pairs = _kramers_pairs(x0, L, tol)
    _kramers_pairs(sweep.centers[0], L, tol)     # degeneracy check at pi
    # track from 0 to pi (index n_k wraps to the -pi slice)
    pos = x0.copy()
    unwrapped = x0.copy()
    for j in range(j0 + 1, n_k + 1):
        nxt = sweep.centers[j % n_k]
        cols, disp, _ = _match(pos, nxt, L)
        unwrapped = unwrapped + disp
        pos = nxt[cols]
    sep0 = _circ(x0[pairs[:, 0]] - x0[pairs[:, 1]], L)
    sep1 = unwrapped[pairs[:, 0]] - unwrapped[pairs[:, 1]]
    delta = sep1 - sep0
    parity = np.mod(np.round(delta), 2).astype(int)
    res = float(np.abs(delta - np.round(delta)).max())
    if res >= ROUNDING_TOL:
        raise PairingAmbiguous(f"separation change {delta} is not close to integers")
    values = set(parity.tolist())
    if len(values) != 1:
        raise PairingAmbiguous(f"pairs disagree on the parity: {sorted(values)}")
    return Z2Result(int(parity[0]), res, parity)
