"""Localization, symmetry and spread diagnostics for IPP output."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, TooFewSamples
from .lattice import A1, A2, Lattice, translation_map
from .models import OrbitalLayout, layout_for, theta
from .position import base_coordinate

NORM_FLOOR = 1e-14
MIN_SAMPLES = 5
SHELL_WIDTH = 1.0
CORE_RADIUS = 1.0
TRANSLATION_TOL = 1e-6


@dataclass
class LocalizationReport:
    cell_norms: np.ndarray    # L1 x L2 (honeycomb) or per-site norms (quasicrystal)
    decay_rate: float
    fit_r2: float
    center: tuple
    spread: float

    def to_dict(self) -> dict:
        return {"decay_rate": self.decay_rate, "fit_r2": self.fit_r2,
                "center": list(self.center), "spread": self.spread}


def cell_norm_matrix(w: np.ndarray, lattice: Lattice, model: str = "haldane") -> np.ndarray:
    if lattice.kind != "honeycomb":
        raise ConfigError("cell norms need a honeycomb lattice; use site_norms instead")
    site = layout_for(model, lattice).site
    m = lattice.cells[site, 0]
    n = lattice.cells[site, 1]
    out = np.zeros((lattice.L1, lattice.L2))
    np.add.at(out, (m, n), np.abs(w) ** 2)
    return np.sqrt(out)


def site_norms(w: np.ndarray, lattice: Lattice, model: str) -> np.ndarray:
    """Euclidean norm over the orbitals of every site."""
    site = layout_for(model, lattice).site
    out = np.zeros(lattice.n_sites)
    np.add.at(out, site, np.abs(w) ** 2)
    return np.sqrt(out)


def _torus(d: np.ndarray, L: float) -> np.ndarray:
    return d - L * np.round(d / L)


def cell_distances(lattice: Lattice, center) -> np.ndarray:
    """L1 x L2 Euclidean distances from ``center`` (given in cell coordinates).

    Offsets are converted with the lattice vectors; under periodic boundary
    conditions the shortest image is used.
    """
    m, n = np.meshgrid(np.arange(lattice.L1), np.arange(lattice.L2), indexing="ij")
    dm = m - center[0]
    dn = n - center[1]
    if not lattice.periodic:
        return np.hypot(dm * A1[0] + dn * A2[0], dn * A2[1])
    dm, dn = _torus(dm, lattice.L1), _torus(dn, lattice.L2)
    best = None
    for s in (-1, 0, 1):
        for t in (-1, 0, 1):
            a = dm + s * lattice.L1
            b = dn + t * lattice.L2
            d = np.hypot(a * A1[0] + b * A2[0], b * A2[1])
            best = d if best is None else np.minimum(best, d)
    return best


def decay_fit(norms: np.ndarray, distances: np.ndarray, floor: float = NORM_FLOOR,
              shell_width: float = SHELL_WIDTH, min_distance: float = CORE_RADIUS) -> tuple:
    """Exponential fit of the radial envelope ``log(norm) = a - rate * d``.

    Samples at or below ``floor`` and inside ``min_distance`` are dropped; in
    every shell of width ``shell_width`` the largest norm is kept together
    with its distance, and a least-squares line is fitted through those
    points.  Returns ``(rate, r2)`` with ``rate > 0`` for decay.
    """
    y = np.asarray(norms, dtype=float).ravel()
    d = np.asarray(distances, dtype=float).ravel()
    keep = (y > floor) & (d >= min_distance)
    y, d = y[keep], d[keep]
    shell = np.floor(d / shell_width).astype(np.int64)
    # per shell, the sample with the largest norm
    o = np.lexsort((-y, shell))
    first = np.ones(len(o), dtype=bool)
    first[1:] = shell[o][1:] != shell[o][:-1]
    idx = o[first]
    if len(idx) < MIN_SAMPLES:
        raise TooFewSamples(f"{len(idx)} distance shells above {floor:.0e}; need {MIN_SAMPLES}")
    ly, dd = np.log(y[idx]), d[idx]
    A = np.stack([np.ones_like(dd), dd], axis=1)
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = ly - A @ coef
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(res ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(-coef[1]), float(r2)


def localization_report(w: np.ndarray, lattice: Lattice, model: str, center) -> LocalizationReport:
    if lattice.kind == "honeycomb":
        norms = cell_norm_matrix(w, lattice, model)
        dist = cell_distances(lattice, center)
    else:
        norms = site_norms(w, lattice, model)
        dist = np.hypot(lattice.positions[:, 0] - center[0], lattice.positions[:, 1] - center[1])
    rate, r2 = decay_fit(norms, dist)
    spread = float(np.sqrt(np.sum(norms ** 2 * dist ** 2)))
    return LocalizationReport(norms, rate, r2, tuple(center), spread)


# ------------------------------------------------------------------ spreads

@dataclass
class MVReport:
    total_variance: np.ndarray      # per function, Var_X + Var_Y
    gauge_dependent: np.ndarray     # per function
    invariant: np.ndarray           # per function, ||QXPw||^2 + ||QYPw||^2
    invariant_total: float          # trace, independent of the basis
    identity_residual: float        # max |total - gauge - invariant|

    def to_dict(self) -> dict:
        return {"invariant_total": self.invariant_total,
                "identity_residual": self.identity_residual,
                "gauge_dependent_total": float(self.gauge_dependent.sum()),
                "total_variance_total": float(self.total_variance.sum())}


def position_diagonals(lattice: Lattice, model: str) -> tuple:
    site = layout_for(model, lattice).site
    return base_coordinate(lattice, 1)[site], base_coordinate(lattice, 2)[site]


def mv_decomposition(W: np.ndarray, B: np.ndarray, X: np.ndarray, Y: np.ndarray,
                     range_tol: float = 1e-8) -> MVReport:
    """Split the spread of every column of ``W`` into gauge-dependent and invariant parts.

    ``X`` and ``Y`` are diagonals; ``B`` is the Fermi frame.
    """
    W = np.atleast_2d(np.asarray(W).T).T if np.ndim(W) == 1 else np.asarray(W)
    inside = W - B @ (B.conj().T @ W)
    if W.shape[1] and np.linalg.norm(inside, axis=0).max() > range_tol:
        raise ConfigError("function lies outside the range of the projector")
    total = np.zeros(W.shape[1])
    gauge = np.zeros(W.shape[1])
    inv = np.zeros(W.shape[1])
    for D in (X, Y):
        p = np.abs(W) ** 2
        mu = D @ p
        DW = D[:, None] * W
        shifted = DW - W * mu[None, :]
        total += np.sum(np.abs(shifted) ** 2, axis=0)
        PDW = B @ (B.conj().T @ DW)
        gauge += np.sum(np.abs(PDW - W * mu[None, :]) ** 2, axis=0)
        inv += np.sum(np.abs(DW - PDW) ** 2, axis=0)
    resid = float(np.abs(total - gauge - inv).max()) if W.shape[1] else 0.0
    return MVReport(total, gauge, inv, float(inv.sum()), resid)


# ------------------------------------------------------------------ symmetry

def bosonic_metric(W: np.ndarray) -> np.ndarray:
    """Per function: max |Im| after removing the phase that best makes it real."""
    s = np.sum(W ** 2, axis=0)
    phase = np.exp(-0.5j * np.angle(s))
    return np.abs(np.imag(W * phase[None, :])).max(axis=0)


def degenerate_groups(provenance: Sequence[tuple], values: np.ndarray,
                      tol: float = 1e-8) -> list:
    """Indices sharing a leaf and an eigenvalue of the last observable."""
    leaves = {}
    for i, p in enumerate(provenance):
        leaves.setdefault(tuple(p[:-1]), []).append(i)
    groups = []
    for idx in leaves.values():
        idx = np.array(idx)
        v = np.asarray(values)[idx]
        keys = np.real(v) if np.isrealobj(v) or np.abs(np.imag(v)).max() == 0 else np.angle(v)
        o = np.argsort(keys, kind="stable")
        start = 0
        for k in range(1, len(o) + 1):
            if k == len(o) or abs(keys[o[k]] - keys[o[k - 1]]) > tol * max(1.0, abs(keys[o[k]])):
                groups.append(idx[o[start:k]])
                start = k
    return groups


def fermionic_metric(W: np.ndarray, layout: OrbitalLayout, groups: Optional[list] = None) -> float:
    """max_i ||(I - G G^dagger) Theta w_i|| with ``G`` the group containing ``w_i``.

    Without groups the whole set is used, which is trivially closed when the
    set spans a time-reversal invariant projector.
    """
    if W.shape[1] == 0:
        return 0.0
    groups = groups if groups is not None else [np.arange(W.shape[1])]
    worst = 0.0
    for g in groups:
        G = W[:, g]
        T = theta(G, layout)
        R = T - G @ (G.conj().T @ T)
        worst = max(worst, float(np.linalg.norm(R, axis=0).max()))
    return worst


def orbital_translation(lattice: Lattice, model: str, v) -> np.ndarray:
    """Orbital permutation ``q`` with ``(T_v w)[o] = w[q[o]]``."""
    perm = translation_map(lattice, v)
    lay = layout_for(model, lattice)
    ncomp = lay.orbitals_per_site
    lookup = np.empty(lattice.n_sites * ncomp, dtype=np.int64)
    lookup[lay.site * ncomp + lay.component] = np.arange(lay.n_orbitals)
    return lookup[perm[lay.site] * ncomp + lay.component]


@dataclass
class TranslationReport:
    vector: tuple
    passed: bool
    worst_row: float      # 1 - max_j |S_ij| over rows and columns
    extra_entries: int    # rows/columns with more than one entry above 1 - tol

    def to_dict(self) -> dict:
        return {"vector": list(self.vector), "passed": self.passed,
                "worst_row": self.worst_row, "extra_entries": self.extra_entries}


def translation_metric(W: np.ndarray, lattice: Lattice, model: str, v,
                       tol: float = TRANSLATION_TOL) -> TranslationReport:
    """Is ``S = W^dagger T_v W`` a permutation times phases?"""
    q = orbital_translation(lattice, model, v)
    S = np.abs(W.conj().T @ W[q, :])
    big = S >= 1 - tol
    rows, cols = big.sum(axis=1), big.sum(axis=0)
    worst = float(max((1 - S.max(axis=1)).max(), (1 - S.max(axis=0)).max())) if S.size else 0.0
    passed = bool(np.all(rows == 1) and np.all(cols == 1) and S.max(initial=0) <= 1 + tol)
    extra = int(np.sum(rows > 1) + np.sum(cols > 1))
    return TranslationReport(tuple(int(x) for x in v), passed, worst, extra)


def symmetry_checks(ws, lattice: Lattice, model: str, symmetry: str) -> dict:
    """Metrics for the symmetry class ``bosonic``, ``fermionic`` or ``translation``."""
    W = ws.functions
    if symmetry == "bosonic":
        return {"bosonic_max_imag": float(bosonic_metric(W).max(initial=0.0))}
    if symmetry == "fermionic":
        lay = layout_for(model, lattice)
        groups = degenerate_groups(ws.provenance, ws.values)
        return {"fermionic_closure": fermionic_metric(W, lay, groups),
                "fermionic_groups": len(groups)}
    if symmetry == "translation":
        reps = [translation_metric(W, lattice, model, v) for v in ((1, 0), (0, 1))]
        return {"translation": [r.to_dict() for r in reps],
                "translation_passed": all(r.passed for r in reps)}
    raise ConfigError(f"unknown symmetry class {symmetry!r}")
