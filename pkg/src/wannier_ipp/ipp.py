"""Iterated projected position (IPP) algorithm.

Given an orthonormal frame ``B`` for the Fermi projection and a sequence of
observables ``O_1, ..., O_k``, the frame is split into clusters of the
spectrum of ``B^dagger O_1 B``; every cluster frame is split again with
``O_2`` and so on.  The eigenvectors of the last observable inside each leaf
frame are the output functions.

Cluster detection
-----------------
``fixed_count`` mode cuts the sorted keys at the ``count - 1`` widest gaps
(``count`` on a circle) and then requires every cut gap to be at least
``uniformity_ratio`` times the widest gap left inside a cluster.  When the
count is not given, the number of lattice lines along the observable's axis
bounds it, and the count whose weakest cut gap exceeds the widest remaining
gap by the largest factor is used.  ``relative`` mode cuts at every gap wider
than ``relative_factor`` times the median gap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import ConfigError, IPPError, NoUniformGaps, UndefinedCenter
from .lattice import Lattice
from .linalg import Frame, general_eig, hermitian_eig, loewdin, restricted_operator
from .models import layout_for
from .position import Observable, PositionSpec, base_coordinate, build_observable, sort_key

LEVEL_TOL = 1e-8
CENTER_FLOOR = 1e-6


@dataclass(frozen=True)
class GapPolicy:
    mode: str = "fixed_count"
    relative_factor: float = 10.0
    expected_cluster_count: Optional[int] = None   # first stage only; None: automatic
    min_gap_floor: float = 1e-6
    uniformity_ratio: float = 2.5

    def validate(self) -> None:
        if self.mode not in ("fixed_count", "relative"):
            raise ConfigError(f"unknown gap policy mode {self.mode!r}")
        if self.relative_factor <= 1:
            raise ConfigError("relative_factor must exceed 1")
        if self.uniformity_ratio < 1:
            raise ConfigError("uniformity_ratio must be at least 1")
        if self.expected_cluster_count is not None and self.expected_cluster_count < 1:
            raise ConfigError("expected_cluster_count must be positive")

    def to_dict(self) -> dict:
        return {"mode": self.mode, "relative_factor": self.relative_factor,
                "expected_cluster_count": self.expected_cluster_count,
                "min_gap_floor": self.min_gap_floor, "uniformity_ratio": self.uniformity_ratio}

    @classmethod
    def from_dict(cls, d: dict) -> "GapPolicy":
        return cls(**d)


@dataclass
class GapDecomposition:
    cluster_boundaries: List[int]   # start of each cluster in the (rotated) sorted order
    order: np.ndarray               # sorted position -> input index
    min_inter_gap: float
    max_intra_gap: float
    max_intra_spread: float
    circular: bool

    @property
    def n_clusters(self) -> int:
        return len(self.cluster_boundaries)

    def clusters(self) -> List[np.ndarray]:
        ends = list(self.cluster_boundaries[1:]) + [len(self.order)]
        return [self.order[a:b] for a, b in zip(self.cluster_boundaries, ends)]

    def sizes(self) -> List[int]:
        return [len(c) for c in self.clusters()]

    def summary(self) -> dict:
        return {"n_clusters": self.n_clusters, "sizes": self.sizes(),
                "min_inter_gap": self.min_inter_gap, "max_intra_gap": self.max_intra_gap,
                "max_intra_spread": self.max_intra_spread, "circular": self.circular}


def _gap_stats(s: np.ndarray, bounds: List[int], circular: bool, period: float):
    n = len(s)
    gaps = np.diff(s)
    cut = np.zeros(len(gaps), dtype=bool)
    cut[np.array(bounds[1:], dtype=np.int64) - 1] = True
    inter = list(gaps[cut])
    if circular and n:
        inter.append(s[0] + period - s[-1])
    ends = list(bounds[1:]) + [n]
    spread = max((s[b - 1] - s[a] for a, b in zip(bounds, ends)), default=0.0)
    return (float(min(inter)) if inter else np.inf,
            float(gaps[~cut].max()) if (~cut).any() else 0.0,
            float(spread))


def detect_uniform_gaps(keys, policy: GapPolicy, circular: bool = False,
                        count: Optional[int] = None, max_count: Optional[int] = None,
                        period: float = 2 * np.pi) -> GapDecomposition:
    """Partition sorted keys into clusters separated by uniform gaps.

    In ``fixed_count`` mode either ``count`` (exact) or ``max_count`` (upper
    bound) must be known; ``count`` defaults to ``policy.expected_cluster_count``.
    """
    policy.validate()
    keys = np.asarray(keys, dtype=float)
    n = len(keys)
    order = np.argsort(keys, kind="stable")
    s = keys[order]
    if circular and n > 1:
        # rotate so that the widest circular gap is the wrap-around gap
        gaps = np.diff(np.concatenate([s, [s[0] + period]]))
        g = int(np.argmax(gaps))
        if g != n - 1:
            rot = g + 1
            order = np.roll(order, -rot)
            s = np.concatenate([s[rot:], s[:rot] + period])
    if n == 0:
        return GapDecomposition([], order, np.inf, 0.0, 0.0, circular)
    gaps = np.diff(s)
    if policy.mode == "relative":
        return _relative(s, gaps, order, policy, circular, period)

    if count is None and max_count is None:
        count = policy.expected_cluster_count
    if count is None and max_count is None:
        raise ConfigError("fixed_count mode needs a cluster count")
    ranked = np.sort(gaps)[::-1]
    if count is not None:
        if count > n:
            raise NoUniformGaps(f"{count} clusters requested from {n} eigenvalues")
        n_cut = count - 1
    else:
        # the cut count with the most pronounced drop in the ranked gaps
        # (splitting everything into singletons is a last resort)
        n_cut, best, fallback = 0, policy.uniformity_ratio, 0
        for k in range(1, min(max_count, n)):
            if ranked[k - 1] <= policy.min_gap_floor:
                break
            rest = ranked[k] if k < len(ranked) else 0.0
            if rest == 0:
                fallback = k
                continue
            ratio = ranked[k - 1] / rest
            if ratio >= best and ratio > policy.uniformity_ratio:
                n_cut, best = k, ratio
        n_cut = n_cut or fallback
        if n_cut == 0 and max_count > 1 and n > 1:
            top = ranked[0] if len(ranked) else 0.0
            nxt = ranked[1] if len(ranked) > 1 else 0.0
            raise NoUniformGaps(
                f"no uniform gaps for up to {max_count} clusters: largest gap {top:.3e}, "
                f"next {nxt:.3e}")
    cut_idx = np.sort(np.argsort(gaps, kind="stable")[::-1][:n_cut])
    bounds = [0] + [int(i) + 1 for i in cut_idx]
    inter, intra, spread = _gap_stats(s, bounds, circular, period)
    dec = GapDecomposition(bounds, order, inter, intra, spread, circular)
    if n_cut == 0:
        return dec
    if inter <= policy.min_gap_floor:
        raise NoUniformGaps(f"smallest cluster gap {inter:.3e} below floor {policy.min_gap_floor:.0e}")
    if inter <= policy.uniformity_ratio * intra:
        raise NoUniformGaps(
            f"no uniform gaps for {len(bounds)} clusters: smallest cluster gap {inter:.3e} is not "
            f"{policy.uniformity_ratio:g} times the largest in-cluster gap {intra:.3e}")
    return dec


def _relative(s, gaps, order, policy, circular, period) -> GapDecomposition:
    n = len(s)
    if n == 1:
        return GapDecomposition([0], order, np.inf, 0.0, 0.0, circular)
    med = float(np.median(gaps))
    thresh = max(policy.relative_factor * med, policy.min_gap_floor)
    cut_idx = np.flatnonzero(gaps > thresh)
    bounds = [0] + [int(i) + 1 for i in cut_idx]
    inter, intra, spread = _gap_stats(s, bounds, circular, period)
    if len(bounds) == 1 and not (circular and inter > thresh):
        raise NoUniformGaps(f"no gap exceeds {policy.relative_factor:g} x median gap {med:.3e}")
    return GapDecomposition(bounds, order, inter, intra, spread, circular)


# ------------------------------------------------------------------ levels

def count_levels(values: np.ndarray, tol: float = LEVEL_TOL) -> int:
    """Number of distinct values up to ``tol``."""
    if len(values) == 0:
        return 0
    s = np.sort(values)
    return 1 + int(np.sum(np.diff(s) > tol))


def max_clusters(obs: Observable, lattice: Lattice) -> int:
    """Upper bound on the cluster count: lattice lines along the observable's axis."""
    if lattice.kind == "honeycomb":
        return lattice.L1 if obs.spec.axis == 1 else lattice.L2
    return count_levels(base_coordinate(lattice, obs.spec.axis))


# ------------------------------------------------------------------ splitting

@dataclass
class Split:
    frames: List[Frame]
    mean_keys: List[float]
    decomposition: GapDecomposition
    values: np.ndarray               # eigenvalues of the restricted operator
    keys: np.ndarray
    branch_cut: float
    loewdin_residual: float = 0.0    # max |F_i^dagger F_j| between sibling frames


def _restricted_spectrum(B: Frame, obs: Observable):
    M = restricted_operator(B, obs.operator())
    if obs.hermitian:
        M = 0.5 * (M + M.conj().T)
        eig = hermitian_eig(M)
    else:
        eig = general_eig(M)
    sk = sort_key(eig.values, obs.spec.sort_kind)
    return eig, sk


def split_frame(B: Frame, obs: Observable, policy: GapPolicy,
                count: Optional[int] = None, max_count: Optional[int] = None,
                path: tuple = ()) -> Split:
    """Split ``B`` into cluster frames of the spectrum of ``B^dagger O B``."""
    eig, sk = _restricted_spectrum(B, obs)
    circular = not obs.hermitian
    try:
        dec = detect_uniform_gaps(sk.keys, policy, circular=circular, count=count,
                                  max_count=max_count)
    except NoUniformGaps as exc:
        raise NoUniformGaps(str(exc), path) from None
    frames, means = [], []
    for j, idx in enumerate(dec.clusters()):
        V = B.columns @ eig.vectors[:, idx]
        if obs.hermitian:
            F = Frame(V, f"{obs.spec.label()}[{j}]")
        else:
            F = loewdin(V, f"{obs.spec.label()}[{j}]")
        frames.append(F)
        k = sk.keys[idx]
        if circular:
            means.append(float(np.mod(np.angle(np.mean(np.exp(1j * k))), 2 * np.pi)))
        else:
            means.append(float(np.mean(k)))
    resid = 0.0
    if not obs.hermitian and len(frames) > 1:
        allc = np.concatenate([F.columns for F in frames], axis=1)
        G = allc.conj().T @ allc
        resid = float(np.abs(G - np.eye(G.shape[0])).max())
    return Split(frames, means, dec, eig.values, sk.keys, sk.branch_cut, resid)


# ------------------------------------------------------------------ output

@dataclass
class WannierSet:
    functions: np.ndarray                 # N x r
    centers: np.ndarray                   # r x 2
    provenance: List[tuple]
    sequence: List[PositionSpec]
    values: np.ndarray                    # eigenvalue of the last observable per function
    metrics: dict = field(default_factory=dict)
    stages: List[dict] = field(default_factory=list)

    @property
    def n_functions(self) -> int:
        return self.functions.shape[1]

    def orthonormality_error(self) -> float:
        W = self.functions
        if W.shape[1] == 0:
            return 0.0
        return float(np.abs(W.conj().T @ W - np.eye(W.shape[1])).max())


def span_error(B: np.ndarray, W: np.ndarray) -> float:
    """``max |B B^dagger - W W^dagger|``."""
    if B.shape[1] == 0 and W.shape[1] == 0:
        return 0.0
    D = B @ B.conj().T
    D -= W @ W.conj().T
    return float(np.abs(D).max())


def fix_phases(W: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-modulus entry is real and positive."""
    if W.shape[1] == 0:
        return W
    k = np.argmax(np.abs(W), axis=0)
    piv = W[k, np.arange(W.shape[1])]
    return W * (np.abs(piv) / piv)[None, :]


def orbital_coordinates(lattice: Lattice, model: str) -> np.ndarray:
    """(N_orbitals, 2) coordinates used for centers."""
    site = layout_for(model, lattice).site
    return np.stack([base_coordinate(lattice, 1)[site], base_coordinate(lattice, 2)[site]], axis=1)


def center_of(w: np.ndarray, lattice: Lattice, model: str = "haldane",
              coords: Optional[np.ndarray] = None) -> tuple:
    """Resta center per axis when periodic, expectation of the coordinate otherwise."""
    coords = orbital_coordinates(lattice, model) if coords is None else coords
    p = np.abs(w) ** 2
    if not lattice.periodic:
        return float(p @ coords[:, 0]), float(p @ coords[:, 1])
    out = []
    for a, L in ((0, lattice.L1), (1, lattice.L2)):
        z = p @ np.exp(2j * np.pi * coords[:, a] / L)
        if abs(z) < CENTER_FLOOR:
            raise UndefinedCenter(f"|<e^(2 pi i x/L)>| = {abs(z):.2e} below {CENTER_FLOOR:.0e}")
        out.append(float(np.mod(L * np.angle(z) / (2 * np.pi), L)))
    return tuple(out)


def run_ipp(B: Frame, sequence: Sequence[PositionSpec], lattice: Lattice, model: str,
            policy: Optional[GapPolicy] = None,
            observables: Optional[Sequence[Observable]] = None) -> WannierSet:
    """Run the IPP iteration and return the localized functions."""
    if len(sequence) < 2:
        raise ConfigError("an IPP sequence needs at least two observables")
    policy = policy or GapPolicy()
    policy.validate()
    obs = list(observables) if observables is not None else \
        [build_observable(s, lattice, model) for s in sequence]
    stages: List[dict] = []
    leaves = []   # (frame, path)

    def recurse(F: Frame, depth: int, path: tuple):
        if depth == len(obs) - 1:
            leaves.append((F, path))
            return
        O = obs[depth]
        if F.rank == 0:
            return
        count = max_count = None
        if policy.mode == "fixed_count":
            if depth == 0 and policy.expected_cluster_count is not None:
                count = policy.expected_cluster_count
            else:
                max_count = max_clusters(O, lattice)
        sp_ = split_frame(F, O, policy, count=count, max_count=max_count, path=path)
        info = dict(sp_.decomposition.summary(), depth=depth, path=list(path),
                    loewdin_residual=sp_.loewdin_residual)
        stages.append(info)
        for j, child in enumerate(sp_.frames):
            recurse(child, depth + 1, path + (j,))

    recurse(B, 0, ())

    last = obs[-1]
    cols, prov, vals = [], [], []
    for F, path in leaves:
        if F.rank == 0:
            continue
        eig, sk = _restricted_spectrum(F, last)
        for k in sk.order:
            cols.append(F.columns @ eig.vectors[:, k])
            prov.append(path + (int(k),))
            vals.append(eig.values[k])
    N = B.n
    W = np.stack(cols, axis=1) if cols else np.zeros((N, 0), dtype=complex)
    metrics = {}
    if any(not o.hermitian for o in obs):
        metrics["pre_loewdin_orthonormality_error"] = \
            float(np.abs(W.conj().T @ W - np.eye(W.shape[1])).max()) if W.shape[1] else 0.0
        W = loewdin(W).columns
    W = fix_phases(W)
    coords = orbital_coordinates(lattice, model)
    centers = np.array([center_of(W[:, i], lattice, model, coords) for i in range(W.shape[1])],
                       dtype=float).reshape(-1, 2)
    ws = WannierSet(W, centers, prov, list(sequence), np.asarray(vals), metrics, stages)
    ws.metrics["orthonormality_error"] = ws.orthonormality_error()
    ws.metrics["span_error"] = span_error(B.columns, W)
    ws.metrics["n_functions"] = ws.n_functions
    return ws


def run_ipp_safe(*args, **kwargs) -> WannierSet:
    """``run_ipp`` that re-raises non-package errors as package errors."""
    try:
        return run_ipp(*args, **kwargs)
    except IPPError:
        raise
    except np.linalg.LinAlgError as exc:
        raise IPPError(str(exc)) from exc
