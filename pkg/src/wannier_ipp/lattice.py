"""Finite honeycomb lattices and Ammann-Beenker patches.

Honeycomb conventions
---------------------
Lattice vectors are ``a1 = (1, 0)`` and ``a2 = (1/2, sqrt(3)/2)``.  Sublattice
A sits at the cell origin and B at ``(a1 + a2) / 3``.  Site ``(m, n, s)`` has
index ``2 * (m * L2 + n) + s`` with ``s = 0`` for A and ``s = 1`` for B.

Bonds are directed and stored once per direction.  A next-nearest-neighbour
hop ``j -> k`` made of nearest-neighbour steps ``d1`` then ``d2`` carries
``nu = sign((d1 x d2)_z)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from . import _ammann
from .errors import ConfigError

A1 = np.array([1.0, 0.0])
A2 = np.array([0.5, np.sqrt(3.0) / 2.0])
B_OFFSET = (A1 + A2) / 3.0

NN, NNN = 0, 1
KIND_NAMES = {NN: "NN", NNN: "NNN"}

DEDUP_TOL = 1e-9


@dataclass(frozen=True)
class LatticeSpec:
    kind: str = "honeycomb"
    L1: int = 0
    L2: int = 0
    inflation_steps: int = 0
    boundary: str = "dirichlet"

    def validate(self) -> None:
        if self.kind not in ("honeycomb", "ammann_beenker"):
            raise ConfigError(f"unknown lattice kind {self.kind!r}")
        if self.boundary not in ("dirichlet", "periodic"):
            raise ConfigError(f"unknown boundary {self.boundary!r}")
        if self.kind == "honeycomb":
            if self.L1 < 2 or self.L2 < 2:
                raise ConfigError("honeycomb needs L1, L2 >= 2")
        else:
            if self.boundary != "dirichlet":
                raise ConfigError("Ammann-Beenker patches are always Dirichlet")
            if self.inflation_steps < 1:
                raise ConfigError("inflation_steps must be >= 1")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "L1": self.L1, "L2": self.L2,
                "inflation_steps": self.inflation_steps, "boundary": self.boundary}

    @classmethod
    def from_dict(cls, d: dict) -> "LatticeSpec":
        return cls(**d)


@dataclass(frozen=True)
class Site:
    index: int
    cell: Optional[tuple]
    sublattice: Optional[str]
    position: tuple


@dataclass(frozen=True)
class Bond:
    src: int
    dst: int
    kind: str
    nu: int
    angle: float
    wrap: tuple


@dataclass
class Lattice:
    spec: LatticeSpec
    positions: np.ndarray          # (N, 2)
    cells: Optional[np.ndarray]    # (N, 2) ints, honeycomb only
    sublattice: Optional[np.ndarray]  # (N,) 0 for A, 1 for B
    bond_src: np.ndarray
    bond_dst: np.ndarray
    bond_kind: np.ndarray
    bond_nu: np.ndarray
    bond_angle: np.ndarray
    bond_wrap: np.ndarray          # (B, 2)
    bond_vec: np.ndarray           # (B, 2) unwrapped displacement
    L1: int = 0
    L2: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return self.spec.kind

    @property
    def periodic(self) -> bool:
        return self.spec.boundary == "periodic"

    @property
    def n_sites(self) -> int:
        return len(self.positions)

    @property
    def n_bonds(self) -> int:
        return len(self.bond_src)

    def site_index(self, m: int, n: int, s: int) -> int:
        return 2 * (m * self.L2 + n) + s

    def sites(self) -> Iterator[Site]:
        for i in range(self.n_sites):
            cell = None if self.cells is None else (int(self.cells[i, 0]), int(self.cells[i, 1]))
            sub = None if self.sublattice is None else "AB"[self.sublattice[i]]
            yield Site(i, cell, sub, (float(self.positions[i, 0]), float(self.positions[i, 1])))

    def bonds(self, kind: Optional[str] = None) -> Iterator[Bond]:
        for b in range(self.n_bonds):
            name = KIND_NAMES[int(self.bond_kind[b])]
            if kind is not None and name != kind:
                continue
            yield Bond(int(self.bond_src[b]), int(self.bond_dst[b]), name, int(self.bond_nu[b]),
                       float(self.bond_angle[b]),
                       (int(self.bond_wrap[b, 0]), int(self.bond_wrap[b, 1])))

    def select(self, kind: int) -> np.ndarray:
        return np.flatnonzero(self.bond_kind == kind)

    def to_json(self) -> str:
        sites = []
        for s in self.sites():
            m, n = s.cell if s.cell is not None else (None, None)
            sites.append({"index": s.index, "m": m, "n": n, "sublattice": s.sublattice,
                          "x": s.position[0], "y": s.position[1]})
        bonds = [{"from": b.src, "to": b.dst, "kind": b.kind, "nu": b.nu, "angle": b.angle,
                  "wrap": list(b.wrap)} for b in self.bonds()]
        return json.dumps({"spec": self.spec.to_dict(), "sites": sites, "bonds": bonds})


def build_lattice(spec: LatticeSpec) -> Lattice:
    spec.validate()
    if spec.kind == "honeycomb":
        return build_honeycomb(spec)
    return build_ammann_beenker(spec)


# ---------------------------------------------------------------- honeycomb

def _nn_vectors(s: int) -> list:
    """Nearest-neighbour steps from sublattice ``s`` as (dm, dn, displacement)."""
    steps = [(0, 0), (-1, 0), (0, -1)]
    sign = 1 if s == 0 else -1
    return [(sign * dm, sign * dn, sign * (B_OFFSET + dm * A1 + dn * A2)) for dm, dn in steps]


def _nnn_table(s: int) -> list:
    """Next-nearest-neighbour hops from sublattice ``s`` as (dm, dn, displacement, nu)."""
    out = []
    for dm, dn in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)]:
        d = dm * A1 + dn * A2
        nu = None
        for _, _, d1 in _nn_vectors(s):
            for _, _, d2 in _nn_vectors(1 - s):
                if np.allclose(d1 + d2, d):
                    nu = int(np.sign(d1[0] * d2[1] - d1[1] * d2[0]))
        out.append((dm, dn, d, nu))
    return out


def build_honeycomb(spec: LatticeSpec) -> Lattice:
    if spec.kind != "honeycomb":
        raise ConfigError("build_honeycomb needs kind='honeycomb'")
    spec.validate()
    return _honeycomb(spec, spec.L1, spec.L2, spec.boundary == "periodic")


def _honeycomb(spec: LatticeSpec, L1: int, L2: int, periodic: bool) -> Lattice:
    """Honeycomb builder without the size check (a width-one ribbon is legal here)."""
    n_sites = 2 * L1 * L2
    m = np.repeat(np.arange(L1), 2 * L2)
    n = np.tile(np.repeat(np.arange(L2), 2), L1)
    s = np.tile([0, 1], L1 * L2)
    pos = m[:, None] * A1 + n[:, None] * A2 + s[:, None] * B_OFFSET

    src, dst, kind, nu, wrap, vec = [], [], [], [], [], []
    tables = {sub: ([(dm, dn, d, 0) for dm, dn, d in _nn_vectors(sub)], _nnn_table(sub)) for sub in (0, 1)}
    for i in range(n_sites):
        mi, ni, si = int(m[i]), int(n[i]), int(s[i])
        for bkind, table in ((NN, tables[si][0]), (NNN, tables[si][1])):
            tsub = 1 - si if bkind == NN else si
            for dm, dn, d, bnu in table:
                # the NN displacement from A to B(m + dm, n + dn) is offset + dm a1 + dn a2
                mt, nt = mi + dm, ni + dn
                w1, w2 = mt // L1, nt // L2
                if not periodic and (w1 or w2):
                    continue
                j = 2 * ((mt % L1) * L2 + nt % L2) + tsub
                src.append(i)
                dst.append(j)
                kind.append(bkind)
                nu.append(bnu)
                wrap.append((w1, w2))
                vec.append(d)
    vec = np.array(vec, dtype=float).reshape(-1, 2)
    angle = np.mod(np.arctan2(vec[:, 1], vec[:, 0]), 2 * np.pi)
    return Lattice(spec=spec, positions=pos, cells=np.stack([m, n], axis=1), sublattice=s,
                   bond_src=np.array(src, dtype=np.int64), bond_dst=np.array(dst, dtype=np.int64),
                   bond_kind=np.array(kind, dtype=np.int8), bond_nu=np.array(nu, dtype=np.int8),
                   bond_angle=angle, bond_wrap=np.array(wrap, dtype=np.int64).reshape(-1, 2),
                   bond_vec=vec, L1=L1, L2=L2)


def ribbon(L1: int) -> Lattice:
    """One-cell-tall honeycomb strip, periodic along a1, with wrap counts along a2 kept.

    Bonds leaving the strip through the a2 boundary are folded back and carry
    their wrap count, so a Bloch phase can be attached to them.
    """
    spec = LatticeSpec("honeycomb", L1, 1, 0, "periodic")
    return _honeycomb(spec, L1, 1, True)


def translation_map(lattice: Lattice, v) -> np.ndarray:
    """Permutation ``perm`` with ``perm[i]`` the site reached from site ``i`` by shifting ``v`` cells."""
    if lattice.kind != "honeycomb" or not lattice.periodic:
        raise ConfigError("translation_map needs a periodic honeycomb lattice")
    dm, dn = int(v[0]), int(v[1])
    m = (lattice.cells[:, 0] + dm) % lattice.L1
    n = (lattice.cells[:, 1] + dn) % lattice.L2
    return 2 * (m * lattice.L2 + n) + lattice.sublattice


# ----------------------------------------------------------- Ammann-Beenker

def ammann_beenker_tiles(steps: int) -> list:
    tiles = _ammann.seed()
    for _ in range(steps):
        tiles = _ammann.inflate(tiles)
    return tiles


def build_ammann_beenker(spec: LatticeSpec) -> Lattice:
    if spec.kind != "ammann_beenker":
        raise ConfigError("build_ammann_beenker needs kind='ammann_beenker'")
    spec.validate()
    tiles = ammann_beenker_tiles(spec.inflation_steps)
    # the inflated star covers the disk of radius scale; the inscribed square is kept
    half = (1.0 + np.sqrt(2.0)) ** spec.inflation_steps / np.sqrt(2.0)

    points = {}
    pairs = set()
    for t in tiles:
        for p, q in _ammann.edges(t):
            kp, kq = tuple(int(x) for x in p), tuple(int(x) for x in q)
            pairs.add((kp, kq) if kp < kq else (kq, kp))
            points[kp] = None
            points[kq] = None
    keys = list(points)
    xy = np.array(keys, dtype=float) @ _ammann.STAR
    inside = np.all(np.abs(xy) <= half + DEDUP_TOL, axis=1)

    # deduplicate on Cartesian position; integer keys are already unique
    order = np.lexsort((np.round(xy[:, 1] / DEDUP_TOL), np.round(xy[:, 0] / DEDUP_TOL)))
    index = {}
    kept = []
    for i in order:
        if inside[i]:
            index[keys[i]] = len(kept)
            kept.append(i)
    src, dst = [], []
    for p, q in sorted(pairs):
        if p in index and q in index:
            src += [index[p], index[q]]
            dst += [index[q], index[p]]
    # drop vertices left without any edge by the crop
    used = np.zeros(len(kept), dtype=bool)
    used[src] = True
    remap = -np.ones(len(kept), dtype=np.int64)
    remap[used] = np.arange(int(used.sum()))
    pos = xy[kept][used]
    pos = np.where(np.abs(pos) < DEDUP_TOL, 0.0, pos)
    src = remap[np.array(src, dtype=np.int64)]
    dst = remap[np.array(dst, dtype=np.int64)]
    vec = pos[dst] - pos[src]
    angle = np.mod(np.arctan2(vec[:, 1], vec[:, 0]), 2 * np.pi)
    # snap to exact multiples of pi/4
    angle = np.mod(np.round(angle / (np.pi / 4)), 8) * (np.pi / 4)
    nb = len(src)
    return Lattice(spec=spec, positions=pos, cells=None, sublattice=None,
                   bond_src=src, bond_dst=dst, bond_kind=np.zeros(nb, dtype=np.int8),
                   bond_nu=np.zeros(nb, dtype=np.int8), bond_angle=angle,
                   bond_wrap=np.zeros((nb, 2), dtype=np.int64), bond_vec=vec,
                   meta={"crop_half_width": half, "tiles": len(tiles)})
