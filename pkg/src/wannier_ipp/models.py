"""Dense tight-binding Hamiltonians: Haldane, Kane-Mele and p_x + i p_y.

Orbital layouts
---------------
* Haldane: one orbital per site, orbital index = site index.
* Kane-Mele: per cell ``A-up, B-up, A-down, B-down``; orbital
  ``4 * cell + 2 * spin + sublattice``.
* p_x + i p_y: per vertex (particle, hole); orbital ``2 * site + ph``.

Every directed bond contributes its own matrix element; Hermiticity follows
because the reversed bond is also stored (``nu`` flipped, angle shifted by pi).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError
from .lattice import NN, NNN, Lattice

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# documented generator: numpy PCG64 uniforms fed through Box-Muller
PRNG_NAME = "numpy.random.PCG64 + Box-Muller"


@dataclass(frozen=True)
class OrbitalLayout:
    model: str
    site: np.ndarray       # site of each orbital
    component: np.ndarray  # spin (Kane-Mele), particle/hole (p_x+ip_y) or 0

    @property
    def n_orbitals(self) -> int:
        return len(self.site)

    @property
    def orbitals_per_site(self) -> int:
        return 1 if self.model == "haldane" else 2


def layout_for(model: str, lattice: Lattice) -> OrbitalLayout:
    ns = lattice.n_sites
    if model == "haldane":
        return OrbitalLayout(model, np.arange(ns), np.zeros(ns, dtype=np.int64))
    if model == "kane_mele":
        cell = np.arange(ns) // 2
        sub = np.arange(ns) % 2
        site = np.empty(2 * ns, dtype=np.int64)
        comp = np.empty(2 * ns, dtype=np.int64)
        for spin in (0, 1):
            idx = 4 * cell + 2 * spin + sub
            site[idx] = np.arange(ns)
            comp[idx] = spin
        return OrbitalLayout(model, site, comp)
    if model == "pxipy":
        return OrbitalLayout(model, np.repeat(np.arange(ns), 2), np.tile([0, 1], ns))
    raise ConfigError(f"unknown model {model!r}")


@dataclass(frozen=True)
class DisorderSpec:
    variance: float = 0.0
    seed: int = 0

    def to_dict(self) -> dict:
        return {"variance": self.variance, "seed": self.seed}


@dataclass
class Hamiltonian:
    matrix: np.ndarray
    lattice: Lattice
    layout: OrbitalLayout
    model: str
    params: dict
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def half_filling(self) -> int:
        """Default insulating filling of the model."""
        ns = self.lattice.n_sites
        if self.model == "haldane":
            return ns // 2
        if self.model == "kane_mele":
            return ns
        return int(np.sum(np.linalg.eigvalsh(self.matrix) < 0))


def _require_honeycomb(lattice: Lattice) -> None:
    if lattice.kind != "honeycomb":
        raise ConfigError("model needs a honeycomb lattice")


def nnn_amplitude(tprime: complex, nu: np.ndarray) -> np.ndarray:
    """Matrix element of the ``i t' nu`` hop, Hermitian for complex ``t'``.

    For real ``t'`` this is exactly ``i t' nu``; for complex ``t'`` the
    ``nu = -1`` element is the conjugate of the ``nu = +1`` one.
    """
    a = 1j * complex(tprime)
    return np.where(nu > 0, a, np.conj(a))


def bond_phases(lattice: Lattice, kappa: Optional[tuple] = None) -> np.ndarray:
    if kappa is None:
        return np.ones(lattice.n_bonds, dtype=complex)
    k1, k2 = kappa
    return np.exp(1j * (k1 * lattice.bond_wrap[:, 0] + k2 * lattice.bond_wrap[:, 1]))


def assemble_haldane(lattice: Lattice, v: float, t: float, tprime: complex,
                     kappa: Optional[tuple] = None) -> Hamiltonian:
    _require_honeycomb(lattice)
    n = lattice.n_sites
    H = np.zeros((n, n), dtype=complex)
    H[np.diag_indices(n)] = v * (1 - 2 * lattice.sublattice)
    ph = bond_phases(lattice, kappa)
    nn, nnn = lattice.select(NN), lattice.select(NNN)
    np.add.at(H, (lattice.bond_src[nn], lattice.bond_dst[nn]), t * ph[nn])
    amp = nnn_amplitude(tprime, lattice.bond_nu[nnn]) * ph[nnn]
    np.add.at(H, (lattice.bond_src[nnn], lattice.bond_dst[nnn]), amp)
    return Hamiltonian(H, lattice, layout_for("haldane", lattice), "haldane",
                       {"v": v, "t": t, "tprime": complex(tprime)})


def assemble_kane_mele(lattice: Lattice, v: float, t: float, tprime: float, lambda_R: float,
                       kappa: Optional[tuple] = None) -> Hamiltonian:
    _require_honeycomb(lattice)
    lay = layout_for("kane_mele", lattice)
    n = lay.n_orbitals
    sub = lattice.sublattice

    def orb(site, spin):
        return 4 * (site // 2) + 2 * spin + (site % 2)

    H = np.zeros((n, n), dtype=complex)
    sites = np.arange(lattice.n_sites)
    for spin in (0, 1):
        H[orb(sites, spin), orb(sites, spin)] = v * (1 - 2 * sub)
    ph = bond_phases(lattice, kappa)
    nn, nnn = lattice.select(NN), lattice.select(NNN)
    s, d = lattice.bond_src, lattice.bond_dst
    for spin, sz in ((0, 1.0), (1, -1.0)):
        np.add.at(H, (orb(s[nn], spin), orb(d[nn], spin)), t * ph[nn])
        amp = sz * nnn_amplitude(tprime, lattice.bond_nu[nnn]) * ph[nnn]
        np.add.at(H, (orb(s[nnn], spin), orb(d[nnn], spin)), amp)
    # Rashba: i lambda (s x d)_z = i lambda (s_x d_y - s_y d_x), unit bond vector
    vec = lattice.bond_vec[nn]
    dhat = vec / np.linalg.norm(vec, axis=1)[:, None]
    for b, (dx, dy) in zip(nn, dhat):
        block = 1j * lambda_R * (SIGMA_X * dy - SIGMA_Y * dx) * ph[b]
        for s1 in (0, 1):
            for s2 in (0, 1):
                if s1 != s2:
                    H[orb(s[b], s1), orb(d[b], s2)] += block[s1, s2]
    return Hamiltonian(H, lattice, lay, "kane_mele",
                       {"v": v, "t": t, "tprime": tprime, "lambda_R": lambda_R})


def assemble_pxipy(lattice: Lattice, mu: float, t: float, Delta: float) -> Hamiltonian:
    if lattice.kind != "ammann_beenker":
        raise ConfigError("p_x + i p_y model needs an Ammann-Beenker lattice")
    lay = layout_for("pxipy", lattice)
    ns = lattice.n_sites
    H = np.zeros((2 * ns, 2 * ns), dtype=complex)
    Hr = H.reshape(ns, 2, ns, 2)
    onsite = -mu * SIGMA_Z
    for j in range(ns):
        Hr[j, :, j, :] += onsite
    ca, sa = np.cos(lattice.bond_angle), np.sin(lattice.bond_angle)
    blocks = (-t * SIGMA_Z[None] - 0.5j * Delta * (ca[:, None, None] * SIGMA_X[None]
                                                    + sa[:, None, None] * SIGMA_Y[None]))
    for b in range(lattice.n_bonds):
        Hr[lattice.bond_src[b], :, lattice.bond_dst[b], :] += blocks[b]
    return Hamiltonian(H, lattice, lay, "pxipy", {"mu": mu, "t": t, "Delta": Delta})


def assemble(model: str, lattice: Lattice, params: dict, kappa=None) -> Hamiltonian:
    if model == "haldane":
        return assemble_haldane(lattice, params["v"], params["t"], params["tprime"], kappa=kappa)
    if model == "kane_mele":
        return assemble_kane_mele(lattice, params["v"], params["t"], params["tprime"],
                                  params["lambda_R"], kappa=kappa)
    if model == "pxipy":
        if kappa is not None:
            raise ConfigError("p_x + i p_y has no Bloch family")
        return assemble_pxipy(lattice, params["mu"], params["t"], params["Delta"])
    raise ConfigError(f"unknown model {model!r}")


def gaussian_draws(n: int, variance: float, seed: int) -> np.ndarray:
    """``n`` draws from N(0, variance): PCG64 uniforms through Box-Muller."""
    rng = np.random.Generator(np.random.PCG64(seed))
    m = (n + 1) // 2
    u1 = rng.random(m)
    u2 = rng.random(m)
    r = np.sqrt(-2.0 * np.log1p(-u1))
    z = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])[:n]
    return np.sqrt(variance) * z


def apply_onsite_disorder(H: Hamiltonian, spec: DisorderSpec) -> Hamiltonian:
    if spec.variance < 0:
        raise ConfigError("disorder variance must be >= 0")
    meta = dict(H.meta, disorder_seed=int(spec.seed), disorder_variance=float(spec.variance),
                prng=PRNG_NAME)
    if spec.variance == 0:
        return Hamiltonian(H.matrix.copy(), H.lattice, H.layout, H.model, H.params, meta)
    M = H.matrix.copy()
    M[np.diag_indices(H.n)] += gaussian_draws(H.n, spec.variance, spec.seed)
    return Hamiltonian(M, H.lattice, H.layout, H.model, H.params, meta)


def theta(psi: np.ndarray, layout: OrbitalLayout) -> np.ndarray:
    """Fermionic time reversal on Kane-Mele vectors: (up, down) -> (-conj down, conj up)."""
    if layout.model != "kane_mele":
        raise ConfigError("time reversal with square -1 needs the Kane-Mele layout")
    shape = psi.shape
    v = psi.reshape((-1, 2, 2) + shape[1:])
    out = np.empty_like(v)
    out[:, 0] = -np.conj(v[:, 1])
    out[:, 1] = np.conj(v[:, 0])
    return out.reshape(shape)


def theta_matrix(layout: OrbitalLayout) -> np.ndarray:
    """Unitary part ``U`` of ``Theta = U K`` for the Kane-Mele layout."""
    n = layout.n_orbitals
    U = np.zeros((n, n))
    for c in range(n // 4):
        for s in (0, 1):
            U[4 * c + s, 4 * c + 2 + s] = -1.0
            U[4 * c + 2 + s, 4 * c + s] = 1.0
    return U
