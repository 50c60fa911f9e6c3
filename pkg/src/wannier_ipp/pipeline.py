"""Glue from a run configuration to lattices, Hamiltonians and Fermi frames."""

from __future__ import annotations

from dataclasses import dataclass

from .config import RunConfig
from .lattice import Lattice, build_lattice
from .linalg import Frame, occupied_frame
from .models import Hamiltonian, apply_onsite_disorder, assemble
from .ipp import WannierSet, run_ipp


@dataclass
class System:
    config: RunConfig
    lattice: Lattice
    hamiltonian: Hamiltonian
    frame: Frame

    @property
    def model(self) -> str:
        return self.config.model


def build_hamiltonian(cfg: RunConfig, lattice: Lattice = None) -> Hamiltonian:
    lattice = lattice or build_lattice(cfg.lattice)
    H = assemble(cfg.model, lattice, cfg.parameters)
    if cfg.disorder is not None:
        H = apply_onsite_disorder(H, cfg.disorder)
    return H


def build_system(cfg: RunConfig) -> System:
    cfg.validate()
    lattice = build_lattice(cfg.lattice)
    H = build_hamiltonian(cfg, lattice)
    n_occ = cfg.n_occ if cfg.n_occ is not None else H.half_filling()
    return System(cfg, lattice, H, occupied_frame(H, n_occ))


def run(system: System) -> WannierSet:
    cfg = system.config
    return run_ipp(system.frame, cfg.positions, system.lattice, cfg.model, cfg.gap_policy)
