import dataclasses

import numpy as np
import pytest

from wannier_ipp.config import preset
from wannier_ipp.lattice import build_lattice
from wannier_ipp.linalg import occupied_frame
from wannier_ipp.pipeline import System, build_hamiltonian

# criterion number -> list of (label, passed, detail)
ACCEPTANCE = {}


def record(criterion, label, passed, detail=""):
    ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        rows = ACCEPTANCE[c]
        ok = all(p for _, p, _ in rows)
        tr.write_line(f"criterion {c}: {'PASS' if ok else 'FAIL'}")
        for label, p, detail in rows:
            tr.write_line(f"    {'pass' if p else 'FAIL'}  {label}  {detail}")


class SystemCache:
    """Fermi frames are the expensive part; share them across tests."""

    def __init__(self):
        self._frames = {}

    @staticmethod
    def _key(cfg):
        return (cfg.model, repr(sorted(cfg.parameters.items())), repr(cfg.lattice),
                repr(cfg.disorder), cfg.n_occ)

    def system(self, cfg):
        cfg.validate()
        lattice = build_lattice(cfg.lattice)
        H = build_hamiltonian(cfg, lattice)
        key = self._key(cfg)
        if key not in self._frames:
            n_occ = cfg.n_occ if cfg.n_occ is not None else H.half_filling()
            self._frames[key] = occupied_frame(H, n_occ)
        return System(cfg, lattice, H, self._frames[key])

    def preset(self, name, seed=None, **overrides):
        cfg = preset(name)
        if seed is not None:
            cfg.disorder = dataclasses.replace(cfg.disorder, seed=seed)
        for k, v in overrides.items():
            setattr(cfg, k, v)
        return self.system(cfg)

    def drop(self, name, seed=None):
        cfg = preset(name)
        if seed is not None:
            cfg.disorder = dataclasses.replace(cfg.disorder, seed=seed)
        self._frames.pop(self._key(cfg), None)


@pytest.fixture(scope="session")
def systems():
    return SystemCache()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
