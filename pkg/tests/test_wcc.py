import numpy as np
import pytest

from oracles import plaquette_chern
from wannier_ipp.config import HALDANE_TOPOLOGICAL, HALDANE_TRIVIAL, KM_EVEN, KM_ODD
from wannier_ipp.errors import ConfigError
from wannier_ipp.models import DisorderSpec
from wannier_ipp.wcc import bloch_family, chern_from_winding, kappa_grid, wcc_sweep, z2_from_wcc


@pytest.mark.parametrize("params,want", [(HALDANE_TRIVIAL, 0), (HALDANE_TOPOLOGICAL, 1)])
def test_plaquette_oracle(params, want):
    c = plaquette_chern(params)
    assert abs(c - round(c)) < 1e-9 and abs(round(c)) == want


@pytest.mark.parametrize("params", [HALDANE_TRIVIAL, HALDANE_TOPOLOGICAL,
                                    {"v": 1.0, "t": 1.0, "tprime": 0.4},
                                    {"v": 3.0, "t": 1.0, "tprime": -0.9}])
def test_chern_from_winding_matches_plaquette_flux(params):
    sweep = wcc_sweep(bloch_family("haldane", params, L1=10, n_k=128))
    c = chern_from_winding(sweep).chern
    assert abs(c) == abs(round(plaquette_chern(params)))


def test_flat_bands_have_constant_branches():
    sweep = wcc_sweep(bloch_family("haldane", {"v": 2.0, "t": 0.0, "tprime": 0.0}, L1=6, n_k=32))
    assert np.allclose(sweep.centers, sweep.centers[0][None, :], atol=1e-12)
    assert np.allclose(sweep.centers[0], np.arange(6), atol=1e-12)
    assert chern_from_winding(sweep).chern == 0


@pytest.mark.parametrize("params,want", [(KM_EVEN, 0), (KM_ODD, 1),
                                         ({**KM_ODD, "lambda_R": 0.0}, 1)])
def test_z2_index(params, want):
    sweep = wcc_sweep(bloch_family("kane_mele", params, L1=10, n_k=128))
    assert z2_from_wcc(sweep).z2 == want


def test_breaker_lifts_kramers_degeneracy():
    fam = bloch_family("kane_mele", KM_ODD, L1=10, n_k=128)
    plain = wcc_sweep(fam)
    broken = wcc_sweep(fam, trb=True)
    assert plain.min_branch_gap < 1e-3 * 10
    assert broken.min_branch_gap > 1e-3 * 10


@pytest.mark.parametrize("model,params", [("haldane", HALDANE_TOPOLOGICAL), ("kane_mele", KM_ODD)])
def test_stable_under_grid_doubling(model, params):
    out = []
    for n_k in (128, 256):
        sweep = wcc_sweep(bloch_family(model, params, L1=10, n_k=n_k))
        out.append(z2_from_wcc(sweep).z2 if model == "kane_mele"
                   else chern_from_winding(sweep).chern)
    assert out[0] == out[1]


def test_grid_contains_zero_and_minus_pi():
    k = kappa_grid(32)
    assert k[0] == -np.pi and np.any(np.abs(k) < 1e-15) and k[-1] < np.pi


@pytest.mark.parametrize("kw", [dict(n_k=31), dict(n_k=16), dict(L1=1),
                                dict(disorder=DisorderSpec(0.5, 1))])
def test_invalid_families(kw):
    with pytest.raises(ConfigError):
        bloch_family("haldane", HALDANE_TRIVIAL, **kw)


def test_quasicrystal_has_no_family():
    with pytest.raises(ConfigError):
        bloch_family("pxipy", {"mu": 3.0, "t": 0.5, "Delta": 1.0})


def test_rows_cover_the_grid():
    sweep = wcc_sweep(bloch_family("haldane", HALDANE_TRIVIAL, L1=4, n_k=32))
    rows = list(sweep.rows())
    assert len(rows) == 32 * 4
    assert all(0 <= x < 4 for _, _, x in rows)
