import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wannier_ipp.diagnostics import (bosonic_metric, cell_distances, cell_norm_matrix,
                                     decay_fit, degenerate_groups, fermionic_metric,
                                     localization_report, mv_decomposition, orbital_translation,
                                     position_diagonals, site_norms, translation_metric)
from wannier_ipp.errors import ConfigError, TooFewSamples
from wannier_ipp.lattice import LatticeSpec, build_lattice
from wannier_ipp.models import layout_for, theta


def honeycomb(L1, L2, boundary):
    return build_lattice(LatticeSpec("honeycomb", L1, L2, 0, boundary))


def frame(rng, n, r):
    return np.linalg.qr(rng.normal(size=(n, r)) + 1j * rng.normal(size=(n, r)))[0]


# ------------------------------------------------------------ decay fit

@pytest.mark.parametrize("boundary", ["dirichlet", "periodic"])
@pytest.mark.parametrize("rate", [0.5, 1.0, 2.0])
def test_exact_exponential_is_recovered(boundary, rate):
    lat = honeycomb(16, 16, boundary)
    d = cell_distances(lat, (7.0, 8.0))
    got, r2 = decay_fit(np.exp(-rate * d), d)
    assert abs(got - rate) < 1e-6 * rate and r2 > 0.999999


def test_flat_state_has_no_decay():
    lat = honeycomb(12, 12, "periodic")
    d = cell_distances(lat, (3.0, 3.0))
    rate, _ = decay_fit(np.full(d.shape, 0.1), d)
    assert abs(rate) < 1e-12


def test_periodic_distances_use_the_shortest_image():
    lat = honeycomb(10, 10, "periodic")
    d = cell_distances(lat, (0.0, 0.0))
    assert d[9, 0] == pytest.approx(1.0)
    assert d[0, 9] == pytest.approx(1.0)
    # a1 - a2 has length one as well
    assert d[1, 9] == pytest.approx(1.0)
    assert d.max() < 10


def test_open_distances_are_euclidean():
    lat = honeycomb(6, 6, "dirichlet")
    d = cell_distances(lat, (0.0, 0.0))
    assert d[2, 2] == pytest.approx(np.hypot(3.0, np.sqrt(3)))


def test_too_few_shells():
    with pytest.raises(TooFewSamples):
        decay_fit(np.array([1.0, 0.5, 0.1, 0.0]), np.array([1.0, 2.0, 3.0, 4.0]))


def test_localization_report_on_a_peaked_state():
    lat = honeycomb(12, 12, "periodic")
    w = np.zeros(lat.n_sites)
    w[lat.site_index(3, 4, 0)] = 0.8
    w[lat.site_index(3, 4, 1)] = 0.6
    # an exponential tail so the fit has something to work with
    d = cell_distances(lat, (3.0, 4.0))
    for m in range(12):
        for n in range(12):
            if (m, n) != (3, 4):
                w[lat.site_index(m, n, 0)] = np.exp(-2 * d[m, n])
    rep = localization_report(w, lat, "haldane", (3.0, 4.0))
    assert rep.decay_rate == pytest.approx(2.0, rel=1e-9)
    assert rep.cell_norms[3, 4] == pytest.approx(1.0)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["haldane", "kane_mele"]), st.integers(0, 2**31))
def test_cell_norms_partition_the_weight(model, seed):
    lat = honeycomb(4, 5, "periodic")
    n = layout_for(model, lat).n_orbitals
    w = np.random.default_rng(seed).normal(size=n) + 0j
    c = cell_norm_matrix(w, lat, model)
    assert np.isclose(np.sum(c ** 2), np.sum(np.abs(w) ** 2))
    assert np.isclose(np.sum(site_norms(w, lat, model) ** 2), np.sum(np.abs(w) ** 2))


def test_cell_norms_need_cells():
    ab = build_lattice(LatticeSpec("ammann_beenker", 0, 0, 1))
    with pytest.raises(ConfigError):
        cell_norm_matrix(np.zeros(2 * ab.n_sites), ab, "pxipy")


# ------------------------------------------------------------ spreads

def test_mv_identity_and_invariance(rng):
    lat = honeycomb(5, 4, "dirichlet")
    X, Y = position_diagonals(lat, "haldane")
    B = frame(rng, lat.n_sites, 12)
    W = B @ frame(rng, 12, 12)
    rep = mv_decomposition(W, B, X, Y)
    assert rep.identity_residual < 1e-10
    # direct variances
    p = np.abs(W) ** 2
    var = sum((D ** 2) @ p - (D @ p) ** 2 for D in (X, Y))
    assert np.allclose(rep.total_variance, var)
    P = B @ B.conj().T
    Q = np.eye(lat.n_sites) - P
    trace = sum(np.trace(P @ np.diag(D) @ Q @ np.diag(D) @ P).real for D in (X, Y))
    assert rep.invariant_total == pytest.approx(trace)
    U = frame(rng, 12, 12)
    again = mv_decomposition(W @ U, B, X, Y)
    assert abs(again.invariant_total - rep.invariant_total) < 1e-8
    assert abs(again.total_variance.sum() - rep.total_variance.sum()) > 1e-6


def test_mv_rejects_functions_outside_the_range(rng):
    B = frame(rng, 10, 3)
    with pytest.raises(ConfigError):
        mv_decomposition(rng.normal(size=(10, 1)), B, np.arange(10.0), np.arange(10.0))


# ------------------------------------------------------------ symmetry

def test_bosonic_metric(rng):
    real = rng.normal(size=(6, 3))
    assert bosonic_metric(real * np.exp(0.7j)).max() < 1e-14
    assert bosonic_metric(frame(rng, 6, 3)).min() > 1e-3


def test_fermionic_closure_of_kramers_pairs(rng):
    lay = layout_for("kane_mele", honeycomb(2, 2, "periodic"))
    v = rng.normal(size=lay.n_orbitals) + 1j * rng.normal(size=lay.n_orbitals)
    v /= np.linalg.norm(v)
    tv = theta(v, lay)
    assert abs(np.vdot(v, tv)) < 1e-14
    W = np.stack([v, tv], axis=1)
    assert fermionic_metric(W, lay) < 1e-12
    assert fermionic_metric(W, lay, [np.array([0]), np.array([1])]) == pytest.approx(1.0)


def test_degenerate_groups_follow_leaves():
    prov = [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1)]
    vals = np.array([1.0, 1.0, 2.0, 1.0, 3.0])
    groups = sorted(sorted(g.tolist()) for g in degenerate_groups(prov, vals))
    assert groups == [[0, 1], [2], [3], [4]]


def test_translation_metric_on_site_deltas():
    lat = honeycomb(3, 4, "periodic")
    W = np.eye(lat.n_sites, dtype=complex)
    W *= np.exp(1j * np.arange(lat.n_sites))[None, :]
    assert translation_metric(W, lat, "haldane", (1, 0)).passed
    q = orbital_translation(lat, "haldane", (1, 0))
    assert sorted(q) == list(range(lat.n_sites))
    # a random orthonormal basis is not covariant
    rng = np.random.default_rng(0)
    R = frame(rng, lat.n_sites, lat.n_sites)
    rep = translation_metric(R, lat, "haldane", (0, 1))
    assert not rep.passed and rep.worst_row > 0.1


def test_kane_mele_translation_keeps_spin():
    lat = honeycomb(3, 3, "periodic")
    lay = layout_for("kane_mele", lat)
    q = orbital_translation(lat, "kane_mele", (1, 1))
    assert np.array_equal(lay.component[q], lay.component)
