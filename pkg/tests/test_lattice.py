import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frozen import AB_COUNTS
from wannier_ipp.errors import ConfigError
from wannier_ipp.lattice import (NN, NNN, LatticeSpec, ammann_beenker_tiles, build_lattice,
                                 ribbon, translation_map)

SQ3 = np.sqrt(3.0)


def honeycomb(L1, L2, boundary="dirichlet"):
    return build_lattice(LatticeSpec("honeycomb", L1, L2, 0, boundary))


def brute_force_pairs(L1, L2, periodic):
    """Neighbour pairs by distance, from positions built here from scratch."""
    a1, a2 = np.array([1.0, 0.0]), np.array([0.5, SQ3 / 2])
    pts = []
    for m in range(L1):
        for n in range(L2):
            base = m * a1 + n * a2
            pts.append(base)
            pts.append(base + (a1 + a2) / 3)
    pts = np.array(pts)
    shifts = [(0, 0)]
    if periodic:
        shifts = [(s, t) for s in (-1, 0, 1) for t in (-1, 0, 1)]
    nn, nnn = 0, 0
    for i, j in itertools.permutations(range(len(pts)), 2):
        for s, t in shifts:
            d = np.linalg.norm(pts[j] + s * L1 * a1 + t * L2 * a2 - pts[i])
            if abs(d - 1 / SQ3) < 1e-9:
                nn += 1
            elif abs(d - 1.0) < 1e-9:
                nnn += 1
    return nn, nnn


@pytest.mark.parametrize("L1,L2,boundary", [(3, 3, "dirichlet"), (4, 3, "dirichlet"),
                                            (4, 4, "periodic"), (3, 5, "periodic")])
def test_bond_counts_match_distance_enumeration(L1, L2, boundary):
    lat = honeycomb(L1, L2, boundary)
    want = brute_force_pairs(L1, L2, boundary == "periodic")
    assert (len(lat.select(NN)), len(lat.select(NNN))) == want


def test_dirichlet_12_counts():
    lat = honeycomb(12, 12)
    assert lat.n_sites == 288
    # interior coordination 3 / 6; directed counts from the distance oracle
    assert (len(lat.select(NN)), len(lat.select(NNN))) == brute_force_pairs(12, 12, False)


def test_periodic_coordination():
    lat = honeycomb(5, 6, "periodic")
    for kind, z in ((NN, 3), (NNN, 6)):
        idx = lat.select(kind)
        assert np.all(np.bincount(lat.bond_src[idx], minlength=lat.n_sites) == z)


def test_bond_vectors_have_nominal_lengths():
    lat = honeycomb(6, 5, "periodic")
    length = np.hypot(*lat.bond_vec.T)
    assert np.allclose(length[lat.bond_kind == NN], 1 / SQ3)
    assert np.allclose(length[lat.bond_kind == NNN], 1.0)


def test_wrapped_displacement_matches_positions():
    lat = honeycomb(4, 5, "periodic")
    a1, a2 = np.array([1.0, 0.0]), np.array([0.5, SQ3 / 2])
    shift = lat.bond_wrap[:, :1] * 4 * a1 + lat.bond_wrap[:, 1:] * 5 * a2
    d = lat.positions[lat.bond_dst] + shift - lat.positions[lat.bond_src]
    assert np.allclose(d, lat.bond_vec)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 6), st.integers(2, 6), st.sampled_from(["dirichlet", "periodic"]))
def test_bonds_come_in_reversed_pairs(L1, L2, boundary):
    lat = honeycomb(L1, L2, boundary)
    fwd = {(int(s), int(d), int(k), int(n), tuple(w)) for s, d, k, n, w in
           zip(lat.bond_src, lat.bond_dst, lat.bond_kind, lat.bond_nu, lat.bond_wrap)}
    for s, d, k, n, w in fwd:
        assert (d, s, k, -n, (-w[0], -w[1])) in fwd


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 6), st.integers(2, 6))
def test_nnn_orientation_signs(L1, L2):
    lat = honeycomb(L1, L2)
    idx = lat.select(NNN)
    assert set(np.unique(lat.bond_nu[idx])) <= {-1, 1}
    # the same hop direction has opposite nu on the two sublattices
    for b in idx[:50]:
        same = idx[(np.abs(lat.bond_angle[idx] - lat.bond_angle[b]) < 1e-9)
                   & (lat.sublattice[lat.bond_src[idx]] != lat.sublattice[lat.bond_src[b]])]
        assert np.all(lat.bond_nu[same] == -lat.bond_nu[b])


def test_site_indexing():
    lat = honeycomb(4, 3)
    for m, n, s in itertools.product(range(4), range(3), range(2)):
        i = lat.site_index(m, n, s)
        assert tuple(lat.cells[i]) == (m, n) and lat.sublattice[i] == s


def test_json_export_lists_everything():
    lat = honeycomb(3, 3, "periodic")
    d = json.loads(lat.to_json())
    assert len(d["sites"]) == lat.n_sites and len(d["bonds"]) == lat.n_bonds
    assert {b["kind"] for b in d["bonds"]} == {"NN", "NNN"}


def test_translation_map_is_a_lattice_symmetry():
    lat = honeycomb(4, 5, "periodic")
    perm = translation_map(lat, (1, 2))
    assert sorted(perm) == list(range(lat.n_sites))
    bonds = set(zip(lat.bond_src, lat.bond_dst, lat.bond_kind))
    assert {(perm[s], perm[d], k) for s, d, k in bonds} == bonds


def test_ribbon_keeps_wraps():
    r = ribbon(6)
    assert r.L2 == 1 and r.n_sites == 12
    assert set(np.unique(r.bond_wrap[:, 1])) == {-1, 0, 1}


@pytest.mark.parametrize("spec", [
    LatticeSpec("honeycomb", 1, 4), LatticeSpec("square", 4, 4),
    LatticeSpec("honeycomb", 4, 4, 0, "open"),
    LatticeSpec("ammann_beenker", 0, 0, 0), LatticeSpec("ammann_beenker", 0, 0, 2, "periodic"),
])
def test_invalid_specs(spec):
    with pytest.raises(ConfigError):
        build_lattice(spec)


def test_spec_round_trip():
    s = LatticeSpec("ammann_beenker", 0, 0, 3, "dirichlet")
    assert LatticeSpec.from_dict(json.loads(json.dumps(s.to_dict()))) == s


# ---------------------------------------------------------------- Ammann-Beenker

TH = np.arange(4) * np.pi / 4
PAR = np.stack([np.cos(TH), np.sin(TH)], axis=1)
PERP = np.stack([np.cos(3 * TH), np.sin(3 * TH)], axis=1)


def in_window(p):
    """Regular octagon spanned by the perpendicular images of the four unit vectors."""
    ok = np.ones(len(p), dtype=bool)
    for j in range(4):
        normal = np.array([-PERP[j, 1], PERP[j, 0]])
        h = 0.5 * np.abs(PERP @ normal).sum()
        ok &= np.abs(p @ normal) <= h + 1e-9
    return ok


def cut_and_project(steps):
    """Vertices and unit edges of the Ammann-Beenker tiling inside the crop square."""
    half = (1 + np.sqrt(2)) ** steps / np.sqrt(2)
    R = int(np.ceil(2 * half)) + 2
    n = np.array(list(itertools.product(range(-R, R + 1), repeat=4)))
    n = n[np.all(np.abs(n @ PAR) <= half + 1e-9, axis=1)]
    n = n[in_window(n @ PERP)]
    index = {tuple(v): i for i, v in enumerate(n)}
    edges = set()
    for v, i in index.items():
        for j in range(4):
            for s in (1, -1):
                w = list(v)
                w[j] += s
                if tuple(w) in index:
                    edges.add((i, index[tuple(w)]))
    used = sorted({i for i, _ in edges})
    return n[used] @ PAR, edges


@pytest.mark.parametrize("steps", sorted(AB_COUNTS))
def test_ammann_beenker_counts(steps):
    lat = build_lattice(LatticeSpec("ammann_beenker", 0, 0, steps))
    assert (lat.n_sites, lat.n_bonds) == AB_COUNTS[steps]


@pytest.mark.parametrize("steps", [1, 2, 3])
def test_ammann_beenker_matches_cut_and_project(steps):
    lat = build_lattice(LatticeSpec("ammann_beenker", 0, 0, steps))
    pts, edges = cut_and_project(steps)
    assert lat.n_sites == len(pts) and lat.n_bonds == len(edges)
    ours = {tuple(np.round(p, 8)) for p in lat.positions}
    theirs = {tuple(np.round(p, 8) + 0.0) for p in pts}
    assert ours == theirs


def test_ammann_beenker_tiles_are_legal():
    """Every tile vertex is accepted by the window and tiles do not overlap."""
    tiles = ammann_beenker_tiles(2)
    from wannier_ipp import _ammann
    area = 0.0
    for t in tiles:
        c = np.array([np.asarray(p) for p in _ammann.corners(t)])
        assert in_window(c @ PERP).all()
        xy = c @ PAR
        x, y = xy[:, 0], xy[:, 1]
        area += 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
        for p, q in _ammann.edges(t):
            assert np.isclose(np.linalg.norm((np.asarray(q) - np.asarray(p)) @ PAR), 1.0)
    # eight seed rhombi scaled by (1 + sqrt 2)^2 in each direction
    assert np.isclose(area, 8 * np.sin(np.pi / 4) * (1 + np.sqrt(2)) ** 4)


def test_ammann_beenker_bond_angles_are_eighth_turns():
    lat = build_lattice(LatticeSpec("ammann_beenker", 0, 0, 2))
    assert np.allclose(np.mod(lat.bond_angle / (np.pi / 4), 1), 0)
    assert np.allclose(np.hypot(*lat.bond_vec.T), 1.0)


def test_ammann_beenker_is_eightfold_symmetric():
    lat = build_lattice(LatticeSpec("ammann_beenker", 0, 0, 3))
    c, s = np.cos(np.pi / 4), np.sin(np.pi / 4)
    rot = lat.positions @ np.array([[c, s], [-s, c]])
    a = {tuple(np.round(p, 8) + 0.0) for p in lat.positions}
    b = {tuple(np.round(p, 8) + 0.0) for p in rot}
    # the square crop is only fourfold symmetric
    quarter = lat.positions @ np.array([[0, 1], [-1, 0]])
    assert a == {tuple(np.round(p, 8) + 0.0) for p in quarter}
    assert len(a & b) > 0.8 * len(a)
