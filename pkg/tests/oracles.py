"""Independent reference implementations used by several test modules."""

import numpy as np


def haldane_bloch(c1, c2, v, t, tprime):
    """2 x 2 Bloch matrix in the periodic gauge; c_i = k . a_i."""
    f = t * (1 + np.exp(-1j * c1) + np.exp(-1j * c2))
    a = 1j * tprime
    # A-A hops along a1, a2 - a1, -a2 have positive orientation
    phases = [c1, c2 - c1, -c2]
    gA = sum(2 * (a * np.exp(1j * p)).real for p in phases)
    gB = sum(2 * (np.conj(a) * np.exp(1j * p)).real for p in phases)
    return np.array([[v + gA, f], [np.conj(f), -v + gB]])


def plaquette_chern(params, n=64):
    """Lattice Berry flux of the lower band summed over an n x n grid."""
    u = np.empty((n, n, 2), dtype=complex)
    for i in range(n):
        for j in range(n):
            _, V = np.linalg.eigh(haldane_bloch(2 * np.pi * i / n, 2 * np.pi * j / n, **params))
            u[i, j] = V[:, 0]

    def link(a, b):
        z = np.sum(a.conj() * b, axis=-1)
        return z / np.abs(z)

    U1 = link(u, np.roll(u, -1, axis=0))
    U2 = link(u, np.roll(u, -1, axis=1))
    F = np.angle(U1 * np.roll(U2, -1, axis=0) / (np.roll(U1, -1, axis=1) * U2))
    return F.sum() / (2 * np.pi)


def brute_ipp(P, ops, counts, hermitian, shift=1e3):
    """IPP with explicit N x N projectors.

    Hermitian stages diagonalize ``P O P - shift (1 - P)`` so the complement
    sits far below the spectrum.  Complex-exponential stages diagonalize
    ``P U P``, whose complement sits at zero while the rest has modulus near one.
    Clusters are cut at the widest gaps (circular for the exponential).
    Returns the stage-one spectrum, the cluster projectors and the leaf
    eigenvalues with their eigenvectors.
    """
    N = P.shape[0]
    I = np.eye(N)

    def spectrum(Pj, O):
        if hermitian:
            w, V = np.linalg.eigh(Pj @ O @ Pj - shift * (I - Pj))
            keep = w > -shift / 2
        else:
            w, V = np.linalg.eig(Pj @ O @ Pj)
            keep = np.abs(w) > 0.5
        return w[keep], V[:, keep]

    def key(w):
        return w.real if hermitian else np.mod(np.angle(w), 2 * np.pi)

    w1, V1 = spectrum(P, ops[0])
    k1 = key(w1)
    order = np.argsort(k1)
    s = k1[order]
    gaps = np.diff(s) if hermitian else np.diff(np.concatenate([s, [s[0] + 2 * np.pi]]))
    n_cut = counts - 1 if hermitian else counts
    cuts = np.sort(np.argsort(gaps)[::-1][:n_cut])
    groups = np.split(order, cuts + 1)
    if not hermitian:
        groups = [g for g in groups if len(g)]
        if len(groups) > counts:          # the wrap-around piece joins the first cluster
            groups[0] = np.concatenate([groups[-1], groups[0]])
            groups = groups[:-1]
    projectors, leaves = [], []
    for g in groups:
        Q, _ = np.linalg.qr(V1[:, g])
        Pj = Q @ Q.conj().T
        projectors.append(Pj)
        w2, V2 = spectrum(Pj, ops[1])
        leaves.append((w2, V2))
    return w1, projectors, leaves
