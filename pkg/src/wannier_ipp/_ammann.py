"""Marked substitution rules for the Ammann-Beenker tiling.

Tiles live in Z^4: a point ``n`` sits at ``sum_j n_j e_j`` with
``e_j = (cos(j pi/4), sin(j pi/4))``.  Direction ``k`` in 0..7 denotes the
unit vector ``e_k`` with ``e_{k+4} = -e_k``.

Two tile shapes are used: the 45 degree rhombus ``R`` (anchor at an acute
corner, edges along ``k`` and ``k+1``) and the half square ``T`` (right angle
at the anchor, legs along ``k`` and ``k+2``).  Two half squares glued along
their hypotenuse give the square tile.  The undecorated shapes do not fix
the substitution, so every tile carries one of 20 marks; the table below lists
for each mark the children of the inflated tile, as
``(shape, offset, turn, child mark)`` with the offset measured from the
inflated anchor in the parent's frame.
"""

import numpy as np

RULES = {
    0: ("R", (("R", (0, 0, 0, 0), 0, 0), ("R", (1, 1, 0, -1), 2, 2), ("R", (1, 1, 1, -1), 0, 0), ("T", (1, 1, 0, 0), 2, 11), ("T", (1, 1, 0, 0), 5, 19), ("T", (1, 1, 1, -1), 1, 4), ("T", (1, 1, 1, -1), 6, 16))),
    1: ("R", (("R", (0, 0, 0, 0), 0, 1), ("R", (1, 1, 0, -1), 2, 3), ("R", (1, 1, 1, -1), 0, 1), ("T", (1, 1, 0, 0), 2, 14), ("T", (1, 1, 0, 0), 5, 13), ("T", (1, 1, 1, -1), 1, 6), ("T", (1, 1, 1, -1), 6, 9))),
    2: ("R", (("R", (0, 0, 0, 0), 0, 2), ("R", (1, 1, 1, -1), 0, 2), ("R", (1, 1, 1, 0), 6, 0), ("T", (1, 1, 0, 0), 2, 15), ("T", (1, 1, 0, 0), 5, 12), ("T", (1, 1, 1, -1), 1, 7), ("T", (1, 1, 1, -1), 6, 8))),
    3: ("R", (("R", (0, 0, 0, 0), 0, 3), ("R", (1, 1, 1, -1), 0, 3), ("R", (1, 1, 1, 0), 6, 1), ("T", (1, 1, 0, 0), 2, 17), ("T", (1, 1, 0, 0), 5, 5), ("T", (1, 1, 1, -1), 1, 18), ("T", (1, 1, 1, -1), 6, 10))),
    4: ("T", (("R", (0, 0, 0, 0), 0, 1), ("R", (0, 1, 0, 0), 2, 3), ("T", (0, 1, 0, 0), 0, 10), ("T", (0, 1, 0, 0), 3, 18), ("T", (1, 1, 0, 0), 5, 13))),
    5: ("T", (("R", (0, 0, 0, 0), 0, 0), ("R", (0, 1, 0, 0), 2, 2), ("T", (0, 1, 0, 0), 0, 8), ("T", (0, 1, 0, 0), 3, 7), ("T", (1, 1, 0, 0), 5, 19))),
    6: ("T", (("R", (0, 0, 0, 0), 0, 2), ("R", (0, 1, 1, 1), 6, 0), ("T", (0, 1, 0, 0), 0, 11), ("T", (0, 1, 0, 0), 3, 19), ("T", (1, 1, 0, 0), 5, 12))),
    7: ("T", (("R", (0, 0, 0, 0), 0, 3), ("R", (0, 1, 1, 1), 6, 1), ("T", (0, 1, 0, 0), 0, 14), ("T", (0, 1, 0, 0), 3, 13), ("T", (1, 1, 0, 0), 5, 5))),
    8: ("T", (("R", (0, 0, 0, 0), 1, 1), ("R", (1, 1, 0, -1), 3, 3), ("T", (0, 1, 0, 0), 0, 5), ("T", (0, 1, 0, 0), 5, 17), ("T", (0, 1, 1, 0), 3, 14))),
    9: ("T", (("R", (0, 0, 0, 0), 1, 0), ("R", (1, 1, 0, -1), 3, 2), ("T", (0, 1, 0, 0), 0, 12), ("T", (0, 1, 0, 0), 5, 15), ("T", (0, 1, 1, 0), 3, 11))),
    10: ("T", (("R", (0, 0, 0, 0), 1, 2), ("R", (0, 1, 0, 0), 7, 0), ("T", (0, 1, 0, 0), 0, 4), ("T", (0, 1, 0, 0), 5, 16), ("T", (0, 1, 1, 0), 3, 15))),
    11: ("T", (("R", (0, 0, 0, 0), 1, 3), ("R", (0, 1, 0, 0), 7, 1), ("T", (0, 1, 0, 0), 0, 6), ("T", (0, 1, 0, 0), 5, 9), ("T", (0, 1, 1, 0), 3, 17))),
    12: ("T", (("R", (0, 1, 0, 0), 2, 1), ("R", (1, 1, 0, 0), 4, 3), ("T", (0, 1, 0, 0), 0, 9), ("T", (0, 1, 0, 0), 3, 6), ("T", (1, 1, 0, 0), 5, 18))),
    13: ("T", (("R", (0, 1, 0, 0), 2, 0), ("R", (1, 1, 0, 0), 4, 2), ("T", (0, 1, 0, 0), 0, 16), ("T", (0, 1, 0, 0), 3, 4), ("T", (1, 1, 0, 0), 5, 7))),
    14: ("T", (("R", (0, 1, 0, 0), 7, 2), ("R", (0, 1, 1, 0), 5, 0), ("T", (0, 1, 0, 0), 0, 7), ("T", (0, 1, 0, 0), 5, 8), ("T", (0, 1, 1, 0), 3, 16))),
    15: ("T", (("R", (0, 1, 0, 0), 7, 3), ("R", (0, 1, 1, 0), 5, 1), ("T", (0, 1, 0, 0), 0, 18), ("T", (0, 1, 0, 0), 5, 10), ("T", (0, 1, 1, 0), 3, 9))),
    16: ("T", (("R", (0, 1, 1, 0), 5, 3), ("R", (1, 1, 0, -1), 3, 1), ("T", (0, 1, 0, 0), 0, 13), ("T", (0, 1, 0, 0), 5, 14), ("T", (0, 1, 1, 0), 3, 10))),
    17: ("T", (("R", (0, 1, 1, 0), 5, 2), ("R", (1, 1, 0, -1), 3, 0), ("T", (0, 1, 0, 0), 0, 19), ("T", (0, 1, 0, 0), 5, 11), ("T", (0, 1, 1, 0), 3, 8))),
    18: ("T", (("R", (0, 1, 1, 1), 6, 2), ("R", (1, 1, 0, 0), 4, 0), ("T", (0, 1, 0, 0), 0, 15), ("T", (0, 1, 0, 0), 3, 12), ("T", (1, 1, 0, 0), 5, 4))),
    19: ("T", (("R", (0, 1, 1, 1), 6, 3), ("R", (1, 1, 0, 0), 4, 1), ("T", (0, 1, 0, 0), 0, 17), ("T", (0, 1, 0, 0), 3, 5), ("T", (1, 1, 0, 0), 5, 6))),
}


def unit(k):
    """Z^4 coordinates of the unit vector in direction ``k``."""
    k %= 8
    v = np.zeros(4, dtype=np.int64)
    v[k % 4] = 1 if k < 4 else -1
    return v


# inflation (scale 1 + sqrt 2) and the eighth-turn rotation, both integer
INFLATE = np.stack([unit(j - 1) + unit(j) + unit(j + 1) for j in range(4)], axis=1)
ROTATE = np.stack([unit(j + 1) for j in range(4)], axis=1)
_TURNS = [np.linalg.matrix_power(ROTATE, k) for k in range(8)]

# Cartesian and perpendicular-space images of the Z^4 basis
STAR = np.array([[np.cos(j * np.pi / 4), np.sin(j * np.pi / 4)] for j in range(4)])
PERP = np.array([[np.cos(3 * j * np.pi / 4), np.sin(3 * j * np.pi / 4)] for j in range(4)])


def seed():
    """Eight rhombi around a common vertex, with their marks."""
    z = np.zeros(4, dtype=np.int64)
    tiles = [("R", z, k, k) for k in range(4)]
    tiles += [("R", -(unit(k) + unit(k + 1)), k, k) for k in range(4)]
    return tiles


def inflate(tiles):
    out = []
    for _, anchor, k, mark in tiles:
        base = INFLATE @ anchor
        for shape, offset, turn, child in RULES[mark][1]:
            out.append((shape, base + _TURNS[k] @ np.asarray(offset), (k + turn) % 8, child))
    return out


def corners(tile):
    shape, o, k, _ = tile
    if shape == "R":
        return [o, o + unit(k), o + unit(k) + unit(k + 1), o + unit(k + 1)]
    return [o, o + unit(k), o + unit(k + 2)]


def edges(tile):
    """Tile edges as pairs of Z^4 points; the half-square hypotenuse is not an edge."""
    c = corners(tile)
    if tile[0] == "R":
        return [(c[i], c[(i + 1) % 4]) for i in range(4)]
    return [(c[0], c[1]), (c[0], c[2])]
