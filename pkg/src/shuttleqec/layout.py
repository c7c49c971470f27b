"""Mapping parity-check matrices onto the two-rail shuttling device.

The device holds ancilla qubits on a static rail and data qubits on a
mobile rail.  After linearising a code's qubits, every check matrix becomes
a biadjacency matrix whose nonzero *diagonals* are exactly the rail offsets
the data rail must visit; a shuttle schedule is then an ordered walk over
those offsets.  This module provides the diagonal decomposition, schedule
builders with shuttle/distance accounting, the banded rearrangement for
repetition-seeded hypergraph products, and the gate-ordering conditions
with a brute-force search.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .gf2 import BitMatrix

__all__ = [
    "DiagonalDecomposition",
    "ShuttleSchedule",
    "OrderingAssignment",
    "diagonals",
    "reconstruct",
    "rearrange_hgp",
    "schedule_from_diagonals",
    "surface_cycle_schedule",
    "check_ordering",
    "search_orderings",
    "region_interleaved_distance",
    "STEP_OFFSETS",
    "FIG4_ASSIGNMENT",
]


# Cumulative rail offsets visited by the four entangling steps of one
# surface-code stabiliser round, in order: align South-West, North-East,
# South-East, North-West (relative to an ancilla anchored at its cell's SW
# data position, column-major linearisation of a height-d patch).
def STEP_OFFSETS(d: int):
    return {"SW": 0, "NE": d - 1, "SE": d, "NW": -1}


@dataclass(frozen=True)
class DiagonalDecomposition:
    """Nonzero diagonals of a biadjacency matrix.

    ``offsets`` are column-minus-row indices relative to the principal
    diagonal; ``masks[o]`` is a boolean vector over rows marking which
    positions along diagonal ``o`` are occupied.
    """

    rows: int
    cols: int
    offsets: tuple
    masks: dict = field(compare=False)

    @property
    def n_diagonals(self) -> int:
        return len(self.offsets)

    @property
    def span(self) -> int:
        """Band width: max offset - min offset."""
        if not self.offsets:
            return 0
        return max(self.offsets) - min(self.offsets)


def diagonals(H: BitMatrix) -> DiagonalDecomposition:
    """Minimal diagonal decomposition covering all ones of H."""
    A = H.data if isinstance(H, BitMatrix) else np.asarray(H, dtype=np.uint8)
    rows, cols = A.shape
    masks = {}
    for r, c in zip(*np.nonzero(A)):
        off = int(c) - int(r)
        masks.setdefault(off, np.zeros(rows, dtype=bool))[int(r)] = True
    offs = tuple(sorted(masks))
    return DiagonalDecomposition(rows=rows, cols=cols, offsets=offs, masks=masks)


def reconstruct(dec: DiagonalDecomposition) -> BitMatrix:
    """Inverse of :func:`diagonals`."""
    A = np.zeros((dec.rows, dec.cols), dtype=np.uint8)
    for off in dec.offsets:
        rows = np.nonzero(dec.masks[off])[0]
        A[rows, rows + off] = 1
    return BitMatrix(A)


@dataclass(frozen=True)
class ShuttleSchedule:
    """Ordered shuttle moves with the interaction layer after each move.

    ``moves[i]`` is the signed increment applied before ``layers[i+1]``
    (``layers[0]`` happens before any move).  Each layer records the rail
    offset it serves; interaction pairs are resolved by the circuit module
    from code geometry.  ``trailing`` marks the staggered partial round the
    surface cycle appends for the final X measurements.
    """

    moves: tuple
    layers: tuple  # per-layer dicts: {"offset": int, "tag": str}
    trailing: int = 0  # number of trailing moves outside full rounds

    @property
    def n_shuttles(self) -> int:
        return sum(1 for m in self.moves if m != 0)

    @property
    def total_distance(self) -> int:
        return sum(abs(m) for m in self.moves)

    @property
    def round_trip_closed(self) -> bool:
        """Full rounds return the rail to its initial position."""
        body = self.moves[:len(self.moves) - self.trailing]
        return sum(body) == 0


def schedule_from_diagonals(dec_z: DiagonalDecomposition,
                            dec_x: DiagonalDecomposition = None,
                            policy: str = "x-then-z") -> ShuttleSchedule:
    """Offset walk for a generic code: all Z diagonals in ascending order
    while shuttling one way, then all X diagonals in descending order on
    the way back, ending at offset 0."""
    if policy not in ("x-then-z", "interleaved"):
        raise ValueError(f"unknown policy: {policy}")
    stops = [(off, "Z") for off in sorted(dec_z.offsets)]
    if dec_x is not None:
        stops += [(off, "X") for off in sorted(dec_x.offsets, reverse=True)]
    moves = []
    layers = []
    pos = 0
    for off, tag in stops:
        step = off - pos
        if step != 0 or not layers:
            moves.append(step)
        pos = off
        layers.append({"offset": off, "tag": tag})
    if pos != 0:
        moves.append(-pos)
    # drop leading zero move if the first stop is at offset 0
    moves = [m for m in moves if m != 0]
    return ShuttleSchedule(moves=tuple(moves), layers=tuple(layers))


def surface_cycle_schedule(d: int, N_r: int) -> ShuttleSchedule:
    """The interleaved surface-code cycle.

    Per round: entangle SW, shuttle +(d-1), entangle NE (measure X),
    shuttle +1, entangle SE, shuttle -(d+1), entangle NW (measure Z),
    shuttle +1.  X ancillas run two steps behind Z, so the first round
    skips their first two gates and a trailing +(d-1) shuttle closes their
    last round: 4 N_r + 1 shuttles, total distance N_r (2d+2) + d - 1.
    """
    if d < 3 or d % 2 == 0:
        raise ValueError("surface cycle needs odd d >= 3")
    if N_r < 1:
        raise ValueError("need at least one round")
    off = STEP_OFFSETS(d)
    moves = []
    layers = [{"offset": off["SW"], "tag": "SW", "round": 0}]
    for r in range(N_r):
        if r > 0:
            moves.append(1)
            layers.append({"offset": off["SW"], "tag": "SW", "round": r})
        moves.append(d - 1)
        layers.append({"offset": off["NE"], "tag": "NE", "round": r})
        moves.append(1)
        layers.append({"offset": off["SE"], "tag": "SE", "round": r})
        moves.append(-(d + 1))
        layers.append({"offset": off["NW"], "tag": "NW", "round": r})
    moves.append(1)  # return to offset 0
    # trailing stagger: X ancillas of the last round still need SW and NE
    layers.append({"offset": off["SW"], "tag": "SW-trailing", "round": N_r})
    moves.append(d - 1)
    layers.append({"offset": off["NE"], "tag": "NE-trailing", "round": N_r})
    return ShuttleSchedule(moves=tuple(moves), layers=tuple(layers), trailing=1)


def region_interleaved_distance(d: int, single_patch: bool = False) -> int:
    """Per-cycle shuttle distance in increments.

    With the logical-ancilla bus interleaved between wide patches, data
    qubits of consecutive columns sit 2d increments apart, doubling the
    single-patch 2d round trip to 4d.  Single-patch mode returns the
    Appendix-style 2d+2 per-round figure.
    """
    if d < 3:
        raise ValueError("d >= 3")
    return 2 * d + 2 if single_patch else 4 * d


def rearrange_hgp(code):
    """Banded permutation for hgp(repetition(n), B) codes.

    Orders data qubits by repetition index, interleaving the primal
    (n_A x n_B) block with the dual (r_A x r_B) block, and interleaves
    Hz/Hx check rows the same way.  Returns (column permutation, the
    interleaved stacked check matrix, band width).
    """
    seeds = code.meta.get("hgp_seeds")
    if seeds is None:
        raise ValueError("code was not built by hgp()")
    A, B = seeds
    ra, na = A.H.shape
    rb, nb = B.H.shape
    if not all(int(A.H.data[i, j]) == (1 if j in (i, i + 1) else 0)
               for i in range(ra) for j in range(na)):
        raise ValueError("rearrange_hgp needs a repetition-code first seed")
    # data columns: primal qubit (i, j) at i*nb + j within the first block,
    # dual qubit (i, j') at na*nb + i*rb + j'
    col_perm = []
    for i in range(na):
        col_perm.extend(i * nb + j for j in range(nb))
        if i < ra:
            col_perm.extend(na * nb + i * rb + j for j in range(rb))
    # check rows: Hz block i (B's rows), then Hx block i (n_B transposed
    # checks), advancing along the repetition direction
    hz = code.Hz.data
    hx = code.Hx.data
    rows = []
    for i in range(na):
        if i < na:  # Hz has na blocks of rb rows
            rows.extend(("Z", i * rb + j) for j in range(rb))
        if i < ra:  # Hx has ra blocks of nb rows
            rows.extend(("X", i * nb + j) for j in range(nb))
    stacked = np.array([hz[idx] if kind == "Z" else hx[idx]
                        for kind, idx in rows], dtype=np.uint8)
    permuted = stacked[:, col_perm]
    dec = diagonals(BitMatrix(permuted))
    return np.array(col_perm), BitMatrix(permuted), dec.span


# ---------------------------------------------------------------------------
# gate-ordering conditions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrderingAssignment:
    """Time-step labels for one Z cell (a..d) and one X cell (e..h).

    Letters follow the ordering-conditions notation: a/e NW, b/f NE,
    c/g SW, d/h SE corners; s is the number of shuttles per cycle.
    """

    a: int
    b: int
    c: int
    d: int
    e: int
    f: int
    g: int
    h: int
    s: int = 4

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d, self.e, self.f, self.g, self.h)


# The assignment realized by the nine-step cycle: Z gates at steps
# SW=1, NE=2, SE=3, NW=4 and X gates two steps behind at SE=3, NW=4,
# SW=5, NE=6 (s = 4).
FIG4_ASSIGNMENT = OrderingAssignment(a=4, b=2, c=1, d=3, e=4, f=6, g=5, h=3, s=4)


def check_ordering(o: OrderingAssignment) -> dict:
    """Evaluate the three interleaving conditions; report failures.

    A1 disentangles neighbouring ancillas; A2 synchronises gates with the
    global shuttle (all congruences mod s); A3 is the hook-error-safe
    cross order.
    """
    if min(o.as_tuple()) < 1 or o.s < 1:
        raise ValueError("time steps and s must be positive")
    a1 = ((o.b < o.e) and (o.d < o.g)) or ((o.b > o.e) and (o.d > o.g))
    a2 = all((x - y) % o.s == 0 for x, y in
             ((o.a, o.e), (o.b, o.f), (o.c, o.g), (o.d, o.h)))
    a3 = (o.c < o.b < o.d < o.a) and (o.h < o.e < o.g < o.f)
    violations = [name for name, ok in (("A1", a1), ("A2", a2), ("A3", a3)) if not ok]
    return {"valid": not violations, "violations": violations}


def search_orderings(s: int = 4, max_step: int = 8):
    """All assignments with steps in [1, max_step] passing A1, A2, A3.

    A3 fixes the relative order within each cell, so enumerate the Z and X
    quadruples as ordered 4-subsets and join them under A1 + A2.
    """
    if s < 1:
        raise ValueError("s >= 1")
    from itertools import combinations

    quads = list(combinations(range(1, max_step + 1), 4))
    out = []
    for c, b, d, a in quads:  # ascending: c < b < d < a
        for h, e, g, f in quads:  # ascending: h < e < g < f
            o = OrderingAssignment(a=a, b=b, c=c, d=d, e=e, f=f, g=g, h=h, s=s)
            if check_ordering(o)["valid"]:
                out.append(o)
    return out
