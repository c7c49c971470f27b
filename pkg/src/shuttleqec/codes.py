"""CSS code constructions: surface patches, hypergraph products, bicycle codes.

Each constructor returns a :class:`CssCode` whose check matrices live in
:mod:`shuttleqec.gf2`.  Surface-code constructors additionally attach the
patch geometry (cell list with ancilla positions and corner roles) that the
layout and circuit modules consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .gf2 import BitMatrix

__all__ = [
    "ClassicalCode",
    "CssCode",
    "Cell",
    "repetition_code",
    "rotated_surface_code",
    "wide_surface_code",
    "hgp",
    "circulant",
    "generalised_bicycle",
    "appendix_b_code",
    "compute_logicals",
    "estimate_distance",
    "get_code",
    "A2_POLYNOMIALS",
]


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassicalCode:
    """A classical binary linear code given by its parity-check matrix."""

    H: BitMatrix
    name: str = ""

    @property
    def n(self) -> int:
        return self.H.cols

    @property
    def k(self) -> int:
        return self.H.cols - gf2.rank(self.H)


@dataclass(frozen=True)
class Cell:
    """One stabiliser of a surface patch with its geometric footprint.

    ``corners`` maps a corner role ("SW", "NE", "SE", "NW") to a data-qubit
    index; half-disk boundary checks carry only two roles.  ``anc_pos`` is
    the ancilla's rail position in the column-major linearisation (it can be
    negative for boundary ancillas that sit before the patch origin).
    """

    kind: str  # "X" or "Z"
    corners: dict
    anc_pos: int


@dataclass(frozen=True)
class CssCode:
    n: int
    Hx: BitMatrix
    Hz: BitMatrix
    Lx: BitMatrix
    Lz: BitMatrix
    k: int
    d_estimate: object  # int or "unknown"
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def validate(self) -> None:
        if gf2.matmul(self.Hx, self.Hz.transpose()).entries:
            raise ValueError(f"{self.name}: Hx Hz^T != 0")
        k = self.n - gf2.rank(self.Hx) - gf2.rank(self.Hz)
        if k != self.k:
            raise ValueError(f"{self.name}: k={self.k} but rank arithmetic gives {k}")


# ---------------------------------------------------------------------------
# classical seeds
# ---------------------------------------------------------------------------


def repetition_code(n: int) -> ClassicalCode:
    """(n-1) x n parity-check matrix with 1s on adjacent columns."""
    if n < 2:
        raise ValueError("repetition code needs n >= 2")
    H = np.zeros((n - 1, n), dtype=np.uint8)
    for i in range(n - 1):
        H[i, i] = H[i, i + 1] = 1
    return ClassicalCode(BitMatrix(H), name=f"repetition-{n}")


# The [17,3,8] seed used for the hypergraph product benchmark, transcribed
# row by row from its published parity-check matrix.
_SEED_17_3_8 = [
    "0 1 0 0 0 0 0 0 0 0 0 1 0 1 0 0 0",
    "1 0 0 0 1 0 0 1 0 0 0 0 1 0 1 0 0",
    "1 0 0 0 0 1 1 0 0 0 0 0 0 0 0 0 0",
    "0 0 1 0 0 0 0 0 0 0 0 0 0 0 1 0 0",
    "0 0 0 0 0 0 0 0 1 0 0 0 0 1 0 0 0",
    "0 0 0 0 0 0 0 1 0 0 0 0 0 0 0 0 0",
    "0 0 0 0 1 0 0 0 0 0 0 1 0 0 0 0 0",
    "0 0 0 0 0 1 0 0 0 1 0 0 0 0 0 0 0",
    "0 0 0 0 0 1 0 0 0 0 0 0 0 0 0 1 0",
    "0 0 0 0 1 0 0 0 0 0 0 0 1 0 0 0 1",
    "0 0 0 0 0 0 0 0 0 0 1 0 0 0 0 0 0",
    "0 1 0 1 1 0 0 0 0 0 0 0 0 0 0 0 0",
    "1 1 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0",
    "0 0 0 0 0 0 0 0 0 1 0 0 0 1 0 0 1",
]


def appendix_b_code() -> ClassicalCode:
    """The [17,3,8] random LDPC seed of the HGP benchmark, verbatim."""
    H = np.array([[int(x) for x in row.split()] for row in _SEED_17_3_8], dtype=np.uint8)
    return ClassicalCode(BitMatrix(H), name="seed-17-3-8")


# ---------------------------------------------------------------------------
# surface patches
# ---------------------------------------------------------------------------


def _patch_cells(height: int, width: int, flip_colour: bool = False):
    """Interior plaquettes of a rectangular patch on a checkerboard.

    Data qubit (r, c) linearises to position c*height + r (column-major),
    which is what puts the check matrix into the four-diagonal band form
    used by the shuttle schedule.  Colour rule: X iff (r+c) odd, optionally
    flipped.
    """
    cells = []
    for r in range(height - 1):
        for c in range(width - 1):
            x_cell = ((r + c) % 2 == 1) ^ flip_colour
            corners = {
                "NW": (r, c),
                "NE": (r, c + 1),
                "SW": (r + 1, c),
                "SE": (r + 1, c + 1),
            }
            cells.append(("X" if x_cell else "Z", corners, (r + 1, c)))
    return cells


def _finish_patch(d: int, height: int, width: int, cells, name: str,
                  extra_meta=None) -> CssCode:
    """Linearise cell list into Hx/Hz and attach geometry metadata."""
    n = height * width

    def pos(rc):
        r, c = rc
        return c * height + r

    out_cells = []
    hx_rows, hz_rows = [], []
    for kind, corners, anchor in cells:
        row = np.zeros(n, dtype=np.uint8)
        for rc in corners.values():
            row[pos(rc)] = 1
        # ancilla rail position: where the (possibly virtual) SW corner sits
        ar, ac = anchor
        anc_pos = ac * height + ar
        out_cells.append(Cell(kind, {k: pos(rc) for k, rc in corners.items()}, anc_pos))
        (hx_rows if kind == "X" else hz_rows).append(row)

    Hx = BitMatrix(np.array(hx_rows))
    Hz = BitMatrix(np.array(hz_rows))
    k = n - gf2.rank(Hx) - gf2.rank(Hz)
    Lx, Lz = compute_logicals(Hx, Hz)
    meta = {"height": height, "width": width, "cells": out_cells,
            "column_major": True}
    if extra_meta:
        meta.update(extra_meta)
    code = CssCode(n=n, Hx=Hx, Hz=Hz, Lx=Lx, Lz=Lz, k=k, d_estimate=d,
                   name=name, meta=meta)
    code.validate()
    return code


def rotated_surface_code(d: int) -> CssCode:
    """Distance-d rotated surface patch: n = d^2, k = 1.

    Checkerboard of weight-4 plaquettes plus weight-2 half-disks: X
    half-disks on the top/bottom rows, Z half-disks on the left/right
    columns.  The X logical runs vertically, the Z logical horizontally.
    """
    if d < 3 or d % 2 == 0:
        raise ValueError("rotated surface code needs odd d >= 3")
    cells = _patch_cells(d, d)
    for c in range(d - 1):
        if c % 2 == 0:  # top X half-disks
            cells.append(("X", {"SW": (0, c), "SE": (0, c + 1)}, (0, c)))
        if (d - 1 + c) % 2 == 1:  # bottom X half-disks
            cells.append(("X", {"NW": (d - 1, c), "NE": (d - 1, c + 1)}, (d, c)))
    for r in range(d - 1):
        if r % 2 == 1:  # left Z half-disks
            cells.append(("Z", {"NE": (r, 0), "SE": (r + 1, 0)}, (r + 1, -1)))
        if r % 2 == 0:  # right Z half-disks
            cells.append(("Z", {"NW": (r, d - 1), "SW": (r + 1, d - 1)}, (r + 1, d - 1)))
    return _finish_patch(d, d, d, cells, name=f"rsc-d{d}")


def wide_surface_code(d: int) -> CssCode:
    """Rectangular d x 2d surface patch with k = 1 and d_estimate = d.

    Same checkerboard as the square patch, twice as wide, with Z half-disks
    on the top/bottom rows and X half-disks on the left/right columns: the
    tracked Z-type error distance (top-to-bottom) is d, while the X logical
    runs horizontally and can be routed along the ancilla-bus-facing bottom
    row.  Both logical representatives therefore reach the bottom boundary.
    """
    if d < 3 or d % 2 == 0:
        raise ValueError("wide surface code needs odd d >= 3")
    height, width = d, 2 * d
    cells = _patch_cells(height, width)
    for c in range(width - 1):
        if c % 2 == 1:  # top Z half-disks
            cells.append(("Z", {"SW": (0, c), "SE": (0, c + 1)}, (0, c)))
        if (height - 1 + c) % 2 == 0:  # bottom Z half-disks
            cells.append(("Z", {"NW": (height - 1, c), "NE": (height - 1, c + 1)},
                          (height, c)))
    for r in range(height - 1):
        if r % 2 == 0:  # left X half-disks
            cells.append(("X", {"NE": (r, 0), "SE": (r + 1, 0)}, (r + 1, -1)))
        if r % 2 == 0:  # right X half-disks
            cells.append(("X", {"NW": (r, width - 1), "SW": (r + 1, width - 1)},
                          (r + 1, width - 1)))
    return _finish_patch(d, height, width, cells, name=f"wide-d{d}")


# ---------------------------------------------------------------------------
# product and bicycle constructions
# ---------------------------------------------------------------------------


def hgp(A: ClassicalCode, B: ClassicalCode) -> CssCode:
    """Hypergraph product of two classical codes.

    Hx = (A o I, I o B^T), Hz = (I o B, A^T o I) with identities sized so
    the blocks match; n = n_A n_B + r_A r_B.
    """
    a, b = A.H, B.H
    ra, na = a.shape
    rb, nb = b.shape
    Hx = gf2.hstack([gf2.kron(a, BitMatrix.identity(nb)),
                     gf2.kron(BitMatrix.identity(ra), b.transpose())])
    Hz = gf2.hstack([gf2.kron(BitMatrix.identity(na), b),
                     gf2.kron(a.transpose(), BitMatrix.identity(rb))])
    n = na * nb + ra * rb
    k = n - gf2.rank(Hx) - gf2.rank(Hz)
    Lx, Lz = compute_logicals(Hx, Hz)
    code = CssCode(n=n, Hx=Hx, Hz=Hz, Lx=Lx, Lz=Lz, k=k, d_estimate="unknown",
                   name=f"hgp({A.name},{B.name})",
                   meta={"hgp_seeds": (A, B),
                         "total_qubits": (na + ra) * (nb + rb)})
    code.validate()
    return code


def circulant(l: int, exponents) -> BitMatrix:
    """l x l circulant: entry (i, j) = 1 iff (j - i) mod l is an exponent."""
    exps = sorted(set(int(e) for e in exponents))
    if any(e < 0 or e >= l for e in exps):
        raise ValueError(f"exponents must lie in [0, {l})")
    M = np.zeros((l, l), dtype=np.uint8)
    for i in range(l):
        for e in exps:
            M[i, (i + e) % l] = 1
    return BitMatrix(M)


def generalised_bicycle(C: BitMatrix, D: BitMatrix, name: str = "gb") -> CssCode:
    """Two-block code with Hx = (C, D), Hz = (D^T, C^T); needs CD = DC."""
    if C.shape != D.shape or C.rows != C.cols:
        raise ValueError("C and D must be square and equally sized")
    if gf2.matmul(C, D) != gf2.matmul(D, C):
        raise ValueError("C and D do not commute; CSS condition fails")
    l = C.rows
    Hx = gf2.hstack([C, D])
    Hz = gf2.hstack([D.transpose(), C.transpose()])
    n = 2 * l
    k = n - gf2.rank(Hx) - gf2.rank(Hz)
    Lx, Lz = compute_logicals(Hx, Hz)
    code = CssCode(n=n, Hx=Hx, Hz=Hz, Lx=Lx, Lz=Lz, k=k, d_estimate="unknown",
                   name=name, meta={"l": l})
    code.validate()
    return code


# Generator exponents for the [[126, 28]] generalised bicycle benchmark
# (code "A2"): a(x) = 1 + x + x^14 + x^16 + x^22 and
# b(x) = 1 + x^3 + x^13 + x^20 + x^42 over l = 63.  These are configuration
# data, validated on load by the n/k check in get_code.
A2_POLYNOMIALS = {"l": 63, "a": (0, 1, 14, 16, 22), "b": (0, 3, 13, 20, 42)}


# ---------------------------------------------------------------------------
# logical operators and distance
# ---------------------------------------------------------------------------


def compute_logicals(Hx: BitMatrix, Hz: BitMatrix):
    """Symplectically paired logical representatives (Lx, Lz).

    Lx rows span nullspace(Hz) modulo rowspace(Hx) and are paired so that
    Lx[i] anticommutes with Lz[j] exactly when i == j.
    """
    lx = _quotient_basis(Hz, Hx)
    lz = _quotient_basis(Hx, Hz)
    k = lx.shape[0]
    if k != lz.shape[0]:
        raise ValueError("logical space dimensions disagree")
    if k == 0:
        empty = BitMatrix.zeros(0, Hx.cols)
        return empty, empty
    # overlap matrix M[i, j] = <lx_i, lz_j>; make it the identity
    M = (lx.astype(np.int64) @ lz.T.astype(np.int64)) % 2
    lx, lz = _symplectic_pair(lx, lz, M.astype(np.uint8))
    return BitMatrix(lx), BitMatrix(lz)


def _quotient_basis(H_other: BitMatrix, H_same: BitMatrix) -> np.ndarray:
    """Basis rows of nullspace(H_other) that are independent of H_same's rows."""
    null = gf2.nullspace_basis(H_other).data
    stab = H_same.data
    rows = []
    base_rank = gf2.rank(stab)
    current = stab
    for v in null:
        candidate = np.vstack([current, v[None, :]])
        r = gf2.rank(candidate)
        if r > gf2.rank(current):
            rows.append(v)
            current = candidate
    del base_rank
    return np.array(rows, dtype=np.uint8) if rows else np.zeros((0, H_other.cols), np.uint8)


def _symplectic_pair(lx: np.ndarray, lz: np.ndarray, M: np.ndarray):
    """Row-reduce the anticommutation matrix M to the identity.

    Row operations act on lx, column operations on lz; both are GF(2)
    combinations of logical representatives, so the spans are unchanged.
    """
    lx = lx.copy()
    lz = lz.copy()
    M = M.copy()
    k = M.shape[0]
    for i in range(k):
        # find a pivot with M[r, c] = 1, move to (i, i)
        hits = np.argwhere(M[i:, i:] == 1)
        if hits.size == 0:
            raise ValueError("degenerate symplectic form on logical space")
        r, c = hits[0][0] + i, hits[0][1] + i
        if r != i:
            M[[i, r]] = M[[r, i]]
            lx[[i, r]] = lx[[r, i]]
        if c != i:
            M[:, [i, c]] = M[:, [c, i]]
            lz[[i, c]] = lz[[c, i]]
        for r2 in range(k):
            if r2 != i and M[r2, i]:
                M[r2] ^= M[i]
                lx[r2] ^= lx[i]
        for c2 in range(k):
            if c2 != i and M[i, c2]:
                M[:, c2] ^= M[:, i]
                lz[c2] ^= lz[i]
    return lx, lz


def _min_logical_exhaustive(H_other: BitMatrix, H_same: BitMatrix) -> int:
    """Exact minimum weight over nullspace(H_other) \\ rowspace(H_same)."""
    null = gf2.nullspace_basis(H_other).data
    dim = null.shape[0]
    best = None
    for mask in range(1, 1 << dim):
        v = np.zeros(null.shape[1], dtype=np.uint8)
        m = mask
        i = 0
        while m:
            if m & 1:
                v ^= null[i]
            m >>= 1
            i += 1
        w = int(v.sum())
        if (best is None or w < best) and not gf2.in_rowspace(v, H_same):
            best = w
    return best if best is not None else 0


def _min_logical_randomised(H_other: BitMatrix, H_same: BitMatrix,
                            trials: int, rng) -> int:
    """Information-set search for low-weight logicals; returns an upper bound."""
    null = gf2.nullspace_basis(H_other).data
    dim, n = null.shape
    # reduced echelon of the same-type stabilisers: membership in their
    # rowspace is a cheap reduction instead of a rank computation per
    # candidate
    stab = H_same.copy_array()
    stab_pivots = gf2._row_echelon(stab)
    stab = stab[:len(stab_pivots)]

    def is_logical(v):
        v = v.copy()
        for row, c in zip(stab, stab_pivots):
            if v[c]:
                v ^= row
        return bool(v.any())

    best = n + 1
    for row in null:
        w = int(row.sum())
        if w < best and is_logical(row):
            best = w
    for _ in range(trials):
        perm = rng.permutation(n)
        G = null[:, perm].copy()
        gf2._row_echelon(G)
        weights = G.sum(axis=1)
        order = np.argsort(weights, kind="stable")
        for idx in order:
            w = int(weights[idx])
            if w >= best:
                break
            v = np.zeros(n, dtype=np.uint8)
            v[perm] = G[idx]
            if is_logical(v):
                best = w
    return best


def estimate_distance(code: CssCode, budget: int = 1 << 24, trials: int = 2000,
                      seed: int = 0):
    """Minimum logical weight: exact by exhaustion when 2^dim fits in the
    budget, otherwise a randomized upper bound (flagged in the result)."""
    if code.k == 0:
        return {"distance": 0, "exact": True}
    dims = [code.n - gf2.rank(code.Hz), code.n - gf2.rank(code.Hx)]
    if all((1 << dim) <= budget for dim in dims):
        dx = _min_logical_exhaustive(code.Hz, code.Hx)
        dz = _min_logical_exhaustive(code.Hx, code.Hz)
        return {"distance": min(dx, dz), "dx": dx, "dz": dz, "exact": True}
    rng = np.random.default_rng(seed)
    dx = _min_logical_randomised(code.Hz, code.Hx, trials, rng)
    dz = _min_logical_randomised(code.Hx, code.Hz, trials, rng)
    return {"distance": min(dx, dz), "dx": dx, "dz": dz, "exact": False,
            "note": "upper bound"}


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------


def get_code(name: str) -> CssCode:
    """Named built-in codes: "rsc-d<d>", "wide-d<d>", "hgp-234-3-8", "gb-a2"."""
    if name.startswith("rsc-d"):
        return rotated_surface_code(int(name[len("rsc-d"):]))
    if name.startswith("wide-d"):
        return wide_surface_code(int(name[len("wide-d"):]))
    if name == "hgp-234-3-8":
        code = hgp(repetition_code(8), appendix_b_code())
        if (code.n, code.k) != (234, 3):
            raise ValueError("hgp-234-3-8 construction failed its n/k check")
        return code
    if name == "gb-a2":
        p = A2_POLYNOMIALS
        code = generalised_bicycle(circulant(p["l"], p["a"]),
                                   circulant(p["l"], p["b"]), name="gb-a2")
        if (code.n, code.k) != (126, 28):
            raise ValueError("gb-a2 polynomials failed the [[126,28]] check")
        return code
    raise KeyError(f"unknown code name: {name}")
