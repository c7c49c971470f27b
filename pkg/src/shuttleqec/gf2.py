"""Binary linear algebra over GF(2).

Everything in this package that touches a parity-check matrix goes through
the :class:`BitMatrix` type defined here.  Internally a matrix is a dense
``uint8`` numpy array holding 0/1 entries; all the paper's codes are small
enough (n < 10^4) that dense storage with vectorized XOR row operations is
both the simplest and the fastest option.

Gaussian elimination always pivots on the leftmost nonzero column using the
first available row, so ranks, nullspaces and solutions are deterministic
and reproducible across runs.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "BitMatrix",
    "rank",
    "nullspace_basis",
    "matmul",
    "transpose",
    "kron",
    "hstack",
    "vstack",
    "solve_affine",
    "in_rowspace",
]


class BitMatrix:
    """A matrix over GF(2).

    Construct from a dense 0/1 array, or from an explicit entry set with
    :meth:`from_entries`.  Instances are treated as immutable: every
    operation returns a fresh matrix and ``data`` is flagged read-only.
    """

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.array(data, dtype=np.uint8) % 2
        if arr.ndim != 2:
            raise ValueError(f"BitMatrix needs a 2-D array, got shape {arr.shape}")
        arr.setflags(write=False)
        self.data = arr

    # -- constructors -------------------------------------------------

    @classmethod
    def from_entries(cls, rows: int, cols: int, entries) -> "BitMatrix":
        """Build from an iterable of (row, col) positions holding a 1."""
        arr = np.zeros((rows, cols), dtype=np.uint8)
        for r, c in entries:
            if not (0 <= r < rows and 0 <= c < cols):
                raise ValueError(f"entry ({r}, {c}) outside {rows}x{cols}")
            arr[r, c] = 1
        return cls(arr)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(np.zeros((rows, cols), dtype=np.uint8))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(np.eye(n, dtype=np.uint8))

    # -- basic protocol ----------------------------------------------

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape

    @property
    def entries(self):
        """Set of (row, col) positions with value 1."""
        return {(int(r), int(c)) for r, c in zip(*np.nonzero(self.data))}

    def __eq__(self, other):
        return isinstance(other, BitMatrix) and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.shape, self.data.tobytes()))

    def __repr__(self):
        return f"BitMatrix({self.rows}x{self.cols}, {int(self.data.sum())} ones)"

    def copy_array(self) -> np.ndarray:
        """Writable copy of the underlying array."""
        return self.data.copy()

    # -- operations ---------------------------------------------------

    def transpose(self) -> "BitMatrix":
        return BitMatrix(self.data.T)

    def permute_rows(self, perm) -> "BitMatrix":
        perm = np.asarray(perm)
        if sorted(perm.tolist()) != list(range(self.rows)):
            raise ValueError("not a permutation of row indices")
        return BitMatrix(self.data[perm])

    def permute_cols(self, perm) -> "BitMatrix":
        perm = np.asarray(perm)
        if sorted(perm.tolist()) != list(range(self.cols)):
            raise ValueError("not a permutation of column indices")
        return BitMatrix(self.data[:, perm])

    # -- serialization ------------------------------------------------

    def to_text(self) -> str:
        """Plain-text format: first line "rows cols", then "r c" per one."""
        lines = [f"{self.rows} {self.cols}"]
        for r, c in sorted(self.entries):
            lines.append(f"{r} {c}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BitMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty matrix file")
        rows, cols = (int(tok) for tok in lines[0].split())
        entries = []
        for ln in lines[1:]:
            r, c = (int(tok) for tok in ln.split())
            entries.append((r, c))
        return cls.from_entries(rows, cols, entries)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "BitMatrix":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def _as_array(M) -> np.ndarray:
    return M.data if isinstance(M, BitMatrix) else (np.asarray(M, dtype=np.uint8) % 2)


def _row_echelon(A: np.ndarray):
    """In-place forward elimination; returns (pivot column list).

    Pivot selection is deterministic: leftmost nonzero column, first row
    with a 1 in it among the remaining rows.
    """
    n_rows, n_cols = A.shape
    pivots = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        hits = np.nonzero(A[r:, c])[0]
        if hits.size == 0:
            continue
        pr = r + int(hits[0])
        if pr != r:
            A[[r, pr]] = A[[pr, r]]
        # clear every other 1 in this column (full reduction)
        mask = A[:, c].copy()
        mask[r] = 0
        A[mask == 1] ^= A[r]
        pivots.append(c)
        r += 1
    return pivots


def rank(M) -> int:
    """GF(2) row rank."""
    A = _as_array(M).copy()
    return len(_row_echelon(A))


def nullspace_basis(M) -> BitMatrix:
    """Rows form a basis of {v : M v = 0}; row count = cols - rank(M)."""
    A = _as_array(M).copy()
    n_cols = A.shape[1]
    pivots = _row_echelon(A)
    free = [c for c in range(n_cols) if c not in set(pivots)]
    basis = np.zeros((len(free), n_cols), dtype=np.uint8)
    for i, fc in enumerate(free):
        basis[i, fc] = 1
        # pivot rows are fully reduced, so each pivot variable reads off
        # directly from the free column's entry in its row
        for r, pc in enumerate(pivots):
            basis[i, pc] = A[r, fc]
    return BitMatrix(basis)


def matmul(A, B) -> BitMatrix:
    a, b = _as_array(A), _as_array(B)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return BitMatrix((a.astype(np.int64) @ b.astype(np.int64)) % 2)


def transpose(M) -> BitMatrix:
    return BitMatrix(_as_array(M).T)


def kron(A, B) -> BitMatrix:
    return BitMatrix(np.kron(_as_array(A), _as_array(B)))


def hstack(blocks) -> BitMatrix:
    arrs = [_as_array(M) for M in blocks]
    if len({a.shape[0] for a in arrs}) > 1:
        raise ValueError("hstack: row counts differ")
    return BitMatrix(np.hstack(arrs))


def vstack(blocks) -> BitMatrix:
    arrs = [_as_array(M) for M in blocks]
    if len({a.shape[1] for a in arrs}) > 1:
        raise ValueError("vstack: column counts differ")
    return BitMatrix(np.vstack(arrs))


def solve_affine(M, s):
    """Return x with M x = s (mod 2), or None when the system is inconsistent."""
    A = _as_array(M).copy()
    rhs = np.asarray(s, dtype=np.uint8).ravel() % 2
    if rhs.size != A.shape[0]:
        raise ValueError("right-hand side length must equal row count")
    n_rows, n_cols = A.shape
    aug = np.hstack([A, rhs[:, None]])
    pivots = _row_echelon(aug)
    if pivots and pivots[-1] == n_cols:
        return None  # a row reduced to (0 ... 0 | 1)
    x = np.zeros(n_cols, dtype=np.uint8)
    for r, c in enumerate(pivots):
        x[c] = aug[r, n_cols]
    return x


def in_rowspace(v, M) -> bool:
    """True when v is a GF(2) linear combination of M's rows."""
    A = _as_array(M)
    vec = np.asarray(v, dtype=np.uint8).ravel()[None, :] % 2
    return rank(np.vstack([A, vec])) == rank(A)
