"""Decoders: exact MWPM for matchable models, min-sum BP-OSD for general
qLDPC models, and an exhaustive maximum-likelihood oracle for tiny models.

MWPM precomputes all-pairs shortest paths on the detector graph once per
model; per-shot work is a blossom matching (networkx, exact) on the small
complete graph of flagged detectors plus boundary copies.  Faults flipping
three or four detectors (circuit-level hook errors) are decomposed into
existing two-detector edges before graph construction, the standard edge
decomposition; genuinely undecomposable models raise and point to BP-OSD.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*a, **k):
        def wrap(f):
            return f
        return wrap if not (len(a) == 1 and callable(a[0])) else a[0]


__all__ = [
    "MatchingGraph",
    "mwpm_decode",
    "dem_to_matrices",
    "bposd_decode",
    "exhaustive_decode",
]

_BOUNDARY = -1


def _xor_p(p, q):
    return p + q - 2.0 * p * q


def _decompose(dets, obs, base):
    """Split a 3- or 4-detector fault into existing edges.

    Candidate splits pair up the detectors (odd one out goes to the
    boundary); a split is valid when every component is already an edge.
    Splits whose combined observable signature matches the fault's are
    preferred."""
    def edge(u, v):
        return (min(u, v), max(u, v))

    cands = []
    ds = list(dets)
    if len(ds) == 3:
        for i in range(3):
            rest = [d for d in ds if d != ds[i]]
            cands.append([edge(_BOUNDARY, ds[i]), edge(*rest)])
    elif len(ds) == 4:
        a, b, c, d = ds
        cands = [[edge(a, b), edge(c, d)],
                 [edge(a, c), edge(b, d)],
                 [edge(a, d), edge(b, c)]]
        for i in range(4):
            for j in range(i + 1, 4):
                rest = [x for k, x in enumerate(ds) if k not in (i, j)]
                cands.append([edge(_BOUNDARY, ds[i]), edge(_BOUNDARY, ds[j]),
                              edge(*rest)])
    else:
        return None
    valid = [parts for parts in cands if all(p in base for p in parts)]
    if not valid:
        return None
    target = set(obs)
    for parts in valid:
        acc = set()
        for p in parts:
            acc ^= set(base[p][1])
        if acc == target:
            return parts
    return valid[0]


class MatchingGraph:
    """Edge-weighted detector graph with a boundary node, reusable across
    shots.  Build once per DEM with :meth:`from_dem`."""

    def __init__(self, n_detectors, n_observables, edges):
        # edges: {(u, v): (p, obs_tuple)} with u < v, boundary = _BOUNDARY
        self.n_detectors = n_detectors
        self.n_observables = n_observables
        self.edges = edges
        self._prepare()

    @staticmethod
    def from_dem(dem) -> "MatchingGraph":
        base = {}

        def add(u, v, p, obs):
            key = (min(u, v), max(u, v))
            if key in base:
                p0, obs0 = base[key]
                # keep the dominant contributor's observable signature
                obs_kept = obs0 if p0 >= p else obs
                base[key] = (_xor_p(p0, p), obs_kept)
            else:
                base[key] = (p, tuple(obs))

        two_det = []
        multi = []
        for p, dets, obs in dem.faults:
            if len(dets) == 0:
                # pure observable flip with no syndrome: undecodable noise
                # floor; ignored by matching (no information)
                continue
            if len(dets) == 1:
                two_det.append((p, (_BOUNDARY, dets[0]), obs))
            elif len(dets) == 2:
                two_det.append((p, dets, obs))
            else:
                multi.append((p, dets, obs))
        for p, dets, obs in two_det:
            add(dets[0], dets[1], p, obs)
        # decompose hook faults into existing edges
        for p, dets, obs in multi:
            parts = _decompose(dets, obs, base)
            if parts is None:
                raise ValueError(
                    f"fault on detectors {dets} is not decomposable into "
                    "matching-graph edges; use bposd_decode for this model")
            for key in parts:
                p0, obs0 = base[key]
                base[key] = (_xor_p(p0, p), obs0)
        return MatchingGraph(dem.n_detectors, dem.n_observables, base)

    def _prepare(self):
        nd = self.n_detectors
        b = nd  # boundary mapped to index nd in the dense graph
        rows, cols, ws = [], [], []
        self._weight = {}
        for (u, v), (p, obs) in self.edges.items():
            p = min(max(p, 1e-12), 1 - 1e-12)
            w = math.log((1 - p) / p)
            w = max(w, 0.0)
            ui = b if u == _BOUNDARY else u
            rows.append(ui)
            cols.append(v)
            ws.append(w)
            self._weight[(u, v)] = (w, obs)
        g = csr_matrix((ws, (rows, cols)), shape=(nd + 1, nd + 1))
        dist, pred = dijkstra(g, directed=False, return_predecessors=True)
        self._dist = dist
        self._pred = pred

    def _path_obs(self, u, v):
        """Observable parity along the shortest u-v path."""
        obs = np.zeros(self.n_observables, dtype=np.uint8)
        cur = v
        while cur != u:
            prv = self._pred[u, cur]
            if prv < 0:
                raise ValueError("detector graph is disconnected")
            a, bb = (prv, cur)
            a = _BOUNDARY if a == self.n_detectors else a
            bb = _BOUNDARY if bb == self.n_detectors else bb
            key = (min(a, bb), max(a, bb))
            for o in self._weight[key][1]:
                obs[o] ^= 1
            cur = prv
        return obs

    def decode(self, syndrome) -> np.ndarray:
        flagged = [int(d) for d in np.nonzero(np.asarray(syndrome))[0]]
        obs = np.zeros(self.n_observables, dtype=np.uint8)
        if not flagged:
            return obs
        bnode = self.n_detectors
        m = len(flagged)
        g = nx.Graph()
        big = 0.0
        for i in range(m):
            for j in range(i + 1, m):
                w = self._dist[flagged[i], flagged[j]]
                if np.isfinite(w):
                    big = max(big, w)
            w = self._dist[flagged[i], bnode]
            if np.isfinite(w):
                big = max(big, w)
        big += 1.0
        for i in range(m):
            for j in range(i + 1, m):
                w = self._dist[flagged[i], flagged[j]]
                if np.isfinite(w):
                    g.add_edge(("d", i), ("d", j), weight=big - w)
            w = self._dist[flagged[i], bnode]
            if np.isfinite(w):
                g.add_edge(("d", i), ("b", i), weight=big - w)
            for j in range(i):
                g.add_edge(("b", i), ("b", j), weight=big)
        match = nx.max_weight_matching(g, maxcardinality=True)
        for a, bb in match:
            if a[0] == "b" and bb[0] == "b":
                continue
            if a[0] == "b" or bb[0] == "b":
                det = flagged[a[1] if a[0] == "d" else bb[1]]
                obs ^= self._path_obs(det, bnode)
            else:
                obs ^= self._path_obs(flagged[a[1]], flagged[bb[1]])
        return obs


def mwpm_decode(dem, syndrome, graph: MatchingGraph = None) -> np.ndarray:
    """Predicted observable flips for one syndrome.  Pass a prebuilt
    ``graph`` when decoding many shots of the same model."""
    if graph is None:
        graph = MatchingGraph.from_dem(dem)
    return graph.decode(syndrome)


# ---------------------------------------------------------------------------
# BP-OSD
# ---------------------------------------------------------------------------


def dem_to_matrices(dem):
    """(check matrix, observable matrix, priors) in dense uint8 form."""
    nf = len(dem.faults)
    H = np.zeros((dem.n_detectors, nf), dtype=np.uint8)
    O = np.zeros((dem.n_observables, nf), dtype=np.uint8)
    priors = np.zeros(nf)
    for j, (p, dets, obs) in enumerate(dem.faults):
        priors[j] = p
        for d in dets:
            H[d, j] = 1
        for o in obs:
            O[o, j] = 1
    return H, O, priors


@njit(cache=True)
def _minsum_serial(chk_ptr, chk_idx, llr0, syn_sign, max_iter, scale, clip):
    """Serial (check-by-check, ascending) min-sum BP.

    Returns (posterior LLRs, hard decisions, converged flag)."""
    n_chk = chk_ptr.size - 1
    nv = llr0.size
    # check-to-variable messages, aligned with chk_idx
    msg = np.zeros(chk_idx.size)
    lam = llr0.copy()
    hard = np.zeros(nv, dtype=np.uint8)
    for _ in range(max_iter):
        for c in range(n_chk):
            s, e = chk_ptr[c], chk_ptr[c + 1]
            # variable-to-check extrinsic values
            sign = syn_sign[c]
            min1 = 1e30
            min2 = 1e30
            arg1 = -1
            for t in range(s, e):
                v = chk_idx[t]
                q = lam[v] - msg[t]
                if q < 0:
                    sign = -sign
                aq = abs(q)
                if aq < min1:
                    min2 = min1
                    min1 = aq
                    arg1 = t
                elif aq < min2:
                    min2 = aq
            for t in range(s, e):
                v = chk_idx[t]
                q = lam[v] - msg[t]
                mag = min2 if t == arg1 else min1
                local = sign if q >= 0 else -sign
                new = scale * local * mag
                if new > clip:
                    new = clip
                elif new < -clip:
                    new = -clip
                lam[v] = q + new
                if lam[v] > clip:
                    lam[v] = clip
                elif lam[v] < -clip:
                    lam[v] = -clip
                msg[t] = new
        for v in range(nv):
            hard[v] = 1 if lam[v] < 0 else 0
        ok = True
        for c in range(n_chk):
            par = 0
            for t in range(chk_ptr[c], chk_ptr[c + 1]):
                par ^= hard[chk_idx[t]]
            if par != (0 if syn_sign[c] > 0 else 1):
                ok = False
                break
        if ok:
            return lam, hard, True
    return lam, hard, False


@njit(cache=True)
def _gf2_solve_packed(A, s):
    """In-place Gauss-Jordan over rows packed 8 columns/byte, 8 bytes/word.

    Returns the pivot column of each row (-1 where rank ran out) or a first
    element of -2 when the system is inconsistent.
    """
    m, w = A.shape
    n = w * 64
    piv_col = np.full(m, -1, dtype=np.int64)
    r = 0
    for c in range(n):
        word = c >> 6
        shift = np.uint64(((c >> 3) & 7) * 8 + (7 - (c & 7)))
        mask = np.uint64(1) << shift
        sel = -1
        for rr in range(r, m):
            if A[rr, word] & mask:
                sel = rr
                break
        if sel < 0:
            continue
        if sel != r:
            for j in range(w):
                A[r, j], A[sel, j] = A[sel, j], A[r, j]
            s[r], s[sel] = s[sel], s[r]
        for rr in range(m):
            if rr != r and (A[rr, word] & mask):
                for j in range(w):
                    A[rr, j] ^= A[r, j]
                s[rr] ^= s[r]
        piv_col[r] = c
        r += 1
        if r == m:
            break
    for rr in range(r, m):
        if s[rr]:
            piv_col[0] = -2
            break
    return piv_col


def _osd0(H, llr, syndrome):
    """Order-0 ordered-statistics post-processing over BP soft output."""
    nv = H.shape[1]
    order = np.lexsort((np.arange(nv), llr))  # least reliable first
    A = np.ascontiguousarray(H[:, order], dtype=np.uint8)
    s = syndrome.astype(np.uint8).copy()
    m = A.shape[0]
    nw = -(-nv // 64) * 64
    packed = np.packbits(A, axis=1)
    if packed.shape[1] < nw // 8:
        pad = np.zeros((m, nw // 8 - packed.shape[1]), dtype=np.uint8)
        packed = np.hstack([packed, pad])
    words = np.ascontiguousarray(packed).view(np.uint64).reshape(m, nw // 64)
    piv_col = _gf2_solve_packed(words, s)
    if piv_col[0] == -2:
        return None
    e = np.zeros(nv, dtype=np.uint8)
    for rr in range(m):
        c = piv_col[rr]
        if c < 0:
            break
        if s[rr]:
            e[order[c]] = 1
    return e


def _osd0_ref(H, llr, syndrome):
    """Plain uint8 elimination; slow reference for the packed solver."""
    nv = H.shape[1]
    order = np.lexsort((np.arange(nv), llr))  # least reliable first
    A = H[:, order].astype(np.uint8)
    s = syndrome.astype(np.uint8).copy()
    m, n = A.shape
    piv_rows = []
    piv_cols = []
    r = 0
    for c in range(n):
        sel = None
        for rr in range(r, m):
            if A[rr, c]:
                sel = rr
                break
        if sel is None:
            continue
        if sel != r:
            A[[r, sel]] = A[[sel, r]]
            s[r], s[sel] = s[sel], s[r]
        for rr in range(m):
            if rr != r and A[rr, c]:
                A[rr] ^= A[r]
                s[rr] ^= s[r]
        piv_rows.append(r)
        piv_cols.append(c)
        r += 1
        if r == m:
            break
    # consistency: zero rows must have zero syndrome
    if any(s[rr] for rr in range(r, m)):
        return None
    e = np.zeros(nv, dtype=np.uint8)
    for rr, c in zip(piv_rows, piv_cols):
        if s[rr]:
            e[order[c]] = 1
    return e


def bposd_decode(H, priors, syndrome, observables=None,
                 max_iter: int = 32, scale: float = 0.625,
                 clip: float = 30.0):
    """Min-sum BP with serial schedule, OSD-0 fallback.

    Returns a dict with the fault estimate ``e`` (satisfying H e = s when
    satisfiable), ``converged``, ``satisfiable``, and — when an observable
    matrix is given — ``obs_flips``.
    """
    H = np.asarray(getattr(H, "data", H), dtype=np.uint8)
    priors = np.asarray(priors, dtype=float)
    syndrome = np.asarray(syndrome, dtype=np.uint8)
    nv = H.shape[1]
    p = np.clip(priors, 1e-12, 1 - 1e-12)
    llr0 = np.log((1 - p) / p)
    # CSR-like check adjacency
    chk_lists = [np.nonzero(H[c])[0] for c in range(H.shape[0])]
    chk_ptr = np.zeros(H.shape[0] + 1, dtype=np.int64)
    for c, lst in enumerate(chk_lists):
        chk_ptr[c + 1] = chk_ptr[c] + lst.size
    chk_idx = (np.concatenate(chk_lists) if chk_lists
               else np.zeros(0, dtype=np.int64)).astype(np.int64)
    syn_sign = np.where(syndrome > 0, -1.0, 1.0)
    lam, hard, converged = _minsum_serial(chk_ptr, chk_idx, llr0, syn_sign,
                                          max_iter, scale, clip)
    satisfiable = True
    if converged:
        e = hard
    else:
        e = _osd0(H, lam, syndrome)
        if e is None:
            satisfiable = False
            e = np.zeros(nv, dtype=np.uint8)
    out = {"e": e, "converged": bool(converged), "satisfiable": satisfiable}
    if observables is not None:
        O = np.asarray(getattr(observables, "data", observables),
                       dtype=np.uint8)
        out["obs_flips"] = (O @ e) % 2
    return out


# ---------------------------------------------------------------------------
# exhaustive maximum-likelihood oracle
# ---------------------------------------------------------------------------


def exhaustive_decode(dem, syndrome) -> np.ndarray:
    """Exact ML observable prediction by summing over all fault subsets."""
    nf = len(dem.faults)
    if nf > 22:
        raise ValueError("exhaustive decoding limited to 22 faults")
    nd, no = dem.n_detectors, dem.n_observables
    if nd + no > 63:
        raise ValueError("exhaustive decoding limited to 63 detector+"
                         "observable bits")
    masks = np.zeros(1 << nf, dtype=np.uint64)
    logp = np.zeros(1 << nf)
    base = 0.0
    for j, (p, dets, obs) in enumerate(dem.faults):
        m = 0
        for d in dets:
            m |= 1 << d
        for o in obs:
            m |= 1 << (nd + o)
        base += math.log1p(-p)
        half = 1 << j
        masks[half:2 * half] = masks[:half] ^ np.uint64(m)
        logp[half:2 * half] = logp[:half] + (math.log(p) - math.log1p(-p))
    syn_mask = 0
    for d in np.nonzero(np.asarray(syndrome))[0]:
        syn_mask |= 1 << int(d)
    det_bits = np.uint64((1 << nd) - 1)
    sel = (masks & det_bits) == np.uint64(syn_mask)
    if not sel.any():
        raise ValueError("syndrome not producible by this fault set")
    obs_part = (masks[sel] >> np.uint64(nd)).astype(np.int64)
    weights = np.exp(logp[sel] + base)
    totals = np.bincount(obs_part, weights=weights, minlength=1 << no)
    best = int(np.argmax(totals))
    return np.array([(best >> o) & 1 for o in range(no)], dtype=np.uint8)
