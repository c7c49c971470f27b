"""Detector error models by symbolic Pauli propagation, and Monte Carlo
sampling.

A single backward pass over the circuit maintains, per qubit, the set of
detectors and observables that an X (resp. Z) error at that moment would
flip, encoded as integer bitmasks.  Each Pauli term of each noise channel
then reads off its signature in O(1), and sampling reduces to independent
Bernoulli draws XORed together.  Ancilla qubits are effective single-qubit
stand-ins for singlet-triplet pairs: their INIT/MEAS work in the X
eigenbasis, so a phase kick (Z) flips the outcome like a singlet turning
into a triplet.

Detectors follow the standard memory-experiment closure: the tracked check
type is compared between consecutive rounds, with an absolute first-round
detector (the initial product state stabilises those checks) and a final
layer reconstructed from the transversal data measurement.  Only the
tracked check type generates detectors; the dual experiment swaps roles.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DetectorErrorModel",
    "SampleBatch",
    "build_dem",
    "sample",
    "inject_and_check",
]

_MAGIC = 0xD3


@dataclass(frozen=True)
class DetectorErrorModel:
    """Merged fault list: (probability, detector ids, observable ids)."""

    n_detectors: int
    n_observables: int
    faults: tuple  # of (p, dets tuple, obs tuple)
    provenance: tuple = ()  # per fault: tuple of contributing op locations

    def __post_init__(self):
        for p, dets, obs in self.faults:
            if not 0.0 < p < 1.0:
                raise ValueError(f"fault probability {p} outside (0, 1)")
            if not dets and not obs:
                raise ValueError("trivial fault not pruned")

    def to_text(self) -> str:
        lines = [f"dem {self.n_detectors} {self.n_observables}"]
        for p, dets, obs in self.faults:
            line = f"{p!r} " + " ".join(str(d) for d in dets)
            line += " | " + " ".join(str(o) for o in obs)
            lines.append(" ".join(line.split()))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "DetectorErrorModel":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        _, nd, no = lines[0].split()
        faults = []
        for ln in lines[1:]:
            head, _, tail = ln.partition("|")
            parts = head.split()
            p = float(parts[0])
            dets = tuple(int(x) for x in parts[1:])
            obs = tuple(int(x) for x in tail.split())
            faults.append((p, dets, obs))
        return DetectorErrorModel(int(nd), int(no), tuple(faults))

    def max_detectors_per_fault(self) -> int:
        return max((len(d) for _, d, _ in self.faults), default=0)


@dataclass(frozen=True)
class SampleBatch:
    shots: int
    syndromes: np.ndarray         # shots x n_detectors, uint8
    observable_flips: np.ndarray  # shots x n_observables, uint8
    seed: int

    def __post_init__(self):
        if self.syndromes.shape[0] != self.shots \
                or self.observable_flips.shape[0] != self.shots:
            raise ValueError("batch dimensions inconsistent")

    def save(self, path) -> None:
        n_det = self.syndromes.shape[1]
        n_obs = self.observable_flips.shape[1]
        header = struct.pack("<BIHB", _MAGIC, self.shots, n_det, n_obs)
        bits = np.concatenate([self.syndromes, self.observable_flips], axis=1)
        with open(path, "wb") as f:
            f.write(header)
            f.write(np.packbits(bits, axis=1).tobytes())

    @staticmethod
    def load(path) -> "SampleBatch":
        with open(path, "rb") as f:
            header = f.read(8)
            if len(header) != 8:
                raise ValueError("truncated sample file header")
            magic, shots, n_det, n_obs = struct.unpack("<BIHB", header)
            if magic != _MAGIC:
                raise ValueError("bad sample file magic")
            raw = np.frombuffer(f.read(), dtype=np.uint8)
        ncols = n_det + n_obs
        row_bytes = (ncols + 7) // 8
        bits = np.unpackbits(raw.reshape(shots, row_bytes), axis=1)[:, :ncols]
        return SampleBatch(shots, bits[:, :n_det].copy(),
                           bits[:, n_det:].copy(), seed=-1)


# ---------------------------------------------------------------------------
# DEM construction
# ---------------------------------------------------------------------------


def _measurement_masks(c, experiment):
    """Forward scan: detector/observable bitmask per measurement op index.

    Returns (masks dict op_index -> int, n_detectors, n_observables)."""
    code = c.meta["code"]
    rounds = c.meta["rounds"]
    kinds = c.meta["kinds"]
    tracked = "X" if experiment == "memory-Z-errors" else "Z"
    H = code.Hx if tracked == "X" else code.Hz
    L = code.Lx if tracked == "X" else code.Lz
    n = code.n
    # check index of each tracked-kind ancilla qubit
    check_of = {}
    ci = 0
    for j, kind in enumerate(kinds):
        if kind == tracked:
            check_of[n + j] = ci
            ci += 1
    n_checks = ci
    n_det = (rounds + 1) * n_checks
    n_obs = L.rows

    def det_bit(r, chk):
        return 1 << (r * n_checks + chk)

    Hd = H.data
    Ld = L.data
    masks = {}
    for i, op in enumerate(c.ops):
        if op.name != "MEAS_Z":
            continue
        q = op.targets[0]
        if c.rails[q] == "ancilla":
            if q not in check_of:
                masks[i] = 0
                continue
            # round index from the tag "X-round{r}" / "Z-round{r}"
            r = int(op.tag.split("round")[1])
            m = det_bit(r, check_of[q])
            if r + 1 <= rounds:
                m |= det_bit(r + 1, check_of[q])
            masks[i] = m
        else:
            m = 0
            for chk in np.nonzero(Hd[:, q])[0]:
                m |= det_bit(rounds, int(chk))
            for j in np.nonzero(Ld[:, q])[0]:
                m |= 1 << (n_det + int(j))
            masks[i] = m
    return masks, n_det, n_obs


def build_dem(nc, experiment: str = None, rounds: int = None
              ) -> DetectorErrorModel:
    """Propagate every Pauli term of every channel to its signature."""
    c = nc.base
    if experiment is None:
        experiment = c.meta["experiment"]
    elif experiment != c.meta.get("experiment", experiment):
        raise ValueError("experiment does not match the synthesized circuit")
    if rounds is not None and rounds != c.meta.get("rounds", rounds):
        raise ValueError("rounds does not match the synthesized circuit")
    meas_masks, n_det, n_obs = _measurement_masks(c, experiment)

    # channels grouped by anchor location
    by_loc = {}
    for ch in nc.channels:
        by_loc.setdefault(ch.location, []).append(ch)

    nq = c.n_qubits
    xs = [0] * nq  # mask flipped by an X error on q at the current moment
    zs = [0] * nq
    raw = {}        # mask -> [probabilities]
    origins = {}    # mask -> set of locations

    def record(p, mask, loc):
        if p <= 0.0 or mask == 0:
            return
        raw.setdefault(mask, []).append(p)
        origins.setdefault(mask, set()).add(loc)

    for i in range(len(c.ops) - 1, -1, -1):
        op = c.ops[i]
        # channels anchored here act after op i in forward time, which is
        # exactly the current backward-pass state
        for ch in by_loc.get(i, ()):
            if ch.kind == "measurement-flip":
                record(ch.probability, meas_masks.get(i, 0), i)
            elif ch.kind == "dephasing-Z":
                record(ch.probability, zs[ch.qubits[0]], i)
            elif ch.kind == "depolarising-1q":
                q = ch.qubits[0]
                for m in (xs[q], zs[q], xs[q] ^ zs[q]):
                    record(ch.probability / 3.0, m, i)
            elif ch.kind == "depolarising-2q":
                a, b = ch.qubits
                one = [0, xs[a], zs[a], xs[a] ^ zs[a]]
                two = [0, xs[b], zs[b], xs[b] ^ zs[b]]
                for pa in range(4):
                    for pb in range(4):
                        if pa == pb == 0:
                            continue
                        record(ch.probability / 15.0, one[pa] ^ two[pb], i)
            else:
                raise ValueError(f"unknown channel kind {ch.kind}")
        # backward transform of op i
        name = op.name
        if name == "CZ":
            a, b = op.targets
            xs[a] ^= zs[b]
            xs[b] ^= zs[a]
        elif name == "H_SEMIGLOBAL":
            rail = op.targets[0] if op.targets else "data"
            for q in range(nq):
                if c.rails[q] == rail:
                    xs[q], zs[q] = zs[q], xs[q]
        elif name == "H":
            q = op.targets[0]
            xs[q], zs[q] = zs[q], xs[q]
        elif name == "CNOT":
            cq, t = op.targets
            xs[cq] ^= xs[t]
            zs[t] ^= zs[cq]
        elif name in ("S", "S_DAG"):
            xs[op.targets[0]] ^= zs[op.targets[0]]
        elif name == "INIT_Z":
            q = op.targets[0]
            xs[q] = zs[q] = 0
        elif name == "MEAS_Z":
            q = op.targets[0]
            m = meas_masks.get(i, 0)
            if c.rails[q] == "ancilla":
                xs[q], zs[q] = 0, m  # X-basis readout of the effective pair
            else:
                xs[q], zs[q] = m, 0
        elif name in ("INIT_SINGLET", "MEAS_ST"):
            raise ValueError("lower singlet-triplet pairs before sampling")
        # TICK / SHUTTLE / IDLE: no transform

    # merge identical signatures: p (+) q = p + q - 2pq
    items = []
    for mask, probs in raw.items():
        p = 0.0
        for q in probs:
            p = p + q - 2.0 * p * q
        dets = tuple(b for b in range(n_det) if (mask >> b) & 1)
        obs = tuple(b for b in range(n_obs) if (mask >> (n_det + b)) & 1)
        items.append((p, dets, obs, tuple(sorted(origins[mask]))))
    items.sort(key=lambda t: (t[1], t[2]))
    faults = tuple((p, d, o) for p, d, o, _ in items)
    prov = tuple(src for _, _, _, src in items)
    return DetectorErrorModel(n_det, n_obs, faults, prov)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _default_workers():
    try:
        return max(1, int(os.environ.get("SHUTTLEQEC_WORKERS", "1")))
    except ValueError:
        return 1


def sample(dem: DetectorErrorModel, shots: int, seed: int,
           workers: int = None) -> SampleBatch:
    """Monte Carlo sampling, bit-identical for any worker partitioning.

    Each fault owns a counter-based Philox substream keyed by (seed, fault
    index); a shot range [a, b) reads positions a..b of every substream, so
    results are independent of how shots are split across workers.
    """
    if shots < 1:
        raise ValueError("shots >= 1")
    if workers is None:
        workers = _default_workers()
    syn = np.zeros((shots, dem.n_detectors), dtype=np.uint8)
    obs = np.zeros((shots, dem.n_observables), dtype=np.uint8)
    bounds = np.linspace(0, shots, max(1, workers) + 1, dtype=int)
    for a, b in zip(bounds[:-1], bounds[1:]):
        if b <= a:
            continue
        _sample_range(dem, seed, int(a), int(b), syn, obs)
    return SampleBatch(shots, syn, obs, seed)


def _uniforms(seed, fault, a, b):
    """splitmix64 hash of (seed, fault, shot) -> uniforms in [0, 1).

    A stateless counter-based stream: shot s always reads the same value no
    matter how the shot range is partitioned."""
    x = np.arange(a, b, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x * np.uint64(0x9E3779B97F4A7C15)
        z += np.uint64((seed & 0xFFFFFFFFFFFFFFFF) * 0xBF58476D1CE4E5B9
                       & 0xFFFFFFFFFFFFFFFF)
        z += np.uint64(fault * 0x94D049BB133111EB & 0xFFFFFFFFFFFFFFFF)
        z ^= z >> np.uint64(30)
        z *= np.uint64(0xBF58476D1CE4E5B9)
        z ^= z >> np.uint64(27)
        z *= np.uint64(0x94D049BB133111EB)
        z ^= z >> np.uint64(31)
    return (z >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


def _sample_range(dem, seed, a, b, syn, obs):
    for j, (p, dets, oset) in enumerate(dem.faults):
        hit = _uniforms(seed, j, a, b) < p
        for d in dets:
            syn[a:b, d] ^= hit
        for o in oset:
            obs[a:b, o] ^= hit


def inject_and_check(dem: DetectorErrorModel, fault_indices):
    """Deterministic signature of an explicit fault set (XOR of faults)."""
    syn = np.zeros(dem.n_detectors, dtype=np.uint8)
    obs = np.zeros(dem.n_observables, dtype=np.uint8)
    for j in fault_indices:
        p, dets, oset = dem.faults[j]
        for d in dets:
            syn[d] ^= 1
        for o in oset:
            obs[o] ^= 1
    return syn, obs
