"""Clifford circuit IR for the two-rail device, plus synthesizers.

Device constraints baked into the IR: single-qubit Hadamards exist only as
semi-global pulses on the whole data rail; two-qubit gates are CZs between
one ancilla-rail and one data-rail qubit, valid only when the cumulative
shuttle offset aligns them; ancillas are singlet-triplet pairs in hardware.
For Monte Carlo work each singlet-triplet pair is lowered to one effective
ancilla qubit whose INIT/MEAS act in the X eigenbasis (a phase kick flips
the outcome, exactly like a singlet turning into a triplet); the real
two-spin physics is exercised by the statevector oracle on small fragments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import codes as codes_mod
from . import layout as layout_mod

__all__ = [
    "Op",
    "Circuit",
    "StateVector",
    "ket",
    "SINGLET",
    "TRIPLET",
    "stabiliser_template",
    "synth_surface_cycle",
    "synth_qldpc_cycle",
    "validate_constraints",
    "statevector_check",
]

# operations a synthesized circuit may contain
ALLOWED_OPS = {
    "INIT_Z", "INIT_SINGLET", "MEAS_Z", "MEAS_ST", "CZ", "H_SEMIGLOBAL",
    "S", "S_DAG", "SHUTTLE", "IDLE", "TICK",
}


@dataclass(frozen=True)
class Op:
    """One operation; ``targets`` are qubit indices except for SHUTTLE
    (signed offset) and H_SEMIGLOBAL (rail name).  ``tag`` carries layer
    annotations (set1, set2, twirl, round markers); ``cancelled_for`` on an
    H_SEMIGLOBAL lists data qubits for which this pulse is half of a
    cancelling pair."""

    name: str
    targets: tuple = ()
    tag: str = ""
    cancelled_for: tuple = ()

    def to_line(self) -> str:
        parts = [self.name] + [str(t) for t in self.targets]
        if self.tag:
            parts.append(f"@{self.tag}")
        if self.cancelled_for:
            parts.append("!cancelled=" + ",".join(str(q) for q in self.cancelled_for))
        return " ".join(parts)

    @staticmethod
    def from_line(line: str) -> "Op":
        parts = line.split()
        name = parts[0]
        tag = ""
        cancelled = ()
        targets = []
        for p in parts[1:]:
            if p.startswith("@"):
                tag = p[1:]
            elif p.startswith("!cancelled="):
                cancelled = tuple(int(x) for x in p.split("=", 1)[1].split(","))
            else:
                targets.append(p if p in ("data", "ancilla") else int(p))
        return Op(name, tuple(targets), tag, cancelled)


@dataclass(frozen=True)
class Circuit:
    """Immutable time-ordered operation list with rail geometry.

    ``rails[q]`` is "data" or "ancilla"; ``positions[q]`` is the qubit's
    rail site (None when geometry is irrelevant, e.g. template fragments).
    """

    n_qubits: int
    ops: tuple
    rails: tuple
    positions: tuple = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.positions is None:
            object.__setattr__(self, "positions", (None,) * self.n_qubits)

    def data_qubits(self):
        return [q for q in range(self.n_qubits) if self.rails[q] == "data"]

    def ancilla_qubits(self):
        return [q for q in range(self.n_qubits) if self.rails[q] == "ancilla"]

    def count(self, name: str) -> int:
        return sum(1 for op in self.ops if op.name == name)

    def final_offset(self) -> int:
        return sum(op.targets[0] for op in self.ops if op.name == "SHUTTLE")

    def to_text(self) -> str:
        lines = ["circuit v1", f"nqubits {self.n_qubits}"]
        anc = self.ancilla_qubits()
        if anc:
            lines.append("ancilla " + " ".join(str(q) for q in anc))
        if any(p is not None for p in self.positions):
            lines.append("pos " + " ".join(
                "_" if p is None else str(p) for p in self.positions))
        lines.extend(op.to_line() for op in self.ops)
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "Circuit":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if lines[0].strip() != "circuit v1":
            raise ValueError("not a circuit dump")
        n = int(lines[1].split()[1])
        rails = ["data"] * n
        positions = [None] * n
        i = 2
        while i < len(lines) and lines[i].split()[0] in ("ancilla", "pos"):
            parts = lines[i].split()
            if parts[0] == "ancilla":
                for q in parts[1:]:
                    rails[int(q)] = "ancilla"
            else:
                positions = [None if p == "_" else int(p) for p in parts[1:]]
            i += 1
        ops = tuple(Op.from_line(ln) for ln in lines[i:])
        return Circuit(n, ops, tuple(rails), tuple(positions))


# ---------------------------------------------------------------------------
# statevector oracle
# ---------------------------------------------------------------------------

_MAX_SV_QUBITS = 6

_KETS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / math.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / math.sqrt(2),
    "+i": np.array([1, 1j], dtype=complex) / math.sqrt(2),
    "-i": np.array([1, -1j], dtype=complex) / math.sqrt(2),
}


@dataclass(frozen=True)
class StateVector:
    """Amplitudes over up to six qubits; qubit q is bit q of the index."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_qubits > _MAX_SV_QUBITS:
            raise ValueError("statevector limited to 6 qubits")
        if abs(np.linalg.norm(self.amplitudes) - 1.0) > 1e-12:
            raise ValueError("state not normalised")

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(other.amplitudes, self.amplitudes))

    def equals_up_to_phase(self, other: "StateVector", tol=1e-9) -> bool:
        return abs(abs(self.overlap(other)) - 1.0) < tol


def ket(*labels) -> StateVector:
    """Product state from single-qubit labels in ("0","1","+","-","+i","-i");
    the first label is qubit 0."""
    amps = np.array([1.0], dtype=complex)
    for lab in labels:
        amps = np.kron(_KETS[lab], amps)  # new qubit becomes the high bit
    return StateVector(len(labels), amps)


def _pair_state(vec2: np.ndarray, n: int, q1: int, q2: int,
                base: StateVector = None) -> StateVector:
    """State with qubits (q1, q2) in the given two-qubit state (vec2 indexed
    as q1 + 2*q2) and all others as in ``base`` (default all |0>)."""
    amps = np.zeros(2 ** n, dtype=complex)
    src = base.amplitudes if base is not None else None
    for i in range(2 ** n):
        b1, b2 = (i >> q1) & 1, (i >> q2) & 1
        rest = i & ~((1 << q1) | (1 << q2))
        if src is not None:
            amps[i] = src[rest] * vec2[b1 + 2 * b2] if src[rest] != 0 else 0
        elif rest == 0:
            amps[i] = vec2[b1 + 2 * b2]
    amps /= np.linalg.norm(amps)
    return StateVector(n, amps)


SINGLET = np.array([0, -1, 1, 0], dtype=complex) / math.sqrt(2)   # (|01>-|10>)/sqrt2
TRIPLET = np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2)    # (|01>+|10>)/sqrt2
TRIPLET_PRIME = np.array([1, 0, 0, -1], dtype=complex) / math.sqrt(2)  # (|00>-|11>)/sqrt2


def _apply_1q(amps, n, q, u):
    a = amps.reshape([2] * n)
    a = np.moveaxis(a, n - 1 - q, 0)
    a2 = np.tensordot(u, a, axes=([1], [0]))
    return np.moveaxis(a2, 0, n - 1 - q).reshape(-1)


_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


def _project(amps, n, q, bit):
    mask = ((np.arange(amps.size) >> q) & 1) == bit
    out = np.where(mask, amps, 0)
    norm = np.linalg.norm(out)
    return out / norm if norm > 0 else None, norm ** 2


def statevector_check(fragment: Circuit, state: StateVector,
                      skip_cancelled: bool = False, rng=None):
    """Run a small fragment exactly; returns (final StateVector, outcomes).

    Measurements with a deterministic outcome are projected; otherwise an
    ``rng`` (numpy Generator) must be supplied.  ``skip_cancelled`` omits
    semi-global Hadamards on their annotated cancelled qubits, which must
    leave the overall action unchanged.
    """
    n = fragment.n_qubits
    if n > _MAX_SV_QUBITS:
        raise ValueError("fragment too large for statevector check")
    if state.n_qubits != n:
        raise ValueError("state size mismatch")
    amps = state.amplitudes.copy()
    outcomes = []
    for op in fragment.ops:
        if op.name in ("TICK", "SHUTTLE", "IDLE"):
            continue
        if op.name == "H_SEMIGLOBAL":
            rail = op.targets[0] if op.targets else "data"
            for q in range(n):
                if fragment.rails[q] != rail:
                    continue
                if skip_cancelled and q in op.cancelled_for:
                    continue
                amps = _apply_1q(amps, n, q, _H)
        elif op.name in ("S", "S_DAG"):
            u = _S if op.name == "S" else _S.conj()
            amps = _apply_1q(amps, n, op.targets[0], u)
        elif op.name == "H":  # illegal on hardware; allowed in the oracle
            amps = _apply_1q(amps, n, op.targets[0], _H)
        elif op.name == "CZ":
            a, b = op.targets
            idx = np.arange(amps.size)
            sign = np.where(((idx >> a) & 1) & ((idx >> b) & 1), -1.0, 1.0)
            amps = amps * sign
        elif op.name == "CNOT":  # for the wrong-implementation worked example
            c, t = op.targets
            idx = np.arange(amps.size)
            flipped = np.where((idx >> c) & 1, idx ^ (1 << t), idx)
            amps = amps[flipped]
        elif op.name == "INIT_Z":
            # reset: measure in Z, flip to |0> on a 1 outcome
            q = op.targets[0]
            proj0, p0 = _project(amps, n, q, 0)
            if p0 > 1 - 1e-9:
                amps = proj0
            elif p0 < 1e-9:
                amps = _apply_1q(_project(amps, n, q, 1)[0], n, q, _X)
            else:
                if rng is None:
                    raise ValueError("nondeterministic reset needs rng")
                if rng.random() < p0:
                    amps = proj0
                else:
                    amps = _apply_1q(_project(amps, n, q, 1)[0], n, q, _X)
        elif op.name == "INIT_SINGLET":
            q1, q2 = op.targets
            # pair must currently be disentangled in |00>
            sel, p00 = _project(amps, n, q1, 0)
            if sel is not None:
                sel, p = _project(sel, n, q2, 0)
                p00 *= p
            if sel is None or p00 < 1 - 1e-9:
                raise ValueError("INIT_SINGLET on a pair not in |00>")
            amps = _pair_state(SINGLET, n, q1, q2,
                               StateVector(n, sel)).amplitudes
        elif op.name == "MEAS_Z":
            q = op.targets[0]
            proj0, p0 = _project(amps, n, q, 0)
            if p0 > 1 - 1e-9:
                outcome, amps = 0, proj0
            elif p0 < 1e-9:
                outcome, amps = 1, _project(amps, n, q, 1)[0]
            else:
                if rng is None:
                    raise ValueError("nondeterministic measurement needs rng")
                outcome = int(rng.random() >= p0)
                amps = _project(amps, n, q, outcome)[0]
            outcomes.append(outcome)
        elif op.name == "MEAS_ST":
            q1, q2 = op.targets
            # project the pair onto singlet vs triplet: P_S = |S><S| on (q1,q2)
            a = amps.copy()
            proj = np.zeros_like(a)
            for i in range(a.size):
                b1, b2 = (i >> q1) & 1, (i >> q2) & 1
                if (b1, b2) == (1, 0):
                    j = i ^ (1 << q1) ^ (1 << q2)  # the (0,1) partner
                    c = (a[j] - a[i]) / 2  # <S| component (|01>-|10>)/sqrt2
                    proj[j] += c
                    proj[i] -= c
            p_s = float(np.linalg.norm(proj) ** 2)
            if p_s > 1 - 1e-9:
                outcome, amps = 0, proj / np.linalg.norm(proj)
            elif p_s < 1e-9:
                rem = a - proj
                outcome, amps = 1, rem / np.linalg.norm(rem)
            else:
                if rng is None:
                    raise ValueError("nondeterministic measurement needs rng")
                if rng.random() < p_s:
                    outcome, amps = 0, proj / np.linalg.norm(proj)
                else:
                    rem = a - proj
                    outcome, amps = 1, rem / np.linalg.norm(rem)
            outcomes.append(outcome)
        else:
            raise ValueError(f"unknown op {op.name}")
    return StateVector(n, amps), outcomes


# ---------------------------------------------------------------------------
# stabiliser templates
# ---------------------------------------------------------------------------


def stabiliser_template(kind: str, n_data: int = None,
                        z_via_cnot: bool = False) -> Circuit:
    """Fragment measuring one stabiliser with a singlet-triplet ancilla.

    Kinds: "Z" and "X" measure uniform parities on ``n_data`` qubits
    (default 2); "dislocation" measures X on the first qubit and Z on the
    rest; "twist" measures Y on the first and Z on the rest.  Qubits 0..w-1
    are data, (w, w+1) the ancilla pair; a triplet outcome means parity -1.
    ``z_via_cnot`` swaps Z-parity CZs for CNOTs targeting one ancilla spin —
    the wrong implementation of the worked example, kept for verification.
    """
    if kind not in ("Z", "X", "dislocation", "twist"):
        raise ValueError(f"unknown stabiliser kind: {kind}")
    w = n_data if n_data is not None else 2
    if w < 1 or (kind in ("dislocation", "twist") and w < 2):
        raise ValueError("too few data qubits for this kind")
    a1, a2 = w, w + 1
    rails = ("data",) * w + ("ancilla", "ancilla")
    paulis = {"Z": "Z" * w, "X": "X" * w,
              "dislocation": "X" + "Z" * (w - 1),
              "twist": "Y" + "Z" * (w - 1)}[kind]
    ops = [Op("INIT_SINGLET", (a1, a2)), Op("TICK")]
    hadamard_part = [i for i, p in enumerate(paulis) if p in "XY"]
    z_part = [i for i, p in enumerate(paulis) if p == "Z"]

    def z_gate(q):
        return Op("CNOT", (q, a1)) if z_via_cnot else Op("CZ", (a1, q))

    if hadamard_part:
        cancelled = tuple(z_part)
        for i, p in enumerate(paulis):
            if p == "Y":
                ops.append(Op("S_DAG", (i,)))
        ops.append(Op("H_SEMIGLOBAL", ("data",), cancelled_for=cancelled))
        ops.append(Op("TICK"))
        for q in hadamard_part:
            ops.append(Op("CZ", (a1, q), tag="set2"))
        ops.append(Op("TICK"))
        ops.append(Op("H_SEMIGLOBAL", ("data",), cancelled_for=cancelled))
        for i, p in enumerate(paulis):
            if p == "Y":
                ops.append(Op("S", (i,)))
        ops.append(Op("TICK"))
    for q in z_part:
        ops.append(z_gate(q))
    if z_part:
        ops.append(Op("TICK"))
    ops.append(Op("MEAS_ST", (a1, a2)))
    return Circuit(w + 2, tuple(ops), rails,
                   meta={"kind": kind, "paulis": paulis})


def template_parity(kind: str, labels, n_data: int = None) -> int:
    """Expected measurement (0 singlet, 1 triplet) for product-state data."""
    paulis = stabiliser_template(kind, n_data).meta["paulis"]
    eig = {"Z": {"0": 1, "1": -1}, "X": {"+": 1, "-": -1},
           "Y": {"+i": 1, "-i": -1}}
    val = 1
    for p, lab in zip(paulis, labels):
        val *= eig[p][lab]
    return 0 if val == 1 else 1


# ---------------------------------------------------------------------------
# surface-cycle synthesis
# ---------------------------------------------------------------------------


class _Builder:
    """Accumulates ops while tracking the data-rail Hadamard frame, so that
    set-2 CZs always run inside an H frame and set-1 CZs outside, with the
    minimum number of semi-global pulses (the set1-set2-set2-set1 halving
    falls out of the greedy frame tracking)."""

    def __init__(self):
        self.ops = []
        self.frame = 0
        self._open_h = None     # index of the H that opened the frame
        self._frame_used = set()  # data qubits hit by set2 CZs in the frame

    def tick(self, tag=""):
        self.ops.append(Op("TICK", (), tag))

    def shuttle(self, off, tag="twirl"):
        self.ops.append(Op("SHUTTLE", (off,), tag))
        self.tick()

    def _toggle(self, tag=""):
        if self.frame == 1 and self._open_h is not None:
            # close: qubits never used inside the frame saw a cancelling pair
            all_data = self.ops[self._open_h].cancelled_for
            unused = tuple(q for q in all_data if q not in self._frame_used)
            self.ops[self._open_h] = replace(self.ops[self._open_h],
                                             cancelled_for=unused)
            self.ops.append(Op("H_SEMIGLOBAL", ("data",), tag, unused))
            self._open_h = None
        else:
            self.ops.append(Op("H_SEMIGLOBAL", ("data",), tag,
                               tuple(self._all_data)))
            self._open_h = len(self.ops) - 1
            self._frame_used = set()
        self.tick()
        self.frame ^= 1

    def cz_groups(self, set1, set2, all_data):
        """Emit one interaction layer: set1/set2 lists of (anc, data)."""
        self._all_data = all_data
        groups = [("set1", set1), ("set2", set2)]
        if self.frame == 1:
            groups.reverse()
        for name, pairs in groups:
            if not pairs:
                continue
            want = 1 if name == "set2" else 0
            if self.frame != want:
                self._toggle()
            for a, dq in pairs:
                self.ops.append(Op("CZ", (a, dq), tag=name))
                if name == "set2":
                    self._frame_used.add(dq)
            self.tick()


def synth_surface_cycle(d: int, rounds: int, wide: bool = False,
                        experiment: str = "memory-Z-errors") -> Circuit:
    """Full-device memory circuit for `rounds` interleaved stabiliser cycles.

    Follows the nine-step shuttle sequence, with X ancillas running two
    steps behind Z: their gates start at the third step of the first round
    and a trailing half-round (one extra shuttle of d-1) completes the last
    X stabilisers.  A final bookkeeping shuttle restores alignment.
    """
    if experiment not in ("memory-Z-errors", "memory-X-errors"):
        raise ValueError(f"unknown experiment: {experiment}")
    code = (codes_mod.wide_surface_code(d) if wide
            else codes_mod.rotated_surface_code(d))
    cells = code.meta["cells"]
    n = code.n
    height = code.meta["height"]
    n_anc = len(cells)
    rails = ("data",) * n + ("ancilla",) * n_anc
    positions = tuple(range(n)) + tuple(c.anc_pos for c in cells)
    z_anc = [n + i for i, c in enumerate(cells) if c.kind == "Z"]
    x_anc = [n + i for i, c in enumerate(cells) if c.kind == "X"]
    all_data = tuple(range(n))

    off = layout_mod.STEP_OFFSETS(height)

    def pairs(kind, role):
        out = []
        for i, c in enumerate(cells):
            if c.kind == kind and role in c.corners:
                out.append((n + i, c.corners[role]))
        return out

    b = _Builder()
    # prologue: initialise data; a semi-global H prepares |+>^n when the
    # tracked logical is X (Z-error memory)
    for q in range(n):
        b.ops.append(Op("INIT_Z", (q,)))
    b.tick()
    if experiment == "memory-Z-errors":
        b.ops.append(Op("H_SEMIGLOBAL", ("data",), tag="prep"))
        b.tick()
    for a in z_anc:
        b.ops.append(Op("INIT_Z", (a,)))
    b.tick()

    steps = ["SW", "NE", "SE", "NW"]
    for r in range(rounds):
        b.tick(tag=f"cycle{r}")
        if r > 0:
            b.shuttle(1)
        for si, role in enumerate(steps):
            if si > 0:
                b.shuttle([off["NE"] - off["SW"], off["SE"] - off["NE"],
                           off["NW"] - off["SE"]][si - 1])
            set1 = pairs("Z", role)
            # X ancillas idle through the first round's SW and NE steps
            set2 = [] if (r == 0 and role in ("SW", "NE")) else pairs("X", role)
            b.cz_groups(set1, set2, all_data)
            if role == "NE" and r > 0:
                for a in x_anc:
                    b.ops.append(Op("MEAS_Z", (a,), tag=f"X-round{r - 1}"))
                b.tick()
            if role == "NE":
                for a in x_anc:
                    b.ops.append(Op("INIT_Z", (a,)))
                b.tick()
            if role == "NW":
                for a in z_anc:
                    b.ops.append(Op("MEAS_Z", (a,), tag=f"Z-round{r}"))
                b.tick()
                if r < rounds - 1:
                    for a in z_anc:
                        b.ops.append(Op("INIT_Z", (a,)))
                    b.tick()
    # trailing half-round finishing the last X stabilisers
    b.shuttle(1)
    b.cz_groups([], pairs("X", "SW"), all_data)
    b.shuttle(off["NE"] - off["SW"])
    b.cz_groups([], pairs("X", "NE"), all_data)
    for a in x_anc:
        b.ops.append(Op("MEAS_Z", (a,), tag=f"X-round{rounds - 1}"))
    b.tick()
    b.shuttle(-(off["NE"]), tag="return")

    # epilogue: read data in the tracked basis.  An open H frame already
    # maps logical X readout onto plain Z measurements; otherwise add the
    # basis-change pulse (memory-Z) or close the frame (memory-X).
    want_frame = 1 if experiment == "memory-Z-errors" else 0
    if b.frame != want_frame:
        b._toggle(tag="readout")
    elif b.frame == 1:
        # consume the frame as the readout basis change
        if b._open_h is not None:
            b.ops[b._open_h] = replace(b.ops[b._open_h], cancelled_for=())
            b._open_h = None
    for q in range(n):
        b.ops.append(Op("MEAS_Z", (q,), tag="data"))

    meta = {"code": code, "experiment": experiment, "rounds": rounds,
            "kinds": tuple(c.kind for c in cells), "d": d, "wide": wide}
    return Circuit(n + n_anc, tuple(b.ops), rails, positions, meta)


def synth_qldpc_cycle(code, schedule, rounds: int,
                      experiment: str = "memory-Z-errors") -> Circuit:
    """Memory circuit for a general CSS code on the two-rail device.

    Data qubit c sits at rail site c, the ancilla for check row r at site r;
    each layer of the schedule serves one diagonal of Hz (set 1, plain CZs)
    or Hx (set 2, inside an H frame).  Qubits with no gate in a layer get
    IDLE annotations, which later carry idle noise.
    """
    if experiment not in ("memory-Z-errors", "memory-X-errors"):
        raise ValueError(f"unknown experiment: {experiment}")
    dec_z = layout_mod.diagonals(code.Hz)
    dec_x = layout_mod.diagonals(code.Hx)
    served = {("Z", o) for lay in schedule.layers if lay["tag"] == "Z"
              for o in [lay["offset"]]}
    served |= {("X", o) for lay in schedule.layers if lay["tag"] == "X"
               for o in [lay["offset"]]}
    need = {("Z", o) for o in dec_z.offsets} | {("X", o) for o in dec_x.offsets}
    if not need <= served:
        raise ValueError("schedule does not cover the code's diagonals")

    n = code.n
    rz, rx = code.Hz.rows, code.Hx.rows
    rails = ("data",) * n + ("ancilla",) * (rz + rx)
    positions = tuple(range(n)) + tuple(range(rz)) + tuple(range(rx))
    z_anc = list(range(n, n + rz))
    x_anc = list(range(n + rz, n + rz + rx))
    all_data = tuple(range(n))

    def layer_pairs(tag, offset):
        dec, base = (dec_z, n) if tag == "Z" else (dec_x, n + rz)
        if offset not in dec.masks:
            return []
        rows = np.nonzero(dec.masks[offset])[0]
        return [(base + int(r), int(r) + offset) for r in rows]

    b = _Builder()
    for q in range(n):
        b.ops.append(Op("INIT_Z", (q,)))
    b.tick()
    if experiment == "memory-Z-errors":
        b.ops.append(Op("H_SEMIGLOBAL", ("data",), tag="prep"))
        b.tick()

    for r in range(rounds):
        b.tick(tag=f"cycle{r}")
        for a in z_anc + x_anc:
            b.ops.append(Op("INIT_Z", (a,)))
        b.tick()
        pos = 0
        prev_sign = 0
        for i, lay in enumerate(schedule.layers):
            move = lay["offset"] - pos
            if move:
                # A contiguous run of same-direction moves is one shuttle
                # excursion with many stops; only the excursion start gets a
                # twirl pulse (and hence depolarising noise), so the extra
                # stops cost idling time but no additional shuttle noise.
                sign = 1 if move > 0 else -1
                b.shuttle(move, tag="twirl" if sign != prev_sign else "step")
                prev_sign = sign
            pos = lay["offset"]
            prs = layer_pairs(lay["tag"], lay["offset"])
            set1 = prs if lay["tag"] == "Z" else []
            set2 = prs if lay["tag"] == "X" else []
            b.cz_groups(set1, set2, all_data)
            busy = {q for p in prs for q in p}
            for q in range(n + rz + rx):
                if q not in busy:
                    b.ops.append(Op("IDLE", (q,), tag="idle"))
            b.tick()
        if pos:
            sign = 1 if pos < 0 else -1
            b.shuttle(-pos, tag="twirl" if sign != prev_sign else "step")
        if b.frame == 1 and r < rounds - 1:
            b._toggle()
        for a in z_anc:
            b.ops.append(Op("MEAS_Z", (a,), tag=f"Z-round{r}"))
        for a in x_anc:
            b.ops.append(Op("MEAS_Z", (a,), tag=f"X-round{r}"))
        b.tick()

    want_frame = 1 if experiment == "memory-Z-errors" else 0
    if b.frame != want_frame:
        b._toggle(tag="readout")
    elif b.frame == 1 and b._open_h is not None:
        b.ops[b._open_h] = replace(b.ops[b._open_h], cancelled_for=())
        b._open_h = None
    for q in range(n):
        b.ops.append(Op("MEAS_Z", (q,), tag="data"))

    kinds = ("Z",) * rz + ("X",) * rx
    meta = {"code": code, "experiment": experiment, "rounds": rounds,
            "kinds": kinds}
    return Circuit(n + rz + rx, tuple(b.ops), rails, positions, meta)


# ---------------------------------------------------------------------------
# constraint validation
# ---------------------------------------------------------------------------


def validate_constraints(c: Circuit) -> dict:
    """Check device constraints; returns {"violations": [messages]}."""
    violations = []
    offset = 0
    inited = [False] * c.n_qubits
    for i, op in enumerate(c.ops):
        if op.name == "SHUTTLE":
            offset += op.targets[0]
        elif op.name in ("H", "CNOT"):
            violations.append(f"op {i}: local {op.name} not available on device")
        elif op.name == "CZ":
            a, dq = op.targets
            ra, rd = c.rails[a], c.rails[dq]
            if ra == rd:
                violations.append(f"op {i}: CZ within the {ra} rail")
            else:
                if ra == "data":  # normalise order: (ancilla, data)
                    a, dq = dq, a
                pa, pd = c.positions[a], c.positions[dq]
                if pa is not None and pd is not None and pd - pa != offset:
                    violations.append(
                        f"op {i}: CZ misaligned (data {pd} - ancilla {pa} != "
                        f"offset {offset})")
        elif op.name in ("INIT_Z",):
            inited[op.targets[0]] = True
        elif op.name == "INIT_SINGLET":
            for q in op.targets:
                inited[q] = True
        elif op.name in ("MEAS_Z", "MEAS_ST"):
            for q in op.targets:
                if not inited[q]:
                    violations.append(f"op {i}: measurement of qubit {q} "
                                      "without a prior initialisation")
                inited[q] = False
        elif op.name not in ALLOWED_OPS:
            violations.append(f"op {i}: unknown operation {op.name}")
    if offset != 0:
        violations.append(f"cumulative shuttle offset {offset} != 0 at end")
    return {"violations": violations}
