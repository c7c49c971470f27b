"""Noise parameters of the shuttling device and circuit annotation.

Shuttling dephases data qubits: one shuttle of length L_s contributes
2 l_c L_s / (v T2*)^2, and the per-cycle total p_sh lumps the four shuttles
of a stabiliser cycle (4d increments in region-interleaved operation) into
a single Z-dephasing channel at cycle start.  Gates, initialisations and
measurements carry a flat depolarising/flip rate p; idle qubits in qLDPC
schedules decohere at p_idle = 1 - exp(-T_gate/T2) per tick.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

__all__ = [
    "NoiseParams",
    "Channel",
    "NoisyCircuit",
    "p_shuttle_increment",
    "p_sh_cycle",
    "p_idle_from_times",
    "annotate",
]


@dataclass(frozen=True)
class NoiseParams:
    """Physical and circuit-level noise parameters (SI units).

    ``shuttle_multiplier`` is the number of data-spacing increments shuttled
    per stabiliser cycle; None means region-interleaved operation (4d, with
    d read from the circuit) falling back to the circuit's own per-cycle
    shuttle distance.
    """

    p: float = 1e-3
    p_idle: float = 0.0
    T2_star: float = 20e-6
    T2: float = 20e-3
    T_gate: float = 1e-6
    v: float = 10.0
    l_c: float = 100e-9
    l_dd: float = 300e-9
    shuttle_multiplier: int = None

    def __post_init__(self):
        for name in ("p", "p_idle"):
            x = getattr(self, name)
            if not 0.0 <= x <= 1.0:
                raise ValueError(f"{name}={x} outside [0, 1]")
        for name in ("T2_star", "T2", "T_gate", "v", "l_dd"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.l_c < 0:
            raise ValueError("l_c must be nonnegative")

    def with_idle_from_times(self) -> "NoiseParams":
        return NoiseParams(**{**asdict(self),
                              "p_idle": p_idle_from_times(self.T_gate, self.T2)})

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "NoiseParams":
        return NoiseParams(**json.loads(text))


def p_shuttle_increment(np_: NoiseParams) -> float:
    """Dephasing probability of one shuttle over a data-qubit spacing."""
    return 2.0 * np_.l_c * np_.l_dd / (np_.v * np_.T2_star) ** 2


def p_sh_cycle(np_: NoiseParams, d: int) -> float:
    """Per-cycle data-qubit dephasing probability.

    Region-interleaved operation shuttles 4d increments per cycle (2d out
    past the interleaved logical-ancilla region and 2d back)."""
    mult = np_.shuttle_multiplier if np_.shuttle_multiplier is not None else 4 * d
    return mult * p_shuttle_increment(np_)


def p_idle_from_times(T_gate: float, T2: float) -> float:
    """Idle error probability for one gate time of free decoherence."""
    if T2 <= 0:
        raise ValueError("T2 must be positive")
    if T_gate < 0:
        raise ValueError("T_gate must be nonnegative")
    return 1.0 - math.exp(-T_gate / T2)


@dataclass(frozen=True)
class Channel:
    """One noise channel anchored at op index ``location`` of the base
    circuit; ``kind`` in {dephasing-Z, depolarising-1q, depolarising-2q,
    measurement-flip}."""

    location: int
    kind: str
    qubits: tuple
    probability: float


@dataclass(frozen=True)
class NoisyCircuit:
    base: object
    channels: tuple
    meta: dict = field(default_factory=dict, compare=False)


def _cycle_shuttle_distance(c) -> int:
    """Shuttle increments between the first two cycle markers (or total)."""
    marks = [i for i, op in enumerate(c.ops)
             if op.name == "TICK" and op.tag.startswith("cycle")]
    if len(marks) >= 2:
        span = c.ops[marks[0]:marks[1]]
    else:
        span = c.ops
    return sum(abs(op.targets[0]) for op in span if op.name == "SHUTTLE")


def annotate(c, np_: NoiseParams) -> NoisyCircuit:
    """Attach the four-part noise model to a synthesized circuit.

    (i) Z dephasing p_sh on every data qubit at each cycle marker;
    (ii) depolarising p after every gate, including semi-global Hadamard
    pulses whose effect cancels and the twirl pulses accompanying shuttles;
    (iii) depolarising p after every initialisation; (iv) a classical flip
    with probability p on every measurement; and depolarising p_idle on
    each IDLE annotation.
    """
    if np_.shuttle_multiplier is not None:
        mult = np_.shuttle_multiplier
    elif "d" in c.meta:
        mult = 4 * c.meta["d"]
    else:
        mult = _cycle_shuttle_distance(c)
    p_sh = mult * p_shuttle_increment(np_)
    p = np_.p
    data = tuple(c.data_qubits())
    channels = []
    for i, op in enumerate(c.ops):
        if op.name == "TICK" and op.tag.startswith("cycle"):
            for q in data:
                channels.append(Channel(i, "dephasing-Z", (q,), p_sh))
        elif op.name == "CZ":
            channels.append(Channel(i, "depolarising-2q", op.targets, p))
        elif op.name in ("CNOT",):
            channels.append(Channel(i, "depolarising-2q", op.targets, p))
        elif op.name == "H_SEMIGLOBAL":
            rail = op.targets[0] if op.targets else "data"
            for q in range(c.n_qubits):
                if c.rails[q] == rail:
                    channels.append(Channel(i, "depolarising-1q", (q,), p))
        elif op.name in ("S", "S_DAG", "H"):
            channels.append(Channel(i, "depolarising-1q", op.targets, p))
        elif op.name == "SHUTTLE" and op.tag == "twirl":
            # the twirl pulse {I, X^n} applied around each shuttle
            for q in data:
                channels.append(Channel(i, "depolarising-1q", (q,), p))
        elif op.name in ("INIT_Z", "INIT_SINGLET"):
            for q in op.targets:
                channels.append(Channel(i, "depolarising-1q", (q,), p))
        elif op.name in ("MEAS_Z", "MEAS_ST"):
            channels.append(Channel(i, "measurement-flip", op.targets, p))
        elif op.name == "IDLE":
            channels.append(Channel(i, "depolarising-1q", op.targets,
                                    np_.p_idle))
    return NoisyCircuit(base=c, channels=tuple(channels),
                        meta={"p_sh": p_sh, "params": np_})
