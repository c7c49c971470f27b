"""Simulation and analysis toolkit for QEC on a two-rail shuttling device.

Two parallel rails of qubits: ancillas sit still, the data rail shuttles
back and forth so that every check qubit can touch every data qubit it
needs.  The package covers the full pipeline: GF(2) linear algebra
(``gf2``), CSS code constructions (``codes``), shuttle schedules and
check-matrix diagonal decompositions (``layout``), stabiliser-cycle
circuit synthesis (``circuits``), the device noise model (``noise``),
detector error models and Monte Carlo sampling (``sampler``), matching /
BP-OSD / exhaustive decoders (``decoders``), rate aggregation, curve
fitting and resource estimation (``analysis``), and a config-driven
command line runner (``cli``).
"""

__version__ = "0.1.0"

__all__ = [
    "gf2", "codes", "layout", "circuits", "noise", "sampler", "decoders",
    "analysis", "cli",
]
