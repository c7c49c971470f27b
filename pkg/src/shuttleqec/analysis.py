"""Monte Carlo aggregation, trial-function fitting and resource estimates.

Failure counts become Wilson-interval rate estimates, per-shot logical
error probabilities are normalised to per-round per-logical-qubit rates
p_log = 1 - (1 - P_L)^(1/(k d)), and p_log(d) curves are fitted with the
trial function

    p_log(d) = A (alpha + beta d)^(gamma d + delta),

whose base grows with d because the shuttling dephasing per cycle does;
the suppression is therefore sub-exponential and may reverse at large d.
The fitted curve drives distance selection and the two resource scenarios
(beating NISQ machines, and a 6x6 Hubbard-model simulation).
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .noise import NoiseParams, p_sh_cycle

__all__ = [
    "RatePoint",
    "FitResult",
    "wilson_interval",
    "logical_rate",
    "per_round_per_qubit",
    "fit_trial",
    "select_distance",
    "resource_estimate",
    "curve_to_csv",
]


def wilson_interval(failures: int, shots: int, z: float = 1.959963984540054):
    """95% Wilson score interval for a binomial proportion."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if not 0 <= failures <= shots:
        raise ValueError("failures outside [0, shots]")
    phat = failures / shots
    denom = 1.0 + z * z / shots
    centre = (phat + z * z / (2 * shots)) / denom
    half = z * math.sqrt(phat * (1 - phat) / shots
                         + z * z / (4 * shots * shots)) / denom
    lo = 0.0 if failures == 0 else max(0.0, centre - half)
    hi = 1.0 if failures == shots else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class RatePoint:
    """One Monte Carlo failure-rate estimate with its 95% Wilson interval."""

    label: str
    shots: int
    failures: int
    p_L: float
    ci_low: float
    ci_high: float
    params: NoiseParams = None

    def __post_init__(self):
        if not 0.0 <= self.ci_low <= self.p_L <= self.ci_high <= 1.0:
            raise ValueError("interval must bracket the point estimate")


def logical_rate(failures: int, shots: int, label: str = "",
                 params: NoiseParams = None) -> RatePoint:
    lo, hi = wilson_interval(failures, shots)
    return RatePoint(label=label, shots=shots, failures=failures,
                     p_L=failures / shots, ci_low=lo, ci_high=hi,
                     params=params)


def per_round_per_qubit(P_L: float, k: int, d: int) -> float:
    """Per-round per-logical-qubit rate 1 - (1 - P_L)^(1/(k d))."""
    if not 0.0 <= P_L <= 1.0:
        raise ValueError("P_L outside [0, 1]")
    if k < 1 or d < 1:
        raise ValueError("k and d must be >= 1")
    if P_L == 1.0:
        return 1.0
    return -math.expm1(math.log1p(-P_L) / (k * d))


@dataclass(frozen=True)
class FitResult:
    """Parameters of the trial function p_log(d) = A (a + b d)^(g d + e)."""

    A: float
    alpha: float
    beta: float
    gamma: float
    delta: float
    residual: float
    n_points: int = 0
    excluded: tuple = ()

    def predict(self, d) -> float:
        base = self.alpha + self.beta * np.asarray(d, dtype=float)
        if np.any(base <= 0):
            raise ValueError("trial function base nonpositive at requested d")
        out = self.A * base ** (self.gamma * np.asarray(d, float) + self.delta)
        return float(out) if np.isscalar(d) else out


def _fit_objective(theta, ds, logps):
    logA, alpha, beta, gamma, delta = theta
    base = alpha + beta * ds
    if np.any(base <= 1e-12) or abs(logA) > 60:
        return 1e12
    pred = logA + (gamma * ds + delta) * np.log(base)
    if not np.all(np.isfinite(pred)):
        return 1e12
    return float(np.sum((pred - logps) ** 2))


def fit_trial(points, restarts: int = 24, seed: int = 0) -> FitResult:
    """Least squares on log p_log with Nelder-Mead and random restarts.

    ``points`` is a sequence of (d, p_log) pairs.  Zero rates have no
    logarithm and are excluded (and reported in ``excluded``); at least 5
    usable points over 4 distinct d are required.
    """
    used = [(float(d), float(p)) for d, p in points if p > 0]
    excluded = tuple(float(d) for d, p in points if p <= 0)
    if len(used) < 5 or len({d for d, _ in used}) < 4:
        raise ValueError("need >= 5 nonzero points spanning >= 4 distinct d")
    ds = np.array([d for d, _ in used])
    logps = np.log([p for _, p in used])

    # physics-informed centre: exponential decay (a/pth)^(d/2) with a weak
    # linear drift of the base, then scatter restarts around it
    slope = np.polyfit(ds, logps, 1)
    centre = np.array([logps.max() + 1.0, math.exp(min(0.0, slope[0])),
                       1e-3, 0.5 * min(0.0, slope[0]), 0.0])
    rng = np.random.default_rng(seed)
    best = None
    for trial in range(max(restarts, 20)):
        if trial == 0:
            x0 = centre
        else:
            x0 = centre + rng.normal(size=5) * np.array([3.0, 0.3, 0.05,
                                                         0.4, 1.5])
            x0[1] = abs(x0[1]) + 1e-3
            x0[2] = abs(x0[2])
        res = minimize(_fit_objective, x0, args=(ds, logps),
                       method="Nelder-Mead",
                       options={"maxiter": 4000, "xatol": 1e-10,
                                "fatol": 1e-12})
        if best is None or res.fun < best.fun:
            best = res
    logA, alpha, beta, gamma, delta = best.x
    return FitResult(A=math.exp(logA), alpha=alpha, beta=beta, gamma=gamma,
                     delta=delta, residual=float(best.fun),
                     n_points=len(used), excluded=excluded)


def select_distance(fit: FitResult, p_target: float, cap: int = 99):
    """Smallest odd d with predicted p_log <= target, else "unreachable".

    The trial function need not be monotone: with shuttling noise growing
    with d the curve can turn upward before reaching the target, in which
    case no distance works and the scan runs out at the cap.
    """
    for d in range(3, cap + 1, 2):
        try:
            if fit.predict(d) <= p_target:
                return d
        except ValueError:
            break
    return "unreachable"


def resource_estimate(scenario: str, np_: NoiseParams,
                      fit: FitResult = None, cycle_time: float = 10e-6,
                      t_gates: float = 1e8) -> dict:
    """Resource report for one of the two paper scenarios.

    "nisq-beating": 50 logical qubits at p_log <= 1e-4, 15-to-1 magic-state
    distillation, 130 distance-9 wide patches.  "hubbard-6x6": 100 logical
    qubits, 1e8 T gates through 116-to-12 distillation, per-logical-qubit
    target rate 0.1 / (288 * 10.27e8); the code distance comes from the
    fitted p_log(d) curve.
    """
    if scenario == "nisq-beating":
        d = select_distance(fit, 1e-4) if fit is not None else 9
        if d == "unreachable":
            raise ValueError("fit never reaches the 1e-4 target rate")
        p_mag = np_.p + p_sh_cycle(np_, d)
        patches = 2 * (50 + 15)
        report = {
            "scenario": scenario,
            "target_p_log": 1e-4,
            "distance": d,
            "patches": patches,
            "data_qubits": patches * d * 2 * d,
            "physical_qubits": patches * 4 * d * d,
            "p_mag": p_mag,
            "distilled_error_15_to_1": 35 * p_mag ** 3,
            "note": ("35 p_mag^3 evaluates to ~4e-8 at p_mag = 0.105%; a "
                     "printed value of 6e-8 corresponds to p_mag ~ 0.12%"),
        }
        return report
    if scenario == "hubbard-6x6":
        logical = 100
        factory_patches = 44
        patches = 2 * (logical + factory_patches)
        cycles_per_t = 10.27
        p_target = 0.1 / (patches * cycles_per_t * t_gates)
        if fit is None:
            raise ValueError("hubbard-6x6 needs a fitted p_log(d) curve")
        d = select_distance(fit, p_target)
        report = {
            "scenario": scenario,
            "target_p_log": p_target,
            "distance": d,
            "patches": patches,
        }
        if d == "unreachable":
            return report
        p_mag = np_.p + p_sh_cycle(np_, d)
        cycles = cycles_per_t * d * t_gates
        report.update({
            "physical_qubits": patches * 4 * d * d,
            "p_mag": p_mag,
            "distilled_error_116_to_12": 41.25 * p_mag ** 4,
            "cycles": cycles,
            "cycle_time": cycle_time,
            "wall_clock_seconds": cycles * cycle_time,
            "wall_clock_days": cycles * cycle_time / 86400.0,
        })
        return report
    raise ValueError(f"unknown scenario: {scenario}")


def curve_to_csv(rows, path=None) -> str:
    """Write (d, p, T2_star, p_log, ci_low, ci_high) rows as CSV."""
    buf = io.StringIO()
    buf.write("d,p,T2_star,p_log,ci_low,ci_high\n")
    for r in rows:
        buf.write("{},{!r},{!r},{!r},{!r},{!r}\n".format(
            r[0], float(r[1]), float(r[2]), float(r[3]), float(r[4]),
            float(r[5])))
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
