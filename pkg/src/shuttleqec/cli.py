"""Config-driven command line runner for the two-rail QEC toolkit.

Subcommands: code-info, layout-plan, synth, simulate, sweep, fit,
resources, decode.  Experiments are described by a JSON config (unknown
keys rejected, seed mandatory for anything that samples); outputs are
UTF-8 JSON or CSV.  Fixed (config, seed) pairs give bit-identical output
regardless of the worker count in SHUTTLEQEC_WORKERS.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import analysis, circuits, codes, decoders, layout, noise, sampler
from .gf2 import BitMatrix

__all__ = ["ExperimentConfig", "main"]

_CONFIG_KEYS = {"code", "experiment", "rounds", "shots", "seed", "decoder",
                "noise", "output"}
_NOISE_KEYS = {"p", "p_idle", "T2_star", "T2", "T_gate", "v", "l_c", "l_dd",
               "shuttle_multiplier"}


class CliError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description.

    ``rounds`` defaults to the code distance (each code is simulated for d
    rounds); ``decoder`` "auto" uses matching for surface codes and BP-OSD
    for everything else.
    """

    code: str
    experiment: str = "memory-Z-errors"
    rounds: int = None
    shots: int = 10_000
    seed: int = None
    decoder: str = "auto"
    noise: noise.NoiseParams = field(default_factory=noise.NoiseParams)
    output: str = None

    @staticmethod
    def from_dict(raw: dict) -> "ExperimentConfig":
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise CliError(f"unknown config keys: {sorted(unknown)}")
        if "code" not in raw:
            raise CliError("config needs a 'code' entry")
        nraw = dict(raw.get("noise", {}))
        bad = set(nraw) - _NOISE_KEYS
        if bad:
            raise CliError(f"unknown noise keys: {sorted(bad)}")
        try:
            np_ = noise.NoiseParams(**nraw)
        except (TypeError, ValueError) as exc:
            raise CliError(f"bad noise parameters: {exc}")
        return ExperimentConfig(
            code=raw["code"],
            experiment=raw.get("experiment", "memory-Z-errors"),
            rounds=raw.get("rounds"),
            shots=int(raw.get("shots", 10_000)),
            seed=raw.get("seed"),
            decoder=raw.get("decoder", "auto"),
            noise=np_,
            output=raw.get("output"),
        )


def _load_config(args) -> ExperimentConfig:
    raw = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
    for key in ("code", "experiment", "rounds", "shots", "seed", "decoder",
                "output"):
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            raw[key] = val
    for key in _NOISE_KEYS:
        val = getattr(args, f"noise_{key}", None)
        if val is not None:
            raw.setdefault("noise", {})
            raw["noise"][key] = val
    return ExperimentConfig.from_dict(raw)


def _surface_family(name: str):
    if name.startswith("rsc-d"):
        return int(name[5:]), False
    if name.startswith("wide-d"):
        return int(name[6:]), True
    return None


def _resolve_rounds(cfg: ExperimentConfig, code) -> int:
    if cfg.rounds is not None:
        return int(cfg.rounds)
    d = code.d_estimate
    if not isinstance(d, (int, np.integer)):
        raise CliError(f"{code.name}: rounds not given and distance unknown")
    return int(d)


def _build_circuit(cfg: ExperimentConfig):
    code = codes.get_code(cfg.code)
    rounds = _resolve_rounds(cfg, code)
    fam = _surface_family(cfg.code)
    if fam is not None:
        d, wide = fam
        c = circuits.synth_surface_cycle(d, rounds, wide=wide,
                                         experiment=cfg.experiment)
    else:
        sched = layout.schedule_from_diagonals(layout.diagonals(code.Hz),
                                               layout.diagonals(code.Hx))
        c = circuits.synth_qldpc_cycle(code, sched, rounds,
                                       experiment=cfg.experiment)
    return code, rounds, c


def _decode_batch(dem, batch, decoder: str, surface: bool) -> int:
    if decoder == "auto":
        decoder = "mwpm" if surface else "bposd"
    failures = 0
    if decoder == "mwpm":
        graph = decoders.MatchingGraph.from_dem(dem)
        for i in range(batch.shots):
            pred = decoders.mwpm_decode(dem, batch.syndromes[i], graph=graph)
            failures += int(
                not np.array_equal(pred, batch.observable_flips[i]))
    elif decoder == "bposd":
        H, O, priors = decoders.dem_to_matrices(dem)
        for i in range(batch.shots):
            res = decoders.bposd_decode(H, priors, batch.syndromes[i],
                                        observables=O)
            failures += int(not np.array_equal(res["obs_flips"],
                                               batch.observable_flips[i]))
    else:
        raise CliError(f"unknown decoder: {decoder}")
    return failures


def _simulate(cfg: ExperimentConfig) -> dict:
    if cfg.seed is None:
        raise CliError("simulate requires an explicit seed")
    code, rounds, c = _build_circuit(cfg)
    nc = noise.annotate(c, cfg.noise)
    dem = sampler.build_dem(nc)
    batch = sampler.sample(dem, cfg.shots, seed=int(cfg.seed))
    surface = _surface_family(cfg.code) is not None
    decoder = cfg.decoder
    if decoder == "auto":
        decoder = "mwpm" if surface else "bposd"
    failures = _decode_batch(dem, batch, decoder, surface=surface)
    point = analysis.logical_rate(failures, cfg.shots, label=cfg.code)
    p_log = analysis.per_round_per_qubit(point.p_L, code.k, rounds)
    return {
        "code": cfg.code, "experiment": cfg.experiment, "decoder": decoder,
        "rounds": rounds,
        "shots": cfg.shots, "seed": int(cfg.seed), "failures": failures,
        "p_L": point.p_L, "p_log": p_log,
        "ci": [point.ci_low, point.ci_high],
        "p_log_ci": [analysis.per_round_per_qubit(point.ci_low, code.k,
                                                  rounds),
                     analysis.per_round_per_qubit(point.ci_high, code.k,
                                                  rounds)],
    }


def cmd_code_info(args) -> dict:
    code = codes.get_code(args.code)
    hx = code.Hx.copy_array()
    hz = code.Hz.copy_array()
    return {
        "name": code.name, "n": code.n, "k": code.k,
        "d_estimate": code.d_estimate,
        "x_check_weights": sorted(int(w) for w in hx.sum(1)),
        "z_check_weights": sorted(int(w) for w in hz.sum(1)),
    }


def cmd_layout_plan(args) -> dict:
    code = codes.get_code(args.code)
    dec_z = layout.diagonals(code.Hz)
    dec_x = layout.diagonals(code.Hx)
    fam = _surface_family(args.code)
    if fam is not None:
        d, _ = fam
        rounds = args.rounds if args.rounds is not None else d
        sched = layout.surface_cycle_schedule(d, rounds)
    else:
        sched = layout.schedule_from_diagonals(dec_z, dec_x)
    return {
        "code": args.code,
        "z_offsets": [int(o) for o in dec_z.offsets],
        "x_offsets": [int(o) for o in dec_x.offsets],
        "n_shuttles": sched.n_shuttles,
        "total_distance": sched.total_distance,
        "band_width": int(max(dec_z.span, dec_x.span)),
    }


def cmd_synth(args) -> dict:
    cfg = _load_config(args)
    _, rounds, c = _build_circuit(cfg)
    report = circuits.validate_constraints(c)
    if report["violations"]:
        raise CliError(f"synthesis violated constraints: {report}")
    text = c.to_text()
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        return {"code": cfg.code, "rounds": rounds, "ops": len(c.ops),
                "written": cfg.output}
    return {"code": cfg.code, "rounds": rounds, "ops": len(c.ops),
            "circuit": text}


def cmd_simulate(args) -> dict:
    return _simulate(_load_config(args))


def cmd_sweep(args) -> dict:
    cfg = _load_config(args)
    if cfg.seed is None:
        raise CliError("sweep requires an explicit seed")
    values = [float(v) for v in args.values.split(",")]
    if args.axis not in ("p", "T2_star"):
        raise CliError("sweep axis must be 'p' or 'T2_star'")
    rows = []
    results = []
    for v in values:
        np_ = noise.NoiseParams(**{**_noise_dict(cfg.noise), args.axis: v})
        sub = ExperimentConfig(code=cfg.code, experiment=cfg.experiment,
                               rounds=cfg.rounds, shots=cfg.shots,
                               seed=cfg.seed, decoder=cfg.decoder, noise=np_)
        res = _simulate(sub)
        results.append(res)
        fam = _surface_family(cfg.code)
        d = fam[0] if fam else res["rounds"]
        rows.append((d, np_.p, np_.T2_star, res["p_log"],
                     res["p_log_ci"][0], res["p_log_ci"][1]))
    text = analysis.curve_to_csv(rows, path=cfg.output)
    out = {"axis": args.axis, "points": results}
    if cfg.output:
        out["written"] = cfg.output
    else:
        out["csv"] = text
    return out


def _noise_dict(np_: noise.NoiseParams) -> dict:
    return {k: getattr(np_, k) for k in _NOISE_KEYS}


def cmd_fit(args) -> dict:
    pts = []
    with open(args.curve, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        try:
            di, pi = header.index("d"), header.index("p_log")
        except ValueError:
            raise CliError("curve CSV needs 'd' and 'p_log' columns")
        for line in fh:
            if line.strip():
                parts = line.strip().split(",")
                pts.append((float(parts[di]), float(parts[pi])))
    try:
        fit = analysis.fit_trial(pts, seed=args.seed or 0)
    except ValueError as exc:
        raise CliError(str(exc))
    return {"A": fit.A, "alpha": fit.alpha, "beta": fit.beta,
            "gamma": fit.gamma, "delta": fit.delta,
            "residual": fit.residual, "n_points": fit.n_points,
            "excluded_d": list(fit.excluded)}


def cmd_resources(args) -> dict:
    fit = None
    if args.fit:
        with open(args.fit, encoding="utf-8") as fh:
            raw = json.load(fh)
        fit = analysis.FitResult(A=raw["A"], alpha=raw["alpha"],
                                 beta=raw["beta"], gamma=raw["gamma"],
                                 delta=raw["delta"],
                                 residual=raw.get("residual", 0.0))
    np_ = noise.NoiseParams(p=args.noise_p if args.noise_p is not None
                            else 1e-3,
                            T2_star=args.noise_T2_star
                            if args.noise_T2_star is not None else 20e-6)
    try:
        return analysis.resource_estimate(args.scenario, np_, fit=fit)
    except ValueError as exc:
        raise CliError(str(exc))


def cmd_decode(args) -> dict:
    with open(args.dem, encoding="utf-8") as fh:
        dem = sampler.DetectorErrorModel.from_text(fh.read())
    batch = sampler.SampleBatch.load(args.samples)
    if batch.syndromes.shape[1] != dem.n_detectors:
        raise CliError("sample batch does not match the DEM's detectors")
    decoder = args.decoder or "mwpm"
    preds = []
    if decoder == "mwpm":
        graph = decoders.MatchingGraph.from_dem(dem)
        for i in range(batch.shots):
            preds.append(decoders.mwpm_decode(dem, batch.syndromes[i],
                                              graph=graph))
    elif decoder == "bposd":
        H, O, priors = decoders.dem_to_matrices(dem)
        for i in range(batch.shots):
            preds.append(decoders.bposd_decode(H, priors, batch.syndromes[i],
                                               observables=O)["obs_flips"])
    else:
        raise CliError(f"unknown decoder: {decoder}")
    preds = np.array(preds, dtype=np.uint8)
    failures = int((preds != batch.observable_flips).any(axis=1).sum())
    return {"shots": batch.shots, "failures": failures,
            "predictions": ["".join(map(str, row)) for row in preds]}


def _add_config_flags(sp):
    sp.add_argument("--config", help="JSON experiment config")
    sp.add_argument("--code")
    sp.add_argument("--experiment")
    sp.add_argument("--rounds", type=int)
    sp.add_argument("--shots", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--decoder")
    sp.add_argument("--output")
    for key in _NOISE_KEYS:
        sp.add_argument(f"--noise-{key.replace('_', '-')}",
                        dest=f"noise_{key}", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="shuttleqec")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("code-info")
    sp.add_argument("code")
    sp.set_defaults(fn=cmd_code_info)

    sp = sub.add_parser("layout-plan")
    sp.add_argument("code")
    sp.add_argument("--rounds", type=int)
    sp.set_defaults(fn=cmd_layout_plan)

    for name, fn in (("synth", cmd_synth), ("simulate", cmd_simulate),
                     ("sweep", cmd_sweep)):
        sp = sub.add_parser(name)
        _add_config_flags(sp)
        if name == "sweep":
            sp.add_argument("--axis", required=True)
            sp.add_argument("--values", required=True,
                            help="comma-separated axis values")
        sp.set_defaults(fn=fn)

    sp = sub.add_parser("fit")
    sp.add_argument("curve", help="CSV with d and p_log columns")
    sp.add_argument("--seed", type=int)
    sp.set_defaults(fn=cmd_fit)

    sp = sub.add_parser("resources")
    sp.add_argument("scenario", choices=["nisq-beating", "hubbard-6x6"])
    sp.add_argument("--fit", help="fit JSON from the fit subcommand")
    sp.add_argument("--noise-p", dest="noise_p", type=float)
    sp.add_argument("--noise-T2-star", dest="noise_T2_star", type=float)
    sp.set_defaults(fn=cmd_resources)

    sp = sub.add_parser("decode")
    sp.add_argument("dem")
    sp.add_argument("samples")
    sp.add_argument("--decoder")
    sp.set_defaults(fn=cmd_decode)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.fn(args)
    except CliError as exc:
        json.dump({"error": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except OSError as exc:
        json.dump({"error": f"{type(exc).__name__}: {exc}"}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    json.dump(result, sys.stdout, indent=1)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
