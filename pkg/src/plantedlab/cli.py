"""Batch experiment CLI.

Subcommands: sample, split, advantage, test, hidden, sweep, verdict.  Each
takes a TOML config file; --seed / --out override the config, --threads
parallelizes sweep grids (outputs are identical for any thread count).

Exit codes: 0 success, 2 config error, 3 numeric guard tripped.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import advantage as adv
from .config import EXPERIMENTS, ExperimentConfig, load_config
from .detection import (
    ContiguityInputs, contiguity_verdict, degree_estimator,
    hidden_sample_experiment, oracle_estimator, run_one_sided_experiment,
    spectral_estimator, statistic_detector,
)
from .errors import GUARD_ERRORS, ConfigError, InvalidSpec
from .models import (
    MultiLayerSBM, PlantedDenseSubgraph, PlantedSubmatrix, SBM,
    instance_to_json, sample_null, sample_planted, spec_to_json,
)
from .reports import (
    atomic_write_bytes, canonical_json_bytes, csv_bytes, format_params,
    manifest_bytes, svg_line_chart,
)
from .rng import RandomStream
from .splitting import (
    BernoulliSplitParams, GaussianSplitParams, bernoulli_split, gaussian_split,
    split_symmetric_binary, split_to_json,
)


def run_config(path: str, seed: int | None = None, out: str | None = None,
               threads: int = 1) -> list[str]:
    """Run the experiment described by a config file; returns written paths."""
    cfg = load_config(path)
    if seed is not None:
        cfg.seed = seed
    out_dir = out or cfg.out or "."
    outputs = _dispatch(cfg, threads)
    written = []
    blobs = {}
    for name, data in outputs.items():
        blobs[name] = data
    blobs["manifest.json"] = manifest_bytes(cfg.raw_text, cfg.seed, outputs)
    for name, data in sorted(blobs.items()):
        full = os.path.join(out_dir, name)
        atomic_write_bytes(full, data)
        written.append(full)
    return written


def _dispatch(cfg: ExperimentConfig, threads: int) -> dict[str, bytes]:
    runner = {
        "sample": _run_sample,
        "split": _run_split,
        "advantage": _run_advantage,
        "test": _run_test,
        "hidden": _run_hidden,
        "sweep": lambda c: _run_sweep(c, threads),
        "verdict": _run_verdict,
    }[cfg.experiment]
    return runner(cfg)


def _run_sample(cfg: ExperimentConfig) -> dict[str, bytes]:
    spec = cfg.model_spec()
    rng = RandomStream(cfg.seed)
    law = cfg.section("sample").get("law", "planted")
    if law not in ("planted", "null"):
        raise ConfigError("sample.law must be 'planted' or 'null'")
    inst = sample_planted(spec, rng) if law == "planted" \
        else sample_null(spec, rng)
    include_latent = bool(cfg.section("sample").get("include_latent", True))
    doc = instance_to_json(inst, include_latent=include_latent)
    return {"sample.json": canonical_json_bytes(doc)}


def _split_params_from_cfg(cfg: ExperimentConfig, spec):
    block = cfg.section("split")
    kind = block.get("kind", "gaussian")
    if kind == "gaussian":
        return GaussianSplitParams(kappa=float(block.get("kappa", 0.1)))
    if kind == "bernoulli":
        a = float(block.get("a", 0.95))
        b = float(block.get("b", 0.95))
        base = _binary_base_rate(spec)
        return BernoulliSplitParams(p=base, a=a, b=b)
    raise ConfigError("split.kind must be 'gaussian' or 'bernoulli'")


def _binary_base_rate(spec) -> float:
    if isinstance(spec, PlantedDenseSubgraph):
        return spec.p0
    if isinstance(spec, SBM):
        return spec.d / spec.n
    if isinstance(spec, MultiLayerSBM):
        return spec.d_layers[0] / spec.n
    raise ConfigError(f"model '{spec.kind}' has no Bernoulli base rate")


def _run_split(cfg: ExperimentConfig) -> dict[str, bytes]:
    spec = cfg.model_spec()
    rng = RandomStream(cfg.seed)
    law = cfg.section("sample").get("law", "planted") if "sample" in cfg.sections \
        else cfg.section("split").get("law", "planted")
    inst = sample_planted(spec, rng) if law == "planted" \
        else sample_null(spec, rng)
    params = _split_params_from_cfg(cfg, spec)
    split_rng = RandomStream(cfg.seed, stream_id=1)
    if isinstance(params, GaussianSplitParams):
        pair = gaussian_split(inst.observation, params, split_rng)
    else:
        obs = np.asarray(inst.observation)
        if obs.ndim == 2:
            pair = split_symmetric_binary(obs, params, split_rng)
        else:
            pair = bernoulli_split(obs, params, split_rng)
    doc = {
        "instance": instance_to_json(inst),
        "split": split_to_json(pair, split_rng),
    }
    return {"split.json": canonical_json_bytes(doc)}


def _run_advantage(cfg: ExperimentConfig) -> dict[str, bytes]:
    spec = cfg.model_spec()
    block = cfg.section("advantage")
    method = block.get("method", "auto")
    degrees = block["degrees"]
    trials = int(block.get("trials", 1000))
    rng = RandomStream(cfg.seed)
    if method == "auto":
        method = {
            "planted_submatrix": "overlap",
            "planted_dense_subgraph": "graph_sum",
            "sbm": "sbm_exact",
            "angular_sync": "angular_mc",
            "orth_sync": "orth_mc",
        }.get(spec.kind)
        if method is None:
            raise ConfigError(f"no default advantage method for {spec.kind}")

    def compute(i, d):
        if method == "overlap":
            return adv.adv2_submatrix_overlap(spec.n, spec.lam, spec.rho, d)
        if method == "graph_sum":
            lam = spec.effective_snr if isinstance(spec, PlantedDenseSubgraph) \
                else spec.lam
            return adv.adv2_graph_sum_binary(spec.n, lam, spec.rho, d)
        if method == "sbm_exact":
            return adv.adv2_sbm_exact(spec.n, spec.q, spec.d, spec.lam, d)
        if method == "angular_mc":
            return adv.adv2_angular_mc(spec.n, spec.L, spec.lam, d, trials,
                                       RandomStream(cfg.seed, stream_id=i))
        if method == "angular_surrogate":
            return adv.adv2_angular_surrogate(spec.L, spec.lam, d)
        if method == "orth_mc":
            return adv.adv2_orth_mc(spec.n, spec.d, spec.lam, d, trials,
                                    RandomStream(cfg.seed, stream_id=i))
        if method == "orth_surrogate":
            return adv.adv2_orth_surrogate(spec.d, spec.lam, d)
        raise ConfigError(f"unknown advantage method '{method}'")

    params = format_params({k: v for k, v in spec_to_json(spec).items()
                            if k != "kind"})
    rows = []
    for i, d in enumerate(degrees):
        rep = compute(i, int(d))
        rows.append({
            "experiment_id": f"advantage-{i}",
            "model": spec.kind,
            "params": params,
            "D": rep.degree,
            "method": rep.method,
            "value": rep.value,
            "stderr": rep.stderr,
            "seed": cfg.seed,
        })
    del rng
    return {"advantage.csv": csv_bytes(rows)}


def _estimator_from_cfg(block, spec):
    name = block.get("estimator", "spectral")
    if name == "spectral":
        return spectral_estimator
    if name == "degree":
        rho = getattr(spec, "rho", None)
        if rho is None:
            raise ConfigError("degree estimator needs a model with rho")
        est = lambda a: degree_estimator(a, rho)  # noqa: E731
        est.__name__ = "degree_estimator"
        return est
    if name == "oracle":
        return oracle_estimator
    raise ConfigError(f"unknown estimator '{name}'")


def _test_report(cfg: ExperimentConfig, spec):
    block = cfg.section("test")
    estimator = _estimator_from_cfg(block, spec)
    split = _split_params_from_cfg(cfg, spec)
    threshold = block.get("threshold", "lemma")
    if threshold != "lemma":
        threshold = float(threshold)
    return run_one_sided_experiment(
        spec, estimator, split, threshold,
        trials_p=int(block.get("trials_p", 100)),
        trials_q=int(block.get("trials_q", 100)),
        rng=RandomStream(cfg.seed),
        c=float(block.get("c", 0.3)),
        pilot_trials=int(block.get("pilot_trials", 0)),
    )


def _run_test(cfg: ExperimentConfig) -> dict[str, bytes]:
    report = _test_report(cfg, cfg.model_spec())
    return {"test.json": canonical_json_bytes(report.to_json())}


def _run_hidden(cfg: ExperimentConfig) -> dict[str, bytes]:
    spec = cfg.model_spec()
    block = cfg.section("hidden")
    n_obs = spec.n * spec.d if hasattr(spec, "d") and spec.kind == "orth_sync" \
        else spec.n
    direction = np.ones((n_obs, n_obs))
    if spec.kind in ("planted_dense_subgraph", "sbm", "multilayer_sbm"):
        detector = statistic_detector(
            direction, float(block.get("z_threshold", 3.0)), kind="binary",
            rate=_binary_base_rate(spec))
    else:
        detector = statistic_detector(
            direction, float(block.get("z_threshold", 3.0)))
    report = hidden_sample_experiment(
        spec, int(block["m"]), detector,
        trials=int(block.get("trials", 100)),
        rng=RandomStream(cfg.seed),
        trials_h0=int(block.get("trials_h0", block.get("trials", 100))),
        eps_trials=int(block.get("eps_trials", 0)),
    )
    return {"hidden.json": canonical_json_bytes(report.to_json())}


def _run_sweep(cfg: ExperimentConfig, threads: int) -> dict[str, bytes]:
    spec = cfg.model_spec()
    block = cfg.section("sweep")
    parameter = block["parameter"]
    values = block["values"]
    if not hasattr(spec, parameter):
        raise ConfigError(f"model '{spec.kind}' has no parameter "
                          f"'{parameter}'")

    def run_point(idx_value):
        idx, value = idx_value
        point_spec = dataclasses.replace(spec, **{parameter: value})
        point_cfg = ExperimentConfig(
            experiment="test", seed=RandomStream(cfg.seed).child(idx).seed,
            raw_text=cfg.raw_text, sections=cfg.sections, out=cfg.out,
        )
        return idx, value, _test_report(point_cfg, point_spec)

    items = list(enumerate(values))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = sorted(pool.map(run_point, items))
    else:
        results = [run_point(item) for item in items]

    params = format_params({k: v for k, v in spec_to_json(spec).items()
                            if k not in ("kind", parameter)})
    rows = []
    t1s, t2s, t1lo, t1hi, t2hi = [], [], [], [], []
    for idx, value, rep in results:
        rows.append({
            "experiment_id": f"sweep-{idx}",
            "model": spec.kind,
            "params": f"{params};{parameter}={value!r}".replace("'", ""),
            "method": rep.extras.get("estimator"),
            "value": rep.threshold,
            "typeI": rep.typeI_accuracy,
            "typeI_lo": rep.typeI_ci[0],
            "typeI_hi": rep.typeI_ci[1],
            "typeII": rep.typeII_error,
            "typeII_hi": rep.typeII_upper,
            "seed": cfg.seed,
        })
        t1s.append(rep.typeI_accuracy)
        t2s.append(rep.typeII_error)
        t1lo.append(rep.typeI_ci[0])
        t1hi.append(rep.typeI_ci[1])
        t2hi.append(rep.typeII_upper)

    gaps = [a - b for a, b in zip(t1s, t2s)]
    trend_ok = all(gaps[i + 1] >= gaps[i] - 0.15 for i in range(len(gaps) - 1))
    title = (f"{spec.kind}: sweep over {parameter} "
             f"[monotone-trend: {'pass' if trend_ok else 'fail'}]")
    svg = svg_line_chart(
        x=[float(v) for v in values],
        series={"typeI_accuracy": t1s, "typeII_error": t2s},
        x_label=parameter, y_label="rate", title=title,
        bands={"typeI_accuracy": (t1lo, t1hi),
               "typeII_error": ([0.0] * len(t2hi), t2hi)},
    )
    return {"sweep.csv": csv_bytes(rows), "sweep.svg": svg}


def _run_verdict(cfg: ExperimentConfig) -> dict[str, bytes]:
    block = dict(cfg.section("verdict"))
    try:
        inputs = ContiguityInputs(
            adv_sq=float(block["adv_sq"]),
            runtime_exponent=float(block["runtime_exponent"]),
            dimension=int(block["dimension"]),
            degree=int(block["degree"]),
            heuristic_constant=float(block["heuristic_constant"]),
            type1_accuracy=float(block["type1_accuracy"]),
            epsilon=float(block["epsilon"]),
            type1_floor=float(block.get("type1_floor", 0.05)),
            slack=float(block.get("slack", 0.01)),
        )
    except KeyError as exc:
        raise ConfigError(f"verdict section is missing field {exc}") from exc
    except InvalidSpec as exc:
        raise ConfigError(str(exc)) from exc
    verdict = contiguity_verdict(inputs)
    return {"verdict.json": canonical_json_bytes(verdict.to_json())}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plantedlab",
        description="Batch experiments on planted inference models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run a '{name}' config")
        p.add_argument("config", help="path to a TOML experiment config")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for sweep grids")
        p.add_argument("--out", default=None, help="output directory")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if cfg.experiment != args.command:
            raise ConfigError(
                f"config declares experiment '{cfg.experiment}' but the "
                f"'{args.command}' subcommand was invoked")
        written = run_config(args.config, seed=args.seed, out=args.out,
                             threads=args.threads)
    except (ConfigError, InvalidSpec) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except GUARD_ERRORS as exc:
        print(f"numeric guard tripped: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
