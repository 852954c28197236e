"""Desk-scale drivers for the regression and low-rank experiments.

Every trial draws its data and its sketches from its own substream of the
config seed, trials may run on a thread pool, and rows are gathered in trial
order, so a config always produces the same document.
"""
import csv
import dataclasses
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..lowrank import LowRankError, lp_lowrank_best, lp_loss, pca_baseline
from ..matrix import MatrixHandle
from ..orlicz import make_orlicz
from ..randgen import SeedSpec
from ..regression import (NumericalFailure, RegressionError, l1_regress, least_squares,
                          orlicz_regress)
from .oracle import approximation_ratio, oracle_solve
from .simulate import NoiseSpec, add_outliers, simulate_lowrank, simulate_regression

log = logging.getLogger(__name__)

EXPERIMENTS = ("control", "delta_sweep", "g15", "lowrank", "ratio")

# sketch attempts use keys 0 and 1 of a trial's stream; data sits far away
DATA_KEY = 1 << 20


class ConfigError(ValueError):
    pass


_DEFAULT_NOISE = {
    "control": NoiseSpec.gaussian(50.0),
    "delta_sweep": NoiseSpec.mixed(5.0, 0.01, 0.0),
    "g15": NoiseSpec.mixed(5.0, 0.002, 100.0),
    "ratio": NoiseSpec.mixed(5.0, 0.03, 1.0),
    "lowrank": NoiseSpec.gaussian(0.0),
}


@dataclass
class ExperimentConfig:
    experiment: str
    n: int = 200
    d: int = 10
    k: int = 5
    family: str = "huber"
    param: float = 0.75
    deltas: tuple = (0.05, 0.1, 0.2, 0.4, 1.0, 2.0)
    scales: tuple = (0.0, 0.5, 1.0, 2.0)
    g15_delta: float = 0.25
    noise: NoiseSpec = None
    trials: int = 50
    seed: int = 0
    mode: str = "auto"
    variant: str = "theoretical"
    restarts: int = 50
    ranks: tuple = ()
    outliers: int = 100
    outlier_scale: float = 100.0
    outlier_fraction: float = 0.01
    input: str = None
    input_format: str = "dense_csv"
    threads: int = 1
    out: str = field(default=None, compare=False)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.noise is None:
            self.noise = _DEFAULT_NOISE[self.experiment]
        elif isinstance(self.noise, dict):
            self.noise = NoiseSpec(**self.noise)
        self.deltas = tuple(float(v) for v in self.deltas)
        self.scales = tuple(float(v) for v in self.scales)
        self.ranks = tuple(int(v) for v in self.ranks) or (int(self.k),)
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if min(self.n, self.d, self.k, self.restarts, self.threads) < 1:
            raise ConfigError("n, d, k, restarts and threads must be positive")
        if not self.deltas or min(self.deltas) <= 0:
            raise ConfigError("deltas must be a nonempty list of positive values")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")

    @classmethod
    def from_mapping(cls, data):
        """Build from a flat key-value mapping (config file or CLI).

        Noise is given as ``noise_kind``, ``noise_sigma``, ``noise_fraction``
        and ``noise_scale``; list fields accept comma-separated strings.
        """
        data = dict(data)
        names = {f.name: f for f in dataclasses.fields(cls)}
        noise = {}
        for key in ("kind", "sigma", "fraction", "scale"):
            if "noise_" + key in data:
                noise[key] = data.pop("noise_" + key)
        if isinstance(data.get("noise"), dict):
            noise.update(data.pop("noise"))
        kwargs = {}
        for key, value in data.items():
            if key not in names:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(key, value, names[key].default)
        if noise:
            base = _DEFAULT_NOISE.get(kwargs.get("experiment"), NoiseSpec())
            merged = base.as_dict()
            merged.update(noise)
            try:
                kwargs["noise"] = NoiseSpec(
                    str(merged["kind"]), float(merged["sigma"]),
                    float(merged["fraction"]), float(merged["scale"]))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad noise settings: {exc}") from None
        if "experiment" not in kwargs:
            raise ConfigError("config needs an 'experiment' key")
        return cls(**kwargs)

    def as_dict(self):
        out = dataclasses.asdict(self)
        out["noise"] = self.noise.as_dict()
        out["deltas"] = list(self.deltas)
        out["scales"] = list(self.scales)
        out["ranks"] = list(self.ranks)
        # thread count and destination never change the results
        out.pop("threads")
        out.pop("out")
        return out


def _coerce(key, value, default):
    if isinstance(value, str):
        value = value.strip()
    try:
        if key in ("deltas", "scales", "ranks"):
            if isinstance(value, str):
                value = [v for v in value.split(",") if v.strip()]
            return tuple(value)
        if key in ("input", "out"):
            return None if value in ("", None) else str(value)
        if isinstance(default, bool):
            return str(value).lower() in ("1", "true", "yes")
        if isinstance(default, int):
            f = float(value)
            if f != int(f):
                raise ValueError(f"{value!r} is not an integer")
            return int(f)
        if isinstance(default, float):
            return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from None
    return value


def _l15(delta):
    return make_orlicz("l15", delta)


def _regression_methods(cfg):
    if cfg.experiment == "control":
        return [("l1", None), ("l2", None), ("orlicz", make_orlicz(cfg.family, cfg.param))]
    if cfg.experiment == "g15":
        return [("l1", None), ("l1.5", make_orlicz("power", 1.5)), ("l2", None),
                ("huber_0.25", make_orlicz("huber", 0.25)),
                ("huber_0.75", make_orlicz("huber", 0.75)),
                ("g_l1.5", _l15(cfg.g15_delta))]
    raise AssertionError(cfg.experiment)


def _fit(method, g, A, b, sketch_seed, mode):
    if method == "l1":
        return l1_regress(A.to_dense(), b)
    if method == "l2":
        return least_squares(A.to_dense(), b)
    return orlicz_regress(g, A, b, seed=sketch_seed, mode=mode).solution


def _row(**kw):
    return {k: (float(v) if isinstance(v, (np.floating, float)) else v) for k, v in kw.items()}


def _regression_trial(cfg, trial):
    spec = SeedSpec(cfg.seed, trial)
    A, b, x_star = simulate_regression(cfg.n, cfg.d, cfg.noise, spec.generator(DATA_KEY))
    rows = []
    for method, g in _regression_methods(cfg):
        x = _fit(method, g, A, b, spec, cfg.mode)
        rows.append(_row(trial=trial, method=method, error=np.linalg.norm(x - x_star)))
    return rows


def _sweep_trial(cfg, trial):
    rows = []
    for si, s in enumerate(cfg.scales):
        spec = SeedSpec(cfg.seed, trial * len(cfg.scales) + si)
        noise = NoiseSpec.mixed(cfg.noise.sigma, cfg.noise.fraction, s)
        A, b, x_star = simulate_regression(cfg.n, cfg.d, noise, spec.generator(DATA_KEY))
        for delta in cfg.deltas:
            x = orlicz_regress(make_orlicz("huber", delta), A, b, seed=spec, mode=cfg.mode).solution
            rows.append(_row(trial=trial, method="huber", s=s, delta=delta,
                             error=np.linalg.norm(x - x_star)))
    return rows


def _ratio_trial(cfg, trial):
    spec = SeedSpec(cfg.seed, trial)
    g = make_orlicz(cfg.family, cfg.param)
    A, b, _ = simulate_regression(cfg.n, cfg.d, cfg.noise, spec.generator(DATA_KEY))
    fit = orlicz_regress(g, A, b, seed=spec, mode=cfg.mode)
    oracle = oracle_solve(g, A, b)
    raw = approximation_ratio(g, A, b, fit.solution, oracle=oracle, clamp=False)
    return [_row(trial=trial, method="orlicz", loss=fit.loss, oracle_loss=oracle.loss,
                 raw_ratio=raw, ratio=max(raw, 1.0), oracle_converged=oracle.converged)]


def _lowrank_matrix(cfg, trial):
    spec = SeedSpec(cfg.seed, trial)
    if cfg.input:
        from .io import load_matrix
        A = load_matrix(cfg.input, cfg.input_format)
        return add_outliers(A, cfg.outlier_fraction, cfg.outlier_scale,
                            spec.generator(DATA_KEY)), None
    return simulate_lowrank(cfg.n, cfg.d, cfg.k, cfg.outliers, cfg.outlier_scale,
                            spec.generator(DATA_KEY))


def _lowrank_trial(cfg, trial):
    A, planted = _lowrank_matrix(cfg, trial)
    spec = SeedSpec(cfg.seed, trial)
    rows = []
    for k in cfg.ranks:
        ours = lp_lowrank_best(A, k, 1.0, cfg.variant, seed=spec, restarts=cfg.restarts)
        pca = pca_baseline(A, k, 1.0)
        rows.append(_row(trial=trial, k=k, method="ours", loss_1=ours.loss_p))
        rows.append(_row(trial=trial, k=k, method="pca", loss_1=pca.loss_p))
        if planted is not None and k == cfg.k:
            eye = np.eye(planted.shape[1])
            rows.append(_row(trial=trial, k=k, method="planted",
                             loss_1=lp_loss(A, planted, eye, 1.0)))
    return rows


_TRIALS = {
    "control": _regression_trial,
    "g15": _regression_trial,
    "delta_sweep": _sweep_trial,
    "ratio": _ratio_trial,
    "lowrank": _lowrank_trial,
}


def _safe(fn, cfg, trial):
    try:
        return fn(cfg, trial)
    except (NumericalFailure, RegressionError, LowRankError) as exc:
        log.warning("trial %d failed: %s", trial, exc)
        return [{"trial": trial, "method": "failed", "reason": str(exc)}]


def _mean(values):
    values = [v for v in values if v is not None and math.isfinite(v)]
    return float(np.mean(values)) if values else math.nan


def _summarize(cfg, rows):
    ok = [r for r in rows if r["method"] != "failed"]
    failed = len(rows) - len(ok)
    if cfg.experiment == "delta_sweep":
        table = []
        best = {}
        for s in cfg.scales:
            means = [(_mean(r["error"] for r in ok if r["s"] == s and r["delta"] == dl), dl)
                     for dl in cfg.deltas]
            table += [{"s": s, "delta": dl, "mean_error": m} for m, dl in means]
            best[repr(s)] = min(means)[1]
        return {"mean_error": table, "best_delta": best, "failed": failed}
    if cfg.experiment == "ratio":
        raws = [r["raw_ratio"] for r in ok]
        return {"max_ratio": max(raws) if raws else math.nan,
                "median_ratio": float(np.median(raws)) if raws else math.nan,
                "min_raw_ratio": min(raws) if raws else math.nan, "failed": failed}
    key = "loss_1" if cfg.experiment == "lowrank" else "error"
    methods = list(dict.fromkeys(r["method"] for r in ok))
    if cfg.experiment == "lowrank":
        means = {f"{m}@k={k}": _mean(r[key] for r in ok if r["method"] == m and r["k"] == k)
                 for k in cfg.ranks for m in methods}
        wins = {}
        for k in cfg.ranks:
            by = {}
            for r in ok:
                if r["k"] == k:
                    by.setdefault(r["trial"], {})[r["method"]] = r[key]
            wins[str(k)] = sum(1 for v in by.values() if v.get("ours", math.inf) < v.get("pca", -1))
        return {"mean_loss_1": means, "ours_beats_pca": wins, "failed": failed}
    return {"mean_error": {m: _mean(r[key] for r in ok if r["method"] == m) for m in methods},
            "failed": failed}


def run_experiment(cfg):
    """Run every trial of ``cfg`` and return ``{config, rows, summary, version}``."""
    fn = _TRIALS[cfg.experiment]
    trials = range(cfg.trials)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            chunks = list(pool.map(lambda t: _safe(fn, cfg, t), trials))
    else:
        chunks = [_safe(fn, cfg, t) for t in trials]
    rows = [r for chunk in chunks for r in chunk]
    return {"config": cfg.as_dict(), "rows": rows, "summary": _summarize(cfg, rows),
            "version": __version__}


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def results_json(doc):
    return json.dumps(doc, indent=2, default=_json_default) + "\n"


def rows_csv(rows):
    """Rows as CSV; columns are the union of row keys in first-seen order."""
    cols = list(dict.fromkeys(k for r in rows for k in r))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def summary_rows(doc):
    """Flatten a summary into rows; delta_sweep yields (s, delta, mean_error)."""
    summary = doc["summary"]
    if doc["config"]["experiment"] == "delta_sweep":
        return list(summary["mean_error"])
    out = []
    for key, value in summary.items():
        if isinstance(value, dict):
            out += [{"metric": key, "name": k, "value": v} for k, v in value.items()]
        else:
            out.append({"metric": key, "name": "", "value": value})
    return out


def write_results(doc, path, fmt="json"):
    """Write the document. CSV output goes to ``path`` (rows) and
    ``<stem>.summary.csv`` (summary)."""
    if fmt == "json":
        with open(path, "w") as fh:
            fh.write(results_json(doc))
        return [path]
    if fmt != "csv":
        raise ConfigError(f"unknown format {fmt!r}")
    stem = path[:-4] if path.endswith(".csv") else path
    extra = stem + ".summary.csv"
    with open(path, "w") as fh:
        fh.write(rows_csv(doc["rows"]))
    with open(extra, "w") as fh:
        fh.write(rows_csv(summary_rows(doc)))
    return [path, extra]
