"""Config-driven experiments: circuit construction, engine choice, sweeps, gadget readout."""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import circuit as cm
from . import estimators as est
from . import statevector as sv
from .circuit import Circuit
from .noise import NoiseSpec, channel_from_config
from .samples import BellSampleSet
from .stabilizer import (
    FrameSource,
    bell_sample_clifford,
    clifford_ideal,
    dfe_estimate,
    sample_computational,
    simulate_tableau,
)
from .symplectic import PauliVec

ENGINES = ("stab", "sv", "auto")
ESTIMATORS = ("dfe", "overlap", "root_purity", "corrected_fidelity", "xeb", "rejection_rate", "exact_fidelity")


class ConfigError(ValueError):
    """Invalid experiment configuration; the message starts with the offending field path."""


# ---------------------------------------------------------------------------
# gadget


def gadget_p1_squared(C: Circuit, M: int, seed=None) -> est.EstimateWithError:
    """Estimate of p1^2 = <X_0>^2 on the gadget state, from the X_0 (x) X_0 sign mean of Bell samples."""
    psi = sv.simulate_state(cm.bqp_gadget(C))
    samples = sv.bell_sample_dense(psi, psi, M, seed)
    e = est.pauli_sq_expectation(samples, PauliVec.single(C.n + 1, 0, "X"))
    return est.EstimateWithError(e.value, e.std_error, M, e.flags, "gadget_p1_squared")


def gadget_p1(C: Circuit, M: int, seed=None) -> est.EstimateWithError:
    """p1 = Pr[qubit 0 of C|0^n> reads 1] as the square root of the gadget estimate of p1^2.

    Negative estimates are clipped to zero; the error comes from the delta method.
    """
    e = gadget_p1_squared(C, M, seed)
    v = max(e.value, 0.0)
    flags = () if e.value >= 0 else ("clipped",)
    se = e.std_error / (2 * math.sqrt(v)) if v > 0 else float("inf")
    return est.EstimateWithError(math.sqrt(v), se, M, flags, "gadget_p1")


def exact_p1(C: Circuit) -> float:
    psi = sv.simulate_state(C)
    n = C.n
    probs = np.abs(psi) ** 2
    return float(probs[(np.arange(2**n) >> (n - 1)) & 1 == 1].sum())


# ---------------------------------------------------------------------------
# configs


_GENERATORS = {
    "all_to_all": (("n", "layers"), lambda p, s: cm.random_all_to_all_clifford(p["n"], p["layers"], s)),
    "brickwork": (("n", "depth"), lambda p, s: cm.brickwork_clifford(p["n"], p["depth"], s, p.get("periodic", True))),
    "scrambling_brickwork": (("n", "depth"),
                             lambda p, s: cm.scrambling_brickwork(p["n"], p["depth"], s, p.get("periodic", True))),
    "crystalline": (("n", "depth"),
                    lambda p, s: cm.crystalline_floquet(p["n"], p["depth"], p.get("scrambling", True))),
    "clifford_t": (("n", "t"), lambda p, s: cm.clifford_plus_t_random(p["n"], p["t"], p.get("clifford_depth", 3), s)),
}


def _need_int(obj: dict, key: str, path: str, minimum: int = 0) -> int:
    v = obj.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        raise ConfigError(f"{path}.{key}: expected an integer >= {minimum}")
    return v


def build_circuit(block: dict, base: Path | None = None) -> Circuit:
    if not isinstance(block, dict):
        raise ConfigError("circuit: expected an object")
    if "file" in block:
        path = Path(block["file"])
        if base is not None and not path.is_absolute():
            path = base / path
        try:
            return cm.parse(path.read_text())
        except OSError as e:
            raise ConfigError(f"circuit.file: {e}") from None
    gen = block.get("generator")
    if gen not in _GENERATORS:
        raise ConfigError(f"circuit.generator: expected one of {sorted(_GENERATORS)} or a 'file' entry")
    keys, fn = _GENERATORS[gen]
    for k in keys:
        _need_int(block, k, "circuit", 0 if k != "n" else 1)
    seed = block.get("seed", 0)
    return fn(block, seed)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    circuit: dict
    noise: dict = field(default_factory=dict)
    sweep: dict | None = None
    engine: str = "auto"
    shots: int = 10000
    seed: int = 0
    estimators: tuple[str, ...] = ("root_purity",)
    base_dir: str | None = None

    @classmethod
    def from_dict(cls, obj: dict, base_dir: str | None = None) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config: expected an object")
        unknown = set(obj) - {"experiment", "circuit", "noise", "sweep", "engine", "shots", "seed", "estimators"}
        if unknown:
            raise ConfigError(f"config: unknown fields {sorted(unknown)}")
        if "seed" not in obj:
            raise ConfigError("seed: required")
        _need_int(obj, "seed", "config")
        if "shots" in obj:
            _need_int(obj, "shots", "config", 1)
        engine = obj.get("engine", "auto")
        if engine not in ENGINES:
            raise ConfigError(f"engine: expected one of {list(ENGINES)}")
        ests = obj.get("estimators", ["root_purity"])
        if not isinstance(ests, list) or not ests:
            raise ConfigError("estimators: expected a nonempty list")
        for i, e in enumerate(ests):
            if e not in ESTIMATORS:
                raise ConfigError(f"estimators[{i}]: unknown estimator {e!r}")
        noise = obj.get("noise", {}) or {}
        if not isinstance(noise, dict):
            raise ConfigError("noise: expected an object")
        for k in noise:
            if k not in ("channel", "measurement", "single_qubit"):
                raise ConfigError(f"noise.{k}: unknown field")
            try:
                channel_from_config(noise[k])
            except ValueError as e:
                raise ConfigError(f"noise.{k}: {e}") from None
        sweep = obj.get("sweep")
        if sweep is not None:
            if not isinstance(sweep, dict) or not isinstance(sweep.get("values"), list) or not sweep["values"]:
                raise ConfigError("sweep.values: expected a nonempty list of error rates")
            if sweep.get("axis", "pauli") not in ("pauli", "depolarizing"):
                raise ConfigError("sweep.axis: expected 'pauli' or 'depolarizing'")
            w = sweep.get("weights", [1 / 3, 1 / 3, 1 / 3])
            if not (isinstance(w, list) and len(w) == 3):
                raise ConfigError("sweep.weights: expected three numbers (X, Y, Z)")
        if not isinstance(obj.get("circuit"), dict):
            raise ConfigError("circuit: required object")
        return cls(
            experiment=str(obj.get("experiment", "experiment")),
            circuit=obj["circuit"],
            noise=noise,
            sweep=sweep,
            engine=engine,
            shots=int(obj.get("shots", 10000)),
            seed=int(obj["seed"]),
            estimators=tuple(ests),
            base_dir=base_dir,
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        p = Path(path)
        try:
            obj = json.loads(p.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"config: JSON error at line {e.lineno} column {e.colno}: {e.msg}") from None
        return cls.from_dict(obj, str(p.parent))

    def points(self) -> list[dict]:
        """Noise blocks for each sweep point (a single point without a sweep)."""
        if self.sweep is None:
            return [dict(self.noise)]
        out = []
        for v in self.sweep["values"]:
            v = float(v)
            if self.sweep.get("axis", "pauli") == "depolarizing":
                ch = {"depolarizing": v}
            else:
                w = self.sweep.get("weights", [1 / 3, 1 / 3, 1 / 3])
                ch = {"px": v * w[0], "py": v * w[1], "pz": v * w[2]}
            blk = dict(self.noise)
            blk["channel"] = ch
            if self.sweep.get("measurement", False):
                blk["measurement"] = ch
            out.append(blk)
        return out

    def sweep_value(self, i: int):
        return None if self.sweep is None else float(self.sweep["values"][i])


# ---------------------------------------------------------------------------
# engines


def select_engine(C: Circuit, engine: str) -> str:
    if engine == "auto":
        return "stab" if C.is_clifford() else "sv"
    if engine == "stab":
        C.require_clifford()
    return engine


def bell_samples(C: Circuit, noise: NoiseSpec, M: int, engine: str, rng: np.random.Generator) -> BellSampleSet:
    if select_engine(C, engine) == "stab":
        return bell_sample_clifford(C, noise, M, rng)
    if noise.is_noiseless:
        psi = sv.simulate_state(C)
        return sv.bell_sample_dense(psi, psi, M, rng)
    rho = sv.evolve_density(C, noise)
    return sv.apply_readout_flips(sv.bell_sample_density(rho, None, M, rng), noise.readout(), rng)


def computational_samples(C: Circuit, noise: NoiseSpec, M: int, engine: str, rng: np.random.Generator) -> np.ndarray:
    if select_engine(C, engine) == "stab":
        return sample_computational(C, noise, M, rng)
    return sv.computational_from_density(sv.evolve_density(C, noise), M, noise.readout(), rng)


def _ideal(C: Circuit, engine: str):
    if select_engine(C, engine) == "stab":
        return clifford_ideal(C)
    return est.DenseIdeal(np.abs(sv.simulate_state(C)) ** 2)


def build_circuits(cfg: "ExperimentConfig") -> list[Circuit]:
    """The circuit instances of an experiment; instance i > 0 draws its generator seed from (seed, i)."""
    block = cfg.circuit
    k = block.get("instances", 1)
    if not isinstance(k, int) or k < 1:
        raise ConfigError("circuit.instances: expected an integer >= 1")
    base = Path(cfg.base_dir) if cfg.base_dir else None
    if k == 1:
        return [build_circuit(block, base)]
    seed = block.get("seed", 0)
    return [build_circuit({**block, "seed": np.random.default_rng([seed, i])}, base) for i in range(k)]


def _estimate(name: str, C: Circuit, noise: NoiseSpec, M: int, engine: str, rng, cache: dict) -> dict:
    if name in ("overlap", "root_purity", "corrected_fidelity", "rejection_rate"):
        if "samples" not in cache:
            cache["samples"] = bell_samples(C, noise, M, engine, rng)
        samples = cache["samples"]
        if name == "overlap":
            r = est.overlap_estimate(samples)
        elif name == "root_purity":
            r = est.root_purity_fidelity(samples)
        elif name == "corrected_fidelity":
            r = est.corrected_fidelity(samples, max(noise.m, 1), C.n)
        else:
            _, rate = est.error_detect_filter(samples)
            r = est.EstimateWithError(rate, math.sqrt(rate * (1 - rate) / M), M, (), name)
        return {"value": r.value, "std_error": r.std_error, "M": r.M, "flags": r.flags}
    if name == "dfe":
        C.require_clifford()
        if select_engine(C, engine) == "stab":
            src = FrameSource(C, noise, measurement_noise=False)
        else:
            src = sv.DensitySource(sv.evolve_density(C, noise))
        d = dfe_estimate(simulate_tableau(C), src, M, rng)
        return {"value": d.value, "std_error": d.std_error, "M": d.M, "flags": ()}
    if name == "xeb":
        z = computational_samples(C, noise, M, engine, rng)
        x = est.xeb(z, _ideal(C, engine))
        return {"value": x.f_xeb, "std_error": x.std_error, "M": M, "flags": (), "chi": x.chi,
                "chi_ideal": x.chi_ideal, "chi_se": x.std_error * abs(x.chi_ideal) if not x.undefined else float("nan")}
    if name == "exact_fidelity":
        rho = sv.evolve_density(C, noise)
        return {"value": sv.exact_fidelity(rho, sv.simulate_state(C)), "std_error": 0.0, "M": 0, "flags": ()}
    raise ConfigError(f"estimators: unknown estimator {name!r}")


def _combine(name: str, parts: list[dict]) -> dict:
    """Circuit average; XEB averages chi and chi_ideal separately and takes their ratio."""
    K = len(parts)
    flags = tuple(sorted({f for p in parts for f in p["flags"]}))
    M = sum(p["M"] for p in parts)
    if name == "xeb":
        chi = float(np.mean([p["chi"] for p in parts]))
        chi_ideal = float(np.mean([p["chi_ideal"] for p in parts]))
        if abs(chi_ideal) < 1e-12:
            return {"value": float("nan"), "std_error": float("nan"), "M": M, "flags": flags + ("undefined",)}
        if K == 1:
            return {"value": chi / chi_ideal, "std_error": parts[0]["std_error"], "M": M, "flags": flags}
        chi_se = math.sqrt(sum(p["chi_se"] ** 2 for p in parts if math.isfinite(p["chi_se"]))) / K
        return {"value": chi / chi_ideal, "std_error": chi_se / abs(chi_ideal), "M": M, "flags": flags}
    value = float(np.mean([p["value"] for p in parts]))
    se = math.sqrt(sum(p["std_error"] ** 2 for p in parts)) / K
    return {"value": value, "std_error": se, "M": M, "flags": flags}


def evaluate_point(cfg: ExperimentConfig, point: int, circuits: list[Circuit] | None = None) -> list[dict]:
    """All configured estimators at one sweep point, with RNG streams derived from (seed, point)."""
    circuits = build_circuits(cfg) if circuits is None else circuits
    blk = cfg.points()[point]
    noises = [NoiseSpec.from_config(blk, C) for C in circuits]
    streams = np.random.SeedSequence([cfg.seed, point]).spawn(len(cfg.estimators) * len(circuits))
    caches: list[dict] = [{} for _ in circuits]
    rows = []
    for e, name in enumerate(cfg.estimators):
        base = {"experiment": cfg.experiment, "point": point, "estimator": name}
        try:
            parts = []
            for i, (C, noise) in enumerate(zip(circuits, noises)):
                rng = np.random.default_rng(streams[e * len(circuits) + i])
                parts.append(_estimate(name, C, noise, cfg.shots, cfg.engine, rng, caches[i]))
            rows.append({**base, **_combine(name, parts)})
        except (sv.ResourceError, cm.UnsupportedGateError, est.UnstableEstimateError) as exc:
            rows.append({**base, "value": float("nan"), "std_error": float("nan"), "M": cfg.shots,
                         "flags": (type(exc).__name__,), "error": str(exc)})
    return rows


def _eval_star(args):
    return evaluate_point(*args)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list[dict]:
    """Rows for every (sweep point, estimator); results do not depend on ``workers``."""
    circuits = build_circuits(cfg)
    jobs = [(cfg, i, circuits) for i in range(len(cfg.points()))]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(_eval_star, jobs))
    else:
        chunks = [_eval_star(j) for j in jobs]
    return [{k: v for k, v in r.items() if k in _ROW_KEYS} for c in chunks for r in c]


_ROW_KEYS = ("experiment", "point", "estimator", "value", "std_error", "M", "flags", "error")


def rows_to_csv(rows: list[dict]) -> str:
    out = []
    for r in rows:
        rr = dict(r)
        rr["value"] = repr(float(r["value"]))
        rr["std_error"] = repr(float(r["std_error"]))
        out.append(rr)
    return est.records_to_csv(out)


__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "build_circuit",
    "build_circuits",
    "bell_samples",
    "computational_samples",
    "evaluate_point",
    "exact_p1",
    "gadget_p1",
    "gadget_p1_squared",
    "run_experiment",
    "rows_to_csv",
    "select_engine",
]
