"""Command-line entry point: ``bellsampling <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import circuit as cm
from . import depth, estimators, learning
from . import statevector as sv
from .experiments import (
    ConfigError,
    ExperimentConfig,
    bell_samples,
    exact_p1,
    gadget_p1,
    rows_to_csv,
    run_experiment,
)
from .noise import NoiseSpec
from .samples import BellSampleSet
from .symplectic import PauliVec

PRESETS = ("fig2a-desk", "figS1a-desk", "figS1d-desk")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj, out: str | None) -> None:
    _emit(json.dumps(obj, indent=2) + "\n", out)


def _load_circuit(path: str) -> cm.Circuit:
    return cm.parse(Path(path).read_text())


def _noise_block(text: str | None) -> dict:
    if not text:
        return {}
    try:
        blk = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"--noise: {e.msg}") from None
    if not isinstance(blk, dict):
        raise ConfigError("--noise: expected a JSON object")
    return blk


def _qubits(text: str | None) -> list[int] | None:
    if text is None:
        return None
    return [int(v) for v in text.split(",") if v.strip()]


# ---------------------------------------------------------------------------
# subcommands


def cmd_sample_bell(a) -> int:
    C = _load_circuit(a.circuit)
    noise = NoiseSpec.from_config(_noise_block(a.noise), C)
    s = bell_samples(C, noise, a.shots, a.engine, np.random.default_rng(a.seed))
    if a.labels:
        _emit("\n".join(str(p) for p in s.paulis()) + "\n", a.out)
    else:
        _emit(s.dumps(), a.out)
    return 0


def cmd_estimate(a) -> int:
    s = BellSampleSet.load(a.samples)
    name = a.estimator
    if name == "overlap":
        r = estimators.overlap_estimate(s)
    elif name == "root_purity":
        r = estimators.root_purity_fidelity(s)
    elif name == "corrected_fidelity":
        if a.m is None:
            raise ConfigError("--m: required for corrected_fidelity")
        r = estimators.corrected_fidelity(s, a.m)
    elif name == "subsystem_purity":
        r = estimators.subsystem_purity(s, _qubits(a.subsystem) or [])
    elif name in ("pauli_sq", "virtual_distillation"):
        if not a.pauli:
            raise ConfigError("--pauli: required")
        P = PauliVec.parse(a.pauli)
        r = estimators.pauli_sq_expectation(s, P) if name == "pauli_sq" else estimators.virtual_distillation(s, P)
    else:
        _, rate = estimators.error_detect_filter(s)
        r = estimators.EstimateWithError(rate, float(np.sqrt(rate * (1 - rate) / s.M)), s.M, (), "rejection_rate")
    _emit_json(r.record(), a.out)
    return 0


def _arch(kind: str, n: int) -> cm.Architecture:
    if kind == "all_to_all":
        return cm.Architecture.all_to_all(n)
    return cm.Architecture.chain(n, closed=(kind == "chain_closed"))


def cmd_depth_test(a) -> int:
    sets = [BellSampleSet.load(p) for p in a.samples]
    n = sets[0].n
    A = _qubits(a.subsystem)
    if a.page_table:
        table = depth.page_table_from_json(Path(a.page_table).read_text())
        r = depth.depth_test_avg(sets, table, a.eps, A)
    else:
        if len(sets) != 1:
            raise ConfigError("samples: the maximal-entanglement test takes one sample file")
        r = depth.depth_test_max(sets[0], _arch(a.arch, n), a.eps, A)
    _emit_json({"d_lower": r.d_lower, "entropy_estimate": r.entropy_estimate, "subsystem": list(r.subsystem),
                "tolerance": r.tolerance, "flags": list(r.flags)}, a.out)
    return 0


def cmd_magic(a) -> int:
    s = BellSampleSet.load(a.samples)
    m = learning.magic_estimate(s, a.mode)
    _emit_json({"t_hat": m.t_hat, "dim_G_prime": m.G_prime.dim, "nullity_radical": m.nullity_radical,
                "flags": list(m.flags)}, a.out)
    return 0


def cmd_learn_ct(a) -> int:
    C = _load_circuit(a.circuit)
    psi = sv.simulate_state(C)
    L = learning.learn_clifford_t(learning.DenseLearningSource(psi), a.eps, a.delta, a.seed, t_cap=a.t_cap)
    _emit(L.to_json() + "\n", a.out)
    report = {"t_hat": L.t_hat, "k": len(L.x)}
    try:
        report["fidelity"] = float(abs(np.vdot(psi, learning.reconstruct_state(L))) ** 2)
    except sv.ResourceError:
        report["fidelity"] = None
    # keep stdout clean for the learned state when it is not going to a file
    stream = sys.stderr if a.out is None else sys.stdout
    stream.write(json.dumps(report) + "\n")
    return 0


_PAGE_GENERATORS = {
    "brickwork": lambda n, d, r: cm.brickwork_clifford(n, d, r),
    "scrambling_brickwork": lambda n, d, r: cm.scrambling_brickwork(n, d, r),
}


def cmd_page_table(a) -> int:
    depths = [int(v) for v in a.depths.split(",")]
    table = depth.page_table(a.n, depths, a.circuits, a.seed, _qubits(a.subsystem), _PAGE_GENERATORS[a.generator])
    _emit(depth.page_table_to_json(table, "chain_closed", a.n) + "\n", a.out)
    return 0


def cmd_gadget_p1(a) -> int:
    C = _load_circuit(a.circuit)
    r = gadget_p1(C, a.shots, a.seed)
    rec = r.record()
    if C.n + 1 <= sv.STATE_CAP:
        rec["exact"] = exact_p1(C)
    _emit_json(rec, a.out)
    return 0


def _preset_path(name: str) -> Path:
    if name not in PRESETS:
        raise ConfigError(f"--preset: expected one of {list(PRESETS)}")
    return Path(str(resources.files("bellsampling") / "presets" / f"{name}.json"))


def cmd_run(a) -> int:
    if bool(a.config) == bool(a.preset):
        raise ConfigError("run: give exactly one of --config or --preset")
    path = Path(a.config) if a.config else _preset_path(a.preset)
    cfg = ExperimentConfig.load(path)
    over = {}
    if a.seed is not None:
        over["seed"] = a.seed
    if a.shots is not None:
        over["shots"] = a.shots
    if a.engine is not None:
        over["engine"] = a.engine
    if over:
        cfg = ExperimentConfig(**{**cfg.__dict__, **over})
    rows = run_experiment(cfg, a.workers)
    _emit(rows_to_csv(rows), a.out)
    for r in rows:
        if "error" in r:
            sys.stderr.write(json.dumps({"point": r["point"], "estimator": r["estimator"], "error": r["error"]}) + "\n")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bellsampling", description="Bell-sampling experiments and protocols.")
    sub = p.add_subparsers(dest="command", metavar="<subcommand>")
    sub.required = True

    def common(sp, shots=True, engine=False):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="output path (default: stdout)")
        if shots:
            sp.add_argument("--shots", type=int, default=10000)
        if engine:
            sp.add_argument("--engine", choices=("stab", "sv", "auto"), default="auto")

    sp = sub.add_parser("sample-bell", help="Bell samples of two copies of a circuit state")
    sp.add_argument("--circuit", required=True)
    sp.add_argument("--noise", help='noise block as JSON, e.g. \'{"channel": {"depolarizing": 0.01}}\'')
    sp.add_argument("--labels", action="store_true", help="write Pauli labels instead of the bit file")
    common(sp, engine=True)
    sp.set_defaults(func=cmd_sample_bell)

    sp = sub.add_parser("estimate", help="estimators on a Bell sample file")
    sp.add_argument("--samples", required=True)
    sp.add_argument("--estimator", default="overlap",
                    choices=("overlap", "root_purity", "corrected_fidelity", "subsystem_purity", "pauli_sq",
                             "virtual_distillation", "rejection_rate"))
    sp.add_argument("--pauli")
    sp.add_argument("--subsystem", help="comma-separated qubits")
    sp.add_argument("--m", type=int, help="two-qubit gate count for corrected_fidelity")
    common(sp, shots=False)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("depth-test", help="certified lower bound on circuit depth")
    sp.add_argument("--samples", nargs="+", required=True)
    sp.add_argument("--arch", choices=("chain_closed", "chain_open", "all_to_all"), default="chain_closed")
    sp.add_argument("--eps", type=float)
    sp.add_argument("--subsystem")
    sp.add_argument("--page-table")
    common(sp, shots=False)
    sp.set_defaults(func=cmd_depth_test)

    sp = sub.add_parser("magic", help="lower bound on the T count")
    sp.add_argument("--samples", required=True)
    sp.add_argument("--mode", choices=("pairs", "all"), default="pairs")
    common(sp, shots=False)
    sp.set_defaults(func=cmd_magic)

    sp = sub.add_parser("learn-ct", help="learn a Clifford+T state from copies of a circuit state")
    sp.add_argument("--circuit", required=True)
    sp.add_argument("--eps", type=float, default=0.05)
    sp.add_argument("--delta", type=float, default=0.05)
    sp.add_argument("--t-cap", type=int, default=6)
    common(sp, shots=False)
    sp.set_defaults(func=cmd_learn_ct)

    sp = sub.add_parser("page-table", help="average half-chain entropies of random brickwork circuits")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--depths", default="1,2,3,4")
    sp.add_argument("--circuits", type=int, default=500)
    sp.add_argument("--subsystem")
    sp.add_argument("--generator", choices=sorted(_PAGE_GENERATORS), default="brickwork")
    common(sp, shots=False)
    sp.set_defaults(func=cmd_page_table)

    sp = sub.add_parser("gadget-p1", help="output probability of qubit 0 via the Bell-sampling gadget")
    sp.add_argument("--circuit", required=True)
    common(sp)
    sp.set_defaults(func=cmd_gadget_p1)

    sp = sub.add_parser("run", help="run a config or preset sweep and write CSV")
    sp.add_argument("--config")
    sp.add_argument("--preset", choices=PRESETS)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--shots", type=int)
    sp.add_argument("--engine", choices=("stab", "sv", "auto"))
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_run)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, RuntimeError, OSError, cm.CircuitParseError) as e:
        rec = {"error": type(e).__name__, "message": str(e)}
        if isinstance(e, cm.CircuitParseError):
            rec.update(line=e.line, column=e.col)
        sys.stderr.write(json.dumps(rec) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
