"""Circuit-depth lower bounds from subsystem purities of Bell samples."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .circuit import Architecture, Circuit, brickwork_clifford
from .estimators import subsystem_purity
from .samples import BellSampleSet
from .stabilizer import exact_subsystem_renyi2


@dataclass(frozen=True)
class DepthBoundResult:
    d_lower: int
    entropy_estimate: float
    subsystem: tuple[int, ...]
    tolerance: float
    flags: tuple[str, ...] = ()


def max_entanglement_bound(arch: Architecture, A, d: int) -> int:
    """min(|dA| d, |A|, n - |A|, floor(n/2)): the most Renyi-2 entropy depth d can build across A."""
    A = sorted(set(int(a) for a in A))
    if d < 0:
        raise ValueError("depth must be nonnegative")
    if arch.is_chain and not arch.is_contiguous(A):
        raise ValueError("chain bounds need a contiguous subsystem")
    n = arch.n
    return int(min(arch.boundary_count(A) * d, len(A), n - len(A), n // 2))


def half_cuts(arch: Architecture) -> list[tuple[int, ...]]:
    """Distinct contiguous subsystems of size floor(n/2) (cyclic intervals on a closed chain)."""
    n = arch.n
    h = n // 2
    if arch.kind == "chain_closed":
        cuts = {tuple(sorted((s + i) % n for i in range(h))) for s in range(n)}
        # complementary halves have equal entropy for pure states; keep one of each pair
        out = []
        for c in sorted(cuts):
            comp = tuple(q for q in range(n) if q not in c)
            if comp not in out:
                out.append(c)
        return out
    if arch.kind == "chain_open":
        return [tuple(range(s, s + h)) for s in range(n - h + 1)]
    return [tuple(range(h))]


def _min_depth_reaching(bound: Callable[[int], float], s_lower: float, d_max: int) -> tuple[int, tuple[str, ...]]:
    """Smallest d with bound(d) >= s_lower; the estimate cannot come from anything shallower."""
    for d in range(d_max + 1):
        if bound(d) >= s_lower - 1e-12:
            return d, ()
    return d_max, ("exceeds_bound",)


def _lower_entropy(p_hat: float, eps: float) -> float:
    return float(-np.log2(p_hat + eps)) if p_hat + eps < 1 else 0.0


def depth_test_max(
    samples: BellSampleSet,
    arch: Architecture,
    eps: float | None = None,
    A: Sequence[int] | None = None,
    n_sigma: float = 3.0,
) -> DepthBoundResult:
    """Depth certificate from half-system purities against the maximal-entanglement bound.

    For each candidate subsystem the purity estimate gives a lower entropy estimate
    S = -log2(P + eps); the certified depth is the smallest d whose bound E_A(d) reaches S.
    Without ``A`` every distinct contiguous half cut is tried and the largest certificate kept.
    ``eps`` defaults to ``n_sigma`` standard errors of each purity estimate.
    """
    cuts = [tuple(sorted(A))] if A is not None else half_cuts(arch)
    n = arch.n
    d_sat = 0
    while max_entanglement_bound(arch, cuts[0], d_sat) < min(len(cuts[0]), n - len(cuts[0]), n // 2):
        d_sat += 1
    best: DepthBoundResult | None = None
    for cut in cuts:
        est = subsystem_purity(samples, cut)
        tol = n_sigma * est.std_error if eps is None else eps
        s_low = _lower_entropy(est.value, tol)
        d, flags = _min_depth_reaching(lambda dd: max_entanglement_bound(arch, cut, dd), s_low, d_sat)
        res = DepthBoundResult(d, s_low, cut, tol, flags)
        if best is None or res.d_lower > best.d_lower:
            best = res
    return best


def depth_test_avg(
    per_circuit: Sequence[BellSampleSet],
    page_table: dict[int, float],
    eps: float | None = None,
    A: Sequence[int] | None = None,
    n_sigma: float = 3.0,
) -> DepthBoundResult:
    """Depth certificate from the circuit-averaged purity against a table d -> T_A(d).

    Purities are averaged over circuits first; the certified depth is the smallest tabulated
    d with T_A(d) >= -log2(mean P + eps), with an implicit T_A(0) = 0.
    """
    if not page_table:
        raise ValueError("empty page table")
    if not per_circuit:
        raise ValueError("no sample sets")
    n = per_circuit[0].n
    A = tuple(sorted(A)) if A is not None else tuple(range(n // 2))
    ests = [subsystem_purity(s, A) for s in per_circuit]
    vals = np.array([e.value for e in ests])
    # the spread over circuits already includes shot noise
    if len(vals) > 1:
        se = float(vals.std(ddof=1) / np.sqrt(len(vals)))
    else:
        se = ests[0].std_error
    tol = n_sigma * se if eps is None else eps
    s_low = _lower_entropy(float(vals.mean()), tol)
    table = {0: 0.0, **{int(k): float(v) for k, v in page_table.items()}}
    ds = sorted(table)
    flags: tuple[str, ...] = ("exceeds_bound",)
    d_out = ds[-1]
    for d in ds:
        if table[d] >= s_low - 1e-12:
            d_out, flags = d, ()
            break
    return DepthBoundResult(d_out, s_low, A, tol, flags)


def page_table(
    n: int,
    depths: Sequence[int],
    n_circuits: int = 500,
    seed=None,
    A: Sequence[int] | None = None,
    generator: Callable[[int, int, np.random.Generator], Circuit] | None = None,
) -> dict[int, float]:
    """T_A(d) = -log2 of the average exact subsystem purity over random circuits at each depth."""
    rng = np.random.default_rng(seed)
    A = tuple(range(n // 2)) if A is None else tuple(A)
    gen = generator or (lambda nn, d, r: brickwork_clifford(nn, d, r))
    out = {}
    for d in depths:
        pur = [2.0 ** (-exact_subsystem_renyi2(gen(n, d, rng), A)) for _ in range(n_circuits)]
        out[int(d)] = float(-np.log2(np.mean(pur)))
    return out


def page_table_to_json(table: dict[int, float], arch: str, n: int) -> str:
    return json.dumps({"arch": arch, "n": n, "values": {str(k): v for k, v in sorted(table.items())}}, indent=2)


def page_table_from_json(text: str) -> dict[int, float]:
    obj = json.loads(text)
    return {int(k): float(v) for k, v in obj["values"].items()}
