"""Estimators computed from Bell samples, plus XEB."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .samples import BellSampleSet
from .symplectic import PauliVec, span_bits


class UnstableEstimateError(ArithmeticError):
    """Denominator of a ratio estimator is too close to zero."""


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    std_error: float
    M: int
    flags: tuple[str, ...] = ()
    estimator: str = ""

    def record(self) -> dict:
        return {"estimator": self.estimator, "value": self.value, "std_error": self.std_error,
                "M": self.M, "flags": list(self.flags)}

    def to_json(self) -> str:
        return json.dumps(self.record())


def records_to_csv(rows: list[dict], header=("experiment", "point", "estimator", "value", "std_error", "M", "flags")) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        out = dict(r)
        out["flags"] = ";".join(r.get("flags", ()))
        w.writerow([out.get(h, "") for h in header])
    return buf.getvalue()


def _sign_mean(signs: np.ndarray, name: str) -> EstimateWithError:
    M = signs.shape[0]
    if M == 0:
        raise ValueError("no samples")
    v = float(signs.mean())
    se = float(np.sqrt(max(1.0 - v * v, 0.0) / M))
    return EstimateWithError(v, se, M, (), name)


def _signs_from_parity(par: np.ndarray) -> np.ndarray:
    return 1.0 - 2.0 * par.astype(np.float64)


def overlap_estimate(samples: BellSampleSet) -> EstimateWithError:
    """(#even Y-parity - #odd Y-parity) / M, an unbiased estimate of tr(rho sigma)."""
    return _sign_mean(_signs_from_parity(samples.y_parities()), "overlap")


def subsystem_purity(samples: BellSampleSet, A) -> EstimateWithError:
    """Same sign count restricted to the qubits in A."""
    A = sorted(set(int(a) for a in A))
    if any(a < 0 or a >= samples.n for a in A):
        raise ValueError("subsystem index out of range")
    if not A:
        return EstimateWithError(1.0, 0.0, samples.M, ("degenerate",), "subsystem_purity")
    est = _sign_mean(_signs_from_parity(samples.y_parities(A)), "subsystem_purity")
    return est


def _clip(P: EstimateWithError, floor: float) -> tuple[float, tuple[str, ...]]:
    if P.value <= floor:
        return floor, ("clipped",)
    return P.value, ()


def root_purity_fidelity(samples: BellSampleSet, floor: float | None = None) -> EstimateWithError:
    """sqrt of the purity estimate; the error is propagated as sigma_P / (2 sqrt P)."""
    P = overlap_estimate(samples)
    floor = 4.0 ** (-samples.n) if floor is None else floor
    v, flags = _clip(P, floor)
    return EstimateWithError(float(np.sqrt(v)), P.std_error / (2 * np.sqrt(v)), P.M, flags, "root_purity")


def corrected_exponent(m: int, n: int) -> float:
    """m / (n (2m/n + 2/3)); tends to 1/2 for deep circuits."""
    if m < 1:
        raise ValueError("need m >= 1")
    return m / (n * (2 * m / n + 2.0 / 3.0))


def corrected_fidelity(samples: BellSampleSet, m: int, n: int | None = None, floor: float | None = None) -> EstimateWithError:
    """P^x with the measurement-noise aware exponent x = m / (n (2m/n + 2/3))."""
    n = samples.n if n is None else n
    x = corrected_exponent(m, n)
    P = overlap_estimate(samples)
    floor = 4.0 ** (-samples.n) if floor is None else floor
    v, flags = _clip(P, floor)
    return EstimateWithError(float(v**x), float(x * v ** (x - 1) * P.std_error), P.M, flags, "corrected_fidelity")


def _omega_bits(P: PauliVec, bits: np.ndarray) -> np.ndarray:
    pb = P.bits()
    n = P.n
    return (((bits[:, :n] & pb[n:]) ^ (bits[:, n:] & pb[:n])).sum(axis=1) & 1).astype(np.uint8)


def pauli_sq_expectation(samples: BellSampleSet, P: PauliVec) -> EstimateWithError:
    """Estimate of <psi|P|psi>^2: P (x) P has eigenvalue (-1)^{omega(P, b) + pi_Y(P)} on |sigma_b>."""
    if P.n != samples.n:
        raise ValueError("qubit count mismatch")
    ypar = (P.z & P.x).bit_count() & 1
    return _sign_mean(_signs_from_parity(_omega_bits(P, samples.bits) ^ ypar), "pauli_sq")


def error_detect_filter(samples: BellSampleSet) -> tuple[BellSampleSet, float]:
    """Drop odd Y-parity outcomes, which the ideal pure two-copy state never produces."""
    par = samples.y_parities()
    rate = float(par.mean()) if samples.M else 0.0
    return samples.subset(par == 0), rate


def white_noise_error_prob(eta: float) -> float:
    """Probability that at least one of two white-noise copies carries the error: 2 eta (1 - eta) + eta^2."""
    return 2 * eta * (1 - eta) + eta**2


def white_noise_rejection_rate(eta: float, n: int) -> float:
    """Exact rejection probability for two copies of (1-eta)|C><C| + eta 1/2^n.

    The error part of the Bell distribution is uniform over all 4^n outcomes, and the odd
    outcomes make up a fraction (1 - 2^-n)/2 of them.
    """
    return white_noise_error_prob(eta) * (1 - 2.0**-n) / 2


def _y_parity_table(n: int) -> np.ndarray:
    idx = np.arange(4**n, dtype=np.int64)
    return (np.bitwise_count((idx >> n) & (idx & ((1 << n) - 1))) & 1).astype(np.uint8)


def postselect_distribution(probs: np.ndarray, n: int) -> np.ndarray:
    """Bell distribution (flat, index = z bits then x bits) restricted to even Y-parity, renormalized."""
    p = np.where(_y_parity_table(n) == 0, np.asarray(probs, dtype=float).reshape(-1), 0.0)
    total = p.sum()
    if total <= 0:
        raise ValueError("no even-parity weight")
    return p / total


def white_noise_bell_family(ideal: np.ndarray, eps: float, n: int) -> np.ndarray:
    """Bell distribution of two copies of (1-eps)|C><C| + eps 1/2^n, given that of |C>."""
    return (1 - eps) ** 2 * np.asarray(ideal, dtype=float).reshape(-1) + (1 - (1 - eps) ** 2) * 4.0**-n


def fit_white_noise_tvd(target: np.ndarray, ideal: np.ndarray, n: int, eps_max: float = 0.5) -> float:
    """argmin over eps of || P_{rho(eps)} - target ||_1 within the white-noise family."""
    t = np.asarray(target, dtype=float).reshape(-1)
    res = minimize_scalar(lambda e: np.abs(white_noise_bell_family(ideal, e, n) - t).sum(),
                          bounds=(0.0, eps_max), method="bounded", options={"xatol": 1e-10})
    return float(res.x)


@dataclass(frozen=True)
class XEBResult:
    chi: float
    chi_ideal: float
    f_xeb: float | None
    std_error: float
    M: int

    @property
    def undefined(self) -> bool:
        return self.f_xeb is None


class DenseIdeal:
    """Ideal output distribution given as a full probability vector."""

    def __init__(self, probs: np.ndarray):
        self.probs = np.asarray(probs, dtype=float)
        self.n = self.probs.shape[0].bit_length() - 1

    def prob(self, bits: np.ndarray) -> np.ndarray:
        idx = bits.astype(np.int64) @ (1 << np.arange(self.n - 1, -1, -1))
        return self.probs[idx]

    @property
    def collision(self) -> float:
        return float((self.probs**2).sum())


class AffineIdeal:
    """Uniform distribution over an affine subspace of {0,1}^n (stabilizer-state outputs)."""

    def __init__(self, offset: np.ndarray, directions: np.ndarray):
        self.n = len(offset)
        self.offset = np.asarray(offset, dtype=np.uint8)
        # embed the n-bit directions as z-type labels of a width-2n subspace
        d = np.asarray(directions, dtype=np.uint8).reshape(-1, self.n)
        self.space = span_bits(np.concatenate([d, np.zeros_like(d)], axis=1), self.n)

    @property
    def dim(self) -> int:
        return self.space.dim

    def prob(self, bits: np.ndarray) -> np.ndarray:
        b = (np.asarray(bits, dtype=np.uint8) ^ self.offset[None, :])
        inside = self.space.contains_bits(np.concatenate([b, np.zeros_like(b)], axis=1))
        return np.where(inside, 2.0 ** (-self.dim), 0.0)

    @property
    def collision(self) -> float:
        return 2.0 ** (-self.dim)


def xeb(samples_z: np.ndarray, ideal) -> XEBResult:
    """chi = 2^n E_q[p(x)] - 1, chi_ideal = 2^n sum p^2 - 1, F_XEB = chi / chi_ideal."""
    samples_z = np.asarray(samples_z, dtype=np.uint8)
    if not hasattr(ideal, "prob"):
        ideal = DenseIdeal(ideal)
    n = ideal.n
    M = samples_z.shape[0]
    p = ideal.prob(samples_z)
    d = 2.0**n
    chi = float(d * p.mean() - 1)
    chi_ideal = float(d * ideal.collision - 1)
    se = float(d * p.std(ddof=1) / np.sqrt(M)) if M > 1 else float("nan")
    if abs(chi_ideal) < 1e-12:
        return XEBResult(chi, chi_ideal, None, se, M)
    return XEBResult(chi, chi_ideal, chi / chi_ideal, se / abs(chi_ideal), M)


def virtual_distillation(samples: BellSampleSet, P: PauliVec, threshold: float = 1e-3, weights=None) -> EstimateWithError:
    """tr(P rho P rho) / tr(rho^2) as a ratio of two sign means over the same samples.

    Numerator sign: eigenvalue of (P (x) P) SWAP on |sigma_r>, which is
    (-1)^{omega(P, r) + pi_Y(P) + pi_Y(r)}; denominator sign: (-1)^{pi_Y(r)}.
    With ``weights`` (one per row, e.g. exact outcome probabilities over all 4^n rows) the
    means are weighted and the result is the estimator's large-M limit, with zero error.
    """
    if P.n != samples.n:
        raise ValueError("qubit count mismatch")
    M = samples.M
    if M == 0:
        raise ValueError("no samples")
    ypar = samples.y_parities()
    pyp = (P.z & P.x).bit_count() & 1
    num = _signs_from_parity(_omega_bits(P, samples.bits) ^ ypar ^ pyp)
    den = _signs_from_parity(ypar)
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        a, b = float(w @ num / w.sum()), float(w @ den / w.sum())
        if abs(b) < threshold:
            raise UnstableEstimateError(f"purity {b:.3g} below threshold {threshold}")
        return EstimateWithError(a / b, 0.0, M, ("exact",), "virtual_distillation")
    a, b = float(num.mean()), float(den.mean())
    if abs(b) < threshold:
        raise UnstableEstimateError(f"purity estimate {b:.3g} below threshold {threshold}")
    # delta method for a ratio of correlated means
    va, vb = num.var(), den.var()
    cab = float(np.mean((num - a) * (den - b)))
    var = (va / b**2 - 2 * a * cab / b**3 + a * a * vb / b**4) / M
    return EstimateWithError(a / b, float(np.sqrt(max(var, 0.0))), M, (), "virtual_distillation")


def median_of_means(values, k: int) -> float:
    """Median over k contiguous groups of the group means; k = 1 is the plain mean."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("no values")
    if k < 1:
        raise ValueError("need k >= 1")
    k = min(k, v.size)
    return float(np.median([g.mean() for g in np.array_split(v, k)]))
