"""Bell-sample containers and their text file format."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .symplectic import PauliVec

_HEADER = re.compile(r"^bellsamples v1 n=(\d+) pairing=zx\s*$")


@dataclass(frozen=True, eq=False)
class BellSampleSet:
    """M outcomes r in {0,1}^{2n}; column i is the copy-1 bit of qubit i, column n+i the copy-2 bit."""

    n: int
    bits: np.ndarray
    pairing: str = "zx"

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=np.uint8)
        if b.ndim != 2:
            b = b.reshape(-1, 2 * self.n)
        if b.shape[1] != 2 * self.n:
            raise ValueError(f"samples must have 2n={2 * self.n} columns, got {b.shape[1]}")
        if self.pairing != "zx":
            raise ValueError(f"unsupported pairing {self.pairing!r}")
        object.__setattr__(self, "bits", b)

    @property
    def M(self) -> int:
        return self.bits.shape[0]

    def __len__(self) -> int:
        return self.M

    def __eq__(self, other) -> bool:
        return isinstance(other, BellSampleSet) and self.n == other.n and np.array_equal(self.bits, other.bits)

    @property
    def z(self) -> np.ndarray:
        return self.bits[:, : self.n]

    @property
    def x(self) -> np.ndarray:
        return self.bits[:, self.n :]

    def y_parities(self, A=None) -> np.ndarray:
        """Per-sample parity of singlet outcomes, optionally restricted to qubits A."""
        yy = self.z & self.x
        if A is not None:
            yy = yy[:, np.asarray(sorted(A), dtype=np.int64)]
        return (yy.sum(axis=1) & 1).astype(np.uint8)

    def paulis(self) -> list[PauliVec]:
        return [PauliVec.from_bits(row) for row in self.bits]

    def subset(self, mask) -> "BellSampleSet":
        return BellSampleSet(self.n, self.bits[mask])

    def concat(self, other: "BellSampleSet") -> "BellSampleSet":
        if other.n != self.n:
            raise ValueError("qubit count mismatch")
        return BellSampleSet(self.n, np.concatenate([self.bits, other.bits]))

    def dumps(self) -> str:
        lines = [f"bellsamples v1 n={self.n} pairing={self.pairing}"]
        lines += ["".join("1" if v else "0" for v in row) for row in self.bits]
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "BellSampleSet":
        lines = text.splitlines()
        if not lines:
            raise ValueError("empty sample file")
        m = _HEADER.match(lines[0])
        if not m:
            raise ValueError("line 1: expected header 'bellsamples v1 n=<n> pairing=zx'")
        n = int(m.group(1))
        rows = []
        for i, line in enumerate(lines[1:], start=2):
            s = line.strip()
            if not s:
                continue
            if len(s) != 2 * n or set(s) - {"0", "1"}:
                raise ValueError(f"line {i}: expected a {2 * n}-character 0/1 string")
            rows.append(np.frombuffer(s.encode(), dtype=np.uint8) - ord("0"))
        bits = np.array(rows, dtype=np.uint8).reshape(-1, 2 * n)
        return cls(n, bits)

    @classmethod
    def load(cls, path) -> "BellSampleSet":
        return cls.loads(Path(path).read_text())
