"""Overcomplete dictionaries and their on-disk format.

Random dictionaries draw each atom uniformly from the unit sphere. They
stand in for covering codebooks, whose existence is only asserted, and
their covering quality is measured empirically elsewhere.

File format (little-endian): ``b"SRLD"``, version ``u32``, n ``u32``,
M ``u64``, then ``M*n`` float64 values, one atom per row. A JSON sidecar
next to the binary records the seed and generation parameters.
"""
from __future__ import annotations

import json
import math
import os
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .core import check_seed, rng, _sphere_rows
from .errors import DimensionMismatch, EmptyDictionary, InvalidParams, SizeOverflow

MAGIC = b"SRLD"
VERSION = 1
_HEADER = struct.Struct("<4sIIQ")
DEFAULT_BUDGET_BYTES = 2 << 30
UNIT_TOL = 1e-12


def budget_bytes() -> int:
    """Memory budget for dense atom storage; ``SRLAB_BUDGET_BYTES`` overrides it."""
    raw = os.environ.get("SRLAB_BUDGET_BYTES")
    return int(raw) if raw else DEFAULT_BUDGET_BYTES


def check_budget(M, n, budget=None):
    budget = budget_bytes() if budget is None else budget
    need = int(M) * int(n) * 8
    if need > budget:
        raise SizeOverflow(f"{M} atoms of dimension {n} need {need} bytes, budget is {budget}")


@dataclass(frozen=True, eq=False)
class Dictionary:
    """Immutable ordered collection of ``M`` atoms in R^n, stored as rows.

    Atoms must have unit norm unless ``unit_norm=False`` is passed.
    Indices are 0-based throughout the package.
    """

    atoms: np.ndarray
    unit_norm: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=np.float64, order="C")
        if atoms.ndim != 2:
            raise DimensionMismatch(f"atoms must be a 2-D array, got shape {atoms.shape}")
        if atoms.shape[0] == 0:
            raise EmptyDictionary("a dictionary needs at least one atom")
        if atoms.shape[1] == 0:
            raise DimensionMismatch("atoms must have dimension >= 1")
        if not np.all(np.isfinite(atoms)):
            raise InvalidParams("atoms have non-finite entries")
        if self.unit_norm:
            dev = np.max(np.abs(np.einsum("ij,ij->i", atoms, atoms) - 1.0))
            if dev > UNIT_TOL:
                raise InvalidParams(f"atoms are not unit norm (max deviation {dev:.3g}); pass unit_norm=False")
        atoms.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)

    @property
    def n(self) -> int:
        return self.atoms.shape[1]

    @property
    def M(self) -> int:
        return self.atoms.shape[0]

    def __len__(self):
        return self.M

    @cached_property
    def norms_sq(self) -> np.ndarray:
        out = np.einsum("ij,ij->i", self.atoms, self.atoms)
        out.setflags(write=False)
        return out

    @cached_property
    def gram(self) -> np.ndarray:
        check_budget(self.M, self.M)
        out = np.ascontiguousarray(self.atoms @ self.atoms.T)
        out.setflags(write=False)
        return out

    def matrix(self) -> np.ndarray:
        """The n x M matrix whose columns are the atoms."""
        return self.atoms.T

    def save(self, path):
        path = Path(path)
        with open(path, "wb") as f:
            f.write(_HEADER.pack(MAGIC, VERSION, self.n, self.M))
            f.write(self.atoms.astype("<f8", copy=False).tobytes(order="C"))
        sidecar = {"n": self.n, "M": self.M, "unit_norm": self.unit_norm, **self.meta}
        Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "Dictionary":
        path = Path(path)
        with open(path, "rb") as f:
            head = f.read(_HEADER.size)
            if len(head) != _HEADER.size:
                raise InvalidParams(f"{path}: truncated header")
            magic, version, n, M = _HEADER.unpack(head)
            if magic != MAGIC:
                raise InvalidParams(f"{path}: bad magic {magic!r}")
            if version != VERSION:
                raise InvalidParams(f"{path}: unsupported version {version}")
            check_budget(M, n)
            data = np.frombuffer(f.read(), dtype="<f8")
        if data.size != M * n:
            raise InvalidParams(f"{path}: expected {M * n} values, found {data.size}")
        meta = {}
        sidecar = Path(str(path) + ".json")
        if sidecar.exists():
            meta = json.loads(sidecar.read_text())
        unit = bool(meta.pop("unit_norm", True))
        meta.pop("n", None)
        meta.pop("M", None)
        return cls(data.reshape(M, n).astype(np.float64), unit_norm=unit, meta=meta)


@dataclass(frozen=True)
class RateSpec:
    n: int
    rate: float

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParams(f"n must be >= 1, got {self.n}")
        if not (self.rate >= 0 and math.isfinite(self.rate)):
            raise InvalidParams(f"rate must be finite and >= 0, got {self.rate}")

    @property
    def M(self) -> int:
        return max(1, round(2.0 ** (self.n * self.rate)))


# SeedSequence zero-pads its entropy, so rng(seed) would coincide with the
# sample stream rng(seed, 0, 0); dictionaries get their own tagged stream
DICT_STREAM = (0x53524C44, 0x53524C44, 1)


def random_dictionary(n, M, seed, budget=None) -> Dictionary:
    """``M`` i.i.d. atoms uniform on the unit sphere of R^n."""
    if n < 1 or M < 1:
        raise InvalidParams(f"need n >= 1 and M >= 1, got n={n}, M={M}")
    check_budget(M, n, budget)
    seed = check_seed(seed)
    atoms = _sphere_rows(rng(seed, *DICT_STREAM), int(M), int(n))
    # renormalize once more so every atom is unit norm to the last ulp or two
    atoms /= np.sqrt(np.einsum("ij,ij->i", atoms, atoms))[:, None]
    return Dictionary(atoms, meta={"kind": "random", "seed": seed, "n": int(n), "M": int(M)})


def from_rate(spec: RateSpec, seed, budget=None) -> Dictionary:
    d = random_dictionary(spec.n, spec.M, seed, budget)
    d.meta["rate"] = spec.rate
    return d


def orthonormal_dictionary(n) -> Dictionary:
    if n < 1:
        raise InvalidParams(f"n must be >= 1, got {n}")
    return Dictionary(np.eye(n), meta={"kind": "orthonormal", "n": int(n)})
