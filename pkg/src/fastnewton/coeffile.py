"""Binary coefficient files.

Layout (little-endian)::

    b"FNT1"
    u32 m
    u32 len, utf-8 basis kind
    m x (u32 count, count x f8 node values)
    m x (u32 len, len x i8 tube row)
    u64 count, count x f8 coefficients in lex-rank order
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .multiindex import TubeProjections, from_tubes
from .nodes import AxisNodes, NonTensorialGrid
from .transform import TransformPlan, plan as make_plan

MAGIC = b"FNT1"


class CoefficientFileError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CoefficientFile:
    kind: str
    axes: tuple  # per-axis node arrays
    tubes: TubeProjections
    coeffs: np.ndarray

    def __post_init__(self):
        self.tubes.validate()
        c = np.asarray(self.coeffs, dtype="<f8")
        if c.shape != (self.tubes.cardinality,):
            raise CoefficientFileError(f"payload has {c.size} values but the set has {self.tubes.cardinality}")
        if len(self.axes) != self.tubes.m:
            raise CoefficientFileError(f"{len(self.axes)} node lists for dimension {self.tubes.m}")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "axes", tuple(np.asarray(a, dtype="<f8") for a in self.axes))

    @property
    def m(self) -> int:
        return self.tubes.m

    @classmethod
    def from_plan(cls, plan: TransformPlan, coeffs) -> "CoefficientFile":
        return cls(plan.kind, tuple(ax.values for ax in plan.grid.axes), plan.T, np.asarray(coeffs))

    def to_plan(self, **kwargs) -> TransformPlan:
        dcs = from_tubes(self.tubes)
        g = NonTensorialGrid(dcs, tuple(AxisNodes(a) for a in self.axes))
        return make_plan(dcs, g, self.kind, **kwargs)

    def to_bytes(self) -> bytes:
        parts = [MAGIC, struct.pack("<I", self.m)]
        kind = self.kind.encode("utf-8")
        parts += [struct.pack("<I", len(kind)), kind]
        for a in self.axes:
            parts += [struct.pack("<I", a.size), a.tobytes()]
        for row in self.tubes.rows:
            parts += [struct.pack("<I", len(row)), np.asarray(row, dtype="<i8").tobytes()]
        parts += [struct.pack("<Q", self.coeffs.size), self.coeffs.tobytes()]
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "CoefficientFile":
        view = memoryview(data)
        pos = 0

        def take(n: int) -> memoryview:
            nonlocal pos
            if pos + n > len(view):
                raise CoefficientFileError("truncated coefficient file")
            chunk = view[pos:pos + n]
            pos += n
            return chunk

        def u32() -> int:
            return struct.unpack("<I", take(4))[0]

        if bytes(take(4)) != MAGIC:
            raise CoefficientFileError("not a coefficient file (bad magic)")
        m = u32()
        kind = bytes(take(u32())).decode("utf-8")
        axes = [np.frombuffer(take(8 * (k := u32())), dtype="<f8", count=k).copy() for _ in range(m)]
        rows = [tuple(np.frombuffer(take(8 * (k := u32())), dtype="<i8", count=k).tolist()) for _ in range(m)]
        count = struct.unpack("<Q", take(8))[0]
        coeffs = np.frombuffer(take(8 * count), dtype="<f8", count=count).copy()
        if pos != len(view):
            raise CoefficientFileError(f"{len(view) - pos} trailing bytes")
        return cls(kind, tuple(axes), TubeProjections(tuple(rows)), coeffs)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "CoefficientFile":
        return cls.from_bytes(Path(path).read_bytes())
