from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RegionSpec:
    """Either all of R^d or a half-open box ``[lo, hi)``.

    Boxes are half-open so that a grid of boxes partitions space exactly;
    bounds may be infinite.
    """

    kind: str = "all-space"
    lo: tuple[float, ...] | None = None
    hi: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind == "all-space":
            if self.lo is not None or self.hi is not None:
                raise ValueError("all-space region takes no bounds")
            return
        if self.kind != "box":
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.lo is None or self.hi is None or len(self.lo) != len(self.hi):
            raise ValueError("box region needs lo and hi of equal length")
        object.__setattr__(self, "lo", tuple(float(x) for x in self.lo))
        object.__setattr__(self, "hi", tuple(float(x) for x in self.hi))
        if not all(a < b for a, b in zip(self.lo, self.hi)):
            raise ValueError("box region needs lo < hi componentwise")

    @classmethod
    def box(cls, lo, hi) -> "RegionSpec":
        return cls("box", tuple(np.atleast_1d(lo).tolist()), tuple(np.atleast_1d(hi).tolist()))

    @property
    def is_all(self) -> bool:
        return self.kind == "all-space"

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        if self.is_all:
            return np.ones(len(points), dtype=bool)
        if points.shape[1] != len(self.lo):
            raise ValueError("region dimension does not match points")
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((points >= lo) & (points < hi), axis=1)

    def clip_interval(self, axis: int, a: float, b: float) -> tuple[float, float]:
        """Intersection of ``[a, b]`` with this region's extent along ``axis``."""
        if self.is_all:
            return a, b
        return max(a, self.lo[axis]), min(b, self.hi[axis])

    def to_dict(self) -> dict:
        if self.is_all:
            return {"kind": "all-space"}
        return {"kind": "box", "lo": list(self.lo), "hi": list(self.hi)}

    @classmethod
    def from_dict(cls, data: dict | None) -> "RegionSpec":
        if not data or data.get("kind", "all-space") == "all-space":
            return cls()
        return cls("box", tuple(data["lo"]), tuple(data["hi"]))


ALL_SPACE = RegionSpec()
