"""Per-dimension min-max normalization to [-1, 1].

Statistics come from the training dataset only. Dimensions with (near)
zero range map to 0 and invert back to their recorded minimum, so
normalize/denormalize is an exact inverse on everything that was seen.
"""

from __future__ import annotations

import numpy as np

CONSTANT_RANGE_EPS = 1e-8


class MinMaxNormalizer:
    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)
        if self.lo.shape != self.hi.shape:
            raise ValueError(f"lo shape {self.lo.shape} != hi shape {self.hi.shape}")
        self.range = self.hi - self.lo
        self.constant = self.range < CONSTANT_RANGE_EPS

    @classmethod
    def from_data(cls, data: np.ndarray) -> "MinMaxNormalizer":
        flat = np.asarray(data, dtype=np.float64).reshape(-1, data.shape[-1])
        return cls(flat.min(axis=0), flat.max(axis=0))

    def normalize(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        safe_range = np.where(self.constant, 1.0, self.range)
        out = 2.0 * (x - self.lo) / safe_range - 1.0
        return np.where(self.constant, 0.0, out)

    def denormalize(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        out = self.lo + (y + 1.0) / 2.0 * self.range
        return np.where(self.constant, self.lo, out)

    def to_dict(self) -> dict:
        return {"min": self.lo.tolist(), "max": self.hi.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "MinMaxNormalizer":
        return cls(np.array(d["min"]), np.array(d["max"]))
