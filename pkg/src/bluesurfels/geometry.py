"""Axis-aligned boxes and affine transform helpers shared across the package."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class AABB:
    lo: np.ndarray  # (3,) float64
    hi: np.ndarray  # (3,) float64

    @staticmethod
    def empty() -> "AABB":
        return AABB(np.full(3, np.inf), np.full(3, -np.inf))

    @staticmethod
    def from_points(points: np.ndarray) -> "AABB":
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        if pts.shape[0] == 0:
            return AABB.empty()
        return AABB(pts.min(axis=0), pts.max(axis=0))

    def is_empty(self) -> bool:
        return bool(np.any(self.hi < self.lo))

    @property
    def center(self) -> np.ndarray:
        return (self.lo + self.hi) * 0.5

    @property
    def size(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def diagonal(self) -> float:
        if self.is_empty():
            return 0.0
        return float(np.linalg.norm(self.hi - self.lo))

    def corners(self) -> np.ndarray:
        """All 8 corners, shape (8, 3)."""
        lo, hi = self.lo, self.hi
        return np.array([[x, y, z] for x in (lo[0], hi[0])
                         for y in (lo[1], hi[1])
                         for z in (lo[2], hi[2])], dtype=np.float64)

    def union(self, other: "AABB") -> "AABB":
        return AABB(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def expanded(self, amount: float) -> "AABB":
        return AABB(self.lo - amount, self.hi + amount)

    def contains_point(self, p: np.ndarray, tol: float = 0.0) -> bool:
        p = np.asarray(p, dtype=np.float64)
        return bool(np.all(p >= self.lo - tol) and np.all(p <= self.hi + tol))

    def contains_box(self, other: "AABB", tol: float = 0.0) -> bool:
        return bool(np.all(other.lo >= self.lo - tol) and np.all(other.hi <= self.hi + tol))

    def intersects(self, other: "AABB") -> bool:
        return bool(np.all(self.lo <= other.hi) and np.all(self.hi >= other.lo))

    def closest_point(self, p: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(p, dtype=np.float64), self.lo, self.hi)

    def transformed(self, matrix: np.ndarray) -> "AABB":
        """Box around this box's corners mapped through an affine 4x4."""
        if self.is_empty():
            return AABB.empty()
        return AABB.from_points(transform_points(matrix, self.corners()))


def identity_transform() -> np.ndarray:
    return np.eye(4, dtype=np.float64)


def translation(offset) -> np.ndarray:
    m = np.eye(4, dtype=np.float64)
    m[:3, 3] = offset
    return m


def scaling(factor) -> np.ndarray:
    m = np.eye(4, dtype=np.float64)
    m[0, 0], m[1, 1], m[2, 2] = np.broadcast_to(factor, 3)
    return m


def transform_points(matrix: np.ndarray, points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    return pts @ matrix[:3, :3].T + matrix[:3, 3]


def transform_directions(matrix: np.ndarray, dirs: np.ndarray, renormalize: bool = True) -> np.ndarray:
    """Map direction vectors (normals) through the inverse-transpose of the linear part."""
    lin = np.linalg.inv(matrix[:3, :3]).T
    out = np.asarray(dirs, dtype=np.float64).reshape(-1, 3) @ lin.T
    if renormalize:
        out = normalized_rows(out)
    return out


def normalized_rows(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    n = np.where(n == 0.0, 1.0, n)
    return v / n
