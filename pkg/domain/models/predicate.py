"""Predicate function families.

A predicate function h reads a footprint vector y, the global-state
coordinates named by its footprint, in footprint order. Both families are
concave, which is what the hypercube decomposition relies on.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, Sequence, Tuple

import numpy as np

from domain.exceptions import DimensionError, InputError

Coordinate = Tuple[int, int]  # (agent id, 0-based state component)

PSD_TOLERANCE = 1e-12


class PredicateFunction(ABC):
    """Concave function h(y) with its dependency footprint over agent states."""

    family = ""
    # True when d2h/dy2 does not depend on y
    constant_hessian = False

    def __init__(self, footprint: Sequence[Sequence[int]]):
        """
        Initialize predicate.

        Args:
            footprint: (agent id, component) pairs, distinct and ascending

        Raises:
            InputError: On an empty, repeated or unordered footprint
        """
        coords = tuple((int(agent), int(component)) for agent, component in footprint)
        if not coords:
            raise InputError("predicate footprint is empty")
        if any(component < 0 for _, component in coords):
            raise InputError(f"negative state component in footprint {coords}")
        if len(set(coords)) != len(coords):
            raise InputError(f"footprint {coords} repeats a coordinate")
        if list(coords) != sorted(coords):
            raise InputError(f"footprint {coords} is not in ascending coordinate order")
        self.footprint: Tuple[Coordinate, ...] = coords

    @property
    def size(self) -> int:
        """Number of coordinates the function reads."""
        return len(self.footprint)

    @property
    def agents(self) -> Tuple[int, ...]:
        """Agents in the footprint, ascending."""
        return tuple(sorted({agent for agent, _ in self.footprint}))

    def _check(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.size:
            raise DimensionError(
                f"{self.family} predicate reads {self.size} coordinates, got {y.shape[-1]}"
            )
        return y

    @abstractmethod
    def value(self, y: np.ndarray) -> np.ndarray:
        """h(y); accepts a single vector or a stack of vectors (last axis)."""

    @abstractmethod
    def gradient(self, y: np.ndarray) -> np.ndarray:
        """dh/dy; accepts a single vector or a stack of vectors (last axis)."""

    @abstractmethod
    def hessian(self, y: np.ndarray) -> np.ndarray:
        """d2h/dy2 at a single point."""

    @abstractmethod
    def parameters(self) -> Dict[str, Any]:
        """Serializable parameters of the family."""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "parameters": self.parameters(),
            "footprint": [list(coord) for coord in self.footprint],
        }


class ConcaveQuadratic(PredicateFunction):
    """h(y) = c0 - (y - d)^T P (y - d) with P symmetric positive semidefinite."""

    family = "quadratic"
    constant_hessian = True

    def __init__(self, offset: float, center: Sequence[float], weight: Any, footprint):
        super().__init__(footprint)
        center = np.asarray(center, dtype=float).reshape(-1)
        weight = np.asarray(weight, dtype=float)
        if weight.ndim == 1:
            weight = np.diag(weight)
        if center.shape != (self.size,) or weight.shape != (self.size, self.size):
            raise DimensionError(
                f"quadratic predicate over {self.size} coordinates got center "
                f"{center.shape} and weight {weight.shape}"
            )
        if not np.allclose(weight, weight.T, atol=1e-12):
            raise InputError("quadratic weight matrix is not symmetric")
        if np.linalg.eigvalsh(weight).min() < -PSD_TOLERANCE:
            raise InputError("quadratic weight matrix is not positive semidefinite")
        self.offset = float(offset)
        self.center = center
        self.weight = weight

    @classmethod
    def difference(
        cls, offset: float, weight: Any, footprint, shift: Sequence[float] = None
    ) -> "ConcaveQuadratic":
        """
        h = c0 - || y_a - y_b - shift ||^2_W for y = (y_a, y_b) split in halves.

        This is the inter-agent form of the five-agent tasks; it expands to
        P = D^T W D with D = [I, -I] and center d = (shift, 0).
        """
        size = len(footprint)
        if size % 2:
            raise InputError("difference predicate needs an even footprint")
        half = size // 2
        w = np.asarray(weight, dtype=float)
        if w.ndim == 1:
            w = np.diag(w)
        shift = np.zeros(half) if shift is None else np.asarray(shift, dtype=float)
        if w.shape != (half, half) or shift.shape != (half,):
            raise DimensionError(
                f"difference predicate over {half}+{half} coordinates got weight "
                f"{w.shape} and shift {shift.shape}"
            )
        d_matrix = np.hstack([np.eye(half), -np.eye(half)])
        return cls(offset, np.concatenate([shift, np.zeros(half)]), d_matrix.T @ w @ d_matrix, footprint)

    def value(self, y):
        delta = self._check(y) - self.center
        return self.offset - np.einsum("...i,ij,...j->...", delta, self.weight, delta)

    def gradient(self, y):
        return -2.0 * (self._check(y) - self.center) @ self.weight

    def hessian(self, y):
        self._check(y)
        return -2.0 * self.weight

    def parameters(self):
        return {
            "offset": self.offset,
            "center": self.center.tolist(),
            "weight": self.weight.tolist(),
        }

    def __repr__(self) -> str:
        return f"ConcaveQuadratic(offset={self.offset}, footprint={self.footprint})"


class Affine(PredicateFunction):
    """h(y) = a^T y + b."""

    family = "affine"
    constant_hessian = True

    def __init__(self, gradient: Sequence[float], offset: float, footprint):
        super().__init__(footprint)
        gradient = np.asarray(gradient, dtype=float).reshape(-1)
        if gradient.shape != (self.size,):
            raise DimensionError(
                f"affine predicate over {self.size} coordinates got gradient {gradient.shape}"
            )
        self.coefficients = gradient
        self.offset = float(offset)

    def value(self, y):
        return self._check(y) @ self.coefficients + self.offset

    def gradient(self, y):
        y = self._check(y)
        return np.broadcast_to(self.coefficients, y.shape).copy()

    def hessian(self, y):
        self._check(y)
        return np.zeros((self.size, self.size))

    def negated(self) -> "Affine":
        """-h, still affine and therefore still concave."""
        return Affine(-self.coefficients, -self.offset, self.footprint)

    def parameters(self):
        return {"gradient": self.coefficients.tolist(), "offset": self.offset}

    def __repr__(self) -> str:
        return f"Affine(offset={self.offset}, footprint={self.footprint})"
