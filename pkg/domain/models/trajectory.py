"""Uniformly sampled vector-valued signal."""

import math
from typing import Iterable, Optional, Sequence

import numpy as np

from common.config.constants import AppConstants
from domain.exceptions import DimensionError, HorizonError


class Trajectory:
    """
    Signal x: [start, start + (N-1)*dt] -> R^n sampled every dt seconds.

    Sample k is the state at time start + k*dt. The sample array is
    read-only after construction.
    """

    def __init__(self, samples: Sequence[Sequence[float]], dt: float, start: float = 0.0):
        """
        Initialize trajectory.

        Args:
            samples: N x n array-like of states (a 1-D sequence is read as n = 1)
            dt: Sampling step in seconds (> 0)
            start: Time of the first sample (>= 0)

        Raises:
            DimensionError: On an empty or ragged sample array
            ValueError: On a non-positive step or negative start
        """
        if not dt > 0 or not math.isfinite(dt):
            raise ValueError(f"Sampling step must be positive, got {dt}")
        if start < 0:
            raise ValueError(f"Trajectory start must be non-negative, got {start}")

        try:
            array = np.array(samples, dtype=float)
        except ValueError as e:
            raise DimensionError(f"samples have inconsistent dimensions: {e}") from e
        if array.ndim == 1:
            array = array.reshape(-1, 1)
        if array.ndim != 2 or array.shape[0] == 0 or array.shape[1] == 0:
            raise DimensionError("trajectory needs at least one sample of dimension >= 1")

        array.setflags(write=False)
        self.samples = array
        self.dt = float(dt)
        self.start = float(start)

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def end(self) -> float:
        """Time of the last sample."""
        return self.time_of(len(self) - 1)

    def time_of(self, index: int) -> float:
        return self.start + index * self.dt

    def times(self) -> np.ndarray:
        return self.start + self.dt * np.arange(len(self))

    def state(self, index: int) -> np.ndarray:
        return self.samples[index]

    def window(self, t0: float, t1: float) -> range:
        """
        Sample indices whose times lie in [t0, t1].

        Endpoints that are not grid aligned snap outward to the enclosing grid
        points, so the window may be wider than [t0, t1] by less than dt on
        each side.

        Raises:
            HorizonError: When the window leaves the sampled horizon or is empty
        """
        tol = AppConstants.GRID_SNAP_TOLERANCE
        lo = math.floor((t0 - self.start) / self.dt + tol)
        hi = math.ceil((t1 - self.start) / self.dt - tol)
        if lo < 0 or hi > len(self) - 1:
            raise HorizonError(
                f"window [{t0}, {t1}] needs samples {lo}..{hi} "
                f"but the trajectory covers 0..{len(self) - 1} "
                f"(t in [{self.start}, {self.end}])"
            )
        if hi < lo:
            raise HorizonError(f"window [{t0}, {t1}] contains no sample")
        return range(lo, hi + 1)

    def select(self, columns: Iterable[int]) -> "Trajectory":
        """Trajectory of the given state columns (0-based)."""
        columns = list(columns)
        if any(c < 0 or c >= self.dim for c in columns):
            raise DimensionError(f"columns {columns} out of range for dimension {self.dim}")
        return Trajectory(self.samples[:, columns], self.dt, self.start)

    @staticmethod
    def stack(parts: Sequence["Trajectory"], order: Optional[Sequence[int]] = None) -> "Trajectory":
        """
        Concatenate trajectories column-wise, optionally permuting the result.

        Args:
            parts: Trajectories sharing dt, start and length
            order: Column permutation applied to the concatenation

        Returns:
            Combined trajectory
        """
        if not parts:
            raise DimensionError("nothing to stack")
        first = parts[0]
        for part in parts[1:]:
            if len(part) != len(first) or part.dt != first.dt or part.start != first.start:
                raise DimensionError("stacked trajectories must share their time grid")
        combined = np.hstack([part.samples for part in parts])
        if order is not None:
            combined = combined[:, list(order)]
        return Trajectory(combined, first.dt, first.start)

    def __repr__(self) -> str:
        return f"Trajectory(samples={len(self)}, dim={self.dim}, dt={self.dt}, start={self.start})"
