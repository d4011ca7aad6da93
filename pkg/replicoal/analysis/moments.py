from typing import Self

import numpy as np


class RunningMoments:
    """
    Streaming count, mean and sum of squared deviations of array-valued samples.

    Accumulators over disjoint sample sets combine with :meth:`merge`,
    so partial results from parallel workers can be reduced in any order.
    """

    def __init__(self, shape: tuple[int, ...] = ()):
        self.count = 0
        self._mean = np.zeros(shape)
        self._m2 = np.zeros(shape)

    def add(self, x: np.ndarray | float) -> Self:
        x = np.asarray(x, dtype=np.float64)
        assert x.shape == self._mean.shape, f"sample shape {x.shape} != {self._mean.shape}"
        self.count += 1
        delta = x - self._mean
        self._mean = self._mean + delta / self.count
        self._m2 = self._m2 + delta * (x - self._mean)
        return self

    def merge(self, other: "RunningMoments") -> Self:
        if other.count == 0:
            return self
        if self.count == 0:
            self.count, self._mean, self._m2 = other.count, other._mean.copy(), other._m2.copy()
            return self
        n = self.count + other.count
        delta = other._mean - self._mean
        self._mean = self._mean + delta * (other.count / n)
        self._m2 = self._m2 + other._m2 + delta**2 * (self.count * other.count / n)
        self.count = n
        return self

    @classmethod
    def of(cls, samples: np.ndarray) -> "RunningMoments":
        """Accumulate samples stacked along the first axis."""
        samples = np.asarray(samples, dtype=np.float64)
        acc = cls(samples.shape[1:])
        for x in samples:
            acc.add(x)
        return acc

    @property
    def mean(self) -> np.ndarray:
        return self._mean.copy()

    @property
    def variance(self) -> np.ndarray:
        """Sample variance; zero with fewer than two samples."""
        if self.count < 2:
            return np.zeros_like(self._mean)
        return self._m2 / (self.count - 1)

    @property
    def stderr(self) -> np.ndarray:
        """Standard error of the mean; zero with fewer than two samples."""
        if self.count < 2:
            return np.zeros_like(self._mean)
        return np.sqrt(self.variance / self.count)
