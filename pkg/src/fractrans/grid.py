"""Periodic grid and field containers for the pseudo-spectral solver.

The whole real line is truncated to the box [-L, L).  Fields carry both
physical samples and Fourier coefficients; the two views are synchronized
lazily and all nonlocal operators act on the spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_SMALL_PRIMES = (2, 3, 5, 7)


def _is_smooth(n: int) -> bool:
    for p in _SMALL_PRIMES:
        while n % p == 0:
            n //= p
    return n == 1


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-L, L) with N points.

    Wavenumbers are k_j = pi*j/L for j = -N/2 .. N/2-1, stored in FFT order.
    """

    half_length: float
    n_points: int

    def __post_init__(self):
        if self.half_length <= 0:
            raise ValueError(f"half_length must be positive, got {self.half_length}")
        n = self.n_points
        if n <= 0 or n % 2 != 0:
            raise ValueError(f"n_points must be a positive even integer, got {n}")
        if not _is_smooth(n):
            raise ValueError(f"n_points must factor into small primes (2,3,5,7), got {n}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.n_points

    @property
    def nodes(self) -> np.ndarray:
        return -self.half_length + self.spacing * np.arange(self.n_points)

    @property
    def wavenumbers(self) -> np.ndarray:
        j = np.fft.fftfreq(self.n_points, d=1.0 / self.n_points)
        return (np.pi / self.half_length) * j

    @property
    def mode_numbers(self) -> np.ndarray:
        return np.fft.fftfreq(self.n_points, d=1.0 / self.n_points).astype(int)

    @property
    def nyquist_index(self) -> int:
        return self.n_points // 2


class Field:
    """Real-valued field on a GridSpec, immutable after construction.

    Either the samples or the spectrum may be supplied; the missing view is
    computed on first access and cached.
    """

    __slots__ = ("grid", "_samples", "_spectrum")

    def __init__(self, grid: GridSpec, samples=None, spectrum=None):
        if (samples is None) == (spectrum is None):
            raise ValueError("provide exactly one of samples or spectrum")
        self.grid = grid
        if samples is not None:
            samples = np.asarray(samples, dtype=float).copy()
            if samples.shape != (grid.n_points,):
                raise ValueError("samples length does not match grid")
            samples.flags.writeable = False
        if spectrum is not None:
            spectrum = np.asarray(spectrum, dtype=complex).copy()
            if spectrum.shape != (grid.n_points,):
                raise ValueError("spectrum length does not match grid")
            spectrum.flags.writeable = False
        self._samples = samples
        self._spectrum = spectrum

    @classmethod
    def from_samples(cls, grid: GridSpec, samples) -> "Field":
        return cls(grid, samples=samples)

    @classmethod
    def from_spectrum(cls, grid: GridSpec, spectrum) -> "Field":
        return cls(grid, spectrum=spectrum)

    @classmethod
    def from_function(cls, grid: GridSpec, fn) -> "Field":
        return cls(grid, samples=fn(grid.nodes))

    @property
    def samples(self) -> np.ndarray:
        if self._samples is None:
            s = np.fft.ifft(self._spectrum).real
            s.flags.writeable = False
            self._samples = s
        return self._samples

    @property
    def spectrum(self) -> np.ndarray:
        if self._spectrum is None:
            c = np.fft.fft(self._samples)
            c.flags.writeable = False
            self._spectrum = c
        return self._spectrum

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def l2_norm(self) -> float:
        return float(np.sqrt(self.grid.spacing * np.sum(self.samples**2)))

    def mean(self) -> float:
        return float(np.mean(self.samples))

    def __add__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, samples=self.samples + other.samples)

    def __sub__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, samples=self.samples - other.samples)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.grid, samples=self.samples * float(scalar))

    __rmul__ = __mul__


def _check_same_grid(a: Field, b: Field):
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
