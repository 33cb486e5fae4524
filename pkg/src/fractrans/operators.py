"""Fourier-multiplier operators: Hilbert transform, fractional Laplacian,
heat semigroup, mollification and dealiasing.

Sign convention: the Hilbert transform has multiplier i*sign(k), so that
d/dx H = -Lambda and H Lambda = d/dx.  The unpaired Nyquist mode is zeroed
whenever an odd-symbol operator is applied, keeping results real.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .grid import Field, GridSpec


def hilbert(f: Field) -> Field:
    """H f with multiplier i*sign(k); annihilates the mean mode."""
    k = f.grid.wavenumbers
    mult = 1j * np.sign(k)
    spec = f.spectrum * mult
    spec[f.grid.nyquist_index] = 0.0
    return Field.from_spectrum(f.grid, spec)


def derivative(f: Field, order: int = 1) -> Field:
    k = f.grid.wavenumbers
    spec = f.spectrum * (1j * k) ** order
    if order % 2 == 1:
        spec[f.grid.nyquist_index] = 0.0
    return Field.from_spectrum(f.grid, spec)


def lambda_alpha(f: Field, alpha: float) -> Field:
    """Lambda^alpha f = (-d^2/dx^2)^(alpha/2) f, multiplier |k|^alpha."""
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    k = f.grid.wavenumbers
    return Field.from_spectrum(f.grid, f.spectrum * np.abs(k) ** alpha)


def heat_semigroup(f: Field, t: float, epsilon: float) -> Field:
    """exp(epsilon*t*Laplacian) f, multiplier exp(-epsilon*t*k^2)."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    k = f.grid.wavenumbers
    return Field.from_spectrum(f.grid, f.spectrum * np.exp(-epsilon * t * k**2))


def bump(x) -> np.ndarray:
    """The classical bump exp(-1/(1-x^2)) on (-1, 1), unnormalized."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(-1.0 / (1.0 - xi**2))
    return out


@lru_cache(maxsize=1)
def bump_mass() -> float:
    """Integral of the bump over (-1, 1), cached to 1e-12."""
    val, _ = quad(lambda s: float(np.exp(-1.0 / (1.0 - s * s))), -1.0, 1.0,
                  epsabs=1e-13, epsrel=1e-13)
    return val


def mollifier_kernel(grid: GridSpec, eta: float) -> np.ndarray:
    """Discrete unit-mass mollifier phi_eta sampled on the grid, centered at 0.

    The kernel is renormalized so that h * sum == 1 exactly, which makes
    mollification mean-preserving and a convex combination pointwise.
    """
    x = grid.nodes
    # place the kernel center at x = 0 with periodic wrap
    dist = np.minimum(np.abs(x), 2 * grid.half_length - np.abs(x))
    kern = bump(dist / eta) / (eta * bump_mass())
    kern /= grid.spacing * kern.sum()
    return kern


def mollify(f: Field, eta: float) -> Field:
    """Convolution with the unit-mass bump phi_eta; sign and mean preserving."""
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if eta >= f.grid.half_length / 4:
        raise ValueError(
            f"eta={eta} too large for half_length={f.grid.half_length}; "
            "mollifier support would wrap meaningfully")
    kern = mollifier_kernel(f.grid, eta)
    # kernel center sits at the node x=0 (index N/2); roll so the FFT treats
    # it as centered at index 0 and the convolution does not translate f
    kern_hat = np.fft.fft(np.roll(kern, -(f.grid.n_points // 2)))
    spec = f.spectrum * kern_hat * f.grid.spacing
    return Field.from_spectrum(f.grid, spec)


def dealias_spectrum(spectrum: np.ndarray) -> np.ndarray:
    """Two-thirds rule: zero all modes with |j| > N/3.  Idempotent."""
    n = spectrum.shape[0]
    j = np.fft.fftfreq(n, d=1.0 / n)
    out = spectrum.copy()
    out[np.abs(j) > n / 3] = 0.0
    return out


def dealias(f: Field) -> Field:
    return Field.from_spectrum(f.grid, dealias_spectrum(f.spectrum))
