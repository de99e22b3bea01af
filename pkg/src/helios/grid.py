"""Uniform periodic grid on [0, 2*pi) with spectral operators.

All grid functions are stored as raw real samples at the nodes
``alpha_j = 2*pi*j/N``; Fourier coefficients are transient. The grid
size ``N`` must be even so the Nyquist mode is unambiguous.

Conventions
-----------
* Hilbert transform: Fourier multiplier ``-i*sgn(k)``, mode 0 mapped to 0.
  Hence ``H[sin(k a)] = -cos(k a)`` and ``H[cos(k a)] = sin(k a)``.
* Odd-order derivatives and the Hilbert transform annihilate the Nyquist
  mode (its sine companion vanishes on the grid, so the sign information
  is not representable).
* Mollifier: periodic heat kernel, multiplier ``exp(-k^2 * eps)``.
  Positive, even, unit mass; preserves the mean exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ParameterError

TWO_PI = 2.0 * np.pi


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PeriodicGrid:
    """N equispaced nodes on the circle with trapezoidal weights.

    Parameters
    ----------
    n_points : int
        Number of nodes. Must be even and at least 8.
    """

    n_points: int
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.n_points
        if n < 8 or n % 2 != 0:
            raise ParameterError(f"grid size must be even and >= 8, got {n}")
        object.__setattr__(self, "nodes", _frozen(TWO_PI * np.arange(n) / n))
        object.__setattr__(self, "weights", _frozen(np.full(n, TWO_PI / n)))

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n_points

    def _check(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.n_points,):
            raise InputError(
                f"expected {self.n_points} samples, got shape {f.shape}"
            )
        return f

    # rfft wavenumbers 0..N/2
    def _wavenumbers(self) -> np.ndarray:
        return np.arange(self.n_points // 2 + 1, dtype=float)

    def spectral_derivative(self, f, order: int = 1) -> np.ndarray:
        """Sample the order-th derivative of the trigonometric interpolant.

        Exact (to roundoff) for band-limited input. The Nyquist mode of
        odd-order derivatives is set to zero.
        """
        if order < 1 or int(order) != order:
            raise ParameterError(f"derivative order must be a positive integer, got {order}")
        f = self._check(f)
        fh = np.fft.rfft(f)
        k = self._wavenumbers()
        fh *= (1j * k) ** order
        if order % 2 == 1:
            fh[-1] = 0.0
        return np.fft.irfft(fh, n=self.n_points)

    def hilbert_transform(self, f) -> np.ndarray:
        """Periodic Hilbert transform, multiplier -i*sgn(k).

        Output has zero mean; the Nyquist mode is annihilated.
        """
        f = self._check(f)
        fh = np.fft.rfft(f)
        fh *= -1j
        fh[0] = 0.0
        fh[-1] = 0.0
        return np.fft.irfft(fh, n=self.n_points)

    def trapezoid_integral(self, f) -> float:
        """Integral over the circle; spectrally accurate for smooth f."""
        f = self._check(f)
        return float(self.weights @ f)

    def mean(self, f) -> float:
        return self.trapezoid_integral(f) / TWO_PI

    def mollify(self, f, eps: float) -> np.ndarray:
        """Convolve with the periodic heat kernel of width eps.

        The kernel is positive, even and has unit mass, so the mean is
        preserved exactly and ``max|d/da|`` cannot grow beyond grid
        resolution effects.
        """
        if not eps > 0:
            raise ParameterError(f"mollifier width must be positive, got {eps}")
        f = self._check(f)
        fh = np.fft.rfft(f)
        k = self._wavenumbers()
        fh *= np.exp(-(k**2) * eps)
        return np.fft.irfft(fh, n=self.n_points)

    def interpolate(self, f, alpha) -> np.ndarray:
        """Evaluate the trigonometric interpolant of f at arbitrary angles."""
        f = self._check(f)
        alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
        fh = np.fft.rfft(f) / self.n_points
        k = self._wavenumbers()
        phase = np.exp(1j * np.outer(alpha, k))
        # real-series reconstruction; interior modes appear twice
        scale = np.full_like(k, 2.0)
        scale[0] = 1.0
        scale[-1] = 1.0
        return (phase * (scale * fh)).real.sum(axis=1)

    def resample(self, f, n_fine: int) -> np.ndarray:
        """Trigonometric interpolation onto a finer uniform grid."""
        f = self._check(f)
        if n_fine < self.n_points or n_fine % 2 != 0:
            raise ParameterError("refined grid must be even and at least as fine")
        fh = np.fft.rfft(f)
        if n_fine == self.n_points:
            return f.copy()
        out = np.zeros(n_fine // 2 + 1, dtype=complex)
        out[: fh.size] = fh
        # the coarse Nyquist mode becomes an interior mode: split it evenly
        # between +k and -k so the interpolant stays real and even
        out[fh.size - 1] = 0.5 * fh[-1].real
        return np.fft.irfft(out, n=n_fine) * (n_fine / self.n_points)
