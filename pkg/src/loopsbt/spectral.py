"""Real trigonometric interpolants on the unit periodic interval.

Everything downstream (centerline coordinates, frame vectors, force
densities) is a smooth 1-periodic function sampled on a uniform grid, so a
single FFT-based series type covers evaluation and differentiation at
arbitrary points.
"""

import numpy as np


class TrigSeries:
    """Trigonometric interpolant of real periodic samples.

    Fit by FFT from samples at ``j / m`` for ``j = 0, ..., m - 1``;
    evaluation and derivatives of any order are available at arbitrary
    points of the period.  The Nyquist mode (present for even sample
    counts) is dropped so that derivatives stay well defined; the fit
    therefore assumes the sampled function is resolved by the grid.
    """

    def __init__(self, samples):
        samples = np.asarray(samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[:, None]
            self._squeeze = True
        else:
            self._squeeze = False
        m = samples.shape[0]
        coef = np.fft.rfft(samples, axis=0) / m
        if m % 2 == 0:
            coef = coef[:-1]
        self.m = m
        self.coef = coef
        # wavenumbers k of e^{2 pi i k s}
        self._k = np.arange(coef.shape[0])

    @property
    def n_modes(self):
        return self.coef.shape[0]

    def tail_ratio(self):
        """Relative magnitude of the highest retained modes.

        A resolved fit has a tiny tail; callers use this to reject
        under-sampled data.
        """
        mags = np.abs(self.coef).sum(axis=1)
        scale = mags.max()
        if scale == 0.0:
            return 0.0
        tail = mags[-max(2, self.n_modes // 16):].max()
        return tail / scale

    def __call__(self, s, deriv=0):
        """Evaluate the series (or its ``deriv``-th derivative) at ``s``."""
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        phases = np.exp((2j * np.pi) * np.outer(s, self._k))
        coef = self.coef
        if deriv:
            coef = coef * (2j * np.pi * self._k[:, None]) ** deriv
        # real series: c_0 + 2 Re sum_{k>=1} c_k e^{2 pi i k s}
        vals = 2.0 * (phases @ coef).real - coef[0].real[None, :]
        if self._squeeze:
            vals = vals[:, 0]
        if scalar:
            vals = vals[0]
        return vals


def fit_series(samples):
    """Convenience wrapper; mirrors ``TrigSeries(samples)``."""
    return TrigSeries(samples)


def periodic_gradient(values, order=1):
    """Spectral derivative of uniform periodic samples, returned on the grid.

    ``values`` has shape (n,) or (n, d); samples sit at ``j / n``.
    """
    values = np.asarray(values, dtype=float)
    vec = values.ndim == 2
    arr = values if vec else values[:, None]
    n = arr.shape[0]
    coef = np.fft.rfft(arr, axis=0)
    k = np.arange(coef.shape[0])
    if n % 2 == 0:
        # Nyquist mode has no sensible odd derivative; zero it.
        coef[-1] = 0.0
    coef = coef * (2j * np.pi * k[:, None]) ** order
    out = np.fft.irfft(coef, n=n, axis=0)
    return out if vec else out[:, 0]


def trapezoid_mean(values):
    """Mean of periodic samples = trapezoid rule over one period."""
    return np.asarray(values, dtype=float).mean(axis=0)


def antiderivative_series(samples):
    """Return (mean, TrigSeries of the zero-mean antiderivative).

    For samples of g at ``j / m``, the antiderivative is
    ``G(s) = mean * s + series(s)`` with ``G(0) = series(0)`` and
    ``G(t) - G(0)`` equal to the integral of g from 0 to t.
    """
    samples = np.asarray(samples, dtype=float)
    m = samples.shape[0]
    coef = np.fft.rfft(samples) / m
    if m % 2 == 0:
        coef = coef[:-1]
    mean = coef[0].real
    k = np.arange(len(coef))
    intco = np.zeros_like(coef)
    intco[1:] = coef[1:] / (2j * np.pi * k[1:])
    series = TrigSeries.__new__(TrigSeries)
    series.m = m
    series.coef = intco[:, None]
    series._k = k
    series._squeeze = True
    return mean, series
