"""Bosonic reservoirs with a flat spectral density."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError

_LARGE = 700.0
_SMALL = 1e-8


def _real(x):
    """Array of ``x`` as float64, or extended precision if already so."""
    x = np.asarray(x)
    return x if x.dtype == np.longdouble else x.astype(float)


def _occupation(x):
    x = _real(x)
    out = np.empty_like(x)
    big = x > _LARGE
    small = x < _SMALL
    mid = ~(big | small)
    out[big] = np.exp(-x[big])
    out[small] = 1.0 / x[small] - 0.5
    out[mid] = 1.0 / np.expm1(x[mid])
    return out


def bose_occupation(omega, temperature):
    """Mean Bose-Einstein occupation ``1 / (exp(omega / T) - 1)``.

    Works elementwise on arrays.  Very large ``omega / T`` uses
    ``exp(-omega / T)`` and very small ratios use ``T / omega - 1/2``.
    """
    omega = np.asarray(omega, dtype=float)
    temperature = np.asarray(temperature, dtype=float)
    if np.any(~(omega > 0)):
        raise ArgumentError("frequency must be > 0")
    if np.any(~(temperature > 0)):
        raise ArgumentError("temperature must be > 0")
    out = _occupation(omega / temperature)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BathRates:
    """Upward and downward rates of one reservoir at one frequency."""

    omega: float
    temperature: float
    j_plus: float
    j_minus: float


def bath_rates(omega, kappa, temperature):
    """Excitation ``kappa * n`` and decay ``kappa * (n + 1)`` rates.

    A non-dissipative reservoir (``kappa == 0``) gives zero rates and its
    temperature is never read.
    """
    if not omega > 0:
        raise ArgumentError("frequency must be > 0")
    if kappa < 0:
        raise ArgumentError("dissipation rate must be >= 0")
    if kappa == 0:
        return BathRates(float(omega), float(temperature), 0.0, 0.0)
    n = bose_occupation(omega, temperature)
    return BathRates(float(omega), float(temperature), kappa * n, kappa * (n + 1.0))


def rate_arrays(omega, kappa, temperature):
    """Vectorized ``(j_plus, j_minus)`` for arrays of channels.

    Entries with ``kappa == 0`` are zero regardless of temperature.  Extended
    precision inputs give extended precision rates.
    """
    omega = _real(omega)
    kappa = np.broadcast_to(_real(kappa), omega.shape)
    temperature = np.broadcast_to(_real(temperature), omega.shape)
    if np.any(~(omega > 0)):
        raise ArgumentError("frequency must be > 0")
    dtype = np.result_type(omega, kappa, temperature)
    jp = np.zeros(omega.shape, dtype=dtype)
    jm = np.zeros(omega.shape, dtype=dtype)
    on = kappa > 0
    if np.any(~(temperature[on] > 0)):
        raise ArgumentError("temperature must be > 0 for dissipative reservoirs")
    n = _occupation(omega[on] / temperature[on])
    jp[on] = kappa[on] * n
    jm[on] = kappa[on] * (n + 1.0)
    return jp, jm
