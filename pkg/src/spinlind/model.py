"""Chain specification, bare-basis indexing and the system Hamiltonian.

Conventions
-----------
Units are hbar = k_B = 1 with the field unit B_0 = 1.  Spins are labelled
``1..N``.  The bare computational basis is the tensor-product basis with the
local ordering (|e>, |g>), so bare index ``1`` is the all-excited state and
spin ``mu`` contributes the bit ``b_mu`` (0 = excited) with weight
``2**(N - mu)``::

    index = 1 + sum_mu b_mu * 2**(N - mu)

Bare indices are 1-based everywhere they appear in this module.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, CapacityError, DegenerateFieldError

MAX_DENSE_SPINS = 12

# Angles closer than this to 0 or pi/2 are snapped so that pure longitudinal
# and pure transverse chains get exact zeros in the Hamiltonian.
_ANGLE_SNAP = 1e-14

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


def _as_float_tuple(name, value, length):
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.ndim != 1:
        raise ArgumentError(f"{name} must be a scalar or a 1-d sequence")
    if arr.size == 1 and length != 1:
        arr = np.full(length, arr[0])
    if arr.size != length:
        raise ArgumentError(f"{name} has length {arr.size}, expected {length}")
    return tuple(float(x) for x in arr)


def field_components(magnitude, angle):
    """Return ``(B^x, B^z)`` for a field of given magnitude and polar angle."""
    if abs(angle) <= _ANGLE_SNAP:
        return 0.0, float(magnitude)
    if abs(angle - math.pi / 2) <= _ANGLE_SNAP:
        return float(magnitude), 0.0
    return magnitude * math.sin(angle), magnitude * math.cos(angle)


@dataclass(frozen=True)
class ChainSpec:
    """Physical description of an open Ising chain.

    Per-spin sequences may be given as scalars, which are broadcast.  The
    temperature of a spin with zero dissipation rate is irrelevant and may be
    ``nan``.
    """

    n_spins: int
    field_magnitude: tuple
    field_angle: tuple
    coupling: tuple
    dissipation_rate: tuple
    temperature: tuple = None
    _digest: str = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.n_spins
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise ArgumentError(f"n_spins must be a positive integer, got {n!r}")
        object.__setattr__(self, "n_spins", int(n))
        set_ = lambda k, v: object.__setattr__(self, k, v)
        set_("field_magnitude", _as_float_tuple("field_magnitude", self.field_magnitude, n))
        set_("field_angle", _as_float_tuple("field_angle", self.field_angle, n))
        if n == 1 and np.size(self.coupling) == 0:
            set_("coupling", ())
        else:
            set_("coupling", _as_float_tuple("coupling", self.coupling, n - 1))
        set_("dissipation_rate", _as_float_tuple("dissipation_rate", self.dissipation_rate, n))
        if self.temperature is None:
            set_("temperature", tuple([math.nan] * n))
        else:
            temps = [math.nan if t is None else t for t in np.atleast_1d(
                np.asarray(self.temperature, dtype=object))]
            set_("temperature", _as_float_tuple("temperature", temps, n))

        for name in ("field_magnitude", "coupling", "dissipation_rate"):
            vals = getattr(self, name)
            if any(not math.isfinite(v) or v < 0 for v in vals):
                raise ArgumentError(f"{name} entries must be finite and >= 0")
        if any(not math.isfinite(a) or a < 0 or a > math.pi + _ANGLE_SNAP
               for a in self.field_angle):
            raise ArgumentError("field_angle entries must lie in [0, pi]")
        for mu, (k, t) in enumerate(zip(self.dissipation_rate, self.temperature), 1):
            if k > 0 and not (math.isfinite(t) and t > 0):
                raise ArgumentError(
                    f"spin {mu} is dissipative (kappa={k}) but has no positive temperature")
        payload = repr((self.n_spins, self.field_magnitude, self.field_angle,
                        self.coupling, self.dissipation_rate, self.temperature))
        set_("_digest", hashlib.sha256(payload.encode()).hexdigest()[:16])

    @property
    def digest(self):
        """Short stable hash used to tie derived objects to this spec."""
        return self._digest

    @property
    def dimension(self):
        return 2 ** self.n_spins

    @property
    def bx(self):
        return np.array([field_components(m, a)[0]
                         for m, a in zip(self.field_magnitude, self.field_angle)])

    @property
    def bz(self):
        return np.array([field_components(m, a)[1]
                         for m, a in zip(self.field_magnitude, self.field_angle)])

    @property
    def kappa(self):
        return np.array(self.dissipation_rate)

    @property
    def temperatures(self):
        return np.array(self.temperature)

    @property
    def is_longitudinal(self):
        return bool(np.all(self.bx == 0.0))

    @property
    def is_transverse(self):
        return bool(np.all(self.bz == 0.0))

    def replace(self, **changes):
        """Return a copy with some fields replaced (scalars are broadcast)."""
        kw = dict(n_spins=self.n_spins, field_magnitude=self.field_magnitude,
                  field_angle=self.field_angle, coupling=self.coupling,
                  dissipation_rate=self.dissipation_rate, temperature=self.temperature)
        kw.update(changes)
        return ChainSpec(**kw)

    def with_spin(self, mu, **changes):
        """Return a copy with per-spin fields of spin ``mu`` (1-based) changed."""
        out = {}
        for key, value in changes.items():
            vals = list(getattr(self, key))
            vals[mu - 1] = value
            out[key] = vals
        return self.replace(**out)

    def to_dict(self):
        return {
            "n_spins": self.n_spins,
            "field_magnitude": list(self.field_magnitude),
            "field_angle": list(self.field_angle),
            "coupling": list(self.coupling),
            "dissipation_rate": list(self.dissipation_rate),
            "temperature": [None if math.isnan(t) else t for t in self.temperature],
        }


@dataclass(frozen=True)
class CircuitParams:
    """Cooper-pair-box parameters of a superconducting qubit."""

    charging_energy: float
    josephson_energy: float
    gate_charge: float

    def __post_init__(self):
        if not self.charging_energy > 0:
            raise ArgumentError("charging_energy must be > 0")
        if not self.josephson_energy >= 0:
            raise ArgumentError("josephson_energy must be >= 0")


def circuit_to_field(p):
    """Map Cooper-pair-box parameters to ``(|B|, theta)``.

    ``B^z = 2 E_C (1 - 2 N_g)`` and ``B^x = E_J / 2``; the angle is measured
    from the z axis and lies in ``[0, pi]``.
    """
    bz = 2.0 * p.charging_energy * (1.0 - 2.0 * p.gate_charge)
    bx = p.josephson_energy / 2.0
    if bx == 0.0 and bz == 0.0:
        raise DegenerateFieldError("B^x and B^z both vanish; field direction undefined")
    return math.hypot(bx, bz), math.atan2(bx, bz)


def _check_spin(mu, n):
    if isinstance(mu, bool) or not isinstance(mu, (int, np.integer)):
        raise ArgumentError(f"spin index must be an integer, got {mu!r}")
    if not 1 <= mu <= n:
        raise ArgumentError(f"spin index {mu} outside [1, {n}]")


def index_set(mu, n):
    """Bare indices (1-based, ascending) whose spin ``mu`` is excited.

    These are exactly the ``2**(n-1)`` indices ``i`` for which
    ``i + 2**(n - mu)`` is the partner state with spin ``mu`` flipped.
    """
    _check_spin(mu, n)
    stride = 2 ** (n - mu)
    i = np.arange(1, 2 ** n + 1)
    return i[((i - 1) // stride) % 2 == 0]


def spin_stride(mu, n):
    _check_spin(mu, n)
    return 2 ** (n - mu)


def bare_bits(n):
    """Array ``(2**n, n)`` of bits ``b_mu`` (0 = excited) for every bare state."""
    idx = np.arange(2 ** n)
    return (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1


def sigma_z_diagonal(n):
    """Array ``(2**n, n)`` with the eigenvalue of sigma^z_mu on each bare state."""
    return 1 - 2 * bare_bits(n)


def bare_label(index, n):
    """Physical label such as ``'eg'`` for a 1-based bare index."""
    bits = bare_bits(n)[index - 1]
    return "".join("g" if b else "e" for b in bits)


def local_operator(op, mu, n):
    """Embed a single-site 2x2 operator at spin ``mu`` (1-based)."""
    _check_spin(mu, n)
    out = np.eye(1)
    for nu in range(1, n + 1):
        out = np.kron(out, op if nu == mu else np.eye(2))
    return out


def diagonal_energies(spec, dtype=float):
    """Diagonal of the Hamiltonian in the bare basis, evaluated in ``dtype``."""
    n = spec.n_spins
    sz = sigma_z_diagonal(n).astype(dtype)
    diag = sz @ spec.bz.astype(dtype)
    if n > 1:
        diag = diag + (sz[:, :-1] * sz[:, 1:]) @ np.asarray(spec.coupling, dtype=dtype)
    return diag / 2


def build_hamiltonian(spec, dtype=float):
    """Dense system Hamiltonian in the bare basis.

    ``H = 1/2 (sum B^x sigma^x + B^z sigma^z + sum J sigma^z sigma^z)``.
    The matrix is assembled entry by entry so it is exactly symmetric and a
    purely longitudinal chain gives an exactly diagonal matrix.
    """
    n = spec.n_spins
    if n > MAX_DENSE_SPINS:
        raise CapacityError(f"N={n} exceeds the dense limit of {MAX_DENSE_SPINS} spins")
    dim = 2 ** n
    h = np.diag(diagonal_energies(spec, dtype))
    rows = np.arange(dim)
    bx = spec.bx
    for mu in range(1, n + 1):
        if bx[mu - 1] == 0.0:
            continue
        partner = rows ^ (1 << (n - mu))
        h[rows, partner] += dtype(bx[mu - 1]) / 2
    return h
