"""Closed-form steady states, net rates and currents for small chains.

These expressions are independent of the numerical pipeline and serve as
test oracles.  All chains here are in a longitudinal field unless stated
otherwise, so eigenstates are labelled by spin configurations such as
``'geg'`` (spin 1 ground, spin 2 excited, spin 3 ground).  Polynomials are
written out term by term without simplification.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .bath import bose_occupation
from .errors import ArgumentError

SIGMA = {"e": 1.0, "g": -1.0}


def _rates(kappa, omega, temperature):
    n = bose_occupation(omega, temperature)
    return kappa * n, kappa * (n + 1.0)


def thermal_single(omega, temperature):
    """Populations ``(p_ground, p_excited)`` of a qubit of splitting ``omega``."""
    if not omega > 0 or not temperature > 0:
        raise ArgumentError("frequency and temperature must be > 0")
    x = omega / temperature
    if x > 700:
        pe = math.exp(-x)
        return 1.0 - pe, pe
    n = bose_occupation(omega, temperature)
    return (n + 1.0) / (2.0 * n + 1.0), n / (2.0 * n + 1.0)


def thermal_bloch(bx, bz, temperature):
    """Bare-basis 2x2 Gibbs state of ``H = (bx sx + bz sz) / 2``."""
    omega = math.hypot(bx, bz)
    pg, pe = thermal_single(omega, temperature)
    nx, nz = bx / omega, bz / omega
    pol = pe - pg
    return 0.5 * np.array([[1.0 + pol * nz, pol * nx], [pol * nx, 1.0 - pol * nz]])


@dataclass(frozen=True)
class TwoSpinClosedForm:
    """Steady state of a two-spin longitudinal chain.

    ``rates`` maps names such as ``'J11+'`` to the reservoir rates; spin ``mu``
    channel ``1`` has its neighbour in the ground state and channel ``2`` in
    the excited state.
    """

    rates: dict
    unnormalized: dict
    normalizer: float
    gamma12: float
    coupling: float

    @property
    def populations(self):
        return {k: v / self.normalizer for k, v in self.unnormalized.items()}

    @property
    def currents(self):
        q1 = -2.0 * self.coupling * self.gamma12
        return np.array([q1, -q1])


def two_spin_closed_form(b1, b2, coupling, kappa1, kappa2, t1, t2):
    """Two-spin oracle from effective fields, coupling and reservoir data."""
    j = coupling
    if min(b1 - j, b2 - j) <= 0:
        raise ArgumentError("closed form needs B_mu > J so that all frequencies are positive")
    j11p, j11m = _rates(kappa1, b1 - j, t1)
    j12p, j12m = _rates(kappa1, b1 + j, t1)
    j21p, j21m = _rates(kappa2, b2 - j, t2)
    j22p, j22m = _rates(kappa2, b2 + j, t2)
    raw = {
        "gg": j11m * j12m * j21m + j11m * j12p * j22m + j11m * j21m * j22m + j12m * j21m * j22p,
        "ge": j11m * j12m * j21p + j11p * j12m * j22p + j11m * j21p * j22m + j12m * j21p * j22p,
        "eg": j11p * j12m * j21m + j11p * j12p * j22m + j11p * j21m * j22m + j12p * j21p * j22m,
        "ee": j11m * j12p * j21p + j11p * j12p * j22p + j11p * j21m * j22p + j12p * j21p * j22p,
    }
    norm = sum(raw.values())
    gamma = 2.0 / norm * (j11p * j12m * j21m * j22p - j11m * j12p * j21p * j22m)
    rates = {"J11+": j11p, "J11-": j11m, "J12+": j12p, "J12-": j12m,
             "J21+": j21p, "J21-": j21m, "J22+": j22p, "J22-": j22m}
    return TwoSpinClosedForm(rates, raw, norm, gamma, j)


def _require_longitudinal(spec, n):
    if spec.n_spins != n:
        raise ArgumentError(f"oracle needs a {n}-spin chain")
    if not spec.is_longitudinal:
        raise ArgumentError("oracle needs every field angle equal to 0")


def two_spin_steady(spec):
    """Two-spin oracle for a longitudinal ``ChainSpec`` with both spins dissipative."""
    _require_longitudinal(spec, 2)
    if min(spec.dissipation_rate) <= 0:
        raise ArgumentError("both spins must be dissipative")
    b1, b2 = spec.field_magnitude
    return two_spin_closed_form(b1, b2, spec.coupling[0], *spec.dissipation_rate,
                                *spec.temperature)


@dataclass(frozen=True)
class ThreeSpinSymmetricClosedForm:
    """Steady state of the mirror-symmetric three-spin longitudinal chain."""

    frequencies: dict
    unnormalized: dict
    normalizer: float
    gamma1: float
    gamma2: float
    coupling: float

    @property
    def gamma3(self):
        return self.gamma1 - self.gamma2

    @property
    def populations(self):
        return {k: v / self.normalizer for k, v in self.unnormalized.items()}

    @property
    def currents(self):
        q1 = -2.0 * self.coupling * (self.gamma1 + self.gamma2)
        return np.array([q1, -2.0 * q1, q1])


def three_spin_symmetric_steady(field, coupling, t_nodal, t_bulk, kappa_nodal, kappa_bulk):
    """Three-spin oracle with equal fields and couplings and ``T_1 = T_3``.

    Nodal channels sit at ``B - J`` (neighbour ground) and ``B + J``; bulk
    channels at ``B - 2J``, ``B`` and ``B + 2J``.

    ``gamma1`` is the net upward rate of spin 1 with spins 2 and 3 ground,
    ``gamma2`` the same with spin 2 ground and spin 3 excited.
    """
    b, j = field, coupling
    if b - 2 * j <= 0:
        raise ArgumentError("closed form needs B > 2J")
    freqs = {"n1": b - j, "n2": b + j, "b1": b - 2 * j, "b2": b, "b3": b + 2 * j}
    jn1p, jn1m = _rates(kappa_nodal, freqs["n1"], t_nodal)
    jn2p, jn2m = _rates(kappa_nodal, freqs["n2"], t_nodal)
    jb1p, jb1m = _rates(kappa_bulk, freqs["b1"], t_bulk)
    jb2p, jb2m = _rates(kappa_bulk, freqs["b2"], t_bulk)
    jb3p, jb3m = _rates(kappa_bulk, freqs["b3"], t_bulk)

    r = {}
    r["ggg"] = (
        jb1m * ((jb2m * jn1m + jb2p * jn2m) * (jb3m * jn1m + jb3p * jn2m)
                + jb3m * jn1m ** 2 * (jn2p + jn2m) + jb3p * jn2m ** 2 * (jn1p + jn1m))
        + 2 * jn1m * (jb1m * jn2m * (jb2m * jn1m + jb2p * jn2m)
                      + jb2m * jn2p * (jb3m * jn1m + jb3p * jn2m)
                      + jn1m * (jb1m * jn2m ** 2 + jb3m * jn2p ** 2 + 2 * jb2m * jn2p * jn2m)))
    r["gge"] = (
        jb2m * (jb1m * jn1p + jb1p * jn2p) * (jb3m * jn1m + jb3p * jn2m)
        + jb1m * jn1p * jn2m * (jb3m * jn1m + jb3p * jn2m)
        + jb3m * jn1m * jn2p * (jb1m * jn1p + jb1p * jn2p)
        + 2 * jb2m * (jn1m * jn1p * (jb1m * jn2m + jb3m * jn2p)
                      + jn2m * jn2p * (jb1p * jn1m + jb3p * jn1p))
        + 2 * jn1m * jn1p * (jb3m * jn2p ** 2 + jb1m * jn2m ** 2 + 2 * jb2m * jn2m * jn2p))
    r["egg"] = r["gge"]
    r["geg"] = (
        jb1p * ((jb2m * jn1m + jb2p * jn2m) * (jb3m * jn1m + jb3p * jn2m)
                + jb3m * jn1m ** 2 * (jn2p + jn2m) + jb3p * jn2m ** 2 * (jn1p + jn1m))
        + 2 * jn2m * (jb1p * jn1m * (jb2m * jn1m + jb2p * jn2m)
                      + jb2p * jn1p * (jb3m * jn1m + jb3p * jn2m)
                      + jn2m * (jb1p * jn1m ** 2 + jb3p * jn1p ** 2 + 2 * jb2p * jn1p * jn1m)))
    r["gee"] = (
        jb2p * (jb1m * jn1p + jb1p * jn2p) * (jb3m * jn1m + jb3p * jn2m)
        + jb1p * jn1m * jn2p * (jb3m * jn1m + jb3p * jn2m)
        + jb3p * jn1p * jn2m * (jb1m * jn1p + jb1p * jn2p)
        + 2 * jb2p * (jn1m * jn2m * (jb1m * jn1p + jb1p * jn2p)
                      + jn1p * jn2p * (jb3p * jn2m + jb3m * jn1m))
        + 2 * jn2p * jn2m * (jb1p * jn1m ** 2 + jb3p * jn1p ** 2 + 2 * jb2p * jn1p * jn1m))
    r["eeg"] = r["gee"]
    r["ege"] = (
        jb3m * ((jb1m * jn1p + jb1p * jn2p) * (jb2m * jn1p + jb2p * jn2p)
                + jb1m * jn1p ** 2 * (jn2m + jn2p) + jb1p * jn2p ** 2 * (jn1p + jn1m))
        + 2 * jn1p * (jb2m * jn2m * (jb1m * jn1p + jb1p * jn2p)
                      + jb3m * jn2p * (jb2m * jn1p + jb2p * jn2p)
                      + jn1p * (jb1m * jn2m ** 2 + jb3m * jn2p ** 2 + 2 * jb2m * jn2p * jn2m)))
    r["eee"] = (
        jb3p * ((jb1m * jn1p + jb1p * jn2p) * (jb2m * jn1p + jb2p * jn2p)
                + jb1m * jn1p ** 2 * (jn2m + jn2p) + jb1p * jn2p ** 2 * (jn1p + jn1m))
        + 2 * jn2p * (jb2p * jn1m * (jb1m * jn1p + jb1p * jn2p)
                      + jb3p * jn1p * (jb2m * jn1p + jb2p * jn2p)
                      + jn2p * (jb1p * jn1m ** 2 + jb3p * jn1p ** 2 + 2 * jb2p * jn1p * jn1m)))
    norm = sum(r.values())
    gamma1 = 2.0 / norm * (
        (jb3m * jn1m + jb3p * jn2m + 2 * jn1m * jn2m)
        * (jb1m * jb2p * jn1p * jn2m - jb1p * jb2m * jn1m * jn2p)
        + jb1m * jb3p * jn1p ** 2 * jn2m ** 2 - jb1p * jb3m * jn1m ** 2 * jn2p ** 2)
    gamma2 = 2.0 / norm * (
        (jb1p * jn2p + jb1m * jn1p + 2 * jn1p * jn2p)
        * (jb2m * jb3p * jn1p * jn2m - jb2p * jb3m * jn1m * jn2p)
        + jb1m * jb3p * jn1p ** 2 * jn2m ** 2 - jb1p * jb3m * jn1m ** 2 * jn2p ** 2)
    return ThreeSpinSymmetricClosedForm(freqs, r, norm, gamma1, gamma2, j)


def three_spin_symmetric_from_spec(spec):
    """Validate a ``ChainSpec`` and evaluate the symmetric three-spin oracle."""
    _require_longitudinal(spec, 3)
    b = spec.field_magnitude
    j = spec.coupling
    t = spec.temperature
    k = spec.dissipation_rate
    if not (b[0] == b[1] == b[2] and j[0] == j[1] and t[0] == t[2] and k[0] == k[2]):
        raise ArgumentError("chain is not mirror symmetric with equal fields and couplings")
    return three_spin_symmetric_steady(b[0], j[0], t[0], t[1], k[0], k[1])


@dataclass(frozen=True)
class BlockedThreeSpin:
    """Product steady state when a longitudinal, non-dissipative middle spin is frozen."""

    density: np.ndarray
    frequencies: tuple
    currents: np.ndarray


def blocked_three_spin(spec, middle):
    """Steady state of a three-spin chain whose middle spin is frozen.

    Spin 2 must be longitudinal and non-dissipative; spins 1 and 3 may be
    tilted.  Each end spin thermalizes with its own reservoir in the
    effective field ``(B^x_mu, B^z_mu + J s_2)`` where ``s_2 = +1`` for
    ``middle='e'`` and ``-1`` for ``'g'``.

    Returns the bare-basis density matrix and the two end-spin frequencies.
    """
    if spec.n_spins != 3:
        raise ArgumentError("oracle needs a 3-spin chain")
    if spec.bx[1] != 0.0 or spec.dissipation_rate[1] != 0.0:
        raise ArgumentError("spin 2 must be longitudinal and non-dissipative")
    if middle not in SIGMA:
        raise ArgumentError("middle must be 'e' or 'g'")
    s = SIGMA[middle]
    bx, bz = spec.bx, spec.bz
    j12, j23 = spec.coupling
    t1, t3 = spec.temperature[0], spec.temperature[2]
    rho1 = thermal_bloch(bx[0], bz[0] + j12 * s, t1)
    rho3 = thermal_bloch(bx[2], bz[2] + j23 * s, t3)
    frozen = np.diag([1.0, 0.0]) if middle == "e" else np.diag([0.0, 1.0])
    density = np.kron(np.kron(rho1, frozen), rho3)
    freqs = (math.hypot(bx[0], bz[0] + j12 * s), math.hypot(bx[2], bz[2] + j23 * s))
    return BlockedThreeSpin(density, freqs, np.zeros(3))


@dataclass(frozen=True)
class SevenSpinSubspace:
    """Composed currents of a seven-spin chain with spins 3 and 6 frozen."""

    label: str
    left: TwoSpinClosedForm
    right: TwoSpinClosedForm
    end_frequency: float
    currents: np.ndarray

    @property
    def gamma12(self):
        return self.left.gamma12

    @property
    def gamma45(self):
        return self.right.gamma12


def parse_frozen_label(label, spins):
    """Parse labels such as ``'3g6e'`` into ``{3: 'g', 6: 'e'}``."""
    out = {}
    rest = label
    for mu in spins:
        prefix = str(mu)
        if not rest.startswith(prefix) or len(rest) <= len(prefix) or rest[len(prefix)] not in SIGMA:
            raise ArgumentError(f"bad subspace label {label!r}")
        out[mu] = rest[len(prefix)]
        rest = rest[len(prefix) + 1:]
    if rest:
        raise ArgumentError(f"bad subspace label {label!r}")
    return out


def seven_spin_subchain_currents(spec, label):
    """Currents of the seven-spin chain in the subspace ``label`` (e.g. ``'3g6e'``).

    Spins 3 and 6 are non-dissipative and longitudinal, so they split the
    chain into the two-spin subchains (1, 2) and (4, 5) and the single spin 7.
    Each subchain end next to a frozen spin sees its field shifted by
    ``+J`` (frozen spin excited) or ``-J`` (ground).
    """
    _require_longitudinal(spec, 7)
    k = spec.dissipation_rate
    if k[2] != 0 or k[5] != 0:
        raise ArgumentError("spins 3 and 6 must be non-dissipative")
    states = parse_frozen_label(label, (3, 6))
    s3, s6 = SIGMA[states[3]], SIGMA[states[6]]
    b = spec.field_magnitude
    j = spec.coupling
    t = spec.temperature
    left = two_spin_closed_form(b[0], b[1] + j[1] * s3, j[0], k[0], k[1], t[0], t[1])
    right = two_spin_closed_form(b[3] + j[2] * s3, b[4] + j[4] * s6, j[3], k[3], k[4],
                                 t[3], t[4])
    q = np.zeros(7)
    q[0:2] = left.currents
    q[3:5] = right.currents
    return SevenSpinSubspace(label, left, right, b[6] + j[5] * s6, q)


FULL_MODELS = ("LLL", "TLL", "LTL", "LLT", "TLT")
PARTIAL_MODELS = ("TTL", "LTT")


def model_angles(tag):
    """Field angles for a three-letter model tag (``L`` = 0, ``T`` = pi/2)."""
    if len(tag) != 3 or set(tag) - {"L", "T"}:
        raise ArgumentError(f"bad model tag {tag!r}")
    return tuple(math.pi / 2 if c == "T" else 0.0 for c in tag)


def three_spin_frequencies(tag, fields, couplings):
    """Closed-form channel frequencies of a three-spin chain per reservoir.

    Parameters
    ----------
    tag : str
        One of ``LLL, TLL, LTL, LLT, TLT`` (and ``TTL, LTT``, for which only
        frequencies are known in closed form; a warning says so).
    fields : (B1, B2, B3)
    couplings : (J12, J23)

    Returns
    -------
    dict
        ``{mu: sorted array of distinct positive frequencies}``.

    Notes
    -----
    For ``TLT`` the spin-1 frequency is returned as ``(W+ - W-) / 2`` and the
    spin-3 frequency as ``(W+ + W-) / 2``.  These equal ``sqrt(B1^2 + J12^2)``
    and ``sqrt(B3^2 + J23^2)`` only when the first is the smaller of the two.
    """
    b1, b2, b3 = (float(x) for x in fields)
    j12, j23 = (float(x) for x in couplings)
    sq = math.sqrt
    if tag == "LLL":
        out = {1: [b1 + j12, b1 - j12],
               2: [b2 + j12 + j23, b2 + j12 - j23, b2 - j12 + j23, b2 - j12 - j23],
               3: [b3 + j23, b3 - j23]}
    elif tag == "TLL":
        r = sq(b1 ** 2 + j12 ** 2)
        wp, wm = r + j23, r - j23
        out = {1: [r], 2: [b2 + j23, b2 - j23, wp + b2, wp - b2, wm + b2, wm - b2],
               3: [b3 + j23, b3 - j23]}
    elif tag == "LTL":
        wp, wm = sq(b2 ** 2 + (j12 + j23) ** 2), sq(b2 ** 2 + (j12 - j23) ** 2)
        out = {1: [0.5 * (2 * b1 - wm + wp), 0.5 * (2 * b1 + wm + wp),
                   0.5 * (2 * b1 + wm - wp), 0.5 * (2 * b1 - wm - wp)],
               2: [wp, wm],
               3: [0.5 * (2 * b3 - wm + wp), 0.5 * (2 * b3 + wm + wp),
                   0.5 * (-2 * b3 + wm + wp), 0.5 * (2 * b3 + wm - wp)]}
    elif tag == "LLT":
        r = sq(b3 ** 2 + j23 ** 2)
        wp, wm = r + j12, r - j12
        out = {1: [b1 + j12, b1 - j12],
               2: [b2 + j12, b2 - j12, b2 + wp, b2 + wm, b2 - wm, b2 - wp],
               3: [r]}
    elif tag == "TLT":
        a, c = sq(b1 ** 2 + j12 ** 2), sq(b3 ** 2 + j23 ** 2)
        base = b1 ** 2 + b3 ** 2 + j12 ** 2 + j23 ** 2
        wp, wm = sq(base + 2 * a * c), sq(max(base - 2 * a * c, 0.0))
        out = {1: [0.5 * (wp - wm)],
               2: [b2, b2 + 0.5 * (wp + wm), b2 + wp, b2 - 0.5 * (wp + wm), b2 - wm,
                   b2 + 0.5 * (wp - wm), -b2 + wp, -b2 + 0.5 * (wp - wm), -b2 - wm],
               3: [0.5 * (wp + wm)]}
    elif tag in PARTIAL_MODELS:
        warnings.warn(f"model {tag}: only frequencies are available in closed form",
                      UserWarning, stacklevel=2)
        if tag == "TTL":
            x = b1 ** 2 + b2 ** 2 + j12 ** 2 + j23 ** 2
            y = 2 * sq(b1 ** 2 * b2 ** 2 + j23 ** 2 * (b1 ** 2 + j12 ** 2))
            end, edge = b3, 3
        else:
            x = b2 ** 2 + b3 ** 2 + j12 ** 2 + j23 ** 2
            y = 2 * sq(b2 ** 2 * b3 ** 2 + j12 ** 2 * (b3 ** 2 + j23 ** 2))
            end, edge = b1, 1
        wp, wm = sq(x + y), sq(max(x - y, 0.0))
        pair = [0.5 * (wp - wm), 0.5 * (wp + wm), wp, wm]
        lone = [end, end + 0.5 * (wp - wm), end - 0.5 * (wp - wm),
                end + 0.5 * (wp + wm), end - 0.5 * (wp + wm)]
        out = {mu: (lone if mu == edge else pair) for mu in (1, 2, 3)}
    else:
        raise ArgumentError(f"no closed-form frequencies for model {tag!r}")
    return {mu: _distinct_positive(v) for mu, v in out.items()}


def _distinct_positive(values, rel_tol=1e-9):
    vals = np.sort(np.abs(np.asarray(values, dtype=float)))
    vals = vals[vals > 0]
    keep = [vals[0]] if vals.size else []
    for v in vals[1:]:
        if abs(v - keep[-1]) > rel_tol * max(v, 1.0):
            keep.append(v)
    return np.array(keep)
