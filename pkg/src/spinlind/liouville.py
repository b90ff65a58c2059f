"""Full secular Lindblad superoperator in the energy eigenbasis.

This is a verification harness for the population rate equation: it keeps
the coherences, so the population block, the steady state and the decay of
off-diagonal elements can be checked directly.

The density matrix is vectorized row by row, ``vec(rho)[i * d + j] =
rho[i, j]``, so that ``vec(A rho B) = kron(A, B.T) vec(rho)``.  The real form
stacks ``vec(Re rho)`` over ``vec(Im rho)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .bath import rate_arrays
from .errors import ArgumentError, CapacityError, ConsistencyError
from .spectral import group_by_frequency

MAX_LEVELS = 32


@dataclass(frozen=True)
class Superoperator:
    """Generator of ``d rho / dt`` acting on the vectorized density matrix."""

    complex_matrix: np.ndarray
    dimension: int
    kappa_max: float
    spec_digest: str | None = None

    @property
    def matrix(self):
        """Real form acting on ``[vec(Re rho), vec(Im rho)]``."""
        a = self.complex_matrix
        return np.block([[a.real, -a.imag], [a.imag, a.real]])

    @property
    def population_index(self):
        d = self.dimension
        return np.arange(d) * (d + 1)

    @property
    def coherence_index(self):
        mask = np.ones(self.dimension ** 2, dtype=bool)
        mask[self.population_index] = False
        return np.flatnonzero(mask)

    def population_block(self):
        p = self.population_index
        return self.complex_matrix[np.ix_(p, p)].real

    def apply(self, rho):
        d = self.dimension
        return (self.complex_matrix @ np.asarray(rho, dtype=complex).reshape(-1)).reshape(d, d)


def _dissipator(a, rate_down, rate_up, d):
    """Superoperator of ``g-(2 A r A^+ - {A^+A, r}) + g+(2 A^+ r A - {AA^+, r})``."""
    eye = np.eye(d)
    ad = a.conj().T
    out = np.zeros((d * d, d * d), dtype=complex)
    for op, rate in ((a, rate_down), (ad, rate_up)):
        if rate == 0:
            continue
        opd = op.conj().T
        n = opd @ op
        out += rate * (2 * np.kron(op, opd.T) - np.kron(n, eye) - np.kron(eye, n.T))
    return out


def build_liouvillian(spec, es, channels, groups=None):
    """Secular Lindblad generator with frequency-merged jump operators.

    Each group of channels of one spin sharing a frequency ``omega`` gives the
    jump operator ``A = sum c |lower><upper|`` with decay rate
    ``kappa (n + 1)`` and excitation rate ``kappa n``.

    Raises
    ------
    CapacityError
        When the chain has more than 32 levels.
    """
    d = spec.dimension
    if d > MAX_LEVELS:
        raise CapacityError(f"superoperator limited to {MAX_LEVELS} levels, chain has {d}")
    digests = {spec.digest, es.spec_digest, channels.spec_digest} - {None}
    if len(digests) > 1:
        raise ConsistencyError("chain spec, eigensystem and channels do not belong together")
    if groups is None:
        groups = group_by_frequency(channels)
    h = np.diag(es.eigenvalues).astype(complex)
    eye = np.eye(d)
    gen = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    kappa = spec.kappa
    temps = spec.temperatures
    for g in groups:
        k = kappa[g.mu - 1]
        if k == 0:
            continue
        jp, jm = rate_arrays(np.array([g.omega]), np.array([k]), np.array([temps[g.mu - 1]]))
        a = np.zeros((d, d))
        for ch in g.members:
            a[ch.lower, ch.upper] += ch.coeff
        gen += _dissipator(a, float(jm[0]), float(jp[0]), d)
    return Superoperator(gen, d, float(kappa.max()) if kappa.size else 0.0, spec.digest)


def steady_density(sop, tol=1e-10):
    """Trace-one Hermitian steady state and the number of zero modes.

    Zero modes are singular values below ``tol`` times the largest one.
    """
    d = sop.dimension
    _, s, vh = linalg.svd(sop.complex_matrix)
    null = vh[s <= tol * s[0]].conj()
    if null.shape[0] == 0:
        null = vh[-1:].conj()
    v = null[0].reshape(d, d)
    v = v / np.trace(v)
    v = 0.5 * (v + v.conj().T)
    return v, int(null.shape[0])


def zero_mode_count(sop, tol=1e-10):
    s = linalg.svdvals(sop.complex_matrix)
    return int(np.sum(s <= tol * s[0]))


def evolve_density(sop, rho0, times):
    """Density matrices at ``times`` from ``rho0`` by matrix exponential."""
    d = sop.dimension
    v0 = np.asarray(rho0, dtype=complex).reshape(-1)
    return np.array([(linalg.expm(sop.complex_matrix * t) @ v0).reshape(d, d) for t in times])


@dataclass(frozen=True)
class CoherenceReport:
    """Outcome of :func:`coherence_decay_check`.

    ``status`` is ``'decays'``, ``'persistent'`` or ``'inconclusive'``;
    ``margin`` is the slowest coherence decay rate (minus the largest real
    part in the coherence block).
    """

    status: str
    margin: float
    coupling: float

    @property
    def ok(self):
        return self.status == "decays"


def coherence_decay_check(sop, rel_tol=1e-12):
    """Whether every coherence-supported mode decays.

    The populations must not exchange weight with the coherences (checked
    on both off-diagonal blocks).  If they do, which happens when a single
    jump operator links degenerate levels, the test is inconclusive.
    Otherwise every eigenvalue of the coherence block needs a real part below
    ``-rel_tol * kappa_max``.
    """
    a = sop.complex_matrix
    p, c = sop.population_index, sop.coherence_index
    scale = max(np.abs(a).max(), 1e-300)
    coupling = max(np.abs(a[np.ix_(p, c)]).max(initial=0.0),
                   np.abs(a[np.ix_(c, p)]).max(initial=0.0)) / scale
    if c.size == 0:
        return CoherenceReport("decays", np.inf, coupling)
    w = linalg.eigvals(a[np.ix_(c, c)])
    margin = float(-w.real.max())
    if coupling > 1e-12:
        return CoherenceReport("inconclusive", margin, coupling)
    eps = rel_tol * sop.kappa_max
    status = "decays" if margin > eps and sop.kappa_max > 0 else "persistent"
    return CoherenceReport(status, margin, coupling)


def trace_functional_residual(sop):
    """Largest entry of ``t^T L`` where ``t`` selects the trace; zero when trace preserving."""
    t = np.zeros(sop.dimension ** 2)
    t[sop.population_index] = 1.0
    return float(np.abs(t @ sop.complex_matrix).max())


def check_size(n_spins):
    if 2 ** n_spins > MAX_LEVELS:
        raise CapacityError(f"superoperator limited to {MAX_LEVELS} levels")
    if n_spins < 1:
        raise ArgumentError("chain must have at least one spin")
