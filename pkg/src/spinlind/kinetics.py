"""Population rate equation: generator assembly, steady states and dynamics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.integrate import solve_ivp

from .bath import bath_rates, rate_arrays
from .errors import (
    ArgumentError,
    ConsistencyError,
    NumericError,
    UnderdeterminedError,
)
from .spectral import EXTENDED, detect_subspaces

CLIP_TOL = 1e-10
GTH_MAX_DIM = 1024
EXPM_MAX_DIM = 256
COND_LIMIT = 1e12


@dataclass(frozen=True)
class RateMatrix:
    """Generator ``M`` of ``dp/dt = M p`` on eigenlevel populations.

    Columns sum to zero and off-diagonal entries are nonnegative.  The
    per-channel rates ``j_plus`` (lower to upper) and ``j_minus`` (upper to
    lower) are kept in extended precision, together with an extended copy
    ``matrix_ext`` of the generator used by the steady-state solver.
    """

    matrix: np.ndarray
    channels: object
    j_plus: np.ndarray
    j_minus: np.ndarray
    kappa: np.ndarray
    spec_digest: str | None = None
    matrix_ext: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def dimension(self):
        return self.matrix.shape[0]

    def spin_term(self, mu):
        """Contribution ``M_mu`` of the reservoir attached to spin ``mu``."""
        mask = self.channels.mu == mu
        return _assemble(self.dimension, self.channels.lower[mask],
                         self.channels.upper[mask], self.channels.coeff[mask],
                         self.j_plus[mask], self.j_minus[mask]).astype(float)

    def net_rates(self, populations):
        """Net upward rate ``2 c^2 (J+ p_lower - J- p_upper)`` for every channel.

        The result carries the precision of ``populations``: pass the
        extended-precision steady state to keep the rates accurate.
        """
        p = np.asarray(populations)
        if p.dtype != EXTENDED:
            p = p.astype(float)
        ch = self.channels
        return 2 * ch.coeff ** 2 * (self.j_plus * p[ch.lower] - self.j_minus * p[ch.upper])

    def residual(self, populations):
        return float(np.abs(self.matrix @ np.asarray(populations)).max())


def _assemble(dim, lower, upper, coeff, jp, jm):
    m = np.zeros((dim, dim), dtype=jp.dtype)
    w = 2 * coeff.astype(jp.dtype) ** 2
    np.add.at(m, (lower, upper), w * jm)
    np.add.at(m, (upper, lower), w * jp)
    m[np.diag_indices(dim)] = -m.sum(axis=0)
    return m


def build_rate_matrix(spec, es, channels):
    """Assemble the population generator from the transition channels.

    Each channel moves probability from its lower to its upper level at rate
    ``2 c^2 J+`` and back at ``2 c^2 J-``.  Diagonal entries are minus the
    column sums so that total probability is conserved.
    """
    digests = {spec.digest, channels.spec_digest, es.spec_digest} - {None}
    if len(digests) > 1:
        raise ConsistencyError("chain spec, eigensystem and channels do not belong together")
    if channels.dimension != spec.dimension:
        raise ConsistencyError("channel set dimension does not match the chain")
    kappa = spec.kappa
    temps = spec.temperatures
    idx = channels.mu - 1
    jp, jm = rate_arrays(channels.frequencies_ext, kappa[idx].astype(EXTENDED),
                         temps[idx].astype(EXTENDED))
    m = _assemble(spec.dimension, channels.lower, channels.upper, channels.coeff, jp, jm)
    return RateMatrix(m.astype(float), channels, jp, jm, kappa, spec.digest, m)


def net_rate(rm, channel, populations):
    """Net upward rate of a single :class:`TransitionChannel`."""
    p = np.asarray(populations, dtype=float)
    k = rm.kappa[channel.mu - 1]
    if k == 0:
        return 0.0
    mask = rm.channels.mu == channel.mu
    for lo, up, jp_, jm_ in zip(rm.channels.lower[mask], rm.channels.upper[mask],
                                rm.j_plus[mask], rm.j_minus[mask]):
        if lo == channel.lower and up == channel.upper:
            return float(2 * channel.coeff ** 2 * (jp_ * p[lo] - jm_ * p[up]))
    raise ArgumentError("channel does not belong to this rate matrix")


def channel_rates(channel, kappa, temperature):
    """Rates of an isolated channel, for use outside a rate matrix."""
    return bath_rates(channel.omega, kappa, temperature)


@dataclass(frozen=True)
class SteadyStateSolution:
    """Steady populations together with the subspace bookkeeping."""

    populations: np.ndarray
    nullspace_dim: int
    component_fractions: np.ndarray
    decomposition: object
    residual_norm: float
    populations_ext: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def unique(self):
        return self.nullspace_dim == 1


def _gth(m):
    """Stationary vector of an irreducible generator by state reduction.

    The Grassmann-Taksar-Heyman elimination is subtraction free, so every
    entry of the result has small relative error.  Returns ``None`` when the
    chain turns out to be reducible.
    """
    a = np.array(m.T, dtype=EXTENDED)
    n = a.shape[0]
    np.fill_diagonal(a, 0)
    for k in range(n - 1, 0, -1):
        s = a[k, :k].sum()
        if not s > 0:
            return None
        a[:k, k] /= s
        a[:k, :k] += np.outer(a[:k, k], a[k, :k])
    pi = np.zeros(n, dtype=EXTENDED)
    pi[0] = 1
    for k in range(1, n):
        pi[k] = pi[:k] @ a[:k, k]
    return pi / pi.sum()


def _lu_nullvector(m):
    """Normalized nullvector by replacing one equation with ``sum(p) = 1``."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    scale = np.abs(m).max()
    a = m / scale if scale > 0 else m.copy()
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    lu, piv = linalg.lu_factor(a, check_finite=False)
    anorm = np.abs(a).sum(axis=0).max()
    rcond, _ = linalg.lapack.dgecon(lu, anorm, norm="1")
    if rcond * COND_LIMIT > 1.0:
        return linalg.lu_solve((lu, piv), b, check_finite=False)
    _, s, vt = linalg.svd(m)
    v = vt[-1]
    return v / v.sum()


def _component_nullvector(m, method):
    if m.shape[0] == 1:
        return np.ones(1, dtype=EXTENDED)
    if method == "gth" or (method == "auto" and m.shape[0] <= GTH_MAX_DIM):
        pi = _gth(m)
        if pi is not None:
            return pi
    return _lu_nullvector(m).astype(EXTENDED)


def _clip(p):
    if p.min() < -CLIP_TOL:
        raise NumericError(f"steady state has a population of {float(p.min()):.3e}")
    p = np.clip(p, 0, None)
    return p / p.sum()


def solve_steady_state(rm, decomposition=None, initial=None, *, method="auto"):
    """Steady populations of the rate equation.

    Parameters
    ----------
    rm : RateMatrix
    decomposition : SubspaceDecomposition, optional
        Computed from the dissipative channels when omitted.
    initial : array, optional
        Initial populations.  Required when there is more than one
        independent subspace, since the weight of each subspace is conserved.
    method : {'auto', 'gth', 'lu'}
        ``'auto'`` uses state reduction up to 1024 levels and an LU solve of
        the row-replaced system above that (with an SVD fallback when the
        system is ill conditioned).

    Returns
    -------
    SteadyStateSolution
    """
    if method not in ("auto", "gth", "lu"):
        raise ArgumentError(f"unknown method {method!r}")
    if decomposition is None:
        decomposition = detect_subspaces(rm.channels, rm.kappa)
    d = len(decomposition)
    dim = rm.dimension
    if d == 1:
        fractions = np.ones(1)
    else:
        if initial is None:
            raise UnderdeterminedError(
                f"{d} independent subspaces; an initial state is needed to weight them")
        p0 = np.asarray(initial, dtype=float)
        if p0.shape != (dim,):
            raise ArgumentError(f"initial populations must have length {dim}")
        if abs(p0.sum() - 1.0) > 1e-10 or p0.min() < -1e-12:
            raise ArgumentError("initial populations must be a probability vector")
        fractions = decomposition.masses(p0)
    full = rm.matrix if rm.matrix_ext is None else rm.matrix_ext
    pops = np.zeros(dim, dtype=EXTENDED)
    for comp, frac in zip(decomposition.components, fractions):
        if frac == 0.0:
            continue
        idx = np.array(comp)
        sub = full[np.ix_(idx, idx)]
        pops[idx] = EXTENDED(frac) * _clip(_component_nullvector(sub, method))
    if not np.all(np.isfinite(pops)):
        raise NumericError("steady state is not finite")
    plain = pops.astype(float)
    return SteadyStateSolution(plain, d, fractions, decomposition, rm.residual(plain), pops)


def evolve_populations(rm, p0, times):
    """Integrate ``dp/dt = M p`` from ``p0`` at ``t = 0``.

    Uses the exact matrix exponential up to 256 levels and a stiff BDF
    integrator with the analytic Jacobian beyond.

    Returns
    -------
    ndarray, shape (len(times), d)
    """
    p0 = np.asarray(p0, dtype=float)
    times = np.asarray(times, dtype=float)
    if not (np.all(np.isfinite(p0)) and np.all(np.isfinite(times))):
        raise NumericError("initial state and times must be finite")
    if abs(p0.sum() - 1.0) > 1e-10:
        raise ArgumentError("initial populations must sum to one")
    m = rm.matrix
    if rm.dimension <= EXPM_MAX_DIM:
        out = np.array([linalg.expm(m * t) @ p0 for t in times])
    else:
        order = np.argsort(times)
        sol = solve_ivp(lambda t, y: m @ y, (0.0, float(times.max())), p0,
                        method="BDF", t_eval=times[order], jac=m,
                        rtol=1e-12, atol=1e-14)
        if not sol.success:
            raise NumericError(f"integration failed: {sol.message}")
        out = np.empty((times.size, rm.dimension))
        out[order] = sol.y.T
    if not np.all(np.isfinite(out)):
        raise NumericError("trajectory is not finite")
    return out


def slowest_rate(rm):
    """Magnitude of the slowest nonzero relaxation rate of ``M``."""
    w = np.sort(np.abs(np.linalg.eigvals(rm.matrix).real))
    scale = max(w.max(), 1e-300)
    nz = w[w > 1e-9 * scale]
    return float(nz[0]) if nz.size else 0.0
