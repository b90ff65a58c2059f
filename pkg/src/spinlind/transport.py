"""Steady-state heat currents, the full solve pipeline and parameter sweeps.

A positive current ``Q_mu`` means energy flowing from reservoir ``mu`` into
the chain.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, SweepPointError, SpinlindError
from .kinetics import build_rate_matrix, solve_steady_state
from .model import ChainSpec, bare_bits
from .spectral import build_channels, detect_subspaces, diagonalize

RESIDUAL_GATE = 1e-8


@dataclass(frozen=True)
class HeatCurrentReport:
    """Per-reservoir steady heat currents.

    Attributes
    ----------
    currents : ndarray, shape (N,)
        ``Q_mu``; exactly zero for non-dissipative spins.
    residual : float
        ``sum(Q_mu)``, zero up to round-off by energy conservation.
    contributions : ndarray, shape (n_channels,)
        ``omega * Gamma`` for each channel, in channel order.
    """

    currents: np.ndarray
    residual: float
    contributions: np.ndarray

    def channel_table(self, channels):
        """Rows ``(mu, lower, upper, omega, omega * Gamma)``."""
        return list(zip(channels.mu.tolist(), channels.lower.tolist(),
                        channels.upper.tolist(), channels.omega.tolist(),
                        self.contributions.tolist()))


def heat_currents(rm, populations):
    """Heat currents out of every reservoir for steady populations.

    ``Q_mu = sum over channels of mu of omega * Gamma`` where ``Gamma`` is
    the net upward transition rate, i.e. the energy each reservoir pumps
    into the chain per unit time.

    Pass extended-precision populations (``SteadyStateSolution.populations_ext``)
    for currents accurate close to equilibrium.

    Raises
    ------
    ArgumentError
        If ``populations`` is not a steady state of ``rm`` (residual above
        ``1e-8 * ||M||_inf``).
    """
    p = np.asarray(populations)
    scale = np.abs(rm.matrix).sum(axis=1).max()
    res = np.abs(rm.matrix @ p.astype(float)).max()
    if res > RESIDUAL_GATE * max(scale, 1e-300):
        raise ArgumentError(f"populations are not stationary (residual {res:.3e})")
    ch = rm.channels
    contrib = ch.frequencies_ext * rm.net_rates(p)
    q = np.zeros(rm.kappa.size, dtype=contrib.dtype)
    np.add.at(q, ch.mu - 1, contrib)
    q[rm.kappa == 0] = 0
    return HeatCurrentReport(q.astype(float), float(q.sum()), contrib.astype(float))


@dataclass(frozen=True)
class ChainSolution:
    """Everything produced by :func:`solve_chain` for one spec."""

    spec: object
    eigensystem: object
    channels: object
    rate_matrix: object
    decomposition: object
    steady: object
    report: HeatCurrentReport

    @property
    def currents(self):
        return self.report.currents

    @property
    def populations(self):
        return self.steady.populations


def initial_populations(es, decomposition, description="uniform"):
    """Eigenlevel populations for an initial-state description.

    Parameters
    ----------
    description : str, dict or sequence
        ``'uniform'`` for the maximally mixed state; ``'components'`` for
        equal weight on every independent subspace; a mapping
        ``{mu: 'e' | 'g'}`` fixing some spins with the rest maximally mixed
        (useful for non-dissipative spins in a longitudinal field); or a
        sequence of component fractions, spread evenly inside each component;
        or a full population vector of length ``2**N``.
    """
    d = es.dimension
    n = es.n_spins
    if isinstance(description, str):
        if description == "uniform":
            return np.full(d, 1.0 / d)
        if description == "components":
            k = len(decomposition)
            return initial_populations(es, decomposition, np.full(k, 1.0 / k))
        raise ArgumentError(f"unknown initial state {description!r}")
    if isinstance(description, dict):
        bits = bare_bits(n)
        keep = np.ones(d, dtype=bool)
        for mu, state in description.items():
            mu = int(mu)
            if not 1 <= mu <= n or state not in ("e", "g"):
                raise ArgumentError(f"bad fixed-spin entry {mu}: {state!r}")
            keep &= bits[:, mu - 1] == (0 if state == "e" else 1)
        q = keep / keep.sum()
        p = (es.transform ** 2) @ q
        return p / p.sum()
    arr = np.asarray(description, dtype=float)
    if arr.shape == (d,):
        return arr / arr.sum()
    if arr.shape == (len(decomposition),):
        if abs(arr.sum() - 1.0) > 1e-10 or arr.min() < 0:
            raise ArgumentError("component fractions must be nonnegative and sum to one")
        p = np.zeros(d)
        for frac, comp in zip(arr, decomposition.components):
            p[list(comp)] = frac / len(comp)
        return p
    raise ArgumentError(
        f"initial state has length {arr.size}; expected {d} levels "
        f"or {len(decomposition)} component fractions")


def solve_chain(spec, initial=None, *, method="auto"):
    """Diagonalize, build channels and generator, solve, and compute currents.

    ``initial`` is only consulted when the steady state is not unique; see
    :func:`initial_populations` for accepted forms.
    """
    es = diagonalize(spec)
    channels = build_channels(es, spec)
    rm = build_rate_matrix(spec, es, channels)
    decomp = detect_subspaces(channels, spec.kappa, es)
    p0 = None
    if len(decomp) > 1 and initial is not None:
        p0 = initial_populations(es, decomp, initial)
    steady = solve_steady_state(rm, decomp, p0, method=method)
    report = heat_currents(rm, steady.populations_ext)
    return ChainSolution(spec, es, channels, rm, decomp, steady, report)


@dataclass(frozen=True)
class ModulatorScenario:
    """Spins whose field angle is swept over ``thetas``; others stay fixed."""

    swept: tuple
    thetas: tuple

    def __post_init__(self):
        swept = tuple(int(s) for s in self.swept)
        if not swept:
            raise ArgumentError("scenario must sweep at least one spin")
        object.__setattr__(self, "swept", swept)
        thetas = tuple(float(t) for t in self.thetas)
        if not thetas:
            raise ArgumentError("theta grid is empty")
        object.__setattr__(self, "thetas", thetas)

    @classmethod
    def named(cls, name, points=25):
        """``'s2'`` sweeps spin 2 and ``'s12'`` spins 1 and 2 over [0, pi/2]."""
        table = {"s2": (2,), "s12": (1, 2)}
        if name not in table:
            raise ArgumentError(f"unknown scenario {name!r}; choose from {sorted(table)}")
        return cls(table[name], tuple(np.linspace(0.0, math.pi / 2, points)))


def modulator_spec(magnitudes=(2.0, 5.0, 8.0), coupling=0.5):
    """Three-spin modulator chain: spin 2 is non-dissipative, baths at 10, 3, 5."""
    return ChainSpec(3, magnitudes, 0.0, coupling, (1e-3, 0.0, 1e-3), (10.0, 3.0, 5.0))


@dataclass(frozen=True)
class SweepTable:
    """Currents on a one-dimensional grid."""

    grid: np.ndarray
    n_spins: int
    currents: np.ndarray
    residuals: np.ndarray

    def rows(self):
        """Rows ``(grid value, N, mu, Q_mu, residual)`` in grid then spin order."""
        out = []
        for x, q, r in zip(self.grid, self.currents, self.residuals):
            for mu, qm in enumerate(q, 1):
                out.append((float(x), self.n_spins, mu, float(qm), float(r)))
        return out


def _solve_point(spec, initial, point):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            sol = solve_chain(spec, initial)
    except SpinlindError as exc:
        raise SweepPointError(point, exc) from exc
    return sol.report.currents, sol.report.residual


def _run_grid(specs, points, initial, workers):
    if workers and workers > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_point, specs, [initial] * len(specs), points))
    else:
        results = [_solve_point(s, initial, p) for s, p in zip(specs, points)]
    currents = np.array([r[0] for r in results])
    residuals = np.array([r[1] for r in results])
    return currents, residuals


def run_modulator(scenario, base, *, initial="uniform", workers=1):
    """Steady currents as the swept spins' field angle runs over the grid.

    Every grid point is solved independently; results come back in grid
    order whatever the worker count.
    """
    for mu in scenario.swept:
        if not 1 <= mu <= base.n_spins:
            raise ArgumentError(f"swept spin {mu} outside the chain")
    specs = []
    for theta in scenario.thetas:
        angles = list(base.field_angle)
        for mu in scenario.swept:
            angles[mu - 1] = theta
        specs.append(base.replace(field_angle=angles))
    points = [("theta", t) for t in scenario.thetas]
    currents, residuals = _run_grid(specs, points, initial, workers)
    return SweepTable(np.array(scenario.thetas), base.n_spins, currents, residuals)


def bulk_spec(base, t_bulk, kappa_bulk):
    """Copy of ``base`` with every bulk reservoir set to ``(kappa_bulk, t_bulk)``."""
    n = base.n_spins
    if n < 3:
        raise ArgumentError("a bulk temperature needs at least three spins")
    kappa = list(base.dissipation_rate)
    temps = list(base.temperature)
    for mu in range(2, n):
        kappa[mu - 1] = kappa_bulk
        temps[mu - 1] = t_bulk
    return base.replace(dissipation_rate=kappa, temperature=temps)


def bulk_chain_spec(n_spins=7, theta=math.pi / 4):
    """Uniform chain with hot left end (T=10) and cooler right end (T=5)."""
    temps = [10.0] + [10.0] * (n_spins - 2) + [5.0]
    return ChainSpec(n_spins, 5.0, theta, 0.1, 1e-3, temps)


def bulk_temperature_sweep(base, t_grid, kappa_grid, *, chain_lengths=None,
                           initial="uniform", workers=1):
    """Currents versus bulk temperature for each bulk dissipation rate.

    Parameters
    ----------
    base : ChainSpec
        Supplies fields, couplings and the end reservoirs.
    t_grid, kappa_grid : sequence of float
    chain_lengths : sequence of int, optional
        Re-run the sweep for other chain lengths, broadcasting the first
        spin's field, the first coupling, and the end reservoirs of ``base``.

    Returns
    -------
    dict
        ``{(kappa_b, N): SweepTable}`` in input order.
    """
    t_grid = [float(t) for t in t_grid]
    kappa_grid = [float(k) for k in kappa_grid]
    lengths = list(chain_lengths) if chain_lengths else [base.n_spins]
    out = {}
    for n in lengths:
        chain = base if n == base.n_spins else _resize(base, n)
        for kb in kappa_grid:
            specs = [bulk_spec(chain, tb, kb) for tb in t_grid]
            points = [("Tb", tb, "kappa_b", kb, "N", n) for tb in t_grid]
            currents, residuals = _run_grid(specs, points, initial, workers)
            out[(kb, n)] = SweepTable(np.array(t_grid), n, currents, residuals)
    return out


def _resize(base, n):
    if n < 3:
        raise ArgumentError("chain lengths must be at least 3")
    kappa = [base.dissipation_rate[0]] + [0.0] * (n - 2) + [base.dissipation_rate[-1]]
    temps = [base.temperature[0]] + [base.temperature[1]] * (n - 2) + [base.temperature[-1]]
    coupling = base.coupling[0] if base.coupling else 0.0
    return ChainSpec(n, base.field_magnitude[0], base.field_angle[0], coupling, kappa, temps)
