"""Self-check suites comparing the numeric pipeline with closed forms.

Each suite draws random parameters from a fixed seed, runs the numeric
solver and the matching oracle, and reports the largest deviation against
its tolerance.  :func:`run_suites` is what ``spinlind verify`` prints.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from . import oracle
from .liouville import build_liouvillian, coherence_decay_check, steady_density
from .model import ChainSpec
from .spectral import build_channels, configuration_labels, diagonalize
from .transport import solve_chain

SEED = 20240611


@dataclass(frozen=True)
class SuiteResult:
    """Outcome of one verification suite."""

    name: str
    passed: bool
    max_deviation: float
    tolerance: float
    cases: int
    detail: str = ""

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "max_deviation", float(self.max_deviation))

    def to_dict(self):
        return asdict(self)


def log_uniform(rng, low, high, size=None):
    """Log-uniform draws on ``[low, high]``."""
    return np.exp(rng.uniform(math.log(low), math.log(high), size))


def _draw_lf_pair(rng):
    while True:
        b = log_uniform(rng, 1, 10, 2)
        j = float(log_uniform(rng, 0.05, 1))
        if b.min() > j:
            return b, j


def single_spin_suite(cases=50, seed=SEED):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        b, t, k = log_uniform(rng, 1, 10), log_uniform(rng, 1, 20), log_uniform(rng, 1e-4, 1e-2)
        sol = solve_chain(ChainSpec(1, b, 0.0, (), k, t))
        pg, pe = oracle.thermal_single(b, t)
        # level 0 is the ground state
        worst = max(worst, abs(sol.populations[0] - pg), abs(sol.populations[1] - pe))
    return SuiteResult("single_spin", worst <= 1e-12, worst, 1e-12, cases)


def two_spin_suite(cases=100, seed=SEED):
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for _ in range(cases):
        b, j = _draw_lf_pair(rng)
        spec = ChainSpec(2, b, 0.0, j, log_uniform(rng, 1e-4, 1e-2, 2), log_uniform(rng, 1, 20, 2))
        sol = solve_chain(spec)
        ref = oracle.two_spin_steady(spec)
        pops = ref.populations
        for i, lab in enumerate(configuration_labels(sol.eigensystem)):
            worst = max(worst, abs(sol.populations[i] - pops[lab]) / pops[lab])
        q = ref.currents
        worst = max(worst, float(np.max(np.abs(sol.currents - q)) / np.max(np.abs(q))))
    return SuiteResult("two_spin", worst <= 1e-10, worst, 1e-10, cases)


def three_spin_symmetric_suite(cases=50, seed=SEED):
    rng = np.random.default_rng(seed + 2)
    worst = 0.0
    done = 0
    while done < cases:
        b, j = float(log_uniform(rng, 1, 10)), float(log_uniform(rng, 0.05, 1))
        if b <= 2 * j:
            continue
        tn, tb = log_uniform(rng, 1, 20, 2)
        kn, kb = log_uniform(rng, 1e-4, 1e-2, 2)
        spec = ChainSpec(3, b, 0.0, j, (kn, kb, kn), (tn, tb, tn))
        sol = solve_chain(spec)
        ref = oracle.three_spin_symmetric_steady(b, j, tn, tb, kn, kb)
        pops = ref.populations
        for i, lab in enumerate(configuration_labels(sol.eigensystem)):
            worst = max(worst, abs(sol.populations[i] - pops[lab]) / pops[lab])
        q = ref.currents
        worst = max(worst, float(np.max(np.abs(sol.currents - q)) / np.max(np.abs(q))))
        done += 1
    return SuiteResult("three_spin_symmetric", worst <= 1e-10, worst, 1e-10, cases)


def blocked_three_spin_suite(seed=SEED):
    rng = np.random.default_rng(seed + 3)
    worst = 0.0
    cases = 0
    for tag in ("LLL", "LLT", "TLL", "TLT"):
        for middle in "ge":
            spec = ChainSpec(3, log_uniform(rng, 1, 10, 3), oracle.model_angles(tag),
                             log_uniform(rng, 0.05, 1, 2),
                             (float(log_uniform(rng, 1e-4, 1e-2)), 0.0,
                              float(log_uniform(rng, 1e-4, 1e-2))),
                             (float(log_uniform(rng, 1, 20)), None, float(log_uniform(rng, 1, 20))))
            sol = solve_chain(spec, {2: middle})
            ref = oracle.blocked_three_spin(spec, middle)
            rho = sol.eigensystem.populations_to_bare(sol.populations)
            worst = max(worst, float(np.abs(rho - ref.density).max()),
                        float(np.abs(sol.currents).max()))
            cases += 1
    return SuiteResult("blocked_three_spin", worst <= 1e-12, worst, 1e-12, cases)


def seven_spin_suite(cases=5, seed=SEED):
    rng = np.random.default_rng(seed + 4)
    worst = 0.0
    for _ in range(cases):
        while True:
            b = log_uniform(rng, 1, 10, 7)
            j = log_uniform(rng, 0.05, 1, 6)
            if np.all(b > 2 * np.max(j)):
                break
        k = log_uniform(rng, 1e-4, 1e-2, 7)
        k[2] = k[5] = 0.0
        spec = ChainSpec(7, b, 0.0, j, k, log_uniform(rng, 1, 20, 7))
        for label in ("3g6g", "3g6e", "3e6g", "3e6e"):
            sol = solve_chain(spec, {3: label[1], 6: label[3]})
            ref = oracle.seven_spin_subchain_currents(spec, label)
            dev = np.max(np.abs(sol.currents - ref.currents)) / np.max(np.abs(ref.currents))
            worst = max(worst, float(dev))
    return SuiteResult("seven_spin", worst <= 1e-9, worst, 1e-9, cases * 4)


def three_spin_frequency_suite(cases=10, seed=SEED):
    rng = np.random.default_rng(seed + 5)
    worst = 0.0
    mismatch = []
    for tag in oracle.FULL_MODELS + oracle.PARTIAL_MODELS:
        for _ in range(cases):
            b = rng.uniform(1, 10, 3)
            j = rng.uniform(0.05, 1, 2)
            if tag == "TLT" and math.hypot(b[0], j[0]) > math.hypot(b[2], j[1]):
                b[0], b[2] = b[2], b[0]
                j = j[::-1].copy()
            spec = ChainSpec(3, b, oracle.model_angles(tag), j, 1e-3, 5.0)
            channels = build_channels(diagonalize(spec), spec)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                ref = oracle.three_spin_frequencies(tag, b, j)
            for mu in (1, 2, 3):
                got = channels.frequencies(mu)
                if got.size != ref[mu].size:
                    mismatch.append(f"{tag}:{mu}")
                    worst = math.inf
                    continue
                worst = max(worst, float(np.max(np.abs(got - ref[mu]) / ref[mu])))
    detail = "count mismatch " + ", ".join(mismatch) if mismatch else ""
    return SuiteResult("three_spin_frequencies", worst <= 1e-10, worst, 1e-10,
                       cases * 7, detail)


def liouvillian_suite(cases=20, seed=SEED):
    """Rate-equation steady state against the full superoperator nullvector."""
    rng = np.random.default_rng(seed + 6)
    worst = 0.0
    decays = True
    for _ in range(cases):
        spec = ChainSpec(3, log_uniform(rng, 1, 10, 3), rng.uniform(0.1, 1.4, 3),
                         log_uniform(rng, 0.05, 1, 2), log_uniform(rng, 1e-4, 1e-2, 3),
                         log_uniform(rng, 1, 20, 3))
        sol = solve_chain(spec)
        sop = build_liouvillian(spec, sol.eigensystem, sol.channels)
        rho, _ = steady_density(sop)
        worst = max(worst, float(np.max(np.abs(np.diag(rho).real - sol.populations))))
        decays &= coherence_decay_check(sop).status == "decays"
    return SuiteResult("liouvillian", worst <= 1e-9 and decays, worst, 1e-9, cases,
                       "" if decays else "a coherence mode does not decay")


FAST_SUITES = (single_spin_suite, two_spin_suite, three_spin_symmetric_suite,
               blocked_three_spin_suite, seven_spin_suite, three_spin_frequency_suite)
FULL_SUITES = FAST_SUITES + (liouvillian_suite,)


def run_suites(full=False):
    """Run the oracle suites (plus the superoperator check when ``full``)."""
    out = []
    for suite in FULL_SUITES if full else FAST_SUITES:
        try:
            out.append(suite())
        except Exception as exc:  # report, do not abort the other suites
            out.append(SuiteResult(suite.__name__.removesuffix("_suite"), False,
                                   math.inf, math.nan, 0, f"{type(exc).__name__}: {exc}"))
    return out
