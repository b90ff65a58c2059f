"""Eigendecomposition, reservoir transition channels and subspace detection.

Eigenlevels are 0-based in this module (level ``0`` is the ground state);
spins are 1-based.  The transformation matrix ``transform`` has the
eigenvectors as rows, so ``transform[i, k]`` is the amplitude of bare state
``k + 1`` in eigenstate ``i``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    ArgumentError,
    ConsistencyError,
    DegenerateTransitionWarning,
    NumericError,
)
from .model import (
    bare_label,
    build_hamiltonian,
    diagonal_energies,
    sigma_z_diagonal,
    spin_stride,
)

# Extended precision for energies, rates and populations.  Net transition
# rates are small differences of large fluxes, so carrying a few extra digits
# keeps currents accurate close to equilibrium.
EXTENDED = np.longdouble

SIGN_TOL = 1e-10
PRUNE_TOL = 1e-12
FREQ_REL_TOL = 1e-9


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues (ascending) and eigenvectors of a chain Hamiltonian."""

    eigenvalues: np.ndarray
    transform: np.ndarray
    spec_digest: str | None = None
    levels: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def energies(self):
        """Eigenvalues in extended precision when available."""
        return self.eigenvalues if self.levels is None else self.levels

    @property
    def dimension(self):
        return self.eigenvalues.size

    @property
    def n_spins(self):
        return int(round(np.log2(self.dimension)))

    def populations_to_bare(self, populations):
        """Bare-basis density matrix of a state diagonal in the eigenbasis."""
        lam = self.transform
        return lam.T @ (np.asarray(populations)[:, None] * lam)


def _fix_signs(vectors):
    """Make the first significant component of each column positive."""
    mask = np.abs(vectors) > SIGN_TOL
    first = np.argmax(mask, axis=0)
    signs = np.sign(vectors[first, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _block_eigh(h, groups):
    """Diagonalize ``h`` restricted to each orthonormal column group."""
    values, vectors = [], []
    for basis in groups:
        sub = basis.T @ h @ basis
        sub = 0.5 * (sub + sub.T)
        try:
            w, v = linalg.eigh(sub)
        except linalg.LinAlgError as exc:
            raise NumericError(f"eigensolver failed: {exc}") from exc
        values.append(w)
        vectors.append(basis @ v)
    return np.concatenate(values), np.hstack(vectors)


def _pattern_groups(h):
    """Column groups from connected components of the off-diagonal pattern."""
    dim = h.shape[0]
    off = h != 0.0
    np.fill_diagonal(off, False)
    ncomp, labels = connected_components(off, directed=False)
    eye = np.eye(dim)
    return [eye[:, labels == c] for c in range(ncomp)]


def _parity_groups(dim):
    """Orthonormal bases of the even and odd sectors of the global spin flip.

    The flip of every spin maps bare index ``k`` to ``dim - 1 - k``.
    """
    half = dim // 2
    even = np.zeros((dim, half))
    odd = np.zeros((dim, half))
    k = np.arange(half)
    s = 1.0 / np.sqrt(2.0)
    even[k, k] = s
    even[dim - 1 - k, k] = s
    odd[k, k] = s
    odd[dim - 1 - k, k] = -s
    return [even, odd]


def eigendecompose(h, *, spec_digest=None, parity=False):
    """Diagonalize a real symmetric Hamiltonian.

    The matrix is first split into the connected blocks of its nonzero
    pattern (or, with ``parity=True``, into the two sectors of the global
    spin flip), so that exactly decoupled sectors never mix numerically even
    when their levels are degenerate.

    Parameters
    ----------
    h : (d, d) array
        Real symmetric matrix.
    spec_digest : str, optional
        Provenance tag copied into the result.
    parity : bool
        Use the global spin-flip sectors.  Only valid when ``h`` commutes with
        the flip, as for a purely transverse chain.

    Returns
    -------
    EigenSystem
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ArgumentError("Hamiltonian must be a square matrix")
    if not np.array_equal(h, h.T):
        scale = max(1.0, np.abs(h).max())
        if np.abs(h - h.T).max() > 1e-12 * scale:
            raise ArgumentError("Hamiltonian is not symmetric")
        h = 0.5 * (h + h.T)
    dim = h.shape[0]
    groups = _parity_groups(dim) if parity and dim > 1 else _pattern_groups(h)
    values, vectors = _block_eigh(h, groups)
    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = _fix_signs(vectors[:, order])
    return EigenSystem(values, np.ascontiguousarray(vectors.T), spec_digest)


def rayleigh_levels(spec, transform):
    """Eigenvalues as Rayleigh quotients ``<i|H|i>`` in extended precision.

    The error of a Rayleigh quotient is quadratic in the eigenvector error,
    so double-precision eigenvectors give energies accurate to the extended
    working precision.  Uses the sparse structure of ``H``.
    """
    n = spec.n_spins
    lam = transform.astype(EXTENDED)
    hv = lam * diagonal_energies(spec, EXTENDED)[None, :]
    cols = np.arange(spec.dimension)
    for mu, bx in enumerate(spec.bx, 1):
        if bx != 0.0:
            hv += EXTENDED(bx) / 2 * lam[:, cols ^ (1 << (n - mu))]
    return (lam * hv).sum(axis=1)


def diagonalize(spec):
    """Build and diagonalize the Hamiltonian of ``spec``."""
    h = build_hamiltonian(spec)
    parity = spec.is_transverse and spec.n_spins > 0
    es = eigendecompose(h, spec_digest=spec.digest, parity=parity)
    levels = rayleigh_levels(spec, es.transform)
    return EigenSystem(es.eigenvalues, es.transform, es.spec_digest, levels)


def coefficient_matrix(es, mu):
    """All coefficients ``<i|sigma^x_mu|j>`` in the eigenbasis.

    Evaluated as a sum over the bare index set of spin ``mu`` and its flipped
    partners, which is symmetric in ``(i, j)`` by construction.
    """
    n = es.n_spins
    stride = spin_stride(mu, n)
    k = np.arange(es.dimension)
    k = k[(k // stride) % 2 == 0]
    lam = es.transform
    a = lam[:, k] @ lam[:, k + stride].T
    return a + a.T


def transition_coefficient(es, mu, i, j):
    """Coefficient of spin ``mu`` between eigenlevels ``i`` and ``j``.

    Levels are labelled ``1 .. 2**N`` in ascending energy, as in the
    printed transition tables; arrays elsewhere use 0-based positions.
    """
    d = es.dimension
    if not (1 <= i <= d and 1 <= j <= d):
        raise ArgumentError(f"level labels ({i}, {j}) outside [1, {d}]")
    i, j = i - 1, j - 1
    stride = spin_stride(mu, es.n_spins)
    k = np.arange(d)
    k = k[(k // stride) % 2 == 0]
    lam = es.transform
    return float(lam[i, k] @ lam[j, k + stride] + lam[i, k + stride] @ lam[j, k])


@dataclass(frozen=True)
class TransitionChannel:
    """One reservoir-induced jump between eigenlevels ``lower < upper``."""

    mu: int
    lower: int
    upper: int
    omega: float
    coeff: float
    merged: bool = False


@dataclass(frozen=True)
class ChannelSet:
    """Column store of all transition channels of one eigensystem."""

    mu: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    omega: np.ndarray
    coeff: np.ndarray
    n_spins: int
    dimension: int
    spec_digest: str | None = None
    omega_ext: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def frequencies_ext(self):
        """Channel frequencies in extended precision when available."""
        return self.omega if self.omega_ext is None else self.omega_ext

    def __len__(self):
        return self.mu.size

    def __iter__(self):
        for row in zip(self.mu, self.lower, self.upper, self.omega, self.coeff):
            yield TransitionChannel(int(row[0]), int(row[1]), int(row[2]),
                                    float(row[3]), float(row[4]))

    def select(self, mask):
        ext = None if self.omega_ext is None else self.omega_ext[mask]
        return ChannelSet(self.mu[mask], self.lower[mask], self.upper[mask],
                          self.omega[mask], self.coeff[mask], self.n_spins,
                          self.dimension, self.spec_digest, ext)

    def for_spin(self, mu):
        return self.select(self.mu == mu)

    def frequencies(self, mu):
        """Sorted distinct frequencies of spin ``mu`` (relative tolerance 1e-9)."""
        return np.array([g.omega for g in group_by_frequency(self.for_spin(mu))])


def _zero_gap(values):
    scale = max(1.0, float(np.abs(values).max())) if values.size else 1.0
    return FREQ_REL_TOL * scale


def build_channels(es, spec):
    """Enumerate the transition channels of every spin.

    A pair of levels contributes a channel for spin ``mu`` when its
    coefficient exceeds ``1e-12`` times the largest coefficient of that spin
    and the levels are not degenerate.  Degenerate pairs with a significant
    coefficient raise a :class:`DegenerateTransitionWarning`, since the rate
    equation then ignores population-coherence coupling.
    """
    if es.spec_digest is not None and es.spec_digest != spec.digest:
        raise ConsistencyError("eigensystem was not built from this chain spec")
    if es.dimension != spec.dimension:
        raise ConsistencyError("eigensystem dimension does not match the chain")
    lam = es.eigenvalues
    gap = lam[None, :] - lam[:, None]
    upper_tri = np.triu(np.ones_like(gap, dtype=bool), k=1)
    zero = np.abs(gap) <= _zero_gap(lam)
    cols = {k: [] for k in ("mu", "lower", "upper", "omega", "coeff")}
    for mu in range(1, spec.n_spins + 1):
        c = coefficient_matrix(es, mu)
        cmax = np.abs(c).max()
        if cmax == 0.0:
            continue
        significant = np.abs(c) > PRUNE_TOL * cmax
        degenerate = significant & zero & upper_tri
        if degenerate.any():
            warnings.warn(
                f"spin {mu} couples {int(degenerate.sum())} degenerate level pair(s); "
                "population dynamics neglects the resulting coherences",
                DegenerateTransitionWarning, stacklevel=2)
        keep = significant & ~zero & upper_tri
        lo, up = np.nonzero(keep)
        cols["mu"].append(np.full(lo.size, mu))
        cols["lower"].append(lo)
        cols["upper"].append(up)
        cols["omega"].append(gap[lo, up])
        cols["coeff"].append(c[lo, up])
    if cols["mu"]:
        arrays = {k: np.concatenate(v) for k, v in cols.items()}
    else:
        arrays = {k: np.zeros(0, dtype=int if k in ("mu", "lower", "upper") else float)
                  for k in cols}
    energies = es.energies
    omega_ext = energies[arrays["upper"].astype(int)] - energies[arrays["lower"].astype(int)]
    return ChannelSet(arrays["mu"].astype(int), arrays["lower"].astype(int),
                      arrays["upper"].astype(int), omega_ext.astype(float),
                      arrays["coeff"].astype(float), spec.n_spins, spec.dimension,
                      spec.digest, omega_ext)


@dataclass(frozen=True)
class ChannelGroup:
    """Channels of one spin sharing a transition frequency."""

    mu: int
    omega: float
    members: tuple = field(default_factory=tuple)

    @property
    def merged(self):
        return len(self.members) > 1


def group_by_frequency(channels, rel_tol=FREQ_REL_TOL):
    """Merge channels of the same spin whose frequencies agree within ``rel_tol``.

    Returns a list of :class:`ChannelGroup` sorted by spin then frequency.
    ``members`` holds :class:`TransitionChannel` objects.
    """
    out = []
    items = list(channels)
    for mu in sorted({ch.mu for ch in items}):
        own = sorted((ch for ch in items if ch.mu == mu), key=lambda ch: ch.omega)
        current = [own[0]]
        for ch in own[1:]:
            ref = current[0].omega
            if abs(ch.omega - ref) <= rel_tol * max(abs(ch.omega), abs(ref)):
                current.append(ch)
            else:
                out.append(_make_group(mu, current))
                current = [ch]
        out.append(_make_group(mu, current))
    return out


def _make_group(mu, members):
    omega = float(np.mean([m.omega for m in members]))
    flag = len(members) > 1
    members = tuple(TransitionChannel(m.mu, m.lower, m.upper, m.omega, m.coeff, flag)
                    for m in members)
    return ChannelGroup(mu, omega, members)


@dataclass(frozen=True)
class SubspaceDecomposition:
    """Partition of eigenlevels into dynamically independent components."""

    components: tuple
    labels: tuple

    def __len__(self):
        return len(self.components)

    @property
    def level_labels(self):
        """Array mapping each eigenlevel to its component number."""
        size = sum(len(c) for c in self.components)
        out = np.empty(size, dtype=int)
        for m, comp in enumerate(self.components):
            out[list(comp)] = m
        return out

    def masses(self, populations):
        p = np.asarray(populations)
        return np.array([p[list(c)].sum() for c in self.components])

    def index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise ArgumentError(f"no subspace labelled {label!r}; have {self.labels}") from None


def detect_subspaces(channels, kappa, es=None):
    """Connected components of the eigenlevel graph of dissipative channels.

    Parameters
    ----------
    channels : ChannelSet
    kappa : sequence of float
        Dissipation rate of every spin; only channels with ``kappa > 0`` are
        edges.
    es : EigenSystem, optional
        When given, components are labelled by the conserved states of the
        non-dissipative spins (e.g. ``'3g6e'``), by global spin-flip parity
        (``'P+'``/``'P-'``), or by position (``'S0'``, ``'S1'``...).
    """
    kappa = np.asarray(kappa, dtype=float)
    d = channels.dimension
    active = kappa[channels.mu - 1] > 0
    rows, cols = channels.lower[active], channels.upper[active]
    graph = coo_matrix((np.ones(rows.size), (rows, cols)), shape=(d, d))
    ncomp, lab = connected_components(graph, directed=False)
    # order components by their smallest level
    first = np.array([np.flatnonzero(lab == c)[0] for c in range(ncomp)])
    order = np.argsort(first)
    comps = tuple(tuple(int(i) for i in np.flatnonzero(lab == c)) for c in order)
    labels = _label_components(comps, kappa, es) if es is not None else \
        tuple(f"S{m}" for m in range(len(comps)))
    return SubspaceDecomposition(comps, labels)


def _label_components(comps, kappa, es):
    n = es.n_spins
    fallback = tuple(f"S{m}" for m in range(len(comps)))
    if len(comps) == 1:
        return fallback
    lam = es.transform
    quiet = [mu for mu in range(1, n + 1) if kappa[mu - 1] == 0]
    if quiet:
        sz = sigma_z_diagonal(n)
        expect = (lam ** 2) @ sz[:, [mu - 1 for mu in quiet]]
        labels = []
        for comp in comps:
            vals = expect[list(comp)]
            if not np.all(np.abs(np.abs(vals) - 1) < 1e-9):
                break
            signs = np.sign(vals)
            if not np.all(signs == signs[0]):
                break
            labels.append("".join(f"{mu}{'e' if s > 0 else 'g'}"
                                  for mu, s in zip(quiet, signs[0])))
        else:
            if len(set(labels)) == len(labels):
                return tuple(labels)
    flipped = lam[:, ::-1]
    parity = np.einsum("ik,ik->i", lam, flipped)
    labels = []
    for comp in comps:
        vals = parity[list(comp)]
        if np.all(vals > 1 - 1e-9):
            labels.append("P+")
        elif np.all(vals < -1 + 1e-9):
            labels.append("P-")
        else:
            return fallback
    if len(set(labels)) == len(labels):
        return tuple(labels)
    return fallback


def tf_symmetry_check(es, spec, tol=1e-9):
    """Whether every eigenvector is symmetric or antisymmetric under a global flip.

    Compares magnitudes ``|Lambda(i, j)|`` and ``|Lambda(i, d - 1 - j)|`` so
    the check does not depend on eigenvector signs.
    """
    if not spec.is_transverse:
        raise ArgumentError("symmetry check requires a purely transverse chain")
    lam = np.abs(es.transform)
    return bool(np.abs(lam - lam[:, ::-1]).max() <= tol)


def bare_populations(es, populations):
    """Diagonal of the bare-basis density matrix for eigenbasis populations."""
    return (es.transform ** 2).T @ np.asarray(populations)


def configuration_labels(es):
    """Spin-configuration label (e.g. ``'geg'``) of each eigenlevel.

    Only meaningful when every eigenvector is a single bare state, as in a
    purely longitudinal chain.
    """
    lam = np.abs(es.transform)
    k = lam.argmax(axis=1)
    if np.abs(lam[np.arange(lam.shape[0]), k] - 1.0).max() > 1e-12:
        raise ArgumentError("eigenvectors are not bare states")
    return [bare_label(int(i) + 1, es.n_spins) for i in k]
