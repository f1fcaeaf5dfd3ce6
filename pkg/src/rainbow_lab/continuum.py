"""Closed-form continuum predictions for the deformed chain.

Levels are indexed relative to the Fermi point: m = 0 is the first
single-particle level above it, m = -1 the first below, so the exact
eigenvector matching analytic level m is column ``L + m`` of the
ascending spectrum of a 2L-site chain.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .lattice import hopping_matrix_1d, profile_from_z, site_labels
from .spectra import diagonalize, occupied_orbitals, velocity_scaling

# Below this h the exponentials are evaluated by series limit.
_H_TINY = 1e-8


@dataclass(frozen=True)
class ContinuumParams:
    """Derived continuum quantities of a rainbow chain.

    tilde_L is the half-length of the equivalent uniform chain after the
    coordinate transformation; beta and T are the effective inverse
    temperature and temperature of the thermofield interpretation.
    """

    h: float
    L: int
    tilde_L: float
    beta: float
    T: float


@dataclass(frozen=True)
class AnalyticWavefunction:
    """Continuum single-particle wavefunction sampled on the lattice sites."""

    m: int
    components: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.components, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "components", v)


def _expm1_over_h(h: float, x) -> np.ndarray | float:
    """(e^{h x} - 1)/h with the h -> 0 limit handled by series."""
    x = np.asarray(x, dtype=float)
    if h < _H_TINY:
        out = x * (1.0 + h * x / 2.0 + (h * x) ** 2 / 6.0)
    else:
        out = np.expm1(h * x) / h
    return out if out.shape else float(out)


def deformed_length(h: float, L: float) -> float:
    """tilde_L = (e^{hL} - 1)/h, the deformed half-length; equals L at h=0."""
    if h < 0:
        raise ValueError(f"h must be non-negative, got {h!r}")
    return float(_expm1_over_h(h, L))


def continuum_params(h: float, L: int) -> ContinuumParams:
    if h < 0:
        raise ValueError(f"h must be non-negative, got {h!r}")
    beta = math.inf if h == 0 else 2 * math.pi / h
    return ContinuumParams(
        h=h, L=L, tilde_L=deformed_length(h, L), beta=beta, T=h / (2 * math.pi)
    )


def analytic_energy(m: int, h: float, L: int) -> float:
    """Deformed single-particle level E_m = a(hL) pi (m + 1/2) / (2L).

    Equivalently h pi (m + 1/2) / (2 (e^{hL} - 1)); the h = 0 limit is the
    uniform spectrum pi (m + 1/2) / (2L).
    """
    if h < 0:
        raise ValueError(f"h must be non-negative, got {h!r}")
    return velocity_scaling(h * L) * math.pi * (m + 0.5) / (2 * L)


def coordinate_map(x, h: float):
    """The deforming change of variables sign(x) (e^{h|x|} - 1)/h.

    Odd, strictly increasing, derivative e^{h|x|}; identity at h = 0.
    Accepts scalars or arrays.
    """
    if h < 0:
        raise ValueError(f"h must be non-negative, got {h!r}")
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * _expm1_over_h(h, np.abs(x))
    return out if out.shape else float(out)


def analytic_wavefunction(m: int, h: float, L: int) -> AnalyticWavefunction:
    """Continuum eigenfunction of level m on the 2L lattice sites, unit norm.

    psi_n ~ e^{h|n|/2} cos[ pi(n-m)/2
                            + sign(n) (pi(m+1/2)/2) (e^{h|n|}-1)/(e^{hL}-1) ].

    Accurate for |m| << L; deep levels vary on the lattice scale and are
    not captured (quantify with wavefunction_overlap).
    """
    if h < 0:
        raise ValueError(f"h must be non-negative, got {h!r}")
    ns = site_labels(L)
    absn = np.abs(ns)
    ratio = np.asarray(_expm1_over_h(h, absn)) / deformed_length(h, L)
    phase = np.pi * (ns - m) / 2.0 + np.sign(ns) * (np.pi * (m + 0.5) / 2.0) * ratio
    v = np.exp(h * absn / 2.0) * np.cos(phase)
    return AnalyticWavefunction(m=m, components=v / np.linalg.norm(v))


def wavefunction_overlap(a, b) -> float:
    """|<a|b>| of two single-particle vectors, renormalized internally."""
    a = np.asarray(getattr(a, "components", a), dtype=float)
    b = np.asarray(getattr(b, "components", b), dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(abs(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b)))


def slater_overlap(occ_a: np.ndarray, occ_b: np.ndarray) -> float:
    """|det(A^T B)| between two Slater states given by orthonormal orbitals.

    Invariant under orthogonal rotations inside either occupied set.
    Rank-deficient input yields 0 with a warning.
    """
    a = np.asarray(occ_a, dtype=float)
    b = np.asarray(occ_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"orbital matrices differ in shape: {a.shape} vs {b.shape}")
    if np.linalg.matrix_rank(a) < a.shape[1] or np.linalg.matrix_rank(b) < b.shape[1]:
        warnings.warn("rank-deficient orbital set; overlap is 0", stacklevel=2)
        return 0.0
    sign, logdet = np.linalg.slogdet(a.T @ b)
    if sign == 0:
        return 0.0
    return float(np.exp(logdet))


def continuum_occupied(L: int, h: float) -> np.ndarray:
    """QR-orthonormalized analytic orbitals of the L occupied levels m = -L..-1."""
    cols = np.column_stack(
        [analytic_wavefunction(m, h, L).components for m in range(-L, 0)]
    )
    q, _ = np.linalg.qr(cols)
    return q


@dataclass(frozen=True)
class ValidityMap:
    """Slater overlaps between continuum and exact ground states on an (L, z) grid.

    contours[i] = (L, z at overlap 0.90, z at overlap 0.95); NaN when the
    threshold is not crossed inside the scanned z range.
    """

    L_values: tuple
    z_values: tuple
    overlaps: np.ndarray = field(repr=False)
    contours: tuple = ()

    def contour(self, level: float, i: int) -> float:
        """First z where overlap drops through `level` for L_values[i]."""
        ov = self.overlaps[i]
        zs = self.z_values
        for k in range(1, len(zs)):
            if ov[k - 1] >= level > ov[k]:
                t = (level - ov[k - 1]) / (ov[k] - ov[k - 1])
                return float(zs[k - 1] + t * (zs[k] - zs[k - 1]))
        return math.nan


def _exact_occupied(L: int, z: float) -> np.ndarray:
    return occupied_orbitals(diagonalize(hopping_matrix_1d(profile_from_z(L, z))))


def validity_map(L_values, z_values, executor_map=map) -> ValidityMap:
    """Grid of many-body overlaps quantifying where the continuum holds.

    executor_map lets callers run grid points concurrently (pure function
    of (L, z)); results are assembled by index either way.
    """
    L_values = tuple(int(L) for L in L_values)
    z_values = tuple(float(z) for z in z_values)

    def one(point):
        L, z = point
        return slater_overlap(continuum_occupied(L, z / L), _exact_occupied(L, z))

    points = [(L, z) for L in L_values for z in z_values]
    flat = list(executor_map(one, points))
    grid = np.asarray(flat).reshape(len(L_values), len(z_values))
    vm = ValidityMap(L_values=L_values, z_values=z_values, overlaps=grid)
    contours = tuple(
        (L, vm.contour(0.90, i), vm.contour(0.95, i)) for i, L in enumerate(L_values)
    )
    return ValidityMap(
        L_values=L_values, z_values=z_values, overlaps=grid, contours=contours
    )
