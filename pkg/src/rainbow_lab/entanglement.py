"""Correlation-matrix entanglement machinery and its brute-force oracle.

For a Slater ground state the reduced density matrix of a block is fixed
by the block correlation matrix C_ij = <c+_i c_j>.  Its eigenvalues
nu_p in [0, 1] give every Renyi entropy, the single-body entanglement
energies eps_p = ln((1 - nu_p)/nu_p), and the entanglement Hamiltonian
constant f_0.  Entropies are in nats throughout.

The brute-force route expands the full many-body state (small N only),
bipartitions the amplitude matrix and takes singular values; it shares
no code with the correlation path beyond the orbital matrix itself, so
the two results agreeing to 1e-10 is a genuine cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .continuum import deformed_length
from .lattice import CouplingProfile, Lattice2D, hopping_matrix
from .qubism import AmplitudeTable
from .spectra import SpectrumResult, ZeroModeError, diagonalize

NU_CLIP = 1e-14
# Number of levels around eps = 0 averaged for the spacing Delta_L.  Two
# +- pairs: wide windows leak spectral curvature into the estimate.
DELTA_WINDOW = 4


@dataclass(frozen=True)
class CorrelationMatrix:
    """Ground-state two-point function restricted to a block of sites."""

    block: tuple
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        n = len(self.block)
        if m.shape != (n, n):
            raise ValueError(f"block of {n} sites needs {n}x{n} entries, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def size(self) -> int:
        return len(self.block)

    def eigenvalues(self) -> np.ndarray:
        nu = np.linalg.eigvalsh(self.entries)
        if nu.min() < -1e-10 or nu.max() > 1 + 1e-10:
            raise ValueError(
                f"correlation eigenvalues outside [0,1]: [{nu.min()}, {nu.max()}]"
            )
        return np.clip(nu, 0.0, 1.0)


@dataclass(frozen=True)
class EntanglementSpectrum:
    """Single-body entanglement data of a block.

    nu descending, eps = ln((1-nu)/nu) ascending with +-inf sentinels for
    levels clipped at 0 or 1, delta_L the mean level spacing around
    eps = 0, f0 = sum ln(1 + e^-eps) over finite levels.
    """

    nu: np.ndarray = field(repr=False)
    eps: np.ndarray = field(repr=False)
    delta_L: float
    f0: float

    def finite_eps(self) -> np.ndarray:
        return self.eps[np.isfinite(self.eps)]


class EntropyPoint(NamedTuple):
    """One entropy sample: block size (or half-length), Renyi order, S in nats."""

    size: float
    order: float
    value: float


@dataclass
class EntropyCurve:
    """Entropy points (block size or half-length, Renyi order, S in nats)."""

    points: list
    meta: dict = field(default_factory=dict)

    def sizes(self, order: float | None = None) -> list:
        return [p.size for p in self.points if order is None or p.order == order]

    def values(self, order: float | None = None) -> list:
        return [p.value for p in self.points if order is None or p.order == order]

    def at(self, order: float) -> "EntropyCurve":
        return EntropyCurve(
            points=[p for p in self.points if p.order == order], meta=dict(self.meta)
        )


def correlation_matrix(occ: np.ndarray, block) -> CorrelationMatrix:
    """C_ij = sum_k psi^k_i psi^k_j over occupied orbitals, i, j in block."""
    block = tuple(int(b) for b in block)
    if len(block) == 0:
        raise ValueError("empty block")
    if len(set(block)) != len(block):
        raise ValueError("block indices must be distinct")
    occ = np.asarray(occ, dtype=float)
    rows = occ[list(block), :]
    return CorrelationMatrix(block=block, entries=rows @ rows.T)


def ground_state_correlation(
    spec: SpectrumResult, zero_modes: str = "error"
) -> np.ndarray:
    """Full correlation matrix of the half-filled ground state.

    zero_modes picks the filling policy when single-particle levels sit
    at zero (e.g. the uniform 2D lattice):

    - "error": refuse (the half-filled Slater state is not unique);
    - "half":  occupy the zero-energy shell at density 1/2, i.e.
      C = P(E<0) + P(E=0)/2, the particle-hole symmetric zero-temperature
      limit.  The state is then Gaussian but not a single determinant.
    """
    if zero_modes not in ("error", "half"):
        raise ValueError(f"unknown zero-mode policy {zero_modes!r}")
    zero = spec.zero_modes()
    if not np.any(zero):
        occ = spec.orbitals[:, : spec.dim // 2]
        return occ @ occ.T
    if zero_modes == "error":
        raise ZeroModeError(
            f"{int(np.count_nonzero(zero))} zero modes; pass zero_modes='half' "
            "for the particle-hole symmetric filling"
        )
    neg = spec.orbitals[:, (spec.energies < 0) & ~zero]
    zcols = spec.orbitals[:, zero]
    return neg @ neg.T + 0.5 * (zcols @ zcols.T)


def block_correlation(c_full: np.ndarray, block) -> CorrelationMatrix:
    """Restrict a full correlation matrix to a block."""
    block = tuple(int(b) for b in block)
    if len(block) == 0:
        raise ValueError("empty block")
    return CorrelationMatrix(block=block, entries=c_full[np.ix_(block, block)])


def _renyi_from_nu(nu: np.ndarray, order: float) -> float:
    keep = (nu > NU_CLIP) & (nu < 1.0 - NU_CLIP)
    nu = nu[keep]
    if order == 1:
        return float(-np.sum(nu * np.log(nu) + (1 - nu) * np.log1p(-nu)))
    return float(np.sum(np.log(nu**order + (1 - nu) ** order)) / (1 - order))


def renyi_entropies(C: CorrelationMatrix, orders) -> list:
    """Renyi entropies S^(n) of a block; n = 1 is the von Neumann limit.

    S^(n) = (1/(1-n)) sum_p ln(nu_p^n + (1-nu_p)^n).  Levels clipped at
    0 or 1 (within 1e-14) carry no entropy and are dropped.
    """
    orders = [float(n) for n in (orders if np.iterable(orders) else [orders])]
    if any(n < 1 for n in orders):
        raise ValueError(f"Renyi order must be >= 1, got {min(orders)}")
    nu = C.eigenvalues()
    return [EntropyPoint(C.size, n, _renyi_from_nu(nu, n)) for n in orders]


def vn_entropy(C: CorrelationMatrix) -> float:
    return renyi_entropies(C, [1])[0].value


def entanglement_spectrum(C: CorrelationMatrix) -> EntanglementSpectrum:
    """Single-body entanglement energies and the level spacing near zero.

    Levels with nu clipped at 0 or 1 are reported as +-inf and excluded
    from the spacing estimate and from f0.
    """
    nu = np.sort(C.eigenvalues())[::-1]
    eps = np.empty_like(nu)
    lo = nu <= NU_CLIP
    hi = nu >= 1.0 - NU_CLIP
    mid = ~(lo | hi)
    eps[lo] = np.inf
    eps[hi] = -np.inf
    eps[mid] = np.log1p(-nu[mid]) - np.log(nu[mid])
    eps = np.sort(eps)

    finite = eps[np.isfinite(eps)]
    if finite.size >= 2:
        w = min(DELTA_WINDOW, finite.size)
        window = np.sort(finite[np.argsort(np.abs(finite))[:w]])
        delta = float(np.mean(np.diff(window)))
    else:
        delta = math.nan
    f0 = float(np.sum(np.logaddexp(0.0, -finite)))
    return EntanglementSpectrum(nu=nu, eps=eps, delta_L=delta, f0=f0)


def halfchain_entropy_prediction(h: float, L: int, c: float, cprime: float) -> float:
    """CFT half-chain entropy with the deformed length:
    (c/6) ln((e^{hL} - 1)/h) + c'; reduces to (c/6) ln L + c' at h = 0."""
    return c / 6.0 * math.log(deformed_length(h, L)) + cprime


def thermal_cft_entropy(beta: float, L: float, c: float) -> float:
    """Thermal CFT entropy (c/3) ln((beta/pi) sinh(pi L / beta)).

    Evaluated in log space so large L/beta does not overflow; the large
    L/beta limit is the extensive form pi c L / (3 beta).
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta!r}")
    x = math.pi * L / beta
    # ln sinh x = x - ln 2 + ln(1 - e^{-2x})
    log_sinh = x - math.log(2.0) + math.log1p(-math.exp(-2 * x))
    return c / 3.0 * (math.log(beta / math.pi) + log_sinh)


def halfchain_block(geometry) -> list:
    """The canonical left half: first L sites in 1D, x < 0 in 2D."""
    if isinstance(geometry, CouplingProfile):
        return list(range(geometry.L))
    if isinstance(geometry, Lattice2D):
        return geometry.left_half()
    raise TypeError(f"unsupported geometry {type(geometry).__name__}")


def boundary_blocks(n_sites: int):
    """All contiguous blocks anchored at the left edge, l = 1 .. n-1."""
    return [list(range(l)) for l in range(1, n_sites)]


def entropy_scan(geometry, blocks, orders, zero_modes: str = "error") -> EntropyCurve:
    """Diagonalize a geometry once and evaluate entropies on many blocks.

    `blocks` is an iterable of site-index lists, or one of the presets
    "half" (single canonical half block) and "boundary" (all left-anchored
    contiguous blocks).  Curve meta records the geometry parameters.
    """
    spec = diagonalize(hopping_matrix(geometry))
    c_full = ground_state_correlation(spec, zero_modes=zero_modes)
    if isinstance(blocks, str):
        if blocks == "half":
            blocks = [halfchain_block(geometry)]
        elif blocks == "boundary":
            blocks = boundary_blocks(spec.dim)
        else:
            raise ValueError(f"unknown block preset {blocks!r}")
    meta = {}
    if isinstance(geometry, CouplingProfile):
        meta = {"kind": "chain", "L": geometry.L, "alpha": geometry.alpha,
                "h": geometry.h, "z": geometry.z}
    elif isinstance(geometry, Lattice2D):
        meta = {"kind": "lattice2d", "L": geometry.L, "alpha": geometry.alpha}
    points = []
    for block in blocks:
        C = block_correlation(c_full, block)
        points.extend(renyi_entropies(C, orders))
    return EntropyCurve(points=points, meta=meta)


def _boundary_bipartition(amps: AmplitudeTable, block) -> np.ndarray:
    """Reshape the amplitude vector into the (block, rest) matrix.

    Only blocks contiguous at a chain boundary are allowed: for interior
    or scattered blocks the fermionic sign structure depends on an
    operator-ordering choice this module does not make.
    """
    n = amps.n_sites
    block = sorted(int(b) for b in block)
    l = len(block)
    if not 0 < l < n:
        raise ValueError(f"block size must be in (0, {n})")
    if block == list(range(l)):  # left boundary: leading bits are the block
        return amps.amplitudes.reshape(2**l, 2 ** (n - l))
    if block == list(range(n - l, n)):  # right boundary: trailing bits
        return amps.amplitudes.reshape(2 ** (n - l), 2**l).T
    raise ValueError(
        "brute-force entropies support only blocks contiguous at a boundary "
        f"(got sites {block})"
    )


def brute_force_block_entropy(amps: AmplitudeTable, block, orders) -> list:
    """Renyi entropies from the Schmidt values of the full many-body state.

    Independent of the correlation-matrix route: the amplitude matrix of
    a boundary block is decomposed by SVD and the entropies are those of
    the squared singular values.
    """
    orders = [float(n) for n in (orders if np.iterable(orders) else [orders])]
    if any(n < 1 for n in orders):
        raise ValueError(f"Renyi order must be >= 1, got {min(orders)}")
    mat = _boundary_bipartition(amps, block)
    p = np.linalg.svd(mat, compute_uv=False) ** 2
    p = p[p > 1e-30]
    p = p / p.sum()
    out = []
    for n in orders:
        if n == 1:
            s = float(-np.sum(p * np.log(p)))
        else:
            s = float(np.log(np.sum(p**n)) / (1 - n))
        out.append(EntropyPoint(len(tuple(block)), n, s))
    return out
