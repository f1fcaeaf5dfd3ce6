"""Chain and lattice builders for the rainbow hopping model.

The 1D geometry is an open chain of ``2L`` sites labelled by half-odd
integers ``n = -(L-1/2), ..., -1/2, +1/2, ..., +(L-1/2)``.  The central
link carries hopping ``J_0 = 1`` and the link at distance ``k`` from the
center carries ``J = alpha**(2k-1)``, i.e. the couplings decay
exponentially away from the center with rate ``h = -2 ln(alpha)``.

The 2D geometry is a ``2L x 2L`` square lattice with the same exponential
decay along x: a link's amplitude is ``alpha**|x_mid|`` where ``x_mid``
is the x coordinate of the link midpoint.

All hopping matrices use the convention that a link with amplitude ``J``
contributes the matrix element ``-J/2`` (single convention for 1D and 2D).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

# Below this value subnormal couplings start losing relative precision.
UNDERFLOW_FLOOR = 1e-280


def site_labels(L: int) -> np.ndarray:
    """Half-odd-integer labels of a 2L-site chain, leftmost first.

    Internal 0-based index i maps to label n = i - L + 1/2.
    """
    return np.arange(2 * L) - L + 0.5


@dataclass(frozen=True)
class CouplingProfile:
    """Signed nearest-neighbour couplings of an open 2L-site chain.

    Attributes
    ----------
    L : int
        Half-chain length; the chain has 2L sites and 2L-1 links.
    alpha : float
        Decay parameter in (0, 1]; alpha = exp(-h/2).
    h : float
        Exponential decay rate, h = -2 ln(alpha) >= 0.
    z : float
        Dimensionless deformation, z = h * L.
    couplings : np.ndarray
        The 2L-1 signed hoppings, leftmost link first.  Index L-1 is the
        central link.
    """

    L: int
    alpha: float
    h: float
    z: float
    couplings: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.couplings, dtype=float)
        if c.shape != (2 * self.L - 1,):
            raise ValueError(
                f"profile needs {2 * self.L - 1} couplings, got {c.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "couplings", c)

    @property
    def n_sites(self) -> int:
        return 2 * self.L

    @property
    def min_coupling(self) -> float:
        """Smallest |J| in the profile (underflow watch for large z)."""
        return float(np.min(np.abs(self.couplings)))

    def labels(self) -> np.ndarray:
        return site_labels(self.L)

    def to_json(self) -> str:
        return json.dumps(
            {
                "L": self.L,
                "alpha": self.alpha,
                "h": self.h,
                "z": self.z,
                "couplings": list(self.couplings),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "CouplingProfile":
        d = json.loads(text)
        return cls(
            L=int(d["L"]),
            alpha=float(d["alpha"]),
            h=float(d["h"]),
            z=float(d["z"]),
            couplings=np.asarray(d["couplings"], dtype=float),
        )


@dataclass(frozen=True)
class HoppingMatrix:
    """Real symmetric single-particle hopping matrix, element -J/2 per link."""

    dim: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.shape != (self.dim, self.dim):
            raise ValueError(f"expected {self.dim}x{self.dim} matrix, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def spectral_bound(self) -> float:
        """Cheap upper bound on the spectral radius (max abs row sum)."""
        return float(np.max(np.sum(np.abs(self.entries), axis=1)))


@dataclass(frozen=True)
class Lattice2D:
    """2L x 2L square lattice with x-graded hopping amplitudes.

    Sites are labelled by half-odd-integer coordinates (x, y) with
    x, y in {-(L-1/2), ..., +(L-1/2)} and stored row-major in x then y:
    index = ix * 2L + iy with ix, iy the 0-based coordinate ranks.

    Links are (i, j, J) with i < j, sorted by (i, j); J = alpha**|x_mid|.
    """

    L: int
    alpha: float
    sites: tuple
    links: tuple

    @property
    def n_sites(self) -> int:
        return (2 * self.L) ** 2

    def site_index(self, x: float, y: float) -> int:
        n = 2 * self.L
        ix = int(round(x + self.L - 0.5))
        iy = int(round(y + self.L - 0.5))
        if not (0 <= ix < n and 0 <= iy < n):
            raise ValueError(f"site ({x}, {y}) outside lattice")
        return ix * n + iy

    def left_half(self) -> list:
        """Site indices with x < 0 (the block used for the 2D entropy)."""
        n = 2 * self.L
        return [ix * n + iy for ix in range(self.L) for iy in range(n)]

    def to_json(self) -> str:
        return json.dumps(
            {
                "L": self.L,
                "alpha": self.alpha,
                "links": [[i, j, J] for (i, j, J) in self.links],
            }
        )


def _validate_geometry(L: int, alpha: float) -> None:
    if not isinstance(L, (int, np.integer)) or L < 1:
        raise ValueError(f"L must be a positive integer, got {L!r}")
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha!r}")


def build_rainbow_profile(L: int, alpha: float) -> CouplingProfile:
    """Rainbow couplings J_0 = 1, J = alpha**(2k-1) at distance k >= 1.

    Couplings are evaluated in log space as exp(-h(2k-1)/2) so that large
    z does not overflow intermediate powers; a RuntimeWarning is issued
    when the smallest coupling drops below the subnormal watermark.
    """
    _validate_geometry(L, alpha)
    h = -2.0 * math.log(alpha)
    c = np.ones(2 * L - 1)
    for k in range(1, L):
        val = math.exp(-h * (2 * k - 1) / 2.0)
        c[L - 1 + k] = val
        c[L - 1 - k] = val
    profile = CouplingProfile(L=L, alpha=alpha, h=h, z=h * L, couplings=c)
    if profile.min_coupling < UNDERFLOW_FLOOR:
        warnings.warn(
            f"smallest coupling {profile.min_coupling:.3e} is below "
            f"{UNDERFLOW_FLOOR:.0e}; outer links are numerically decoupled",
            RuntimeWarning,
            stacklevel=2,
        )
    return profile


def profile_from_z(L: int, z: float) -> CouplingProfile:
    """Rainbow profile parametrized by z = h*L instead of alpha."""
    if not isinstance(L, (int, np.integer)) or L < 1:
        raise ValueError(f"L must be a positive integer, got {L!r}")
    if z < 0:
        raise ValueError(f"z must be non-negative, got {z!r}")
    h = z / L
    return build_rainbow_profile(L, math.exp(-h / 2.0))


def uniform_profile(L: int) -> CouplingProfile:
    """Open uniform chain (alpha = 1)."""
    return build_rainbow_profile(L, 1.0)


def signed_profile(couplings) -> np.ndarray:
    """Validate an arbitrary signed coupling list for an even-length chain."""
    c = np.asarray(couplings, dtype=float)
    if c.ndim != 1 or c.size < 1:
        raise ValueError("couplings must be a non-empty 1D sequence")
    if c.size % 2 == 0:
        raise ValueError(
            f"{c.size} links means an odd number of sites; need an even chain"
        )
    if np.any(c == 0.0):
        raise ValueError("zero couplings disconnect the chain")
    return c


def hopping_matrix_1d(profile) -> HoppingMatrix:
    """Tridiagonal hopping matrix with element -J/2 on each link.

    Accepts a CouplingProfile or a plain coupling sequence of odd length.
    """
    if isinstance(profile, CouplingProfile):
        c = profile.couplings
    else:
        c = signed_profile(profile)
    n = c.size + 1
    m = np.zeros((n, n))
    idx = np.arange(n - 1)
    m[idx, idx + 1] = -c / 2.0
    m[idx + 1, idx] = -c / 2.0
    return HoppingMatrix(dim=n, entries=m)


def build_lattice_2d(L: int, alpha: float) -> Lattice2D:
    """2L x 2L lattice with link amplitude alpha**|x_mid|.

    Vertical links inside column x carry alpha**|x|; horizontal links
    between columns x and x+1 carry alpha**|x + 1/2|, so links crossing
    x = 0 carry exactly 1.
    """
    _validate_geometry(L, alpha)
    n = 2 * L
    xs = site_labels(L)
    sites = tuple((float(xs[ix]), float(xs[iy])) for ix in range(n) for iy in range(n))
    h = -2.0 * math.log(alpha)
    links = []
    for ix in range(n):
        for iy in range(n):
            i = ix * n + iy
            if iy + 1 < n:  # vertical link, midpoint x = xs[ix]
                links.append((i, i + 1, math.exp(-h * abs(xs[ix]) / 2.0)))
            if ix + 1 < n:  # horizontal link, midpoint x = xs[ix] + 1/2
                xm = abs((xs[ix] + xs[ix + 1]) / 2.0)
                links.append((i, i + n, math.exp(-h * xm / 2.0)))
    links.sort(key=lambda t: (t[0], t[1]))
    return Lattice2D(L=L, alpha=alpha, sites=sites, links=tuple(links))


def hopping_matrix_2d(lat: Lattice2D) -> HoppingMatrix:
    """Dense hopping matrix of the 2D lattice, element -J/2 per link."""
    n = lat.n_sites
    m = np.zeros((n, n))
    for i, j, J in lat.links:
        m[i, j] = m[j, i] = -J / 2.0
    return HoppingMatrix(dim=n, entries=m)


def hopping_matrix(geometry) -> HoppingMatrix:
    """Dispatch to the 1D or 2D builder based on the geometry type."""
    if isinstance(geometry, CouplingProfile):
        return hopping_matrix_1d(geometry)
    if isinstance(geometry, Lattice2D):
        return hopping_matrix_2d(geometry)
    if isinstance(geometry, HoppingMatrix):
        return geometry
    raise TypeError(f"unsupported geometry {type(geometry).__name__}")
