"""Full many-body amplitudes for small chains and their qubism pictures.

A half-filled Slater state on N sites expands over occupation
configurations with determinant amplitudes.  Configurations are encoded
as N-bit strings with site 0 (leftmost site) as the most significant
bit, so bitstring s maps to the integer index int(s, 2).

The qubism image places the 2^N amplitudes on a 2^(N/2) x 2^(N/2) grid:
the bit pair (s_{2i}, s_{2i+1}) picks the quadrant at recursion depth i
(00 top-left, 01 top-right, 10 bottom-left, 11 bottom-right), depth 0
being the coarsest.  Sub-image structure then bounds Schmidt ranks of
leading blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

MAX_SITES = 14


@dataclass(frozen=True)
class AmplitudeTable:
    """Dense amplitude vector of an N-site state at fixed filling.

    amplitudes[int(bits, 2)] is the coefficient of configuration `bits`
    (site 0 = most significant bit).  Unit norm.
    """

    n_sites: int
    filling: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=float)
        if a.shape != (2**self.n_sites,):
            raise ValueError(
                f"expected {2**self.n_sites} amplitudes, got {a.shape}"
            )
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    def amplitude(self, bits: str) -> float:
        if len(bits) != self.n_sites:
            raise ValueError(f"need {self.n_sites} bits, got {len(bits)}")
        return float(self.amplitudes[int(bits, 2)])

    def nonzero_count(self, rel_tol: float = 0.0) -> int:
        mx = np.max(np.abs(self.amplitudes))
        if mx == 0:
            return 0
        return int(np.count_nonzero(np.abs(self.amplitudes) > rel_tol * mx))

    def rows(self):
        """(bitstring, amplitude) pairs for CSV dumps, configuration order."""
        for idx in range(self.amplitudes.size):
            yield format(idx, f"0{self.n_sites}b"), float(self.amplitudes[idx])


@dataclass(frozen=True)
class QubismImage:
    """Signed amplitude per cell of the recursive 2^(N/2) square grid."""

    side: int
    pixels: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.pixels, dtype=float)
        if p.shape != (self.side, self.side):
            raise ValueError(f"expected {self.side}x{self.side} pixels, got {p.shape}")
        p.setflags(write=False)
        object.__setattr__(self, "pixels", p)

    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.pixels))


def slater_amplitudes(occ: np.ndarray, n_sites: int) -> AmplitudeTable:
    """Expand a Slater determinant over occupation configurations.

    The amplitude of the configuration occupying sites i_1 < ... < i_K is
    the determinant of the corresponding rows of the orbital matrix;
    fermionic exchange signs are carried by the determinant with this
    fixed site ordering.
    """
    occ = np.asarray(occ, dtype=float)
    if n_sites > MAX_SITES:
        raise ValueError(
            f"{n_sites} sites needs {2**n_sites} amplitudes; cap is {MAX_SITES}"
        )
    if occ.shape[0] != n_sites:
        raise ValueError(f"orbital matrix has {occ.shape[0]} rows, expected {n_sites}")
    k = occ.shape[1]
    amps = np.zeros(2**n_sites)
    for sites in combinations(range(n_sites), k):
        idx = 0
        for s in sites:
            idx |= 1 << (n_sites - 1 - s)
        amps[idx] = np.linalg.det(occ[list(sites), :])
    norm = np.linalg.norm(amps)
    if not np.isclose(norm, 1.0, atol=1e-8):
        raise ValueError(f"orbitals are not orthonormal (state norm {norm:.6f})")
    return AmplitudeTable(n_sites=n_sites, filling=k, amplitudes=amps / norm)


def render(amps: AmplitudeTable) -> QubismImage:
    """Qubism image of an even-N amplitude table (two bits per scale)."""
    n = amps.n_sites
    if n % 2:
        raise ValueError(f"qubism rendering needs even N, got {n}")
    side = 2 ** (n // 2)
    pixels = np.zeros((side, side))
    for idx in range(amps.amplitudes.size):
        a = amps.amplitudes[idx]
        if a == 0.0:
            continue
        row = col = 0
        for level in range(n // 2):
            b1 = (idx >> (n - 1 - 2 * level)) & 1
            b2 = (idx >> (n - 2 - 2 * level)) & 1
            row = (row << 1) | b1
            col = (col << 1) | b2
        pixels[row, col] = a
    return QubismImage(side=side, pixels=pixels)


def schmidt_rank(amps: AmplitudeTable, block_size: int, rel_tol: float = 1e-10) -> int:
    """Schmidt rank of the first `block_size` sites vs the rest."""
    n = amps.n_sites
    if not 0 < block_size < n:
        raise ValueError(f"block size must be in (0, {n}), got {block_size}")
    mat = amps.amplitudes.reshape(2**block_size, 2 ** (n - block_size))
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > rel_tol * sv[0]))


def write_ppm(img: QubismImage, path) -> None:
    """Binary 8-bit PPM: red = positive amplitudes, green = negative.

    Channel value is round(255 |a| / max|a|); header is exactly
    "P6\\n<side> <side>\\n255\\n" so identical images are byte-identical.
    """
    mx = float(np.max(np.abs(img.pixels)))
    rgb = np.zeros((img.side, img.side, 3), dtype=np.uint8)
    if mx > 0:
        scaled = np.rint(255.0 * np.abs(img.pixels) / mx).astype(np.uint8)
        rgb[..., 0] = np.where(img.pixels > 0, scaled, 0)
        rgb[..., 1] = np.where(img.pixels < 0, scaled, 0)
    try:
        with open(path, "wb") as fh:
            fh.write(f"P6\n{img.side} {img.side}\n255\n".encode("ascii"))
            fh.write(rgb.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write PPM to {path}: {exc}") from exc
