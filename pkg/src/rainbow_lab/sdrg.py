"""Strong-disorder renormalization of signed hopping chains.

Each step decimates the link with the largest |J| into a two-site Bell
orbital and couples its neighbours with the effective hopping
J~ = -J_L J_R / J_max (signed values; the minus sign is the fermionic
exchange contribution of the decimated pair).  Positive hopping makes
the symmetric combination (e_i + e_j)/sqrt(2) the bound orbital under
the -J/2 matrix convention, negative hopping the antisymmetric one.

Sites are 0-based internally; for a 2L-site chain index i corresponds to
the half-odd label i - L + 1/2 (exported in JSON).  Couplings are
tracked as (log|J|, sign) so deep rainbows never underflow.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .lattice import CouplingProfile, signed_profile

TIE_TOL = 1e-12


class TieError(RuntimeError):
    """The maximal |J| is degenerate, so the decimation order is undefined."""


class Bond(NamedTuple):
    """Bell-pair orbital on two sites: sign +1 bonding, -1 anti-bonding."""

    left: int
    right: int
    sign: int


class DecimationStep(NamedTuple):
    """One RG step: which link was decimated and what coupling it created.

    `coupling` is the signed effective value (may underflow to 0.0 for
    deep chains); `log_magnitude` keeps ln|J~| exactly.  Both are None
    for boundary decimations, which create no new link.
    """

    step: int
    link: tuple
    sign: int
    created: tuple | None
    coupling: float | None
    log_magnitude: float | None


@dataclass(frozen=True)
class BondList:
    """Perfect matching of the chain sites plus the decimation trace."""

    n_sites: int
    bonds: tuple
    trace: tuple = ()

    def __post_init__(self):
        seen = [s for b in self.bonds for s in (b.left, b.right)]
        if sorted(seen) != list(range(self.n_sites)):
            raise ValueError("bonds do not form a perfect matching of the sites")

    def labels(self) -> np.ndarray:
        return np.arange(self.n_sites) - self.n_sites / 2 + 0.5

    def to_json(self) -> str:
        lab = self.labels()
        return json.dumps(
            {
                "n_sites": self.n_sites,
                "site_labels": list(lab),
                "bonds": [[b.left, b.right, b.sign] for b in self.bonds],
                "trace": [
                    {
                        "step": t.step,
                        "link": list(t.link),
                        "sign": t.sign,
                        "created": None if t.created is None else list(t.created),
                        "coupling": t.coupling,
                        "log_magnitude": t.log_magnitude,
                    }
                    for t in self.trace
                ],
            }
        )


def sdrg_run(couplings) -> BondList:
    """Decimate a signed chain down to a bond matching.

    Accepts a CouplingProfile or any odd-length signed coupling sequence.
    Raises TieError when two links tie for the maximal |J| within a
    relative 1e-12 (the RG step is ill-defined, e.g. uniform chains).
    """
    if isinstance(couplings, CouplingProfile):
        c = couplings.couplings
    else:
        c = signed_profile(couplings)
    n = c.size + 1

    # Active chain as parallel lists; couplings as (log|J|, sign).
    sites = list(range(n))
    logs = [math.log(abs(j)) for j in c]
    signs = [1 if j > 0 else -1 for j in c]

    bonds = []
    trace = []
    step = 0
    while logs:
        step += 1
        k = max(range(len(logs)), key=logs.__getitem__)
        ties = [
            (sites[i], sites[i + 1])
            for i in range(len(logs))
            if i != k and logs[k] - logs[i] <= TIE_TOL
        ]
        if ties:
            raise TieError(
                f"step {step}: links {(sites[k], sites[k + 1])} and {ties} tie "
                "for the maximal |J|; decimation order undefined"
            )
        i, j = sites[k], sites[k + 1]
        sgn = signs[k]
        bonds.append(Bond(i, j, sgn))

        interior = 0 < k < len(logs) - 1
        if interior:
            new_log = logs[k - 1] + logs[k + 1] - logs[k]
            new_sign = -signs[k - 1] * signs[k + 1] * signs[k]
            created = (sites[k - 1], sites[k + 2])
            trace.append(
                DecimationStep(
                    step=step,
                    link=(i, j),
                    sign=sgn,
                    created=created,
                    coupling=new_sign * math.exp(new_log) if new_log > -745 else
                    new_sign * 0.0,
                    log_magnitude=new_log,
                )
            )
            logs[k - 1: k + 2] = [new_log]
            signs[k - 1: k + 2] = [new_sign]
        else:
            trace.append(
                DecimationStep(
                    step=step, link=(i, j), sign=sgn,
                    created=None, coupling=None, log_magnitude=None,
                )
            )
            if k == 0:
                del logs[: 2 if len(logs) > 1 else 1]
                del signs[: 2 if len(signs) > 1 else 1]
            else:
                del logs[k - 1:]
                del signs[k - 1:]
        del sites[k: k + 2]
    if sites:
        raise ValueError("decimation left unpaired sites; odd chain?")
    return BondList(n_sites=n, bonds=tuple(bonds), trace=tuple(trace))


def rainbow_bonds(L: int) -> BondList:
    """The concentric matching: bond k joins -(k-1/2) with +(k-1/2) and the
    signs alternate (+, -, +, ...) from the inside out."""
    if L < 1:
        raise ValueError(f"L must be positive, got {L}")
    bonds = tuple(
        Bond(L - k, L - 1 + k, 1 if k % 2 == 1 else -1) for k in range(1, L + 1)
    )
    return BondList(n_sites=2 * L, bonds=bonds)


def bond_state_orbitals(bonds: BondList, dim: int | None = None) -> np.ndarray:
    """One orbital per bond: (e_i + sign * e_j)/sqrt(2), orthonormal columns."""
    dim = bonds.n_sites if dim is None else dim
    if dim < bonds.n_sites:
        raise ValueError(f"dim {dim} smaller than the matched {bonds.n_sites} sites")
    occ = np.zeros((dim, len(bonds.bonds)))
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for col, b in enumerate(bonds.bonds):
        occ[b.left, col] = inv_sqrt2
        occ[b.right, col] = b.sign * inv_sqrt2
    return occ


def sdrg_entropy(bonds: BondList, block) -> float:
    """ln 2 per bond crossing the block boundary (bond states are Bell pairs)."""
    inside = set(int(b) for b in block)
    crossing = sum(1 for b in bonds.bonds if (b.left in inside) != (b.right in inside))
    return crossing * math.log(2.0)


def perturbative_orbitals(L: int, alpha: float):
    """First-order orbitals of the rainbow chain in the strong limit.

    Orbital k is the Bell pair on sites +-(k-1/2) with alpha tails on the
    adjacent sites and the sign alternation of the bond pattern:

        psi^1 ~ (..., alpha, 1, 1, alpha, ...)
        psi^2 ~ (alpha, 1, alpha, -alpha, -1, -alpha)
        psi^3 ~ (alpha, 1, alpha, 0, 0, alpha, 1, alpha)

    Returns (orbitals, residuals): unit columns k = 1..L and the norms
    |H psi - (psi^T H psi) psi| against the exact hopping matrix, which
    scale as O(alpha^2).
    """
    from .lattice import build_rainbow_profile, hopping_matrix_1d

    profile = build_rainbow_profile(L, alpha)
    H = hopping_matrix_1d(profile).entries
    n = 2 * L
    cols = []
    for k in range(1, L + 1):
        v = np.zeros(n)
        s = 1.0 if k % 2 == 1 else -1.0
        v[L - k] = 1.0
        v[L - 1 + k] = s
        if k < L:  # outer tails at -(k+1/2), +(k+1/2)
            v[L - k - 1] = alpha
            v[L + k] = s * alpha
        if k >= 2:  # inner tails at -(k-3/2), +(k-3/2)
            v[L - k + 1] = alpha
            v[L + k - 2] = s * alpha
        cols.append(v / np.linalg.norm(v))
    orbs = np.column_stack(cols)
    residuals = np.empty(L)
    for col in range(L):
        v = orbs[:, col]
        e = v @ H @ v
        residuals[col] = np.linalg.norm(H @ v - e * v)
    return orbs, residuals


def render_arcs(bonds: BondList) -> str:
    """ASCII arc diagram of a bond matching, widest bond on top.

    Arcs are filled with the bond sign, '+' for bonding and '-' for
    anti-bonding, and end on '.' above the paired site labels.
    """
    labels = [f"{x:g}" for x in bonds.labels()]
    cell = max(len(s) for s in labels) + 1
    pos = [i * cell + cell // 2 for i in range(bonds.n_sites)]
    lines = []
    for b in sorted(bonds.bonds, key=lambda b: b.left - b.right):
        row = [" "] * (bonds.n_sites * cell)
        lo, hi = pos[b.left], pos[b.right]
        fill = "+" if b.sign > 0 else "-"
        for x in range(lo + 1, hi):
            row[x] = fill
        row[lo] = row[hi] = "."
        lines.append("".join(row).rstrip())
    lines.append("".join(s.center(cell) for s in labels).rstrip())
    return "\n".join(lines)
