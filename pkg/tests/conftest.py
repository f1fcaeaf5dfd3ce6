"""Shared helpers: cached diagonalizations keep the suite fast."""

from functools import lru_cache

import numpy as np
import pytest

from rainbow_lab import (
    build_rainbow_profile,
    correlation_matrix,
    diagonalize,
    hopping_matrix_1d,
    occupied_orbitals,
    profile_from_z,
)


@lru_cache(maxsize=None)
def chain_spectrum(L: int, alpha: float = None, z: float = None):
    profile = build_rainbow_profile(L, alpha) if alpha is not None else profile_from_z(L, z)
    return profile, diagonalize(hopping_matrix_1d(profile))


@lru_cache(maxsize=None)
def chain_occupied(L: int, alpha: float = None, z: float = None):
    _, spec = chain_spectrum(L, alpha=alpha, z=z)
    return occupied_orbitals(spec)


def halfchain_C(L: int, alpha: float = None, z: float = None):
    return correlation_matrix(chain_occupied(L, alpha=alpha, z=z), range(L))


@pytest.fixture
def rng():
    return np.random.default_rng(20240311)
