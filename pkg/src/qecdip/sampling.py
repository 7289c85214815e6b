"""Seeded random objects supported inside a given subspace."""

from __future__ import annotations

import numpy as np

from .linalg import Subspace, random_unitary


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_vector_in(s: Subspace, rng: np.random.Generator) -> np.ndarray:
    """Unit vector uniformly distributed on the sphere of ``s``."""
    c = complex_gaussian(rng, s.dim)
    c /= np.linalg.norm(c)
    return s.frame @ c


def random_state_in(s: Subspace, rng: np.random.Generator) -> np.ndarray:
    """Density matrix supported in ``s``.

    A Haar-random orthonormal frame of ``s`` mixed with Dirichlet weights, so
    both pure-ish and fully mixed states show up.
    """
    k = s.dim
    w = random_unitary(k, rng)
    frame = s.frame @ w
    p = rng.dirichlet(np.full(k, 0.5))
    return (frame * p) @ frame.conj().T


def random_subspace_of(s: Subspace, rng: np.random.Generator, dim: int | None = None) -> Subspace:
    """Random nonzero subspace ``F <= s`` (of random dimension unless given)."""
    k = s.dim
    if dim is None:
        dim = int(rng.integers(1, k + 1))
    w = random_unitary(k, rng)[:, :dim]
    return Subspace(s.ambient, s.frame @ w)
