"""Random reservoir construction: weight sampling, spectral normalization, start vector."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import _readonly


@dataclass(frozen=True)
class ReservoirInit:
    """Fixed (untrained) part of a network: input weights, reservoir weights, start state.

    ``init_reservoir`` produces instances whose reservoir matrix has spectral
    radius 1 and whose start vector has unit norm; hand-built instances may
    violate that deliberately.
    """

    w_in: np.ndarray
    w_res: np.ndarray
    r0: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        w_in = np.atleast_2d(np.asarray(self.w_in, dtype=float))
        w_res = np.atleast_2d(np.asarray(self.w_res, dtype=float))
        r0 = np.asarray(self.r0, dtype=float).reshape(-1)
        if w_res.shape[0] != w_res.shape[1]:
            raise ValueError(f"reservoir matrix must be square, got {w_res.shape}")
        if w_in.shape[0] != w_res.shape[0]:
            raise ValueError(f"w_in has {w_in.shape[0]} rows but the reservoir has {w_res.shape[0]} neurons")
        if r0.shape[0] != w_res.shape[0]:
            raise ValueError(f"r0 length {r0.shape[0]} does not match reservoir size {w_res.shape[0]}")
        for name, arr in (("w_in", w_in), ("w_res", w_res), ("r0", r0)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
        object.__setattr__(self, "w_in", _readonly(w_in))
        object.__setattr__(self, "w_res", _readonly(w_res))
        object.__setattr__(self, "r0", _readonly(r0))

    @property
    def d(self) -> int:
        return self.w_in.shape[1]

    @property
    def n_res(self) -> int:
        return self.w_res.shape[0]


def spectral_radius(m: np.ndarray) -> float:
    """Largest absolute value over all (possibly complex) eigenvalues."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.size == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite values")
    try:
        eigs = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigenvalue computation failed on {m.shape} matrix: {exc}") from exc
    return float(np.max(np.abs(eigs)))


def init_reservoir(d: int, n_res: int, seed: int | None = None) -> ReservoirInit:
    """Sample a fresh reservoir, deterministically for a given seed.

    All weights are drawn i.i.d. standard normal (fully connected, no
    structural zeros), then the reservoir matrix is rescaled to spectral
    radius 1. The reservoir start vector is the constant unit-norm vector
    (1/sqrt(n_res), ..., 1/sqrt(n_res)).

    The draw order is fixed: w_in first, then w_res, both row-major from a
    single PCG64 stream, so the same seed reproduces bit-identical weights
    across platforms. In the probability-zero event of a nilpotent sample
    the seed is incremented and the draw repeated.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if n_res < 1:
        raise ValueError(f"n_res must be >= 1, got {n_res}")
    attempt = seed
    while True:
        rng = np.random.default_rng(attempt)
        w_in = rng.standard_normal((n_res, d))
        w_res = rng.standard_normal((n_res, n_res))
        rho = spectral_radius(w_res)
        if rho > 0.0:
            break
        attempt = (attempt or 0) + 1
    w_res /= rho
    r0 = np.full(n_res, 1.0 / np.sqrt(n_res))
    return ReservoirInit(w_in=w_in, w_res=w_res, r0=r0, seed=seed)
