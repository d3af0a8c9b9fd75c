"""Learning transition weights from a time series by solving linear systems.

Two paths:

* readout learning: drive the fixed random reservoir with the series and
  regress the next input value on the current joint state; only the output
  rows of the transition matrix are learned.
* full-transition learning: pair the series with a *random* reservoir state
  sequence and solve for the complete transition matrix row-wise. With
  enough reservoir neurons (see ``required_reservoir_size``) the resulting
  network runs exactly through every given sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import PrnnModel, StateSequence, TimeSeries, _readonly
from .reservoir import ReservoirInit


@dataclass(frozen=True)
class RegressionProblem:
    """Coefficient matrix x and target matrix y of ``m @ x = y``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        y = np.atleast_2d(np.asarray(self.y, dtype=float))
        if x.size == 0:
            raise ValueError("coefficient matrix is empty")
        if x.shape[1] != y.shape[1]:
            raise ValueError(f"column counts differ: x has {x.shape[1]}, y has {y.shape[1]}")
        object.__setattr__(self, "x", _readonly(x))
        object.__setattr__(self, "y", _readonly(y))


@dataclass(frozen=True)
class LinearSolution:
    matrix: np.ndarray
    rank: int


def solve_linear(problem: RegressionProblem, ridge: float = 0.0) -> LinearSolution:
    """Least-squares solution of ``m @ x = y``, minimizing the Frobenius norm.

    Rank-deficient systems yield the minimum-norm solution; the effective
    rank of the coefficient matrix is reported alongside. ``ridge`` > 0
    adds Tikhonov damping on the entries of m (off by default).
    """
    x, y = problem.x, problem.y
    if ridge > 0.0:
        k = x.shape[0]
        x = np.hstack([x, np.sqrt(ridge) * np.eye(k)])
        y = np.hstack([y, np.zeros((y.shape[0], k))])
    sol, _, rank, _ = np.linalg.lstsq(x.T, y.T, rcond=None)
    return LinearSolution(matrix=sol.T, rank=int(rank))


def drive_reservoir(series: TimeSeries, init: ReservoirInit) -> StateSequence:
    """Run the series through the reservoir in input-receiving mode.

    The input rows of every state are overwritten by the series; the
    reservoir evolves as R(t+tau) = w_in @ S(t) + w_res @ R(t) from
    R(0) = r0. Returns the stacked [S(t); R(t)] for t = 0..n.
    """
    if series.n_points < 2:
        raise ValueError("need at least two time points to drive a reservoir")
    if init.d != series.d:
        raise ValueError(f"series has d={series.d} but the reservoir was built for d={init.d}")
    n_pts = series.n_points
    states = np.empty((series.d + init.n_res, n_pts))
    r = np.array(init.r0)
    for k in range(n_pts):
        states[: series.d, k] = series.data[:, k]
        states[series.d :, k] = r
        if k + 1 < n_pts:
            r = init.w_in @ series.data[:, k] + init.w_res @ r
    return StateSequence(states=states, d=series.d)


def learn_output_weights(series: TimeSeries, init: ReservoirInit, ridge: float = 0.0) -> PrnnModel:
    """Learn the output rows of the transition matrix by linear regression.

    Regresses S(t+tau) on the driven state [S(t); R(t)] over the training
    horizon; the first sample has no predecessor and is left out of the
    targets. The fixed w_in/w_res blocks are copied into the assembled
    matrix unchanged, and the start vector is [S(0); r0].
    """
    seq = drive_reservoir(series, init)
    x = seq.states[:, :-1]
    y_out = series.data[:, 1:]
    sol = solve_linear(RegressionProblem(x, y_out), ridge=ridge)
    n = series.d + init.n_res
    w = np.empty((n, n))
    w[: series.d] = sol.matrix
    w[series.d :, : series.d] = init.w_in
    w[series.d :, series.d :] = init.w_res
    x0 = np.concatenate([series.data[:, 0], init.r0])
    return PrnnModel(w=w, x0=x0, d=series.d, tau=series.tau)


def required_reservoir_size(series: TimeSeries) -> int:
    """Smallest reservoir guaranteeing an exact full-transition fit: n - rank[S(0)..S(n-1)]."""
    if series.n_points < 2:
        raise ValueError("need at least two time points")
    n = series.n_points - 1
    d_prime = int(np.linalg.matrix_rank(series.data[:, :n]))
    return n - d_prime


def learn_full_transition(
    series: TimeSeries, n_res: int, seed: int | None = None, ridge: float = 0.0
) -> PrnnModel:
    """Learn the complete transition matrix against a random reservoir sequence.

    A standard-normal reservoir state sequence R(0)..R(n) is stacked under
    the series; the matrix is then the row-wise least-squares solution of
    mapping each stacked state to its successor. When
    n_res >= required_reservoir_size(series) the system is consistent and
    the learned network replays every sample exactly (up to round-off);
    smaller reservoirs give a best-effort fit.
    """
    if series.n_points < 2:
        raise ValueError("need at least two time points")
    if n_res < 1:
        raise ValueError(f"n_res must be >= 1, got {n_res}")
    rng = np.random.default_rng(seed)
    r_seq = rng.standard_normal((n_res, series.n_points))
    full = np.vstack([series.data, r_seq])
    sol = solve_linear(RegressionProblem(full[:, :-1], full[:, 1:]), ridge=ridge)
    return PrnnModel(w=sol.matrix, x0=full[:, 0], d=series.d, tau=series.tau)
