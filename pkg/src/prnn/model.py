"""Core value types: time series, linear recurrent networks, and their simulation.

A network is a single square transition matrix acting on a joint state vector
whose first ``d`` entries are the input/output neurons and whose remaining
entries are the reservoir. All types are immutable after construction (the
wrapped arrays are marked read-only), so they can be shared freely between
threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TimeSeries:
    """A d-dimensional series sampled on the uniform grid t = 0, tau, 2*tau, ...

    ``data`` holds one row per dimension and one column per time point, so
    column k is the sample at time k*tau.
    """

    data: np.ndarray
    tau: float = 1.0

    def __post_init__(self):
        data = np.atleast_2d(np.asarray(self.data, dtype=float))
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError(f"series data must be a d x (n+1) matrix, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("series data contains non-finite values")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        object.__setattr__(self, "data", _readonly(data))
        object.__setattr__(self, "tau", float(self.tau))

    @property
    def d(self) -> int:
        return self.data.shape[0]

    @property
    def n_points(self) -> int:
        return self.data.shape[1]

    def times(self) -> np.ndarray:
        return self.tau * np.arange(self.n_points)


@dataclass(frozen=True)
class PrnnModel:
    """Linear recurrent network with a joint input/output block.

    ``w`` is the full N x N transition matrix laid out as::

        [ W_out          ]   first d rows: learned output weights
        [ W_in    W_res  ]   remaining rows: input and reservoir weights

    ``x0`` is the network state at t = 0. Running the network in
    output-generating mode means iterating ``state <- w @ state``; the first
    d entries of the state trace out the modelled series.
    """

    w: np.ndarray
    x0: np.ndarray
    d: int
    tau: float = 1.0

    def __post_init__(self):
        w = np.atleast_2d(np.asarray(self.w, dtype=float))
        x0 = np.asarray(self.x0, dtype=float).reshape(-1)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"transition matrix must be square, got shape {w.shape}")
        if x0.shape[0] != w.shape[0]:
            raise ValueError(f"start vector length {x0.shape[0]} does not match matrix size {w.shape[0]}")
        if not (1 <= self.d <= w.shape[0]):
            raise ValueError(f"d={self.d} out of range for a {w.shape[0]}-neuron network")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(x0))):
            raise ValueError("model contains non-finite values")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        object.__setattr__(self, "w", _readonly(w))
        object.__setattr__(self, "x0", _readonly(x0))
        object.__setattr__(self, "tau", float(self.tau))

    @property
    def n(self) -> int:
        """Total neuron count N."""
        return self.w.shape[0]

    @property
    def n_res(self) -> int:
        return self.n - self.d

    @property
    def w_out(self) -> np.ndarray:
        return self.w[: self.d]

    @property
    def w_in(self) -> np.ndarray:
        return self.w[self.d :, : self.d]

    @property
    def w_res(self) -> np.ndarray:
        return self.w[self.d :, self.d :]


@dataclass(frozen=True)
class StateSequence:
    """Stacked [S(t); R(t)] columns collected while driving a reservoir."""

    states: np.ndarray
    d: int

    def __post_init__(self):
        states = np.atleast_2d(np.asarray(self.states, dtype=float))
        if states.ndim != 2 or states.shape[1] < 1:
            raise ValueError(f"state sequence must be a matrix, got shape {states.shape}")
        if not np.all(np.isfinite(states)):
            raise ValueError("state sequence contains non-finite values")
        if not (1 <= self.d < states.shape[0]):
            raise ValueError(f"d={self.d} out of range for {states.shape[0]} state rows")
        object.__setattr__(self, "states", _readonly(states))

    @property
    def n_points(self) -> int:
        return self.states.shape[1]

    def inputs(self) -> np.ndarray:
        return self.states[: self.d]

    def reservoir(self) -> np.ndarray:
        return self.states[self.d :]


def step(model: PrnnModel, state: np.ndarray) -> np.ndarray:
    """One simultaneous update of all neurons (output-generating mode)."""
    state = np.asarray(state, dtype=float).reshape(-1)
    if state.shape[0] != model.n:
        raise ValueError(f"state length {state.shape[0]} does not match network size {model.n}")
    return model.w @ state


def trajectory(model: PrnnModel, steps: int) -> TimeSeries:
    """Run the network freely from x0 and return the first d state rows.

    Computed by iterated application of the transition matrix, one step at a
    time; the result has one column per time point, t = 0 first.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    out = np.empty((model.d, steps))
    state = np.array(model.x0)
    for k in range(steps):
        out[:, k] = state[: model.d]
        if k + 1 < steps:
            state = model.w @ state
    return TimeSeries(out, tau=model.tau)


def nrmse(reference, predicted) -> float:
    """Root mean square error averaged over all d*(n+1) sample components.

    Accepts TimeSeries or plain arrays of identical shape. Zero iff the
    arguments are equal; symmetric in its arguments.
    """
    a = reference.data if isinstance(reference, TimeSeries) else np.asarray(reference, dtype=float)
    b = predicted.data if isinstance(predicted, TimeSeries) else np.asarray(predicted, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.mean((a - b) ** 2)))
