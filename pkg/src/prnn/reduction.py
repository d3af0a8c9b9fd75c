"""Network size reduction: drop Jordan components that barely affect replay.

The output map is the rebased one carried by the Jordan form: it decomposes
the network's own replay exactly into per-block contributions (it is the
solution of the consistent least-squares system mapping the block sequences
J**t @ y onto the replayed output rows). A greedy loop then removes whole
blocks, always the one whose removal keeps the replay error smallest, until
the error budget derived from the precision threshold theta would be
exceeded. The retained blocks re-pack into a sparse minimal network
A' (J')**t y'.

Refitting the output map against the raw series over all blocks is
deliberately avoided: the block sequences of a few hundred eigenmodes are
numerically collinear, and an unconstrained fit buys a marginally smaller
training residual with enormous mutually-cancelling coefficients that make
the per-block errors meaningless. The optional ``refit`` re-solves the map
against the series on the retained blocks only, where the regression is
well conditioned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .model import TimeSeries, _readonly, nrmse
from .spectral import JordanForm, RealJordanBlock


@dataclass(frozen=True)
class ComponentError:
    """Replay impact of one Jordan block."""

    block: int
    error: float
    norm_v: float
    modulus: float


@dataclass(frozen=True)
class ReducedModel:
    """Pruned (a, j, y) triple replaying a series as a @ j**t @ y.

    ``j`` keeps the banded real Jordan layout, so its non-zero count is
    linear in the width. ``block_index`` maps each retained block back to
    its position in the unreduced form.
    """

    a: np.ndarray
    j: np.ndarray
    y: np.ndarray
    tau: float
    blocks: tuple[RealJordanBlock, ...]
    block_index: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", _readonly(self.a))
        object.__setattr__(self, "j", _readonly(self.j))
        object.__setattr__(self, "y", _readonly(self.y))
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "block_index", tuple(self.block_index))
        width = sum(b.width for b in self.blocks)
        if self.j.shape != (width, width) or self.a.shape[1] != width or self.y.shape[0] != width:
            raise ValueError("matrix shapes do not match the retained block widths")
        if len(self.block_index) != len(self.blocks):
            raise ValueError("block_index must assign one origin per retained block")

    @property
    def width(self) -> int:
        return self.j.shape[0]

    @property
    def d(self) -> int:
        return self.a.shape[0]


def _block_sequences(blocks, y: np.ndarray, n_cols: int) -> list[np.ndarray]:
    """Per-block state sequences [J_i**t @ y_i] for t = 0..n_cols-1, iterated."""
    out = []
    at = 0
    for block in blocks:
        width = block.width
        j_mat = block.matrix()
        seq = np.empty((width, n_cols))
        u = np.array(y[at : at + width], dtype=float)
        for t in range(n_cols):
            seq[:, t] = u
            if t + 1 < n_cols:
                u = j_mat @ u
        out.append(seq)
        at += width
    return out


def _contributions(form: JordanForm, n_points: int) -> list[np.ndarray]:
    """Per-block output contributions a_i @ J_i**t @ y_i over the horizon."""
    seqs = _block_sequences(form.blocks, form.y, n_points)
    return [form.a[:, sl] @ seq for sl, seq in zip(form.block_slices(), seqs)]


def component_errors(
    form: JordanForm, series: TimeSeries, mode: str = "loo"
) -> list[ComponentError]:
    """Per-block replay errors of the form fitted to the series.

    mode "loo" (default): error of the replay with the block removed.
    mode "contribution": magnitude of the block's own contribution, under
    the same normalization.
    """
    if form.a.shape[0] != series.d:
        raise ValueError(f"form has {form.a.shape[0]} output rows but the series has d={series.d}")
    if mode not in ("loo", "contribution"):
        raise ValueError(f"unknown error mode {mode!r}")
    contributions = _contributions(form, series.n_points)
    replay = sum(contributions)
    slices = form.block_slices()
    out = []
    for i, block in enumerate(form.blocks):
        if mode == "loo":
            err = nrmse(series.data, replay - contributions[i])
        else:
            err = nrmse(np.zeros_like(series.data), contributions[i])
        sl = slices[i]
        out.append(
            ComponentError(
                block=i,
                error=float(err),
                norm_v=float(np.linalg.norm(form.a[:, sl])),
                modulus=block.modulus,
            )
        )
    return out


def reduce_model(
    form: JordanForm,
    series: TimeSeries,
    theta: float,
    rule: str = "greedy",
    refit: bool = False,
) -> ReducedModel:
    """Greedily drop blocks while replay stays within the theta error budget.

    The budget is the baseline replay error plus (1 - theta) times the sum
    of all single-block removal errors, so theta = 1 permits only removals
    that do not hurt the replay at all. Blocks are dropped whole (a
    conjugate pair counts as one unit), dominant blocks are kept in order,
    and the rebased output map is reused for the survivors unless ``refit``
    re-solves it against the series. The alternative rule "batch" drops
    the smallest-error blocks while their cumulated single errors stay
    below (1 - theta) times the total, without re-evaluating the replay.
    """
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"theta must be in (0, 1], got {theta}")
    if rule not in ("greedy", "batch"):
        raise ValueError(f"unknown stopping rule {rule!r}")
    if form.a.shape[0] != series.d:
        raise ValueError(f"form has {form.a.shape[0]} output rows but the series has d={series.d}")

    contributions = _contributions(form, series.n_points)
    replay = sum(contributions)
    if not np.all(np.isfinite(replay)):
        raise ValueError("replay of the decomposed network is non-finite over the series horizon")
    base_err = nrmse(series.data, replay)
    single = np.array([nrmse(series.data, replay - c) for c in contributions])
    n_blocks = len(form.blocks)

    if rule == "greedy":
        budget = base_err + (1.0 - theta) * float(np.sum(single))
        alive = set(range(n_blocks))
        out = replay.copy()
        while True:
            best, best_err = None, np.inf
            for i in alive:
                err = nrmse(series.data, out - contributions[i])
                if err < best_err:
                    best, best_err = i, err
            if best is None or best_err > budget:
                break
            if len(alive) == 1:
                raise ValueError(
                    "reduction would remove every component; "
                    "lower theta keeps at least one block"
                )
            alive.remove(best)
            out = out - contributions[best]
        keep = sorted(alive)
    else:
        allowance = (1.0 - theta) * float(np.sum(single))
        order = np.argsort(single, kind="stable")
        dropped, used = set(), 0.0
        for i in order:
            if used + single[i] >= allowance or len(dropped) == n_blocks - 1:
                break
            dropped.add(int(i))
            used += single[i]
        keep = [i for i in range(n_blocks) if i not in dropped]

    blocks = tuple(form.blocks[i] for i in keep)
    slices = form.block_slices()
    if refit:
        seqs = _block_sequences(blocks, np.ones(sum(b.width for b in blocks)), series.n_points)
        stacked = np.vstack(seqs)
        a_new, _, _, _ = np.linalg.lstsq(stacked.T, series.data.T, rcond=None)
        a_new = a_new.T
    else:
        a_new = np.hstack([form.a[:, slices[i]] for i in keep])
    j_new = scipy.linalg.block_diag(*[b.matrix() for b in blocks])
    y_new = np.ones(j_new.shape[0])
    return ReducedModel(
        a=a_new,
        j=j_new,
        y=y_new,
        tau=series.tau,
        blocks=blocks,
        block_index=tuple(keep),
    )


def reduced_trajectory(model: ReducedModel, steps: int) -> TimeSeries:
    """Replay a @ j**t @ y for t = 0..steps-1 by iterated multiplication."""
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    out = np.empty((model.d, steps))
    u = np.array(model.y)
    for t in range(steps):
        out[:, t] = model.a @ u
        if t + 1 < steps:
            u = model.j @ u
    return TimeSeries(out, tau=model.tau)
