"""Benchmark generators and seeded multi-trial experiment protocols.

Presets
-------
mso8
    Sum of eight fixed-frequency sinusoids; readout learning with as many
    training samples as reservoir neurons, then reduction at theta = 0.99.
    The minimal network has 16 neurons, two per frequency.
parabola / sinusoid
    4t(1-t) and sin(pi t) sampled on [0, 1] with tau = 0.01; the two look
    alike but reduce to different minimal sizes (3 vs 2 neurons).
puzzles
    Integer number series; a small reservoir predicts the 8th element from
    the first seven, optionally with the previous value added as a clue
    dimension. No reduction (the series are too short for it).
trajectory
    Synthetic smooth multi-dimensional trajectories (sinusoid mixtures)
    replayed from a 200-neuron readout fit and reduced at theta = 0.999.
"""

from __future__ import annotations

import os
import statistics
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .learning import drive_reservoir, learn_output_weights
from .model import TimeSeries, nrmse, step, trajectory
from .reduction import ReducedModel, reduce_model, reduced_trajectory
from .reservoir import init_reservoir
from .spectral import real_jordan

MSO_FREQUENCIES = (0.2, 0.311, 0.42, 0.51, 0.63, 0.74, 0.85, 0.97)


class CsvFormatError(ValueError):
    """Raised on malformed trajectory CSV input, with the offending line number."""


def mso(n: int, steps: int) -> TimeSeries:
    """Multiple superimposed oscillators: sum of the first n benchmark sinusoids.

    Sampled at t = 1..steps (the signal starts at t = 1, not 0), tau = 1.
    """
    if not 1 <= n <= 8:
        raise ValueError(f"n must be between 1 and 8, got {n}")
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    t = np.arange(1, steps + 1, dtype=float)
    data = np.zeros((1, steps))
    for alpha in MSO_FREQUENCIES[:n]:
        data[0] += np.sin(alpha * t)
    return TimeSeries(data, tau=1.0)


_NAMED_FUNCTIONS = {
    "parabola4t": lambda t: 4.0 * t * (1.0 - t),
    "sinusoid_pi": lambda t: np.sin(np.pi * t),
    "square_t": lambda t: t * t,
}


def sample_function(kind: str, tau: float = 0.01, points: int = 101, expr: str | None = None) -> TimeSeries:
    """Sample a named scalar function on the grid t = 0, tau, ..., (points-1)*tau.

    ``kind`` is one of parabola4t, sinusoid_pi, square_t, or "expr" with a
    numpy expression in t (e.g. "sin(0.5*t) + t**2").
    """
    if points < 2:
        raise ValueError(f"points must be >= 2, got {points}")
    t = tau * np.arange(points)
    if kind == "expr":
        if not expr:
            raise ValueError("kind 'expr' requires an expression")
        namespace = {name: getattr(np, name) for name in dir(np) if not name.startswith("_")}
        namespace["t"] = t
        values = np.broadcast_to(np.asarray(eval(expr, {"__builtins__": {}}, namespace), dtype=float), t.shape)
    elif kind in _NAMED_FUNCTIONS:
        values = _NAMED_FUNCTIONS[kind](t)
    else:
        raise ValueError(f"unknown function kind {kind!r}")
    return TimeSeries(values.reshape(1, -1), tau=tau)


def synthetic_trajectory(
    d: int = 4, points: int = 600, n_components: int = 10, seed: int | None = None
) -> TimeSeries:
    """Smooth d-dimensional trajectory: each dimension a sum of n_components sinusoids.

    Every dimension draws its own frequencies, so the channels carry
    genuinely independent spectra, as recorded trajectories do. (Reusing
    one frequency set across all channels makes the joint signal exactly
    low-rank, which reliably destabilizes the learned feedback.)
    """
    rng = np.random.default_rng(seed)
    t = np.arange(points, dtype=float)
    data = np.zeros((d, points))
    for k in range(d):
        freqs = rng.uniform(0.02, 0.5, n_components)
        amps = rng.normal(0.0, 1.0, n_components)
        phases = rng.uniform(0.0, 2.0 * np.pi, n_components)
        for j in range(n_components):
            data[k] += amps[j] * np.sin(freqs[j] * t + phases[j])
    return TimeSeries(data, tau=1.0)


def load_trajectory_csv(path, tau: float = 1.0) -> TimeSeries:
    """Read a comma-separated trajectory: one time point per line, d numeric fields.

    A single header line is skipped when its first token is not numeric.
    Ragged rows and non-numeric cells raise CsvFormatError with the line
    number.
    """
    rows = []
    width = None
    may_be_header = True  # only the very first content line may be a header
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            fields = [f.strip() for f in line.split(",")]
            if may_be_header:
                may_be_header = False
                try:
                    float(fields[0])
                except ValueError:
                    continue  # header line
            try:
                values = [float(f) for f in fields]
            except ValueError as exc:
                raise CsvFormatError(f"{path}: line {lineno}: non-numeric field ({exc})") from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise CsvFormatError(
                    f"{path}: line {lineno}: expected {width} fields, found {len(values)}"
                )
            rows.append(values)
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    return TimeSeries(np.array(rows).T, tau=tau)


def subsample(series: TimeSeries, stride: int) -> TimeSeries:
    """Keep every stride-th time point; the time step scales accordingly."""
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    return TimeSeries(series.data[:, ::stride], tau=series.tau * stride)


# ---------------------------------------------------------------------------
# number puzzles


@dataclass(frozen=True)
class PuzzleSeries:
    """An integer series whose last element is to be predicted from the rest."""

    id: str
    values: tuple[int, ...]
    clue_mode: str = "none"  # "none" | "previous-value"
    expected_last: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if len(self.values) < 3:
            raise ValueError("a puzzle needs at least 3 values")
        if self.clue_mode not in ("none", "previous-value"):
            raise ValueError(f"unknown clue mode {self.clue_mode!r}")
        if self.expected_last is None:
            object.__setattr__(self, "expected_last", self.values[-1])


BUILTIN_PUZZLES = {
    "S8": PuzzleSeries("S8", (28, 33, 31, 36, 34, 39, 37, 42)),
    "S9": PuzzleSeries("S9", (3, 6, 12, 24, 48, 96, 192, 384)),
    "S15": PuzzleSeries("S15", (6, 9, 18, 21, 42, 45, 90, 93)),
    "S19": PuzzleSeries("S19", (8, 12, 16, 20, 24, 28, 32, 36)),
}


@dataclass(frozen=True)
class PuzzleReport:
    puzzle: str
    clue_mode: str
    trials: int
    histogram: dict
    plurality: int | None
    expected: int
    correct_rate: float
    failures: int


def _round_half_away(value: float) -> int:
    return int(np.copysign(np.floor(abs(value) + 0.5), value))


def _puzzle_series(puzzle: PuzzleSeries) -> TimeSeries:
    known = np.array(puzzle.values[:-1], dtype=float)
    if puzzle.clue_mode == "previous-value":
        prev = np.concatenate([[known[0]], known[:-1]])  # backfilled first value
        data = np.vstack([known, prev])
    else:
        data = known.reshape(1, -1)
    return TimeSeries(data, tau=1.0)


def predict_last(
    puzzle: PuzzleSeries, n_res: int = 4, trials: int = 500, seed_base: int = 0
) -> PuzzleReport:
    """Predict the withheld last element over seeded trials.

    Each trial learns readout weights on the known prefix with a fresh
    reservoir, runs one output-generating step past the end, and rounds the
    prediction to the nearest integer (half away from zero). The report
    collects the prediction histogram and the plurality answer (ties broken
    toward the smaller value); non-finite predictions count as failures.
    """
    series = _puzzle_series(puzzle)
    counts: Counter = Counter()
    failures = 0
    for i in range(trials):
        init = init_reservoir(series.d, n_res, seed_base + i)
        with np.errstate(all="ignore"):
            model = learn_output_weights(series, init)
            seq = drive_reservoir(series, init)
            nxt = step(model, seq.states[:, -1])
        value = nxt[0]
        if not np.isfinite(value) or abs(value) > 1e15:
            failures += 1
            continue
        counts[_round_half_away(float(value))] += 1
    plurality = None
    if counts:
        best = max(counts.values())
        plurality = min(v for v, c in counts.items() if c == best)
    correct = counts.get(int(puzzle.expected_last), 0)
    return PuzzleReport(
        puzzle=puzzle.id,
        clue_mode=puzzle.clue_mode,
        trials=trials,
        histogram=dict(sorted(counts.items())),
        plurality=plurality,
        expected=int(puzzle.expected_last),
        correct_rate=correct / trials if trials else 0.0,
        failures=failures,
    )


# ---------------------------------------------------------------------------
# learn-and-reduce experiment presets


@dataclass(frozen=True)
class BenchConfig:
    """Knobs of one experiment run; preset defaults fill unset fields."""

    preset: str
    trials: int = 20
    seed_base: int = 0
    n_res: int | None = None
    theta: float | None = None
    keep_models: bool = False


@dataclass(frozen=True)
class TrialRecord:
    seed: int
    ok: bool
    nrmse_train: float = float("nan")
    nrmse_final: float = float("nan")
    size_before: int = 0
    size_after: int = 0
    success: bool = False
    note: str = ""
    model: ReducedModel | None = None


@dataclass(frozen=True)
class TrialReport:
    preset: str
    trials: int
    seed_base: int
    records: tuple[TrialRecord, ...]

    @property
    def completed(self) -> tuple[TrialRecord, ...]:
        return tuple(r for r in self.records if r.ok)

    @property
    def failures(self) -> int:
        return sum(1 for r in self.records if not r.ok)

    @property
    def median_nrmse(self) -> float:
        done = self.completed
        return statistics.median(r.nrmse_final for r in done) if done else float("nan")

    @property
    def median_size(self) -> float:
        done = self.completed
        return statistics.median(r.size_after for r in done) if done else float("nan")

    @property
    def success_rate(self) -> float:
        return sum(1 for r in self.records if r.ok and r.success) / len(self.records)


_PRESET_DEFAULTS = {
    "mso8": {"n_res": 200, "theta": 0.99},
    "parabola": {"n_res": 30, "theta": 0.99},
    "sinusoid": {"n_res": 30, "theta": 0.99},
    "trajectory": {"n_res": 200, "theta": 0.999},
}

MSO_EVAL_STEPS = 300


def _learn_reduce_trial(
    series: TimeSeries,
    eval_series: TimeSeries,
    n_res: int,
    theta: float,
    seed: int,
    size_predicate,
    keep_model: bool,
) -> TrialRecord:
    init = init_reservoir(series.d, n_res, seed)
    model = learn_output_weights(series, init)
    err_train = nrmse(series, trajectory(model, series.n_points))
    form = real_jordan(model.w, model.x0, d_out=series.d)
    reduced = reduce_model(form, series, theta)
    err_final = nrmse(eval_series, reduced_trajectory(reduced, eval_series.n_points))
    return TrialRecord(
        seed=seed,
        ok=True,
        nrmse_train=err_train,
        nrmse_final=err_final,
        size_before=model.n_res,
        size_after=reduced.width,
        success=bool(size_predicate(reduced, err_train, err_final)),
        model=reduced if keep_model else None,
    )


def _trial_mso8(seed: int, n_res: int, theta: float, keep_model: bool) -> TrialRecord:
    # training length equals the reservoir size for this preset
    train = mso(8, n_res)
    truth = mso(8, MSO_EVAL_STEPS)
    return _learn_reduce_trial(
        train, truth, n_res, theta, seed,
        lambda red, et, ef: red.width == 16,
        keep_model,
    )


def _trial_named_function(
    kind: str, minimal: int, seed: int, n_res: int, theta: float, keep_model: bool
) -> TrialRecord:
    train = sample_function(kind, tau=0.01, points=101)
    return _learn_reduce_trial(
        train, train, n_res, theta, seed,
        lambda red, et, ef: red.width == minimal,
        keep_model,
    )


TRAJECTORY_ATTEMPTS = 5


def _trial_trajectory(seed: int, n_res: int, theta: float, keep_model: bool) -> TrialRecord:
    # an occasional reservoir draw yields an unstable readout fit; redraw
    # until the replay error drops below 1, as the replay protocol prescribes
    train = synthetic_trajectory(d=4, points=600, n_components=10, seed=seed)

    def predicate(red, err_train, err_final):
        shrink = 1.0 - red.width / (train.d + n_res)
        return err_train < 1.0 and err_final <= 1.0 and shrink >= 0.10

    note = f"no stable fit in {TRAJECTORY_ATTEMPTS} attempts"
    for attempt in range(TRAJECTORY_ATTEMPTS):
        try:
            record = _learn_reduce_trial(
                train, train, n_res, theta, seed * TRAJECTORY_ATTEMPTS + attempt,
                predicate, keep_model,
            )
        except (ValueError, np.linalg.LinAlgError) as exc:
            note = f"{type(exc).__name__}: {exc}"
            continue
        if record.nrmse_train < 1.0:
            return replace(record, seed=seed)
    return TrialRecord(seed=seed, ok=False, note=note)


def _run_one(config: BenchConfig, seed: int) -> TrialRecord:
    n_res = config.n_res if config.n_res is not None else _PRESET_DEFAULTS[config.preset]["n_res"]
    theta = config.theta if config.theta is not None else _PRESET_DEFAULTS[config.preset]["theta"]
    try:
        with np.errstate(all="ignore"):
            if config.preset == "mso8":
                return _trial_mso8(seed, n_res, theta, config.keep_models)
            if config.preset == "parabola":
                return _trial_named_function("parabola4t", 3, seed, n_res, theta, config.keep_models)
            if config.preset == "sinusoid":
                return _trial_named_function("sinusoid_pi", 2, seed, n_res, theta, config.keep_models)
            if config.preset == "trajectory":
                return _trial_trajectory(seed, n_res, theta, config.keep_models)
    except (ValueError, np.linalg.LinAlgError) as exc:
        return TrialRecord(seed=seed, ok=False, note=f"{type(exc).__name__}: {exc}")
    raise ValueError(f"unknown preset {config.preset!r}")


def run_trials(config: BenchConfig) -> TrialReport:
    """Run the preset over seeds seed_base..seed_base+trials-1.

    Deterministic for a given config: every trial derives its randomness
    from its own seed. Trials run concurrently when the PRNN_THREADS
    environment variable asks for more than one worker; results always
    assemble in seed order. Individual numerical failures are recorded in
    their trial records rather than aborting the run.
    """
    if config.preset not in _PRESET_DEFAULTS:
        raise ValueError(f"unknown preset {config.preset!r} (puzzles run via predict_last)")
    if config.trials < 1:
        raise ValueError(f"trials must be >= 1, got {config.trials}")
    seeds = [config.seed_base + i for i in range(config.trials)]
    workers = int(os.environ.get("PRNN_THREADS", "1") or "1")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda s: _run_one(config, s), seeds))
    else:
        records = [_run_one(config, s) for s in seeds]
    return TrialReport(
        preset=config.preset,
        trials=config.trials,
        seed_base=config.seed_base,
        records=tuple(records),
    )
