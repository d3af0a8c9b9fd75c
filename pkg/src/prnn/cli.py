"""Command-line surface and model (de)serialization.

Subcommands: ``train``, ``reduce``, ``predict``, ``analyze``, ``bench``.
Model files use a versioned, line-oriented text format (floats written via
repr, so serialize -> parse -> serialize is byte-identical). Exit codes:
0 ok, 2 usage, 3 I/O or parse failure, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .bench import (
    BUILTIN_PUZZLES,
    BenchConfig,
    CsvFormatError,
    load_trajectory_csv,
    mso,
    predict_last,
    run_trials,
    sample_function,
    subsample,
)
from .learning import drive_reservoir, learn_full_transition, learn_output_weights
from .longterm import Behavior, analyze_longterm
from .model import PrnnModel, TimeSeries, nrmse, trajectory
from .reduction import ReducedModel, reduce_model, reduced_trajectory
from .reservoir import ReservoirInit, init_reservoir
from .spectral import RealJordanBlock, eigendecompose, evaluate_fractional, real_jordan

FORMAT_VERSION = 1
_MAGIC = "prnn-model"


class ModelFormatError(ValueError):
    """Raised on malformed model files."""


@dataclass(frozen=True)
class ModelFile:
    """Parsed model file contents, either a full network or a reduced one."""

    kind: str  # "full" | "reduced"
    d: int
    tau: float
    seed: int | None
    created: str
    w: np.ndarray | None = None
    x0: np.ndarray | None = None
    blocks: tuple[RealJordanBlock, ...] | None = None
    block_index: tuple[int, ...] | None = None
    a: np.ndarray | None = None
    y: np.ndarray | None = None

    @property
    def n_res(self) -> int | None:
        return self.w.shape[0] - self.d if self.w is not None else None


def _timestamp() -> str:
    # SOURCE_DATE_EPOCH makes runs byte-reproducible when set
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), tz=timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.isoformat(timespec="seconds")


def _fmt_row(row) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(row).ravel())


def model_to_file(model: PrnnModel, seed: int | None = None, created: str | None = None) -> ModelFile:
    return ModelFile(
        kind="full",
        d=model.d,
        tau=model.tau,
        seed=seed,
        created=created or _timestamp(),
        w=np.array(model.w),
        x0=np.array(model.x0),
    )


def reduced_to_file(model: ReducedModel, seed: int | None = None, created: str | None = None) -> ModelFile:
    return ModelFile(
        kind="reduced",
        d=model.d,
        tau=model.tau,
        seed=seed,
        created=created or _timestamp(),
        blocks=model.blocks,
        block_index=model.block_index,
        a=np.array(model.a),
        y=np.array(model.y),
    )


def file_to_model(mf: ModelFile) -> PrnnModel:
    if mf.kind != "full":
        raise ModelFormatError(f"expected a full model file, found kind {mf.kind!r}")
    return PrnnModel(w=mf.w, x0=mf.x0, d=mf.d, tau=mf.tau)


def file_to_reduced(mf: ModelFile) -> ReducedModel:
    if mf.kind != "reduced":
        raise ModelFormatError(f"expected a reduced model file, found kind {mf.kind!r}")
    import scipy.linalg

    j = scipy.linalg.block_diag(*[b.matrix() for b in mf.blocks])
    return ReducedModel(
        a=mf.a, j=j, y=mf.y, tau=mf.tau, blocks=mf.blocks, block_index=mf.block_index
    )


def dump_model(mf: ModelFile) -> str:
    lines = [f"{_MAGIC} {FORMAT_VERSION}"]
    lines.append(f"kind: {mf.kind}")
    lines.append(f"d: {mf.d}")
    lines.append(f"tau: {repr(float(mf.tau))}")
    lines.append(f"seed: {'none' if mf.seed is None else mf.seed}")
    lines.append(f"created: {mf.created}")
    if mf.kind == "full":
        n = mf.w.shape[0]
        lines.append(f"w: {n} {n}")
        for row in mf.w:
            lines.append(_fmt_row(row))
        lines.append(f"x0: {n}")
        lines.append(_fmt_row(mf.x0))
    else:
        lines.append("origin: " + " ".join(str(i) for i in mf.block_index))
        lines.append(f"blocks: {len(mf.blocks)}")
        for b in mf.blocks:
            lines.append(f"{b.kind} {repr(b.lam.real)} {repr(b.lam.imag)} {b.m}")
        lines.append(f"a: {mf.a.shape[0]} {mf.a.shape[1]}")
        for row in mf.a:
            lines.append(_fmt_row(row))
        lines.append(f"y: {mf.y.shape[0]}")
        lines.append(_fmt_row(mf.y))
    return "\n".join(lines) + "\n"


class _LineReader:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.at = 0

    def next(self, what: str) -> str:
        if self.at >= len(self.lines):
            raise ModelFormatError(f"unexpected end of file, expected {what}")
        line = self.lines[self.at]
        self.at += 1
        return line

    def field(self, name: str) -> str:
        line = self.next(f"'{name}:'")
        prefix = name + ":"
        if not line.startswith(prefix):
            raise ModelFormatError(f"line {self.at}: expected '{name}: ...', found {line!r}")
        return line[len(prefix) :].strip()

    def floats(self, count: int, what: str) -> np.ndarray:
        line = self.next(what)
        try:
            values = np.array([float(tok) for tok in line.split()])
        except ValueError as exc:
            raise ModelFormatError(f"line {self.at}: bad number in {what}: {exc}") from None
        if values.shape[0] != count:
            raise ModelFormatError(f"line {self.at}: expected {count} values for {what}, found {values.shape[0]}")
        return values


def parse_model(text: str) -> ModelFile:
    rd = _LineReader(text)
    try:
        return _parse_model_body(rd)
    except ModelFormatError:
        raise
    except (ValueError, IndexError) as exc:
        raise ModelFormatError(f"line {rd.at}: malformed model file ({exc})") from None


def _parse_model_body(rd: _LineReader) -> ModelFile:
    head = rd.next("header").split()
    if len(head) != 2 or head[0] != _MAGIC:
        raise ModelFormatError(f"not a model file (header {head!r})")
    if int(head[1]) != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format version {head[1]}")
    kind = rd.field("kind")
    if kind not in ("full", "reduced"):
        raise ModelFormatError(f"unknown model kind {kind!r}")
    d = int(rd.field("d"))
    tau = float(rd.field("tau"))
    seed_text = rd.field("seed")
    seed = None if seed_text == "none" else int(seed_text)
    created = rd.field("created")
    if kind == "full":
        shape = rd.field("w").split()
        n = int(shape[0])
        if int(shape[1]) != n:
            raise ModelFormatError("transition matrix must be square")
        w = np.vstack([rd.floats(n, f"w row {i}") for i in range(n)])
        n2 = int(rd.field("x0"))
        if n2 != n:
            raise ModelFormatError("start vector length does not match the matrix")
        x0 = rd.floats(n, "x0")
        return ModelFile(kind=kind, d=d, tau=tau, seed=seed, created=created, w=w, x0=x0)
    origin = tuple(int(tok) for tok in rd.field("origin").split())
    n_blocks = int(rd.field("blocks"))
    blocks = []
    for i in range(n_blocks):
        parts = rd.next(f"block {i}").split()
        if len(parts) != 4:
            raise ModelFormatError(f"line {rd.at}: block {i} needs 'kind re im m'")
        blocks.append(RealJordanBlock(parts[0], complex(float(parts[1]), float(parts[2])), int(parts[3])))
    if len(origin) != n_blocks:
        raise ModelFormatError("origin must list one index per block")
    a_shape = rd.field("a").split()
    rows, cols = int(a_shape[0]), int(a_shape[1])
    a = np.vstack([rd.floats(cols, f"a row {i}") for i in range(rows)])
    y_len = int(rd.field("y"))
    y = rd.floats(y_len, "y")
    return ModelFile(
        kind=kind, d=d, tau=tau, seed=seed, created=created,
        blocks=tuple(blocks), block_index=origin, a=a, y=y,
    )


def save_model(mf: ModelFile, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_model(mf))


def load_model(path) -> ModelFile:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


# ---------------------------------------------------------------------------
# commands


def _usage(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _load_series(args) -> TimeSeries:
    if getattr(args, "input", None):
        series = load_trajectory_csv(args.input, tau=args.tau)
    elif getattr(args, "function", None):
        if args.function == "mso8":
            series = mso(8, args.points)
        else:
            series = sample_function(args.function, tau=args.tau, points=args.points, expr=args.expr)
    else:
        raise CsvFormatError("no series source")  # callers pre-check; defensive
    if getattr(args, "stride", 1) > 1:
        series = subsample(series, args.stride)
    return series


def cmd_train(args) -> int:
    if not args.input and not args.function:
        return _usage("train needs --input CSV or --function NAME")
    if args.reservoir < 1:
        return _usage(f"--reservoir must be >= 1, got {args.reservoir}")
    if args.spectral_radius <= 0:
        return _usage(f"--spectral-radius must be positive, got {args.spectral_radius}")
    if args.spectral_radius != 1.0 and args.mode != "readout":
        return _usage("--spectral-radius only applies to readout mode")
    series = _load_series(args)
    if args.mode == "readout":
        init = init_reservoir(series.d, args.reservoir, args.seed)
        if args.spectral_radius != 1.0:
            # expert override; the default 1.0 is what keeps free runs bounded
            init = ReservoirInit(
                w_in=init.w_in,
                w_res=args.spectral_radius * init.w_res,
                r0=init.r0,
                seed=init.seed,
            )
        model = learn_output_weights(series, init, ridge=args.ridge)
        coeff = drive_reservoir(series, init).states[:, :-1]
    else:
        model = learn_full_transition(series, args.reservoir, args.seed, ridge=args.ridge)
        rng = np.random.default_rng(args.seed)
        coeff = np.vstack([series.data, rng.standard_normal((args.reservoir, series.n_points))])[:, :-1]
    err = nrmse(series, trajectory(model, series.n_points))
    rank = int(np.linalg.matrix_rank(coeff))
    save_model(model_to_file(model, seed=args.seed), args.output)
    print(f"trained {args.mode} model: N = {model.n} ({model.d} i/o + {model.n_res} reservoir)")
    print(f"training NRMSE: {err:.6e}")
    print(f"effective rank of the state matrix: {rank} / {coeff.shape[0]}")
    print(f"wrote {args.output}")
    return 0


def cmd_reduce(args) -> int:
    if not args.input and not args.function:
        return _usage("reduce needs the training series: --input CSV or --function NAME")
    if not 0.0 < args.theta <= 1.0:
        return _usage(f"--theta must be in (0, 1], got {args.theta}")
    mf = load_model(args.model)
    if mf.kind == "reduced":
        print("error: model is already reduced", file=sys.stderr)
        return 2
    model = file_to_model(mf)
    series = _load_series(args)
    if series.d != model.d:
        return _usage(f"series has d={series.d} but the model expects d={model.d}")
    err_before = nrmse(series, trajectory(model, series.n_points))
    form = real_jordan(model.w, model.x0, d_out=model.d)
    reduced = reduce_model(form, series, args.theta, rule=args.rule, refit=args.refit)
    err_after = nrmse(series, reduced_trajectory(reduced, series.n_points))
    save_model(reduced_to_file(reduced, seed=mf.seed), args.output)
    print(f"N^res: {model.n_res} -> {reduced.width}")
    print(f"NRMSE: {err_before:.6e} -> {err_after:.6e}")
    print(f"wrote {args.output}")
    return 0


def cmd_predict(args) -> int:
    if args.steps < 1:
        return _usage(f"--steps must be >= 1, got {args.steps}")
    mf = load_model(args.model)
    out = sys.stdout if args.output is None else open(args.output, "w", encoding="utf-8")
    try:
        if args.fractional is not None:
            if mf.kind != "full":
                return _usage("--fractional needs a full model (reduced files hold no start vector)")
            model = file_to_model(mf)
            decomp = eigendecompose(model.w, model.x0)
            for i in range(args.steps):
                t = i * args.fractional
                value = evaluate_fractional(decomp, t)[: model.d]
                out.write(",".join(repr(float(v)) for v in value.real) + ","
                          + ",".join(repr(float(v)) for v in value.imag) + "\n")
        else:
            if mf.kind == "full":
                series = trajectory(file_to_model(mf), args.steps)
            else:
                series = reduced_trajectory(file_to_reduced(mf), args.steps)
            for k in range(series.n_points):
                out.write(",".join(repr(float(v)) for v in series.data[:, k]) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_analyze(args) -> int:
    mf = load_model(args.model)
    if mf.kind != "full":
        return _usage("analyze needs a full model file")
    model = file_to_model(mf)
    decomp = eigendecompose(model.w, model.x0)
    if decomp.near_defective:
        print(
            f"error: eigenbasis is near-defective (cond {decomp.cond_v:.3e}); "
            "the asymptotic analysis is unreliable for this model",
            file=sys.stderr,
        )
        return 4
    analysis = analyze_longterm(decomp, tau=model.tau, tol=args.unit_tol)
    print(f"classification: {analysis.classification.value}")
    if analysis.classification is Behavior.ELLIPSE:
        print(f"mu (axis ratio a/b): {analysis.mu:.6g}")
        print(f"omega (rad per unit time): {analysis.omega:.6g}")
        print(f"omega*tau (rad per step): {analysis.omega * model.tau:.6g}")
        print("D_hat:")
        for row in analysis.d_hat:
            print("  " + "  ".join(f"{v: .6f}" for v in row))
    elif analysis.limit_point is not None:
        label = "limit point" if analysis.classification is Behavior.SINGULARITY else "alternating point (+/-)"
        print(f"{label}: " + " ".join(f"{v:.6g}" for v in analysis.limit_point))
    else:
        print(f"note: {analysis.note}")
    return 0


def cmd_bench(args) -> int:
    if args.trials < 1:
        return _usage(f"--trials must be >= 1, got {args.trials}")
    output = args.output or f"bench_{args.preset}.csv"
    if args.preset == "puzzles":
        lines = ["puzzle,clue_mode,trials,plurality,expected,correct_rate,failures"]
        for pid in sorted(BUILTIN_PUZZLES):
            for clue in ("none", "previous-value"):
                puzzle = dataclasses.replace(BUILTIN_PUZZLES[pid], clue_mode=clue)
                rep = predict_last(puzzle, n_res=args.reservoir or 4,
                                   trials=args.trials, seed_base=args.seed)
                lines.append(
                    f"{rep.puzzle},{rep.clue_mode},{rep.trials},{rep.plurality},"
                    f"{rep.expected},{repr(rep.correct_rate)},{rep.failures}"
                )
                mark = "ok" if rep.plurality == rep.expected else "off"
                print(
                    f"{rep.puzzle:4s} clue={rep.clue_mode:14s} plurality={rep.plurality} "
                    f"(expected {rep.expected}, {mark}), per-trial {100 * rep.correct_rate:.1f}%"
                )
        with open(output, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"wrote {output}")
        return 0
    config = BenchConfig(
        preset=args.preset,
        trials=args.trials,
        seed_base=args.seed,
        n_res=args.reservoir,
        theta=args.theta,
    )
    report = run_trials(config)
    lines = ["seed,ok,nrmse_train,nrmse_final,size_before,size_after,success,note"]
    for r in report.records:
        lines.append(
            f"{r.seed},{int(r.ok)},{repr(r.nrmse_train)},{repr(r.nrmse_final)},"
            f"{r.size_before},{r.size_after},{int(r.success)},{r.note}"
        )
    with open(output, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"preset {report.preset}: {report.trials} trials, {report.failures} failures")
    print(f"median NRMSE: {report.median_nrmse:.6e}")
    print(f"median reduced size: {report.median_size}")
    print(f"success rate: {100 * report.success_rate:.1f}%")
    print(f"wrote {output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prnn",
        description="Learn, reduce, analyze and benchmark linearly activated recurrent networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_series_source(p):
        p.add_argument("--input", help="CSV time series (one time point per line)")
        p.add_argument("--function", choices=["parabola4t", "sinusoid_pi", "square_t", "mso8", "expr"],
                       help="named generator instead of --input")
        p.add_argument("--expr", help="numpy expression in t, for --function expr")
        p.add_argument("--points", type=int, default=101, help="samples for --function (default 101)")
        p.add_argument("--tau", type=float, default=1.0, help="time step (default 1.0)")
        p.add_argument("--stride", type=int, default=1, help="keep every stride-th time point")

    p_train = sub.add_parser("train", help="learn a model from a series")
    add_series_source(p_train)
    p_train.add_argument("--reservoir", type=int, required=True, help="reservoir neuron count")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--mode", choices=["readout", "full"], default="readout")
    p_train.add_argument("--ridge", type=float, default=0.0, help="Tikhonov damping (default 0)")
    p_train.add_argument("--spectral-radius", type=float, default=1.0,
                         help="expert override for the reservoir spectral radius (default 1)")
    p_train.add_argument("--output", required=True, help="model file to write")
    p_train.set_defaults(func=cmd_train)

    p_reduce = sub.add_parser("reduce", help="shrink a trained model to its relevant components")
    p_reduce.add_argument("--model", required=True)
    add_series_source(p_reduce)
    p_reduce.add_argument("--theta", type=float, default=0.99, help="precision threshold (default 0.99)")
    p_reduce.add_argument("--rule", choices=["greedy", "batch"], default="greedy")
    p_reduce.add_argument("--refit", action="store_true", help="re-solve the output map on the retained blocks")
    p_reduce.add_argument("--output", required=True)
    p_reduce.set_defaults(func=cmd_reduce)

    p_predict = sub.add_parser("predict", help="emit future steps of a model as CSV")
    p_predict.add_argument("--model", required=True)
    p_predict.add_argument("--steps", type=int, required=True)
    p_predict.add_argument("--fractional", type=float, default=None, metavar="STEP",
                           help="evaluate on the real-valued grid i*STEP (real and imaginary columns)")
    p_predict.add_argument("--output", help="write here instead of stdout")
    p_predict.set_defaults(func=cmd_predict)

    p_analyze = sub.add_parser("analyze", help="classify the long-term behavior of a model")
    p_analyze.add_argument("--model", required=True)
    p_analyze.add_argument("--unit-tol", type=float, default=1e-8,
                           help="tolerance for |lambda| = 1 (default 1e-8)")
    p_analyze.set_defaults(func=cmd_analyze)

    p_bench = sub.add_parser("bench", help="run an experiment preset over seeded trials")
    p_bench.add_argument("--preset", required=True,
                         choices=["mso8", "parabola", "sinusoid", "puzzles", "trajectory"])
    p_bench.add_argument("--trials", type=int, default=20)
    p_bench.add_argument("--seed", type=int, default=0, help="base seed; trial i uses seed+i")
    p_bench.add_argument("--reservoir", type=int, default=None, help="override the preset reservoir size")
    p_bench.add_argument("--theta", type=float, default=None, help="override the preset threshold")
    p_bench.add_argument("--output", help="report CSV path (default bench_<preset>.csv)")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, IsADirectoryError, PermissionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (CsvFormatError, ModelFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (np.linalg.LinAlgError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
