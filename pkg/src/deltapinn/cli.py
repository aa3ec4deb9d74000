"""Command-line entry points: train, eval, reference.

Outputs land under --out (default: $DELTAPINN_OUT_ROOT/<command>-<problem>,
falling back to the working directory). Every file starts with a
format-version line; numeric CSV cells carry 17 significant digits so floats
round trip exactly.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import (
    parse_config_text,
    parse_override,
    render_config,
    resolve_config,
)
from .errors import (
    ConfigError,
    DivergenceError,
    FormatError,
    GeometryError,
    NumericError,
)
from .fdtd import FdtdGrid, fdtd_run
from .metrics import relative_l2
from .network import MultiScaleSiren
from .problems import seconds_to_nondim
from .series import (
    ReferenceField,
    barry_mercer_eval_mesh,
    barry_mercer_series,
    poisson_eval_mesh,
    poisson_series,
)
from .training import load_checkpoint, predict, train

__all__ = ["main", "build_reference", "write_field_csv", "read_field_csv"]

_FIELD_FORMAT = "deltapinn-field"
_FIELD_VERSION = 1

_SUMMARY_FORMAT = "deltapinn-l2"
_SUMMARY_VERSION = 1


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# field CSV files


def write_field_csv(path, points, values, columns, notes=()):
    """`x,y[,t],<fields>` rows at 17 significant digits."""
    points = np.asarray(points)
    values = np.asarray(values)
    if values.ndim == 1:
        values = values[:, None]
    coord_names = ("x", "y", "t")[: points.shape[1]]
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# {_FIELD_FORMAT} {_FIELD_VERSION}\n")
        for note in notes:
            fh.write(f"# {note}\n")
        fh.write(",".join(coord_names + tuple(columns)) + "\n")
        for row_p, row_v in zip(points, values):
            cells = [_fmt(c) for c in row_p] + [_fmt(c) for c in row_v]
            fh.write(",".join(cells) + "\n")


def read_field_csv(path):
    """Returns (points, values, column names); rejects unknown versions."""
    with open(path, "r", encoding="ascii") as fh:
        first = fh.readline().strip().split()
        if len(first) != 3 or first[0] != "#" or first[1] != _FIELD_FORMAT:
            raise FormatError(f"not a field file: {path}")
        if int(first[2]) != _FIELD_VERSION:
            raise FormatError(f"unknown field format version {first[2]}")
        line = fh.readline()
        while line.startswith("#"):
            line = fh.readline()
        header = line.strip().split(",")
        n_coords = sum(1 for c in header if c in ("x", "y", "t"))
        rows = [line.strip().split(",") for line in fh if line.strip()]
    data = np.array(rows, dtype=np.float64)
    return data[:, :n_coords], data[:, n_coords:], header[n_coords:]


# ---------------------------------------------------------------------------
# references shared by train-time evaluation and the eval/reference commands


def build_reference(problem, params: dict, alpha: float):
    """ReferenceField for a problem using resolved reference.* parameters."""
    name = problem.name
    if name == "poisson":
        mesh = poisson_eval_mesh(n=params["mesh"], center=problem.center)
        return poisson_series(mesh, center=problem.center, terms=params["terms"])
    if name == "barry_mercer":
        mesh = barry_mercer_eval_mesh(
            n=params["mesh"],
            num_times=params["num_times"],
            t_end=problem.domain.time[1],
            center=problem.center,
        )
        return barry_mercer_series(
            mesh,
            modes=params["modes"],
            center=problem.center,
            beta=problem.beta,
            omega=problem.omega,
        )
    if name == "maxwell":
        grid = FdtdGrid(
            resolution=params["resolution"],
            courant=params["courant"],
            lo=problem.domain.lo,
            hi=problem.domain.hi,
        )
        result = fdtd_run(
            grid, problem=problem, alpha=alpha, snapshot_times=tuple(params["snapshots"])
        )
        points, values = [], []
        for snap in result.snapshots:
            t = snap.meta["time"]
            points.append(
                np.column_stack([snap.points, np.full(snap.points.shape[0], t)])
            )
            values.append(snap.values)
        return ReferenceField(
            points=np.concatenate(points),
            values=np.concatenate(values),
            meta={
                "generator": "fdtd",
                "resolution": params["resolution"],
                "courant": params["courant"],
                "snapshots": tuple(params["snapshots"]),
            },
        )
    raise ConfigError(f"no reference generator for problem {name!r}")


# ---------------------------------------------------------------------------
# commands


def _load_pairs(args) -> dict[str, str]:
    pairs: dict[str, str] = {}
    if args.config is not None:
        with open(args.config, "r", encoding="ascii") as fh:
            pairs = parse_config_text(fh.read(), origin=args.config)
    return pairs


def _cli_overrides(args) -> list[tuple[str, str]]:
    overrides = [parse_override(text) for text in args.override]
    if getattr(args, "problem", None) is not None:
        overrides.append(("problem.name", args.problem))
    if args.seed is not None:
        overrides.append(("trainer.seed", str(args.seed)))
    return overrides


def _out_dir(args, run_name: str) -> str:
    if args.out is not None:
        return args.out
    root = os.environ.get("DELTAPINN_OUT_ROOT", ".")
    return os.path.join(root, run_name)


def _times_ns_notes(times_ns) -> tuple[list[float], list[str]]:
    """Convert --times-ns values, recording the conversions for file headers."""
    times, notes = [], []
    for ns in times_ns:
        t = seconds_to_nondim(ns * 1e-9)
        times.append(t)
        notes.append(f"requested {_fmt(ns)} ns -> t_tilde {_fmt(t)}")
    return times, notes


def cmd_train(args) -> int:
    pairs = _load_pairs(args)
    run = resolve_config(pairs, _cli_overrides(args))
    out = _out_dir(args, f"train-{run.problem.name}")
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "manifest.cfg"), "w", encoding="ascii") as fh:
        fh.write(
            render_config(
                run.resolved,
                header_notes=[
                    "metrics format: deltapinn-metrics 1",
                    "checkpoint format: deltapinn-checkpoint 1",
                ],
            )
        )
    reference = None
    if run.trainer.eval_every > 0:
        reference = build_reference(
            run.problem, run.reference, run.schedule.alpha0
        )
    net = MultiScaleSiren(run.net, seed=run.trainer.seed)
    metrics_path = os.path.join(out, "metrics.csv")
    try:
        with open(metrics_path, "w", encoding="ascii") as stream:
            result = train(
                run.problem,
                net,
                None,
                run.trainer,
                weighting=run.weighting,
                schedule=run.schedule,
                reference=reference,
                metrics_stream=stream,
                checkpoint_dir=out,
            )
    except DivergenceError as e:
        print(f"error: {e} (partial metrics kept in {metrics_path})", file=sys.stderr)
        return 3
    if result.records and result.records[-1].l2_mean is not None:
        print(f"final relative L2 (mean): {_fmt(result.records[-1].l2_mean)}")
    print(f"wrote {out}")
    return 0


def cmd_eval(args) -> int:
    net = load_checkpoint(args.checkpoint)
    pairs = _load_pairs(args)
    run = resolve_config(pairs, _cli_overrides(args))
    problem = run.problem
    if (net.config.in_dim, net.config.out_dim) != (problem.in_dim, problem.out_dim):
        raise FormatError(
            f"checkpoint net is {net.config.in_dim}->{net.config.out_dim} but "
            f"problem {problem.name} needs {problem.in_dim}->{problem.out_dim}"
        )
    params = dict(run.reference)
    notes = []
    if args.times_ns:
        if problem.name != "maxwell":
            raise ConfigError("--times-ns applies to the maxwell problem only")
        times, notes = _times_ns_notes(args.times_ns)
        params["snapshots"] = times
    reference = build_reference(problem, params, run.schedule.alpha0)
    prediction = predict(net, reference.points)
    per_component, mean = relative_l2(
        prediction, reference.values, mask=reference.mask
    )
    out = _out_dir(args, f"eval-{problem.name}")
    os.makedirs(out, exist_ok=True)
    columns = tuple(problem.field_names)
    write_field_csv(
        os.path.join(out, "prediction.csv"), reference.points, prediction, columns, notes
    )
    write_field_csv(
        os.path.join(out, "reference.csv"),
        reference.points,
        reference.values,
        columns,
        notes,
    )
    write_field_csv(
        os.path.join(out, "abs_error.csv"),
        reference.points,
        np.abs(prediction - reference.values),
        columns,
        notes,
    )
    with open(os.path.join(out, "l2_summary.csv"), "w", encoding="ascii") as fh:
        fh.write(f"# {_SUMMARY_FORMAT} {_SUMMARY_VERSION}\n")
        for note in notes:
            fh.write(f"# {note}\n")
        fh.write("component,relative_l2\n")
        for name, value in zip(columns, per_component):
            fh.write(f"{name},{_fmt(value)}\n")
        fh.write(f"mean,{_fmt(mean)}\n")
    print(f"relative L2 (mean): {_fmt(mean)}")
    print(f"wrote {out}")
    return 0


def cmd_reference(args) -> int:
    kind = args.kind
    overrides = [parse_override(text) for text in args.override]
    pairs = _load_pairs(args)
    if kind == "fdtd":
        overrides.append(("problem.name", "maxwell"))
        if args.resolution is not None:
            overrides.append(("reference.resolution", repr(args.resolution)))
        if args.courant is not None:
            overrides.append(("reference.courant", repr(args.courant)))
        notes = []
        if args.times_ns:
            times, notes = _times_ns_notes(args.times_ns)
            overrides.append(("reference.snapshots", " ".join(repr(t) for t in times)))
        elif args.snapshots is not None:
            overrides.append(("reference.snapshots", args.snapshots))
        run = resolve_config(pairs, overrides)
        problem, params = run.problem, run.reference
        grid = FdtdGrid(
            resolution=params["resolution"],
            courant=params["courant"],
            lo=problem.domain.lo,
            hi=problem.domain.hi,
        )
        t_end = args.t_end if args.t_end is not None else 0.0
        result = fdtd_run(
            grid,
            problem=problem,
            alpha=run.schedule.alpha0,
            t_end=t_end,
            snapshot_times=tuple(params["snapshots"]),
        )
        out = _out_dir(args, "reference-maxwell")
        os.makedirs(out, exist_ok=True)
        for k, snap in enumerate(result.snapshots):
            t = snap.meta["time"]
            pts = np.column_stack([snap.points, np.full(snap.points.shape[0], t)])
            write_field_csv(
                os.path.join(out, f"fdtd_{k:02d}.csv"),
                pts,
                snap.values,
                ("Ex", "Ey", "Hz"),
                notes
                + [
                    f"snapshot time {_fmt(t)} (requested {_fmt(snap.meta['requested_time'])})"
                ],
            )
        print(f"wrote {len(result.snapshots)} snapshots to {out}")
        return 0
    if kind == "poisson-series":
        overrides.append(("problem.name", "poisson"))
        if args.terms is not None:
            overrides.append(("reference.terms", str(args.terms)))
        if args.mesh is not None:
            overrides.append(("reference.mesh", str(args.mesh)))
        run = resolve_config(pairs, overrides)
        field = build_reference(run.problem, run.reference, run.schedule.alpha0)
        out = _out_dir(args, "reference-poisson")
        os.makedirs(out, exist_ok=True)
        write_field_csv(
            os.path.join(out, "poisson_series.csv"),
            field.points,
            field.values,
            ("u",),
            [f"terms {run.reference['terms']}"],
        )
        print(f"wrote {out}")
        return 0
    if kind == "barry-mercer-series":
        overrides.append(("problem.name", "barry_mercer"))
        if args.modes is not None:
            overrides.append(("reference.modes", str(args.modes)))
        if args.mesh is not None:
            overrides.append(("reference.mesh", str(args.mesh)))
        run = resolve_config(pairs, overrides)
        field = build_reference(run.problem, run.reference, run.schedule.alpha0)
        out = _out_dir(args, "reference-barry_mercer")
        os.makedirs(out, exist_ok=True)
        write_field_csv(
            os.path.join(out, "barry_mercer_series.csv"),
            field.points,
            field.values,
            ("u", "v", "p"),
            [f"modes {run.reference['modes']}"],
        )
        print(f"wrote {out}")
        return 0
    raise ConfigError(f"unknown reference kind {kind!r}")


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="config file path")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="trainer seed override")
    parser.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="config override, repeatable",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deltapinn",
        description="PINNs for point-source PDEs with smoothing kernels, "
        "self-balancing loss weights, and multi-scale sine networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="optimize a network on a problem")
    _add_common(p_train)
    p_train.add_argument("--problem", default=None, help="problem name shorthand")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="score a checkpoint against a reference")
    _add_common(p_eval)
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--problem", default=None, help="problem name shorthand")
    p_eval.add_argument(
        "--times-ns",
        type=float,
        action="append",
        default=[],
        help="maxwell snapshot time in nanoseconds, repeatable",
    )
    p_eval.set_defaults(func=cmd_eval)

    p_ref = sub.add_parser("reference", help="generate a ground-truth field")
    _add_common(p_ref)
    p_ref.add_argument(
        "kind", choices=("fdtd", "poisson-series", "barry-mercer-series")
    )
    p_ref.add_argument("--resolution", type=float, default=None)
    p_ref.add_argument("--courant", type=float, default=None)
    p_ref.add_argument("--t-end", dest="t_end", type=float, default=None)
    p_ref.add_argument("--snapshots", default=None, help="nondimensional times")
    p_ref.add_argument(
        "--times-ns", type=float, action="append", default=[],
        help="snapshot time in nanoseconds, repeatable",
    )
    p_ref.add_argument("--terms", type=int, default=None)
    p_ref.add_argument("--mesh", type=int, default=None)
    p_ref.add_argument("--modes", type=int, default=None)
    p_ref.set_defaults(func=cmd_reference)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FormatError, GeometryError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (DivergenceError, NumericError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
