"""Adam training loop with staged learning-rate decay and metric logging.

One optimizer instance updates the concatenation of network parameters and
(in uncertainty mode) the loss weights. The learning rate starts at lr0 and
multiplies by `decay` when the iteration count passes each milestone
fraction. Every iteration appends one metrics record; relative-L2 columns
are filled on evaluation iterations only.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .engine import Var
from .errors import DivergenceError, FormatError, NumericError
from .losses import (
    TERM_ORDER,
    WeightingConfig,
    compute_terms,
    fixed_total,
    init_weights,
    uncertainty_total,
)
from .metrics import relative_l2
from .network import MultiScaleSiren, NetConfig
from .sampling import BatchSizes, sample_batch
from .source import WidthSchedule

__all__ = [
    "TrainConfig",
    "AdamState",
    "MetricsRecord",
    "TrainResult",
    "METRICS_COLUMNS",
    "lr_at",
    "adam_step",
    "train",
    "predict",
    "write_metrics",
    "read_metrics",
    "save_checkpoint",
    "load_checkpoint",
]


@dataclass(frozen=True)
class TrainConfig:
    iterations: int
    batches: BatchSizes
    lr0: float = 1e-3
    milestones: tuple[float, ...] = (0.4, 0.6, 0.8)
    decay: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    eval_every: int = 1000
    checkpoint_every: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.lr0 <= 0:
            raise ValueError("lr0 must be positive")
        ms = tuple(float(m) for m in self.milestones)
        object.__setattr__(self, "milestones", ms)
        if any(not (0.0 < m < 1.0) for m in ms):
            raise ValueError(f"milestones must lie in (0,1), got {ms}")
        if any(a >= b for a, b in zip(ms, ms[1:])):
            raise ValueError(f"milestones must be strictly increasing, got {ms}")
        if not (0.0 < self.decay):
            raise ValueError("decay must be positive")
        if self.eval_every < 0 or self.checkpoint_every < 0:
            raise ValueError("cadences must be >= 0 (0 disables)")
        b = self.batches
        if b.interior0 < 1 or b.interior1 < 1 or b.boundary < 1:
            raise ValueError("interior and boundary batch sizes must be >= 1")
        if b.initial < 0:
            raise ValueError("initial batch size must be >= 0")


def lr_at(config: TrainConfig, iteration: int) -> float:
    """Learning rate for one iteration: lr0 * decay^(milestones passed)."""
    if not 0 <= iteration < max(config.iterations, 1):
        raise ValueError(
            f"iteration {iteration} outside 0..{config.iterations - 1}"
        )
    passed = sum(iteration >= m * config.iterations for m in config.milestones)
    return config.lr0 * config.decay**passed


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(m=np.zeros(n), v=np.zeros(n), step=0)


def adam_step(
    params: np.ndarray,
    grads: np.ndarray,
    state: AdamState,
    lr: float,
    betas: tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update; returns (new params, new state)."""
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise ValueError("params, grads, and moments must share one shape")
    if not np.isfinite(grads).all():
        raise DivergenceError("non-finite gradient passed to the optimizer")
    b1, b2 = betas
    t = state.step + 1
    m = b1 * state.m + (1.0 - b1) * grads
    v = b2 * state.v + (1.0 - b2) * grads * grads
    m_hat = m / (1.0 - b1**t)
    v_hat = v / (1.0 - b2**t)
    new = params - lr * m_hat / (np.sqrt(v_hat) + eps)
    return new, AdamState(m=m, v=v, step=t)


# ---------------------------------------------------------------------------
# metrics records and CSV


METRICS_COLUMNS = (
    "iter",
    "loss_r0",
    "loss_r1",
    "loss_ic",
    "loss_bc",
    "sigma0",
    "sigma1",
    "sigma2",
    "sigma3",
    "lr",
    "alpha",
    "l2_mean",
    "l2_c1",
    "l2_c2",
    "l2_c3",
)

_METRICS_FORMAT = "deltapinn-metrics"
_METRICS_VERSION = 1


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class MetricsRecord:
    """One training iteration's log line.

    sigma columns follow the loss-term order (r0, r1, ic, bc) and hold the
    effective variances eps^2 + w_i^2; cells for absent terms, for fixed
    weighting, and for non-evaluation iterations stay empty.
    """

    iteration: int
    losses: dict[str, float]
    lr: float
    alpha: float
    sigmas: dict[str, float] = field(default_factory=dict)
    l2_mean: float | None = None
    l2_components: tuple[float, ...] = ()

    def to_row(self) -> list[str]:
        row = [str(self.iteration)]
        for name in TERM_ORDER:
            row.append(_fmt(self.losses[name]) if name in self.losses else "")
        for name in TERM_ORDER:
            row.append(_fmt(self.sigmas[name]) if name in self.sigmas else "")
        row.append(_fmt(self.lr))
        row.append(_fmt(self.alpha))
        row.append(_fmt(self.l2_mean) if self.l2_mean is not None else "")
        comps = list(self.l2_components) + [None] * (3 - len(self.l2_components))
        for c in comps[:3]:
            row.append(_fmt(c) if c is not None else "")
        return row


def write_metrics(stream: io.TextIOBase, records: list[MetricsRecord]) -> None:
    stream.write(f"# {_METRICS_FORMAT} {_METRICS_VERSION}\n")
    stream.write(",".join(METRICS_COLUMNS) + "\n")
    for rec in records:
        stream.write(",".join(rec.to_row()) + "\n")


def read_metrics(path: str | os.PathLike) -> list[dict]:
    """Parse a metrics CSV into dicts; empty cells become None."""
    with open(path, "r", encoding="ascii") as fh:
        head = fh.readline().strip()
        parts = head.split()
        if len(parts) != 3 or parts[0] != "#" or parts[1] != _METRICS_FORMAT:
            raise FormatError(f"not a metrics file: first line {head!r}")
        if int(parts[2]) != _METRICS_VERSION:
            raise FormatError(f"unknown metrics format version {parts[2]}")
        header = fh.readline().strip().split(",")
        if tuple(header) != METRICS_COLUMNS:
            raise FormatError(f"unexpected metrics columns {header}")
        out = []
        for line in fh:
            cells = line.rstrip("\n").split(",")
            if len(cells) != len(METRICS_COLUMNS):
                raise FormatError(f"row has {len(cells)} cells: {line!r}")
            rec = {}
            for name, cell in zip(METRICS_COLUMNS, cells):
                if cell == "":
                    rec[name] = None
                elif name == "iter":
                    rec[name] = int(cell)
                else:
                    rec[name] = float(cell)
            out.append(rec)
    return out


# ---------------------------------------------------------------------------
# checkpoints


_CHECKPOINT_FORMAT = "deltapinn-checkpoint"
_CHECKPOINT_VERSION = 1


def save_checkpoint(path: str | os.PathLike, net: MultiScaleSiren) -> None:
    """Versioned header plus the flat parameters as little-endian float64."""
    c = net.config
    flat = net.flat_params()
    lines = [
        f"{_CHECKPOINT_FORMAT} {_CHECKPOINT_VERSION}",
        f"in_dim {c.in_dim}",
        f"out_dim {c.out_dim}",
        f"num_subnets {c.num_subnets}",
        f"layers {c.layers}",
        f"width {c.width}",
        f"activation {c.activation}",
        f"skip {int(c.skip)}",
        "scales " + " ".join(_fmt(s) for s in c.scales),
        f"param_count {flat.size}",
        "data",
    ]
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("ascii"))
        fh.write(flat.astype("<f8").tobytes())


def load_checkpoint(path: str | os.PathLike) -> MultiScaleSiren:
    with open(path, "rb") as fh:
        first = fh.readline().decode("ascii").split()
        if len(first) != 2 or first[0] != _CHECKPOINT_FORMAT:
            raise FormatError(f"not a checkpoint file: {path}")
        if int(first[1]) != _CHECKPOINT_VERSION:
            raise FormatError(f"unknown checkpoint format version {first[1]}")
        fields: dict[str, str] = {}
        while True:
            line = fh.readline().decode("ascii").strip()
            if line == "data":
                break
            if not line:
                raise FormatError("checkpoint header ended before 'data'")
            key, _, value = line.partition(" ")
            fields[key] = value
        try:
            config = NetConfig(
                in_dim=int(fields["in_dim"]),
                out_dim=int(fields["out_dim"]),
                num_subnets=int(fields["num_subnets"]),
                layers=int(fields["layers"]),
                width=int(fields["width"]),
                activation=fields["activation"],
                skip=bool(int(fields["skip"])),
                scales=tuple(float(s) for s in fields["scales"].split()),
            )
            count = int(fields["param_count"])
        except KeyError as e:
            raise FormatError(f"checkpoint header missing field {e}") from e
        blob = fh.read()
    if count != config.param_count():
        raise FormatError(
            f"header param_count {count} does not match the architecture"
        )
    if len(blob) != 8 * count:
        raise FormatError(
            f"checkpoint data holds {len(blob)} bytes, expected {8 * count}"
        )
    net = MultiScaleSiren(config, seed=0)
    net.load_flat(np.frombuffer(blob, dtype="<f8"))
    return net


# ---------------------------------------------------------------------------
# training loop


@dataclass
class TrainResult:
    net: MultiScaleSiren
    weights: np.ndarray | None
    records: list[MetricsRecord]


def predict(net: MultiScaleSiren, points: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Plain forward values over many points, chunked to bound memory."""
    parts = [
        net.derivatives(points[i : i + chunk], order=0).value_array()
        for i in range(0, points.shape[0], chunk)
    ]
    return np.concatenate(parts, axis=0)


def _active_term_names(problem, batches: BatchSizes) -> list[str]:
    names = ["r0", "r1"]
    if problem.domain.time is not None and batches.initial > 0:
        names.append("ic")
    names.append("bc")
    return names


def _nonfinite_term(terms, pvars) -> str:
    """Name the loss term responsible for a non-finite gradient."""
    for name, term in terms.active():
        if not np.isfinite(term.data):
            return name
    for name, term in terms.active():
        try:
            grads = engine.backward(term, pvars)
        except NumericError:
            return name
        if any(not np.isfinite(g).all() for g in grads):
            return name
    return "unknown"


def train(
    problem,
    net: MultiScaleSiren,
    weights: np.ndarray | None,
    config: TrainConfig,
    *,
    weighting: WeightingConfig | None = None,
    schedule: WidthSchedule | None = None,
    reference=None,
    metrics_stream: io.TextIOBase | None = None,
    checkpoint_dir: str | os.PathLike | None = None,
) -> TrainResult:
    """Optimize (net params, loss weights) on freshly sampled batches.

    `reference` (points/values/mask) enables relative-L2 evaluation every
    `config.eval_every` iterations. With `metrics_stream` records stream out
    as they are produced; they are returned either way.
    """
    weighting = weighting if weighting is not None else WeightingConfig()
    schedule = schedule if schedule is not None else WidthSchedule()
    term_names = _active_term_names(problem, config.batches)

    adaptive = weighting.mode == "uncertainty"
    if adaptive:
        w = np.array(
            init_weights(len(term_names)) if weights is None else weights,
            dtype=np.float64,
        )
        if w.size != len(term_names):
            raise ValueError(
                f"{w.size} weights for {len(term_names)} active loss terms"
            )
    else:
        w = None
        lambdas = weighting.fixed_lambdas or (1.0,) * len(term_names)
        if len(lambdas) != len(term_names):
            raise ValueError(
                f"{len(lambdas)} lambdas for {len(term_names)} active loss terms"
            )

    n_theta = net.param_count()
    pvec = net.flat_params()
    if adaptive:
        pvec = np.concatenate([pvec, w])
    state = AdamState.zeros(pvec.size)

    if metrics_stream is not None:
        metrics_stream.write(f"# {_METRICS_FORMAT} {_METRICS_VERSION}\n")
        metrics_stream.write(",".join(METRICS_COLUMNS) + "\n")

    records: list[MetricsRecord] = []
    source = problem.source
    for it in range(config.iterations):
        alpha = schedule.alpha_at(it)
        batch = sample_batch(
            problem.domain,
            source.location,
            source.ball_radius(alpha),
            config.batches,
            config.seed,
            it,
        )
        net.load_flat(pvec[:n_theta])
        pvars = net.param_vars()
        try:
            terms = compute_terms(net, problem, batch, alpha, param_vars=pvars)
        except NumericError as e:
            raise DivergenceError(f"iteration {it}: {e}") from e
        bad = [n for n, t in terms.active() if not np.isfinite(t.data)]
        if bad:
            raise DivergenceError(
                f"non-finite loss term {bad[0]} at iteration {it}"
            )
        if adaptive:
            w_var = Var(pvec[n_theta:].copy(), requires_grad=True)
            total = uncertainty_total(terms, w_var, weighting.epsilon)
            wrt = pvars + [w_var]
        else:
            total = fixed_total(terms, lambdas)
            wrt = pvars
        try:
            grads = engine.backward(total, wrt)
        except NumericError as e:
            raise DivergenceError(f"iteration {it}: {e}") from e
        g = np.concatenate([a.ravel() for a in grads])
        if not np.isfinite(g).all():
            raise DivergenceError(
                f"non-finite gradient from loss term "
                f"{_nonfinite_term(terms, pvars)} at iteration {it}"
            )

        record = MetricsRecord(
            iteration=it,
            losses=terms.values(),
            lr=lr_at(config, it),
            alpha=alpha,
        )
        if adaptive:
            eps2 = weighting.epsilon**2
            record.sigmas = {
                name: eps2 + pvec[n_theta + k] ** 2
                for k, name in enumerate(term_names)
            }
        evaluate = (
            reference is not None
            and config.eval_every > 0
            and (it % config.eval_every == 0 or it == config.iterations - 1)
        )
        if evaluate:
            pred = predict(net, reference.points)
            per_component, mean = relative_l2(
                pred, reference.values, mask=reference.mask
            )
            record.l2_mean = mean
            record.l2_components = tuple(per_component)
        records.append(record)
        if metrics_stream is not None:
            metrics_stream.write(",".join(record.to_row()) + "\n")

        pvec, state = adam_step(
            pvec,
            g,
            state,
            record.lr,
            (config.beta1, config.beta2),
            config.adam_eps,
        )

        if (
            checkpoint_dir is not None
            and config.checkpoint_every > 0
            and (it + 1) % config.checkpoint_every == 0
        ):
            net.load_flat(pvec[:n_theta])
            save_checkpoint(
                os.path.join(checkpoint_dir, f"ckpt_{it + 1:08d}.bin"), net
            )

    net.load_flat(pvec[:n_theta])
    if checkpoint_dir is not None:
        save_checkpoint(os.path.join(checkpoint_dir, "final.bin"), net)
    return TrainResult(
        net=net,
        weights=pvec[n_theta:].copy() if adaptive else None,
        records=records,
    )
