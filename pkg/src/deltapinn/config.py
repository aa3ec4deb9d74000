"""Plain-text run configuration: `section.key = value` lines.

A config file holds one dotted key per line with `#` comments. Every key is
checked against the schema below before anything runs: unknown keys, wrong
types, values for the wrong problem, and failed invariants all raise
ConfigError naming the key (and the line for parse errors). `resolve_config`
fills defaults and returns both constructed objects and the canonical
key -> text mapping that `render_config` turns back into a manifest; feeding
that manifest back reproduces the run exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .errors import ConfigError, FormatError
from .losses import WeightingConfig
from .network import NetConfig, default_scales
from .problems import PROBLEM_NAMES, make_problem
from .sampling import BatchSizes
from .source import KERNELS, WidthSchedule
from .training import TrainConfig

__all__ = [
    "RunConfig",
    "parse_config_text",
    "parse_override",
    "resolve_config",
    "render_config",
    "CONFIG_FORMAT_LINE",
]

CONFIG_FORMAT = "deltapinn-config"
CONFIG_VERSION = 1
CONFIG_FORMAT_LINE = f"# {CONFIG_FORMAT} {CONFIG_VERSION}"


def _float(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise ConfigError(f"not a number: {s!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"value must be finite, got {s!r}")
    return v


def _int(s: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise ConfigError(f"not an integer: {s!r}") from None


def _floats(s: str) -> tuple[float, ...]:
    parts = s.replace(",", " ").split()
    if not parts:
        raise ConfigError("empty list")
    return tuple(_float(p) for p in parts)


def _str(s: str) -> str:
    return s


def _bool(s: str) -> bool:
    if s in ("true", "false"):
        return s == "true"
    raise ConfigError(f"expected true or false, got {s!r}")


@dataclass(frozen=True)
class _Key:
    parse: Callable[[str], object]
    default: str | None = None  # rendered default text; None = no default
    choices: tuple[str, ...] | None = None
    problems: tuple[str, ...] | None = None  # None = applies to every problem


_TIME_PROBLEMS = ("maxwell", "barry_mercer")

SCHEMA: dict[str, _Key] = {
    "problem.name": _Key(_str, choices=tuple(PROBLEM_NAMES)),
    "problem.kernel": _Key(_str, default="gaussian", choices=tuple(KERNELS)),
    "problem.center_x": _Key(_float),
    "problem.center_y": _Key(_float),
    "problem.tau": _Key(_float, problems=("maxwell",)),
    "problem.delay": _Key(_float, problems=("maxwell",)),
    "problem.beta": _Key(_float, problems=("barry_mercer",)),
    "problem.eta": _Key(_float, problems=("barry_mercer",)),
    "problem.omega": _Key(_float, problems=("barry_mercer",)),
    "net.num_subnets": _Key(_int, default="4"),
    "net.layers": _Key(_int, default="7"),
    "net.width": _Key(_int, default="64"),
    "net.activation": _Key(_str, default="sine", choices=("sine", "tanh", "relu")),
    "net.skip": _Key(_bool, default="true"),
    "net.scales": _Key(_floats),
    "source.alpha0": _Key(_float, default="0.01"),
    "source.schedule": _Key(_str, default="fixed", choices=("fixed", "halving")),
    "source.first_segment": _Key(_int, default="140000"),
    "source.halve_every": _Key(_int, default="70000"),
    "trainer.iterations": _Key(_int, default="10000"),
    "trainer.lr0": _Key(_float, default="0.001"),
    "trainer.milestones": _Key(_floats, default="0.4 0.6 0.8"),
    "trainer.decay": _Key(_float, default="0.1"),
    "trainer.beta1": _Key(_float, default="0.9"),
    "trainer.beta2": _Key(_float, default="0.999"),
    "trainer.adam_eps": _Key(_float, default="1e-08"),
    "trainer.batch_interior0": _Key(_int, default="2048"),
    "trainer.batch_interior1": _Key(_int, default="2048"),
    "trainer.batch_boundary": _Key(_int, default="2048"),
    "trainer.batch_initial": _Key(_int),  # default depends on the problem
    "trainer.eval_every": _Key(_int, default="1000"),
    "trainer.checkpoint_every": _Key(_int, default="0"),
    "trainer.seed": _Key(_int, default="0"),
    "weighting.mode": _Key(_str, default="uncertainty", choices=("fixed", "uncertainty")),
    "weighting.epsilon": _Key(_float, default="0.01"),
    "weighting.fixed_lambdas": _Key(_floats),
    "reference.terms": _Key(_int, default="400", problems=("poisson",)),
    "reference.modes": _Key(_int, default="64", problems=("barry_mercer",)),
    "reference.mesh": _Key(_int, problems=("poisson", "barry_mercer")),
    "reference.num_times": _Key(_int, default="8", problems=("barry_mercer",)),
    "reference.resolution": _Key(_float, default="0.005", problems=("maxwell",)),
    "reference.courant": _Key(_float, default="0.5", problems=("maxwell",)),
    "reference.snapshots": _Key(_floats, default="0.3 0.6 0.9", problems=("maxwell",)),
}


def parse_config_text(text: str, origin: str = "config") -> dict[str, str]:
    """Raw `key = value` pairs; syntax errors carry the line number."""
    first = text.lstrip().splitlines()[0].strip() if text.strip() else ""
    if first.startswith("#"):
        parts = first[1:].split()
        if len(parts) == 2 and parts[0] == CONFIG_FORMAT:
            if int(parts[1]) != CONFIG_VERSION:
                raise FormatError(
                    f"{origin}: unknown config format version {parts[1]}"
                )
    pairs: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{origin}:{lineno}: expected `key = value`, got {line!r}")
        key, _, value = body.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or "." not in key:
            raise ConfigError(f"{origin}:{lineno}: malformed key {key!r}")
        if not value:
            raise ConfigError(f"{origin}:{lineno}: empty value for {key}")
        if key in pairs:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key}")
        pairs[key] = value
    return pairs


def parse_override(text: str) -> tuple[str, str]:
    """One `key=value` command-line override."""
    key, sep, value = text.partition("=")
    key = key.strip()
    value = value.strip()
    if not sep or not key or not value:
        raise ConfigError(f"override must look like section.key=value, got {text!r}")
    return key, value


@dataclass
class RunConfig:
    problem: object
    net: NetConfig
    schedule: WidthSchedule
    trainer: TrainConfig
    weighting: WeightingConfig
    reference: dict[str, object]
    resolved: dict[str, str] = field(repr=False, default_factory=dict)


def _render_value(key: str, value: object) -> str:
    # repr of a float is the shortest text that parses back bit-identically
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return " ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def resolve_config(
    pairs: dict[str, str], overrides: list[tuple[str, str]] = ()
) -> RunConfig:
    merged = dict(pairs)
    for key, value in overrides:
        merged[key] = value

    unknown = [k for k in merged if k not in SCHEMA]
    if unknown:
        raise ConfigError(f"unknown config key {unknown[0]!r}")

    if "problem.name" not in merged:
        raise ConfigError("problem.name is required (poisson, maxwell, barry_mercer)")
    name = merged["problem.name"]
    entry = SCHEMA["problem.name"]
    if name not in entry.choices:
        raise ConfigError(
            f"problem.name must be one of {entry.choices}, got {name!r}"
        )

    for key in merged:
        allowed = SCHEMA[key].problems
        if allowed is not None and name not in allowed:
            raise ConfigError(
                f"{key} does not apply to problem {name!r} (only {allowed})"
            )

    # the lower-bounded weighting needs its epsilon floor stated explicitly
    if merged.get("weighting.mode") == "uncertainty" and "weighting.epsilon" not in merged:
        raise ConfigError(
            "weighting.epsilon is required when weighting.mode = uncertainty"
        )
    if "weighting.fixed_lambdas" in merged and merged.get(
        "weighting.mode", "uncertainty"
    ) != "fixed":
        raise ConfigError("weighting.fixed_lambdas needs weighting.mode = fixed")

    values: dict[str, object] = {}
    for key, raw in merged.items():
        entry = SCHEMA[key]
        try:
            value = entry.parse(raw)
        except ConfigError as e:
            raise ConfigError(f"{key}: {e}") from None
        if entry.choices is not None and value not in entry.choices:
            raise ConfigError(f"{key} must be one of {entry.choices}, got {value!r}")
        values[key] = value

    time_problem = name in _TIME_PROBLEMS
    for key, entry in SCHEMA.items():
        if key in values:
            continue
        if entry.problems is not None and name not in entry.problems:
            continue
        if key == "trainer.batch_initial":
            values[key] = 2048 if time_problem else 0
        elif key == "net.scales":
            values[key] = default_scales(values["net.num_subnets"])
        elif key == "weighting.fixed_lambdas":
            continue  # absent means unit weights
        elif key in ("problem.center_x", "problem.center_y"):
            continue  # problem constructor supplies its own center
        elif key == "reference.mesh":
            values[key] = 101 if name == "poisson" else 51
        elif entry.default is not None:
            values[key] = entry.parse(entry.default)

    if not time_problem and values.get("trainer.batch_initial", 0) > 0:
        raise ConfigError(
            "trainer.batch_initial must be 0 for the steady poisson problem"
        )
    if ("problem.center_x" in values) != ("problem.center_y" in values):
        raise ConfigError("problem.center_x and problem.center_y come as a pair")

    problem_kwargs: dict[str, object] = {"kernel": values["problem.kernel"]}
    if "problem.center_x" in values:
        problem_kwargs["center"] = (
            values["problem.center_x"],
            values["problem.center_y"],
        )
    for key in ("tau", "delay", "beta", "eta", "omega"):
        full = f"problem.{key}"
        if full in values:
            problem_kwargs[key] = values[full]
    try:
        problem = make_problem(name, **problem_kwargs)
    except ValueError as e:
        raise ConfigError(f"problem: {e}") from None

    try:
        net = NetConfig(
            in_dim=problem.in_dim,
            out_dim=problem.out_dim,
            num_subnets=values["net.num_subnets"],
            layers=values["net.layers"],
            width=values["net.width"],
            activation=values["net.activation"],
            skip=values["net.skip"],
            scales=values["net.scales"],
        )
    except ValueError as e:
        raise ConfigError(f"net: {e}") from None

    try:
        schedule = WidthSchedule(
            alpha0=values["source.alpha0"],
            mode=values["source.schedule"],
            first_segment=values["source.first_segment"],
            halve_every=values["source.halve_every"],
        )
    except ValueError as e:
        raise ConfigError(f"source: {e}") from None

    try:
        trainer = TrainConfig(
            iterations=values["trainer.iterations"],
            batches=BatchSizes(
                interior0=values["trainer.batch_interior0"],
                interior1=values["trainer.batch_interior1"],
                boundary=values["trainer.batch_boundary"],
                initial=values["trainer.batch_initial"],
            ),
            lr0=values["trainer.lr0"],
            milestones=values["trainer.milestones"],
            decay=values["trainer.decay"],
            beta1=values["trainer.beta1"],
            beta2=values["trainer.beta2"],
            adam_eps=values["trainer.adam_eps"],
            eval_every=values["trainer.eval_every"],
            checkpoint_every=values["trainer.checkpoint_every"],
            seed=values["trainer.seed"],
        )
    except ValueError as e:
        raise ConfigError(f"trainer: {e}") from None

    try:
        weighting = WeightingConfig(
            mode=values["weighting.mode"],
            epsilon=values["weighting.epsilon"],
            fixed_lambdas=values.get("weighting.fixed_lambdas"),
        )
    except ValueError as e:
        raise ConfigError(f"weighting: {e}") from None

    reference = {
        key.split(".", 1)[1]: value
        for key, value in values.items()
        if key.startswith("reference.")
    }

    resolved = {key: _render_value(key, value) for key, value in values.items()}
    return RunConfig(
        problem=problem,
        net=net,
        schedule=schedule,
        trainer=trainer,
        weighting=weighting,
        reference=reference,
        resolved=resolved,
    )


def render_config(resolved: dict[str, str], header_notes: list[str] = ()) -> str:
    """Manifest text: format-version line, notes, then sorted `key = value`."""
    lines = [CONFIG_FORMAT_LINE]
    lines.extend(f"# {note}" for note in header_notes)
    lines.extend(f"{key} = {resolved[key]}" for key in sorted(resolved))
    return "\n".join(lines) + "\n"
