import math

import numpy as np
import pytest

from deltapinn.config import (
    CONFIG_FORMAT_LINE,
    parse_config_text,
    parse_override,
    render_config,
    resolve_config,
)
from deltapinn.errors import ConfigError, FormatError


# -- parsing ----------------------------------------------------------------


def test_parse_basic_pairs_and_comments():
    text = """
# a comment
problem.name = poisson   # trailing comment
trainer.seed = 3

net.width = 64
"""
    pairs = parse_config_text(text)
    assert pairs == {
        "problem.name": "poisson",
        "trainer.seed": "3",
        "net.width": "64",
    }


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ConfigError, match="run.cfg:2"):
        parse_config_text("# ok\nnot a pair\n", origin="run.cfg")
    with pytest.raises(ConfigError, match=":1.*malformed key"):
        parse_config_text("nosection = 1\n")
    with pytest.raises(ConfigError, match=":1.*empty value"):
        parse_config_text("trainer.seed =\n")
    with pytest.raises(ConfigError, match=":3.*duplicate"):
        parse_config_text("a.b = 1\n\na.b = 2\n")


def test_parse_rejects_unknown_format_version():
    with pytest.raises(FormatError):
        parse_config_text("# deltapinn-config 99\nproblem.name = poisson\n")
    # a matching version line is accepted
    pairs = parse_config_text(CONFIG_FORMAT_LINE + "\nproblem.name = poisson\n")
    assert pairs["problem.name"] == "poisson"


def test_parse_override():
    assert parse_override("trainer.lr0=0.01") == ("trainer.lr0", "0.01")
    assert parse_override(" net.width = 32 ") == ("net.width", "32")
    with pytest.raises(ConfigError):
        parse_override("trainer.lr0")
    with pytest.raises(ConfigError):
        parse_override("=5")


# -- schema validation ------------------------------------------------------


def test_problem_name_required_and_checked():
    with pytest.raises(ConfigError, match="problem.name"):
        resolve_config({})
    with pytest.raises(ConfigError, match="problem.name"):
        resolve_config({"problem.name": "heat"})


def test_unknown_key_rejected_by_name():
    with pytest.raises(ConfigError, match="trainer.momentum"):
        resolve_config({"problem.name": "poisson", "trainer.momentum": "0.9"})


def test_key_for_wrong_problem_rejected():
    with pytest.raises(ConfigError, match="problem.tau"):
        resolve_config({"problem.name": "poisson", "problem.tau": "0.1"})
    with pytest.raises(ConfigError, match="reference.terms"):
        resolve_config({"problem.name": "maxwell", "reference.terms": "100"})
    with pytest.raises(ConfigError, match="problem.omega"):
        resolve_config({"problem.name": "maxwell", "problem.omega": "1.0"})


def test_explicit_uncertainty_mode_requires_epsilon():
    with pytest.raises(ConfigError, match="weighting.epsilon"):
        resolve_config(
            {"problem.name": "poisson", "weighting.mode": "uncertainty"}
        )
    run = resolve_config(
        {
            "problem.name": "poisson",
            "weighting.mode": "uncertainty",
            "weighting.epsilon": "0.001",
        }
    )
    assert run.weighting.epsilon == 0.001
    # absent mode: defaults fill in silently
    run = resolve_config({"problem.name": "poisson"})
    assert run.weighting.mode == "uncertainty"
    assert run.weighting.epsilon == 0.01


def test_fixed_lambdas_need_fixed_mode():
    with pytest.raises(ConfigError, match="fixed_lambdas"):
        resolve_config(
            {"problem.name": "poisson", "weighting.fixed_lambdas": "1 1 1"}
        )
    run = resolve_config(
        {
            "problem.name": "poisson",
            "weighting.mode": "fixed",
            "weighting.fixed_lambdas": "1 2 3",
        }
    )
    assert run.weighting.fixed_lambdas == (1.0, 2.0, 3.0)


def test_type_errors_name_the_key():
    with pytest.raises(ConfigError, match="trainer.iterations"):
        resolve_config({"problem.name": "poisson", "trainer.iterations": "many"})
    with pytest.raises(ConfigError, match="trainer.lr0"):
        resolve_config({"problem.name": "poisson", "trainer.lr0": "fast"})
    with pytest.raises(ConfigError, match="trainer.lr0"):
        resolve_config({"problem.name": "poisson", "trainer.lr0": "inf"})
    with pytest.raises(ConfigError, match="net.skip"):
        resolve_config({"problem.name": "poisson", "net.skip": "yes"})


def test_choice_errors_name_the_key():
    with pytest.raises(ConfigError, match="problem.kernel"):
        resolve_config({"problem.name": "poisson", "problem.kernel": "epanechnikov"})
    with pytest.raises(ConfigError, match="net.activation"):
        resolve_config({"problem.name": "poisson", "net.activation": "gelu"})


def test_constructor_invariants_surface_as_config_errors():
    with pytest.raises(ConfigError, match="net"):
        resolve_config({"problem.name": "poisson", "net.layers": "1"})
    with pytest.raises(ConfigError, match="trainer"):
        resolve_config({"problem.name": "poisson", "trainer.milestones": "0.8 0.4"})
    with pytest.raises(ConfigError, match="trainer"):
        resolve_config({"problem.name": "poisson", "trainer.batch_interior0": "0"})


def test_center_comes_as_pair():
    with pytest.raises(ConfigError, match="center"):
        resolve_config({"problem.name": "poisson", "problem.center_x": "1.0"})
    run = resolve_config(
        {
            "problem.name": "poisson",
            "problem.center_x": "1.0",
            "problem.center_y": "2.0",
        }
    )
    assert run.problem.center == (1.0, 2.0)


def test_batch_initial_zero_for_steady_nonzero_for_time():
    run = resolve_config({"problem.name": "poisson"})
    assert run.trainer.batches.initial == 0
    run = resolve_config({"problem.name": "maxwell"})
    assert run.trainer.batches.initial == 2048
    run = resolve_config({"problem.name": "barry_mercer"})
    assert run.trainer.batches.initial == 2048
    with pytest.raises(ConfigError, match="batch_initial"):
        resolve_config({"problem.name": "poisson", "trainer.batch_initial": "64"})


# -- resolution and defaults ------------------------------------------------


def test_poisson_defaults_resolve():
    run = resolve_config({"problem.name": "poisson"})
    assert run.problem.name == "poisson"
    assert run.problem.center == (math.pi / 2, math.pi / 2)
    assert run.net.num_subnets == 4
    assert run.net.scales == (1.0, 2.0, 4.0, 8.0)
    assert run.net.in_dim == 2 and run.net.out_dim == 1
    assert run.schedule.alpha0 == 0.01
    assert run.trainer.iterations == 10000
    assert run.trainer.lr0 == 0.001
    assert run.trainer.milestones == (0.4, 0.6, 0.8)
    assert run.reference == {"terms": 400, "mesh": 101}


def test_maxwell_defaults_resolve():
    run = resolve_config({"problem.name": "maxwell"})
    assert run.problem.tau == 0.05
    assert run.problem.delay == 0.1
    assert run.net.in_dim == 3 and run.net.out_dim == 3
    assert run.reference == {
        "resolution": 0.005,
        "courant": 0.5,
        "snapshots": (0.3, 0.6, 0.9),
    }


def test_scales_length_checked_against_subnets():
    with pytest.raises(ConfigError, match="net"):
        resolve_config(
            {"problem.name": "poisson", "net.num_subnets": "2", "net.scales": "1 2 4"}
        )
    run = resolve_config(
        {"problem.name": "poisson", "net.num_subnets": "2", "net.scales": "1 3"}
    )
    assert run.net.scales == (1.0, 3.0)


def test_overrides_take_precedence():
    run = resolve_config(
        {"problem.name": "poisson", "trainer.seed": "1"},
        overrides=[("trainer.seed", "9"), ("net.width", "32")],
    )
    assert run.trainer.seed == 9
    assert run.net.width == 32


# -- manifest round trip ----------------------------------------------------


def test_manifest_round_trips_to_identical_resolution():
    run = resolve_config(
        {"problem.name": "maxwell", "trainer.lr0": "0.0003", "net.width": "48"}
    )
    manifest = render_config(run.resolved, header_notes=["written by a test"])
    assert manifest.splitlines()[0] == CONFIG_FORMAT_LINE
    again = resolve_config(parse_config_text(manifest))
    assert again.resolved == run.resolved
    assert again.problem == run.problem
    assert again.net == run.net
    assert again.trainer == run.trainer
    assert again.weighting == run.weighting
    assert again.reference == run.reference


def test_manifest_renders_floats_shortest_exact():
    run = resolve_config({"problem.name": "poisson", "trainer.lr0": "0.1"})
    assert "trainer.lr0 = 0.1" in render_config(run.resolved)
    assert run.resolved["source.alpha0"] == "0.01"


def test_manifest_lines_are_sorted():
    run = resolve_config({"problem.name": "poisson"})
    body = [
        line for line in render_config(run.resolved).splitlines()
        if not line.startswith("#")
    ]
    keys = [line.split(" = ")[0] for line in body]
    assert keys == sorted(keys)
