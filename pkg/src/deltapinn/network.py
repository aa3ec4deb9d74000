"""Multi-scale sine networks.

Several SIREN-style subnets see the same coordinates multiplied by different
fixed scales, so each subnet resolves a different frequency band; the network
output is the mean of the subnet outputs. Hidden layers use sine activations
(tanh/relu variants exist for ablations) with identity skip connections
between consecutive hidden layers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import engine
from .engine import DerivativeBundle, Var
from .errors import NumericError

__all__ = ["NetConfig", "MultiScaleSiren", "default_scales"]

_INIT_STREAM = 0  # spawn key separating init draws from sampling draws


def default_scales(num_subnets: int) -> tuple[float, ...]:
    """Powers of two, one per subnet: (1, 2, 4, ...)."""
    return tuple(float(2**i) for i in range(num_subnets))


@dataclass(frozen=True)
class NetConfig:
    in_dim: int
    out_dim: int
    num_subnets: int = 4
    layers: int = 7  # sine layers per subnet; the linear head is extra
    width: int = 64
    activation: str = "sine"
    skip: bool = True  # identity skips between consecutive hidden layers
    scales: tuple[float, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.scales is None:
            object.__setattr__(self, "scales", default_scales(self.num_subnets))
        else:
            object.__setattr__(self, "scales", tuple(float(s) for s in self.scales))
        if self.num_subnets < 1:
            raise ValueError("num_subnets must be >= 1")
        if self.layers < 2:
            raise ValueError("layers must be >= 2")
        if self.width < 1 or self.in_dim < 1 or self.out_dim < 1:
            raise ValueError("width, in_dim, out_dim must be positive")
        if len(self.scales) != self.num_subnets:
            raise ValueError(
                f"got {len(self.scales)} scales for {self.num_subnets} subnets"
            )
        if any(s <= 0 for s in self.scales):
            raise ValueError("scales must be positive")
        if self.activation not in engine.ACTIVATIONS:
            raise ValueError(
                f"activation must be one of {engine.ACTIVATIONS}, got {self.activation!r}"
            )

    def param_count(self) -> int:
        per_subnet = (
            (self.in_dim + 1) * self.width
            + (self.layers - 1) * (self.width + 1) * self.width
            + (self.width + 1) * self.out_dim
        )
        return self.num_subnets * per_subnet


class MultiScaleSiren:
    """Parameter container plus the jet-propagating forward pass.

    Parameter layout (also the flat/checkpoint order): subnets in order, each
    as W0, b0, ..., W_{L-1}, b_{L-1}, W_head, b_head. Weight rows are output
    units. First-layer weights are drawn from U(-1/in_dim, 1/in_dim), every
    later weight from U(-sqrt(6/fan_in), sqrt(6/fan_in)); biases start at zero.
    The same init is reused for the tanh/relu variants.
    """

    def __init__(self, config: NetConfig, seed: int = 0):
        self.config = config
        rng = np.random.default_rng([seed, _INIT_STREAM])
        self.params: list[np.ndarray] = []
        c = config
        for _ in range(c.num_subnets):
            bound = 1.0 / c.in_dim
            self.params.append(rng.uniform(-bound, bound, (c.width, c.in_dim)))
            self.params.append(np.zeros(c.width))
            bound = np.sqrt(6.0 / c.width)
            for _ in range(c.layers - 1):
                self.params.append(rng.uniform(-bound, bound, (c.width, c.width)))
                self.params.append(np.zeros(c.width))
            self.params.append(rng.uniform(-bound, bound, (c.out_dim, c.width)))
            self.params.append(np.zeros(c.out_dim))

    # -- parameter plumbing -------------------------------------------------

    def param_count(self) -> int:
        return self.config.param_count()

    def flat_params(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def load_flat(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != self.param_count():
            raise ValueError(
                f"flat vector has {flat.size} entries, net needs {self.param_count()}"
            )
        pos = 0
        for i, p in enumerate(self.params):
            n = p.size
            self.params[i] = flat[pos : pos + n].reshape(p.shape).copy()
            pos += n

    def param_vars(self) -> list[Var]:
        """Fresh graph leaves wrapping the current parameters."""
        return [Var(p, requires_grad=True) for p in self.params]

    # -- forward ------------------------------------------------------------

    def derivatives(
        self,
        points: np.ndarray,
        order: int = 2,
        param_vars: list[Var] | None = None,
    ) -> DerivativeBundle:
        """Evaluate outputs and input derivatives up to `order` at `points`.

        Pass `param_vars` (from param_vars()) to keep the result connected to
        the parameters for a later backward pass; without it the evaluation
        carries no graph and is cheaper.
        """
        c = self.config
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != c.in_dim:
            raise ValueError(f"points must be (batch, {c.in_dim}), got {pts.shape}")
        pv = param_vars if param_vars is not None else [Var(p) for p in self.params]
        per = 2 * c.layers + 2  # arrays per subnet in the layout
        trace: list[tuple[int, int, Var]] = []
        total = None
        for s in range(c.num_subnets):
            base = s * per
            jet: Var | np.ndarray = engine.input_jet(pts, c.scales[s], order)
            h = None
            for layer in range(c.layers):
                w = pv[base + 2 * layer]
                b = pv[base + 2 * layer + 1]
                z = engine.jet_linear(jet if h is None else h, w, b)
                a = engine.activation_jet(z, c.activation, c.in_dim, order)
                h = a if h is None or not c.skip else engine.add(a, h)
                trace.append((s, layer, h))
            out = engine.jet_linear(h, pv[base + 2 * c.layers], pv[base + 2 * c.layers + 1])
            trace.append((s, c.layers, out))
            total = out if total is None else engine.add(total, out)
        total = engine.mul(total, 1.0 / c.num_subnets)
        if not np.all(np.isfinite(total.data)):
            for s, layer, node in trace:
                if not np.all(np.isfinite(node.data)):
                    raise NumericError(
                        f"non-finite values after subnet {s} layer {layer}"
                    )
            raise NumericError("non-finite values in aggregated output")
        return DerivativeBundle(total, c.in_dim, order)
