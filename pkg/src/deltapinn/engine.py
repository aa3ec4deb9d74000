"""Reverse-mode differentiation over a restricted numpy primitive set.

The PDE residuals used here need the network's first and second derivatives
with respect to its *inputs*, and the optimizer needs the gradient of a scalar
loss built from those derivatives with respect to the network *parameters*
(a third-order chain overall). Rather than nesting a general-purpose tape,
this module propagates packed jets (value, input-Jacobian, upper-triangular
input-Hessian) forward through each layer with closed-form rules -- cheap
because the input dimension is at most 3 -- and then runs plain first-order
reverse mode over that extended forward computation.

Everything is float64. All primitives are deterministic, so two evaluations
of the same graph on the same data are bit-identical.

Jet layout: a jet array has shape (batch, C, width) where the component axis
holds [value, d/dx_0 .. d/dx_{d-1}, d2/dx_i dx_j for i <= j in row-major
order]. C = 1, 1+d, or 1+d+d(d+1)/2 for derivative order 0, 1, 2.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericError, UnsupportedPrimitiveError

__all__ = [
    "Var",
    "DerivativeBundle",
    "jet_components",
    "jet_pairs",
    "input_jet",
    "jet_linear",
    "activation_jet",
    "backward",
    "apply_primitive",
    "PRIMITIVES",
]


def _as_array(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    return a


class Var:
    """A node in the computation graph: a float64 array plus its provenance."""

    __slots__ = ("data", "requires_grad", "_parents", "_vjp")

    def __init__(self, data, parents=(), vjp=None, requires_grad=False):
        self.data = _as_array(data)
        rg = requires_grad or any(p.requires_grad for p in parents)
        self.requires_grad = rg
        # Graph edges are only kept where a gradient can flow.
        self._parents = parents if rg else ()
        self._vjp = vjp if rg else None

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Var(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # Arithmetic operators route through the primitive registry so that the
    # supported-operation surface is a single explicit list.
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        if exponent == 2:
            return square(self)
        raise UnsupportedPrimitiveError(
            f"power {exponent!r} is not a supported primitive (only squaring)"
        )


def _wrap(x) -> Var:
    return x if isinstance(x, Var) else Var(x)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a broadcast gradient back down to the original operand shape."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


# ---------------------------------------------------------------------------
# elementwise and reduction primitives


def add(a, b):
    a, b = _wrap(a), _wrap(b)
    out = a.data + b.data

    def vjp(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)

    return Var(out, (a, b), vjp)


def sub(a, b):
    a, b = _wrap(a), _wrap(b)
    out = a.data - b.data

    def vjp(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(-g, b.data.shape)

    return Var(out, (a, b), vjp)


def neg(a):
    a = _wrap(a)

    def vjp(g):
        return (-g,)

    return Var(-a.data, (a,), vjp)


def mul(a, b):
    a, b = _wrap(a), _wrap(b)
    out = a.data * b.data

    def vjp(g):
        return (
            _unbroadcast(g * b.data, a.data.shape),
            _unbroadcast(g * a.data, b.data.shape),
        )

    return Var(out, (a, b), vjp)


def div(a, b):
    a, b = _wrap(a), _wrap(b)
    out = a.data / b.data

    def vjp(g):
        ga = _unbroadcast(g / b.data, a.data.shape)
        gb = _unbroadcast(-g * out / b.data, b.data.shape)
        return ga, gb

    return Var(out, (a, b), vjp)


def square(a):
    a = _wrap(a)

    def vjp(g):
        return (2.0 * a.data * g,)

    return Var(a.data * a.data, (a,), vjp)


def sin(a):
    a = _wrap(a)

    def vjp(g):
        return (np.cos(a.data) * g,)

    return Var(np.sin(a.data), (a,), vjp)


def cos(a):
    a = _wrap(a)

    def vjp(g):
        return (-np.sin(a.data) * g,)

    return Var(np.cos(a.data), (a,), vjp)


def log(a):
    a = _wrap(a)

    def vjp(g):
        return (g / a.data,)

    return Var(np.log(a.data), (a,), vjp)


def sum_(a):
    a = _wrap(a)

    def vjp(g):
        return (np.broadcast_to(g, a.data.shape).copy(),)

    return Var(a.data.sum(), (a,), vjp)


def mean(a):
    a = _wrap(a)
    n = a.data.size

    def vjp(g):
        return (np.broadcast_to(g / n, a.data.shape).copy(),)

    return Var(a.data.mean(), (a,), vjp)


def take(a, index):
    """Static basic indexing (used to pull single entries out of jets)."""
    a = _wrap(a)
    out = a.data[index]

    def vjp(g):
        full = np.zeros_like(a.data)
        full[index] = g
        return (full,)

    return Var(out, (a,), vjp)


def concat(parts):
    """Concatenate 1-D vectors (used to assemble the trainable weight vector)."""
    parts = [_wrap(p) for p in parts]
    sizes = [p.data.size for p in parts]
    out = np.concatenate([p.data.ravel() for p in parts])
    offsets = np.cumsum([0] + sizes)

    def vjp(g):
        return tuple(
            g[offsets[i] : offsets[i + 1]].reshape(p.data.shape)
            for i, p in enumerate(parts)
        )

    return Var(out, tuple(parts), vjp)


# ---------------------------------------------------------------------------
# jet primitives


def jet_components(in_dim: int, order: int) -> int:
    if order == 0:
        return 1
    if order == 1:
        return 1 + in_dim
    if order == 2:
        return 1 + in_dim + in_dim * (in_dim + 1) // 2
    raise ValueError(f"derivative order must be 0, 1, or 2, got {order}")


def jet_pairs(in_dim: int) -> list[tuple[int, int]]:
    """Upper-triangle (i, j) index pairs in packed storage order."""
    return [(i, j) for i in range(in_dim) for j in range(i, in_dim)]


def input_jet(points: np.ndarray, scale: float, order: int) -> np.ndarray:
    """Seed jet for coordinates entering a subnet as scale * x.

    Derivatives are taken with respect to the unscaled coordinates, so the
    Jacobian block is scale * I and the Hessian block is zero.
    """
    pts = _as_array(points)
    batch, d = pts.shape
    jet = np.zeros((batch, jet_components(d, order), d))
    jet[:, 0, :] = scale * pts
    if order >= 1:
        for i in range(d):
            jet[:, 1 + i, i] = scale
    return jet


def jet_linear(jet, weight, bias):
    """Affine layer applied to every jet component; bias hits the value row."""
    jet, weight, bias = _wrap(jet), _wrap(weight), _wrap(bias)
    b, c, k = jet.data.shape
    o = weight.data.shape[0]
    out = (jet.data.reshape(b * c, k) @ weight.data.T).reshape(b, c, o)
    out[:, 0, :] += bias.data

    def vjp(g):
        g2 = g.reshape(b * c, o)
        d_jet = (g2 @ weight.data).reshape(b, c, k)
        d_w = g2.T @ jet.data.reshape(b * c, k)
        d_b = g[:, 0, :].sum(axis=0)
        return d_jet, d_w, d_b

    return Var(out, (jet, weight, bias), vjp)


def _sine_table(z0, depth):
    s = np.sin(z0)
    c = np.cos(z0)
    return (s, c, -s, -c)[: depth + 1]


def _tanh_table(z0, depth):
    t = np.tanh(z0)
    out = [t]
    if depth >= 1:
        f1 = 1.0 - t * t
        out.append(f1)
        if depth >= 2:
            out.append(-2.0 * t * f1)
            if depth >= 3:
                out.append(-2.0 * f1 * (1.0 - 3.0 * t * t))
    return tuple(out)


def _relu_table(z0, depth):
    pos = (z0 > 0.0).astype(np.float64)
    out = [z0 * pos]
    if depth >= 1:
        out.append(pos)
        # Higher derivatives vanish almost everywhere.
        out.extend([None] * (depth - 1))
    return tuple(out)


_ACTIVATION_TABLES = {
    "sine": _sine_table,
    "tanh": _tanh_table,
    "relu": _relu_table,
}

ACTIVATIONS = tuple(_ACTIVATION_TABLES)


def activation_jet(jet, activation: str, in_dim: int, order: int):
    """Apply a pointwise activation to a jet via its chain-rule expansion.

    With f = activation, z the value row, J the Jacobian rows and H the packed
    Hessian rows:  value -> f(z);  J_i -> f'(z) J_i;
    H_ij -> f''(z) J_i J_j + f'(z) H_ij.
    """
    try:
        table = _ACTIVATION_TABLES[activation]
    except KeyError:
        raise UnsupportedPrimitiveError(
            f"unknown activation {activation!r}; expected one of {ACTIVATIONS}"
        ) from None
    jet = _wrap(jet)
    z = jet.data
    z0 = z[:, 0, :]
    pairs = jet_pairs(in_dim) if order == 2 else []
    # Backward needs one derivative order beyond the forward expansion.
    fs = table(z0, order + 1)
    f0 = fs[0]
    out = np.empty_like(z)
    out[:, 0, :] = f0
    if order >= 1:
        f1 = fs[1]
        out[:, 1 : 1 + in_dim, :] = f1[:, None, :] * z[:, 1 : 1 + in_dim, :]
    if order == 2:
        f2 = fs[2]
        base = 1 + in_dim
        for p, (i, j) in enumerate(pairs):
            zi = z[:, 1 + i, :]
            zj = z[:, 1 + j, :]
            h = f1 * z[:, base + p, :]
            if f2 is not None:
                h = h + f2 * zi * zj
            out[:, base + p, :] = h

    def vjp(g):
        dz = np.empty_like(z)
        g0 = g[:, 0, :]
        if order == 0:
            dz[:, 0, :] = fs[1] * g0 if fs[1] is not None else 0.0
            return (dz,)
        f1 = fs[1]
        f2 = fs[2]
        g1 = g[:, 1 : 1 + in_dim, :]
        z1 = z[:, 1 : 1 + in_dim, :]
        dz0 = f1 * g0
        if f2 is not None:
            dz0 += f2 * (g1 * z1).sum(axis=1)
        dz1 = f1[:, None, :] * g1
        if order == 2:
            f3 = fs[3]
            base = 1 + in_dim
            for p, (i, j) in enumerate(pairs):
                gp = g[:, base + p, :]
                zi = z[:, 1 + i, :]
                zj = z[:, 1 + j, :]
                hp = z[:, base + p, :]
                if f2 is not None:
                    cross = f3 * zi * zj if f3 is not None else 0.0
                    dz0 += gp * (cross + f2 * hp)
                    dz1[:, i, :] += gp * f2 * zj
                    dz1[:, j, :] += gp * f2 * zi
                dz[:, base + p, :] = f1 * gp
        dz[:, 0, :] = dz0
        dz[:, 1 : 1 + in_dim, :] = dz1
        return (dz,)

    return Var(out, (jet,), vjp)


# ---------------------------------------------------------------------------
# reverse pass


def backward(root: Var, wrt: list[Var]) -> list[np.ndarray]:
    """Gradient of a scalar root with respect to the given leaf variables.

    Traversal and accumulation orders are fixed by graph construction order,
    so repeated calls on identical graphs produce bit-identical results.
    Intermediate gradients are freed as soon as they have been consumed.
    """
    if root.data.size != 1:
        raise ValueError(f"backward needs a scalar root, got shape {root.data.shape}")
    if not np.isfinite(root.data):
        raise NumericError("backward called on a non-finite scalar")
    wanted = {id(v) for v in wrt}

    topo: list[Var] = []
    state: dict[int, bool] = {}
    stack: list[Var] = [root]
    while stack:
        node = stack[-1]
        nid = id(node)
        if nid not in state:
            state[nid] = False
            for p in node._parents:
                if p.requires_grad and id(p) not in state:
                    stack.append(p)
            continue
        stack.pop()
        if not state[nid]:
            state[nid] = True
            topo.append(node)

    grads: dict[int, np.ndarray] = {id(root): np.ones_like(root.data)}
    for node in reversed(topo):
        nid = id(node)
        g = grads.get(nid)
        if g is None:
            continue
        if node._vjp is not None:
            for parent, pg in zip(node._parents, node._vjp(g)):
                if pg is None or not parent.requires_grad:
                    continue
                pid = id(parent)
                held = grads.get(pid)
                grads[pid] = pg if held is None else held + pg
        if nid not in wanted:
            del grads[nid]
    return [grads.get(id(v), np.zeros_like(v.data)) for v in wrt]


# Iterative DFS above marks a node done only after all parents are scheduled;
# re-visits through the `state` map keep shared subgraphs single-counted.


# ---------------------------------------------------------------------------
# derivative bundle


class DerivativeBundle:
    """Network outputs with their input derivatives, as live graph nodes.

    value(k)   -> (batch,) output component k
    d1(k, i)   -> (batch,) d out_k / d x_i
    d2(k, i, j)-> (batch,) d2 out_k / d x_i d x_j  (symmetric storage)

    The returned nodes stay connected to the parameters, so losses built from
    them differentiate all the way back through the jet propagation.
    """

    def __init__(self, jet: Var, in_dim: int, order: int):
        self.jet = jet
        self.in_dim = in_dim
        self.order = order
        self.out_dim = jet.data.shape[2]
        self._pair_pos = {p: n for n, p in enumerate(jet_pairs(in_dim))}
        self._cache: dict[tuple, Var] = {}

    def _take(self, comp: int, k: int) -> Var:
        key = (comp, k)
        node = self._cache.get(key)
        if node is None:
            node = take(self.jet, (slice(None), comp, k))
            self._cache[key] = node
        return node

    def value(self, k: int = 0) -> Var:
        return self._take(0, k)

    def d1(self, k: int, i: int) -> Var:
        if self.order < 1:
            raise ValueError("bundle was built with order 0; no first derivatives")
        return self._take(1 + i, k)

    def d2(self, k: int, i: int, j: int) -> Var:
        if self.order < 2:
            raise ValueError(f"bundle was built with order {self.order}; no Hessians")
        pos = self._pair_pos[(i, j) if i <= j else (j, i)]
        return self._take(1 + self.in_dim + pos, k)

    def value_array(self) -> np.ndarray:
        """(batch, out_dim) plain values."""
        return self.jet.data[:, 0, :]

    def grad_array(self) -> np.ndarray:
        """(batch, out_dim, in_dim) plain first derivatives."""
        return np.transpose(self.jet.data[:, 1 : 1 + self.in_dim, :], (0, 2, 1))

    def hess_array(self) -> np.ndarray:
        """(batch, out_dim, in_dim, in_dim) symmetric second derivatives."""
        b = self.jet.data.shape[0]
        d = self.in_dim
        full = np.empty((b, self.out_dim, d, d))
        base = 1 + d
        for p, (i, j) in enumerate(jet_pairs(d)):
            block = self.jet.data[:, base + p, :]
            full[:, :, i, j] = block
            full[:, :, j, i] = block
        return full


# ---------------------------------------------------------------------------
# primitive registry

PRIMITIVES = {
    "add": add,
    "sub": sub,
    "neg": neg,
    "mul": mul,
    "div": div,
    "square": square,
    "sin": sin,
    "cos": cos,
    "log": log,
    "sum": sum_,
    "mean": mean,
    "take": take,
    "concat": concat,
    "jet_linear": jet_linear,
    "activation_jet": activation_jet,
}


def apply_primitive(name: str, *args, **kwargs):
    """Dispatch an operation by name, rejecting anything outside the set."""
    try:
        fn = PRIMITIVES[name]
    except KeyError:
        raise UnsupportedPrimitiveError(
            f"{name!r} is not a supported primitive; supported: {sorted(PRIMITIVES)}"
        ) from None
    return fn(*args, **kwargs)
