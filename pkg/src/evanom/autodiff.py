"""Minimal dense-tensor engine with reverse-mode automatic differentiation.

Only the ops the two networks need. Tensors wrap numpy arrays; every op
returns a new tensor carrying a backward closure, and `backward` walks
the recorded DAG once in reverse topological order, so gradients are
bit-deterministic for a fixed graph. No op mutates its inputs. Training
code uses float32 storage; gradient checks run the same ops in float64.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit


class ShapeMismatch(ValueError):
    pass


class NotScalar(ValueError):
    pass


class DisconnectedParameter(UserWarning):
    pass


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_prev", "_back", "_op")

    def __init__(self, data, requires_grad: bool = False, dtype=None,
                 _prev=(), _back=None, _op="leaf"):
        self.data = np.asarray(data, dtype=dtype)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self._prev = _prev
        self._back = _back
        self._op = _op

    @property
    def shape(self):
        return self.data.shape

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False)

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.shape}, op={self._op})"


def _acc(t: Tensor, g: np.ndarray):
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g


def _result(data, inputs, back, op) -> Tensor:
    prev = tuple(x for x in inputs if isinstance(x, Tensor))
    return Tensor(data, requires_grad=any(p.requires_grad for p in prev),
                  _prev=prev, _back=back, _op=op)


def _check_same_shape(op, a, b):
    if a.shape != b.shape:
        raise ShapeMismatch(f"{op}: {a.shape} vs {b.shape}")


# --- elementwise ----------------------------------------------------------

def add(a: Tensor, b) -> Tensor:
    if isinstance(b, Tensor):
        _check_same_shape("add", a.data, b.data)
        out_data = a.data + b.data

        def back(g):
            _acc(a, g)
            _acc(b, g)
    else:
        out_data = a.data + b

        def back(g):
            _acc(a, g)
    return _result(out_data, (a, b), back, "add")


def mul(a: Tensor, b) -> Tensor:
    if isinstance(b, Tensor):
        _check_same_shape("mul", a.data, b.data)
        out_data = a.data * b.data

        def back(g):
            _acc(a, g * b.data)
            _acc(b, g * a.data)
    else:
        out_data = a.data * b

        def back(g):
            _acc(a, g * b)
    return _result(out_data, (a, b), back, "mul")


def sigmoid(x: Tensor) -> Tensor:
    s = expit(x.data)

    def back(g):
        _acc(x, g * s * (1.0 - s))
    return _result(s, (x,), back, "sigmoid")


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)

    def back(g):
        _acc(x, g * (1.0 - y * y))
    return _result(y, (x,), back, "tanh")


def leaky_relu(x: Tensor, alpha: float = 0.2) -> Tensor:
    mask = x.data > 0
    y = np.where(mask, x.data, alpha * x.data)

    def back(g):
        _acc(x, g * np.where(mask, 1.0, alpha).astype(x.data.dtype))
    return _result(y, (x,), back, "leaky_relu")


def concat(tensors: list[Tensor], axis: int = 1) -> Tensor:
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]

    def back(g):
        off = 0
        for t, s in zip(tensors, sizes):
            idx = [slice(None)] * g.ndim
            idx[axis] = slice(off, off + s)
            _acc(t, g[tuple(idx)])
            off += s
    return _result(out_data, tuple(tensors), back, "concat")


# --- convolution ----------------------------------------------------------

def _im2col(xd, kh, kw, stride, pad):
    N, C, H, W = xd.shape
    Ho = (H + 2 * pad - kh) // stride + 1
    Wo = (W + 2 * pad - kw) // stride + 1
    xp = np.pad(xd, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else xd
    cols = np.empty((N, C, kh, kw, Ho, Wo), dtype=xd.dtype)
    for i in range(kh):
        for j in range(kw):
            cols[:, :, i, j] = xp[:, :, i:i + stride * Ho:stride,
                                  j:j + stride * Wo:stride]
    return cols


def _col2im(cols, out_hw, stride, pad):
    N, C, kh, kw, h, w = cols.shape
    H, W = out_hw
    xp = np.zeros((N, C, H + 2 * pad, W + 2 * pad), dtype=cols.dtype)
    for i in range(kh):
        for j in range(kw):
            xp[:, :, i:i + stride * h:stride, j:j + stride * w:stride] += \
                cols[:, :, i, j]
    return xp[:, :, pad:pad + H, pad:pad + W] if pad else xp


def conv2d(x: Tensor, w: Tensor, b: Tensor, stride: int = 1,
           pad: int = 0) -> Tensor:
    """x: (N,C,H,W), w: (O,C,kh,kw), b: (O,). Zero padding, stride 1 or 2."""
    N, C, H, W = x.shape
    O, Cw, kh, kw = w.shape
    if C != Cw or b.shape != (O,):
        raise ShapeMismatch(f"conv2d: x {x.shape} w {w.shape} b {b.shape}")
    cols = _im2col(x.data, kh, kw, stride, pad)
    out = np.tensordot(cols, w.data, axes=([1, 2, 3], [1, 2, 3]))
    out = out.transpose(0, 3, 1, 2) + b.data.reshape(1, O, 1, 1)

    def back(g):
        _acc(b, g.sum(axis=(0, 2, 3)))
        _acc(w, np.tensordot(g, cols, axes=([0, 2, 3], [0, 4, 5])))
        gcols = np.tensordot(g, w.data, axes=([1], [0]))  # (N,Ho,Wo,C,kh,kw)
        gcols = gcols.transpose(0, 3, 4, 5, 1, 2)
        _acc(x, _col2im(gcols, (H, W), stride, pad))
    return _result(out, (x, w, b), back, "conv2d")


def conv_transpose2d(x: Tensor, w: Tensor, b: Tensor, stride: int = 2,
                     pad: int = 1) -> Tensor:
    """x: (N,C,H,W), w: (C,O,kh,kw), b: (O,). Output (H-1)*stride-2*pad+kh."""
    N, C, H, W = x.shape
    Cw, O, kh, kw = w.shape
    if C != Cw or b.shape != (O,):
        raise ShapeMismatch(f"conv_transpose2d: x {x.shape} w {w.shape} b {b.shape}")
    Ho = (H - 1) * stride - 2 * pad + kh
    Wo = (W - 1) * stride - 2 * pad + kw
    cols = np.tensordot(x.data, w.data, axes=([1], [0]))  # (N,H,W,O,kh,kw)
    cols = cols.transpose(0, 3, 4, 5, 1, 2)
    out = _col2im(cols, (Ho, Wo), stride, pad) + b.data.reshape(1, O, 1, 1)

    def back(g):
        _acc(b, g.sum(axis=(0, 2, 3)))
        gcols = _im2col(g, kh, kw, stride, pad)  # (N,O,kh,kw,H,W)
        _acc(w, np.tensordot(x.data, gcols, axes=([0, 2, 3], [0, 4, 5])))
        gx = np.tensordot(gcols, w.data, axes=([1, 2, 3], [1, 2, 3]))
        _acc(x, gx.transpose(0, 3, 1, 2))
    return _result(out, (x, w, b), back, "conv_transpose2d")


def channel_mix(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """1x1 spatial convolution mixing channels: x (N,C,H,W), w (O,C), b (O,)."""
    N, C, H, W = x.shape
    O, Cw = w.shape
    if C != Cw or b.shape != (O,):
        raise ShapeMismatch(f"channel_mix: x {x.shape} w {w.shape} b {b.shape}")
    out = np.tensordot(x.data, w.data, axes=([1], [1]))  # (N,H,W,O)
    out = out.transpose(0, 3, 1, 2) + b.data.reshape(1, O, 1, 1)

    def back(g):
        _acc(b, g.sum(axis=(0, 2, 3)))
        _acc(w, np.tensordot(g, x.data, axes=([0, 2, 3], [0, 2, 3])))
        gx = np.tensordot(g, w.data, axes=([1], [0]))  # (N,H,W,C)
        _acc(x, gx.transpose(0, 3, 1, 2))
    return _result(out, (x, w, b), back, "channel_mix")


def dense(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """x: (N,D), w: (D,M), b: (M,)."""
    if x.shape[1] != w.shape[0] or b.shape != (w.shape[1],):
        raise ShapeMismatch(f"dense: x {x.shape} w {w.shape} b {b.shape}")
    out = x.data @ w.data + b.data

    def back(g):
        _acc(b, g.sum(axis=0))
        _acc(w, x.data.T @ g)
        _acc(x, g @ w.data.T)
    return _result(out, (x, w, b), back, "dense")


def reshape(x: Tensor, shape) -> Tensor:
    out = x.data.reshape(shape)

    def back(g):
        _acc(x, g.reshape(x.shape))
    return _result(out, (x,), back, "reshape")


# --- losses ---------------------------------------------------------------

def mse_loss(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape("mse_loss", a.data, b.data)
    d = a.data - b.data
    n = d.size

    def back(g):
        _acc(a, g * 2.0 * d / n)
        _acc(b, g * (-2.0) * d / n)
    return _result(np.mean(d * d), (a, b), back, "mse_loss")


def bce_with_logits(logits: Tensor, targets: Tensor) -> Tensor:
    """Mean binary cross-entropy on raw logits (numerically stable)."""
    _check_same_shape("bce_with_logits", logits.data, targets.data)
    l, t = logits.data, targets.data
    n = l.size
    val = np.mean(np.logaddexp(0.0, l) - t * l)

    def back(g):
        _acc(logits, g * (expit(l) - t) / n)
        _acc(targets, g * (-l) / n)
    return _result(val, (logits, targets), back, "bce_with_logits")


def l1_norm(x: Tensor) -> Tensor:
    """Mean absolute value (subgradient sign(x) at 0 taken as 0)."""
    n = x.data.size

    def back(g):
        _acc(x, g * np.sign(x.data) / n)
    return _result(np.mean(np.abs(x.data)), (x,), back, "l1_norm")


# --- backward pass --------------------------------------------------------

def backward(loss: Tensor, params: list[Tensor] | None = None):
    """Populate grads of every requires_grad tensor reachable from loss.

    Visits each graph node exactly once, children before parents, in a
    fixed order. If `params` is given, parameters not reached by the
    graph get a zero grad and a DisconnectedParameter warning.
    """
    if loss.data.size != 1:
        raise NotScalar(f"loss has shape {loss.shape}")
    topo: list[Tensor] = []
    seen = set()
    stack = [(loss, False)]
    while stack:
        node, done = stack.pop()
        if done:
            topo.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._prev:
            stack.append((p, False))
    loss.grad = np.ones_like(loss.data)
    for node in reversed(topo):
        if node._back is not None and node.grad is not None:
            node._back(node.grad)
    if params is not None:
        for p in params:
            if p.grad is None:
                if id(p) not in seen:
                    warnings.warn(f"parameter {p!r} not reachable from loss",
                                  DisconnectedParameter, stacklevel=2)
                p.grad = np.zeros_like(p.data)


# --- Adam -----------------------------------------------------------------

@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params: list[Tensor], state: AdamState):
    """Standard Adam update with bias correction, in place on params."""
    state.step += 1
    t = state.step
    for i, p in enumerate(params):
        g = p.grad if p.grad is not None else np.zeros_like(p.data)
        if i not in state.m:
            state.m[i] = np.zeros_like(p.data)
            state.v[i] = np.zeros_like(p.data)
        if state.m[i].shape != p.data.shape:
            raise ShapeMismatch(f"adam moment {state.m[i].shape} vs "
                                f"param {p.data.shape}")
        state.m[i] = state.beta1 * state.m[i] + (1 - state.beta1) * g
        state.v[i] = state.beta2 * state.v[i] + (1 - state.beta2) * g * g
        mhat = state.m[i] / (1 - state.beta1 ** t)
        vhat = state.v[i] / (1 - state.beta2 ** t)
        p.data = p.data - (state.lr * mhat /
                           (np.sqrt(vhat) + state.eps)).astype(p.data.dtype)


def uniform_init(rng: np.random.Generator, shape, fan_in: int,
                 dtype=np.float32) -> Tensor:
    """uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) parameter tensor."""
    bound = 1.0 / np.sqrt(fan_in)
    return Tensor(rng.uniform(-bound, bound, size=shape).astype(dtype),
                  requires_grad=True)
