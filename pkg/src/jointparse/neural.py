"""Small reverse-mode autodiff engine over vectors and matrices.

Operations are recorded on a :class:`Tape` in execution order.  Each recorded
step owns a closure that pushes the output gradient back to its inputs;
gradients of :class:`Parameter` objects are accumulated in place, so calling
:meth:`Tape.backward` twice without :func:`zero_grad` doubles them.

All arithmetic is float64.  Trained models are rounded to float32 precision
when stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import DimensionError, JointParseError


class Parameter:
    """A named trainable array with its gradient and Adam moment buffers."""

    __slots__ = ("name", "value", "grad", "adam_m", "adam_v", "step_count",
                 "trainable", "decay")

    def __init__(self, name: str, value: np.ndarray, trainable: bool = True,
                 decay: bool = True):
        self.name = name
        self.value = np.array(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)
        self.adam_m = np.zeros_like(self.value)
        self.adam_v = np.zeros_like(self.value)
        self.step_count = 0
        self.trainable = trainable
        self.decay = decay

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def __repr__(self) -> str:
        return f"Parameter({self.name!r}, shape={self.shape})"


class Var:
    """A value computed on a tape; ``grad`` is filled in by the backward sweep."""

    __slots__ = ("value", "grad")

    def __init__(self, value: np.ndarray):
        self.value = value
        self.grad: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return self.value.size

    def _acc(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = g.copy()
        else:
            self.grad += g


def sigmoid(z: np.ndarray) -> np.ndarray:
    # split by sign to avoid overflow in exp
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softmax(logits: np.ndarray) -> np.ndarray:
    z = np.exp(logits - np.max(logits))
    return z / z.sum()


def dropout_mask(length: int, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted dropout: zeros with probability ``rate``, else ``1 / (1 - rate)``."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if rate == 0.0:
        return np.ones(length)
    keep = rng.random(length) >= rate
    return keep / (1.0 - rate)


class Tape:
    """Records a forward computation for a later backward sweep.

    With ``record=False`` the same operations only compute values, which is
    what decoding uses.  ``training`` switches dropout on; its masks are drawn
    from ``rng``.
    """

    def __init__(self, record: bool = True, training: bool = False,
                 rng: Optional[np.random.Generator] = None, dropout: float = 0.0):
        self.record = record
        self.training = training
        self.rng = rng
        self.dropout_rate = dropout
        self._steps: list[Callable[[], None]] = []
        self._vars: list[Var] = []
        # weight gradients are gathered as (dy, x) rows and reduced once per sweep
        self._outer: dict[int, tuple[Parameter, list, list]] = {}

    def _new(self, value: np.ndarray) -> Var:
        v = Var(value)
        if self.record:
            self._vars.append(v)
        return v

    def _push(self, fn: Callable[[], None]) -> None:
        if self.record:
            self._steps.append(fn)

    def _defer_outer(self, W: Parameter, dy: np.ndarray, x: np.ndarray) -> None:
        entry = self._outer.get(id(W))
        if entry is None:
            entry = self._outer[id(W)] = (W, [], [])
        entry[1].append(dy)
        entry[2].append(x)

    def _flush_outer(self) -> None:
        for W, dys, xs in self._outer.values():
            W.grad += np.asarray(dys).T @ np.asarray(xs)
        self._outer.clear()

    # leaves

    def constant(self, value: np.ndarray) -> Var:
        return Var(np.asarray(value, dtype=np.float64))

    def param(self, p: Parameter) -> Var:
        out = self._new(p.value)
        if p.trainable:
            def back():
                if out.grad is not None:
                    p.grad += out.grad
            self._push(back)
        return out

    def lookup(self, table: Parameter, index: int) -> Var:
        out = self._new(table.value[index])
        if table.trainable:
            def back():
                if out.grad is not None:
                    table.grad[index] += out.grad
            self._push(back)
        return out

    # elementwise / structural

    def concat(self, xs: Sequence[Var]) -> Var:
        out = self._new(np.concatenate([x.value for x in xs]))
        sizes = [x.size for x in xs]

        def back():
            g = out.grad
            if g is None:
                return
            start = 0
            for x, n in zip(xs, sizes):
                x._acc(g[start:start + n])
                start += n
        self._push(back)
        return out

    def relu(self, x: Var) -> Var:
        mask = x.value > 0
        out = self._new(x.value * mask)

        def back():
            if out.grad is not None:
                x._acc(out.grad * mask)
        self._push(back)
        return out

    def identity(self, x: Var) -> Var:
        return x

    def dropout(self, x: Var, rate: Optional[float] = None) -> Var:
        rate = self.dropout_rate if rate is None else rate
        if not self.training or rate == 0.0:
            return x
        mask = dropout_mask(x.size, rate, self.rng)
        out = self._new(x.value * mask)

        def back():
            if out.grad is not None:
                x._acc(out.grad * mask)
        self._push(back)
        return out

    def scale(self, x: Var, a: float) -> Var:
        out = self._new(x.value * a)

        def back():
            if out.grad is not None:
                x._acc(out.grad * a)
        self._push(back)
        return out

    def sum(self, xs: Sequence[Var]) -> Var:
        out = self._new(np.sum([x.value for x in xs], axis=0))

        def back():
            if out.grad is not None:
                for x in xs:
                    x._acc(out.grad)
        self._push(back)
        return out

    # layers

    def linear(self, W: Parameter, b: Parameter, x: Var) -> Var:
        """``W @ x + b``."""
        if W.value.ndim != 2 or W.value.shape[1] != x.size or b.value.shape != (W.value.shape[0],):
            raise DimensionError(
                f"linear: W{W.value.shape} b{b.value.shape} x({x.size},) do not agree")
        out = self._new(W.value @ x.value + b.value)

        def back():
            g = out.grad
            if g is None:
                return
            if W.trainable:
                self._defer_outer(W, g, x.value)
            if b.trainable:
                b.grad += g
            x._acc(W.value.T @ g)
        self._push(back)
        return out

    def lstm_step(self, cell: "LSTMCell", h_prev: Var, c_prev: Var, x: Var) -> tuple[Var, Var]:
        H = cell.hidden_dim
        if x.size != cell.input_dim or h_prev.size != H or c_prev.size != H:
            raise DimensionError(
                f"lstm_step: cell ({cell.input_dim}->{H}) got x({x.size},) "
                f"h({h_prev.size},) c({c_prev.size},)")
        W, b = cell.W, cell.b
        z = np.concatenate([x.value, h_prev.value])
        a = W.value @ z + b.value
        gates = sigmoid(a[:3 * H])
        i, f, o = gates[:H], gates[H:2 * H], gates[2 * H:]
        g = np.tanh(a[3 * H:])
        c_new = f * c_prev.value + i * g
        tc = np.tanh(c_new)
        h = self._new(o * tc)
        c = self._new(c_new)

        def back():
            dh, dc_out = h.grad, c.grad
            if dh is None and dc_out is None:
                return
            dc = np.zeros(H) if dc_out is None else dc_out.copy()
            if dh is not None:
                dc += dh * o * (1.0 - tc * tc)
                do = dh * tc
            else:
                do = np.zeros(H)
            da = np.concatenate([
                dc * g * i * (1.0 - i),
                dc * c_prev.value * f * (1.0 - f),
                do * o * (1.0 - o),
                dc * i * (1.0 - g * g),
            ])
            if W.trainable:
                self._defer_outer(W, da, z)
            if b.trainable:
                b.grad += da
            dz = W.value.T @ da
            x._acc(dz[:x.size])
            h_prev._acc(dz[x.size:])
            c_prev._acc(dc * f)
        self._push(back)
        return h, c

    def softmax_xent(self, logits: Var, gold: int) -> tuple[np.ndarray, Var]:
        """Probabilities and the scalar loss ``-log p[gold]``."""
        n = logits.size
        if not 0 <= gold < n:
            raise IndexError(f"gold index {gold} out of range for {n} classes")
        shifted = logits.value - np.max(logits.value)
        log_z = math.log(np.exp(shifted).sum())
        probs = np.exp(shifted - log_z)
        out = self._new(np.asarray(log_z - shifted[gold]))

        def back():
            if out.grad is None:
                return
            d = probs.copy()
            d[gold] -= 1.0
            logits._acc(d * out.grad)
        self._push(back)
        return probs, out

    # reverse sweep

    def backward(self, loss: Var, seed: float = 1.0) -> None:
        if not self.record:
            raise JointParseError("backward on a tape that does not record")
        if not self._steps:
            raise JointParseError("backward called before any forward computation")
        for v in self._vars:
            v.grad = None
        loss.grad = np.full(loss.value.shape, float(seed))
        for step in reversed(self._steps):
            step()
        self._flush_outer()


def lstm_step(tape: Tape, cell: "LSTMCell", h_prev: Var, c_prev: Var, x: Var) -> tuple[Var, Var]:
    return tape.lstm_step(cell, h_prev, c_prev, x)


def linear(tape: Tape, W: Parameter, b: Parameter, x: Var) -> Var:
    return tape.linear(W, b, x)


def backward(tape: Tape, loss: Var) -> None:
    tape.backward(loss)


def glorot(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, fan_out: int) -> np.ndarray:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


class LSTMCell:
    """Standard LSTM cell.

    Gate weights are stored stacked in one ``(4 * hidden, input + hidden)``
    matrix in the order input, forget, output, candidate; each gate block is
    ``hidden x (input + hidden)``.
    """

    GATES = ("input", "forget", "output", "candidate")

    def __init__(self, name: str, input_dim: int, hidden_dim: int,
                 rng: Optional[np.random.Generator] = None):
        if input_dim <= 0 or hidden_dim <= 0:
            raise ValueError(f"LSTM dims must be positive, got {input_dim}, {hidden_dim}")
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        H = hidden_dim
        if rng is None:
            W = np.zeros((4 * H, input_dim + H))
            b = np.zeros(4 * H)
        else:
            W = glorot(rng, (4 * H, input_dim + H), input_dim + H, H)
            b = np.zeros(4 * H)
            b[H:2 * H] = 1.0
        self.W = Parameter(f"{name}.W", W)
        self.b = Parameter(f"{name}.b", b)

    def gate(self, which: str) -> tuple[np.ndarray, np.ndarray]:
        k = self.GATES.index(which)
        H = self.hidden_dim
        return self.W.value[k * H:(k + 1) * H], self.b.value[k * H:(k + 1) * H]

    def parameters(self) -> list[Parameter]:
        return [self.W, self.b]

    def zero_state(self, tape: Tape) -> tuple[Var, Var]:
        return tape.constant(np.zeros(self.hidden_dim)), tape.constant(np.zeros(self.hidden_dim))

    def run(self, tape: Tape, xs: Sequence[Var], reverse: bool = False) -> list[Var]:
        """Hidden states for each input, aligned with ``xs`` even when reversed."""
        h, c = self.zero_state(tape)
        out: list[Optional[Var]] = [None] * len(xs)
        order = range(len(xs) - 1, -1, -1) if reverse else range(len(xs))
        for k in order:
            h, c = tape.lstm_step(self, h, c, xs[k])
            out[k] = h
        return out  # type: ignore[return-value]


def zero_grad(params: Iterable[Parameter]) -> None:
    for p in params:
        p.grad.fill(0.0)


def global_norm(params: Iterable[Parameter]) -> float:
    return math.sqrt(sum(float(np.vdot(p.grad, p.grad)) for p in params))


def clip_global_norm(params: Sequence[Parameter], max_norm: float = 5.0) -> float:
    """Rescale all gradients so their joint L2 norm is at most ``max_norm``."""
    if max_norm <= 0:
        raise ValueError(f"max_norm must be positive, got {max_norm}")
    norm = global_norm(params)
    if norm <= max_norm:
        return 1.0
    factor = max_norm / norm
    for p in params:
        p.grad *= factor
    return factor


def adam_step(params: Iterable[Parameter], learning_rate: float = 1e-3,
              beta1: float = 0.9, beta2: float = 0.9, epsilon: float = 1e-8,
              l2_lambda: float = 1e-8) -> None:
    """One bias-corrected Adam update; L2 enters as ``l2_lambda * value`` in the gradient."""
    if learning_rate <= 0:
        raise ValueError(f"learning rate must be positive, got {learning_rate}")
    for p in params:
        if not p.trainable:
            continue
        g = p.grad
        if l2_lambda and p.decay:
            g = g + l2_lambda * p.value
        p.step_count += 1
        t = p.step_count
        m, v = p.adam_m, p.adam_v
        m *= beta1
        m += (1.0 - beta1) * g
        g = np.square(g, out=g if g is not p.grad else None)
        g *= 1.0 - beta2
        v *= beta2
        v += g
        # value -= lr * m_hat / (sqrt(v_hat) + eps), computed in place
        denom = np.sqrt(v, out=g)
        denom *= 1.0 / math.sqrt(1.0 - beta2 ** t)
        denom += epsilon
        np.divide(m, denom, out=denom)
        denom *= learning_rate / (1.0 - beta1 ** t)
        p.value -= denom


@dataclass
class GradCheckReport:
    worst_error: float
    worst_parameter: Optional[str]
    worst_index: Optional[tuple[int, ...]]
    tolerance: float
    n_checked: int

    @property
    def passed(self) -> bool:
        return self.worst_error < self.tolerance

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"gradcheck {status}: worst relative error {self.worst_error:.3e} "
                f"at {self.worst_parameter}{list(self.worst_index or ())} "
                f"(tolerance {self.tolerance:g}, {self.n_checked} entries)")


def relative_error(analytic: float, numeric: float, floor: float = 1e-5) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def _scalar(v: Var) -> float:
    if v.value.size != 1:
        raise DimensionError(f"gradient check needs a scalar loss, got shape {v.value.shape}")
    return float(v.value.reshape(()))


def check_gradients(forward: Callable[[], tuple[Tape, Var]], params: Sequence[Parameter],
                    tolerance: float = 1e-4, step: float = 1e-5) -> GradCheckReport:
    """Compare backprop gradients with central differences for every entry.

    ``forward`` must rebuild the computation from the current parameter values
    and return the tape together with its scalar loss.
    """
    params = [p for p in params if p.trainable]
    zero_grad(params)
    tape, loss = forward()
    tape.backward(loss)
    analytic = {p.name: p.grad.copy() for p in params}
    zero_grad(params)

    worst, worst_name, worst_idx, count = 0.0, None, None, 0
    for p in params:
        flat = p.value.reshape(-1)
        grad = analytic[p.name].reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + step
            up = _scalar(forward()[1])
            flat[k] = orig - step
            down = _scalar(forward()[1])
            flat[k] = orig
            err = relative_error(grad[k], (up - down) / (2 * step))
            count += 1
            if err > worst or worst_name is None:
                worst, worst_name = err, p.name
                worst_idx = tuple(int(i) for i in np.unravel_index(k, p.value.shape))
    return GradCheckReport(worst, worst_name, worst_idx, tolerance, count)
