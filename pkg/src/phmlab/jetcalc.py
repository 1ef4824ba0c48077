"""Forward-mode jets and the small dense linear algebra used by the engine.

Two derivative carriers live here:

* :class:`Jet2` holds value, gradient and Hessian of elementwise scalar
  expressions.  Metric entries, map components and holomorphic test functions
  are evaluated with it.
* :class:`Jet` holds value and first derivative of an array-valued field
  (vectors, matrices, frames).  Tensor plumbing built from metric and map jets
  propagates through it, which is what makes brackets of frame fields exact.

Every array is batch-first: ``val`` has shape ``(N, ...)`` and derivative
axes are appended at the end.  Elementwise arithmetic between operands of
different rank pads the smaller one with trailing axes (left alignment), so a
per-point scalar multiplies a per-point vector without reshaping.
"""

from __future__ import annotations

import string
from typing import Callable, Sequence

import numpy as np

DEGENERACY_RATIO = 1e-10


class JetDomainError(ArithmeticError):
    """A primitive was evaluated outside its domain."""

    def __init__(self, primitive: str, index: int, argument, point=None):
        self.primitive = primitive
        self.index = index
        self.argument = argument
        self.point = point
        where = f"batch entry {index}" if point is None else f"point {list(np.round(point, 12))}"
        super().__init__(f"{primitive}: argument {argument!r} outside domain at {where}")


class DegenerateFrameError(ArithmeticError):
    pass


def _pad_to(a: np.ndarray, ndim: int) -> np.ndarray:
    return a.reshape(a.shape + (1,) * (ndim - a.ndim)) if a.ndim < ndim else a


def _check_domain(name: str, arg: np.ndarray, bad: np.ndarray) -> None:
    if np.any(bad):
        flat = np.argwhere(bad)[0]
        raise JetDomainError(name, int(flat[0]) if flat.size else 0, complex(arg[tuple(flat)]) if np.iscomplexobj(arg) else float(arg[tuple(flat)]))


# ---------------------------------------------------------------------------
# second-order scalar jets
# ---------------------------------------------------------------------------


class Jet2:
    """Value, gradient and Hessian of a (batched) scalar quantity."""

    __slots__ = ("val", "grad", "hess")
    __array_priority__ = 1000

    def __init__(self, val, grad, hess):
        self.val = np.asarray(val)
        self.grad = np.asarray(grad)
        self.hess = np.asarray(hess)

    @property
    def m(self) -> int:
        return self.grad.shape[-1]

    @classmethod
    def variable(cls, values, index: int, m: int) -> "Jet2":
        values = np.asarray(values, dtype=float)
        grad = np.zeros(values.shape + (m,))
        grad[..., index] = 1.0
        return cls(values, grad, np.zeros(values.shape + (m, m)))

    @classmethod
    def constant(cls, values, m: int, shape=()) -> "Jet2":
        values = np.broadcast_to(np.asarray(values), shape).copy() if shape else np.asarray(values)
        return cls(values, np.zeros(values.shape + (m,), dtype=values.dtype),
                   np.zeros(values.shape + (m, m), dtype=values.dtype))

    def _coerce(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return other
        return Jet2.constant(np.asarray(other), self.m, self.val.shape)

    def _chain(self, f, df, d2f) -> "Jet2":
        g = self.grad
        hess = df[..., None, None] * self.hess + d2f[..., None, None] * g[..., :, None] * g[..., None, :]
        return Jet2(f, df[..., None] * g, hess)

    def __add__(self, other):
        o = self._coerce(other)
        return Jet2(self.val + o.val, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.val, -self.grad, -self.hess)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        a, b = self.val, o.val
        ga, gb = self.grad, o.grad
        hess = (self.hess * b[..., None, None] + a[..., None, None] * o.hess
                + ga[..., :, None] * gb[..., None, :] + gb[..., :, None] * ga[..., None, :])
        return Jet2(a * b, ga * b[..., None] + a[..., None] * gb, hess)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet2":
        a = self.val
        _check_domain("division", a, a == 0)
        return self._chain(1.0 / a, -1.0 / a**2, 2.0 / a**3)

    def __truediv__(self, other):
        o = self._coerce(other)
        out = self * o.reciprocal()
        out.val = self.val / o.val  # value slot bit-identical to plain division
        return out

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)):
            raise TypeError("Jet2 supports integer powers only")
        k = int(k)
        a = self.val
        if k == 0:
            return Jet2.constant(np.ones_like(a), self.m)
        if k < 0:
            _check_domain("power", a, a == 0)
        f = a**k if k > 0 else 1.0 / a ** (-k)
        df = k * a ** (k - 1)
        d2f = k * (k - 1) * a ** (k - 2) if k >= 2 or k < 0 else np.zeros_like(a)
        return self._chain(f, df, d2f)

    # primitives ------------------------------------------------------------

    def sin(self):
        return self._chain(np.sin(self.val), np.cos(self.val), -np.sin(self.val))

    def cos(self):
        return self._chain(np.cos(self.val), -np.sin(self.val), -np.cos(self.val))

    def tan(self):
        c = np.cos(self.val)
        _check_domain("tan", self.val, c == 0)
        t = np.tan(self.val)
        return self._chain(t, 1 + t**2, 2 * t * (1 + t**2))

    def exp(self):
        e = np.exp(self.val)
        return self._chain(e, e, e)

    def log(self):
        a = self.val
        if not np.iscomplexobj(a):
            _check_domain("log", a, a <= 0)
        return self._chain(np.log(a), 1.0 / a, -1.0 / a**2)

    def sqrt(self):
        a = self.val
        if not np.iscomplexobj(a):
            _check_domain("sqrt", a, a <= 0)
        s = np.sqrt(a)
        return self._chain(s, 0.5 / s, -0.25 / (s * a))

    def sinh(self):
        return self._chain(np.sinh(self.val), np.cosh(self.val), np.sinh(self.val))

    def cosh(self):
        return self._chain(np.cosh(self.val), np.sinh(self.val), np.cosh(self.val))

    def tanh(self):
        t = np.tanh(self.val)
        return self._chain(t, 1 - t**2, -2 * t * (1 - t**2))

    def atan(self):
        a = self.val
        return self._chain(np.arctan(a), 1.0 / (1 + a**2), -2 * a / (1 + a**2) ** 2)

    def to_jet(self) -> "Jet":
        return Jet(self.val, self.grad)

    def __repr__(self):
        return f"Jet2(val={self.val!r}, grad={self.grad!r}, hess={self.hess!r})"


PRIMITIVES: dict[str, Callable] = {
    "sin": (np.sin, Jet2.sin),
    "cos": (np.cos, Jet2.cos),
    "tan": (np.tan, Jet2.tan),
    "exp": (np.exp, Jet2.exp),
    "log": (np.log, Jet2.log),
    "sqrt": (np.sqrt, Jet2.sqrt),
    "sinh": (np.sinh, Jet2.sinh),
    "cosh": (np.cosh, Jet2.cosh),
    "tanh": (np.tanh, Jet2.tanh),
    "atan": (np.arctan, Jet2.atan),
}


def apply_primitive(name: str, arg):
    """Apply a named primitive to a float/array or a :class:`Jet2`."""
    plain, jetted = PRIMITIVES[name]
    if isinstance(arg, Jet2):
        return jetted(arg)
    arg = np.asarray(arg)
    if name in ("log", "sqrt") and not np.iscomplexobj(arg):
        _check_domain(name, np.atleast_1d(arg), np.atleast_1d(arg <= 0))
    return plain(arg)


def jet_eval(f: Callable, x, vars=None) -> Jet2:
    """Evaluate ``f`` with second-order jets seeded at ``x``.

    ``f`` receives one :class:`Jet2` per coordinate and must be built from the
    supported primitives.  ``vars`` is an optional boolean mask of active
    variables; inactive ones enter as constants.  ``x`` may be a single point
    ``(m,)`` or a batch ``(N, m)``.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xb = x[None, :] if single else x
    m = xb.shape[1]
    mask = np.ones(m, dtype=bool) if vars is None else np.asarray(vars, dtype=bool)
    active = np.flatnonzero(mask)
    k = len(active)
    args = []
    for i in range(m):
        if mask[i]:
            args.append(Jet2.variable(xb[:, i], int(np.searchsorted(active, i)), k))
        else:
            args.append(Jet2.constant(xb[:, i], k))
    try:
        out = f(*args)
    except JetDomainError as err:
        raise JetDomainError(err.primitive, err.index, err.argument, xb[err.index]) from None
    if not isinstance(out, Jet2):
        out = Jet2.constant(np.broadcast_to(np.asarray(out, dtype=float), xb.shape[:1]), k)
    if single:
        return Jet2(out.val[0], out.grad[0], out.hess[0])
    return out


# ---------------------------------------------------------------------------
# first-order array jets
# ---------------------------------------------------------------------------


class Jet:
    """Array-valued quantity with its first derivative in the chart coordinates.

    ``val`` has shape ``(N, *shape)``; ``d`` has shape ``(N, *shape, m)`` with
    ``d[..., i]`` the partial derivative along coordinate ``i``.
    """

    __slots__ = ("val", "d")
    __array_priority__ = 1000

    def __init__(self, val, d):
        self.val = np.asarray(val)
        self.d = np.asarray(d)

    @property
    def m(self) -> int:
        return self.d.shape[-1]

    @property
    def shape(self):
        return self.val.shape

    @property
    def ndim(self) -> int:
        return self.val.ndim

    @classmethod
    def const(cls, val, m: int) -> "Jet":
        val = np.asarray(val)
        return cls(val, np.zeros(val.shape + (m,), dtype=val.dtype))

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.const(np.asarray(other), self.m)

    def _aligned(self, other):
        o = self._coerce(other)
        nd = max(self.ndim, o.ndim)
        a_v, b_v = _pad_to(self.val, nd), _pad_to(o.val, nd)
        a_d = self.d.reshape(a_v.shape + (self.m,))
        b_d = o.d.reshape(b_v.shape + (o.m,))
        return a_v, a_d, b_v, b_d

    def __add__(self, other):
        a, da, b, db = self._aligned(other)
        return Jet(a + b, da + db)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, -self.d)

    def __sub__(self, other):
        a, da, b, db = self._aligned(other)
        return Jet(a - b, da - db)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        a, da, b, db = self._aligned(other)
        return Jet(a * b, da * b[..., None] + a[..., None] * db)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * self._coerce(other).reciprocal()

    def reciprocal(self) -> "Jet":
        _check_domain("division", self.val, self.val == 0)
        r = 1.0 / self.val
        return Jet(r, -self.d * (r * r)[..., None])

    def sqrt(self) -> "Jet":
        _check_domain("sqrt", self.val, self.val <= 0)
        s = np.sqrt(self.val)
        return Jet(s, self.d * (0.5 / s)[..., None])

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis for k in key):
            raise IndexError("Jet indexing does not accept Ellipsis")
        return Jet(self.val[key], self.d[key])

    def transpose_last2(self) -> "Jet":
        return Jet(np.swapaxes(self.val, -1, -2), np.swapaxes(self.d, -2, -3))

    def __repr__(self):
        return f"Jet(shape={self.val.shape}, m={self.m})"


def jstack(items: Sequence["Jet"], axis: int = 1) -> Jet:
    """Stack jets along a value axis (non-negative, counted with the batch axis)."""
    return Jet(np.stack([j.val for j in items], axis=axis), np.stack([j.d for j in items], axis=axis))


def jeinsum(spec: str, *operands) -> Jet:
    """``np.einsum`` with the product rule applied to every :class:`Jet` operand.

    Plain arrays are treated as constants.  Subscripts may use ``...`` for the
    batch axes; the derivative axis is handled internally.
    """
    inputs, out = spec.replace(" ", "").split("->")
    subs = inputs.split(",")
    used = set(spec)
    dletter = next(c for c in string.ascii_letters if c not in used)
    vals = [op.val if isinstance(op, Jet) else np.asarray(op) for op in operands]
    val = np.einsum(spec, *vals)
    deriv = None
    for k, op in enumerate(operands):
        if not isinstance(op, Jet):
            continue
        s = list(subs)
        s[k] = s[k] + dletter
        args = list(vals)
        args[k] = op.d
        term = np.einsum(",".join(s) + "->" + out + dletter, *args)
        deriv = term if deriv is None else deriv + term
    if deriv is None:
        raise TypeError("jeinsum needs at least one Jet operand")
    return Jet(val, deriv)


def jinv(a: Jet) -> Jet:
    inv = np.linalg.inv(a.val)
    return Jet(inv, -np.einsum("...ij,...jkz,...kl->...ilz", inv, a.d, inv))


def as_jet(x, m: int = 0) -> Jet:
    return x if isinstance(x, Jet) else Jet.const(np.asarray(x, dtype=float), m)


# ---------------------------------------------------------------------------
# frames and small matrix helpers
# ---------------------------------------------------------------------------


def _gram_schmidt_jets(gram: Jet, seeds: Sequence[Jet]) -> list[Jet]:
    out: list[Jet] = []
    for k, s in enumerate(seeds):
        v = s
        for u in out:
            v = v - jeinsum("...i,...ij,...j->...", s, gram, u) * u
        seed_sq = np.einsum("...i,...ij,...j->...", s.val, gram.val, s.val)
        nsq = jeinsum("...i,...ij,...j->...", v, gram, v)
        if np.any(nsq.val <= (DEGENERACY_RATIO**2) * np.maximum(seed_sq, 1e-300)):
            bad = int(np.argmax(nsq.val <= (DEGENERACY_RATIO**2) * np.maximum(seed_sq, 1e-300)))
            raise DegenerateFrameError(f"seed {k} degenerate at batch entry {bad}")
        out.append(v * nsq.sqrt().reciprocal())
    return out


def gram_schmidt(gram, seeds):
    """Orthonormalise ``seeds`` against the Gram matrix ``gram`` in input order.

    Accepts plain arrays (``gram`` of shape ``(m, m)`` or ``(N, m, m)``, seeds a
    sequence of vectors) or :class:`Jet` inputs; jets keep the output smooth in
    the base point, which the bracket computations rely on.
    """
    if isinstance(gram, Jet) or any(isinstance(s, Jet) for s in seeds):
        m = gram.m if isinstance(gram, Jet) else next(s.m for s in seeds if isinstance(s, Jet))
        return _gram_schmidt_jets(as_jet(gram, m), [as_jet(s, m) for s in seeds])
    gram = np.asarray(gram, dtype=float)
    single = gram.ndim == 2
    gb = gram[None] if single else gram
    sb = [np.asarray(s, dtype=float) for s in seeds]
    sb = [s[None] if s.ndim == 1 else s for s in sb]
    sb = [np.broadcast_to(s, gb.shape[:1] + s.shape[-1:]) for s in sb]
    vecs = _gram_schmidt_jets(Jet.const(gb, 0), [Jet.const(s, 0) for s in sb])
    out = [v.val for v in vecs]
    return [v[0] for v in out] if single else out


def commutator_norm(a, b) -> float | np.ndarray:
    """Frobenius norm of ``AB - BA`` (batched over leading axes)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-2:] != b.shape[-2:] or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"commutator of incompatible shapes {a.shape} and {b.shape}")
    c = a @ b - b @ a
    return np.sqrt(np.sum(np.abs(c) ** 2, axis=(-2, -1)))


def canonical_complex_structure(n: int) -> np.ndarray:
    """Block rotation sending the first coordinate of each pair to the second."""
    j = np.zeros((2 * n, 2 * n))
    for k in range(n):
        j[2 * k + 1, 2 * k] = 1.0
        j[2 * k, 2 * k + 1] = -1.0
    return j


def central_gradient(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Central-difference gradient of a batched scalar function ``f(X) -> (N,)``."""
    x = np.asarray(x, dtype=float)
    m = x.shape[-1]
    cols = []
    for i in range(m):
        e = np.zeros(m)
        e[i] = h
        cols.append((f(x + e) - f(x - e)) / (2 * h))
    return np.stack(cols, axis=-1)


def central_hessian(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian from function values only."""
    x = np.asarray(x, dtype=float)
    m = x.shape[-1]
    f0 = f(x)
    out = np.zeros(x.shape[:-1] + (m, m), dtype=np.result_type(f0, float))
    eye = np.eye(m) * h
    for i in range(m):
        out[..., i, i] = (f(x + eye[i]) - 2 * f0 + f(x - eye[i])) / h**2
        for j in range(i + 1, m):
            v = (f(x + eye[i] + eye[j]) - f(x + eye[i] - eye[j])
                 - f(x - eye[i] + eye[j]) + f(x - eye[i] - eye[j])) / (4 * h**2)
            out[..., i, j] = v
            out[..., j, i] = v
    return out
