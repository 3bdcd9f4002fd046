"""Truncated multivariate jet arithmetic (forward-mode derivatives to order 3).

A ``Jet`` carries the raw partial derivatives of an array-valued expression in
``n`` chart variables: coefficient ``c[k]`` has shape ``value_shape + (n,)*k``
and holds the (symmetric) order-``k`` partials.  Building metric and map
fields out of jet operations gives analytic derivatives of everything
downstream -- Christoffel symbols, curvature, second fundamental forms --
without any symbolic layer.

Orders are fixed per computation: metrics are evaluated at order 2, map
components at order 3.  A finite-difference fallback (`fd_jet`) covers
black-box fields at reduced accuracy.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Jet", "exp", "log", "sqrt", "sin", "cos", "atan",
    "jet_einsum", "jet_inv", "jet_stack", "jet_diag", "jet_transpose",
    "jet_trace", "fd_jet",
]


def _perm3(x, perm):
    # permute the last three axes: out[..., p, q, r] = x[..., (p,q,r)[perm]]
    lead = tuple(range(x.ndim - 3))
    return x.transpose(lead + tuple(x.ndim - 3 + p for p in perm))


def _swap2(x):
    return np.swapaxes(x, -1, -2)


class Jet:
    """Array-valued truncated jet in ``n`` variables, order 0..3."""

    __slots__ = ("n", "order", "c")

    def __init__(self, n, order, coeffs):
        self.n = int(n)
        self.order = int(order)
        self.c = [np.asarray(ck, dtype=float) for ck in coeffs]
        if len(self.c) != self.order + 1:
            raise ValueError("coefficient count does not match order")

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, values, n, order):
        v = np.asarray(values, dtype=float)
        coeffs = [v]
        for k in range(1, order + 1):
            coeffs.append(np.zeros(v.shape + (n,) * k))
        return cls(n, order, coeffs)

    @classmethod
    def coords(cls, p, order):
        """Seed jet of the chart coordinates at point ``p`` (shape ``(n,)``)."""
        p = np.asarray(p, dtype=float)
        n = p.shape[0]
        coeffs = [p, np.eye(n)]
        for k in range(2, order + 1):
            coeffs.append(np.zeros((n,) * (k + 1)))
        return cls(n, order, coeffs[: order + 1])

    # -- views -------------------------------------------------------------

    @property
    def value(self):
        return self.c[0]

    @property
    def grad(self):
        return self.c[1]

    @property
    def hess(self):
        return self.c[2]

    @property
    def third(self):
        return self.c[3]

    @property
    def shape(self):
        return self.c[0].shape

    def __getitem__(self, key):
        # key indexes value axes only (they lead every coefficient array)
        return Jet(self.n, self.order, [ck[key] for ck in self.c])

    def truncate(self, order):
        if order > self.order:
            raise ValueError("cannot raise jet order by truncation")
        return Jet(self.n, order, self.c[: order + 1])

    # -- ring operations ----------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.n, self.order)

    def __add__(self, other):
        other = self._coerce(other)
        return Jet(self.n, self.order, [a + b for a, b in zip(self.c, other.c)])

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.n, self.order, [-a for a in self.c])

    def __sub__(self, other):
        other = self._coerce(other)
        return Jet(self.n, self.order, [a - b for a, b in zip(self.c, other.c)])

    def __rsub__(self, other):
        return self._coerce(other).__sub__(self)

    def __mul__(self, other):
        other = self._coerce(other)
        a, b = self.c, other.c
        o = self.order
        out = [a[0] * b[0]]
        if o >= 1:
            out.append(a[1] * b[0][..., None] + a[0][..., None] * b[1])
        if o >= 2:
            m = a[1][..., :, None] * b[1][..., None, :]
            out.append(a[2] * b[0][..., None, None] + m + _swap2(m)
                       + a[0][..., None, None] * b[2])
        if o >= 3:
            u = a[2][..., :, :, None] * b[1][..., None, None, :]   # f_pq g_r
            v = a[1][..., :, None, None] * b[2][..., None, :, :]   # f_p g_qr
            out.append(a[3] * b[0][..., None, None, None]
                       + u + _perm3(u, (0, 2, 1)) + _perm3(u, (2, 0, 1))
                       + v + _perm3(v, (1, 0, 2)) + _perm3(v, (1, 2, 0))
                       + a[0][..., None, None, None] * b[3])
        return Jet(self.n, self.order, out)

    __rmul__ = __mul__

    def compose(self, fs):
        """Apply a scalar function elementwise given its derivative arrays.

        ``fs = [f(w), f'(w), ...]`` evaluated at ``w = self.value``, each with
        the value shape of ``self``.
        """
        o = self.order
        out = [np.asarray(fs[0], dtype=float)]
        if o >= 1:
            w1 = self.c[1]
            out.append(fs[1][..., None] * w1)
        if o >= 2:
            w2 = self.c[2]
            w11 = w1[..., :, None] * w1[..., None, :]
            out.append(fs[2][..., None, None] * w11 + fs[1][..., None, None] * w2)
        if o >= 3:
            w3 = self.c[3]
            w111 = w11[..., :, :, None] * w1[..., None, None, :]
            s21 = w2[..., :, :, None] * w1[..., None, None, :]
            s21 = s21 + _perm3(s21, (0, 2, 1)) + _perm3(s21, (2, 0, 1))
            out.append(fs[3][..., None, None, None] * w111
                       + fs[2][..., None, None, None] * s21
                       + fs[1][..., None, None, None] * w3)
        return Jet(self.n, self.order, out)

    def reciprocal(self):
        w = self.value
        return self.compose([1.0 / w, -1.0 / w**2, 2.0 / w**3, -6.0 / w**4][: self.order + 1])

    def __truediv__(self, other):
        other = self._coerce(other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def __pow__(self, k):
        if isinstance(k, (int, np.integer)):
            if k < 0:
                return (self ** (-k)).reciprocal()
            out = Jet.constant(np.ones(self.shape), self.n, self.order)
            base = self
            k = int(k)
            while k:
                if k & 1:
                    out = out * base
                base = base * base
                k >>= 1
            return out
        a = float(k)
        w = self.value
        fs = [w**a, a * w**(a - 1), a * (a - 1) * w**(a - 2),
              a * (a - 1) * (a - 2) * w**(a - 3)]
        return self.compose(fs[: self.order + 1])

    # -- derivative extraction ----------------------------------------------

    def directional(self, v):
        """First derivative along coordinate vector ``v``."""
        return self.c[1] @ np.asarray(v, dtype=float)


# -- elementary functions ---------------------------------------------------

def exp(j: Jet) -> Jet:
    e = np.exp(j.value)
    return j.compose([e, e, e, e][: j.order + 1])


def log(j: Jet) -> Jet:
    w = j.value
    return j.compose([np.log(w), 1.0 / w, -1.0 / w**2, 2.0 / w**3][: j.order + 1])


def sqrt(j: Jet) -> Jet:
    w = j.value
    r = np.sqrt(w)
    return j.compose([r, 0.5 / r, -0.25 / (r * w), 0.375 / (r * w * w)][: j.order + 1])


def sin(j: Jet) -> Jet:
    s, c = np.sin(j.value), np.cos(j.value)
    return j.compose([s, c, -s, -c][: j.order + 1])


def cos(j: Jet) -> Jet:
    s, c = np.sin(j.value), np.cos(j.value)
    return j.compose([c, -s, -c, s][: j.order + 1])


def atan(j: Jet) -> Jet:
    w = j.value
    d = 1.0 + w**2
    return j.compose([np.arctan(w), 1.0 / d, -2.0 * w / d**2,
                      (6.0 * w**2 - 2.0) / d**3][: j.order + 1])


# -- contractions -----------------------------------------------------------

_DERIV_LETTERS = "PQRSTUVW"


def jet_einsum(spec: str, a: Jet, b: Jet) -> Jet:
    """Einsum on value axes of two jets, with the Leibniz rule on derivatives.

    ``spec`` is a plain two-operand einsum like ``'ij,jk->ik'`` referring to
    the value axes only; derivative axes are appended automatically.
    """
    lhs, out_s = spec.split("->")
    sa, sb = lhs.split(",")
    letters = [l for l in _DERIV_LETTERS if l not in spec][: a.order]
    coeffs = []
    for t in range(a.order + 1):
        ls = letters[:t]
        acc = None
        for mask in range(1 << t):
            la = "".join(ls[i] for i in range(t) if (mask >> i) & 1)
            lb = "".join(ls[i] for i in range(t) if not (mask >> i) & 1)
            term = np.einsum(f"{sa}{la},{sb}{lb}->{out_s}{''.join(ls)}",
                             a.c[len(la)], b.c[len(lb)])
            acc = term if acc is None else acc + term
        coeffs.append(acc)
    return Jet(a.n, a.order, coeffs)


def jet_inv(m: Jet) -> Jet:
    """Inverse of a square-matrix jet (via Leibniz recursion on N@M = I)."""
    o = m.order
    m0 = m.c[0]
    n0 = np.linalg.inv(m0)
    coeffs = [n0]
    if o >= 1:
        n1 = -np.einsum("ij,jkP,kl->ilP", n0, m.c[1], n0)
        coeffs.append(n1)
    if o >= 2:
        x = np.einsum("ijP,jkQ->ikPQ", n1, m.c[1])
        n2 = -np.einsum("ijPQ,jk->ikPQ", x + _perm_d(x, (1, 0)), n0) \
             - np.einsum("ij,jkPQ,kl->ilPQ", n0, m.c[2], n0)
        coeffs.append(n2)
    if o >= 3:
        u = np.einsum("ijPQ,jkR->ikPQR", n2, m.c[1])
        v = np.einsum("ijP,jkQR->ikPQR", n1, m.c[2])
        s = (u + _perm_d3(u, (0, 2, 1)) + _perm_d3(u, (2, 0, 1))
             + v + _perm_d3(v, (1, 0, 2)) + _perm_d3(v, (1, 2, 0))
             + np.einsum("ij,jkPQR->ikPQR", n0, m.c[3]))
        n3 = -np.einsum("ikPQR,kl->ilPQR", s, n0)
        coeffs.append(n3)
    return Jet(m.n, o, coeffs)


def _perm_d(x, perm):
    lead = tuple(range(x.ndim - 2))
    return x.transpose(lead + tuple(x.ndim - 2 + p for p in perm))


def _perm_d3(x, perm):
    return _perm3(x, perm)


def jet_stack(jets, axis=0):
    n, o = jets[0].n, jets[0].order
    return Jet(n, o, [np.stack([j.c[k] for j in jets], axis=axis)
                      for k in range(o + 1)])


def jet_diag(scalars):
    """Diagonal matrix jet from a list of scalar jets."""
    m = len(scalars)
    n, o = scalars[0].n, scalars[0].order
    coeffs = []
    for k in range(o + 1):
        arr = np.zeros((m, m) + (n,) * k)
        for i, s in enumerate(scalars):
            arr[i, i] = s.c[k]
        coeffs.append(arr)
    return Jet(n, o, coeffs)


def jet_transpose(m: Jet) -> Jet:
    return Jet(m.n, m.order, [np.swapaxes(ck, 0, 1) for ck in m.c])


def jet_trace(m: Jet) -> Jet:
    return Jet(m.n, m.order, [np.trace(ck, axis1=0, axis2=1) for ck in m.c])


# -- finite-difference fallback ----------------------------------------------

def fd_jet(fn, p, order, step=1e-4, richardson=True):
    """Jet of a black-box array field by central differences.

    One Richardson extrapolation level on the gradient; callers relax
    tolerances by two orders of magnitude relative to analytic jets.
    """
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    f0 = np.asarray(fn(p), dtype=float)
    coeffs = [f0]
    if order >= 1:
        coeffs.append(_fd_grad(fn, p, f0.shape, step, richardson))
    if order >= 2:
        coeffs.append(_fd_hess(fn, p, f0, step))
    if order >= 3:
        h = step * 10.0
        g = np.empty(f0.shape + (n, n, n))
        for c in range(n):
            dp = np.zeros(n)
            dp[c] = h
            hp = _fd_hess(fn, p + dp, np.asarray(fn(p + dp), dtype=float), step)
            hm = _fd_hess(fn, p - dp, np.asarray(fn(p - dp), dtype=float), step)
            g[..., c] = (hp - hm) / (2 * h)
        # symmetrize the mixed third partials
        g = (g + np.moveaxis(g, (-3, -2, -1), (-3, -1, -2))
             + np.moveaxis(g, (-3, -2, -1), (-1, -2, -3))) / 3.0
        coeffs.append(g)
    return Jet(n, order, coeffs)


def _fd_grad(fn, p, shape, h, richardson):
    n = p.shape[0]
    g = np.empty(shape + (n,))
    for c in range(n):
        dp = np.zeros(n)
        dp[c] = h
        d1 = (np.asarray(fn(p + dp)) - np.asarray(fn(p - dp))) / (2 * h)
        if richardson:
            d2 = (np.asarray(fn(p + dp / 2)) - np.asarray(fn(p - dp / 2))) / h
            d1 = (4 * d2 - d1) / 3.0
        g[..., c] = d1
    return g


def _fd_hess(fn, p, f0, h):
    n = p.shape[0]
    out = np.empty(f0.shape + (n, n))
    for a in range(n):
        da = np.zeros(n)
        da[a] = h
        out[..., a, a] = (np.asarray(fn(p + da)) - 2 * f0 + np.asarray(fn(p - da))) / h**2
        for b in range(a + 1, n):
            db = np.zeros(n)
            db[b] = h
            mixed = (np.asarray(fn(p + da + db)) - np.asarray(fn(p + da - db))
                     - np.asarray(fn(p - da + db)) + np.asarray(fn(p - da - db))) / (4 * h**2)
            out[..., a, b] = mixed
            out[..., b, a] = mixed
    return out
