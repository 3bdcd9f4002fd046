import numpy as np
import pytest
import sympy as sp

from eigenmap import jets
from eigenmap.jets import Jet, jet_einsum, jet_inv, jet_diag, jet_stack, fd_jet


def sympy_partials(expr, syms, at, order=3):
    """All raw partials of a sympy expression up to the given order."""
    n = len(syms)
    subs = dict(zip(syms, at))
    out = [float(expr.subs(subs))]
    if order >= 1:
        out.append(np.array([float(sp.diff(expr, s).subs(subs)) for s in syms]))
    if order >= 2:
        out.append(np.array([[float(sp.diff(expr, a, b).subs(subs)) for b in syms]
                             for a in syms]))
    if order >= 3:
        out.append(np.array([[[float(sp.diff(expr, a, b, c).subs(subs))
                               for c in syms] for b in syms] for a in syms]))
    return out


def build_both(at):
    """The same composite expression through jets and through sympy."""
    x, y, z = sp.symbols("x y z")
    expr = sp.exp(0.3 * x * y) * sp.sin(z) + (x**2 + 2 * y) / sp.sqrt(1 + z**2) \
        - sp.log(2 + sp.cos(x)) * y**3
    P = Jet.coords(at, 3)
    X, Y, Z = P[0], P[1], P[2]
    j = jets.exp(0.3 * X * Y) * jets.sin(Z) \
        + (X**2 + 2 * Y) / jets.sqrt(1 + Z * Z) \
        - jets.log(2 + jets.cos(X)) * Y**3
    return j, sympy_partials(expr, (x, y, z), at)


@pytest.mark.parametrize("at", [(0.3, -0.7, 1.1), (1.2, 0.4, -0.5)])
def test_composite_expression_matches_sympy(at):
    j, ref = build_both(np.array(at))
    for k in range(4):
        np.testing.assert_allclose(j.c[k], ref[k], rtol=1e-12, atol=1e-12)


def test_division_and_powers():
    x = sp.symbols("x")
    expr = (x**3 + 2) / (x**2 + 1) + x**sp.Rational(5, 2)
    at = np.array([1.7])
    P = Jet.coords(at, 3)
    X = P[0]
    j = (X**3 + 2) / (X * X + 1) + X**2.5
    ref = sympy_partials(expr, (x,), at)
    for k in range(4):
        np.testing.assert_allclose(j.c[k], ref[k], rtol=1e-12, atol=1e-12)


def test_negative_integer_power_and_atan():
    x, y = sp.symbols("x y")
    expr = sp.atan(x * y) + (1 + x**2)**(-2)
    at = np.array([0.8, -0.3])
    P = Jet.coords(at, 3)
    j = jets.atan(P[0] * P[1]) + (1 + P[0] ** 2) ** (-2)
    ref = sympy_partials(expr, (x, y), at)
    for k in range(4):
        np.testing.assert_allclose(j.c[k], ref[k], rtol=1e-11, atol=1e-12)


def test_jet_einsum_matmul_derivatives():
    # derivative of A(p) @ B(p) must obey the product rule entrywise
    at = np.array([0.5, -0.2])
    P = Jet.coords(at, 3)
    a = jet_stack([jet_stack([jets.sin(P[0]), P[0] * P[1]]),
                   jet_stack([jets.exp(P[1]), Jet.constant(1.0, 2, 3)])])
    b = jet_stack([jet_stack([P[1] ** 2, jets.cos(P[0])]),
                   jet_stack([P[0] + P[1], jets.sqrt(2 + P[0])])])
    ab = jet_einsum("ij,jk->ik", a, b)

    x, y = sp.symbols("x y")
    A = sp.Matrix([[sp.sin(x), x * y], [sp.exp(y), 1]])
    B = sp.Matrix([[y**2, sp.cos(x)], [x + y, sp.sqrt(2 + x)]])
    C = A * B
    for i in range(2):
        for j in range(2):
            ref = sympy_partials(C[i, j], (x, y), at)
            for k in range(4):
                np.testing.assert_allclose(ab.c[k][i, j], ref[k],
                                           rtol=1e-12, atol=1e-12)


def test_jet_inv_matches_sympy():
    at = np.array([0.4, 0.1])
    P = Jet.coords(at, 3)
    m = jet_stack([
        jet_stack([2 + jets.sin(P[0]), P[0] * P[1]]),
        jet_stack([P[0] * P[1], 1 + P[1] ** 2]),
    ])
    minv = jet_inv(m)
    ident = jet_einsum("ij,jk->ik", m, minv)
    np.testing.assert_allclose(ident.c[0], np.eye(2), atol=1e-13)
    for k in range(1, 4):
        np.testing.assert_allclose(ident.c[k], 0.0, atol=1e-12)

    x, y = sp.symbols("x y")
    M = sp.Matrix([[2 + sp.sin(x), x * y], [x * y, 1 + y**2]])
    Minv = M.inv()
    for i in range(2):
        for j in range(2):
            ref = sympy_partials(Minv[i, j], (x, y), at)
            for k in range(4):
                np.testing.assert_allclose(minv.c[k][i, j], ref[k],
                                           rtol=1e-11, atol=1e-11)


def test_jet_diag_and_trace():
    at = np.array([0.9])
    P = Jet.coords(at, 2)
    d = jet_diag([jets.exp(P[0]), P[0] ** 2])
    tr = jets.jet_trace(d)
    np.testing.assert_allclose(tr.value, np.exp(0.9) + 0.81, rtol=1e-14)
    np.testing.assert_allclose(tr.grad, [np.exp(0.9) + 1.8], rtol=1e-14)


def test_fd_jet_fallback_order2():
    def field(p):
        x, y = p
        return np.array([[np.exp(x) + y**2, x * y], [x * y, 2.0 + np.sin(y)]])

    at = np.array([0.2, -0.4])
    approx = fd_jet(field, at, order=2)
    P = Jet.coords(at, 2)
    exact = jet_stack([
        jet_stack([jets.exp(P[0]) + P[1] ** 2, P[0] * P[1]]),
        jet_stack([P[0] * P[1], 2 + jets.sin(P[1])]),
    ])
    # fallback tolerances are 100x looser than analytic jets
    np.testing.assert_allclose(approx.c[0], exact.c[0], atol=1e-12)
    np.testing.assert_allclose(approx.c[1], exact.c[1], atol=1e-8)
    np.testing.assert_allclose(approx.c[2], exact.c[2], atol=1e-5)


def test_truncate_and_directional():
    at = np.array([1.0, 2.0])
    P = Jet.coords(at, 3)
    f = P[0] ** 2 * P[1]
    f1 = f.truncate(1)
    assert f1.order == 1
    v = np.array([0.5, -1.0])
    np.testing.assert_allclose(f.directional(v), 4.0 * 0.5 + 1.0 * (-1.0))
