"""Chart-level Riemannian geometry from a jet-valued metric field.

All operations are pure functions of (geometry, point); the curvature
convention is R(E_I, E_J, E_K, E_L) = g(R(E_I, E_J) E_L, E_K), fixed once
here and used by every downstream module, and the Laplacian is the trace of
the Hessian (negative at an interior maximum).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import jets
from .errors import DegenerateSection, PointOutOfDomain, SingularMetric
from .jets import Jet

COND_LIMIT = 1e12


@dataclass
class ChartGeometry:
    """A single coordinate box with a metric field and its jets.

    ``metric_jet`` maps the coordinate seed jet (shape ``(dim,)``) to the
    metric matrix jet (shape ``(dim, dim)``); analytic for catalog entries,
    finite-difference backed for black-box fields.
    """

    dim: int
    box: np.ndarray                      # (dim, 2) closed intervals
    metric_jet: Callable[[Jet], Jet]
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.box = np.asarray(self.box, dtype=float).reshape(self.dim, 2)

    @classmethod
    def from_callable(cls, dim, box, metric_fn, name="", step=1e-4):
        """Black-box metric: jets come from the finite-difference fallback."""
        def mj(pj: Jet) -> Jet:
            return jets.fd_jet(metric_fn, pj.value, pj.order, step=step)
        return cls(dim, box, mj, name=name)

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.box[:, 0] - 1e-12)
                    and np.all(p <= self.box[:, 1] + 1e-12))

    def check_point(self, p):
        if not self.contains(p):
            raise PointOutOfDomain(f"{np.asarray(p)} outside chart box of {self.name!r}")

    def jets(self, p, order) -> Jet:
        p = np.asarray(p, dtype=float)
        key = (p.tobytes(), order)
        hit = self._cache.get(key)
        if hit is None:
            hit = self.metric_jet(Jet.coords(p, order))
            if len(self._cache) > 512:
                self._cache.clear()
            self._cache[key] = hit
        return hit

    def metric(self, p) -> np.ndarray:
        return self.jets(p, 0).value

    def inverse_metric(self, p) -> np.ndarray:
        g = self.metric(p)
        if np.linalg.cond(g) > COND_LIMIT:
            raise SingularMetric(f"metric condition number exceeds {COND_LIMIT:g}")
        return np.linalg.inv(g)


@dataclass
class PointFrame:
    """A g-orthonormal frame at one point, with index labels."""

    point: np.ndarray
    vectors: np.ndarray                  # rows are frame vectors
    labels: tuple

    def __post_init__(self):
        self.point = np.asarray(self.point, dtype=float)
        self.vectors = np.asarray(self.vectors, dtype=float)

    def orthonormality_residual(self, g: np.ndarray) -> float:
        gram = self.vectors @ g @ self.vectors.T
        return float(np.max(np.abs(gram - np.eye(len(self.vectors)))))


# ---------------------------------------------------------------------------
# connection and curvature
# ---------------------------------------------------------------------------

def christoffel(geom: ChartGeometry, p) -> np.ndarray:
    """Levi-Civita symbols Gamma^k_{ij} at p."""
    geom.check_point(p)
    j = geom.jets(p, 1)
    g, dg = j.value, j.grad             # dg[a, b, c] = d_c g_ab
    if np.linalg.cond(g) > COND_LIMIT:
        raise SingularMetric("metric condition number exceeds limit")
    ginv = np.linalg.inv(g)
    # Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
    return 0.5 * np.einsum("kl,jli->kij", ginv, dg) \
        + 0.5 * np.einsum("kl,ilj->kij", ginv, dg) \
        - 0.5 * np.einsum("kl,ijl->kij", ginv, dg)


def christoffel_with_derivative(geom: ChartGeometry, p):
    """Gamma^k_{ij} and its coordinate derivative d_c Gamma^k_{ij}."""
    geom.check_point(p)
    j = geom.jets(p, 2)
    gj = jets.jet_inv(j)
    half = 0.5
    # build Gamma as a jet-order-1 object directly from coefficient arrays
    g1, g2 = j.grad, j.hess
    gi0, gi1 = gj.value, gj.grad
    t = np.einsum("kl,jli->kij", gi0, g1) + np.einsum("kl,ilj->kij", gi0, g1) \
        - np.einsum("kl,ijl->kij", gi0, g1)
    gamma = half * t
    dt = (np.einsum("klc,jli->kijc", gi1, g1) + np.einsum("kl,jlic->kijc", gi0, g2)
          + np.einsum("klc,ilj->kijc", gi1, g1) + np.einsum("kl,iljc->kijc", gi0, g2)
          - np.einsum("klc,ijl->kijc", gi1, g1) - np.einsum("kl,ijlc->kijc", gi0, g2))
    return gamma, half * dt


def riemann(geom: ChartGeometry, p, frame: np.ndarray | None = None) -> np.ndarray:
    """Curvature R_{IJKL} = g(R(E_I, E_J) E_L, E_K) in the supplied frame.

    With ``frame=None`` the coordinate basis is used.
    """
    gamma, dgamma = christoffel_with_derivative(geom, p)
    # R^a_{bcd} e_a = R(e_c, e_d) e_b
    r_up = (np.einsum("adbc->abcd", dgamma)          # d_c Gamma^a_{db}
            - np.einsum("acbd->abcd", dgamma)        # d_d Gamma^a_{cb}
            + np.einsum("ace,edb->abcd", gamma, gamma)
            - np.einsum("ade,ecb->abcd", gamma, gamma))
    g = geom.metric(p)
    # R_{abcd} = g(R(e_c, e_d) e_b, e_a)
    r_low = np.einsum("ae,ebcd->abcd", g, r_up)
    # paper slots: R_{IJKL} = g(R(E_I, E_J) E_L, E_K) -> (a,b,c,d) = (K, L, I, J)
    r = np.einsum("klij->ijkl", r_low)
    if frame is not None:
        f = np.asarray(frame, dtype=float)
        r = np.einsum("ijkl,Ii,Jj,Kk,Ll->IJKL", r, f, f, f, f)
    return r


def riemann_up(geom: ChartGeometry, p) -> np.ndarray:
    """Coordinate curvature R^a_{bcd} with R(e_c, e_d) e_b = R^a_{bcd} e_a."""
    gamma, dgamma = christoffel_with_derivative(geom, p)
    return (np.einsum("adbc->abcd", dgamma)
            - np.einsum("acbd->abcd", dgamma)
            + np.einsum("ace,edb->abcd", gamma, gamma)
            - np.einsum("ade,ecb->abcd", gamma, gamma))


def sectional_curvature(geom: ChartGeometry, p, X, Y) -> float:
    """K(X, Y) = R(X,Y,X,Y) / (|X|^2 |Y|^2 - g(X,Y)^2)."""
    g = geom.metric(p)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    gram = (X @ g @ X) * (Y @ g @ Y) - (X @ g @ Y) ** 2
    if gram < 1e-14:
        raise DegenerateSection("|X wedge Y|^2 below 1e-14")
    r_up = riemann_up(geom, p)
    g_r = np.einsum("ae,ebcd->abcd", g, r_up)
    num = np.einsum("abcd,a,b,c,d->", g_r, X, Y, X, Y)
    return float(num / gram)


def ricci(geom: ChartGeometry, p) -> np.ndarray:
    """Ricci tensor Ric_{bd} (frame-trace of the curvature operator)."""
    r_up = riemann_up(geom, p)
    return np.einsum("abad->bd", r_up)


def laplace_beltrami(geom: ChartGeometry, scalar_jet_fn, p) -> float:
    """Trace-of-Hessian Laplacian of a scalar field with order-2 jets."""
    u = scalar_jet_fn(Jet.coords(np.asarray(p, dtype=float), 2))
    gamma = christoffel(geom, p)
    ginv = geom.inverse_metric(p)
    hess = u.hess - np.einsum("kij,k->ij", gamma, u.grad)
    return float(np.einsum("ij,ij->", ginv, hess))


def divergence_2tensor(geom: ChartGeometry, tensor_jet_fn, p) -> np.ndarray:
    """(div T)_k = g^{ij} (nabla_i T)_{jk} for a symmetric 2-tensor field."""
    t = tensor_jet_fn(Jet.coords(np.asarray(p, dtype=float), 1))
    gamma = christoffel(geom, p)
    ginv = geom.inverse_metric(p)
    nabla = (np.einsum("jki->ijk", t.grad)
             - np.einsum("lij,lk->ijk", gamma, t.value)
             - np.einsum("lik,jl->ijk", gamma, t.value))
    return np.einsum("ij,ijk->k", ginv, nabla)


def covariant_derivative_2tensor(geom: ChartGeometry, tensor_jet_fn, p) -> np.ndarray:
    """(nabla T)_{ijk} = (nabla_i T)(e_j, e_k)."""
    t = tensor_jet_fn(Jet.coords(np.asarray(p, dtype=float), 1))
    gamma = christoffel(geom, p)
    return (np.einsum("jki->ijk", t.grad)
            - np.einsum("lij,lk->ijk", gamma, t.value)
            - np.einsum("lik,jl->ijk", gamma, t.value))


def gradient(geom: ChartGeometry, scalar_jet_fn, p) -> np.ndarray:
    u = scalar_jet_fn(Jet.coords(np.asarray(p, dtype=float), 1))
    return geom.inverse_metric(p) @ u.grad


# ---------------------------------------------------------------------------
# frames
# ---------------------------------------------------------------------------

def gram_schmidt(g: np.ndarray, vectors: np.ndarray | None = None,
                 pivot: bool = True) -> np.ndarray:
    """Deterministic g-orthonormalisation of the rows of ``vectors``.

    Defaults to the coordinate basis; pivoting picks the largest remaining
    g-norm so the output is reproducible under row reordering.
    """
    m = g.shape[0]
    if vectors is None:
        vectors = np.eye(m)
    vecs = [np.asarray(v, dtype=float).copy() for v in vectors]
    out = []
    while vecs:
        if pivot:
            norms = [float(v @ g @ v) for v in vecs]
            idx = int(np.argmax(norms))
        else:
            idx = 0
        v = vecs.pop(idx)
        for e in out:
            v = v - (e @ g @ v) * e
        nrm = np.sqrt(max(v @ g @ v, 0.0))
        if nrm < 1e-12:
            continue
        out.append(v / nrm)
    return np.array(out)


def random_orthonormal_frame(g: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    m = g.shape[0]
    return gram_schmidt(g, rng.standard_normal((m, m)), pivot=False)
