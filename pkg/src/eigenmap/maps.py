"""First and second fundamental forms of a map, tension, stress-energy."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import geometry, jets
from .errors import CodomainExit
from .geometry import ChartGeometry
from .jets import Jet


@dataclass
class SmoothMapSpec:
    """Coordinate components of a smooth map with jets to order 3."""

    domain: ChartGeometry
    codomain: ChartGeometry
    component_jet: Callable[[Jet], Jet]   # coord seed (m,) -> components (n,)
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def jets(self, p, order) -> Jet:
        p = np.asarray(p, dtype=float)
        key = (p.tobytes(), order)
        hit = self._cache.get(key)
        if hit is None:
            hit = self.component_jet(Jet.coords(p, order))
            if len(self._cache) > 512:
                self._cache.clear()
            self._cache[key] = hit
        return hit

    def value(self, p) -> np.ndarray:
        return self.jets(p, 0).value

    def jacobian(self, p) -> np.ndarray:
        return self.jets(p, 1).grad

    def image_point(self, p) -> np.ndarray:
        q = self.value(p)
        if not self.codomain.contains(q):
            raise CodomainExit(f"phi({np.asarray(p)}) = {q} leaves the codomain box")
        return q

    def point_data(self, p) -> "MapPointData":
        p = np.asarray(p, dtype=float)
        key = ("pd", p.tobytes())
        hit = self._cache.get(key)
        if hit is None:
            hit = MapPointData.compute(self, p)
            self._cache[key] = hit
        return hit


@dataclass
class MapPointData:
    """Per-point map data, computed once and reused by every identity check."""

    p: np.ndarray
    J_phi: np.ndarray          # (n, m)
    pullback: np.ndarray       # (m, m)
    sff: np.ndarray            # (m, m, n): nabla dphi(d_i, d_j)^a
    tension: np.ndarray        # (n,)
    energy_density: float

    @classmethod
    def compute(cls, m: SmoothMapSpec, p) -> "MapPointData":
        q = m.image_point(p)
        phi2 = m.jets(p, 2)
        J = phi2.grad                                    # (n, m)
        h = m.codomain.metric(q)
        pb = np.einsum("ai,ab,bj->ij", J, h, J)
        gamma_m = geometry.christoffel(m.domain, p)
        gamma_n = geometry.christoffel(m.codomain, q)
        # nabla dphi_{ij}^a = d_i d_j phi^a - Gamma^k_{ij} d_k phi^a
        #                     + Gamma~^a_{bc} d_i phi^b d_j phi^c
        sff = (np.einsum("aij->ija", phi2.hess)
               - np.einsum("kij,ak->ija", gamma_m, J)
               + np.einsum("abc,bi,cj->ija", gamma_n, J, J))
        ginv = m.domain.inverse_metric(p)
        tau = np.einsum("ij,ija->a", ginv, sff)
        e = 0.5 * float(np.einsum("ij,ij->", ginv, pb))
        return cls(p=np.asarray(p, dtype=float), J_phi=J, pullback=pb,
                   sff=sff, tension=tau, energy_density=e)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def pullback_metric(m: SmoothMapSpec, p) -> np.ndarray:
    return m.point_data(p).pullback


def jacobian_jet(m: SmoothMapSpec, pj: Jet) -> Jet:
    """dphi as a (n, m)-matrix jet, one order below the seed jet.

    The coefficient arrays of the map jet are symmetric in their derivative
    axes, so the first derivative axis can serve as the Jacobian column.
    """
    phi = m.component_jet(pj)
    if phi.order < 1:
        raise ValueError("need at least order-1 map jets")
    return Jet(pj.n, phi.order - 1, [phi.c[k + 1] for k in range(phi.order)])


def pullback_metric_as_jet(m: SmoothMapSpec, pj: Jet) -> Jet:
    """phi^*h as a jet field; seed order o gives pullback jets of order o-1."""
    phi = m.component_jet(pj)
    jac = jacobian_jet(m, pj)
    h = m.codomain.metric_jet(phi.truncate(jac.order))
    hj = jets.jet_einsum("ab,bj->aj", h, jac)
    return jets.jet_einsum("ai,aj->ij", jac, hj)


def second_fundamental_form(m: SmoothMapSpec, p) -> np.ndarray:
    return m.point_data(p).sff


def tension(m: SmoothMapSpec, p) -> np.ndarray:
    return m.point_data(p).tension


def tension_norm(m: SmoothMapSpec, p) -> float:
    d = m.point_data(p)
    h = m.codomain.metric(m.value(p))
    return float(np.sqrt(d.tension @ h @ d.tension))


def energy_density(m: SmoothMapSpec, p) -> float:
    return m.point_data(p).energy_density


def energy_density_jet(m: SmoothMapSpec, pj: Jet) -> Jet:
    g = m.domain.metric_jet(pj).truncate(pj.order - 1)
    pb = pullback_metric_as_jet(m, pj)
    return 0.5 * jets.jet_trace(jets.jet_einsum("ij,jk->ik", jets.jet_inv(g), pb))


def stress_energy(m: SmoothMapSpec, p) -> np.ndarray:
    d = m.point_data(p)
    g = m.domain.metric(p)
    return d.energy_density * g - d.pullback


def stress_energy_jet(m: SmoothMapSpec, pj: Jet) -> Jet:
    g = m.domain.metric_jet(pj).truncate(pj.order - 1)
    pb = pullback_metric_as_jet(m, pj)
    e = 0.5 * jets.jet_trace(jets.jet_einsum("ij,jk->ik", jets.jet_inv(g), pb))
    return jets.jet_einsum("ij,->ij", g, e) - pb


def pullback_field(m: SmoothMapSpec):
    """phi^*h as a tensor field usable by the geometry operators."""
    return lambda pj: pullback_metric_as_jet(m, Jet.coords(pj.value, pj.order + 1))


def stress_energy_field(m: SmoothMapSpec):
    return lambda pj: stress_energy_jet(m, Jet.coords(pj.value, pj.order + 1))


def energy_field(m: SmoothMapSpec):
    return lambda pj: energy_density_jet(m, Jet.coords(pj.value, pj.order + 1))


def div_stress_energy(m: SmoothMapSpec, p) -> np.ndarray:
    return geometry.divergence_2tensor(m.domain, stress_energy_field(m), p)


def div_pullback(m: SmoothMapSpec, p) -> np.ndarray:
    return geometry.divergence_2tensor(m.domain, pullback_field(m), p)


def energy_differential(m: SmoothMapSpec, p) -> np.ndarray:
    ej = energy_density_jet(m, Jet.coords(np.asarray(p, dtype=float), 2))
    return ej.grad


def pullback_covariant_derivative(m: SmoothMapSpec, p, X, Y, Z) -> float:
    """(nabla_X phi^*h)(Y, Z) from jets of the pullback field."""
    nabla = pullback_covariant_derivative_tensor(m, p)
    return float(np.einsum("ijk,i,j,k->", nabla, X, Y, Z))


def pullback_covariant_derivative_tensor(m: SmoothMapSpec, p) -> np.ndarray:
    return geometry.covariant_derivative_2tensor(m.domain, pullback_field(m), p)


def sff_pairing(m: SmoothMapSpec, p, X, Y, Z) -> float:
    """h(nabla dphi(X, Y), dphi(Z)) + h(dphi(Y), nabla dphi(X, Z))."""
    d = m.point_data(p)
    h = m.codomain.metric(m.value(p))
    sXY = np.einsum("ija,i,j->a", d.sff, X, Y)
    sXZ = np.einsum("ija,i,j->a", d.sff, X, Z)
    dY = d.J_phi @ np.asarray(Y, dtype=float)
    dZ = d.J_phi @ np.asarray(Z, dtype=float)
    return float(sXY @ h @ dZ + dY @ h @ sXZ)


def sff_norms(m: SmoothMapSpec, p) -> tuple[float, float]:
    """(|nabla phi^*h|, |nabla dphi|) with indices raised by g and h."""
    d = m.point_data(p)
    ginv = m.domain.inverse_metric(p)
    h = m.codomain.metric(m.value(p))
    nabla = pullback_covariant_derivative_tensor(m, p)
    n1 = np.einsum("ijk,abc,ia,jb,kc->", nabla, nabla, ginv, ginv, ginv)
    n2 = np.einsum("ija,klb,ik,jl,ab->", d.sff, d.sff, ginv, ginv, h)
    return float(np.sqrt(max(n1, 0.0))), float(np.sqrt(max(n2, 0.0)))
