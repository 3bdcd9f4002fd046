"""Eigen-analysis of the first fundamental form.

Eigenvalues are grouped (repeated eigenvalues are the normal case for the
maps studied here, which double every eigenvalue), frames are extended to a
neighbourhood by maximal-overlap alignment, and eigenvalue derivatives come
through three independent routes: two frame formulas and a spectral-projector
trace that serves as their oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry, jets, maps
from .errors import EigenvalueCollision, NoFibre, RankDeficient
from .geometry import PointFrame
from .jets import Jet
from .maps import SmoothMapSpec

EPS_RANK = 1e-9
GROUP_RTOL = 1e-9
GAP_MIN = 1e-7
FRAME_STEP = 1e-5


@dataclass
class SpectralData:
    """Spectrum of phi^*h at a point with a g-orthonormal eigenframe."""

    eigenvalues: np.ndarray          # descending lambda_i^2 >= 0
    frame: PointFrame                # rows E_i
    rank: int
    groups: list                     # lists of frame indices, one per eigenvalue
    eps_rank: float

    @property
    def horizontal_indices(self):
        return [i for i in range(len(self.eigenvalues))
                if self.eigenvalues[i] > self.eps_rank]

    @property
    def vertical_indices(self):
        return [i for i in range(len(self.eigenvalues))
                if self.eigenvalues[i] <= self.eps_rank]

    def group_of(self, i) -> list:
        for grp in self.groups:
            if i in grp:
                return grp
        raise IndexError(i)

    def group_gap(self, i) -> float:
        """Distance from i's group eigenvalue to the nearest other group."""
        mine = self.eigenvalues[self.group_of(i)[0]]
        others = [abs(self.eigenvalues[g[0]] - mine)
                  for g in self.groups if i not in g]
        return min(others) if others else np.inf

    def projector(self, i) -> np.ndarray:
        """g-orthogonal spectral projector of i's group (endomorphism)."""
        grp = self.group_of(i)
        E = self.frame.vectors
        return sum(np.outer(E[j], self._g @ E[j]) for j in grp)

    _g: np.ndarray = None


def _group_indices(vals):
    groups, cur = [], [0]
    for i in range(1, len(vals)):
        a, b = vals[i - 1], vals[i]
        if abs(a - b) <= GROUP_RTOL * max(1.0, abs(a), abs(b)):
            cur.append(i)
        else:
            groups.append(cur)
            cur = [i]
    groups.append(cur)
    return groups


def _generalized_eigh(pb, g):
    L = np.linalg.cholesky(g)
    Y = np.linalg.solve(L, pb)
    C = np.linalg.solve(L, Y.T).T
    C = 0.5 * (C + C.T)
    w, v = np.linalg.eigh(C)
    E = np.linalg.solve(L.T, v)          # columns, g-orthonormal
    order = np.argsort(-w, kind="stable")
    return w[order], E[:, order]


def eigen_analyze(m: SmoothMapSpec, p, eps_rank: float = EPS_RANK) -> SpectralData:
    """Spectrum and deterministic g-orthonormal eigenframe at ``p``."""
    g = m.domain.metric(p)
    pb = maps.pullback_metric(m, p)
    w, E = _generalized_eigh(pb, g)
    groups = _group_indices(w)
    # deterministic tie-breaking: re-seed each group frame from the
    # coordinate basis in coordinate order (Gram-Schmidt inside the group)
    rows = np.zeros_like(E.T)
    dim = g.shape[0]
    for grp in groups:
        cols = E[:, grp]
        proj = cols @ cols.T @ g                     # acts on coordinate vectors
        chosen = []
        for a in range(dim):
            v = proj @ np.eye(dim)[a]
            for c in chosen:
                v = v - (c @ g @ v) * c
            nrm = np.sqrt(max(v @ g @ v, 0.0))
            if nrm > 1e-6:
                chosen.append(v / nrm)
            if len(chosen) == len(grp):
                break
        if len(chosen) != len(grp):                  # fall back to raw vectors
            chosen = [cols[:, j] for j in range(len(grp))]
        for idx, v in zip(grp, chosen):
            rows[idx] = v
    frame = PointFrame(point=np.asarray(p, dtype=float), vectors=rows,
                       labels=tuple(str(i) for i in range(dim)))
    rank = int(np.sum(w > eps_rank))
    sd = SpectralData(eigenvalues=w, frame=frame, rank=rank,
                      groups=groups, eps_rank=eps_rank)
    sd._g = g
    return sd


def reconstruction_residual(m: SmoothMapSpec, p, sd: SpectralData) -> float:
    g = m.domain.metric(p)
    E = sd.frame.vectors
    rebuilt = sum(sd.eigenvalues[i] * np.outer(g @ E[i], g @ E[i])
                  for i in range(len(E)))
    return float(np.max(np.abs(rebuilt - maps.pullback_metric(m, p))))


# ---------------------------------------------------------------------------
# aligned frame fields and the frame connection
# ---------------------------------------------------------------------------

def align_frame(base: SpectralData, m: SmoothMapSpec, q) -> np.ndarray:
    """Eigenframe at ``q`` aligned to the base frame by maximal overlap."""
    gq = m.domain.metric(q)
    pbq = maps.pullback_metric(m, q)
    wq, Eq = _generalized_eigh(pbq, gq)
    out = np.zeros_like(base.frame.vectors)
    for grp in base.groups:
        Cq = Eq[:, grp]
        Cp = base.frame.vectors[grp].T
        M = Cq.T @ gq @ Cp
        U, _, Wt = np.linalg.svd(M)
        aligned = Cq @ (U @ Wt)
        for col, idx in enumerate(grp):
            out[idx] = aligned[:, col]
    return out


def frame_field_derivatives(m: SmoothMapSpec, p, sd: SpectralData,
                            step: float = FRAME_STEP) -> np.ndarray:
    """dE[c, I, l] = d_c (E_I)^l of the aligned eigenframe field."""
    p = np.asarray(p, dtype=float)
    dim = len(p)
    dE = np.zeros((dim, dim, dim))
    for c in range(dim):
        dp = np.zeros(dim)
        dp[c] = step
        fp = align_frame(sd, m, p + dp)
        fm = align_frame(sd, m, p - dp)
        dE[c] = (fp - fm) / (2 * step)
    return dE


def frame_connection(m: SmoothMapSpec, p, sd: SpectralData,
                     dE: np.ndarray | None = None) -> np.ndarray:
    """Gamma[I, J, K] = g(nabla_{E_I} E_J, E_K) for the aligned frame field."""
    if dE is None:
        dE = frame_field_derivatives(m, p, sd)
    g = m.domain.metric(p)
    gamma = geometry.christoffel(m.domain, p)
    E = sd.frame.vectors
    # nabla_{e_c} E_J = d_c E_J + Gamma(e_c, E_J)
    cov = dE + np.einsum("lck,Jk->cJl", gamma, E)
    return np.einsum("Ic,cJl,lr,Kr->IJK", E, cov, g, E)


# ---------------------------------------------------------------------------
# eigenvalue derivatives (three routes)
# ---------------------------------------------------------------------------

def _require_gap(sd: SpectralData, i):
    if sd.group_gap(i) < GAP_MIN:
        raise EigenvalueCollision(
            f"group of eigenvalue {i} within {GAP_MIN:g} of another group")


def endomorphism_jet(m: SmoothMapSpec, p, order=1) -> Jet:
    """G = g^{-1} phi^*h as a matrix jet."""
    pj = Jet.coords(np.asarray(p, dtype=float), order + 1)
    pb = maps.pullback_metric_as_jet(m, pj)
    ginv = jets.jet_inv(m.domain.metric_jet(pj).truncate(order))
    return jets.jet_einsum("ij,jk->ik", ginv, pb)


def eigenvalue_derivative_direct(m: SmoothMapSpec, p, i, direction,
                                 sd: SpectralData | None = None) -> float:
    """Directional derivative of the grouped eigenvalue via projector trace."""
    if sd is None:
        sd = eigen_analyze(m, p)
    _require_gap(sd, i)
    grp = sd.group_of(i)
    G = endomorphism_jet(m, p, order=1)
    dG = np.einsum("ijc,c->ij", G.grad, np.asarray(direction, dtype=float))
    P = sd.projector(i)
    return float(np.trace(P @ dG) / len(grp))


def eigenvalue_derivative_formula_a(m: SmoothMapSpec, p, i, k,
                                    sd: SpectralData) -> float:
    """E_k(lambda_i^2) = 2 h(nabla dphi(E_k, E_i), dphi(E_i)); group-averaged."""
    _require_gap(sd, i)
    d = m.point_data(p)
    h = m.codomain.metric(m.value(p))
    E = sd.frame.vectors
    grp = sd.group_of(i)
    vals = []
    for j in grp:
        s = np.einsum("ija,i,j->a", d.sff, E[k], E[j])
        vals.append(2.0 * float(s @ h @ (d.J_phi @ E[j])))
    return float(np.mean(vals))


def eigenvalue_derivative_formula_b(m: SmoothMapSpec, p, i, k,
                                    sd: SpectralData,
                                    gamma_frame: np.ndarray | None = None) -> float:
    """Second lemma route, valid for i != k; needs the frame connection."""
    if i == k:
        raise IndexError("formula is stated for i != k only")
    _require_gap(sd, i)
    if gamma_frame is None:
        gamma_frame = frame_connection(m, p, sd)
    d = m.point_data(p)
    h = m.codomain.metric(m.value(p))
    E = sd.frame.vectors
    lam = sd.eigenvalues
    members = [j for j in sd.group_of(i) if j != k]
    if not members:
        raise IndexError("eigen-group of i contains only k")
    vals = []
    dk = d.J_phi @ E[k]
    for j in members:
        s = np.einsum("ija,i,j->a", d.sff, E[j], E[j])
        vals.append(-2.0 * float(dk @ h @ s)
                    + 2.0 * (lam[j] - lam[k]) * gamma_frame[j, j, k])
    return float(np.mean(vals))


# ---------------------------------------------------------------------------
# mean curvatures
# ---------------------------------------------------------------------------

def _newton_elementary(traces):
    """Elementary symmetric functions e_1..e_r from power sums t_1..t_r."""
    e = [None] * (len(traces) + 1)
    e[0] = 1.0
    for r in range(1, len(traces) + 1):
        acc = 0.0
        sign = 1.0
        for k in range(1, r + 1):
            acc = acc + sign * e[r - k] * traces[k - 1]
            sign = -sign
        e[r] = acc / r
    return e[1:]


def _newton_elementary_jet(traces):
    e = [1.0] + [None] * len(traces)
    for r in range(1, len(traces) + 1):
        acc = None
        sign = 1.0
        for k in range(1, r + 1):
            term = sign * (e[r - k] * traces[k - 1])
            acc = term if acc is None else acc + term
            sign = -sign
        e[r] = acc * (1.0 / r)
    return e[1:]


def mean_curvature_horizontal(m: SmoothMapSpec, p,
                              sd: SpectralData | None = None) -> np.ndarray:
    """mu^H = (1/n) grad^V ln(lambda_1 ... lambda_n) at a full-rank point.

    The eigenvalue product is the top nonvanishing elementary symmetric
    function of G = g^{-1} phi^*h, so its logarithmic gradient is available
    analytically through jets.
    """
    if sd is None:
        sd = eigen_analyze(m, p)
    n = m.codomain.dim
    if sd.rank != n:
        raise RankDeficient(f"rank {sd.rank} < codomain dimension {n}")
    G = endomorphism_jet(m, p, order=1)
    traces = []
    Gk = G
    for _ in range(n):
        traces.append(jets.jet_trace(Gk))
        Gk = jets.jet_einsum("ij,jk->ik", Gk, G)
    en = _newton_elementary_jet(traces)[n - 1]
    dlog = en.grad / en.value                 # d ln(prod lambda_i^2)
    g = m.domain.metric(p)
    grad = np.linalg.solve(g, 0.5 * dlog)
    E = sd.frame.vectors
    PV = sum(np.outer(E[a], g @ E[a]) for a in sd.vertical_indices)
    return (PV @ grad) / n


def mean_curvature_horizontal_frames(m: SmoothMapSpec, p, sd: SpectralData,
                                     gamma_frame: np.ndarray) -> np.ndarray:
    """Cross-check route: (1/n) sum_i (nabla_{E_i} E_i)^V."""
    n = m.codomain.dim
    E = sd.frame.vectors
    acc = np.zeros(m.domain.dim)
    for i in sd.horizontal_indices:
        for a in sd.vertical_indices:
            acc += gamma_frame[i, i, a] * E[a]
    return acc / n


def mean_curvature_vertical(m: SmoothMapSpec, p, sd: SpectralData | None = None,
                            gamma_frame: np.ndarray | None = None) -> np.ndarray:
    """Fibre mean curvature mu^V = (1/(m-n)) sum_alpha (nabla_{E_alpha} E_alpha)^H."""
    if sd is None:
        sd = eigen_analyze(m, p)
    n = m.codomain.dim
    mm = m.domain.dim
    if sd.rank != n:
        raise RankDeficient(f"rank {sd.rank} < codomain dimension {n}")
    if mm == n:
        raise NoFibre("map has no fibres (m == n)")
    if gamma_frame is None:
        gamma_frame = frame_connection(m, p, sd)
    E = sd.frame.vectors
    acc = np.zeros(mm)
    for a in sd.vertical_indices:
        for k in sd.horizontal_indices:
            acc += gamma_frame[a, a, k] * E[k]
    return acc / (mm - n)


def lie_derivative_identity(m: SmoothMapSpec, p, v_idx, x_idx, y_idx,
                            sd: SpectralData, gamma_frame: np.ndarray) -> tuple:
    """Both sides of (L_V g)(X, Y) = -V(ln lambda^2) g(X, Y) on an eigen-group."""
    if v_idx not in sd.vertical_indices:
        raise IndexError("V must be a vertical frame index")
    if sd.group_of(x_idx) is not sd.group_of(y_idx):
        raise IndexError("X and Y must belong to one eigen-group")
    lhs = gamma_frame[x_idx, v_idx, y_idx] + gamma_frame[y_idx, v_idx, x_idx]
    lam2 = sd.eigenvalues[x_idx]
    E = sd.frame.vectors
    dv = eigenvalue_derivative_direct(m, p, x_idx, E[v_idx], sd)
    rhs = -(dv / lam2) * (1.0 if x_idx == y_idx else 0.0)
    return float(lhs), float(rhs)
