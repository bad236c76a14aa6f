"""Pointwise submanifold geometry: fundamental forms, frames, shape
operators, normal connection and curvature, and the intrinsic curvature
quantities (Riemann, Ricci, scalar, Schouten, sectional).

The normal frame is built by Gram-Schmidt (with signs, so it also handles
Lorentzian ambient spaces) applied to the ambient basis projected to the
normal space.  The same construction is run on jet scalars to obtain exact
derivatives of the frame, which gives the normal connection and its
curvature without finite differencing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ambient import QUADRIC_TOL, AmbientSpace
from .errors import DimensionError, FrameError, ImmersionError
from .jets import Jet, evaluate_jet, sqrt as jsqrt
from .jets.maps import Jet3, SmoothMap

RANK_TOL = 1e-8


# ---------------------------------------------------------------------------
# generic vector algebra over floats or jets
# ---------------------------------------------------------------------------

def _vdot(sig, u, v):
    acc = sig[0] * (u[0] * v[0])
    for s, a, b in zip(sig[1:], u[1:], v[1:]):
        acc = acc + s * (a * b)
    return acc


def _axpy(c, u, v):
    """v + c*u componentwise."""
    return [b + c * a for a, b in zip(u, v)]


def _scale(c, u):
    return [c * a for a in u]


def _val(x):
    return x.v if isinstance(x, Jet) else float(x)


def orthonormalize(sig, vectors, tol=1e-12):
    """Gram-Schmidt with signs for a (possibly indefinite) diagonal metric.

    Returns (units, eps) where each unit u satisfies <u,u> = eps in {-1,+1}.
    Raises FrameError when a vector degenerates against the span built so far.
    """
    units, eps = [], []
    for v in vectors:
        r = list(v)
        for u, e in zip(units, eps):
            c = _vdot(sig, r, u)
            r = _axpy(-e * c, u, r)
        q = _vdot(sig, r, r)
        qv = _val(q)
        scale = max(sum(_val(a) ** 2 for a in v), 1.0)
        if abs(qv) < tol * scale:
            raise FrameError("Gram-Schmidt breakdown: degenerate residual")
        e = 1.0 if qv > 0 else -1.0
        norm = jsqrt(q * e) if isinstance(q, Jet) else float(np.sqrt(qv * e))
        units.append(_scale(1.0 / norm if not isinstance(norm, Jet) else norm ** -1.0, r))
        eps.append(e)
    return units, eps


def complement_frame(sig, span_units, span_eps, count, pivot_order=None, tol=1e-10):
    """Extend an orthonormalized spanning set to the full space by projecting
    the ambient basis, pivoting on the largest residual self inner product."""
    dim = len(sig)
    order = list(pivot_order) if pivot_order is not None else None
    units = list(span_units)
    eps = list(span_eps)
    frame, frame_eps, chosen = [], [], []
    candidates = order if order is not None else list(range(dim))
    for _ in range(count):
        best = None
        for b in candidates:
            if b in chosen:
                continue
            r = [Jet.constant(0.0, units[0][0].n, units[0][0].order) if isinstance(units[0][0], Jet) else 0.0
                 for _ in range(dim)]
            r[b] = r[b] + 1.0
            for u, e in zip(units, eps):
                c = _vdot(sig, r, u)
                r = _axpy(-e * c, u, r)
            q = abs(_val(_vdot(sig, r, r)))
            if best is None or q > best[0] + 1e-15:
                best = (q, b, r)
            if order is not None:
                break  # fixed order: take candidates as given
        if best is None or best[0] < tol:
            raise FrameError("cannot complete normal frame: residuals degenerate")
        q, b, r = best
        if order is not None:
            candidates = [c for c in candidates if c != b]
        chosen.append(b)
        qq = _vdot(sig, r, r)
        e = 1.0 if _val(qq) > 0 else -1.0
        norm = jsqrt(qq * e) if isinstance(qq, Jet) else float(np.sqrt(_val(qq) * e))
        unit = _scale(norm ** -1.0 if isinstance(norm, Jet) else 1.0 / norm, r)
        units.append(unit)
        eps.append(e)
        frame.append(unit)
        frame_eps.append(e)
    return frame, frame_eps, chosen


# ---------------------------------------------------------------------------
# extrinsic data
# ---------------------------------------------------------------------------

@dataclass
class ExtrinsicData:
    point: np.ndarray
    ambient: AmbientSpace
    jet: Jet3
    tangent: np.ndarray       # (n, A) coordinate vectors
    g: np.ndarray             # (n, n) induced metric
    g_inv: np.ndarray
    lame: np.ndarray | None   # (n,) when the net is orthogonal
    frame: np.ndarray         # (p, A) pseudo-orthonormal normal frame
    frame_eps: np.ndarray     # (p,) signs <xi_a, xi_a>
    alpha: np.ndarray         # (n, n, A) second fundamental form
    h_comp: np.ndarray        # (p, n, n) components <alpha, xi_a>
    shape_ops: np.ndarray     # (p, n, n) in the coordinate basis
    onb: np.ndarray           # (n, n) columns = orthonormal tangent basis
    S: np.ndarray             # (p, n, n) symmetric shape operators in the ONB
    H: np.ndarray             # (A,) mean curvature vector

    @property
    def n(self):
        return self.g.shape[0]

    @property
    def p(self):
        return self.frame.shape[0]

    def ambient_inner(self, u, v):
        return self.ambient.inner(u, v)

    def alpha_onb(self):
        """Second fundamental form over the orthonormal tangent basis."""
        return np.einsum("ki,lj,klA->ijA", self.onb, self.onb, self.alpha)

    def normal_project(self, v):
        """Projection of an ambient vector onto the normal space."""
        sig = self.ambient.signature
        out = np.zeros_like(np.asarray(v, float))
        for xi, e in zip(self.frame, self.frame_eps):
            out = out + e * float(np.sum(sig * v * xi)) * xi
        return out

    def shape_operator(self, xi):
        """A_xi in the ONB for an arbitrary normal vector xi."""
        sig = self.ambient.signature
        coeffs = np.array([e * float(np.sum(sig * xi * f))
                           for f, e in zip(self.frame, self.frame_eps)])
        return np.einsum("a,aij->ij", coeffs, self.S)


def _net_is_orthogonal(g, rel=1e-8):
    d = np.sqrt(np.diag(g))
    off = g - np.diag(np.diag(g))
    return np.max(np.abs(off)) <= rel * np.max(d) ** 2 if off.size else True


def fundamental_forms(smooth_map: SmoothMap, ambient: AmbientSpace, point,
                      jet: Jet3 | None = None, pivot_order=None) -> ExtrinsicData:
    """Complete pointwise extrinsic data of an immersion."""
    point = np.asarray(point, float)
    if jet is None:
        jet = evaluate_jet(smooth_map, point, 3)
    n = jet.n
    A = jet.codim
    if A != ambient.flat_dim:
        raise ValueError("map codomain does not match ambient realization dim")
    sig = ambient.signature
    G = np.diag(sig.astype(float))
    T = jet.d1                                  # (n, A)
    g = T @ G @ T.T
    g = 0.5 * (g + g.T)
    evals = np.linalg.eigvalsh(g)
    if evals[0] <= RANK_TOL * max(evals[-1], 1.0):
        raise ImmersionError(f"rank-deficient differential at {point}")

    span = [list(T[i]) for i in range(n)]
    if ambient.is_space_form:
        if ambient.quadric_defect(jet.value) > 1e3 * QUADRIC_TOL * max(1.0, abs(1.0 / ambient.c)):
            raise ValueError("evaluator does not land on the model quadric")
        span.append(list(ambient.position_normal(jet.value)))
    span_units, span_eps = orthonormalize(sig, span)

    p = A - len(span)
    frame_list, frame_eps, _ = complement_frame(sig, span_units, span_eps, p,
                                                pivot_order=pivot_order)
    frame = np.array(frame_list, float)
    frame_eps = np.array(frame_eps)

    # second fundamental form: normal projection of the second derivatives
    g_inv = np.linalg.inv(g)
    alpha = np.zeros((n, n, A))
    su = np.array([u for u in span_units], float)
    se = np.array(span_eps)
    for i in range(n):
        for j in range(i, n):
            v = jet.d2[i, j]
            coeffs = se * (su @ (sig * v))
            a = v - coeffs @ su
            alpha[i, j] = alpha[j, i] = a

    h_comp = np.einsum("ijA,A,aA->aij", alpha, sig.astype(float), frame)
    shape_ops = np.einsum("ij,ajk->aik", g_inv, h_comp)
    H = np.einsum("ij,ijA->A", g_inv, alpha) / n

    L = np.linalg.cholesky(g)
    B = np.linalg.inv(L).T                     # columns: ONB in coordinates
    S = np.einsum("ki,akl,lj->aij", B, h_comp, B)
    S = 0.5 * (S + S.transpose(0, 2, 1))

    lame = np.sqrt(np.diag(g)) if _net_is_orthogonal(g) else None
    return ExtrinsicData(point, ambient, jet, T, g, g_inv, lame, frame,
                         frame_eps, alpha, h_comp, shape_ops, B, S, H)


# ---------------------------------------------------------------------------
# normal connection and its curvature
# ---------------------------------------------------------------------------

@dataclass
class NormalBundleData:
    gamma: np.ndarray          # (n, p, p) connection coefficients Gamma_{i,a}^b
    r_perp_frame: np.ndarray   # (n, n, p, p) from frame differentiation
    r_perp_commutator: np.ndarray  # (n, n, p, p) from shape-operator commutators
    disagreement: float

    def norm(self):
        return float(np.max(np.abs(self.r_perp_frame)))


def _jet_components(jet: Jet3, order=2):
    """Ambient vectors of the map and its tangent basis as jet scalars of the
    given order in the chart variables."""
    n = jet.n
    value = [Jet(n, order, jet.value[a], jet.d1[:, a].copy(), jet.d2[:, :, a].copy())
             for a in range(jet.codim)]
    tangent = [[Jet(n, order, jet.d1[i, a], jet.d2[:, i, a].copy(), jet.d3[:, :, i, a].copy())
                for a in range(jet.codim)] for i in range(n)]
    return value, tangent


def normal_connection_and_curvature(smooth_map: SmoothMap, ambient: AmbientSpace,
                                    point, ext: ExtrinsicData | None = None,
                                    pivot_order=None) -> NormalBundleData:
    """Normal connection coefficients and R-perp, computed two independent
    ways: (a) exact differentiation of the Gram-Schmidt frame through jets,
    (b) shape-operator commutators (Ricci equation)."""
    point = np.asarray(point, float)
    jet = evaluate_jet(smooth_map, point, 3)
    if ext is None:
        ext = fundamental_forms(smooth_map, ambient, point, jet=jet)
    n, p, A = ext.n, ext.p, jet.codim
    sig = ambient.signature

    value, tangent = _jet_components(jet, order=2)
    span = list(tangent)
    if ambient.is_space_form:
        r = ambient.radius
        span.append([c * (1.0 / r) for c in value])
    units, eps_span = orthonormalize(sig, span)
    # pivot order frozen from the float computation for frame consistency
    if pivot_order is None:
        float_span = [list(jet.d1[i]) for i in range(n)]
        if ambient.is_space_form:
            float_span.append(list(ambient.position_normal(jet.value)))
        fu, fe = orthonormalize(sig, float_span)
        _, _, pivot_order = complement_frame(sig, fu, fe, p)
    frame, frame_eps, _ = complement_frame(sig, units, eps_span, p,
                                           pivot_order=pivot_order)
    frame_eps = np.array(frame_eps)

    # Gamma_{i,a}^b = eps_b <d_i xi_a, xi_b>, carried to first order in x
    def partial(jet_scalar, i, order=1):
        return Jet(n, order, jet_scalar.g[i], jet_scalar.h[i].copy())

    gamma_jets = [[[None] * p for _ in range(p)] for _ in range(n)]
    for i in range(n):
        for a in range(p):
            dxi = [partial(frame[a][c], i) for c in range(A)]
            for b in range(p):
                xib = [Jet(n, 1, frame[b][c].v, frame[b][c].g.copy()) for c in range(A)]
                gamma_jets[i][a][b] = frame_eps[b] * _vdot(sig, dxi, xib)

    gamma = np.array([[[gamma_jets[i][a][b].v for b in range(p)] for a in range(p)]
                      for i in range(n)])
    dgamma = np.array([[[[gamma_jets[j][a][b].g[i] for b in range(p)] for a in range(p)]
                        for j in range(n)] for i in range(n)])  # (i, j, a, b)

    r_frame = np.zeros((n, n, p, p))
    for i in range(n):
        for j in range(n):
            comm = gamma[j] @ gamma[i] - gamma[i] @ gamma[j]  # (a,c)@(c,b)
            r_frame[i, j] = dgamma[i, j] - dgamma[j, i] + comm

    # Ricci equation: <R-perp(d_i, d_j) xi_a, xi_b> = <[A_a, A_b] d_i, d_j>
    r_comm = np.zeros((n, n, p, p))
    M = ext.shape_ops  # (p, n, n), coordinate basis
    for a in range(p):
        for b in range(p):
            C = M[a] @ M[b] - M[b] @ M[a]
            r_comm[:, :, a, b] = ext.g @ C  # (<[A_b,A_a] d_j, d_i>)_{ij} -> fix below
    # components: <[A_b,A_a] d_i, d_j> = (g @ C)_{j i}; transpose the grid part
    r_comm = r_comm.transpose(1, 0, 2, 3)
    # express route (a) in the same metric pairing: <R(d_i,d_j)xi_a, xi_b>
    r_frame_pair = np.einsum("ijab,b->ijab", r_frame, frame_eps.astype(float))

    disagreement = float(np.max(np.abs(r_frame_pair - r_comm))) if p > 0 else 0.0
    return NormalBundleData(gamma, r_frame_pair, r_comm, disagreement)


# ---------------------------------------------------------------------------
# intrinsic curvature
# ---------------------------------------------------------------------------

@dataclass
class CurvaturePack:
    """Curvature quantities over an orthonormal tangent basis.

    Convention: riemann[i, j, k, l] = R(e_i, e_j, e_k, e_l)
    = <alpha(e_i, e_l), alpha(e_j, e_k)> - <alpha(e_i, e_k), alpha(e_j, e_l)>
    (+ the constant-curvature term for space-form ambients), so that the
    sectional curvature of the (e_i, e_j) plane is riemann[i, j, j, i].
    """

    riemann: np.ndarray   # (n, n, n, n)
    ricci: np.ndarray     # (n, n)
    tau: float
    ricci_crosscheck_residual: float

    @property
    def n(self):
        return self.ricci.shape[0]

    def schouten(self):
        n = self.n
        if n < 3:
            raise DimensionError("Schouten tensor needs n >= 3")
        return (self.ricci - self.tau / (2.0 * (n - 1)) * np.eye(n)) / (n - 2)

    def sectional(self, X, Y):
        """Sectional curvature of the plane spanned by X, Y (ONB coords)."""
        num = np.einsum("ijkl,i,j,k,l->", self.riemann, X, Y, Y, X)
        den = (X @ X) * (Y @ Y) - (X @ Y) ** 2
        return float(num / den)


def intrinsic_curvatures(ext: ExtrinsicData) -> CurvaturePack:
    n = ext.n
    sig = ext.ambient.signature.astype(float)
    aon = ext.alpha_onb()                       # (n, n, A)
    inner = np.einsum("ijA,A,klA->ijkl", aon, sig, aon)  # <a_ij, a_kl>
    # R_{ijkl} = <a_il, a_jk> - <a_ik, a_jl>
    R = np.einsum("iljk->ijkl", inner) - np.einsum("ikjl->ijkl", inner)
    c = ext.ambient.c
    if c != 0.0:
        I = np.eye(n)
        R = R + c * (np.einsum("il,jk->ijkl", I, I) - np.einsum("ik,jl->ijkl", I, I))
    ric = np.einsum("ijki->jk", R)
    tau = float(np.trace(ric))

    # independent mean-curvature form of the Ricci tensor
    H = ext.H
    ric2 = (n * np.einsum("jkA,A->jk", aon, sig * H)
            - np.einsum("jiA,A,kiA->jk", aon, sig, aon))
    if c != 0.0:
        ric2 = ric2 + c * (n - 1) * np.eye(n)
    resid = float(np.max(np.abs(ric - ric2)))
    return CurvaturePack(R, 0.5 * (ric + ric.T), tau, resid)
