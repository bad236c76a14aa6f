"""Conformal calculus: conformal changes of metric, the Q tensors, the
quadruple curvature test for conformal flatness, the principal-normal shift
under conformal repositioning, and the residual suite for the Q identities
on proper submanifolds with flat normal bundle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ambient import AmbientSpace, euclidean
from .errors import ConformalStructureError, NotApplicable
from .extrinsic import fundamental_forms, intrinsic_curvatures
from .jets import ChartDomain, SmoothMap, evaluate_jet
from .principal import principal_decomposition


# ---------------------------------------------------------------------------
# conformal structures on a chart
# ---------------------------------------------------------------------------

@dataclass
class ConformalStructure:
    """Declares the induced metric of an immersion to be e^{2 omega} times a
    flat metric.  `omega` is a scalar map on the chart; when the chart
    coordinates are not themselves the flat ones, `flat_chart` is the
    diffeomorphism onto flat coordinates."""

    omega: SmoothMap
    flat_chart: SmoothMap | None = None

    def conf_factor(self, point):
        return float(np.exp(self.omega.value(point)[0]))

    def flat_frame(self, point):
        """(x, J) with x the flat coordinates of `point` and J = dPhi."""
        if self.flat_chart is None:
            return np.asarray(point, float), np.eye(len(point))
        jet = evaluate_jet(self.flat_chart, point, 1)
        return jet.value, jet.d1.T          # J[a, i] = d Phi_a / d u_i

    def omega_flat_jets(self, point):
        """(omega, grad, Hess) with respect to the flat coordinates."""
        jw = evaluate_jet(self.omega, point, 2)
        w = float(jw.value[0])
        gu = jw.d1[:, 0]
        Hu = jw.d2[:, :, 0]
        if self.flat_chart is None:
            return w, gu, Hu
        jp = evaluate_jet(self.flat_chart, point, 2)
        J = jp.d1.T                          # (n, n)
        Jinv = np.linalg.inv(J)
        gx = Jinv.T @ gu
        # H_u = J^T H_x J + sum_a (g_x)_a Hess_u Phi_a
        corr = np.einsum("a,ija->ij", gx, jp.d2)
        Hx = Jinv.T @ (Hu - corr) @ Jinv
        return w, gx, 0.5 * (Hx + Hx.T)

    def metric_residual(self, smooth_map: SmoothMap, amb: AmbientSpace, points,
                        tol=None):
        """Worst relative defect of f*<,> = e^{2 omega} (flat chart metric)."""
        worst, worst_pt = 0.0, None
        for pt in np.asarray(points, float):
            ext = fundamental_forms(smooth_map, amb, pt)
            x, J = self.flat_frame(pt)
            target = np.exp(2.0 * self.omega.value(pt)[0]) * (J.T @ J)
            r = float(np.max(np.abs(ext.g - target))) / float(np.max(np.abs(ext.g)))
            if r > worst:
                worst, worst_pt = r, pt
        if tol is not None and worst > tol:
            raise ConformalStructureError(
                f"induced metric differs from e^(2 omega) x flat by {worst:.3e} "
                f"at {worst_pt}")
        return worst


# ---------------------------------------------------------------------------
# conformal change of a flat metric
# ---------------------------------------------------------------------------

@dataclass
class QPack:
    """Q(X,Y) = Hess omega(X,Y) - X(omega) Y(omega) and its metric dual Q0,
    both with respect to the base (flat) metric."""

    omega: float
    grad: np.ndarray          # (n,)
    Q: np.ndarray             # (n, n)
    grad_norm_sq: float

    def q0(self):
        return self.Q          # flat metric: index raising is the identity

    def duality_residual(self):
        return float(np.max(np.abs(self.q0() - self.Q)))

    def T(self):
        """T[l, i, j, k]: components of T(d_i, d_j) d_k on the d_l basis."""
        n = self.Q.shape[0]
        I = np.eye(n)
        Qg = self.Q + self.grad_norm_sq * I
        T = (np.einsum("jk,li->lijk", Qg, I) - np.einsum("ik,lj->lijk", Qg, I)
             + np.einsum("jk,il->lijk", I, self.Q) - np.einsum("ik,jl->lijk", I, self.Q))
        return T


@dataclass
class ConformalChangeResult:
    correction: np.ndarray    # (k, i, j): (nabla* - nabla) coefficients
    qpack: QPack
    r_star: np.ndarray        # (l, i, j, k): R*(d_i, d_j) d_k, via the Q formula
    r_star_direct: np.ndarray  # same, assembled from the conformal metric's jets
    crosscheck_residual: float


def conformal_change(omega_map: SmoothMap, point) -> ConformalChangeResult:
    """Levi-Civita correction, Q tensors, and curvature of e^{2 omega} times
    the flat metric in the chart coordinates (assumed Cartesian).  The
    curvature comes out two ways: through the Q-tensor formula and directly
    from Christoffel symbols of the conformal metric; both are returned with
    their disagreement."""
    point = np.asarray(point, float)
    jw = evaluate_jet(omega_map, point, 3)
    n = len(point)
    w = float(jw.value[0])
    g1 = jw.d1[:, 0]                         # omega_i
    g2 = jw.d2[:, :, 0]                      # omega_ij
    I = np.eye(n)

    corr = (np.einsum("j,ki->kij", g1, I) + np.einsum("i,kj->kij", g1, I)
            - np.einsum("ij,k->kij", I, g1))
    Q = g2 - np.outer(g1, g1)
    qp = QPack(w, g1.copy(), Q, float(g1 @ g1))
    r_star = -qp.T()                          # flat base: R* = R - T = -T

    # direct route: generic curvature assembly from the metric e^{2w} delta
    e2 = np.exp(2.0 * w)
    g = e2 * I
    ginv = I / e2
    dg = 2.0 * e2 * np.einsum("m,ij->mij", g1, I)
    ddg = 2.0 * e2 * np.einsum("mp,ij->mpij", g2 + 2.0 * np.outer(g1, g1), I)
    gam_l = 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg)
                   - np.einsum("lij->lij", dg))          # Gamma_{l,ij}
    gam = np.einsum("kl,lij->kij", ginv, gam_l)
    dgam_l = 0.5 * (np.einsum("mijl->mlij", ddg) + np.einsum("mjil->mlij", ddg)
                    - np.einsum("mlij->mlij", ddg))
    dginv = -np.einsum("ka,mab,bl->mkl", ginv, dg, ginv)
    dgam = (np.einsum("mkl,lij->mkij", dginv, gam_l)
            + np.einsum("kl,mlij->mkij", ginv, dgam_l))
    # R^l_{ijk} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik} + Gamma Gamma terms
    r_direct = (np.einsum("iljk->lijk", dgam) - np.einsum("jlik->lijk", dgam)
                + np.einsum("lim,mjk->lijk", gam, gam)
                - np.einsum("ljm,mik->lijk", gam, gam))
    scale = max(float(np.max(np.abs(r_star))), 1.0)
    resid = float(np.max(np.abs(r_star - r_direct))) / scale
    return ConformalChangeResult(corr, qp, r_star, r_direct, resid)


# ---------------------------------------------------------------------------
# conformal flatness: quadruple sectional-curvature test
# ---------------------------------------------------------------------------

def immersion_curvature_provider(smooth_map: SmoothMap, amb: AmbientSpace):
    def provider(pt):
        return intrinsic_curvatures(fundamental_forms(smooth_map, amb, pt))
    return provider


def conformal_flatness_test(provider, points, trials=50, seed=0):
    """max over samples and Haar-random orthonormal quadruples (X1..X4) of
    |K(X1,X2) + K(X3,X4) - K(X1,X3) - K(X2,X4)|, normalized by the largest
    sectional curvature magnitude encountered.  Zero (to tolerance) iff the
    metric is conformally flat, for n >= 4."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    kmax = 0.0
    for pt in np.asarray(points, float):
        pack = provider(pt)
        n = pack.n
        if n < 4:
            raise NotApplicable("quadruple test needs n >= 4")
        for _ in range(trials):
            M = rng.standard_normal((n, 4))
            Qo, _ = np.linalg.qr(M)
            X = [Qo[:, i] for i in range(4)]
            K = {}
            for a, b in ((0, 1), (2, 3), (0, 2), (1, 3)):
                K[a, b] = pack.sectional(X[a], X[b])
                kmax = max(kmax, abs(K[a, b]))
            worst = max(worst, abs(K[0, 1] + K[2, 3] - K[0, 2] - K[1, 3]))
    return worst / max(kmax, 1e-12)


# ---------------------------------------------------------------------------
# principal-normal shift under a conformal change of the ambient metric
# ---------------------------------------------------------------------------

def principal_normal_shift(eta, lam, grad_lam_perp):
    """Shifted principal normal under passing from the ambient metric g to
    lam^2 g: eta - (1/lam) (grad lam)-perp, the normal projection of the
    ambient gradient taken in g."""
    if lam <= 0:
        raise ValueError("conformal factor must be positive")
    return np.asarray(eta, float) - np.asarray(grad_lam_perp, float) / lam


def _ambient_jet(func, x, order=1):
    """Jet of an ambient-space map (R^N -> R^M) at x."""
    x = np.asarray(x, float)
    N = len(x)
    dom = ChartDomain(N, np.column_stack([x - 1.0, x + 1.0]))
    m = SmoothMap(dom, None, func, "ambient-map")
    return evaluate_jet(m, x, order)


def repositioned_decomposition_check(smooth_map: SmoothMap, amb: AmbientSpace,
                                     tau, lam, points, cluster_tol=1e-6, seed=0):
    """Empirical verification that a conformal diffeomorphism tau of the
    ambient space (with tau* <,> = lam^2 <,>) carries the principal normals
    of f to those of tau o f by the shift rule: the principal normal of the
    repositioned immersion, in its own induced metric, is

        d tau ( (eta - (1/lam) (grad lam)-perp) / lam^2 ).

    Returns the worst mismatch against a direct decomposition of tau o f."""
    dom = smooth_map.domain
    comp = SmoothMap(dom, None, lambda u: tau(smooth_map.evaluator(u)),
                     smooth_map.name + "-repositioned")
    worst = 0.0
    for pt in np.asarray(points, float):
        ext1 = fundamental_forms(smooth_map, amb, pt)
        dec1 = principal_decomposition(ext1, cluster_tol=cluster_tol, seed=seed)
        x = ext1.jet.value
        jl = _ambient_jet(lambda y: [lam(y)], x, 1)
        lv = float(jl.value[0])
        grad = jl.d1[:, 0]
        if amb.kind == "lorentz":
            grad = amb.signature * grad
        gperp = ext1.normal_project(grad)
        jt = _ambient_jet(tau, x, 1)
        dtau = jt.d1.T                        # (M, N)

        ext2 = fundamental_forms(comp, amb, pt)
        dec2 = principal_decomposition(ext2, cluster_tol=cluster_tol, seed=seed)
        scale = max(max(np.linalg.norm(e) for e in dec2.etas), 1e-12)
        for eta in dec1.etas:
            pred = dtau @ (principal_normal_shift(eta, lv, gperp) / lv ** 2)
            d = min(np.linalg.norm(pred - e) for e in dec2.etas)
            worst = max(worst, d / scale)
    return worst


# ---------------------------------------------------------------------------
# Q-identity suite for proper conformally flat submanifolds
# ---------------------------------------------------------------------------

@dataclass
class QSuiteReport:
    offblock_residual: float         # Q(X, Z) = 0 for X in E_i, Z orthogonal to X
    high_mult_residual: float | None  # Q(Z,Z) + (|eta_1|^2 + e^{-4w}|grad w|^2)/2
    duality_residual: float
    points: np.ndarray


def lemma_q_suite(smooth_map: SmoothMap, amb: AmbientSpace,
                  conf: ConformalStructure, points, cluster_tol=1e-6,
                  seed=0) -> QSuiteReport:
    """Residuals of the two pointwise Q identities that hold for any proper
    isometric immersion with flat normal bundle of a globally conformally
    flat manifold, with Q and gradients taken in the flat chart metric."""
    if conf is None:
        raise NotApplicable("no conformal structure attached")
    points = np.asarray(points, float)
    off = 0.0
    high = None
    dual = 0.0
    for pt in points:
        ext = fundamental_forms(smooth_map, amb, pt)
        dec = principal_decomposition(ext, cluster_tol=cluster_tol, seed=seed)
        w, gw, Hw = conf.omega_flat_jets(pt)
        Q = Hw - np.outer(gw, gw)
        dual = max(dual, QPack(w, gw, Q, float(gw @ gw)).duality_residual())
        _, J = conf.flat_frame(pt)
        qscale = max(float(np.max(np.abs(Q))), 1.0)

        # push the eigendistribution bases to flat coordinates
        flat_bases = [J @ dec.chart_basis(i) for i in range(dec.k)]
        n = ext.n
        for i, B in enumerate(flat_bases):
            for col in range(B.shape[1]):
                X = B[:, col]
                # flat-orthogonal complement of X spans the admissible Z
                basis = np.linalg.svd(np.outer(X, X) / (X @ X))[0][:, 1:]
                for z in basis.T:
                    off = max(off, abs(X @ Q @ z)
                              / (np.linalg.norm(X) * np.linalg.norm(z) * qscale))
        if dec.multiplicities[0] >= 2:
            eta1 = dec.etas[0]
            # gradient in the flat metric, its norm in the curved one:
            # e^{-4w} |grad_0 w|^2_curved = e^{-2w} |grad_0 w|^2_flat
            target = -0.5 * (amb.inner(eta1, eta1) + np.exp(-2.0 * w) * float(gw @ gw))
            B = flat_bases[0]
            Bc = dec.chart_basis(0)
            r = 0.0
            for col in range(B.shape[1]):
                # unit with respect to the induced metric of the immersion
                nrm = np.sqrt(Bc[:, col] @ ext.g @ Bc[:, col])
                Z = B[:, col] / nrm
                r = max(r, abs(Z @ Q @ Z - target) / max(abs(target), 1.0))
            high = r if high is None else max(high, r)
    return QSuiteReport(off, high, dual, points)
