"""Geometry along an immersed patch: frames, fundamental forms, connections.

Everything is evaluated at one submanifold point in jet arithmetic.  The
chart map is expanded one order beyond the ambient metric, so the induced
metric, the second fundamental form, and their tangential covariant
derivatives come out as exact truncated Taylor data (no finite differences).

Conventions (matching the ambient module's curvature signs):

* tangent indices run over the submanifold chart; normal indices over a
  Gram–Schmidt orthonormal normal frame, so the normal metric block is the
  identity and normal indices raise/lower for free;
* second fundamental form ``L[i, j, r] = g(nabla_{e_i} e_j, n_r)``; mean
  curvature ``H^r = trace_h(L)/k``; ``second_tracefree = L - H h``;
* normal connection ``omega[i, r, s] = g(nabla_{e_i} n_r, n^s)`` and the
  normal-bundle curvature uses the same commutator convention as the
  tangential one.

Tensors with the ``mc_`` prefix are mean-curvature corrected: ambient
curvature components combined with ``H`` so that a conformal rescaling
changes them only through tangential derivatives of the factor.  They are
the building blocks of the scalar invariants layer.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .ambient import (
    CurvaturePack,
    christoffel_jets,
    inverse_metric_jets,
    riemann_jets,
)
from .fields import GeometryError, ImmersedPatch, MetricField
from .jets import Composer, Jets, constant, jet_einsum, jet_trace, jets_stack

__all__ = [
    "SubmanifoldPack",
    "submanifold_pack",
    "projected_ambient_deriv",
    "frame_residuals",
    "gauss_codazzi_residuals",
    "divergence_identity_residuals",
    "simons_residual",
]

_LET = "abcdef"


class SubmanifoldPack:
    """Frames, forms, and curvature blocks of one immersed patch at a point.

    Heavy pieces are cached properties, so a pack only pays for what is
    actually read.  ``order`` is the ambient metric jet order; the chart map
    is expanded at ``order + 1``.  With ``param=True`` every jet carries the
    extra first-order parameter variable used for conformal linearization.
    """

    def __init__(self, metric: MetricField, patch: ImmersedPatch, point=None,
                 *, order: int = 4, param: bool = False):
        if patch.n != metric.dim:
            raise GeometryError(
                f"patch maps into dimension {patch.n}, metric has {metric.dim}"
            )
        if not 1 <= patch.k < patch.n:
            raise GeometryError("need 1 <= k < n")
        self.metric = metric
        self.patch = patch
        self.k = patch.k
        self.n = patch.n
        self.param = param
        self.order = order
        self.point = (np.asarray(patch.basepoint, dtype=float)
                      if point is None else np.asarray(point, dtype=float))
        self.chart_jets = patch.jets(self.point, order + 1, param=param)
        self.x_point = self.chart_jets.value[: self.n]
        self.pull = Composer(self.chart_jets)
        self.ambient = CurvaturePack(
            metric.jets(self.x_point, order, param=param), self.n,
            basepoint=tuple(self.x_point),
        )
        self._blocks = {}

    # -- composed ambient fields (y-space jets along the patch) ---------

    @cached_property
    def metric_y(self) -> Jets:
        return self.pull(self.ambient.g)

    @cached_property
    def metric_inv_y(self) -> Jets:
        return self.pull(self.ambient.g_up)

    @cached_property
    def christoffel_y(self) -> Jets:
        return self.pull(self.ambient.gamma)

    @cached_property
    def riemann_y(self) -> Jets:
        return self.pull(self.ambient.rm)

    @cached_property
    def schouten_y(self) -> Jets:
        return self.pull(self.ambient.schouten)

    @cached_property
    def jtrace_y(self) -> Jets:
        return self.pull(self.ambient.jtrace)

    @cached_property
    def weyl_y(self) -> Jets:
        return self.pull(self.ambient.weyl)

    @cached_property
    def cotton_y(self) -> Jets:
        return self.pull(self.ambient.cotton)

    @cached_property
    def bach_y(self) -> Jets:
        return self.pull(self.ambient.bach)

    @cached_property
    def dweyl_y(self) -> Jets:
        return self.pull(self.ambient.dweyl)

    @cached_property
    def dschouten_y(self) -> Jets:
        return self.pull(self.ambient.dschouten)

    @cached_property
    def dcotton_y(self) -> Jets:
        return self.pull(self.ambient.dcotton)

    # -- frames ----------------------------------------------------------

    @cached_property
    def tangent_frame(self) -> Jets:
        """Coordinate tangent vectors ``e[i, a] = d x^a / d y^i``."""
        e = jets_stack([self.chart_jets.deriv(i) for i in range(self.k)])
        return e[:, : self.n]

    @cached_property
    def induced(self) -> Jets:
        """Pulled-back metric ``h[i, j]`` on the patch."""
        u = jet_einsum("ia,ab->ib", self.tangent_frame, self.metric_y)
        return jet_einsum("ib,jb->ij", u, self.tangent_frame)

    @cached_property
    def induced_inv(self) -> Jets:
        return inverse_metric_jets(self.induced)

    @cached_property
    def tangent_projector(self) -> Jets:
        """Projection ``P[a, b]`` (one index up, one down) onto the tangent."""
        u = jet_einsum("ia,ij->ja", self.tangent_frame, self.induced_inv)
        v = jet_einsum("jc,cb->jb", self.tangent_frame, self.metric_y)
        return jet_einsum("ja,jb->ab", u, v)

    @cached_property
    def normal_frame(self) -> Jets:
        """Orthonormal normal vectors ``N[r, a]``.

        Built by Gram–Schmidt on the normally-projected coordinate vectors,
        taking the ``n - k`` candidates with the largest projection norm at
        the basepoint (ties broken by coordinate index), so the frame choice
        is deterministic and stable under small perturbations.
        """
        n, k = self.n, self.k
        cand = (constant(np.eye(n), self.tangent_projector.space)
                - jet_trace(self.tangent_projector, "ab->ba"))
        gval = self.metric_y.value
        score = np.einsum("ba,ac,bc->b", cand.value, gval, cand.value)
        picks = sorted(range(n), key=lambda b: (-score[b], b))[: n - k]
        frame = []
        for b in picks:
            w = cand[b]
            for prev in frame:
                coef = jet_einsum(
                    "a,a->", jet_einsum("a,ab->b", w, self.metric_y), prev)
                w = w - coef * prev
            norm2 = jet_einsum(
                "a,a->", jet_einsum("a,ab->b", w, self.metric_y), w)
            if norm2.value <= 1e-20:
                raise GeometryError(
                    f"{self.patch.name}: degenerate normal candidates at "
                    f"{self.point}"
                )
            frame.append(w * norm2.sqrt().reciprocal())
        return jets_stack(frame)

    @cached_property
    def normal_coframe(self) -> Jets:
        """Metric-lowered normal frame ``N[r, a] g[a, b]``."""
        return jet_einsum("ra,ab->rb", self.normal_frame, self.metric_y)

    # -- fundamental forms ------------------------------------------------

    @cached_property
    def _gamma_frame(self) -> Jets:
        """Connection contracted once with the frame: ``Gamma^z_{ab} e^a``."""
        return jet_einsum("zab,ia->zib", self.christoffel_y, self.tangent_frame)

    @cached_property
    def second_fundamental(self) -> Jets:
        """``L[i, j, r]``: normal part of the frame's ambient acceleration."""
        e_list = [self.chart_jets.deriv(i) for i in range(self.k)]
        dd = jets_stack(
            [jets_stack([ei.deriv(j)[: self.n] for j in range(self.k)])
             for ei in e_list])
        s = dd + jet_einsum("zib,jb->ijz", self._gamma_frame, self.tangent_frame)
        return jet_einsum("ijz,rz->ijr", s, self.normal_coframe)

    @cached_property
    def mean_curvature(self) -> Jets:
        """``H[r]``: induced trace of ``L`` over ``k``."""
        return jet_einsum(
            "ij,ijr->r", self.induced_inv, self.second_fundamental
        ) * (1.0 / self.k)

    @cached_property
    def second_tracefree(self) -> Jets:
        hh = jet_einsum("r,ij->ijr", self.mean_curvature, self.induced)
        return self.second_fundamental - hh

    @cached_property
    def second_tracefree_up(self) -> Jets:
        """Trace-free form with both tangent indices raised."""
        u = jet_einsum("ic,cjr->ijr", self.induced_inv, self.second_tracefree)
        return jet_einsum("jd,idr->ijr", self.induced_inv, u)

    @cached_property
    def mean_norm2(self) -> Jets:
        return jet_einsum("r,r->", self.mean_curvature, self.mean_curvature)

    @cached_property
    def tracefree_norm2(self) -> Jets:
        return jet_einsum(
            "ijr,ijr->", self.second_tracefree_up, self.second_tracefree)

    @cached_property
    def tracefree_square(self) -> Jets:
        """Symmetric 2-tensor ``L0^c{}_{i r} L0_{c j}{}^r`` on the patch."""
        u = jet_einsum("cd,dir->cir", self.induced_inv, self.second_tracefree)
        return jet_einsum("cir,cjr->ij", u, self.second_tracefree)

    # -- connections on the patch -----------------------------------------

    @cached_property
    def induced_christoffel(self) -> Jets:
        return christoffel_jets(self.induced, self.induced_inv, self.k)

    @cached_property
    def normal_connection(self) -> Jets:
        """``omega[i, r, s] = g(nabla_{e_i} n_r, n^s)`` (antisymmetric in r, s)."""
        dN = jets_stack([self.normal_frame.deriv(i) for i in range(self.k)])
        covN = dN + jet_einsum("zib,rb->irz", self._gamma_frame,
                               self.normal_frame)
        return jet_einsum("irz,sz->irs", covN, self.normal_coframe)

    @cached_property
    def normal_curvature(self) -> Jets:
        """Normal-bundle curvature ``Rperp[i, j, r, s]`` (commutator convention)."""
        om = self.normal_connection
        dom = jets_stack([om.deriv(i) for i in range(self.k)])
        return (jet_trace(dom, "jirs->ijrs") - dom
                + jet_einsum("irz,jzs->ijrs", om, om)
                - jet_einsum("jrz,izs->ijrs", om, om))

    def tangential_cov_deriv(self, T: Jets, slots) -> Jets:
        """Covariant y-derivative of a mixed-slot tensor; new slot first.

        ``slots`` lists ``(kind, variance)`` pairs — kind "tangent" or
        "normal" — one per batch axis of ``T``.  Tangent slots are corrected
        with the induced Christoffel symbols, normal slots with the normal
        connection.
        """
        letters = "bcdefghij"[: len(slots)]
        parts = jets_stack([T.deriv(i) for i in range(self.k)])
        for j, (kind, var) in enumerate(slots):
            lj = letters[j]
            tsub = letters[:j] + "z" + letters[j + 1:]
            if kind == "tangent":
                gam = self.induced_christoffel
                if var == "down":
                    parts = parts - jet_einsum(
                        f"za{lj},{tsub}->a{letters}", gam, T)
                else:
                    parts = parts + jet_einsum(
                        f"{lj}az,{tsub}->a{letters}", gam, T)
            elif kind == "normal":
                om = self.normal_connection
                if var == "down":
                    parts = parts - jet_einsum(
                        f"a{lj}z,{tsub}->a{letters}", om, T)
                else:
                    parts = parts + jet_einsum(
                        f"az{lj},{tsub}->a{letters}", om, T)
            else:
                raise ValueError(f"unknown slot kind {kind!r}")
        return parts

    def tangential_gradient(self, u: Jets) -> Jets:
        return self.tangential_cov_deriv(u, [])

    def tangential_laplacian(self, u: Jets) -> Jets:
        dd = self.tangential_cov_deriv(
            self.tangential_gradient(u), [("tangent", "down")])
        return jet_einsum("ab,ab->", self.induced_inv, dd)

    # -- projections of ambient tensors -----------------------------------

    def project(self, T: Jets, pattern: str) -> Jets:
        """Contract all-down ambient slots onto the frames.

        ``pattern`` has one character per slot: 't' contracts with the
        tangent frame (giving a down tangent index), 'n' with the normal
        frame (giving a down normal index).
        """
        out = T
        r = len(pattern)
        if len(out.batch) != r:
            raise ValueError(
                f"pattern {pattern!r} does not match tensor rank {len(out.batch)}"
            )
        for m, ch in enumerate(pattern):
            lhs = _LET[:r]
            res = lhs[:m] + "z" + lhs[m + 1:]
            frame = {"t": self.tangent_frame, "n": self.normal_frame}[ch]
            out = jet_einsum(f"{lhs},z{lhs[m]}->{res}", out, frame)
        return out

    def _named(self, name: str) -> Jets:
        return {
            "riemann": self.riemann_y,
            "weyl": self.weyl_y,
            "cotton": self.cotton_y,
            "schouten": self.schouten_y,
            "mc_cotton": self.mc_cotton_ambient,
        }[name]

    def block(self, name: str, pattern: str) -> Jets:
        """Cached frame projection of a named ambient tensor along the patch."""
        key = (name, pattern)
        if key not in self._blocks:
            self._blocks[key] = self.project(self._named(name), pattern)
        return self._blocks[key]

    @cached_property
    def weyl_partial_trace(self) -> Jets:
        """``W[i, c, j]{}^c`` traced over the tangent directions."""
        return jet_einsum("cd,acbd->ab", self.induced_inv,
                          self.block("weyl", "tttt"))

    @cached_property
    def weyl_double_trace(self) -> Jets:
        return jet_einsum("ab,ab->", self.induced_inv, self.weyl_partial_trace)

    # -- intrinsic curvature of the induced metric -------------------------

    @cached_property
    def intrinsic_riemann(self) -> Jets:
        return riemann_jets(self.induced, self.induced_christoffel, self.k)

    @cached_property
    def intrinsic_ricci(self) -> Jets:
        return jet_einsum("acbd,cd->ab", self.intrinsic_riemann,
                          self.induced_inv)

    @cached_property
    def intrinsic_scalar(self) -> Jets:
        return jet_einsum("ab,ab->", self.intrinsic_ricci, self.induced_inv)

    @cached_property
    def intrinsic_jtrace(self) -> Jets:
        if self.k < 2:
            raise GeometryError("intrinsic curvature trace needs k >= 2")
        return self.intrinsic_scalar * (1.0 / (2.0 * (self.k - 1)))

    @cached_property
    def intrinsic_schouten(self) -> Jets:
        if self.k < 3:
            raise GeometryError("intrinsic trace adjustment needs k >= 3")
        jg = jet_einsum(",ab->ab", self.intrinsic_jtrace, self.induced)
        return (self.intrinsic_ricci - jg) * (1.0 / (self.k - 2))

    @cached_property
    def intrinsic_weyl(self) -> Jets:
        if self.k < 3:
            raise GeometryError("intrinsic trace decomposition needs k >= 3")
        P, h = self.intrinsic_schouten, self.induced
        return (self.intrinsic_riemann
                - jet_einsum("ac,bd->abcd", P, h)
                - jet_einsum("bd,ac->abcd", P, h)
                + jet_einsum("ad,bc->abcd", P, h)
                + jet_einsum("bc,ad->abcd", P, h))

    # -- conformally organized tensors ------------------------------------

    @cached_property
    def fialkow_trace_scaled(self) -> Jets:
        """``(k - 1)`` times the Fialkow trace; defined for every k >= 1."""
        return (self.tracefree_norm2 - self.weyl_double_trace) * 0.5

    @cached_property
    def fialkow_trace(self) -> Jets:
        if self.k < 2:
            raise GeometryError("Fialkow trace needs k >= 2")
        return self.fialkow_trace_scaled * (1.0 / (self.k - 1))

    @cached_property
    def fialkow(self) -> Jets:
        if self.k < 3:
            raise GeometryError("Fialkow tensor needs k >= 3")
        gG = jet_einsum(",ab->ab", self.fialkow_trace, self.induced)
        return (self.tracefree_square - self.weyl_partial_trace - gG) * (
            1.0 / (self.k - 2))

    @cached_property
    def normal_deflection(self) -> Jets:
        """``D[i, r]``: tangential-normal ambient trace adjustment minus
        the tangential derivative of the mean curvature."""
        dH = self.tangential_cov_deriv(self.mean_curvature, [("normal", "up")])
        return self.block("schouten", "tn") - dH

    @cached_property
    def mc_schouten(self) -> Jets:
        """Tangential trace adjustment corrected by the mean curvature."""
        hl = jet_einsum("ijr,r->ij", self.second_tracefree, self.mean_curvature)
        h2 = jet_einsum(",ij->ij", self.mean_norm2, self.induced) * 0.5
        return self.block("schouten", "tt") + hl + h2

    @cached_property
    def mc_cotton_ambient(self) -> Jets:
        """Ambient-slotted Cotton tensor corrected by the mean curvature."""
        wn = jet_einsum("abcz,rz->abcr", self.weyl_y, self.normal_frame)
        return self.cotton_y - jet_einsum("abcr,r->abc", wn, self.mean_curvature)

    @cached_property
    def mc_cotton_trace_ambient(self) -> Jets:
        """Tangential trace of the corrected Cotton, one ambient slot free."""
        u = jet_einsum("abc,ia->ibc", self.mc_cotton_ambient, self.tangent_frame)
        u2 = jet_einsum("ibc,jc->ibj", u, self.tangent_frame)
        return jet_einsum("ij,ibj->b", self.induced_inv, u2)

    @cached_property
    def mc_cotton_trace(self) -> Jets:
        """Tangential projection of ``mc_cotton_trace_ambient``."""
        return jet_einsum("b,ib->i", self.mc_cotton_trace_ambient,
                          self.tangent_frame)

    @cached_property
    def mc_bach(self) -> Jets:
        """Tangential block of the fourth-order obstruction, corrected by H."""
        n = self.n
        b_tt = self.project(self.bach_y, "tt")
        c_ntt = self.block("cotton", "ntt")
        c_sym = (c_ntt + jet_trace(c_ntt, "rab->rba")) * 0.5
        term2 = jet_einsum("rab,r->ab", c_sym, self.mean_curvature) * 2.0
        hh = jet_einsum("r,s->rs", self.mean_curvature, self.mean_curvature)
        term3 = jet_einsum("arbs,rs->ab", self.block("weyl", "tntn"), hh)
        return b_tt + (term2 + term3) * float(n - 4)

    def scalar_summary(self) -> dict:
        """Point values of the scalars most often asserted in tests."""
        out = {
            "tracefree_norm2": float(self.tracefree_norm2.value),
            "mean_norm2": float(self.mean_norm2.value),
            "weyl_double_trace": float(self.weyl_double_trace.value),
        }
        if self.k >= 2:
            out["fialkow_trace"] = float(self.fialkow_trace.value)
            out["intrinsic_jtrace"] = float(self.intrinsic_jtrace.value)
        return out


def submanifold_pack(scene, *, order: int = 4, param: bool = False,
                     metric: MetricField | None = None) -> SubmanifoldPack:
    """Build the pack for a scene (optionally overriding its metric)."""
    g = scene.metric if metric is None else metric
    return SubmanifoldPack(g, scene.patch, scene.point, order=order,
                           param=param)


def projected_ambient_deriv(pack: SubmanifoldPack, name: str,
                            pattern: str) -> Jets:
    """Tangential covariant derivative via the ambient-connection route.

    Projects the composed ambient covariant derivative of a named field
    ("weyl" / "schouten" / "cotton") and adds the second-fundamental-form
    exchange terms produced by splitting slots into tangent and normal
    parts.  Must agree with ``tangential_cov_deriv`` applied to the
    projected blocks — the two routes share no code, which makes the
    comparison a real consistency check.
    """
    dfield = {"weyl": pack.dweyl_y, "schouten": pack.dschouten_y,
              "cotton": pack.dcotton_y}[name]
    field = pack._named(name)
    r = len(pattern)
    out = pack.project(dfield, "t" + pattern)
    let = _LET[1:r + 1]
    l_up = jet_einsum("zc,azr->acr", pack.induced_inv, pack.second_fundamental)
    for m, ch in enumerate(pattern):
        alt = pattern[:m] + ("n" if ch == "t" else "t") + pattern[m + 1:]
        t_alt = pack.project(field, alt)
        tsub = let[:m] + "z" + let[m + 1:]
        if ch == "t":
            out = out + jet_einsum(
                f"a{let[m]}z,{tsub}->a{let}", pack.second_fundamental, t_alt)
        else:
            out = out - jet_einsum(f"az{let[m]},{tsub}->a{let}", l_up, t_alt)
    return out


# -- residual suites -------------------------------------------------------


def _rel(resid: np.ndarray, *refs: np.ndarray) -> float:
    scale = 1.0 + max((float(np.max(np.abs(x))) for x in refs), default=0.0)
    return float(np.max(np.abs(resid))) / scale


def _relj(resid: Jets, *refs: Jets) -> float:
    scale = 1.0 + max(
        (float(np.max(np.abs(x.coeffs))) for x in refs), default=0.0)
    return float(np.max(np.abs(resid.coeffs))) / scale


def frame_residuals(pack: SubmanifoldPack) -> dict:
    """Whole-jet residuals of the frame algebra (not just point values)."""
    e, nf = pack.tangent_frame, pack.normal_frame
    g = pack.metric_y
    out = {}
    mixed = jet_einsum("ib,rb->ir", jet_einsum("ia,ab->ib", e, g), nf)
    out["tangent_normal_orthogonal"] = _relj(mixed, e)
    nn = jet_einsum("rb,sb->rs", jet_einsum("ra,ab->rb", nf, g), nf)
    out["normal_orthonormal"] = _relj(
        nn - constant(np.eye(pack.n - pack.k), nn.space), nn)
    pn = jet_einsum("ra,rb->ab", nf, pack.normal_coframe)
    full = pack.tangent_projector + pn
    out["projector_complete"] = _relj(
        full - constant(np.eye(pack.n), full.space), full)
    om = pack.normal_connection
    out["normal_connection_antisym"] = _relj(
        om + jet_trace(om, "isr->irs"), om)
    sym = pack.second_fundamental - jet_trace(
        pack.second_fundamental, "jir->ijr")
    out["second_fundamental_sym"] = _relj(sym, pack.second_fundamental)
    return out


def gauss_codazzi_residuals(pack: SubmanifoldPack) -> dict:
    """Relative residuals of the curvature splitting equations at the point.

    The raw equations relate ambient curvature blocks to intrinsic/normal
    curvature and the second fundamental form; the conformal set reorganizes
    them around the trace-free form, the Fialkow correction, and the
    deflection tensor.  Entries are only produced for the submanifold
    dimensions where each equation's ingredients exist.
    """
    k = pack.k
    h = pack.induced.value
    hi = pack.induced_inv.value
    L = pack.second_fundamental.value
    L0 = pack.second_tracefree.value
    H = pack.mean_curvature.value
    out = {}

    rm_tttt = pack.block("riemann", "tttt").value
    rmbar = pack.intrinsic_riemann.value
    ll1 = np.einsum("acr,bdr->abcd", L, L)
    ll2 = np.einsum("adr,bcr->abcd", L, L)
    out["gauss"] = _rel(rm_tttt - rmbar + ll1 - ll2, rm_tttt, rmbar, ll1)

    dL = pack.tangential_cov_deriv(
        pack.second_fundamental,
        [("tangent", "down"), ("tangent", "down"), ("normal", "down")]).value
    rm_ttnt = pack.block("riemann", "ttnt").value
    cod = (dL - dL.transpose(1, 0, 2, 3)).transpose(0, 1, 3, 2)
    out["codazzi"] = _rel(rm_ttnt - cod, rm_ttnt, dL)

    rm_ttnn = pack.block("riemann", "ttnn").value
    rperp = pack.normal_curvature.value
    u = np.einsum("cd,dar->car", hi, L)
    nl1 = np.einsum("car,cbs->abrs", u, L)
    nl2 = np.einsum("cas,cbr->abrs", u, L)
    out["ricci"] = _rel(rm_ttnn - rperp + nl1 - nl2, rm_ttnn, rperp, nl1)

    # conformal versions
    w_ttnt = pack.block("weyl", "ttnt").value
    dL0 = pack.tangential_cov_deriv(
        pack.second_tracefree,
        [("tangent", "down"), ("tangent", "down"), ("normal", "down")]).value
    D = pack.normal_deflection.value
    lhs = w_ttnt
    t1 = (dL0 - dL0.transpose(1, 0, 2, 3)).transpose(0, 1, 3, 2)
    t2 = (np.einsum("ca,br->abrc", h, D) - np.einsum("cb,ar->abrc", h, D))
    out["conformal_codazzi"] = _rel(lhs - t1 - t2, lhs, t1, t2)

    divL0 = np.einsum("cb,cbar->ar", hi, dL0)
    wtr = np.einsum("bc,abrc->ar", hi, w_ttnt)
    out["conformal_deflection"] = _rel(
        (k - 1) * D + divL0 + wtr, D, divL0, wtr)

    w_ttnn = pack.block("weyl", "ttnn").value
    u0 = np.einsum("cd,dar->car", hi, L0)
    m1 = np.einsum("car,cbs->abrs", u0, L0)
    m2 = np.einsum("cas,cbr->abrs", u0, L0)
    out["conformal_normal"] = _rel(
        w_ttnn - rperp + m1 - m2, w_ttnn, rperp, m1)

    if k >= 2:
        j_amb = float(pack.jtrace_y.value)
        jbar = float(pack.intrinsic_jtrace.value)
        p_nn = pack.project(pack.schouten_y, "nn").value
        gg = float(pack.fialkow_trace.value)
        h2 = float(np.einsum("r,r->", H, H))
        out["conformal_scalar_trace"] = _rel(
            np.asarray(j_amb - jbar - np.trace(p_nn) + 0.5 * k * h2 - gg),
            np.asarray(j_amb), np.asarray(jbar))

    if k >= 3:
        p_tt = pack.block("schouten", "tt").value
        pbar = pack.intrinsic_schouten.value
        F = pack.fialkow.value
        hl0 = np.einsum("abr,r->ab", L0, H)
        h2 = float(np.einsum("r,r->", H, H))
        out["conformal_trace_adjust"] = _rel(
            p_tt - pbar + hl0 + 0.5 * h2 * h - F, p_tt, pbar, F)

        w_tttt = pack.block("weyl", "tttt").value
        wbar = pack.intrinsic_weyl.value
        g1 = np.einsum("acr,bdr->abcd", L0, L0)
        g2 = np.einsum("adr,bcr->abcd", L0, L0)
        fg = (np.einsum("ac,db->abcd", F, h) - np.einsum("ad,cb->abcd", F, h)
              - np.einsum("bc,da->abcd", F, h) + np.einsum("bd,ca->abcd", F, h))
        out["conformal_gauss"] = _rel(
            w_tttt - wbar + g1 - g2 + fg, w_tttt, wbar, g1, fg)

    return out


def divergence_identity_residuals(pack: SubmanifoldPack) -> dict:
    """Residuals of the three tangential-divergence exchange identities.

    Each identity moves a divergence off a curvature-squared or corrected
    tensor onto gradients and lower-order couplings; they are what make the
    scalar invariants' conformal variations collapse to divergences.
    """
    k = pack.k
    hi = pack.induced_inv.value
    L0 = pack.second_tracefree.value
    D = pack.normal_deflection.value
    mc_t = pack.mc_cotton_trace.value
    tt = [("tangent", "down"), ("tangent", "down")]
    out = {}

    d_mp = pack.tangential_cov_deriv(pack.mc_schouten, tt).value
    lhs = np.einsum("cb,cab->a", hi, d_mp)
    tr = jet_einsum("ab,ab->", pack.induced_inv, pack.mc_schouten)
    grad_tr = pack.tangential_gradient(tr).value
    dl = np.einsum("cb,cr,bar->a", hi, D, L0)
    out["div_mc_schouten"] = _rel(lhs - grad_tr - mc_t + dl, lhs, grad_tr, mc_t)

    d_sq = pack.tangential_cov_deriv(pack.tracefree_square, tt).value
    lhs = np.einsum("cb,cab->a", hi, d_sq)
    grad_n2 = pack.tangential_gradient(pack.tracefree_norm2).value
    w_ttnt = pack.block("weyl", "ttnt").value
    w_tttn = pack.block("weyl", "tttn").value
    wtrn = np.einsum("cd,bcrd->br", hi, w_ttnt)
    term_d = np.einsum("cb,cr,abr->a", hi, D, L0)
    term_w1 = np.einsum("be,er,abr->a", hi, wtrn, L0)
    l0uu = np.einsum("be,cf,efr->bcr", hi, hi, L0)
    term_w2 = np.einsum("bcr,bacr->a", l0uu, w_tttn)
    out["div_tracefree_square"] = _rel(
        lhs - 0.5 * grad_n2 + (k - 2) * term_d + term_w1 + term_w2,
        lhs, grad_n2, term_w1, term_w2)

    d_wpt = pack.tangential_cov_deriv(pack.weyl_partial_trace, tt).value
    lhs = np.einsum("cb,cab->a", hi, d_wpt)
    grad_w2 = pack.tangential_gradient(pack.weyl_double_trace).value
    l0_mixed = np.einsum("be,aer->abr", hi, L0)
    term_w3 = np.einsum("abr,br->a", l0_mixed, wtrn)
    out["div_weyl_trace"] = _rel(
        lhs - 0.5 * grad_w2 + (k - 2) * mc_t + term_w2 + term_w3,
        lhs, grad_w2, mc_t, term_w2)

    return out


def simons_residual(pack: SubmanifoldPack) -> float:
    """Residual of the contracted second-order equation for the trace-free
    fundamental form (its rough Laplacian against lower-order data)."""
    if pack.k < 3:
        raise GeometryError("the contracted Laplacian identity needs k >= 3")
    k = pack.k
    hi = pack.induced_inv.value
    L0 = pack.second_tracefree.value
    l0uu = pack.second_tracefree_up.value
    tnd = [("tangent", "down"), ("tangent", "down"), ("normal", "down")]

    ddL0 = pack.tangential_cov_deriv(
        pack.tangential_cov_deriv(pack.second_tracefree, tnd),
        [("tangent", "down")] + tnd).value
    lap = np.einsum("cd,cdabr->abr", hi, ddL0)
    lhs = np.einsum("abr,abr->", l0uu, lap)

    dD = pack.tangential_cov_deriv(
        pack.normal_deflection, [("tangent", "down"), ("normal", "down")]).value
    dwc = pack.tangential_cov_deriv(
        jet_einsum("cd,bcrd->br", pack.induced_inv,
                   pack.block("weyl", "ttnt")),
        [("tangent", "down"), ("normal", "down")]).value
    d_wttnt = pack.tangential_cov_deriv(pack.block("weyl", "ttnt"),
                                        tnd + [("tangent", "down")]).value
    w4div = np.einsum("dc,dcarb->arb", hi, d_wttnt)

    jbar = float(pack.intrinsic_jtrace.value)
    pbar_uu = np.einsum("ac,bd,cd->ab", hi, hi, pack.intrinsic_schouten.value)
    w_tttt = pack.block("weyl", "tttt").value
    w_ttnn = pack.block("weyl", "ttnn").value
    F_uu = np.einsum("ac,bd,cd->ab", hi, hi, pack.fialkow.value)
    l0sq = pack.tracefree_square.value

    rhs = 0.0
    rhs += -k * np.einsum("abr,abr->", l0uu, dD)
    rhs += -np.einsum("abr,abr->", l0uu, dwc)
    rhs += np.einsum("abr,arb->", l0uu, w4div)
    rhs += jbar * float(np.einsum("abr,abr->", l0uu, L0))
    rhs += k * np.einsum("ab,ab->", l0sq, pbar_uu)
    w_mixed = np.einsum("cC,dD,aCbD->acbd", hi, hi, w_tttt)
    rhs += -np.einsum("acbd,cdr,abr->", w_mixed, L0, l0uu)
    # the normal-frame metric block is the identity, so only the tangent
    # index needs an explicit raise here
    wn_mixed = np.einsum("cC,aCrs->acrs", hi, w_ttnn)
    rhs += -np.einsum("acrs,cbs,abr->", wn_mixed, L0, l0uu)
    rhs += 2.0 * np.einsum("ab,ab->", l0sq, F_uu)
    rhs += -np.einsum("abs,abr,cds,cdr->", L0, l0uu, L0, l0uu)
    rhs += -np.einsum("adr,cds,cbs,abr->", L0, l0uu, L0, l0uu)
    rhs += 2.0 * np.einsum("cdr,ads,bcs,abr->", l0uu, L0, L0, l0uu)

    scale = 1.0 + max(abs(lhs), abs(rhs),
                      float(np.max(np.abs(lap))) if lap.size else 0.0)
    return abs(lhs - rhs) / scale
