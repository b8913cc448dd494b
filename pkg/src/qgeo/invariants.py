"""Scalar conformal submanifold invariants and extrinsic Q-curvature.

Every quantity is assembled from a ``SubmanifoldPack`` with two-operand
jet contractions, so results stay valid as truncated Taylor expansions —
in particular the trailing linearization parameter (when the pack was
built with ``param=True``) flows through every invariant untouched.

Quantities with more than one published closed form keep each form as a
separate code path (``route=...``) so agreement between them is a real
cross-check rather than a tautology.  A machine-readable registry maps
each scalar to its validity range in (k, n).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .ambient import cov_deriv_jets
from .fields import GeometryError
from .jets import Jets, jet_einsum, jet_trace
from .submanifold import SubmanifoldPack

__all__ = [
    "InvariantSpec",
    "REGISTRY",
    "available",
    "evaluate",
    "evaluate_all",
    "div_shape_weyl_a",
    "div_shape_weyl_b",
    "fialkow_quartic",
    "fialkow_quartic_parts",
    "weyl_trace_quartic",
    "weyl_trace_quartic_parts",
    "weyl_trace_quartic_scaled",
    "tracefree_quartic_combo",
    "intrinsic_q4",
    "q4_extrinsic_correction",
    "extrinsic_q4",
    "gauss_bonnet_defect",
    "extrinsic_q2",
    "intrinsic_pfaffian",
    "q4_divergence_flux",
    "willmore_quartic",
    "transverse_weyl_quartic_a",
    "transverse_weyl_quartic_b",
    "anomaly_quartic_a",
    "anomaly_quartic_b",
    "minimal_einstein_fialkow_quartic",
    "minimal_einstein_weyl_trace_quartic",
    "intrinsic_paneitz_apply",
    "extrinsic_paneitz_apply",
    "factored_paneitz_apply",
    "paneitz_flux_sign",
]


# -- shared contraction helpers ---------------------------------------------


def _memo(p: SubmanifoldPack, key: str, build):
    cache = getattr(p, "_invariant_cache", None)
    if cache is None:
        cache = {}
        p._invariant_cache = cache
    if key not in cache:
        cache[key] = build()
    return cache[key]


def _div_vec(p, V: Jets) -> Jets:
    """``h^{ab} nabla_a V_b`` for a down tangent-vector field on the patch."""
    dV = p.tangential_cov_deriv(V, [("tangent", "down")])
    return jet_einsum("ab,ab->", p.induced_inv, dV)


def _raise_t(p, T: Jets, axis: int) -> Jets:
    """Raise one tangent slot with the induced inverse metric."""
    letters = "abcdef"[: len(T.batch)]
    src = letters[axis]
    out = letters[:axis] + "z" + letters[axis + 1:]
    return jet_einsum(f"z{src},{letters}->{out}", p.induced_inv, T)


def _l0_up(p) -> Jets:
    return _memo(p, "l0_up", lambda: p.second_tracefree_up)


def _l0_mixed(p) -> Jets:
    # second slot raised: L0[a, ^b, r]
    return _memo(p, "l0_mixed", lambda: jet_einsum(
        "acr,cb->abr", p.second_tracefree, p.induced_inv))


def _w_ttnt(p) -> Jets:
    return p.block("weyl", "ttnt")


def _w_tn_trace(p) -> Jets:
    """``W[a, r] = W_{a b r}{}^{b}`` (tangent, normal)."""
    return _memo(p, "w_tn_trace", lambda: jet_einsum(
        "abrc,bc->ar", _w_ttnt(p), p.induced_inv))


def _deflection_up(p) -> Jets:
    return _memo(p, "deflection_up", lambda: jet_einsum(
        "ab,br->ar", p.induced_inv, p.normal_deflection))


def _mc_schouten_up(p) -> Jets:
    def build():
        up1 = jet_einsum("ac,cb->ab", p.induced_inv, p.mc_schouten)
        return jet_einsum("bd,ad->ab", p.induced_inv, up1)
    return _memo(p, "mc_schouten_up", build)


def _mc_schouten_trace(p) -> Jets:
    return _memo(p, "mc_schouten_trace", lambda: jet_einsum(
        "ab,ab->", p.induced_inv, p.mc_schouten))


def _mc_bach_trace(p) -> Jets:
    return _memo(p, "mc_bach_trace", lambda: jet_einsum(
        "ab,ab->", p.induced_inv, p.mc_bach))


def _deflection_norm2(p) -> Jets:
    return _memo(p, "deflection_norm2", lambda: jet_einsum(
        "ar,ar->", p.normal_deflection, _deflection_up(p)))


def _shape_times_deflection(p) -> Jets:
    """``V_a = D^{b r} L0_{a b r}`` (down tangent vector)."""
    return _memo(p, "shape_times_deflection", lambda: jet_einsum(
        "br,abr->a", _deflection_up(p), p.second_tracefree))


def _fialkow_up(p) -> Jets:
    def build():
        up1 = jet_einsum("ac,cb->ab", p.induced_inv, p.fialkow)
        return jet_einsum("bd,ad->ab", p.induced_inv, up1)
    return _memo(p, "fialkow_up", build)


def _fialkow_norm2(p) -> Jets:
    return _memo(p, "fialkow_norm2", lambda: jet_einsum(
        "ab,ab->", p.fialkow, _fialkow_up(p)))


def _tracefree_square_up(p) -> Jets:
    def build():
        up1 = jet_einsum("ac,cb->ab", p.induced_inv, p.tracefree_square)
        return jet_einsum("bd,ad->ab", p.induced_inv, up1)
    return _memo(p, "tracefree_square_up", build)


def _ratio_k3n4(k: int, n: int, extend: bool) -> float:
    """``(k - 3) / (n - 4)``, continued to 1 at (k=3, n=4) when requested."""
    if n == 4:
        if k == 3 and extend:
            return 1.0
        raise GeometryError(
            "background dimension 4 puts this scalar on its pole; "
            "pass extend=True only in the 3-in-4 case")
    return (k - 3) / (n - 4)


def _inv_n4(n: int) -> float:
    """``1 / (n - 4)`` with a domain guard."""
    if n == 4:
        raise GeometryError(
            "background dimension 4 puts this scalar on its pole")
    return 1.0 / (n - 4)


# -- the two divergence-type invariants --------------------------------------


def div_shape_weyl_a(p: SubmanifoldPack, route: str = "divergence") -> Jets:
    """Weight -4 invariant coupling the trace-free shape to the Weyl tensor.

    ``route='divergence'`` evaluates the defining total-divergence form;
    ``route='expanded'`` evaluates the expanded form with the derivative
    moved onto the Weyl factor.  The two must agree identically.
    """
    k = p.k
    l0u, w4 = _l0_up(p), _w_ttnt(p)
    mc3 = p.block("mc_cotton", "tnt")
    coupling = jet_einsum("abr,arb->", l0u, mc3)
    if route == "divergence":
        V = jet_einsum("bcr,abrc->a", l0u, w4)
        return _div_vec(p, V) + (k - 4) * coupling
    if route == "expanded":
        dw = p.tangential_cov_deriv(
            w4, [("tangent", "down")] * 2 + [("normal", "down"),
                                             ("tangent", "down")])
        divw = jet_einsum("ea,eabrc->brc", p.induced_inv, dw)
        t1 = jet_einsum("bcr,brc->", l0u, divw)
        w4u = _raise_t(p, _raise_t(p, _raise_t(p, w4, 0), 1), 3)
        t2 = 0.5 * jet_einsum("abrc,abrc->", w4, w4u)
        wtn = _w_tn_trace(p)
        t3 = jet_einsum("ar,ar->", _deflection_up(p), wtn)
        return t1 + t2 + t3 + (k - 4) * coupling
    raise ValueError(f"unknown route {route!r}")


def div_shape_weyl_b(p: SubmanifoldPack, route: str = "divergence") -> Jets:
    """Weight -4 companion built from the normal-traced Weyl block.

    Vanishes identically in codimension one.
    """
    k = p.k
    wtn = _w_tn_trace(p)
    if route == "divergence":
        V = jet_einsum("abr,br->a", _l0_mixed(p), wtn)
        t2 = jet_einsum("ar,ar->", _deflection_up(p), wtn)
        return _div_vec(p, V) + (k - 4) * t2
    if route == "expanded":
        dwtn = p.tangential_cov_deriv(
            wtn, [("tangent", "down"), ("normal", "down")])
        t1 = jet_einsum("abr,abr->", _l0_up(p), dwtn)
        t2 = jet_einsum("ar,ar->", _deflection_up(p), wtn)
        wtnu = jet_einsum("ab,br->ar", p.induced_inv, wtn)
        t3 = jet_einsum("ar,ar->", wtn, wtnu)
        return t1 - 3.0 * t2 - t3
    raise ValueError(f"unknown route {route!r}")


# -- the Fialkow-based quartic invariant --------------------------------------


def fialkow_quartic_parts(p: SubmanifoldPack):
    """The three second-order building blocks whose combination is invariant."""
    k, n = p.k, p.n
    if k < 2:
        raise GeometryError("parts decomposition needs k >= 2")
    G = p.fialkow_trace
    Ptr = _mc_schouten_trace(p)
    part1 = (k - 1) * (-p.tangential_laplacian(G) + (k - 4) * G * Ptr)
    flux = p.mc_cotton_trace - _shape_times_deflection(p)
    part2 = (_div_vec(p, flux)
             + 0.5 * (k - 4) * _inv_n4(n) * _mc_bach_trace(p)
             - 0.5 * (k - 4) * _deflection_norm2(p))
    body = p.tracefree_square - p.weyl_partial_trace
    part3 = (jet_einsum("ab,ab->", body, _mc_schouten_up(p))
             - (k - 1) * G * Ptr
             + 0.5 * (k - 2) * _inv_n4(n) * _mc_bach_trace(p)
             - 0.5 * (k - 2) * _deflection_norm2(p))
    return part1, part2, part3


def fialkow_quartic(p: SubmanifoldPack, route: str = "direct",
                    extend: bool = False) -> Jets:
    """Weight -4 invariant organized around the Fialkow trace.

    ``route='direct'`` is the single displayed formula (valid for every
    1 <= k < n with n != 4); ``route='parts'`` assembles the same scalar
    from the three separately-linearized pieces (needs k >= 2).
    """
    k, n = p.k, p.n
    if route == "parts":
        p1, p2, p3 = fialkow_quartic_parts(p)
        return p1 + (k - 6) * (p2 + p3)
    if route != "direct":
        raise ValueError(f"unknown route {route!r}")
    Ptr = _mc_schouten_trace(p)
    if k >= 2:
        G = p.fialkow_trace
        head = (k - 1) * (-p.tangential_laplacian(G) + 2.0 * G * Ptr)
    else:
        # (k - 1) G vanishes identically for curves, and so does its gradient
        head = 0.0 * Ptr
    body = p.tracefree_square - p.weyl_partial_trace
    flux = p.mc_cotton_trace - _shape_times_deflection(p)
    bracket = (jet_einsum("ab,ab->", body, _mc_schouten_up(p))
               + _div_vec(p, flux)
               + _ratio_k3n4(k, n, extend) * _mc_bach_trace(p)
               - (k - 3) * _deflection_norm2(p))
    return head + (k - 6) * bracket


def minimal_einstein_fialkow_quartic(p: SubmanifoldPack, lam: float) -> Jets:
    """Specialized form for minimal immersions in Einstein backgrounds."""
    k = p.k
    G = p.fialkow_trace
    return (k - 1) * (-p.tangential_laplacian(G) + 2.0 * lam * (k - 3) * G)


# -- the Weyl-trace quartic invariant -----------------------------------------


def weyl_trace_quartic_parts(p: SubmanifoldPack):
    k, n = p.k, p.n
    Wd = p.weyl_double_trace
    Ptr = _mc_schouten_trace(p)
    part1 = -p.tangential_laplacian(Wd) + (k - 4) * Wd * Ptr
    part2 = (_div_vec(p, p.mc_cotton_trace)
             + 0.5 * (k - 4) * _inv_n4(n) * _mc_bach_trace(p))
    mixed = p.weyl_partial_trace - 0.5 * (Wd * p.induced)
    part3 = (jet_einsum("ab,ab->", mixed, _mc_schouten_up(p))
             - jet_einsum("abr,arb->", _l0_up(p), p.block("mc_cotton", "tnt"))
             - jet_einsum("ar,ar->", _deflection_up(p), _w_tn_trace(p))
             - 0.5 * (k - 2) * _inv_n4(n) * _mc_bach_trace(p))
    return part1, part2, part3


def weyl_trace_quartic(p: SubmanifoldPack, route: str = "direct",
                       extend: bool = False) -> Jets:
    """Weight -4 invariant organized around the tangential Weyl trace.

    Evaluates to zero in codimension one.  ``route='parts'`` assembles it
    from the three separately-linearized pieces.
    """
    k, n = p.k, p.n
    if route == "parts":
        j1, j2, j3 = weyl_trace_quartic_parts(p)
        return j1 - 2.0 * (k - 6) * (j2 - j3)
    if route != "direct":
        raise ValueError(f"unknown route {route!r}")
    Wd = p.weyl_double_trace
    Ptr = _mc_schouten_trace(p)
    bracket = (_div_vec(p, p.mc_cotton_trace)
               - jet_einsum("ab,ab->", p.weyl_partial_trace,
                            _mc_schouten_up(p))
               + jet_einsum("ar,ar->", _deflection_up(p), _w_tn_trace(p))
               + jet_einsum("abr,arb->", _l0_up(p),
                            p.block("mc_cotton", "tnt"))
               + _ratio_k3n4(k, n, extend) * _mc_bach_trace(p))
    return -p.tangential_laplacian(Wd) + 2.0 * Wd * Ptr - 2.0 * (k - 6) * bracket


def weyl_trace_quartic_scaled(p: SubmanifoldPack) -> Jets:
    """``(n - 4)`` times the Weyl-trace quartic; finite in every dimension."""
    k, n = p.k, p.n
    Wd = p.weyl_double_trace
    Ptr = _mc_schouten_trace(p)
    bracket = (_div_vec(p, p.mc_cotton_trace)
               - jet_einsum("ab,ab->", p.weyl_partial_trace,
                            _mc_schouten_up(p))
               + jet_einsum("ar,ar->", _deflection_up(p), _w_tn_trace(p))
               + jet_einsum("abr,arb->", _l0_up(p),
                            p.block("mc_cotton", "tnt")))
    return ((n - 4) * (-p.tangential_laplacian(Wd) + 2.0 * Wd * Ptr
                       - 2.0 * (k - 6) * bracket)
            - 2.0 * (k - 6) * (k - 3) * _mc_bach_trace(p))


def minimal_einstein_weyl_trace_quartic(p: SubmanifoldPack,
                                        lam: float) -> Jets:
    """Specialized form for minimal immersions in Einstein backgrounds."""
    Wd = p.weyl_double_trace
    return -p.tangential_laplacian(Wd) + 2.0 * lam * (p.k - 3) * Wd


def tracefree_quartic_combo(p: SubmanifoldPack) -> Jets:
    """The pole-free combination (twice the Fialkow quartic plus the
    Weyl-trace quartic) in its single displayed form, valid in every
    background dimension including 4."""
    k = p.k
    l2 = p.tracefree_norm2
    Ptr = _mc_schouten_trace(p)
    bracket = (jet_einsum("ab,ab->", p.tracefree_square, _mc_schouten_up(p))
               - _div_vec(p, _shape_times_deflection(p))
               - (k - 3) * _deflection_norm2(p)
               - jet_einsum("ar,ar->", _deflection_up(p), _w_tn_trace(p))
               - jet_einsum("abr,arb->", _l0_up(p),
                            p.block("mc_cotton", "tnt")))
    return -p.tangential_laplacian(l2) + 2.0 * l2 * Ptr + 2.0 * (k - 6) * bracket


# -- Q-curvature family --------------------------------------------------------


def _intrinsic_schouten_up(p) -> Jets:
    def build():
        up1 = jet_einsum("ac,cb->ab", p.induced_inv, p.intrinsic_schouten)
        return jet_einsum("bd,ad->ab", p.induced_inv, up1)
    return _memo(p, "intrinsic_schouten_up", build)


def intrinsic_q4(p: SubmanifoldPack) -> Jets:
    """Fourth-order Q-curvature of the induced metric (any k >= 3)."""
    if p.k < 3:
        raise GeometryError("intrinsic fourth-order Q needs k >= 3")
    J = p.intrinsic_jtrace
    P2 = jet_einsum("ab,ab->", p.intrinsic_schouten, _intrinsic_schouten_up(p))
    return -p.tangential_laplacian(J) - 2.0 * P2 + 0.5 * p.k * J * J


def q4_extrinsic_correction(p: SubmanifoldPack) -> Jets:
    """The extrinsic correction scalar; a pure divergence when k = 4."""
    k, n = p.k, p.n
    if k < 3:
        raise GeometryError("extrinsic fourth-order Q needs k >= 3")
    G = p.fialkow_trace
    flux = p.mc_cotton_trace - _shape_times_deflection(p)
    FP = jet_einsum("ab,ab->", p.fialkow, _mc_schouten_up(p))
    return ((k - 2) * p.tangential_laplacian(G)
            - (k - 6) * _div_vec(p, flux)
            - 2.0 * (k - 4) * G * _mc_schouten_trace(p)
            - (k - 4) ** 2 * FP
            - (k - 4) * (k - 5) * _inv_n4(n) * _mc_bach_trace(p)
            + (k - 4) * (k - 5) * _deflection_norm2(p))


def extrinsic_q4(p: SubmanifoldPack, route: str = "assembled") -> Jets:
    """Fourth-order extrinsic Q-curvature, 3 <= k < n, n != 4.

    Three routes: ``'assembled'`` sums the intrinsic part, the extrinsic
    correction, and the invariant remainder; ``'trace_expansion'``
    reproduces the scattering-operator expansion with the Fialkow terms
    kept explicit; ``'gauss_bonnet'`` (k = 4 only) rebuilds Q from twice
    the intrinsic Pfaffian, the pointwise defect, and the divergence flux.
    """
    k, n = p.k, p.n
    if k < 3:
        raise GeometryError("extrinsic fourth-order Q needs k >= 3")
    if route == "assembled":
        G = p.fialkow_trace
        return (intrinsic_q4(p) + q4_extrinsic_correction(p)
                + fialkow_quartic(p)
                + 2.0 * _fialkow_norm2(p) - 0.5 * k * G * G)
    if route == "trace_expansion":
        G = p.fialkow_trace
        J = p.intrinsic_jtrace
        FP = jet_einsum("ab,ab->", p.fialkow, _intrinsic_schouten_up(p))
        qtilde = (-p.tangential_laplacian(G) - 2.0 * _fialkow_norm2(p)
                  + 0.5 * k * G * G - 4.0 * FP + k * G * J
                  - 2.0 * _inv_n4(n) * _mc_bach_trace(p)
                  + 2.0 * _deflection_norm2(p))
        return intrinsic_q4(p) + qtilde
    if route == "gauss_bonnet":
        if k != 4:
            raise GeometryError("the Pfaffian route needs k = 4")
        return (2.0 * intrinsic_pfaffian(p) + gauss_bonnet_defect(p)
                - q4_divergence_flux(p))
    raise ValueError(f"unknown route {route!r}")


def q4_divergence_flux(p: SubmanifoldPack) -> Jets:
    """The total divergence split off from the critical Q-curvature (k=4)."""
    if p.k != 4:
        raise GeometryError("the divergence split is the k = 4 case")
    G = p.fialkow_trace
    J = p.intrinsic_jtrace
    V = (p.tangential_gradient(J) - 2.0 * p.tangential_gradient(G)
         - 2.0 * p.mc_cotton_trace + 2.0 * _shape_times_deflection(p))
    return _div_vec(p, V)


def _intrinsic_weyl_norm2(p) -> Jets:
    def build():
        W = p.intrinsic_weyl
        Wu = W
        for ax in range(4):
            Wu = _raise_t(p, Wu, ax)
        return jet_einsum("abcd,abcd->", W, Wu)
    return _memo(p, "intrinsic_weyl_norm2", build)


def intrinsic_pfaffian(p: SubmanifoldPack) -> Jets:
    """Pfaffian density of the induced metric for k in {2, 4}.

    Normalized so that integrating ``c_k`` times it over a closed surface
    or 4-manifold gives the Euler characteristic; for k = 2 it equals the
    Gauss curvature.
    """
    if p.k == 2:
        return p.intrinsic_jtrace
    if p.k == 4:
        J = p.intrinsic_jtrace
        P2 = jet_einsum("ab,ab->", p.intrinsic_schouten,
                        _intrinsic_schouten_up(p))
        return 0.5 * (0.25 * _intrinsic_weyl_norm2(p) - 2.0 * P2 + 2.0 * J * J)
    raise GeometryError("Pfaffian density implemented for k in {2, 4}")


def gauss_bonnet_defect(p: SubmanifoldPack) -> Jets:
    """Pointwise conformally invariant defect in Q = Pfaffian + defect - div.

    Weight -2 for surfaces (half the trace-free shape norm minus the
    tangential Weyl component), weight -4 for k = 4.
    """
    if p.k == 2:
        return 0.5 * p.tracefree_norm2 - 0.5 * p.weyl_double_trace
    if p.k == 4:
        G = p.fialkow_trace
        return (-0.25 * _intrinsic_weyl_norm2(p) + fialkow_quartic(p)
                + 2.0 * _fialkow_norm2(p) - 2.0 * G * G)
    raise GeometryError("the defect is defined for k in {2, 4}")


def extrinsic_q2(p: SubmanifoldPack) -> Jets:
    """Second-order extrinsic Q-curvature of a surface."""
    if p.k != 2:
        raise GeometryError("this is the surface (k = 2) Q-curvature")
    return p.intrinsic_jtrace + gauss_bonnet_defect(p)


# -- Paneitz-type operators ----------------------------------------------------


def _flux_div(p, M: Jets, phi: Jets) -> Jets:
    """``nabla^a (M_{ab} nabla^b phi)`` for a symmetric 2-tensor M."""
    grad_up = jet_einsum("ab,b->a", p.induced_inv, p.tangential_gradient(phi))
    V = jet_einsum("ab,b->a", M, grad_up)
    return _div_vec(p, V)


@lru_cache(maxsize=1)
def paneitz_flux_sign() -> float:
    """Sign of the second-order flux term, calibrated numerically.

    The candidate fourth-order operator is Lap^2 phi + s * div((4 P - 2 J g)
    grad phi); the sign s is fixed by requiring the critical transformation
    law  e^{4 u} Q4[e^{2u} h] = Q4[h] + P4[u]  to hold on a randomized
    4-manifold, rather than assumed from any convention.
    """
    from .fields import conformally_rescaled
    from .scenes import affine_plane, random_polynomial_metric

    sc = affine_plane(4, 5)
    g = random_polynomial_metric(5, seed=424, amplitude=0.04)
    y0 = np.full(4, 0.02)

    def upsilon(xs):
        return 0.15 * xs[0] - 0.1 * xs[1] * xs[2] + 0.07 * xs[3] ** 2

    base = SubmanifoldPack(g, sc.patch, y0)
    resc = SubmanifoldPack(conformally_rescaled(g, upsilon, t=1.0),
                           sc.patch, y0)
    u = _restrict(base, upsilon)
    q0, q1 = intrinsic_q4(base), intrinsic_q4(resc)
    escale = (4.0 * u).exp()
    best, best_res = 1.0, np.inf
    for s in (1.0, -1.0):
        law = escale * q1 - q0 - _paneitz_intrinsic_signed(base, u, s)
        res = abs(float(law.value))
        if res < best_res:
            best, best_res = s, res
    if best_res > 1e-8:
        raise GeometryError(
            f"Paneitz sign calibration failed: residual {best_res:.3e}")
    return best


def _restrict(p: SubmanifoldPack, fn) -> Jets:
    """Restrict an ambient scalar function to the patch as y-jets."""
    xs = [p.chart_jets[a] for a in range(p.n)]
    return fn(xs)


def _paneitz_intrinsic_signed(p, phi: Jets, sign: float) -> Jets:
    lap2 = p.tangential_laplacian(p.tangential_laplacian(phi))
    J = p.intrinsic_jtrace
    M = 4.0 * p.intrinsic_schouten - 2.0 * (J * p.induced)
    return lap2 + sign * _flux_div(p, M, phi)


def intrinsic_paneitz_apply(p: SubmanifoldPack, phi: Jets) -> Jets:
    """Fourth-order intrinsic conformally covariant operator, k = 4."""
    if p.k != 4:
        raise GeometryError("intrinsic fourth-order operator needs k = 4")
    return _paneitz_intrinsic_signed(p, phi, paneitz_flux_sign())


def extrinsic_paneitz_apply(p: SubmanifoldPack, phi: Jets) -> Jets:
    """Extrinsic conformally covariant power of the Laplacian, k in {2, 4}.

    k = 2 gives minus the induced-metric Laplacian; k = 4 augments the
    intrinsic fourth-order operator by the Fialkow flux term.
    """
    if p.k == 2:
        return -p.tangential_laplacian(phi)
    if p.k == 4:
        G = p.fialkow_trace
        M = 4.0 * p.fialkow - 2.0 * (G * p.induced)
        return (intrinsic_paneitz_apply(p, phi)
                + paneitz_flux_sign() * _flux_div(p, M, phi))
    raise GeometryError("extrinsic operator implemented for k in {2, 4}")


def factored_paneitz_apply(p: SubmanifoldPack, phi: Jets,
                           lam: float) -> Jets:
    """Product-of-shifted-Laplacians form valid for minimal immersions in
    Einstein backgrounds: prod_j (-Lap + lam (k/2+j-1)(k/2-j)) phi."""
    k = p.k
    if k % 2:
        raise GeometryError("factorization needs even k")
    out = phi
    for j in range(1, k // 2 + 1):
        shift = lam * (k / 2 + j - 1) * (k / 2 - j)
        out = -p.tangential_laplacian(out) + shift * out
    return out


# -- comparison invariants -----------------------------------------------------


def _w_tttt(p) -> Jets:
    return p.block("weyl", "tttt")


def _w_ttnn(p) -> Jets:
    return p.block("weyl", "ttnn")


def _w_tntn(p) -> Jets:
    return p.block("weyl", "tntn")


def _w_ntnt_trace(p) -> Jets:
    """``W[r, s] = W_{r a s}{}^{a}`` (normal, normal)."""
    return _memo(p, "w_ntnt_trace", lambda: jet_einsum(
        "rasb,ab->rs", p.block("weyl", "ntnt"), p.induced_inv))


def _wtn_square(p) -> Jets:
    def build():
        wtn = _w_tn_trace(p)
        wtnu = jet_einsum("ab,br->ar", p.induced_inv, wtn)
        return jet_einsum("ar,ar->", wtn, wtnu)
    return _memo(p, "wtn_square", build)


def _w_ttnt_norm2(p) -> Jets:
    def build():
        w4 = _w_ttnt(p)
        w4u = _raise_t(p, _raise_t(p, _raise_t(p, w4, 0), 1), 3)
        return jet_einsum("abrc,abrc->", w4, w4u)
    return _memo(p, "w_ttnt_norm2", build)


def _shape_pair_weyl_tttt(p) -> Jets:
    """``L0^{a c r} L0^{b d}{}_r W_{a b c d}``."""
    def build():
        T = jet_einsum("abcd,acr->bdr", _w_tttt(p), _l0_up(p))
        return jet_einsum("bdr,bdr->", T, _l0_up(p))
    return _memo(p, "shape_pair_weyl_tttt", build)


def _shape_pair_weyl_ttnn(p) -> Jets:
    """``L0^{g a r} L0_g{}^{b s} W_{a b r s}``."""
    def build():
        T = jet_einsum("gar,gbs->abrs", _l0_up(p), _l0_mixed(p))
        return jet_einsum("abrs,abrs->", _w_ttnn(p), T)
    return _memo(p, "shape_pair_weyl_ttnn", build)


def _shape_pair_weyl_tntn(p) -> Jets:
    """``L0^{g a r} L0_g{}^{b s} W_{a r b s}``."""
    def build():
        T = jet_einsum("gar,gbs->arbs", _l0_up(p), _l0_mixed(p))
        return jet_einsum("arbs,arbs->", _w_tntn(p), T)
    return _memo(p, "shape_pair_weyl_tntn", build)


def _shape_square_fialkow(p) -> Jets:
    return _memo(p, "shape_square_fialkow", lambda: jet_einsum(
        "ab,ab->", p.tracefree_square, _fialkow_up(p)))


def _shape_square_weyl_trace(p) -> Jets:
    return _memo(p, "shape_square_weyl_trace", lambda: jet_einsum(
        "ab,ab->", _tracefree_square_up(p), p.weyl_partial_trace))


def _shape_normal_gram(p) -> Jets:
    """``M[r, s] = L0^{a b r} L0_{a b s}`` (symmetric normal 2-tensor)."""
    return _memo(p, "shape_normal_gram", lambda: jet_einsum(
        "abr,abs->rs", _l0_up(p), p.second_tracefree))


def _shape_quartic_alt(p) -> Jets:
    """``L0^{a b r} L0^{g d}{}_r L0_{a g s} L0_{b d}{}^s``."""
    def build():
        X1 = jet_einsum("abr,gdr->abgd", _l0_up(p), _l0_up(p))
        X2 = jet_einsum("ags,bds->agbd", p.second_tracefree,
                        p.second_tracefree)
        return jet_einsum("abgd,agbd->", X1, X2)
    return _memo(p, "shape_quartic_alt", build)


def _shape_square_norm2(p) -> Jets:
    return _memo(p, "shape_square_norm2", lambda: jet_einsum(
        "ab,ab->", p.tracefree_square, _tracefree_square_up(p)))


def _shape_gram_square(p) -> Jets:
    def build():
        M = _shape_normal_gram(p)
        return jet_einsum("rs,sr->", M, M)
    return _memo(p, "shape_gram_square", build)


def _mean_shape_cubic(p) -> Jets:
    """``H^r tr L0^3_r``."""
    def build():
        lm = _l0_mixed(p)
        Y = jet_einsum("abs,bcs->ac", lm, lm)
        tr3 = jet_einsum("ac,car->r", Y, lm)
        return jet_einsum("r,r->", tr3, p.mean_curvature)
    return _memo(p, "mean_shape_cubic", build)


def _mean_contracted_shape(p) -> Jets:
    """``T[a, b] = H^r L0^{a b}{}_r`` with both tangent slots up."""
    return _memo(p, "mean_contracted_shape", lambda: jet_einsum(
        "abr,r->ab", _l0_up(p), p.mean_curvature))


def willmore_quartic(p: SubmanifoldPack, route: str = "general") -> Jets:
    """Weight -4 Willmore-type invariant (3 <= k < n, k != 6).

    ``route='general'`` is the all-dimensions definition; for a
    four-dimensional hypersurface ``route='hypersurface'`` evaluates the
    specialized shape-operator display, which must agree.
    """
    k, n = p.k, p.n
    if not (3 <= k < n) or k == 6:
        raise GeometryError("Willmore quartic needs 3 <= k < n, k != 6")
    if route == "general":
        return (k * (k - 1) / (4.0 * (k - 6)) * tracefree_quartic_combo(p)
                + 0.5 * (k - 3) * div_shape_weyl_a(p)
                - (k * k - 2 * k + 3) / (2.0 * (k - 1)) * div_shape_weyl_b(p)
                - 0.5 * (k - 3) * _wtn_square(p)
                - 0.25 * (k - 3) * _w_ttnt_norm2(p)
                - 0.5 * (k - 3) * _shape_pair_weyl_tttt(p)
                - 0.5 * (k - 3) * _shape_pair_weyl_ttnn(p)
                - 0.5 * (k * k - 3 * k + 6) * _shape_square_fialkow(p)
                - k * (k - 1) / (2.0 * (k - 6))
                * p.fialkow_trace * p.tracefree_norm2
                - 0.5 * (k - 3) * _shape_gram_square(p)
                - 0.5 * (k - 3) * _shape_square_norm2(p)
                + (k - 3) * _shape_quartic_alt(p))
    if route == "hypersurface":
        if k != 4 or n != 5:
            raise GeometryError("the specialized display is the (4, 5) case")
        l0, l0u, lm = p.second_tracefree, _l0_up(p), _l0_mixed(p)
        dl = p.tangential_cov_deriv(
            l0, [("tangent", "down")] * 2 + [("normal", "down")])
        ddl = p.tangential_cov_deriv(
            dl, [("tangent", "down")] * 3 + [("normal", "down")])
        lap_l0 = jet_einsum("fe,feabr->abr", p.induced_inv, ddl)
        t1 = 0.5 * jet_einsum("abr,abr->", l0u, lap_l0)
        div_l0 = jet_einsum("eg,egbr->br", p.induced_inv, dl)
        V = jet_einsum("abr,br->a", lm, div_l0)
        t2 = (4.0 / 3.0) * _div_vec(p, V)
        t3 = 1.5 * p.tangential_laplacian(p.tracefree_norm2)
        t4 = -3.5 * p.intrinsic_jtrace * p.tracefree_norm2
        t5 = -6.0 * jet_einsum("abr,arb->", l0u, p.block("cotton", "tnt"))
        t6 = 4.0 * jet_einsum("ab,ab->", _tracefree_square_up(p),
                              p.intrinsic_schouten)
        t7 = -6.0 * _mean_shape_cubic(p)
        t8 = 12.0 * jet_einsum("ab,ab->", _mean_contracted_shape(p),
                               p.fialkow)
        return t1 + t2 + t3 + t4 + t5 + t6 + t7 + t8
    raise ValueError(f"unknown route {route!r}")


def _ambient_dweyl_partial_trace(p) -> Jets:
    """``X[r, a, b] = (ambient nabla)_r W_{a c b}{}^{c}`` projected."""
    def build():
        dw = p.project(p.dweyl_y, "ntttt")
        return jet_einsum("racbd,cd->rab", dw, p.induced_inv)
    return _memo(p, "ambient_dweyl_partial_trace", build)


def _div_shape(p) -> Jets:
    """``X[b, r] = nabla^a L0_{a b r}``."""
    def build():
        dl = p.tangential_cov_deriv(
            p.second_tracefree,
            [("tangent", "down")] * 2 + [("normal", "down")])
        return jet_einsum("eg,egbr->br", p.induced_inv, dl)
    return _memo(p, "div_shape", build)


def transverse_weyl_quartic_a(p: SubmanifoldPack,
                              route: str = "general") -> Jets:
    """Weight -4 invariant extending a transverse-curvature hypersurface
    scalar to all codimensions (4 <= k < n, k != 6)."""
    k, n = p.k, p.n
    if not (4 <= k < n) or k == 6:
        raise GeometryError("needs 4 <= k < n, k != 6")
    if route == "general":
        return (-(k - 2) / (2.0 * (k - 3) * (k - 6))
                * tracefree_quartic_combo(p)
                + (k - 2) / (k - 3) * (div_shape_weyl_a(p)
                                       + div_shape_weyl_b(p)
                                       + _shape_square_fialkow(p))
                + _shape_square_weyl_trace(p)
                + (k - 2) / ((k - 3) * (k - 6))
                * p.fialkow_trace * p.tracefree_norm2
                + _shape_pair_weyl_tttt(p)
                - jet_einsum("rs,rs->", _shape_normal_gram(p),
                             _w_ntnt_trace(p))
                + 2.0 * _shape_pair_weyl_tntn(p)
                - _shape_pair_weyl_ttnn(p)
                - 0.5 * _w_ttnt_norm2(p)
                + _wtn_square(p))
    if route == "hypersurface":
        if n != k + 1:
            raise GeometryError("the specialized display is codimension one")
        lap_l2 = p.tangential_laplacian(p.tracefree_norm2)
        dd = p.tangential_cov_deriv(
            p.tracefree_square, [("tangent", "down")] * 2)
        first = jet_einsum("ea,eab->b", p.induced_inv, dd)
        double_div = _div_vec(p, first)
        dw = _ambient_dweyl_partial_trace(p)
        t3 = jet_einsum("abr,rab->", _l0_up(p), dw)
        ds = _div_shape(p)
        dsu = _raise_t(p, ds, 0)
        t4 = (k - 2) / (k - 1) ** 2 * jet_einsum("br,br->", ds, dsu)
        t5 = -(k - 2) / (k - 3) * jet_einsum(
            "ab,ab->", _tracefree_square_up(p), p.intrinsic_schouten)
        t6 = -2.0 * jet_einsum("ab,ab->", _mean_contracted_shape(p),
                               p.weyl_partial_trace)
        den = (k - 3) * (k - 6)
        return ((k - 4) / den * lap_l2
                - (k - 2) / den * p.intrinsic_jtrace * p.tracefree_norm2
                - double_div / (k - 3) + t3 + t4 + t5 + t6)
    raise ValueError(f"unknown route {route!r}")


def transverse_weyl_quartic_b(p: SubmanifoldPack,
                              route: str = "general") -> Jets:
    """Companion weight -4 invariant (4 <= k < n, k != 6)."""
    k, n = p.k, p.n
    if not (4 <= k < n) or k == 6:
        raise GeometryError("needs 4 <= k < n, k != 6")
    if route == "general":
        return (-tracefree_quartic_combo(p) / (2.0 * (k - 3) * (k - 6))
                + (div_shape_weyl_a(p) + div_shape_weyl_b(p)) / (k - 3)
                - (k - 4) / (k - 3) * _shape_square_fialkow(p)
                + p.fialkow_trace * p.tracefree_norm2
                / ((k - 3) * (k - 6)))
    if route == "hypersurface":
        if n != k + 1:
            raise GeometryError("the specialized display is codimension one")
        dp = p.project(p.dschouten_y, "ntt")
        t1 = -jet_einsum("abr,rab->", _l0_up(p), dp)
        t2 = -jet_einsum("rs,rs->", _shape_normal_gram(p),
                         p.block("schouten", "nn"))
        dH = p.tangential_cov_deriv(p.mean_curvature, [("normal", "up")])
        ddH = p.tangential_cov_deriv(
            dH, [("tangent", "down"), ("normal", "up")])
        t3 = jet_einsum("abr,abr->", _l0_up(p), ddH)
        t4 = jet_einsum("ab,ab->", _mean_contracted_shape(p),
                        p.intrinsic_schouten)
        dd = p.tangential_cov_deriv(
            p.tracefree_square, [("tangent", "down")] * 2)
        first = jet_einsum("ea,eab->b", p.induced_inv, dd)
        t5 = -_div_vec(p, first) / (k - 3)
        t6 = ((k - 5) / (2.0 * (k - 3) * (k - 6))
              * p.tangential_laplacian(p.tracefree_norm2))
        t7 = (-p.intrinsic_jtrace * p.tracefree_norm2
              / ((k - 3) * (k - 6)))
        t8 = (k - 4) / (k - 3) * jet_einsum(
            "ab,ab->", _tracefree_square_up(p), p.intrinsic_schouten)
        t9 = -(k - 3) / (k - 2) * _mean_shape_cubic(p)
        t10 = (k - 3) / (k - 2) * jet_einsum(
            "ab,ab->", _mean_contracted_shape(p), p.weyl_partial_trace)
        t11 = -1.5 * p.mean_norm2 * p.tracefree_norm2
        ds = _div_shape(p)
        dsu = _raise_t(p, ds, 0)
        t12 = k / (k - 1) ** 2 * jet_einsum("br,br->", ds, dsu)
        return t1 + t2 + t3 + t4 + t5 + t6 + t7 + t8 + t9 + t10 + t11 + t12
    raise ValueError(f"unknown route {route!r}")


def anomaly_quartic_a(p: SubmanifoldPack, route: str = "general") -> Jets:
    """Weight -4 invariant whose k = 4 integral reproduces a known
    holographic-anomaly scalar (2 <= k < n)."""
    k, n = p.k, p.n
    if not (2 <= k < n):
        raise GeometryError("needs 2 <= k < n")
    if route == "general":
        return (0.5 * tracefree_quartic_combo(p)
                - 0.5 * (k - 6) * (div_shape_weyl_a(p) + div_shape_weyl_b(p))
                + 0.5 * (k - 6) * (_shape_pair_weyl_ttnn(p)
                                   - _wtn_square(p)
                                   + 0.5 * _w_ttnt_norm2(p)
                                   - _shape_square_weyl_trace(p)
                                   - _shape_pair_weyl_tttt(p)
                                   + jet_einsum("rs,rs->",
                                                _shape_normal_gram(p),
                                                _w_ntnt_trace(p))
                                   - 2.0 * _shape_pair_weyl_tntn(p)))
    if route == "critical":
        if k != 4:
            raise GeometryError("the specialized display is the k = 4 case")
        lap = p.tangential_laplacian(p.tracefree_norm2)
        flux = _div_vec(p, _shape_times_deflection(p))
        scal = p.pull(p.ambient.scal)
        ric_tt = p.project(p.pull(p.ambient.ric), "tt")
        ric_nn = jet_trace(p.project(p.pull(p.ambient.ric), "nn"), "rr->")
        ric_tt_up = _raise_t(p, _raise_t(p, ric_tt, 0), 1)
        dw = _ambient_dweyl_partial_trace(p)
        cho = (2.0 * _deflection_norm2(p)
               + jet_einsum("abr,rab->", _l0_up(p), dw)
               + scal * p.tracefree_norm2 / (n - 1)
               - ric_nn * p.tracefree_norm2 / (n - 2)
               - 2.0 / (n - 2) * jet_einsum("ab,ab->", p.tracefree_square,
                                            ric_tt_up)
               + p.mean_norm2 * p.tracefree_norm2
               - 2.0 * _mean_shape_cubic(p)
               - 2.0 * jet_einsum("ab,ab->", _mean_contracted_shape(p),
                                  p.weyl_partial_trace))
        return -0.5 * lap + 2.0 * flux + cho
    raise ValueError(f"unknown route {route!r}")


def _ambient_pair_weyl_squares(p):
    """The three tangent/ambient mixed Weyl squares used by the second
    anomaly invariant: (W_{a b c d} two slots projected)^2 variants."""
    def build():
        e, wy, gup, hi = (p.tangent_frame, p.weyl_y, p.metric_inv_y,
                          p.induced_inv)
        # S1: first two slots tangential
        A = jet_einsum("ia,abcd->ibcd", e, wy)
        A = jet_einsum("jb,ibcd->ijcd", e, A)
        Au = jet_einsum("ik,kjcd->ijcd", hi, A)
        Au = jet_einsum("jl,ilcd->ijcd", hi, Au)
        Au = jet_einsum("ce,ijed->ijcd", gup, Au)
        Au = jet_einsum("df,ijcf->ijcd", gup, Au)
        s1 = jet_einsum("ijcd,ijcd->", A, Au)
        # S2: slots one and three tangential
        B = jet_einsum("ia,acbd->icbd", e, wy)
        B = jet_einsum("jb,icbd->icjd", e, B)
        Bu = jet_einsum("ik,kcjd->icjd", hi, B)
        Bu = jet_einsum("jl,icld->icjd", hi, Bu)
        Bu = jet_einsum("ce,iejd->icjd", gup, Bu)
        Bu = jet_einsum("df,icjf->icjd", gup, Bu)
        s2 = jet_einsum("icjd,icjd->", B, Bu)
        # S3: trace over tangential slots two and four, squared
        C = jet_einsum("ia,cadb->cidb", e, wy)
        C = jet_einsum("jb,cidb->cidj", e, C)
        Z = jet_einsum("cidj,ij->cd", C, hi)
        Zu = jet_einsum("ce,ed->cd", gup, Z)
        Zu = jet_einsum("df,cf->cd", gup, Zu)
        s3 = jet_einsum("cd,cd->", Z, Zu)
        return s1, s2, s3
    return _memo(p, "ambient_pair_weyl_squares", build)


def anomaly_quartic_b(p: SubmanifoldPack, route: str = "general") -> Jets:
    """Second anomaly-type weight -4 invariant (2 <= k < n, k not in {3, 6})."""
    k, n = p.k, p.n
    if not (2 <= k < n) or k in (3, 6):
        raise GeometryError("needs 2 <= k < n with k not in {3, 6}")
    if route == "general":
        s1, s2, s3 = _ambient_pair_weyl_squares(p)
        den = (k - 1) * (k - 3)
        return (weyl_trace_quartic_scaled(p) / ((k - 3) * (k - 6))
                - 2.0 / (k - 1) * (s1 - s2 + s3)
                - 2.0 * (n - k - 1) / den * div_shape_weyl_a(p)
                - 2.0 * (n - 5 * k + 11) / den * div_shape_weyl_b(p)
                - 2.0 * (n - 3 * k + 5) / den * _wtn_square(p)
                + (n - k - 1) / den * _w_ttnt_norm2(p)
                - 2.0 * (n - k - 1) / den * _shape_pair_weyl_tttt(p)
                - 2.0 * (n - 3 * k + 5) / den * _shape_square_weyl_trace(p)
                + 2.0 * (n - 5 * k + 11) / den * _shape_pair_weyl_ttnn(p)
                + 2.0 * (n - 3 * k + 5) / den
                * jet_einsum("rs,rs->", _shape_normal_gram(p),
                             _w_ntnt_trace(p))
                - 4.0 * (n - 2 * k + 2) / den * _shape_pair_weyl_tntn(p))
    if route == "critical":
        if k != 4:
            raise GeometryError("the specialized display is the k = 4 case")
        Wd = p.weyl_double_trace
        ddw = cov_deriv_jets(p.ambient.dweyl, ["down"] * 5,
                             p.ambient.gamma, n)
        ddw_y = p.project(p.pull(ddw), "nntttt")
        ddn = jet_trace(ddw_y, "rrabcd->abcd")
        ddn = jet_einsum("abcd,ac->bd", ddn, p.induced_inv)
        lap_n_wd = jet_einsum("bd,bd->", ddn, p.induced_inv)
        dw_y = p.project(p.dweyl_y, "ntttt")
        dwd = jet_einsum("rabcd,ac->rbd", dw_y, p.induced_inv)
        dwd = jet_einsum("rbd,bd->r", dwd, p.induced_inv)
        h_dwd = jet_einsum("r,r->", p.mean_curvature, dwd)
        scal = p.pull(p.ambient.scal)
        ric_nn = jet_trace(p.project(p.pull(p.ambient.ric), "nn"), "rr->")
        ric_tt = p.project(p.pull(p.ambient.ric), "tt")
        ric_tt_up = _raise_t(p, _raise_t(p, ric_tt, 0), 1)
        dH = p.tangential_cov_deriv(p.mean_curvature, [("normal", "up")])
        dH_up = _raise_t(p, dH, 0)
        dw = _ambient_dweyl_partial_trace(p)
        cho = (lap_n_wd / 3.0
               + (n - 10) / 3.0 * h_dwd
               - (n - 4) / (n - 1) * scal * Wd
               + (n - 4) / (n - 2) * ric_nn * Wd
               + 4.0 * (n - 5) / (3.0 * (n - 2))
               * jet_einsum("ab,ab->", ric_tt_up, p.weyl_partial_trace)
               - 4.0 / 3.0 * jet_einsum("ar,ar->", _w_tn_trace(p), dH_up)
               - 2.0 * (n - 5) / 3.0
               * jet_einsum("abr,rab->", _l0_up(p), dw)
               + 8.0 * (n - 5) / 3.0
               * jet_einsum("ab,ab->", _mean_contracted_shape(p),
                            p.weyl_partial_trace)
               - 4.0 * (n + 1) / 3.0
               * jet_einsum("ar,ar->", _deflection_up(p), _w_tn_trace(p))
               - 5.0 * (n - 4) / 3.0 * p.mean_norm2 * Wd)
        return ((3 * n - 10) / 6.0 * p.tangential_laplacian(Wd)
                - 4.0 * (n - 5) / 3.0 * _div_vec(p, p.mc_cotton_trace)
                + cho)
    raise ValueError(f"unknown route {route!r}")


# -- registry -------------------------------------------------------------------


@dataclass(frozen=True)
class InvariantSpec:
    """One evaluable scalar with its validity range.

    ``weight`` is the conformal weight w in the compensation rule
    e^{-w Upsilon} (value in rescaled metric) = (value in original metric);
    ``None`` marks the dimension-graded densities whose weight is -k.
    """

    name: str
    weight: int | None
    dims: str
    valid: Callable[[int, int], bool]
    compute: Callable[[SubmanifoldPack], Jets]

    def weight_at(self, k: int) -> int:
        return -k if self.weight is None else self.weight


REGISTRY: dict[str, InvariantSpec] = {
    spec.name: spec for spec in [
        InvariantSpec("div_shape_weyl_a", -4, "1 <= k < n",
                      lambda k, n: 1 <= k < n, div_shape_weyl_a),
        InvariantSpec("div_shape_weyl_b", -4, "1 <= k < n",
                      lambda k, n: 1 <= k < n, div_shape_weyl_b),
        InvariantSpec("fialkow_quartic", -4, "1 <= k < n, n != 4",
                      lambda k, n: 1 <= k < n and n != 4, fialkow_quartic),
        InvariantSpec("weyl_trace_quartic", -4, "1 <= k < n, n != 4",
                      lambda k, n: 1 <= k < n and n != 4, weyl_trace_quartic),
        InvariantSpec("weyl_trace_quartic_scaled", -4, "1 <= k < n",
                      lambda k, n: 1 <= k < n, weyl_trace_quartic_scaled),
        InvariantSpec("tracefree_quartic_combo", -4, "1 <= k < n",
                      lambda k, n: 1 <= k < n, tracefree_quartic_combo),
        InvariantSpec("intrinsic_q4", -4, "3 <= k < n",
                      lambda k, n: 3 <= k < n, intrinsic_q4),
        InvariantSpec("q4_extrinsic_correction", -4, "3 <= k < n, n != 4",
                      lambda k, n: 3 <= k < n and n != 4,
                      q4_extrinsic_correction),
        InvariantSpec("extrinsic_q4", -4, "3 <= k < n, n != 4",
                      lambda k, n: 3 <= k < n and n != 4, extrinsic_q4),
        InvariantSpec("extrinsic_q2", -2, "k = 2 < n",
                      lambda k, n: k == 2 < n, extrinsic_q2),
        InvariantSpec("intrinsic_pfaffian", None, "k in {2, 4}, k < n",
                      lambda k, n: k in (2, 4) and k < n, intrinsic_pfaffian),
        InvariantSpec("gauss_bonnet_defect", None, "k in {2, 4}, k < n",
                      lambda k, n: k in (2, 4) and k < n,
                      gauss_bonnet_defect),
        InvariantSpec("willmore_quartic", -4, "3 <= k < n, k != 6",
                      lambda k, n: 3 <= k < n and k != 6, willmore_quartic),
        InvariantSpec("transverse_weyl_quartic_a", -4,
                      "4 <= k < n, k != 6",
                      lambda k, n: 4 <= k < n and k != 6,
                      transverse_weyl_quartic_a),
        InvariantSpec("transverse_weyl_quartic_b", -4,
                      "4 <= k < n, k != 6",
                      lambda k, n: 4 <= k < n and k != 6,
                      transverse_weyl_quartic_b),
        InvariantSpec("anomaly_quartic_a", -4, "2 <= k < n",
                      lambda k, n: 2 <= k < n, anomaly_quartic_a),
        InvariantSpec("anomaly_quartic_b", -4,
                      "2 <= k < n, k not in {3, 6}",
                      lambda k, n: 2 <= k < n and k not in (3, 6),
                      anomaly_quartic_b),
    ]
}


def available(k: int, n: int) -> list[str]:
    """Names evaluable at the given submanifold/background dimensions."""
    return [name for name, spec in REGISTRY.items() if spec.valid(k, n)]


def evaluate(p: SubmanifoldPack, name: str) -> Jets:
    """Evaluate one registered scalar, enforcing its validity range."""
    spec = REGISTRY[name]
    if not spec.valid(p.k, p.n):
        raise GeometryError(
            f"{name} is defined for {spec.dims}, got k={p.k}, n={p.n}")
    return spec.compute(p)


def evaluate_all(p: SubmanifoldPack) -> dict[str, float]:
    """Point values of every scalar valid at the pack's dimensions."""
    return {name: float(evaluate(p, name).value)
            for name in available(p.k, p.n)}
