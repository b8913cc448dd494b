"""Conformal-change verification for submanifold curvature data.

Everything in this module answers one question: how do the stored
components of a geometric quantity respond when the ambient metric is
rescaled by ``exp(2 t Upsilon)``?  The response is probed two ways,

* ``nilpotent-parameter``: the rescale factor is expanded along an extra
  jet variable ``t`` with ``t^2 = 0``, so the first variation pops out as
  an exact coefficient (no truncation error at all);
* ``central-difference``: the quantity is evaluated at ``t = +/-step``
  on ordinary packs and differenced, which also works when the exact
  route would exhaust the jet budget (fourth-derivative quantities at
  the default pack order).

Stored components mix a coordinate tangent frame with an orthonormal
normal frame.  Re-running Gram-Schmidt against ``exp(2 t Upsilon) g``
rescales each normal vector by ``exp(-t Upsilon)`` and changes nothing
else, so a quantity whose abstract all-lowered components carry
homogeneity ``h`` and whose stored form uses ``j`` orthonormal normal
slots obeys ``stored_hat = exp((h - j) t Upsilon) stored``.  The
``weight`` argument taken throughout is that stored exponent ``h - j``;
the first variation of a quantity with an exact weight is recovered as
the ``t``-coefficient of ``exp(-weight * t * Upsilon) * stored_hat``.

The checks bundled here certify, on top of individual variations:

* closed-form first-variation laws for the ambient curvature family and
  for the mixed submanifold tensors (trace-adjusted Schouten/Cotton/Bach
  and the normal deflection),
* that derivative operators pick up only the expected lower-order terms,
* pointwise conformal invariance of the registered scalar invariants at
  finite rescalings,
* the transformation rule of the extrinsic Q-curvatures through their
  factored operators,
* that the first variation of each quartic scalar building block
  depends on no more of the transverse jet of ``Upsilon`` than its
  stratum promises, and
* a concrete metric family witnessing that the tensor and divergence
  building blocks are linearly independent, with closed-form component
  values to pin the conventions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np

from .fields import (
    GeometryError,
    MetricField,
    conformally_rescaled,
    diagonal_exponential_metric,
    graph_patch,
)
from .invariants import (
    REGISTRY,
    _mean_shape_cubic,
    available,
    evaluate,
    extrinsic_paneitz_apply,
)
from .jets import (
    BudgetError,
    Jets,
    jet_einsum,
    jet_trace,
    jets_stack,
    variables,
)
from .scenes import (
    Scene,
    affine_plane,
    equatorial_sphere,
    random_scene,
    random_upsilon,
)
from .submanifold import SubmanifoldPack

__all__ = [
    "ConformalFactor",
    "LinearizationReport",
    "rescale",
    "linearize",
    "ambient_law_reports",
    "submanifold_law_reports",
    "derivative_law_reports",
    "check_tangential_dependence",
    "CONFORMALLY_INVARIANT",
    "check_invariance",
    "check_q_transformation",
    "check_homogeneity",
    "quartic_term_reports",
    "QUARTIC_STRATA",
    "transverse_vanishing_upsilon",
    "check_strata_vanishing",
    "witness_metric",
    "linear_independence_witness",
]

#: the two methods must reproduce each other this well to be trusted.
METHOD_AGREEMENT_TOL = 1e-6
#: a gap above this marks the report as unreliable.
METHOD_FLAG_TOL = 1e-5

_DEFAULT_STEP = 1e-4


# -- conformal factors ---------------------------------------------------------


@dataclass
class ConformalFactor:
    """An ambient scalar ``Upsilon`` driving a conformal rescale.

    ``fn`` maps a list of ambient coordinate jets to a scalar jet, so the
    same object can be evaluated on chart restrictions, on ambient
    variables, or at finite parameter values.  ``vanishing_order`` is an
    optional tag promising that every derivative of ``Upsilon`` through
    that total order vanishes at the attachment point; :meth:`verify`
    checks the promise on the actual jet coefficients.
    """

    fn: object
    name: str = "upsilon"
    vanishing_order: int | None = None

    def __call__(self, xs):
        return self.fn(xs)

    def jets(self, x_point, order: int = 4) -> Jets:
        """The scalar's ambient jet expansion at ``x_point``."""
        return self.fn(variables(np.asarray(x_point, dtype=float), order))

    def verify(self, x_point, *, order: int = 4, tol: float = 1e-10) -> bool:
        """Check the ``vanishing_order`` tag against the jet coefficients.

        Only a necessary condition is tested (coefficients of total degree
        up to the tag must vanish at ``x_point``), which is exactly what the
        stratified checks below consume.
        """
        if self.vanishing_order is None:
            return True
        u = self.jets(x_point, order=max(order, self.vanishing_order))
        low = np.abs(u.coeffs[..., u.space.degree <= self.vanishing_order])
        return bool(low.size == 0 or float(low.max()) <= tol)


def _as_factor(upsilon) -> ConformalFactor:
    if isinstance(upsilon, ConformalFactor):
        return upsilon
    return ConformalFactor(upsilon)


def rescale(metric: MetricField, upsilon, t: float = 0.0) -> MetricField:
    """The metric ``exp(2 t Upsilon) g`` at a finite parameter value.

    ``t = 0`` returns a field with identical components; a constant
    ``Upsilon = log(c)`` with ``t = 1`` scales the metric by ``c**2`` and
    scalar curvature by ``c**-2``.
    """
    return conformally_rescaled(metric, _as_factor(upsilon), t=float(t))


# -- reports -------------------------------------------------------------------


@dataclass
class LinearizationReport:
    """First conformal variation of one stored quantity.

    ``numeric`` holds the variation computed by ``method``; ``analytic``
    and ``residual`` are populated when a closed-form law is available.
    ``method_gap`` compares the nilpotent-parameter and central-difference
    routes whenever both ran; a gap above ``METHOD_FLAG_TOL`` sets
    ``flagged``.
    """

    quantity: str
    method: str
    numeric: np.ndarray
    analytic: np.ndarray | None = None
    residual: float | None = None
    method_gap: float | None = None
    flagged: bool = False

    def ok(self, tol: float = METHOD_AGREEMENT_TOL) -> bool:
        good = not self.flagged
        if self.residual is not None:
            good = good and self.residual <= tol
        return good


def _gap(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


# -- the engine ----------------------------------------------------------------


class _Engine:
    """Shared pack plumbing for one (metric, patch, point, Upsilon) setup.

    Builds the base pack, the nilpotent-parameter pack and, lazily, the
    pair of finite-parameter packs used for central differences, so a
    batch of reports doesn't rebuild them per quantity.
    """

    def __init__(self, metric, patch, point, upsilon, *, order=4,
                 param_order=None, step=_DEFAULT_STEP):
        self.metric = metric
        self.patch = patch
        self.point = None if point is None else np.asarray(point, dtype=float)
        self.upsilon = _as_factor(upsilon)
        self.order = order
        self.param_order = order if param_order is None else param_order
        self.step = step
        self.base = SubmanifoldPack(metric, patch, self.point, order=order)
        self._param = None
        self._finite = {}
        self._restr = None

    # --- packs ---
    @property
    def param(self) -> SubmanifoldPack:
        if self._param is None:
            ghat = conformally_rescaled(self.metric, self.upsilon, t=None)
            self._param = SubmanifoldPack(
                ghat, self.patch, self.point,
                order=self.param_order, param=True)
        return self._param

    def finite(self, t: float) -> SubmanifoldPack:
        if t not in self._finite:
            ghat = conformally_rescaled(self.metric, self.upsilon, t=t)
            self._finite[t] = SubmanifoldPack(
                ghat, self.patch, self.point, order=self.order)
        return self._finite[t]

    # --- restriction data of Upsilon on the base pack ---
    @property
    def restriction(self) -> SimpleNamespace:
        if self._restr is None:
            p = self.base
            n = p.n
            u_y = self.upsilon([p.chart_jets[a] for a in range(n)])
            xv = variables(p.x_point, p.order)
            u_x = self.upsilon(xv)
            du_x = jets_stack([u_x.deriv(a) for a in range(n)])
            du_y = p.pull(du_x)
            grad = p.tangential_gradient(u_y)
            amb = p.ambient
            hess_x = amb.cov_deriv(amb.cov_deriv(u_x, []), ["down"])
            self._restr = SimpleNamespace(
                u_y=u_y,
                u_x=u_x,
                grad=grad,
                grad_up=jet_einsum("ab,b->a", p.induced_inv, grad),
                normal=jet_einsum("ra,a->r", p.normal_frame, du_y),
                ambient_up=jet_einsum("ab,b->a", p.metric_inv_y, du_y),
                hessian=p.tangential_cov_deriv(grad, [("tangent", "down")]),
                ambient_hessian=p.pull(hess_x),
                laplacian=p.tangential_laplacian(u_y),
            )
        return self._restr

    # --- tensor mode ---
    def nilpotent(self, evaluator, weight: float) -> np.ndarray:
        pp = self.param
        u = self.upsilon([pp.chart_jets[a] for a in range(pp.n)])
        comp = ((-float(weight)) * (pp.chart_jets[pp.n] * u)).exp()
        return np.asarray((comp * evaluator(pp)).deriv(pp.k).value)

    def central(self, evaluator, weight: float) -> np.ndarray:
        vals = []
        for s in (self.step, -self.step):
            ph = self.finite(s)
            upt = float(self.upsilon(
                [ph.chart_jets[a] for a in range(ph.n)]).value)
            vals.append(np.exp(-weight * s * upt)
                        * np.asarray(evaluator(ph).value))
        return (vals[0] - vals[1]) / (2.0 * self.step)

    def first_variation(self, evaluator, weight: float):
        """Nilpotent variation, falling back to differencing on budget walls.

        Quantities consuming four ambient metric derivatives push the
        parameter coefficient past the default jet order; those come back
        through central differences, and the method used is reported.
        """
        try:
            return self.nilpotent(evaluator, weight), "nilpotent-parameter"
        except BudgetError:
            return self.central(evaluator, weight), "central-difference"

    # --- operator mode: apply_fn(pack, operand) with operand_fn(pack) ---
    def nilpotent_operator(self, apply_fn, operand_fn, *, operand_weight,
                           operator_weight, slots_in=0, slots_out=0):
        pp = self.param
        u = self.upsilon([pp.chart_jets[a] for a in range(pp.n)])
        tu = pp.chart_jets[pp.n] * u
        pre = (float(operand_weight - slots_in) * tu).exp()
        post = (float(slots_out - operand_weight - operator_weight) * tu).exp()
        out = post * apply_fn(pp, pre * operand_fn(pp))
        return np.asarray(out.deriv(pp.k).value)

    def central_operator(self, apply_fn, operand_fn, *, operand_weight,
                         operator_weight, slots_in=0, slots_out=0):
        vals = []
        for s in (self.step, -self.step):
            ph = self.finite(s)
            u = self.upsilon([ph.chart_jets[a] for a in range(ph.n)])
            pre = (float(operand_weight - slots_in) * s * u).exp()
            out = apply_fn(ph, pre * operand_fn(ph))
            post = np.exp(float(slots_out - operand_weight - operator_weight)
                          * s * float(u.value))
            vals.append(post * np.asarray(out.value))
        return (vals[0] - vals[1]) / (2.0 * self.step)

    # --- report assembly ---
    def report(self, name, evaluator, weight, *, analytic=None,
               method="nilpotent-parameter", cross_check=True):
        if method == "nilpotent-parameter":
            numeric = self.nilpotent(evaluator, weight)
            other = self.central(evaluator, weight) if cross_check else None
        elif method == "central-difference":
            numeric = self.central(evaluator, weight)
            other = None
        else:
            raise ValueError(f"unknown linearization method {method!r}")
        gap = None if other is None else _gap(numeric, other)
        residual = None
        if analytic is not None:
            analytic = np.asarray(analytic, dtype=float)
            residual = _gap(numeric, analytic)
        return LinearizationReport(
            quantity=name, method=method, numeric=numeric,
            analytic=analytic, residual=residual, method_gap=gap,
            flagged=bool(gap is not None and gap > METHOD_FLAG_TOL))

    def operator_report(self, name, apply_fn, operand_fn, *, operand_weight,
                        operator_weight, slots_in=0, slots_out=0,
                        analytic=None, cross_check=True):
        numeric = self.nilpotent_operator(
            apply_fn, operand_fn, operand_weight=operand_weight,
            operator_weight=operator_weight, slots_in=slots_in,
            slots_out=slots_out)
        gap = None
        if cross_check:
            other = self.central_operator(
                apply_fn, operand_fn, operand_weight=operand_weight,
                operator_weight=operator_weight, slots_in=slots_in,
                slots_out=slots_out)
            gap = _gap(numeric, other)
        residual = None
        if analytic is not None:
            analytic = np.asarray(analytic, dtype=float)
            residual = _gap(numeric, analytic)
        return LinearizationReport(
            quantity=name, method="nilpotent-parameter", numeric=numeric,
            analytic=analytic, residual=residual, method_gap=gap,
            flagged=bool(gap is not None and gap > METHOD_FLAG_TOL))


def _engine_for(scene: Scene, upsilon, **kw) -> _Engine:
    return _Engine(scene.metric, scene.patch, scene.point, upsilon, **kw)


def linearize(evaluator, metric, patch, upsilon, weight, *, point=None,
              order=4, method="nilpotent-parameter", step=_DEFAULT_STEP,
              cross_check=True, analytic=None,
              name="quantity") -> LinearizationReport:
    """First conformal variation of ``evaluator``'s stored components.

    ``evaluator`` maps a :class:`SubmanifoldPack` to a jet tensor;
    ``weight`` is the exponent of its stored components under rescale
    (abstract all-lowered homogeneity minus the number of orthonormal
    normal slots).  The nilpotent-parameter route is exact; central
    differences at ``t = +/-step`` provide the cross-check and the
    fallback when the exact route would need jets beyond the budget.
    """
    eng = _Engine(metric, patch, point, upsilon, order=order, step=step)
    return eng.report(name, evaluator, weight, analytic=analytic,
                      method=method, cross_check=cross_check)


# -- ambient transformation laws -----------------------------------------------

_WEYL_PATTERNS = ("tttt", "tttn", "ttnn", "tntn")
_SCHOUTEN_PATTERNS = ("tt", "tn", "nn")


def ambient_law_reports(scene: Scene, upsilon=None, *, seed=0,
                        cross_check=False) -> list[LinearizationReport]:
    """Variation laws for the ambient curvature family along the patch.

    The Weyl tensor is conformally invariant, the Schouten tensor picks
    up minus the ambient Hessian of ``Upsilon``, the Cotton tensor a
    gradient contraction of the Weyl tensor, and the Bach tensor (for
    ``n != 4``) a gradient contraction of the Cotton tensor.  Stored
    weights follow the normal-slot count of each projection pattern.
    """
    if upsilon is None:
        upsilon = random_upsilon(scene.patch.n, seed=seed)
    eng = _engine_for(scene, upsilon)
    p, r = eng.base, eng.restriction
    n = p.n
    reports = []
    for pat in _WEYL_PATTERNS:
        reports.append(eng.report(
            f"weyl[{pat}]", lambda q, pat=pat: q.block("weyl", pat),
            2.0 - pat.count("n"), analytic=0.0, cross_check=cross_check))
    hess = r.ambient_hessian
    for pat in _SCHOUTEN_PATTERNS:
        analytic = -np.asarray(p.project(hess, pat).value)
        reports.append(eng.report(
            f"schouten[{pat}]", lambda q, pat=pat: q.block("schouten", pat),
            -float(pat.count("n")), analytic=analytic,
            cross_check=cross_check))
    wu = jet_einsum("abcd,d->abc", p.weyl_y, r.ambient_up)
    for pat in ("ttt", "ttn"):
        analytic = -np.asarray(p.project(wu, pat).value)
        reports.append(eng.report(
            f"cotton[{pat}]", lambda q, pat=pat: q.block("cotton", pat),
            -float(pat.count("n")), analytic=analytic,
            cross_check=cross_check))
    cu = jet_einsum("gab,g->ab", p.cotton_y, r.ambient_up)
    csym = (cu + jet_trace(cu, "ab->ba")) * 0.5
    analytic = 2.0 * (n - 4) * np.asarray(p.project(csym, "tt").value)
    reports.append(eng.report(
        "bach[tt]", lambda q: q.project(q.bach_y, "tt"), -2.0,
        analytic=analytic, method="central-difference"))
    return reports


# -- submanifold transformation laws -------------------------------------------


def submanifold_law_reports(scene: Scene, upsilon=None, *, seed=0,
                            cross_check=False) -> list[LinearizationReport]:
    """Variation laws for the second fundamental form family.

    The full form varies by ``-Upsilon_normal g``, its trace-free part
    and the normal-bundle curvature are invariant, and the mean
    curvature varies by minus the normal gradient.
    """
    if upsilon is None:
        upsilon = random_upsilon(scene.patch.n, seed=seed)
    eng = _engine_for(scene, upsilon)
    p, r = eng.base, eng.restriction
    normal = np.asarray(r.normal.value)
    induced = np.asarray(p.induced.value)
    reports = [
        eng.report("second_fundamental",
                   lambda q: q.second_fundamental, 1.0,
                   analytic=-np.einsum("ab,r->abr", induced, normal),
                   cross_check=cross_check),
        eng.report("second_tracefree",
                   lambda q: q.second_tracefree, 1.0, analytic=0.0,
                   cross_check=cross_check),
        eng.report("mean_curvature",
                   lambda q: q.mean_curvature, -1.0, analytic=-normal,
                   cross_check=cross_check),
        eng.report("normal_curvature",
                   lambda q: q.normal_curvature, 0.0, analytic=0.0,
                   cross_check=cross_check),
        eng.report("induced_metric",
                   lambda q: q.induced, 2.0, analytic=0.0,
                   cross_check=cross_check),
    ]
    if scene.patch.k >= 3:
        reports.append(eng.report(
            "fialkow", lambda q: q.fialkow, 0.0, analytic=0.0,
            cross_check=cross_check))
    return reports


# -- derivative operators --------------------------------------------------------


def _probe_scalar(pack) -> Jets:
    xs = pack.chart_jets
    return (0.4 * xs[0] * xs[1] - 0.3 * xs[2]
            + 0.2 * xs[0] * xs[0] * xs[2] + 0.7 * xs[1] + 1.1)


def _probe_tangent_form(pack) -> Jets:
    xs = pack.chart_jets
    comps = []
    for b in range(pack.k):
        comps.append((0.3 + 0.1 * b) * xs[0] * xs[b]
                     - 0.2 * xs[(b + 1) % pack.k] + 0.5 * b * xs[2] + 0.4)
    return jets_stack(comps)


def _probe_normal_form(pack) -> Jets:
    xs = pack.chart_jets
    comps = []
    for i in range(pack.n - pack.k):
        comps.append(0.6 * xs[0] - (0.25 + 0.1 * i) * xs[1] * xs[1]
                     + 0.3 * i * xs[2] + 0.9)
    return jets_stack(comps)


def derivative_law_reports(scene: Scene, upsilon=None, *, seed=0,
                           operand_weight: float = 1.3,
                           cross_check=True) -> list[LinearizationReport]:
    """Variation laws of the induced connection and Laplacian.

    Probes the tangential covariant derivative on weighted one-forms
    (tangential and normal-bundle valued), the divergence, and the
    Laplacian on scalars, against their closed-form lower-order terms.
    """
    if upsilon is None:
        upsilon = random_upsilon(scene.patch.n, seed=seed)
    eng = _engine_for(scene, upsilon)
    p, r = eng.base, eng.restriction
    w = float(operand_weight)
    k = p.k
    gl = np.asarray(r.grad.value)
    gu = np.asarray(r.grad_up.value)
    h = np.asarray(p.induced.value)

    tau = np.asarray(_probe_tangent_form(p).value)
    law = ((w - 1.0) * np.einsum("a,b->ab", gl, tau)
           - np.einsum("b,a->ab", gl, tau)
           + np.dot(gu, tau) * h)
    reports = [eng.operator_report(
        "tangential_derivative[one-form]",
        lambda q, t: q.tangential_cov_deriv(t, [("tangent", "down")]),
        _probe_tangent_form, operand_weight=w, operator_weight=0.0,
        analytic=law, cross_check=cross_check)]

    sig = np.asarray(_probe_normal_form(p).value)
    law = (w - 1.0) * np.einsum("a,r->ar", gl, sig)
    reports.append(eng.operator_report(
        "tangential_derivative[normal-form]",
        lambda q, t: q.tangential_cov_deriv(t, [("normal", "down")]),
        _probe_normal_form, operand_weight=w, operator_weight=0.0,
        slots_in=1, slots_out=1, analytic=law, cross_check=cross_check))

    def _div(q, t):
        d = q.tangential_cov_deriv(t, [("tangent", "down")])
        return jet_einsum("ab,ab->", q.induced_inv, d)

    law = (k + w - 2.0) * np.dot(gu, tau)
    reports.append(eng.operator_report(
        "tangential_divergence", _div, _probe_tangent_form,
        operand_weight=w, operator_weight=-2.0, analytic=law,
        cross_check=cross_check))

    phi = _probe_scalar(p)
    dphi = np.asarray(p.tangential_gradient(phi).value)
    law = ((k + 2.0 * w - 2.0) * np.dot(gu, dphi)
           + w * float(r.laplacian.value) * float(phi.value))
    reports.append(eng.operator_report(
        "tangential_laplacian",
        lambda q, t: q.tangential_laplacian(t), _probe_scalar,
        operand_weight=w, operator_weight=-2.0, analytic=law,
        cross_check=cross_check))
    return reports


# -- trace-adjusted tensors and their tangential dependence ----------------------


def _lemma_reports(eng: _Engine, cross_check: bool) -> list[LinearizationReport]:
    p, r = eng.base, eng.restriction
    n = p.n
    gu = np.asarray(r.grad_up.value)
    reports = [eng.report(
        "mixed_schouten", lambda q: q.mc_schouten, 0.0,
        analytic=-np.asarray(r.hessian.value), cross_check=cross_check)]
    w4 = p.block("weyl", "tttt")
    analytic = -np.einsum(
        "abcz,z->abc", np.asarray(w4.value), gu)
    reports.append(eng.report(
        "mixed_cotton[ttt]", lambda q: q.block("mc_cotton", "ttt"), 0.0,
        analytic=analytic, cross_check=cross_check))
    wtr = jet_einsum("bd,bade->ae", p.induced_inv, w4)
    analytic = -np.einsum("ae,e->a", np.asarray(wtr.value), gu)
    reports.append(eng.report(
        "mixed_cotton_trace", lambda q: q.mc_cotton_trace, -2.0,
        analytic=analytic, cross_check=cross_check))
    c3 = p.block("mc_cotton", "ttt")
    csym = (c3 + jet_trace(c3, "gab->gba")) * 0.5
    analytic = 2.0 * (n - 4) * np.einsum(
        "g,gab->ab", gu, np.asarray(csym.value))
    reports.append(eng.report(
        "mixed_bach", lambda q: q.mc_bach, -2.0, analytic=analytic,
        method="central-difference"))
    analytic = -np.einsum(
        "b,abr->ar", gu, np.asarray(p.second_tracefree.value))
    reports.append(eng.report(
        "normal_deflection", lambda q: q.normal_deflection, -1.0,
        analytic=analytic, cross_check=cross_check))
    return reports


def check_tangential_dependence(scene: Scene, upsilon=None, *, seed=0,
                                cross_check=False) -> dict:
    """Laws for the trace-adjusted tensors plus their key dependence claim.

    The five mixed quantities (Schouten, Cotton, Cotton trace, Bach,
    normal deflection) vary only through the tangential jet of
    ``Upsilon``; re-running the battery with ``Upsilon`` vanishing along
    the submanifold must therefore kill every variation, and the
    trace-adjusted Schouten variation vanishes identically as soon as the
    pullback of ``Upsilon`` does.
    """
    if upsilon is None:
        upsilon = random_upsilon(scene.patch.n, seed=seed)
    eng = _engine_for(scene, upsilon)
    reports = _lemma_reports(eng, cross_check)

    normal_only = transverse_vanishing_upsilon(scene, 0, seed=seed + 101)
    eng0 = _engine_for(scene, normal_only)
    silent = _lemma_reports(eng0, False)
    tangential_zero = max(float(np.max(np.abs(rep.numeric)))
                          for rep in silent)
    schouten_zero = float(np.max(np.abs(
        eng0.nilpotent(lambda q: q.mc_schouten, 0.0))))
    return {
        "reports": reports,
        "tangential_zero_max": tangential_zero,
        "schouten_pullback_zero": schouten_zero,
    }


# -- pointwise conformal invariance ----------------------------------------------

#: registered scalar invariants that are pointwise conformally covariant
CONFORMALLY_INVARIANT = (
    "div_shape_weyl_a",
    "div_shape_weyl_b",
    "fialkow_quartic",
    "weyl_trace_quartic",
    "weyl_trace_quartic_scaled",
    "tracefree_quartic_combo",
    "gauss_bonnet_defect",
    "willmore_quartic",
    "transverse_weyl_quartic_a",
    "transverse_weyl_quartic_b",
    "anomaly_quartic_a",
    "anomaly_quartic_b",
)


def check_invariance(scene: Scene, upsilon=None, *, seed=0,
                     ts=(0.1, -0.07), names=None,
                     nilpotent: bool = True) -> dict:
    """Finite-rescale covariance of the registered scalar invariants.

    For each invariant of weight ``w`` the rescaled evaluation must equal
    ``exp(w t Upsilon)`` times the original, for every finite ``t``
    probed; with ``nilpotent=True`` the exact first variation of the
    compensated quantity is checked to vanish as well.  A few non-scalar
    sanity quantities ride along.
    """
    if upsilon is None:
        upsilon = random_upsilon(scene.patch.n, seed=seed)
    eng = _engine_for(scene, upsilon)
    p0 = eng.base
    k = p0.k
    if names is None:
        names = [nm for nm in CONFORMALLY_INVARIANT
                 if nm in available(k, p0.n)]
    upt = float(eng.restriction.u_y.value)
    out = {}
    for nm in names:
        w = REGISTRY[nm].weight_at(k)
        base = float(evaluate(p0, nm).value)
        worst = 0.0
        for t in ts:
            hat = float(evaluate(eng.finite(t), nm).value)
            worst = max(worst, abs(np.exp(-w * t * upt) * hat - base))
        row = {"finite": worst, "weight": w}
        if nilpotent:
            val, method = eng.first_variation(
                lambda q, nm=nm: evaluate(q, nm), float(w))
            row["variation"] = float(np.max(np.abs(val)))
            row["variation_method"] = method
        out[nm] = row

    sanity = {
        "tracefree_norm2": (lambda q: q.tracefree_norm2, -2.0),
        "normal_curvature": (lambda q: q.normal_curvature, 0.0),
    }
    if scene.patch.k >= 3:
        sanity["fialkow"] = (lambda q: q.fialkow, 0.0)
    for nm, (ev, w) in sanity.items():
        base = np.asarray(ev(p0).value)
        worst = 0.0
        for t in ts:
            hat = np.asarray(ev(eng.finite(t)).value)
            worst = max(worst, _gap(np.exp(-w * t * upt) * hat, base))
        row = {"finite": worst, "weight": w}
        if nilpotent:
            val, method = eng.first_variation(ev, w)
            row["variation"] = float(np.max(np.abs(val)))
            row["variation_method"] = method
        out[nm] = row
    return out


# -- Q-curvature transformation ---------------------------------------------------


def _q_name(k: int) -> str:
    return "extrinsic_q2" if k == 2 else "extrinsic_q4"


def check_q_transformation(scenes=None, upsilons=None, *, t: float = 1.0,
                           seed: int = 0) -> dict:
    """The change rule of the extrinsic Q-curvatures at a full rescale.

    For each scene and factor, ``exp(k t Upsilon) Q_hat`` must equal
    ``Q + P(t Upsilon)`` with ``P`` the matching extrinsic operator; the
    operator must also kill constants exactly.  Defaults cover flat and
    curved surfaces plus curved four-folds, including a round-sphere
    scene probed with a localized bump.
    """
    if scenes is None:
        scenes = [
            affine_plane(2, 4),
            random_scene(2, 4, seed=seed + 31),
            random_scene(4, 6, seed=seed + 32),
            random_scene(4, 7, seed=seed + 33),
            equatorial_sphere(4, 5),
        ]
    results = {}
    for sc in scenes:
        p0 = SubmanifoldPack(sc.metric, sc.patch, sc.point)
        k, n = p0.k, p0.n
        ups_list = upsilons
        if ups_list is None:
            ups_list = [random_upsilon(n, seed=seed + 7),
                        random_upsilon(n, seed=seed + 8, degree=3)]
            if sc.name.startswith("equatorial"):
                ups_list.append(_bump_factor(0.3))
        qname = _q_name(k)
        u0 = None
        worst = 0.0
        for ups in ups_list:
            ups = _as_factor(ups)
            u0 = ups([p0.chart_jets[a] for a in range(n)]) * t
            ghat = rescale(sc.metric, ups, t)
            ph = SubmanifoldPack(ghat, sc.patch, sc.point)
            lhs = (np.exp(k * float(u0.value))
                   * float(evaluate(ph, qname).value))
            rhs = (float(evaluate(p0, qname).value)
                   + float(extrinsic_paneitz_apply(p0, u0).value))
            worst = max(worst, abs(lhs - rhs))
        one = 0.0 * p0.chart_jets[0] + 1.0
        const_residual = abs(float(extrinsic_paneitz_apply(p0, one).value))
        results[sc.name] = {"residual": worst,
                            "operator_kills_constants": const_residual}
    return results


def _bump_factor(amplitude: float) -> ConformalFactor:
    def fn(xs):
        s = None
        for x in xs:
            s = x * x if s is None else s + x * x
        return amplitude * (-s).exp()
    return ConformalFactor(fn, name=f"bump({amplitude:g})")


# -- uniform scalings --------------------------------------------------------------


def check_homogeneity(scene: Scene, *, cs=(2.0, 1.0 / 3.0),
                      names=None) -> dict:
    """Pure scalings ``g -> c^2 g`` hit every invariant at its exact weight."""
    p0 = SubmanifoldPack(scene.metric, scene.patch, scene.point)
    k = p0.k
    if names is None:
        names = sorted(available(k, p0.n))
    base = {nm: float(evaluate(p0, nm).value) for nm in names}
    scal0 = float(p0.ambient.scal.value)
    out = {}
    for c in cs:
        const = ConformalFactor(
            lambda xs, c=c: 0.0 * xs[0] + float(np.log(c)),
            name=f"log({c:g})")
        ph = SubmanifoldPack(rescale(scene.metric, const, 1.0),
                             scene.patch, scene.point)
        worst = 0.0
        for nm in names:
            w = REGISTRY[nm].weight_at(k)
            hat = float(evaluate(ph, nm).value)
            worst = max(worst, abs(hat - c ** w * base[nm]))
        scal_res = abs(float(ph.ambient.scal.value) - scal0 / (c * c))
        out[c] = {"worst": worst, "ambient_scalar": scal_res}
    return out


# -- quartic building blocks: divergence-shaped variations -------------------------


def _div_vec(p, V: Jets) -> Jets:
    dV = p.tangential_cov_deriv(V, [("tangent", "down")])
    return jet_einsum("ab,ab->", p.induced_inv, dV)


def _laplacian_of(p, attr: str) -> Jets:
    return p.tangential_laplacian(getattr(p, attr))


def _double_div_fialkow(p) -> Jets:
    d1 = p.tangential_cov_deriv(
        p.fialkow, [("tangent", "down"), ("tangent", "down")])
    d2 = p.tangential_cov_deriv(d1, [("tangent", "down")] * 3)
    t1 = jet_einsum("bacd,ac->bd", d2, p.induced_inv)
    return jet_einsum("bd,bd->", t1, p.induced_inv)


def _div_shape_deflection(p) -> Jets:
    dup = jet_einsum("ab,br->ar", p.induced_inv, p.normal_deflection)
    return _div_vec(p, jet_einsum("br,abr->a", dup, p.second_tracefree))


def _div_shape_weyl_full(p) -> Jets:
    V = jet_einsum("bcr,abcr->a", p.second_tracefree_up,
                   p.block("weyl", "tttn"))
    return _div_vec(p, V)


def _div_shape_weyl_trace(p) -> Jets:
    wtr = jet_einsum("bgrd,gd->br", p.block("weyl", "ttnt"), p.induced_inv)
    lm = jet_einsum("bc,acr->abr", p.induced_inv, p.second_tracefree)
    return _div_vec(p, jet_einsum("abr,br->a", lm, wtr))


def quartic_term_reports(scene: Scene, upsilon=None, *, seed=0,
                         order: int | None = None) -> list[LinearizationReport]:
    """First variations of the seven fourth-order scalar summands.

    Each summand's variation is an exact tangential divergence (or
    vanishes outright); this is the pointwise mechanism that lets the
    quartic Q-curvature integrate to a conformal invariant on a closed
    four-fold.  Summands needing four metric derivatives run through
    central differences unless ``order >= 5`` is requested (which needs
    the jet budget raised accordingly).
    """
    if upsilon is None:
        upsilon = random_upsilon(scene.patch.n, seed=seed)
    heavy_method = "central-difference"
    kw = {}
    if order is not None and order >= 5:
        heavy_method = "nilpotent-parameter"
        kw["param_order"] = order
    eng = _engine_for(scene, upsilon, **kw)
    p, r = eng.base, eng.restriction
    gu, gl = r.grad_up, r.grad
    u = r.u_y

    lap2 = p.tangential_laplacian(r.laplacian)
    rhs1 = -lap2 - 2.0 * _div_vec(p, gl * p.intrinsic_jtrace)
    rhs2 = _div_vec(p, jet_einsum("ab,b->a", p.fialkow, gu) * 2.0
                    - gl * p.fialkow_trace)
    rhs3 = -_div_vec(p, jet_einsum("ab,b->a", p.tracefree_square, gu))
    rhs4 = -2.0 * _div_vec(p, gl * p.tracefree_norm2)
    rhs5 = -2.0 * _div_vec(p, gl * p.fialkow_trace)

    rows = [
        ("laplacian_intrinsic_jtrace",
         lambda q: q.tangential_laplacian(q.intrinsic_jtrace),
         rhs1, heavy_method),
        ("double_divergence_fialkow", _double_div_fialkow, rhs2,
         heavy_method),
        ("div_shape_deflection", _div_shape_deflection, rhs3,
         "nilpotent-parameter"),
        ("laplacian_tracefree_norm2",
         lambda q: q.tangential_laplacian(q.tracefree_norm2), rhs4,
         "nilpotent-parameter"),
        ("laplacian_fialkow_trace",
         lambda q: q.tangential_laplacian(q.fialkow_trace), rhs5,
         heavy_method),
        ("div_shape_weyl_full", _div_shape_weyl_full, 0.0,
         "nilpotent-parameter"),
        ("div_shape_weyl_trace", _div_shape_weyl_trace, 0.0,
         "nilpotent-parameter"),
    ]
    reports = []
    for name, ev, rhs, method in rows:
        analytic = rhs if isinstance(rhs, float) else float(rhs.value)
        reports.append(eng.report(name, ev, -4.0, analytic=analytic,
                                  method=method, cross_check=False))
    return reports


# -- transverse-jet strata ----------------------------------------------------------


@dataclass(frozen=True)
class StratumElement:
    """One quartic scalar together with its transverse-jet stratum."""

    stratum: int
    name: str
    evaluate: object = field(repr=False)
    method: str = "nilpotent-parameter"


def _pnn(p) -> Jets:
    return p.block("schouten", "nn")


def _pnn_trace(p) -> Jets:
    return jet_trace(_pnn(p), "rr->")


def _wtn(p) -> Jets:
    return jet_einsum("abrc,bc->ar", p.block("weyl", "ttnt"), p.induced_inv)


def _wnn(p) -> Jets:
    return jet_einsum("rasb,ab->rs", p.block("weyl", "ntnt"), p.induced_inv)


def _schouten_bar_up(p) -> Jets:
    hi = p.induced_inv
    return jet_einsum("ac,cb->ab", hi,
                      jet_einsum("cd,db->cb", p.intrinsic_schouten, hi))


def _deflection_up(p) -> Jets:
    return jet_einsum("ab,br->ar", p.induced_inv, p.normal_deflection)


def _shape_pair_normal(p) -> Jets:
    return jet_einsum("abr,abs->rs", p.second_tracefree_up,
                      p.second_tracefree)


def _mean_outer(p) -> Jets:
    return jet_einsum("r,s->rs", p.mean_curvature, p.mean_curvature)


def _laplacian_mean(p) -> Jets:
    dH = p.tangential_cov_deriv(p.mean_curvature, [("normal", "down")])
    ddH = p.tangential_cov_deriv(
        dH, [("tangent", "down"), ("normal", "down")])
    return jet_einsum("ab,abr->r", p.induced_inv, ddH)


def _div_deflection(p) -> Jets:
    dD = p.tangential_cov_deriv(
        p.normal_deflection, [("tangent", "down"), ("normal", "down")])
    return jet_einsum("ab,abr->r", p.induced_inv, dD)


def _div_weyl_trace(p) -> Jets:
    dW = p.tangential_cov_deriv(
        _wtn(p), [("tangent", "down"), ("normal", "down")])
    return jet_einsum("ab,abr->r", p.induced_inv, dW)


def _cotton_trace_normal(p) -> Jets:
    return jet_einsum("rb,b->r", p.normal_frame, p.mc_cotton_trace_ambient)


def _normal_gradient_jtrace(p) -> Jets:
    dJ = jets_stack([p.ambient.jtrace.deriv(a) for a in range(p.n)])
    return jet_einsum("ra,a->r", p.normal_frame, p.pull(dJ))


def _ambient_laplacian_jtrace(p) -> Jets:
    a = p.ambient
    ddJ = a.cov_deriv(a.cov_deriv(a.jtrace, []), ["down"])
    return jet_einsum("ab,ab->", a.g_up, ddJ)


def _build_strata() -> tuple[StratumElement, ...]:
    H = lambda p: p.mean_curvature
    rows = [
        # stratum 0: only the restriction of Upsilon enters
        (0, "fialkow_dot_intrinsic_schouten",
         lambda p: jet_einsum("ab,ab->", p.fialkow, _schouten_bar_up(p))),
        (0, "weyl_trace_dot_deflection",
         lambda p: jet_einsum("ar,ar->", _wtn(p), _deflection_up(p))),
        (0, "tracefree_norm2_jbar",
         lambda p: p.tracefree_norm2 * p.intrinsic_jtrace),
        (0, "tracefree_square_dot_intrinsic_schouten",
         lambda p: jet_einsum("ab,ab->", p.tracefree_square,
                              _schouten_bar_up(p))),
        (0, "jbar_squared",
         lambda p: p.intrinsic_jtrace * p.intrinsic_jtrace),
        (0, "intrinsic_schouten_norm2",
         lambda p: jet_einsum("ab,ab->", p.intrinsic_schouten,
                              _schouten_bar_up(p))),
        (0, "fialkow_trace_jbar",
         lambda p: p.fialkow_trace * p.intrinsic_jtrace),
        (0, "deflection_norm2",
         lambda p: jet_einsum("ar,ar->", _deflection_up(p),
                              p.normal_deflection)),
        # stratum 1: first normal derivatives enter through H
        (1, "mean_dot_laplacian_mean",
         lambda p: jet_einsum("r,r->", H(p), _laplacian_mean(p))),
        (1, "mean_dot_div_deflection",
         lambda p: jet_einsum("r,r->", H(p), _div_deflection(p))),
        (1, "mean_dot_div_weyl_trace",
         lambda p: jet_einsum("r,r->", H(p), _div_weyl_trace(p))),
        (1, "mean_norm4", lambda p: p.mean_norm2 * p.mean_norm2),
        (1, "mean_norm2_tracefree_norm2",
         lambda p: p.mean_norm2 * p.tracefree_norm2),
        (1, "mean_shape_square_mean",
         lambda p: jet_einsum("rs,rs->", _shape_pair_normal(p),
                              _mean_outer(p))),
        (1, "mean_norm2_jbar", lambda p: p.mean_norm2 * p.intrinsic_jtrace),
        (1, "fialkow_trace_mean_norm2",
         lambda p: p.fialkow_trace * p.mean_norm2),
        (1, "mean_shape_cubic", _mean_shape_cubic),
        (1, "mean_dot_shape_fialkow",
         lambda p: jet_einsum("r,r->", H(p), jet_einsum(
             "abr,ab->r", p.second_tracefree_up, p.fialkow))),
        (1, "mean_dot_shape_intrinsic_schouten",
         lambda p: jet_einsum("r,r->", H(p), jet_einsum(
             "abr,ab->r", p.second_tracefree_up, p.intrinsic_schouten))),
        (1, "mean_mean_weyl_normal_trace",
         lambda p: jet_einsum("rs,rs->", _mean_outer(p), _wnn(p))),
        (1, "mean_shape_weyl_mixed",
         lambda p: jet_einsum("r,r->", H(p), jet_einsum(
             "abs,arbs->r", p.second_tracefree_up,
             p.block("weyl", "tntn")))),
        (1, "mean_dot_cotton_trace",
         lambda p: jet_einsum("r,r->", H(p), _cotton_trace_normal(p))),
        # stratum 2: the normal-normal Schouten block enters
        (2, "fialkow_trace_normal_schouten_trace",
         lambda p: p.fialkow_trace * _pnn_trace(p)),
        (2, "normal_schouten_dot_weyl_normal_trace",
         lambda p: jet_einsum("rs,rs->", _pnn(p), _wnn(p))),
        (2, "mean_norm2_normal_schouten_trace",
         lambda p: p.mean_norm2 * _pnn_trace(p)),
        (2, "tracefree_norm2_normal_schouten_trace",
         lambda p: p.tracefree_norm2 * _pnn_trace(p)),
        (2, "mean_mean_normal_schouten",
         lambda p: jet_einsum("rs,rs->", _mean_outer(p), _pnn(p))),
        (2, "shape_square_normal_schouten",
         lambda p: jet_einsum("rs,rs->", _shape_pair_normal(p), _pnn(p))),
        (2, "jbar_normal_schouten_trace",
         lambda p: p.intrinsic_jtrace * _pnn_trace(p)),
        (2, "normal_schouten_trace_squared",
         lambda p: _pnn_trace(p) * _pnn_trace(p)),
        (2, "normal_schouten_norm2",
         lambda p: jet_einsum("rs,rs->", _pnn(p), _pnn(p))),
        # stratum 3: normal gradient of the ambient trace
        (3, "mean_normal_grad_ambient_jtrace",
         lambda p: jet_einsum("r,r->", H(p), _normal_gradient_jtrace(p))),
    ]
    out = [StratumElement(s, nm, ev) for s, nm, ev in rows]
    # stratum 4 needs four ambient metric derivatives, beyond the default
    # nilpotent budget, so it is differenced.
    out.append(StratumElement(4, "ambient_laplacian_jtrace",
                              _ambient_laplacian_jtrace,
                              method="central-difference"))
    return tuple(out)


#: weight -4 quartic scalars with the depth of transverse jet they consume
QUARTIC_STRATA: tuple[StratumElement, ...] = _build_strata()


def transverse_vanishing_upsilon(scene: Scene, vanish_to: int, *,
                                 seed: int = 0) -> ConformalFactor:
    """A factor whose transverse jet vanishes through order ``vanish_to``.

    Multiplies a random polynomial by the ``vanish_to + 1`` power of a
    defining-function combination of the patch, so every derivative of
    the factor through that order vanishes along the submanifold.
    """
    k, n = scene.patch.k, scene.patch.n
    q = random_upsilon(n, seed=seed, degree=3)
    rng = np.random.default_rng(seed + 1)
    cs = rng.uniform(0.4, 1.0, n - k)

    def fn(xs):
        amb = scene.patch.fn(list(xs[:k]))
        rho = None
        for i in range(n - k):
            term = cs[i] * (xs[k + i] - amb[k + i])
            rho = term if rho is None else rho + term
        out = q(xs)
        for _ in range(vanish_to + 1):
            out = out * rho
        return out

    return ConformalFactor(fn, name=f"vanishing({vanish_to})",
                           vanishing_order=vanish_to)


def check_strata_vanishing(scene: Scene, *, seed: int = 0,
                           step: float = 3e-5) -> dict:
    """Stratified vanishing of the quartic building-block variations.

    For each depth ``j`` the scene is probed with a factor whose
    transverse jet vanishes through order ``j``; every element in strata
    ``0..j`` must then have vanishing first variation.  A generic factor
    rides along so the claim is not vacuous.
    """
    strata = sorted({el.stratum for el in QUARTIC_STRATA})
    rows = {}
    for j in strata:
        ups = transverse_vanishing_upsilon(scene, j, seed=seed + 10 * j)
        eng = _engine_for(scene, ups, step=step)
        mags = {}
        for el in QUARTIC_STRATA:
            if el.stratum > j:
                continue
            if el.method == "central-difference":
                val = eng.central(el.evaluate, -4.0)
            else:
                val = eng.nilpotent(el.evaluate, -4.0)
            mags[el.name] = float(np.max(np.abs(val)))
        rows[j] = mags
    generic = {}
    eng = _engine_for(scene, random_upsilon(scene.patch.n, seed=seed + 77),
                      step=step)
    for el in QUARTIC_STRATA:
        if el.method == "central-difference":
            val = eng.central(el.evaluate, -4.0)
        else:
            val = eng.nilpotent(el.evaluate, -4.0)
        generic[el.name] = float(np.max(np.abs(val)))
    return {"vanishing": rows, "generic": generic}


# -- linear-independence witness ----------------------------------------------------


def witness_metric(n: int, s: float, t: float, u: float,
                   v: float) -> MetricField:
    """Diagonal exponential metric whose quadratic factors probe the span.

    The four parameters steer the tangential Weyl traces and the two
    divergence scalars independently; the submanifold is the flat
    4-plane through the origin.
    """
    if n < 5:
        raise GeometryError("the witness needs at least one normal direction")
    zero = lambda xs: 0.0 * xs[0]
    fs = [
        lambda xs: s * xs[1] * xs[1] + t * xs[1] * xs[2] + u * xs[0] * xs[4],
        lambda xs: v * xs[0] * xs[4],
        lambda xs: -(u + v) * xs[0] * xs[4],
        zero,
    ] + [zero] * (n - 4)
    return diagonal_exponential_metric(n, fs, name="witness")


def _witness_patch(n: int):
    return graph_patch(4, n, [(lambda ys: 0.0 * ys[0])
                              for _ in range(n - 4)],
                      basepoint=[0.0] * 4, name="plane")


_WITNESS_POINTS = (
    (0.0, 0.0, 0.0, 0.0),
    (0.3, 0.0, 0.0, 0.0),
    (0.0, 0.3, 0.0, 0.0),
    (0.15, -0.2, 0.25, 0.1),
    (-0.1, 0.2, 0.1, -0.25),
)


def _normalized_gram(vectors) -> tuple[np.ndarray, float]:
    V = np.asarray(vectors, dtype=float)
    norms = np.linalg.norm(V, axis=1)
    if np.any(norms < 1e-13):
        return np.zeros((len(V), len(V))), 0.0
    V = V / norms[:, None]
    G = V @ V.T
    return G, float(np.linalg.det(G))


def linear_independence_witness(n: int, *, params=None,
                                points=_WITNESS_POINTS) -> list[dict]:
    """Gram-matrix certification that the building blocks are independent.

    For each parameter sample the witness metric is evaluated at several
    points of the 4-plane; the flattened components of the tensor set
    (Fialkow, trace-free shape squared, its norm times the metric, and
    for ``n >= 6`` the Fialkow trace times the metric) and of the
    divergence set are stacked into vectors, normalized, and their Gram
    determinants returned.  Strict positivity certifies independence;
    the all-zero sample collapses both determinants to zero.
    """
    if params is None:
        params = [(1.0, 1.0, 1.0, 1.0),
                  (0.7, -0.45, 0.6, 0.3),
                  (0.5, 0.8, -0.7, 0.4)]
    results = []
    for s, t, u, v in params:
        g = witness_metric(n, s, t, u, v)
        patch = _witness_patch(n)
        tens = {"fialkow": [], "tracefree_square": [], "tracefree_norm2_g": []}
        if n >= 6:
            tens["fialkow_trace_g"] = []
        divs = {"div_shape_weyl_full": []}
        if n >= 6:
            divs["div_shape_weyl_trace"] = []
        for pt in points:
            p = SubmanifoldPack(g, patch, list(pt))
            h = np.asarray(p.induced.value)
            tens["fialkow"].append(np.asarray(p.fialkow.value).ravel())
            tens["tracefree_square"].append(
                np.asarray(p.tracefree_square.value).ravel())
            tens["tracefree_norm2_g"].append(
                (float(p.tracefree_norm2.value) * h).ravel())
            if n >= 6:
                tens["fialkow_trace_g"].append(
                    (float(p.fialkow_trace.value) * h).ravel())
            divs["div_shape_weyl_full"].append(
                [float(_div_shape_weyl_full(p).value)])
            if n >= 6:
                divs["div_shape_weyl_trace"].append(
                    [float(_div_shape_weyl_trace(p).value)])
        tvecs = [np.concatenate(tens[nm]) for nm in tens]
        dvecs = [np.concatenate(divs[nm]) for nm in divs]
        tG, tdet = _normalized_gram(tvecs)
        dG, ddet = _normalized_gram(dvecs)
        results.append({
            "params": (s, t, u, v),
            "tensor_names": tuple(tens),
            "tensor_gram": tG,
            "tensor_det": tdet,
            "divergence_names": tuple(divs),
            "divergence_gram": dG,
            "divergence_det": ddet,
        })
    return results
