"""Conformal-change machinery: laws, invariance, strata, witness metrics.

Closed-form oracles: the diagonal-exponential witness family admits exact
component values at the origin (two Weyl traces and the two divergence
scalars, rational in the parameters and the ambient dimension), and a
round-sphere chart is an explicit conformal rescale of the flat chart.
Everything else is pinned structurally: exact transformation laws must be
reproduced by the nilpotent-parameter coefficient to machine precision,
nilpotent and central-difference routes must agree on every registered
quantity, and the stratified vanishing of the quartic building blocks
must be sharp (dead strata at zero, living strata visibly nonzero).
"""

from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import qgeo.conformal as cf
from qgeo.fields import flat_metric, sphere_chart_metric
from qgeo.invariants import available, evaluate
from qgeo.jets import variables
from qgeo.scenes import affine_plane, random_scene, random_upsilon
from qgeo.submanifold import SubmanifoldPack


@lru_cache(maxsize=None)
def scene(k, n, seed):
    return random_scene(k, n, seed)


@lru_cache(maxsize=None)
def witness_pack(n, params, point=(0.0, 0.0, 0.0, 0.0)):
    g = cf.witness_metric(n, *params)
    return SubmanifoldPack(g, cf._witness_patch(n), list(point))


# -- witness family: closed-form component oracles ----------------------------


@pytest.mark.parametrize("n", [5, 6, 7])
@pytest.mark.parametrize("params", [
    (0.7, -0.45, 0.6, 0.3), (1.0, 1.0, 1.0, 1.0),
])
def test_witness_weyl_traces_match_closed_forms(n, params):
    s, t, u, v = params
    p = witness_pack(n, params)
    # tangential Weyl trace at the mixed quadratic slot
    got = float(p.weyl_partial_trace[1, 2].value)
    want = -(n - 4) / (n - 2) * t
    assert abs(got - want) < 1e-12, f"partial trace {got} vs {want}"
    got = float(p.weyl_double_trace.value)
    want = -4.0 * s * (n - 4) * (n - 5) / ((n - 1) * (n - 2))
    assert abs(got - want) < 1e-12, f"double trace {got} vs {want}"


@pytest.mark.parametrize("n", [5, 6, 7])
@pytest.mark.parametrize("params", [
    (0.7, -0.45, 0.6, 0.3), (0.5, 0.8, -0.7, 0.4),
])
def test_witness_divergences_match_closed_forms(n, params):
    s, t, u, v = params
    p = witness_pack(n, params)
    got = float(cf._div_shape_weyl_full(p).value)
    want = -(v**2 + (u + v)**2) + u**2 / (n - 2)
    assert abs(got - want) < 1e-12, f"full contraction {got} vs {want}"
    got = float(cf._div_shape_weyl_trace(p).value)
    want = -(n - 5) * u**2 / (n - 2)
    assert abs(got - want) < 1e-12, f"trace contraction {got} vs {want}"


@pytest.mark.parametrize("n", [5, 6])
def test_witness_gram_determinants_positive(n):
    rows = cf.linear_independence_witness(n)
    best_t = max(r["tensor_det"] for r in rows)
    best_d = max(r["divergence_det"] for r in rows)
    assert best_t > 1e-12, f"tensor Gram det {best_t}"
    assert best_d > 1e-12, f"divergence Gram det {best_d}"
    # the canonical sample alone already certifies independence
    unit = [r for r in rows if r["params"] == (1.0, 1.0, 1.0, 1.0)]
    assert unit and unit[0]["tensor_det"] > 1e-12


def test_witness_gram_collapses_without_curvature():
    row = cf.linear_independence_witness(
        6, params=[(0.0, 0.0, 0.0, 0.0)])[0]
    assert row["tensor_det"] == 0.0
    assert row["divergence_det"] == 0.0


def test_witness_needs_a_normal_direction():
    from qgeo.fields import GeometryError
    with pytest.raises(GeometryError):
        cf.witness_metric(4, 1.0, 1.0, 1.0, 1.0)


# -- rescale basics ------------------------------------------------------------


def test_rescale_at_zero_is_identity():
    g = random_scene(2, 4, seed=7).metric
    ups = random_upsilon(4, seed=3)
    gh = cf.rescale(g, ups, 0.0)
    pt = np.array([0.2, -0.1, 0.3, 0.05])
    diff = float(np.max(np.abs(g.jets(pt, 3).coeffs - gh.jets(pt, 3).coeffs)))
    assert diff == 0.0, f"t=0 changed the components by {diff}"


def test_rescale_recovers_round_sphere_chart():
    # exp(2 log(2 R^2 / (R^2+|x|^2))) times flat is the sphere chart
    for radius in (1.0, 1.7):
        r2 = radius * radius

        def ups(xs, r2=r2):
            s = sum(x * x for x in xs)
            return float(np.log(2.0 * r2)) - (r2 + s).log()

        gh = cf.rescale(flat_metric(3), ups, 1.0)
        gs = sphere_chart_metric(3, radius=radius)
        pt = np.array([0.3, -0.2, 0.4])
        a = gh.jets(pt, 3)
        b = gs.jets(pt, 3)
        diff = float(np.max(np.abs(a.coeffs - b.coeffs)))
        assert diff < 1e-12, f"R={radius}: {diff}"


@settings(max_examples=10, deadline=None)
@given(t=st.floats(-0.5, 0.5), seed=st.integers(0, 50))
def test_rescale_components_scale_pointwise(t, seed):
    g = random_scene(2, 4, seed=7).metric
    ups = random_upsilon(4, seed=seed)
    pt = np.array([0.1, -0.05, 0.2, 0.0])
    xv = variables(pt, 2)
    factor = (2.0 * t * ups(xv)).exp()
    base = g.jets(pt, 2)
    scaled = cf.rescale(g, ups, t).jets(pt, 2)
    manual = factor * base
    diff = float(np.max(np.abs(scaled.coeffs - manual.coeffs)))
    assert diff < 1e-12, f"t={t}: {diff}"


# -- exact transformation laws --------------------------------------------------


@pytest.mark.parametrize("k,n,seed", [(3, 5, 4), (4, 6, 11)])
def test_ambient_laws(k, n, seed):
    reps = cf.ambient_law_reports(scene(k, n, seed), seed=seed + 1)
    for r in reps:
        assert r.residual is not None
        assert r.residual < 1e-6, f"{r.quantity}: residual {r.residual}"
        if r.method == "nilpotent-parameter":
            assert r.residual < 1e-12, f"{r.quantity} should be exact"


@pytest.mark.parametrize("k,n,seed", [(3, 5, 4), (4, 6, 11), (2, 5, 8)])
def test_submanifold_laws(k, n, seed):
    reps = cf.submanifold_law_reports(scene(k, n, seed), seed=seed + 1)
    names = {r.quantity for r in reps}
    assert "second_fundamental" in names and "mean_curvature" in names
    for r in reps:
        assert r.residual < 1e-12, f"{r.quantity}: residual {r.residual}"


@pytest.mark.parametrize("k,n,seed", [(3, 5, 4), (4, 6, 11)])
def test_derivative_operator_laws(k, n, seed):
    reps = cf.derivative_law_reports(scene(k, n, seed), seed=seed + 2)
    assert len(reps) == 4
    for r in reps:
        assert r.residual < 1e-12, f"{r.quantity}: residual {r.residual}"
        assert r.method_gap is not None and r.method_gap < 1e-6, (
            f"{r.quantity}: methods disagree by {r.method_gap}")
        assert not r.flagged


@pytest.mark.parametrize("k,n,seed", [(4, 6, 5), (4, 7, 9), (3, 5, 6)])
def test_trace_adjusted_laws_and_tangential_dependence(k, n, seed):
    out = cf.check_tangential_dependence(scene(k, n, seed), seed=seed)
    by_name = {r.quantity: r for r in out["reports"]}
    assert set(by_name) == {
        "mixed_schouten", "mixed_cotton[ttt]", "mixed_cotton_trace",
        "mixed_bach", "normal_deflection"}
    for r in by_name.values():
        assert r.residual < 1e-6, f"{r.quantity}: residual {r.residual}"
    # a factor vanishing along the patch kills every variation ...
    assert out["tangential_zero_max"] < 1e-7
    # ... and the trace-adjusted Schouten variation dies identically
    assert out["schouten_pullback_zero"] < 1e-12


def test_linearize_mean_curvature_flat_oracle():
    # flat plane, factor = third coordinate: the normal gradient is the
    # constant unit covector, so the mean-curvature variation is -1
    sc = affine_plane(2, 3)
    rep = cf.linearize(
        lambda q: q.mean_curvature, sc.metric, sc.patch,
        lambda xs: 1.0 * xs[2], -1.0, point=sc.point,
        name="mean_curvature", analytic=np.array([-1.0]))
    assert rep.residual < 1e-14, f"residual {rep.residual}"
    assert rep.method_gap < 1e-9
    assert rep.ok()


# -- method agreement on every registered quantity ------------------------------


def test_methods_agree_on_all_registered_quantities(monkeypatch):
    monkeypatch.setenv("QGEO_JET_ORDER_MAX", "6")
    sc = scene(4, 6, 21)
    ups = random_upsilon(6, seed=2)
    eng = cf._Engine(sc.metric, sc.patch, sc.point, ups, param_order=5)
    names = [nm for nm in cf.CONFORMALLY_INVARIANT if nm in available(4, 6)]
    for nm in names:
        w = -4.0
        nil = eng.nilpotent(lambda q, nm=nm: evaluate(q, nm), w)
        cen = eng.central(lambda q, nm=nm: evaluate(q, nm), w)
        gap = float(np.max(np.abs(nil - cen)))
        assert gap < 1e-6, f"{nm}: nilpotent vs central {gap}"


def test_heavy_quartic_terms_agree_across_methods(monkeypatch):
    # fourth-derivative summands: exact route at raised order vs differencing
    monkeypatch.setenv("QGEO_JET_ORDER_MAX", "6")
    sc = scene(4, 6, 13)
    exact = cf.quartic_term_reports(sc, seed=3, order=5)
    diffed = cf.quartic_term_reports(sc, seed=3)
    for a, b in zip(exact, diffed):
        assert a.quantity == b.quantity
        gap = float(np.max(np.abs(a.numeric - b.numeric)))
        assert gap < 1e-6, f"{a.quantity}: order-5 vs central {gap}"
        assert a.residual < 1e-12, f"{a.quantity}: exact residual {a.residual}"


# -- pointwise conformal invariance ----------------------------------------------


@pytest.mark.parametrize("k,n,seed", [(4, 6, 4), (3, 5, 7), (2, 4, 9)])
def test_registered_invariants_are_pointwise_invariant(k, n, seed):
    out = cf.check_invariance(scene(k, n, seed), seed=seed + 1)
    assert out, "no invariants available for this signature"
    for nm, row in out.items():
        assert row["finite"] < 1e-6, f"{nm}: finite rescale {row['finite']}"
        assert row["variation"] < 1e-7, f"{nm}: variation {row['variation']}"


def test_invariance_covers_the_registered_subset():
    out = cf.check_invariance(scene(4, 6, 4), seed=5)
    expected = {nm for nm in cf.CONFORMALLY_INVARIANT
                if nm in available(4, 6)}
    assert expected <= set(out)
    # sanity tensors ride along
    assert {"tracefree_norm2", "fialkow", "normal_curvature"} <= set(out)


# -- Q-curvature transformation ---------------------------------------------------


def test_q_transformation_default_battery():
    out = cf.check_q_transformation(seed=0)
    assert len(out) == 5
    for name, row in out.items():
        assert row["residual"] < 1e-5, f"{name}: {row['residual']}"
        assert row["operator_kills_constants"] == 0.0, name


def test_q_transformation_exactness_on_flat_surface():
    out = cf.check_q_transformation(scenes=[affine_plane(2, 4)], seed=1)
    row = out["affine-plane-2-4"]
    assert row["residual"] < 1e-12, f"flat surface law {row['residual']}"


# -- uniform scalings ---------------------------------------------------------------


@pytest.mark.parametrize("k,n,seed", [(4, 6, 4), (2, 4, 3)])
def test_homogeneity_weights(k, n, seed):
    out = cf.check_homogeneity(scene(k, n, seed))
    for c, row in out.items():
        assert row["worst"] < 1e-9, f"c={c}: {row['worst']}"
        assert row["ambient_scalar"] < 1e-9, f"c={c}: {row['ambient_scalar']}"


# -- quartic building blocks ---------------------------------------------------------


@pytest.mark.parametrize("seed", [2, 13])
def test_quartic_term_variations_are_divergences(seed):
    reps = cf.quartic_term_reports(scene(4, 6, seed), seed=seed + 1)
    assert len(reps) == 7
    for r in reps:
        assert r.residual < 1e-6, f"{r.quantity}: residual {r.residual}"


def test_strata_vanishing_is_sharp():
    out = cf.check_strata_vanishing(scene(4, 6, 5), seed=0)
    for j, mags in out["vanishing"].items():
        worst = max(mags.values())
        assert worst < 1e-7, f"stratum {j}: leak {worst}"
    # expected element counts per closed stratum
    counts = {j: len(m) for j, m in out["vanishing"].items()}
    assert counts == {0: 8, 1: 22, 2: 31, 3: 32, 4: 33}
    # the claim is not vacuous: a generic factor lights up every stratum
    per_stratum = {}
    for el in cf.QUARTIC_STRATA:
        per_stratum[el.stratum] = max(per_stratum.get(el.stratum, 0.0),
                                      out["generic"][el.name])
    for j, mag in per_stratum.items():
        assert mag > 1e-3, f"stratum {j} never lights up ({mag})"


def test_vanishing_factor_tags_verify():
    sc = scene(4, 6, 5)
    x0 = np.asarray(
        SubmanifoldPack(sc.metric, sc.patch, sc.point).x_point)
    deep = cf.transverse_vanishing_upsilon(sc, 2, seed=3)
    assert deep.verify(x0)
    # a first-power factor still has a gradient: claiming more must fail
    shallow = cf.transverse_vanishing_upsilon(sc, 0, seed=3)
    lying = cf.ConformalFactor(shallow.fn, vanishing_order=1)
    assert not lying.verify(x0)


def test_generic_factor_fails_vanishing_tag():
    sc = scene(4, 6, 5)
    x0 = np.asarray(
        SubmanifoldPack(sc.metric, sc.patch, sc.point).x_point)
    ups = cf.ConformalFactor(random_upsilon(6, seed=1), vanishing_order=0)
    assert not ups.verify(x0)
    assert cf.ConformalFactor(random_upsilon(6, seed=1)).verify(x0)
