"""Immersed submanifold geometry: frames, fundamental forms, curvature laws.

Golden values come from closed-form catalog scenes (products of round
spheres, the flat torus in the 5-sphere, a cylinder); independent oracles
use graph immersions into flat space where curvature has textbook
formulas.  The structural relations (Gauss/Codazzi/Ricci and their
conformally adjusted forms, divergence exchange identities, the Simons
contraction) are checked as residuals on randomized curved scenes across
every supported (k, n) pair.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgeo.fields import GeometryError, ImmersedPatch, flat_metric, graph_patch
from qgeo.scenes import random_scene, scene_by_name
from qgeo.submanifold import (
    SubmanifoldPack,
    divergence_identity_residuals,
    frame_residuals,
    gauss_codazzi_residuals,
    projected_ambient_deriv,
    simons_residual,
    submanifold_pack,
)

DIM_PAIRS = [(1, 3), (2, 3), (2, 5), (3, 4), (3, 6), (4, 5), (4, 7)]


def pack_for(name, **params):
    return submanifold_pack(scene_by_name(name, **params))


# -- golden catalog values -------------------------------------------------


def test_affine_plane_is_totally_geodesic():
    p = pack_for("affine-plane", k=2, n=5)
    assert np.max(np.abs(p.second_fundamental.coeffs)) == 0.0
    assert np.max(np.abs(p.mean_curvature.coeffs)) == 0.0
    res = gauss_codazzi_residuals(p)
    assert max(res.values()) < 1e-14, f"flat plane residuals {res}"


def test_equatorial_sphere_golden():
    p = pack_for("equatorial-s2-in-s5")
    assert abs(float(p.tracefree_norm2.value)) < 1e-13
    assert abs(float(p.mean_norm2.value)) < 1e-13
    # unit round 2-sphere: scalar curvature 2, trace adjustment 1
    assert abs(float(p.intrinsic_scalar.value) - 2.0) < 1e-12
    assert abs(float(p.intrinsic_jtrace.value) - 1.0) < 1e-12
    assert abs(float(p.fialkow_trace.value)) < 1e-13
    # totally geodesic in the round sphere: no deflection, and the
    # mean-curvature-corrected trace adjustment is half the induced metric
    assert np.max(np.abs(p.normal_deflection.value)) < 1e-13
    assert np.allclose(2.0 * p.mc_schouten.value, p.induced.value, atol=1e-12)


def test_clifford_torus_golden():
    p = pack_for("clifford-torus")
    assert abs(float(p.mean_norm2.value)) < 1e-13, "Clifford torus is minimal"
    assert abs(float(p.tracefree_norm2.value) - 2.0) < 1e-12
    # flat induced metric
    assert np.max(np.abs(p.intrinsic_riemann.value)) < 1e-12


def test_sphere_product_golden():
    p = pack_for("s2xs2-in-s5")
    assert abs(float(p.mean_norm2.value)) < 1e-13
    assert abs(float(p.tracefree_norm2.value) - 4.0) < 1e-12
    assert abs(float(p.intrinsic_jtrace.value) - 4.0 / 3.0) < 1e-12
    assert abs(float(p.fialkow_trace.value) - 2.0 / 3.0) < 1e-12
    want = p.induced.value / 6.0
    assert np.allclose(p.fialkow.value, want, atol=1e-12), (
        f"max dev {np.max(np.abs(p.fialkow.value - want)):.3e}")


def test_sphere_product_trace_adjustment_split():
    # minimal with k >= 3, so the corrected trace adjustment splits into
    # intrinsic part plus the trace-adjusting correction tensor
    p = pack_for("s2xs2-in-s5")
    want = p.intrinsic_schouten.value + p.fialkow.value
    assert np.allclose(p.mc_schouten.value, want, atol=1e-12)


def test_cylinder_golden():
    p = pack_for("cylinder-rxs3")
    assert abs(float(p.mean_norm2.value) - 9.0 / 16.0) < 1e-12
    assert abs(float(p.tracefree_norm2.value) - 3.0 / 4.0) < 1e-12


# -- independent graph-immersion oracles -----------------------------------


def test_round_sphere_graph_oracle():
    # upper hemisphere of radius R as a height graph over the xy-plane:
    # umbilic, |H|^2 = 1/R^2, intrinsic scalar curvature 2/R^2
    R = 1.7
    y0 = np.array([0.3, -0.2])

    def height(ys):
        return (R * R - ys[0] ** 2 - ys[1] ** 2).sqrt()

    patch = graph_patch(2, 3, [height], basepoint=y0, name="cap")
    p = SubmanifoldPack(flat_metric(3), patch)
    assert abs(float(p.mean_norm2.value) - 1.0 / R**2) < 1e-12
    assert np.max(np.abs(p.second_tracefree.value)) < 1e-12, "sphere is umbilic"
    assert abs(float(p.intrinsic_scalar.value) - 2.0 / R**2) < 1e-11
    assert abs(float(p.intrinsic_jtrace.value) - 1.0 / R**2) < 1e-11

    # restricted vertical coordinate is a first-sphericalharmonic
    # eigenfunction: surface Laplacian scales it by -2/R^2
    z = p.chart_jets[2]
    lap = p.tangential_laplacian(z)
    want = -2.0 / R**2 * float(z.value)
    assert abs(float(lap.value) - want) < 1e-10, (
        f"laplacian {float(lap.value):.12f} vs {want:.12f}")


@given(
    c1=st.floats(-0.5, 0.5),
    c2=st.floats(-0.5, 0.5),
    c3=st.floats(-0.3, 0.3),
    t0=st.floats(-0.8, 0.8),
)
@settings(max_examples=25, deadline=None)
def test_plane_curve_curvature_oracle(c1, c2, c3, t0):
    # graph curve (t, f(t), 0) in flat 3-space: squared curvature is
    # f''^2 / (1 + f'^2)^3 and the trace-free form vanishes identically
    def f(ys):
        t = ys[0]
        return c1 * t + c2 * t**2 + c3 * t**3

    patch = graph_patch(1, 3, [f, lambda ys: 0.0 * ys[0]],
                        basepoint=np.array([t0]), name="curve")
    p = SubmanifoldPack(flat_metric(3), patch)
    fp = c1 + 2 * c2 * t0 + 3 * c3 * t0**2
    fpp = 2 * c2 + 6 * c3 * t0
    kappa2 = fpp**2 / (1 + fp**2) ** 3
    assert abs(float(p.mean_norm2.value) - kappa2) < 1e-11, (
        f"curvature^2 {float(p.mean_norm2.value):.12f} vs {kappa2:.12f}")
    assert np.max(np.abs(p.second_tracefree.coeffs)) < 1e-12
    # the curve lies in a plane, so the normal gauge never rotates
    assert np.max(np.abs(p.normal_connection.coeffs)) < 1e-11


# -- structural relations on randomized scenes ------------------------------


@pytest.mark.parametrize("k,n", DIM_PAIRS)
def test_frame_construction_random(k, n):
    p = submanifold_pack(random_scene(k, n, seed=101))
    res = frame_residuals(p)
    worst = max(res, key=res.get)
    assert res[worst] < 1e-12, f"(k={k}, n={n}) {worst}: {res[worst]:.3e}"


@pytest.mark.parametrize("k,n", DIM_PAIRS)
def test_curvature_relations_random(k, n):
    p = submanifold_pack(random_scene(k, n, seed=7))
    res = gauss_codazzi_residuals(p)
    expected = {"gauss", "codazzi", "ricci", "conformal_codazzi",
                "conformal_deflection", "conformal_normal"}
    if k >= 2:
        expected.add("conformal_scalar_trace")
    if k >= 3:
        expected |= {"conformal_trace_adjust", "conformal_gauss"}
    assert set(res) == expected
    worst = max(res, key=res.get)
    assert res[worst] < 1e-11, f"(k={k}, n={n}) {worst}: {res[worst]:.3e}"


@pytest.mark.parametrize("k,n", DIM_PAIRS)
def test_divergence_identities_random(k, n):
    p = submanifold_pack(random_scene(k, n, seed=23))
    res = divergence_identity_residuals(p)
    worst = max(res, key=res.get)
    assert res[worst] < 1e-11, f"(k={k}, n={n}) {worst}: {res[worst]:.3e}"


@pytest.mark.parametrize("k,n", [(3, 4), (3, 6), (4, 5), (4, 7)])
def test_simons_contraction_random(k, n):
    p = submanifold_pack(random_scene(k, n, seed=5))
    r = simons_residual(p)
    assert r < 1e-11, f"(k={k}, n={n}) simons residual {r:.3e}"


def test_simons_needs_three_dimensions():
    p = submanifold_pack(random_scene(2, 5, seed=5))
    with pytest.raises(GeometryError):
        simons_residual(p)


def test_hypersurface_normal_gauge_is_flat():
    # one normal direction leaves no room for the gauge to rotate
    p = submanifold_pack(random_scene(4, 5, seed=31))
    assert np.max(np.abs(p.normal_connection.coeffs)) < 1e-13
    assert np.max(np.abs(p.normal_curvature.value)) < 1e-13


# -- the two routes to tangential derivatives match -------------------------


@pytest.mark.parametrize("name,pattern", [
    ("schouten", "tt"), ("schouten", "tn"),
    ("weyl", "tttn"), ("cotton", "ttn"),
])
def test_tangential_derivative_two_routes(name, pattern):
    # route (a): project the composed ambient derivative and exchange the
    # off-block parts through the second fundamental form; route (b):
    # differentiate the projected block with the induced and normal-gauge
    # connections.  They must agree identically.
    for sc in [random_scene(3, 6, seed=11), random_scene(4, 5, seed=3)]:
        p = submanifold_pack(sc)
        slots = [("tangent" if c == "t" else "normal", "down")
                 for c in pattern]
        via_b = p.tangential_cov_deriv(p.block(name, pattern), slots).value
        via_a = projected_ambient_deriv(p, name, pattern).value
        num = np.max(np.abs(via_a - via_b))
        den = max(np.max(np.abs(via_a)), np.max(np.abs(via_b)), 1.0)
        assert num / den < 1e-12, (
            f"{sc.name} {name}/{pattern}: routes differ by {num/den:.3e}")


# -- invariance properties ---------------------------------------------------


def test_linear_reparameterization_invariance():
    # precomposing the chart with an affine change of parameters moves the
    # frames around but cannot change any scalar built from them
    sc = random_scene(3, 6, seed=17)
    k = sc.patch.k
    rng = np.random.default_rng(99)
    A = np.eye(k) + 0.2 * rng.normal(size=(k, k))
    b = 0.1 * rng.normal(size=k)

    def refn(ys):
        zs = [sum(A[i, j] * ys[j] for j in range(k)) + b[i] for i in range(k)]
        return sc.patch.fn(zs)

    y0p = np.linalg.solve(A, sc.point - b)
    repatch = ImmersedPatch(k, sc.patch.n, refn, basepoint=y0p)
    p1 = submanifold_pack(sc)
    p2 = SubmanifoldPack(sc.metric, repatch)
    s1, s2 = p1.scalar_summary(), p2.scalar_summary()
    assert set(s1) == set(s2)
    for key in s1:
        assert abs(s1[key] - s2[key]) < 1e-9, (
            f"{key}: {s1[key]:.12f} vs {s2[key]:.12f}")


def test_linearization_parameter_rides_through():
    # with a parameter-independent metric the parameter is inert: values
    # agree with the plain build, and nothing depends on the extra variable
    sc = random_scene(2, 5, seed=41)
    plain = submanifold_pack(sc)
    riding = submanifold_pack(sc, param=True)
    s0, s1 = plain.scalar_summary(), riding.scalar_summary()
    for key in s0:
        assert abs(s0[key] - s1[key]) < 1e-13, f"{key} drifts under param"
    res = gauss_codazzi_residuals(riding)
    assert max(res.values()) < 1e-11


# -- dimension guards --------------------------------------------------------


def test_dimension_guards():
    curve = submanifold_pack(random_scene(1, 3, seed=1))
    with pytest.raises(GeometryError):
        curve.intrinsic_jtrace
    with pytest.raises(GeometryError):
        curve.fialkow_trace
    surface = submanifold_pack(random_scene(2, 5, seed=1))
    with pytest.raises(GeometryError):
        surface.fialkow
    with pytest.raises(GeometryError):
        surface.intrinsic_schouten
    # the scaled trace stays defined all the way down to curves
    assert np.isfinite(float(curve.fialkow_trace_scaled.value))


def test_degenerate_immersion_rejected():
    squash = ImmersedPatch(2, 5, lambda ys: [ys[0], ys[0], 0.0 * ys[0],
                                             0.0 * ys[0], 0.0 * ys[0]])
    with pytest.raises(GeometryError, match="rank"):
        SubmanifoldPack(flat_metric(5), squash)
