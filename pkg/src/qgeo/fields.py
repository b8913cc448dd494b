"""Evaluable metric fields and immersed submanifold charts.

A ``MetricField`` wraps a function of coordinate jets returning the metric
components; an ``ImmersedPatch`` wraps a chart map into the ambient
coordinates.  Both produce jets on demand at a point, which is all the
geometry layers consume.  The evaluation protocol passes the full list of
coordinate jets (with the optional trailing first-order linearization
parameter appended), and plain fields use only their own ``dim`` leading
entries.
"""

from __future__ import annotations

import numpy as np

from .jets import Jets, _multi_indices, constant, jet_mul, jets_stack, variables

__all__ = [
    "GeometryError",
    "MetricField",
    "ImmersedPatch",
    "Polynomial",
    "flat_metric",
    "conformal_metric",
    "diagonal_exponential_metric",
    "sphere_chart_metric",
    "hyperbolic_half_space_metric",
    "conformally_rescaled",
    "graph_patch",
]


class GeometryError(ValueError):
    """A geometric precondition failed (degenerate metric or immersion)."""


def monomial_table(xs, mindex) -> np.ndarray:
    """Jet coefficients of every monomial ``x^alpha`` for alpha in ``mindex``.

    ``xs`` is a list of scalar jets sharing one space; the table has shape
    (len(mindex), space.size) and is built one degree at a time with a
    batched recurrence ``x^alpha = x^(alpha - e_j) * x_j``.
    """
    spc = xs[0].space
    M = len(mindex)
    table = np.zeros((M, spc.size))
    table[0, 0] = 1.0
    pos = {tuple(m): q for q, m in enumerate(mindex)}
    deg = mindex.sum(axis=1)
    for d in range(1, int(deg.max(initial=0)) + 1):
        level = np.nonzero(deg == d)[0]
        firsts = np.array([int(np.nonzero(mindex[q])[0][0]) for q in level])
        for j in np.unique(firsts):
            rows = level[firsts == j]
            prev = []
            for q in rows:
                alpha = mindex[q].copy()
                alpha[j] -= 1
                prev.append(pos[tuple(alpha)])
            prod = jet_mul(Jets(spc, table[prev]), xs[j])
            table[rows] = prod.coeffs
    return table


class Polynomial:
    """Dense polynomial, evaluable on coordinate jets in one batched matmul.

    ``coeffs[..., q]`` multiplies the graded-lex monomial ``mindex[q]``; the
    leading axes become the batch shape of the returned jets.
    """

    def __init__(self, nvars: int, degree: int, coeffs):
        self.nvars = nvars
        self.degree = degree
        self.mindex = _multi_indices(nvars, degree, (degree,) * nvars)
        self.coeffs = np.asarray(coeffs, dtype=float)
        if self.coeffs.shape[-1] != len(self.mindex):
            raise ValueError(
                f"need {len(self.mindex)} coefficients per component, "
                f"got {self.coeffs.shape[-1]}"
            )

    def __call__(self, xs) -> Jets:
        table = monomial_table(xs[: self.nvars], self.mindex)
        return Jets(xs[0].space, self.coeffs @ table)

    def coefficient(self, alpha) -> np.ndarray:
        q = [tuple(m) for m in self.mindex].index(tuple(alpha))
        return self.coeffs[..., q]


def _as_matrix_jets(rows, n, spc) -> Jets:
    if isinstance(rows, Jets):
        return rows
    flat = [entry for row in rows for entry in row]
    if not any(isinstance(e, Jets) for e in flat):
        return constant(np.asarray(rows, dtype=float).reshape(n, n), spc)
    return jets_stack(flat).reshape(n, n)


class MetricField:
    """Symmetric positive-definite metric as an evaluable field.

    ``fn(xs)`` receives the list of coordinate jets and returns the n×n
    component matrix (nested sequence of scalar jets/floats, or a batched
    ``Jets`` of shape (n, n)).
    """

    def __init__(self, dim: int, fn, name: str = "metric"):
        self.dim = dim
        self.fn = fn
        self.name = name

    def __call__(self, xs) -> Jets:
        return _as_matrix_jets(self.fn(xs), self.dim, xs[0].space)

    def jets(self, point, order: int, param: bool = False) -> Jets:
        """Metric component jets at ``point`` (positive definiteness checked)."""
        xs = variables(point, order, param=param)
        G = self(xs)
        val = G.value
        if not np.allclose(val, val.T, atol=1e-10):
            raise GeometryError(f"{self.name}: components not symmetric at {point}")
        try:
            np.linalg.cholesky(val)
        except np.linalg.LinAlgError:
            raise GeometryError(
                f"{self.name}: metric not positive definite at {point}"
            )
        return G


class ImmersedPatch:
    """Chart map y -> x(y) of a k-submanifold of an n-chart.

    ``fn(ys)`` receives the k submanifold coordinate jets and returns the n
    ambient coordinates (sequence of scalar jets/floats).
    """

    def __init__(self, k: int, n: int, fn, basepoint=None, name: str = "patch"):
        self.k = k
        self.n = n
        self.fn = fn
        self.basepoint = (
            np.zeros(k) if basepoint is None else np.asarray(basepoint, dtype=float)
        )
        self.name = name

    def __call__(self, ys):
        return self.fn(ys)

    def jets(self, point, order: int, param: bool = False) -> Jets:
        """Ambient coordinate jets along the patch, shape (n,) or (n+1,).

        With ``param=True`` the linearization parameter rides along as one
        extra ambient coordinate equal to the parameter itself, so composed
        ambient jets keep their parameter dependence.
        """
        ys = variables(point, order, param=param)
        comps = list(self.fn(ys[: self.k]))
        if len(comps) != self.n:
            raise GeometryError(
                f"{self.name}: map returned {len(comps)} components, expected {self.n}"
            )
        if param:
            comps.append(ys[-1])
        X = jets_stack(comps)
        if X.order >= 1:
            diff = np.stack(
                [[X[a].partial(_unit(self.k + param, b)) for b in range(self.k)]
                 for a in range(self.n)]
            )
            if np.linalg.matrix_rank(diff, tol=1e-10) < self.k:
                raise GeometryError(
                    f"{self.name}: differential rank-deficient at {point}"
                )
        return X


def _unit(nvars, i):
    e = [0] * nvars
    e[i] = 1
    return e


# -- constructors --------------------------------------------------------


def flat_metric(n: int) -> MetricField:
    return MetricField(n, lambda xs: np.eye(n), name="flat")


def conformal_metric(n: int, log_factor, base: MetricField | None = None,
                     name: str = "conformal") -> MetricField:
    """Metric e^{2f} g0 with f = ``log_factor(xs)`` (g0 flat by default)."""
    g0 = base if base is not None else flat_metric(n)

    def fn(xs):
        return (2.0 * log_factor(xs[:n])).exp() * g0(xs)

    return MetricField(n, fn, name=name)


def diagonal_exponential_metric(n: int, factors, name: str = "diag-exp") -> MetricField:
    """Diagonal metric with components e^{2 f_a(x)} (no cross terms).

    ``factors`` is a sequence of n scalar functions of the coordinate jets.
    """

    def fn(xs):
        rows = []
        for a in range(n):
            row = [0.0] * n
            row[a] = (2.0 * factors[a](xs[:n])).exp()
            rows.append(row)
        return rows

    return MetricField(n, fn, name=name)


def sphere_chart_metric(n: int, radius: float = 1.0) -> MetricField:
    """Round n-sphere of the given radius in a stereographic chart.

    Components 4 R^4 (R^2 + |x|^2)^{-2} delta_{ab}; the chart covers the
    sphere minus a point, with the origin mapping to a pole.
    """
    r2 = radius * radius

    def log_factor(xs):
        s = sum(x * x for x in xs)
        return float(np.log(2.0 * r2)) - (r2 + s).log()

    return conformal_metric(n, log_factor, name=f"sphere-chart(R={radius:g})")


def hyperbolic_half_space_metric(n: int) -> MetricField:
    """Upper half space x^n > 0 with components (x^n)^{-2} delta_{ab}."""

    def log_factor(xs):
        return -(xs[n - 1].log())

    return conformal_metric(n, log_factor, name="hyperbolic-half-space")


def conformally_rescaled(g: MetricField, upsilon, t: float | None = None,
                         name: str | None = None) -> MetricField:
    """The rescaled metric e^{2 t Upsilon} g.

    ``t`` a float gives a finite rescale.  ``t=None`` multiplies by the
    trailing first-order linearization parameter instead, so the returned
    field must be evaluated with ``param=True``; first-order coefficients in
    the parameter are then exact conformal variations.
    """

    def fn(xs):
        base = g(xs)
        ups = upsilon(xs[: g.dim])
        if t is None:
            if len(xs) != g.dim + 1:
                raise GeometryError(
                    "nilpotent rescale needs the linearization parameter "
                    "(evaluate with param=True)"
                )
            scale = xs[-1]
        else:
            scale = t
        return (2.0 * scale * ups).exp() * base

    return MetricField(g.dim, fn, name=name or f"rescaled({g.name})")


def graph_patch(k: int, n: int, heights, basepoint=None,
                name: str = "graph") -> ImmersedPatch:
    """Graph immersion y -> (y, w_1(y), ..., w_{n-k}(y))."""

    def fn(ys):
        return list(ys[:k]) + [w(ys[:k]) for w in heights]

    return ImmersedPatch(k, n, fn, basepoint=basepoint, name=name)
