"""Ambient curvature at a point: Riemann through Bach, with derivatives.

Everything is computed in jet arithmetic from the metric component jets, so
covariant derivatives are exact (no finite differencing).  The curvature
conventions are:

* ``[nabla_a, nabla_b] tau_c = R_{abc}{}^d tau_d``
* ``Ric_{ab} = R_{acb}{}^c``, scalar ``R = g^{ab} Ric_{ab}``
* Schouten ``P = (Ric - J g)/(n-2)`` with trace ``J = R/(2(n-1))``
* ``W_{abcd} = R_{abcd} - P_{ac} g_{bd} - P_{bd} g_{ac} + P_{ad} g_{bc}
  + P_{bc} g_{ad}``
* Cotton ``C_{abc} = nabla_a P_{bc} - nabla_b P_{ac}``
* Bach ``B_{ab} = nabla^c C_{cab} + W_{acbd} P^{cd}``

With these choices the unit round sphere has ``R_{abcd} = g_{ac} g_{bd} -
g_{ad} g_{bc}`` and positive scalar curvature.
"""

from __future__ import annotations

import math
from itertools import permutations

import numpy as np

from .fields import MetricField
from .jets import Jets, constant, jet_einsum, jet_trace, jets_stack
from .tensors import LabeledTensor

__all__ = [
    "CurvaturePack",
    "christoffel",
    "christoffel_jets",
    "curvature_pack",
    "ambient_cov_deriv",
    "cov_deriv_jets",
    "riemann_jets",
    "inverse_metric_jets",
    "ambient_identity_residuals",
]


def inverse_metric_jets(G: Jets) -> Jets:
    """Jet-valued inverse of a metric component batch (n, n).

    Newton iteration ``X <- X (2 I - G X)`` doubles the correct Taylor
    degree each step, so ceil(log2(order+1)) steps suffice.
    """
    n = G.batch[0]
    X = constant(np.linalg.inv(G.value), G.space)
    two_eye = constant(2.0 * np.eye(n), G.space)
    steps = max(1, int(np.ceil(np.log2(G.order + 1))))
    for _ in range(steps):
        X = jet_einsum("ab,bc->ac", X, two_eye - jet_einsum("ab,bc->ac", G, X))
    return X


def metric_gradient(G: Jets, dim: int) -> Jets:
    """Coordinate derivatives of the metric: ``dG[c, a, b] = d_c g_{ab}``."""
    return jets_stack([G.deriv(c) for c in range(dim)])


def christoffel_jets(G: Jets, Ginv: Jets, dim: int) -> Jets:
    """Levi-Civita connection components ``Gamma[c, a, b] = Gamma^c_{ab}``."""
    dG = metric_gradient(G, dim)
    S = (jet_trace(dG, "adb->dab") + jet_trace(dG, "bda->dab") - dG)
    return 0.5 * jet_einsum("cd,dab->cab", Ginv, S)


def riemann_jets(G: Jets, Gamma: Jets, dim: int) -> Jets:
    """Fully lowered curvature ``R_{abcd}`` from metric/connection jets."""
    dGam = jets_stack([Gamma.deriv(a) for a in range(dim)])
    # R_{abc}{}^d = -d_a Gamma^d_{bc} + d_b Gamma^d_{ac}
    #              + Gamma^e_{ac} Gamma^d_{be} - Gamma^e_{bc} Gamma^d_{ae}
    rm_ud = (-jet_trace(dGam, "adbc->abcd") + jet_trace(dGam, "bdac->abcd")
             + jet_einsum("eac,dbe->abcd", Gamma, Gamma)
             - jet_einsum("ebc,dae->abcd", Gamma, Gamma))
    return jet_einsum("abce,ed->abcd", rm_ud, G)


def cov_deriv_jets(T: Jets, variances, Gamma: Jets, dim: int) -> Jets:
    """Covariant derivative of a tensor jet batch; new slot comes first.

    ``variances`` lists "up"/"down" per batch axis of ``T``; every slot is
    corrected with the supplied connection components.
    """
    letters = "bcdefghij"[: len(variances)]
    parts = jets_stack([T.deriv(a) for a in range(dim)])
    for j, var in enumerate(variances):
        rest = letters
        if var == "down":
            tsub = rest[:j] + "z" + rest[j + 1:]
            corr = jet_einsum(f"za{rest[j]},{tsub}->a{rest}", Gamma, T)
            parts = parts - corr
        else:
            tsub = rest[:j] + "z" + rest[j + 1:]
            corr = jet_einsum(f"{rest[j]}az,{tsub}->a{rest}", Gamma, T)
            parts = parts + corr
    return parts


class CurvaturePack:
    """All ambient curvature objects at one evaluation point, as jets.

    Tensors are exposed both as raw ``Jets`` (lowercase attributes) and as
    ``LabeledTensor`` wrappers (capitalized properties) for contraction with
    slot checking.  Covariant derivatives of Weyl/Cotton/Schouten are
    computed lazily and cached.
    """

    def __init__(self, G: Jets, dim: int, basepoint=None):
        n = self.dim = dim
        if n < 3:
            raise ValueError("ambient curvature needs dimension >= 3 "
                             "(Schouten undefined below)")
        self.basepoint = basepoint
        self.g = G
        self.g_up = inverse_metric_jets(G)
        self.gamma = christoffel_jets(G, self.g_up, n)
        self.rm = riemann_jets(G, self.gamma, n)
        self.ric = jet_einsum("acbd,cd->ab", self.rm, self.g_up)
        self.scal = jet_einsum("ab,ab->", self.ric, self.g_up)
        self.jtrace = self.scal * (1.0 / (2.0 * (n - 1)))
        self.schouten = (self.ric - jet_einsum(",ab->ab", self.jtrace, G)) * (
            1.0 / (n - 2)
        )
        P, g = self.schouten, G
        self.weyl = (self.rm
                     - jet_einsum("ac,bd->abcd", P, g)
                     - jet_einsum("bd,ac->abcd", P, g)
                     + jet_einsum("ad,bc->abcd", P, g)
                     + jet_einsum("bc,ad->abcd", P, g))
        dP = self.dschouten
        self.cotton = dP - jet_trace(dP, "bac->abc")
        dC = self.dcotton
        self.bach = (jet_einsum("ec,ecab->ab", self.g_up, dC)
                     + jet_einsum("acbd,cd->ab", self.weyl,
                                  self._raise2(self.schouten)))

    def _raise2(self, T: Jets) -> Jets:
        up1 = jet_einsum("ac,cb->ab", self.g_up, T)
        return jet_einsum("bd,ad->ab", self.g_up, up1)

    def cov_deriv(self, T: Jets, variances) -> Jets:
        return cov_deriv_jets(T, variances, self.gamma, self.dim)

    @property
    def dschouten(self) -> Jets:
        if not hasattr(self, "_dP"):
            self._dP = self.cov_deriv(self.schouten, ["down"] * 2)
        return self._dP

    @property
    def ddschouten(self) -> Jets:
        if not hasattr(self, "_ddP"):
            self._ddP = self.cov_deriv(self.dschouten, ["down"] * 3)
        return self._ddP

    @property
    def dcotton(self) -> Jets:
        if not hasattr(self, "_dC"):
            self._dC = self.cov_deriv(self.cotton, ["down"] * 3)
        return self._dC

    @property
    def dweyl(self) -> Jets:
        if not hasattr(self, "_dW"):
            self._dW = self.cov_deriv(self.weyl, ["down"] * 4)
        return self._dW

    @property
    def driemann(self) -> Jets:
        if not hasattr(self, "_dRm"):
            self._dRm = self.cov_deriv(self.rm, ["down"] * 4)
        return self._dRm

    # -- labeled wrappers ----------------------------------------------

    def _wrap(self, data: Jets, variances) -> LabeledTensor:
        slots = [("ambient", v, self.dim) for v in variances]
        return LabeledTensor(slots, data, basepoint=self.basepoint)

    @property
    def metrics(self):
        return {"ambient": (self.g, self.g_up)}

    @property
    def Gamma(self):
        return self._wrap(self.gamma, ["up", "down", "down"])

    @property
    def Rm(self):
        return self._wrap(self.rm, ["down"] * 4)

    @property
    def Ric(self):
        return self._wrap(self.ric, ["down"] * 2)

    @property
    def Scal(self):
        return LabeledTensor([], self.scal, basepoint=self.basepoint)

    @property
    def Jtrace(self):
        return LabeledTensor([], self.jtrace, basepoint=self.basepoint)

    @property
    def Weyl(self):
        return self._wrap(self.weyl, ["down"] * 4)

    @property
    def Schouten(self):
        return self._wrap(self.schouten, ["down"] * 2)

    @property
    def Cotton(self):
        return self._wrap(self.cotton, ["down"] * 3)

    @property
    def Bach(self):
        return self._wrap(self.bach, ["down"] * 2)

    @property
    def dW(self):
        return self._wrap(self.dweyl, ["down"] * 5)

    @property
    def dC(self):
        return self._wrap(self.dcotton, ["down"] * 4)

    @property
    def dP(self):
        return self._wrap(self.dschouten, ["down"] * 3)

    @property
    def ddP(self):
        return self._wrap(self.ddschouten, ["down"] * 4)


def christoffel(g: MetricField, p) -> LabeledTensor:
    """Connection components ``Gamma^c_{ab}`` at ``p`` (slot order c, a, b)."""
    G = g.jets(p, 2)
    Ginv = inverse_metric_jets(G)
    gam = christoffel_jets(G, Ginv, g.dim)
    return LabeledTensor(
        [("ambient", "up", g.dim)] + [("ambient", "down", g.dim)] * 2,
        gam, basepoint=tuple(np.atleast_1d(p)),
    )


def curvature_pack(g: MetricField, p, depth: int = 0, order: int = 4,
                   param: bool = False) -> CurvaturePack:
    """Assemble the curvature pack of ``g`` at ``p``.

    ``depth`` pre-computes covariant derivatives: 1 adds nabla W, nabla C,
    nabla P; 2 adds the second Schouten derivative.  (They are lazy anyway;
    the argument exists to make the cost explicit at call sites.)
    """
    G = g.jets(p, order, param=param)
    pack = CurvaturePack(G, g.dim, basepoint=tuple(np.atleast_1d(p)))
    if depth >= 1:
        pack.dweyl, pack.dcotton, pack.dschouten  # noqa: B018
    if depth >= 2:
        pack.ddschouten  # noqa: B018
    return pack


def ambient_cov_deriv(field, g: MetricField, p, order: int = 3) -> LabeledTensor:
    """Covariant derivative of an evaluable ambient tensor field at ``p``.

    ``field`` is either a ``LabeledTensor`` whose data is jets (all slots
    ambient), or a callable of the coordinate jets returning one.  The
    result prepends one ambient "down" derivative slot.
    """
    if callable(field) and not isinstance(field, LabeledTensor):
        from .jets import variables

        field = field(variables(p, order))
    if not isinstance(field.data, Jets):
        raise ValueError("ambient_cov_deriv needs jet-valued tensor data")
    for s in field.slots:
        if s.kind != "ambient":
            raise ValueError("ambient_cov_deriv only handles ambient slots")
    G = g.jets(p, field.data.order)
    Ginv = inverse_metric_jets(G)
    gam = christoffel_jets(G, Ginv, g.dim)
    out = cov_deriv_jets(field.data, [s.variance for s in field.slots], gam, g.dim)
    slots = [("ambient", "down", g.dim)] + list(field.slots)
    return LabeledTensor(slots, out, basepoint=field.basepoint)


# -- identity residuals --------------------------------------------------


def _rel(resid: np.ndarray, *inputs: np.ndarray) -> float:
    scale = 1.0 + max((float(np.max(np.abs(x))) for x in inputs), default=0.0)
    return float(np.max(np.abs(resid))) / scale


def _antisym(arr: np.ndarray, axes) -> np.ndarray:
    out = np.zeros_like(arr)
    base = list(range(arr.ndim))
    for perm in permutations(axes):
        sign = _perm_sign(axes, perm)
        full = list(base)
        for tgt, src in zip(axes, perm):
            full[tgt] = src
        out += sign * np.transpose(arr, full)
    return out / math.factorial(len(axes))


def _perm_sign(ref, perm) -> float:
    order = [list(ref).index(p) for p in perm]
    sign = 1.0
    for i in range(len(order)):
        while order[i] != i:
            j = order[i]
            order[j], order[i] = order[i], order[j]
            sign = -sign
    return sign


def ambient_identity_residuals(pack: CurvaturePack) -> dict:
    """Max-norm residuals (relative) of the curvature identities.

    Covers the Riemann symmetries, both Bianchi identities, the trace-free
    and symmetry properties of Weyl/Cotton/Bach, the divergence relation
    between Weyl and Cotton, and the Weyl–Bianchi exchange identity.
    """
    n = pack.dim
    g = pack.g.value
    gi = pack.g_up.value
    rm = pack.rm.value
    W = pack.weyl.value
    C = pack.cotton.value
    B = pack.bach.value
    dW = pack.dweyl.value
    dRm = pack.driemann.value
    out = {}
    out["riemann_antisym_ab"] = _rel(rm + rm.transpose(1, 0, 2, 3), rm)
    out["riemann_antisym_cd"] = _rel(rm + rm.transpose(0, 1, 3, 2), rm)
    out["riemann_pair_sym"] = _rel(rm - rm.transpose(2, 3, 0, 1), rm)
    out["first_bianchi"] = _rel(_antisym(rm, [0, 1, 2]), rm)
    out["second_bianchi"] = _rel(_antisym(dRm, [0, 1, 2]), dRm)
    out["weyl_trace"] = _rel(np.einsum("acbd,cd->ab", W, gi), W)
    out["cotton_trace"] = _rel(np.einsum("bac,bc->a", C, gi), C)
    out["cotton_antisym3"] = _rel(_antisym(C, [0, 1, 2]), C)
    out["bach_trace"] = _rel(np.einsum("ab,ab->", B, gi), B)
    out["bach_antisym"] = _rel(B - B.T, B)
    div_w = np.einsum("ef,eabfc->abc", gi, dW)
    out["weyl_divergence"] = _rel(div_w - (n - 3) * C, div_w, C)
    # nabla_[a W_bc]^{de} = -2 C_[ab^[d g_c]^e]
    dW_up = np.einsum("abcef,ed,fg->abcdg", dW, gi, gi)
    lhs = _antisym(dW_up, [0, 1, 2])
    eye = np.eye(n)
    rhs = np.einsum("abd,ce->abcde", np.einsum("abf,fd->abd", C, gi), eye)
    rhs = _antisym(_antisym(rhs, [0, 1, 2]), [3, 4])
    out["weyl_bianchi"] = _rel(lhs + 2.0 * rhs, lhs)
    return out
