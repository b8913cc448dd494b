"""Dense tensors with labeled slots (kind, variance, dim).

A slot's *kind* says which bundle the index lives in — ``ambient``,
``tangent`` or ``normal`` — and its *variance* whether the index is up or
down.  Contraction is only permitted between slots of the same kind, with
index raising/lowering inserted automatically from the matching metric
block.  Data may be a plain ndarray (values at a point) or a batched
``Jets`` (values plus derivatives), and all operations preserve whichever
it is.
"""

from __future__ import annotations

import math
from itertools import permutations
from typing import NamedTuple

import numpy as np

from .jets import Jets, constant, jet_einsum, jet_trace

__all__ = ["Slot", "LabeledTensor", "contract", "sym_antisym", "flip_slot"]

KINDS = ("ambient", "tangent", "normal")
_LETTERS = "abcdefghijklmnopqrstuvwxyz"


class Slot(NamedTuple):
    kind: str
    variance: str  # "up" | "down"
    dim: int


def _shape(data):
    return data.batch if isinstance(data, Jets) else np.shape(data)


class LabeledTensor:
    """Dense array whose axes carry (kind, variance, dim) labels."""

    def __init__(self, slots, data, basepoint=None):
        self.slots = tuple(Slot(*s) for s in slots)
        for s in self.slots:
            if s.kind not in KINDS:
                raise ValueError(f"unknown slot kind {s.kind!r}")
            if s.variance not in ("up", "down"):
                raise ValueError(f"unknown variance {s.variance!r}")
        if not isinstance(data, Jets):
            data = np.asarray(data, dtype=float)
        if _shape(data) != tuple(s.dim for s in self.slots):
            raise ValueError(
                f"data extent {_shape(data)} does not match slots {self.slots}"
            )
        self.data = data
        self.basepoint = basepoint

    @property
    def rank(self) -> int:
        return len(self.slots)

    @property
    def values(self) -> np.ndarray:
        """Plain value array (constant term if the data is jets)."""
        return self.data.value if isinstance(self.data, Jets) else self.data

    def __add__(self, other):
        self._check_like(other)
        return LabeledTensor(self.slots, self.data + other.data, self.basepoint)

    def __sub__(self, other):
        self._check_like(other)
        return LabeledTensor(self.slots, self.data - other.data, self.basepoint)

    def __mul__(self, scalar):
        return LabeledTensor(self.slots, self.data * scalar, self.basepoint)

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)

    def _check_like(self, other):
        if not isinstance(other, LabeledTensor) or other.slots != self.slots:
            raise ValueError("tensors have mismatched slots")

    def __repr__(self):
        sig = ",".join(f"{s.kind[0]}{'+' if s.variance == 'up' else '-'}{s.dim}"
                       for s in self.slots)
        return f"LabeledTensor[{sig}]"


def _einsum(spec, a, b):
    if isinstance(a, Jets) or isinstance(b, Jets):
        if not isinstance(a, Jets):
            a = constant(a, b.space)
        elif not isinstance(b, Jets):
            b = constant(b, a.space)
        return jet_einsum(spec, a, b)
    return np.einsum(spec, a, b)


def _trace_data(data, ax1, ax2, ndim):
    lhs = list(_LETTERS[:ndim])
    lhs[ax2] = lhs[ax1]
    rhs = [c for i, c in enumerate(lhs) if i not in (ax1, ax2)]
    spec = f"{''.join(lhs)}->{''.join(rhs)}"
    if isinstance(data, Jets):
        return jet_trace(data, spec)
    return np.einsum(spec, data)


def flip_slot(t: LabeledTensor, i: int, metrics) -> LabeledTensor:
    """Raise or lower slot ``i`` using the metric block for its kind."""
    s = t.slots[i]
    g_down, g_up = metrics[s.kind]
    g = g_up if s.variance == "down" else g_down
    nd = t.rank
    lhs = _LETTERS[:nd]
    fresh = _LETTERS[nd]
    rhs = lhs[:i] + fresh + lhs[i + 1:]
    data = _einsum(f"{lhs},{lhs[i]}{fresh}->{rhs}", t.data, g)
    new = list(t.slots)
    new[i] = Slot(s.kind, "up" if s.variance == "down" else "down", s.dim)
    return LabeledTensor(new, data, t.basepoint)


def contract(a: LabeledTensor, b: LabeledTensor | None = None, *,
             pairs, metrics=None) -> LabeledTensor:
    """Trace paired slots (within ``a``, or between ``a`` and ``b``).

    ``pairs`` is a list of slot-index pairs, ``(i, j)`` referring to slots
    of ``a`` and ``b`` respectively (both to ``a`` if ``b`` is None).  Pairs
    must join slots of equal kind; when the variances are not opposite, one
    index is raised/lowered first with ``metrics[kind]`` (a ``(g_down,
    g_up)`` pair of arrays).  Result slots are the unpaired slots of ``a``
    then of ``b``, in order.
    """
    pairs = list(pairs)
    if b is None:
        return _self_contract(a, pairs, metrics)
    for i, j in pairs:
        sa, sb = a.slots[i], b.slots[j]
        if sa.kind != sb.kind:
            raise ValueError(
                f"cannot contract {sa.kind} slot with {sb.kind} slot"
            )
        if sa.dim != sb.dim:
            raise ValueError("paired slots have different dims")
        if sa.variance == sb.variance:
            if metrics is None:
                raise ValueError(
                    "same-variance contraction requires metric blocks"
                )
            b = flip_slot(b, j, metrics)
    la = _LETTERS[: a.rank]
    lb = list(_LETTERS[a.rank: a.rank + b.rank])
    for i, j in pairs:
        lb[j] = la[i]
    a_free = [c for i, c in enumerate(la) if i not in {i for i, _ in pairs}]
    b_free = [c for j, c in enumerate(lb) if j not in {j for _, j in pairs}]
    rhs = "".join(a_free + b_free)
    data = _einsum(f"{la},{''.join(lb)}->{rhs}", a.data, b.data)
    slots = [s for i, s in enumerate(a.slots) if i not in {i for i, _ in pairs}]
    slots += [s for j, s in enumerate(b.slots) if j not in {j for _, j in pairs}]
    return LabeledTensor(slots, data, a.basepoint)


def _self_contract(a: LabeledTensor, pairs, metrics) -> LabeledTensor:
    for i, j in pairs:
        si, sj = a.slots[i], a.slots[j]
        if si.kind != sj.kind:
            raise ValueError(f"cannot contract {si.kind} slot with {sj.kind} slot")
        if si.variance == sj.variance:
            if metrics is None:
                raise ValueError("same-variance contraction requires metric blocks")
            a = flip_slot(a, j, metrics)
    # trace one pair at a time, renumbering the remaining pairs
    pairs = [list(p) for p in pairs]
    while pairs:
        i, j = pairs.pop(0)
        data = _trace_data(a.data, i, j, a.rank)
        slots = [s for k, s in enumerate(a.slots) if k not in (i, j)]
        a = LabeledTensor(slots, data, a.basepoint)
        for p in pairs:
            p[0] -= (p[0] > i) + (p[0] > j)
            p[1] -= (p[1] > i) + (p[1] > j)
    return a


def _permute_data(data, perm):
    if isinstance(data, Jets):
        src = ''.join(_LETTERS[p] for p in perm)
        dst = _LETTERS[:len(perm)]
        return jet_trace(data, f"{src}->{dst}")
    return np.transpose(data, perm)


def sym_antisym(t: LabeledTensor, slots, kind: str) -> LabeledTensor:
    """Symmetrize (``kind='sym'``) or antisymmetrize over the given slots.

    Averages over the permutation group (signed for antisym), i.e. with the
    1/p! normalization, leaving the other slots alone.  The chosen slots
    must share kind and variance.
    """
    slots = list(slots)
    if kind not in ("sym", "antisym"):
        raise ValueError("kind must be 'sym' or 'antisym'")
    ref = t.slots[slots[0]]
    for i in slots[1:]:
        if t.slots[i][:2] != ref[:2] or t.slots[i].dim != ref.dim:
            raise ValueError("slots to symmetrize must share kind and variance")
    total = None
    for perm in permutations(slots):
        full = list(range(t.rank))
        for tgt, src in zip(slots, perm):
            full[tgt] = src
        sign = 1.0
        if kind == "antisym":
            sign = _parity(slots, perm)
        piece = _permute_data(t.data, full) * sign
        total = piece if total is None else total + piece
    return LabeledTensor(t.slots, total * (1.0 / math.factorial(len(slots))),
                         t.basepoint)


def _parity(ref, perm) -> float:
    order = [ref.index(p) for p in perm]
    sign = 1.0
    order = list(order)
    for i in range(len(order)):
        while order[i] != i:
            j = order[i]
            order[i], order[j] = order[j], order[i]
            sign = -sign
    return sign
