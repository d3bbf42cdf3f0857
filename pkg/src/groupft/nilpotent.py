"""Cross-section Fourier analysis on a class of nilpotent Lie groups.

A group enters through two pieces of data:

* ``LieAlgebraData`` - structure constants in a strong Malcev basis, from
  which coadjoint jump indices and the Pfaffian of the skew form
  B_xi(X, Y) = xi([X, Y]) are computed by plain linear algebra;

* ``CrossSectionDescriptor`` - the analytic package (vanishing slots,
  Pfaffian, weight h, coordinate substitution) that expresses the squared
  Hilbert-Schmidt norm of the group transform at a generic cross-section
  point xi as

      hs2(xi) = |h(xi)| * int |F(f o exp)(substitute(xi, t))|^2 dt,

  an integral over the vanishing coordinates of the Euclidean transform
  of f in exponential coordinates, evaluated off-grid by direct
  summation (never interpolation).

The Plancherel identity integrates hs2 against |Pf(xi)| d(xi) over the
cross-section; with the built-in thread-like groups (|h| = 1/|Pf|) the
change of variables collapses it to the Euclidean Parseval identity, so
the measured ratio tends to 1.  A band around Pf = 0 is excluded from all
quadratures and its spectral mass is reported, not hidden.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    DecayError,
    IllConditionedError,
    SingularBandError,
    ZeroFieldError,
)
from .euclidean import UncertaintyTerms, _terms, checked_moment
from .exprs import parse_expression
from .fields import (
    SampledField,
    axis_band_fraction,
    boundary_decay,
    l2_norm_sq,
)
from .fields import test_corpus as _base_corpus
from .fields import gaussian_packet

__all__ = [
    "LieAlgebraData",
    "JumpData",
    "CrossSectionDescriptor",
    "algebra_violations",
    "threadlike_algebra",
    "threadlike_descriptor",
    "jump_indices",
    "pfaffian_sq",
    "nilpotent_hs_norm_sq",
    "nilpotent_w_profile",
    "nilpotent_plancherel_ratio",
    "nilpotent_uncertainty",
    "singular_band_fraction",
    "nilpotent_corpus",
    "descriptor_from_json",
    "descriptor_to_json",
    "load_descriptor_file",
    "validate_descriptor",
]

EPS_SINGULAR = 0.05
BAND_MASS_BUDGET = 0.005


# ---------------------------------------------------------------------------
# Lie algebra data, jump indices, Pfaffian
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LieAlgebraData:
    """Structure constants c[i, j, k]: [X_i, X_j] = sum_k c[i,j,k] X_k (0-based)."""

    dim: int
    brackets: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(self.brackets, dtype=np.float64)
        if c.shape != (self.dim,) * 3:
            raise ValueError(f"structure constants must be ({self.dim},)*3, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "brackets", c)

    def skew_form(self, xi: np.ndarray) -> np.ndarray:
        """B[i, j] = xi([X_i, X_j])."""
        return self.brackets @ np.asarray(xi, dtype=float)


def algebra_violations(lie: LieAlgebraData, tol: float = 1e-12) -> list[str]:
    """Antisymmetry, Jacobi and strong-Malcev (c_{ij}^k = 0 for k >= j) checks."""
    out = []
    c = lie.brackets
    n = lie.dim
    if np.max(np.abs(c + np.swapaxes(c, 0, 1))) > tol:
        out.append("antisymmetry fails")
    jac = np.einsum("ijm,mkl->ijkl", c, c)
    jacobi = jac + np.einsum("jkm,mil->ijkl", c, c) + np.einsum("kim,mjl->ijkl", c, c)
    if np.max(np.abs(jacobi)) > tol:
        out.append("Jacobi identity fails")
    for i in range(n):
        for j in range(n):
            bad = np.nonzero(np.abs(c[i, j, j:]) > tol)[0]
            if bad.size:
                out.append(
                    f"not adapted to the ascending series: c[{i + 1},{j + 1}]^"
                    f"{j + 1 + bad[0]} != 0"
                )
    return out


def threadlike_algebra(n: int) -> LieAlgebraData:
    """Filiform brackets [X_n, X_j] = X_{j-1}, 2 <= j <= n-1 (Heisenberg at n=3)."""
    if n < 3:
        raise ValueError(f"thread-like algebras need dimension >= 3, got {n}")
    c = np.zeros((n, n, n))
    for j in range(2, n):  # 1-based j in [2, n-1]
        c[n - 1, j - 1, j - 2] = 1.0
        c[j - 1, n - 1, j - 2] = -1.0
    return LieAlgebraData(n, c)


@dataclass(frozen=True)
class JumpData:
    """Jump index set (1-based), its complement, and the skew matrix over it."""

    indices: tuple[int, ...]
    complement: tuple[int, ...]
    skew: np.ndarray


def _rank(mat: np.ndarray, tol: float, guard: float) -> int:
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    ambiguous = (s > tol / guard) & (s < tol * guard)
    if np.any(ambiguous):
        raise IllConditionedError(
            f"singular value {s[ambiguous][0]:.3e} sits inside the rank-decision "
            f"window around {tol:.1e}"
        )
    return int(np.sum(s > tol))


def jump_indices(lie: LieAlgebraData, xi, tol: float = 1e-9, guard: float = 100.0) -> JumpData:
    """Jump set of xi: indices j where ker(B_xi) + span(X_1..X_j) grows.

    The rank decisions are guarded: singular values within a factor
    ``guard`` of the threshold raise IllConditionedError instead of
    silently picking an orbit dimension.
    """
    xi = np.asarray(xi, dtype=float)
    n = lie.dim
    B = lie.skew_form(xi)
    scale = max(1.0, float(np.max(np.abs(B))))
    cut = tol * scale
    if np.max(np.abs(B)) == 0.0:
        kernel = np.eye(n)
    else:
        u, s, vh = np.linalg.svd(B)
        ambiguous = (s > cut / guard) & (s < cut * guard)
        if np.any(ambiguous):
            raise IllConditionedError(
                f"kernel of the skew form is ill determined (singular value "
                f"{s[ambiguous][0]:.3e})"
            )
        kernel = vh[s <= cut].T
    jumps = []
    prev = _rank(kernel, cut, guard) if kernel.size else 0
    basis = kernel
    for j in range(n):
        ej = np.zeros((n, 1))
        ej[j, 0] = 1.0
        basis = np.hstack([basis, ej]) if basis.size else ej
        cur = _rank(basis, cut, guard)
        if cur > prev:
            jumps.append(j + 1)
        prev = cur
    S = tuple(jumps)
    T = tuple(sorted(set(range(1, n + 1)) - set(S)))
    idx = np.array([j - 1 for j in S], dtype=int)
    return JumpData(S, T, B[np.ix_(idx, idx)])


def pfaffian_sq(jump: JumpData) -> float:
    """det of the skew matrix over the jump set; equals Pf(xi)^2."""
    k = len(jump.indices)
    if k == 0:
        raise ValueError("no jump indices: the orbit is a point, no Pfaffian")
    if k % 2 == 1:
        raise ValueError(f"odd jump set {jump.indices}: skew data is inconsistent")
    return float(np.linalg.det(jump.skew))


# ---------------------------------------------------------------------------
# cross-section descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CrossSectionDescriptor:
    """Analytic data of one group's generic cross-section.

    ``substitute(xi, t)`` receives the embedded functional (length n, zeros
    at vanishing slots) and one broadcastable array per vanishing slot (in
    ascending slot order) and returns the n coordinate arrays where the
    Euclidean transform is evaluated.  All callables must broadcast over
    numpy arrays.  ``bounds`` maps each non-vanishing slot to a tuple of
    (lo, hi) interval pieces of the integration box; the pieces already
    exclude the singular band of the built-ins.
    """

    n: int
    vanishing: tuple[int, ...]
    pfaffian: Callable
    h: Callable
    substitute: Callable
    bounds: dict[int, tuple[tuple[float, float], ...]]
    singular_axis: int | None = None
    label: str = "descriptor"
    pfaffian_source: str | None = None
    h_source: str | None = None
    substitute_source: dict[int, str] | None = field(default=None)

    def __post_init__(self):
        v = tuple(sorted(int(j) for j in self.vanishing))
        if not v or v[0] < 1 or v[-1] > self.n or len(set(v)) != len(v):
            raise ValueError(f"vanishing slots {self.vanishing} invalid for n={self.n}")
        object.__setattr__(self, "vanishing", v)
        for slot in self.cross_slots:
            if slot not in self.bounds:
                raise ValueError(f"missing integration bounds for slot {slot}")

    @property
    def cross_slots(self) -> tuple[int, ...]:
        return tuple(j for j in range(1, self.n + 1) if j not in self.vanishing)

    def embed(self, xi_cross) -> np.ndarray:
        """Full functional in R^n from cross-section coordinates."""
        xi_cross = np.atleast_1d(np.asarray(xi_cross, dtype=float))
        if xi_cross.shape != (len(self.cross_slots),):
            raise ValueError(
                f"expected {len(self.cross_slots)} cross-section coordinates, "
                f"got {xi_cross.shape}"
            )
        xi = np.zeros(self.n)
        for value, slot in zip(xi_cross, self.cross_slots):
            xi[slot - 1] = value
        return xi


def _threadlike_substitute(n: int):
    def substitute(xi, t):
        t1, t2 = t
        coords = [None] * n
        coords[0] = xi[0] + 0.0 * t1  # broadcast to the t1 shape
        coords[1] = t1
        coords[n - 1] = t2
        for j in range(3, n):  # 1-based slots 3..n-1
            q = 0.0 * t1
            for k in range(1, j):
                q = q + (t1**k) * xi[j - k - 1] / (math.factorial(k) * xi[0] ** k)
            coords[j - 1] = xi[j - 1] + q
        return coords

    return substitute


def threadlike_descriptor(
    n: int, xi1_max: float = 3.2, other_max: float = 2.4, eps: float = EPS_SINGULAR
) -> CrossSectionDescriptor:
    """Built-in thread-like cross-section for n in {3, 4, 5}.

    Vanishing slots (2, n); Pf(xi) = xi_1; h = 1/|xi_1|; the substitution
    inserts t at slot 2, s at slot n and shifts slot j by
    Q_j = sum_{k>=1} t^k xi_{j-k} / (k! xi_1^k) with xi_2 = 0.
    """
    if n not in (3, 4, 5):
        raise ValueError(f"thread-like descriptors are built in for n in {{3,4,5}}, got {n}")
    bounds = {1: ((-xi1_max, -eps), (eps, xi1_max))}
    for j in range(3, n):
        bounds[j] = ((-other_max, other_max),)
    return CrossSectionDescriptor(
        n=n,
        vanishing=(2, n),
        pfaffian=lambda xi: xi[0],
        h=lambda xi: 1.0 / abs(xi[0]),
        substitute=_threadlike_substitute(n),
        bounds=bounds,
        singular_axis=1,
        label=f"threadlike{n}",
    )


# ---------------------------------------------------------------------------
# HS-norm evaluation engine
# ---------------------------------------------------------------------------


class _HsEvaluator:
    """Evaluates hs2(xi) over a fixed t-quadrature by axis-wise contraction.

    The substitution couples vanishing-slot variables to shifted slots; the
    planner below inspects which t axes each slot coordinate depends on
    (via broadcast shapes), loops over axes feeding several slots, and
    contracts everything else as phase vectors/matrices.  Slots whose
    coordinates do not involve the looped axes are contracted once per
    distinct base key, which makes sweeps ordered by the leading
    cross-section coordinate cheap.
    """

    def __init__(self, f: SampledField, desc: CrossSectionDescriptor, t_nodes: int = 32):
        if f.has_group_axis:
            raise ValueError("nilpotent fields are spatial-only (exponential coordinates)")
        if f.grid.dim != desc.n:
            raise ValueError(f"field dimension {f.grid.dim} != descriptor n = {desc.n}")
        self.f = f
        self.desc = desc
        self.W = np.asarray(f.grid.dual_half_extents)
        self.n_axes = len(desc.vanishing)
        x, w = np.polynomial.legendre.leggauss(t_nodes)
        self.t_nodes, self.t_weights, self.t_sparse = [], [], []
        for a, slot in enumerate(desc.vanishing):
            T = self.W[slot - 1] * (1.0 - 1e-12)
            nodes = T * x
            shape = [1] * self.n_axes
            shape[a] = t_nodes
            self.t_nodes.append(nodes)
            self.t_weights.append(T * w)
            self.t_sparse.append(nodes.reshape(shape))
        self._plan = None
        self._base_key = None
        self._base_tensor = None
        self._base_axes = None

    # -- planning ----------------------------------------------------------

    def _deps_of(self, coords) -> list[frozenset[int]]:
        deps = []
        for c in coords:
            shape = np.shape(c)
            dep = frozenset(
                a for a in range(self.n_axes) if len(shape) > a and shape[a - self.n_axes] > 1
            )
            deps.append(dep)
        return deps

    def _make_plan(self, coords):
        deps = self._deps_of(coords)
        looped: set[int] = set()
        while True:
            remaining = [d - looped for d in deps]
            axis_slots = {a: [] for a in range(self.n_axes) if a not in looped}
            for i, d in enumerate(remaining):
                for a in d:
                    axis_slots[a].append(i)
            offenders = [a for a, slots in axis_slots.items() if len(slots) > 1]
            offenders += [
                a
                for i, d in enumerate(remaining)
                if len(d) > 1
                for a in sorted(d)[:-1]
                if a not in offenders
            ]
            if not offenders:
                break
            looped.add(sorted(offenders, key=lambda a: -len(axis_slots.get(a, [])))[0])
        free_axis = {}
        for i, d in enumerate(remaining):
            if d:
                free_axis[i] = next(iter(d))
        base_slots = [i for i in range(self.desc.n) if not (deps[i] & looped)]
        loop_slots = [i for i in range(self.desc.n) if deps[i] & looped]
        return {
            "deps": deps,
            "looped": tuple(sorted(looped)),
            "free_axis": free_axis,
            "base_slots": base_slots,
            "loop_slots": loop_slots,
        }

    # -- phase helpers -------------------------------------------------------

    def _vector(self, slot_idx: int, value: float) -> np.ndarray | None:
        if abs(value) > self.W[slot_idx]:
            return None
        x = self.f.grid.axis(slot_idx)
        return np.exp(-2j * np.pi * value * x)

    def _matrix(self, slot_idx: int, values: np.ndarray) -> np.ndarray:
        x = self.f.grid.axis(slot_idx)
        mat = np.exp(-2j * np.pi * np.outer(values, x))
        mat[np.abs(values) > self.W[slot_idx]] = 0.0  # out-of-box rows carry no mass
        return mat

    # -- evaluation ----------------------------------------------------------

    def _base(self, coords, plan):
        key_parts = []
        for i in plan["base_slots"]:
            key_parts.append(np.asarray(coords[i]).tobytes())
        key = b"".join(key_parts)
        if key == self._base_key:
            return self._base_tensor, self._base_axes
        T = self.f.values
        present = list(range(self.desc.n))
        appended: list[int] = []
        for i in plan["base_slots"]:
            pos = present.index(i)
            if i in plan["free_axis"]:
                a = plan["free_axis"][i]
                vals = np.ravel(coords[i]) + np.zeros(len(self.t_nodes[a]))
                T = np.tensordot(T, self._matrix(i, vals), axes=(pos, 1))
                appended.append(a)
            else:
                vec = self._vector(i, float(np.ravel(coords[i])[0]))
                if vec is None:
                    T = None
                    break
                T = np.tensordot(T, vec, axes=(pos, 0))
            present.pop(pos)
        self._base_key = key
        self._base_tensor = (T, tuple(present))
        self._base_axes = appended
        return self._base_tensor, appended

    def integrand(self, xi_cross) -> np.ndarray:
        """|F(f o exp)(substitute(xi, t))|^2 on the t tensor grid."""
        xi = self.desc.embed(xi_cross)
        coords = self.desc.substitute(xi, self.t_sparse)
        if self._plan is None:
            self._plan = self._make_plan(coords)
        plan = self._plan
        (base, present), base_appended = self._base(coords, plan)
        shape = tuple(len(nodes) for nodes in self.t_nodes)
        out = np.zeros(shape, dtype=np.complex128)
        if base is None:
            return np.zeros(shape)
        looped = plan["looped"]
        loop_ranges = [range(len(self.t_nodes[a])) for a in looped]
        for combo in itertools.product(*loop_ranges):
            T = base
            cur = list(present)
            appended = list(base_appended)
            dead = False
            for i in plan["loop_slots"]:
                c = np.asarray(coords[i])
                idx = [0] * self.n_axes
                for a, k in zip(looped, combo):
                    if c.ndim > a and c.shape[a - self.n_axes] > 1:
                        idx[a] = k
                pos = cur.index(i)
                if i in plan["free_axis"]:
                    a_free = plan["free_axis"][i]
                    sel = [slice(None) if a == a_free else idx[a] for a in range(self.n_axes)]
                    vals = np.broadcast_to(c, self._mesh_shape())[tuple(sel)]
                    T = np.tensordot(T, self._matrix(i, np.ravel(vals)), axes=(pos, 1))
                    appended.append(a_free)
                else:
                    sel = [min(idx[a], (c.shape[a - self.n_axes] - 1) if c.ndim > a else 0)
                           for a in range(self.n_axes)]
                    val = float(np.broadcast_to(c, self._mesh_shape())[tuple(sel)])
                    vec = self._vector(i, val)
                    if vec is None:
                        dead = True
                        break
                    T = np.tensordot(T, vec, axes=(pos, 0))
                cur.pop(pos)
            if dead:
                continue
            block = np.transpose(np.atleast_1d(T), np.argsort(appended)) if appended else T
            sel = [slice(None)] * self.n_axes
            for a, k in zip(looped, combo):
                sel[a] = k
            out[tuple(sel)] = block
        return np.abs(out) ** 2 * self.f.grid.cell_volume**2

    def _mesh_shape(self):
        return tuple(len(n) for n in self.t_nodes)

    def hs_norm_sq(self, xi_cross, eps_sing: float = EPS_SINGULAR) -> float:
        xi = self.desc.embed(xi_cross)
        pf = abs(float(self.desc.pfaffian(xi)))
        if pf <= eps_sing:
            raise SingularBandError(
                f"|Pf(xi)| = {pf:.3e} inside the excluded band (eps = {eps_sing})"
            )
        dens = self.integrand(xi_cross)
        for a in range(self.n_axes):
            shape = [1] * self.n_axes
            shape[a] = dens.shape[a]
            dens = dens * self.t_weights[a].reshape(shape)
        return abs(float(self.desc.h(xi))) * float(dens.sum())


def nilpotent_hs_norm_sq(
    f: SampledField,
    desc: CrossSectionDescriptor,
    xi_cross,
    t_nodes: int = 32,
    eps_sing: float = EPS_SINGULAR,
) -> float:
    """hs2 at one cross-section point (see module docstring)."""
    return _HsEvaluator(f, desc, t_nodes).hs_norm_sq(xi_cross, eps_sing)


# ---------------------------------------------------------------------------
# cross-section quadrature, Plancherel, uncertainty
# ---------------------------------------------------------------------------


def _w_nodes(desc: CrossSectionDescriptor, f: SampledField, nodes_per_interval: int):
    """Per-coordinate (nodes, weights), bounds clipped to the dual box."""
    x, w = np.polynomial.legendre.leggauss(nodes_per_interval)
    out = []
    W = f.grid.dual_half_extents
    for slot in desc.cross_slots:
        pieces_n, pieces_w = [], []
        for lo, hi in desc.bounds[slot]:
            lo = max(lo, -W[slot - 1] * (1 - 1e-12))
            hi = min(hi, W[slot - 1] * (1 - 1e-12))
            if hi <= lo:
                continue
            half = 0.5 * (hi - lo)
            pieces_n.append(half * x + 0.5 * (hi + lo))
            pieces_w.append(half * w)
        if not pieces_n:
            raise ValueError(f"slot {slot}: integration bounds fall outside the dual box")
        out.append((np.concatenate(pieces_n), np.concatenate(pieces_w)))
    return out


def nilpotent_w_profile(
    f: SampledField,
    desc: CrossSectionDescriptor,
    w_nodes: int = 20,
    t_nodes: int = 32,
    eps_sing: float = EPS_SINGULAR,
):
    """(points, weights, hs2 values) over the cross-section quadrature grid.

    Points iterate the tensor product of per-coordinate Gauss-Legendre
    nodes with the leading coordinate outermost, which lets the evaluator
    reuse its base contraction across the inner sweep.  Nodes with
    |Pf(xi)| <= eps_sing receive weight zero.
    """
    evaluator = _HsEvaluator(f, desc, t_nodes)
    per_coord = _w_nodes(desc, f, w_nodes)
    node_lists = [nc for nc, _ in per_coord]
    weight_lists = [wc for _, wc in per_coord]
    points, weights, values = [], [], []
    for combo in itertools.product(*(range(len(nc)) for nc in node_lists)):
        xi_cross = np.array([node_lists[i][k] for i, k in enumerate(combo)])
        weight = float(np.prod([weight_lists[i][k] for i, k in enumerate(combo)]))
        xi = desc.embed(xi_cross)
        if abs(float(desc.pfaffian(xi))) <= eps_sing:
            continue
        points.append(xi_cross)
        weights.append(weight)
        values.append(evaluator.hs_norm_sq(xi_cross, eps_sing))
    return np.array(points), np.array(weights), np.array(values)


def singular_band_fraction(
    f: SampledField, desc: CrossSectionDescriptor, eps_sing: float = EPS_SINGULAR
) -> float | None:
    """Spectral mass of f inside the excluded band, when the descriptor
    designates a singular axis; None otherwise."""
    if desc.singular_axis is None:
        return None
    return axis_band_fraction(f, desc.singular_axis - 1, eps_sing)


def _plancherel_guard(f: SampledField, desc, eps_sing: float) -> tuple[float, float | None]:
    norm_sq = l2_norm_sq(f)
    if norm_sq <= 0.0:
        raise ZeroFieldError("Plancherel ratio undefined for the zero field")
    if boundary_decay(f) > 1e-10:
        raise DecayError("field has not decayed at the box boundary")
    band = singular_band_fraction(f, desc, eps_sing)
    if band is not None and band >= BAND_MASS_BUDGET:
        raise SingularBandError(
            f"spectral mass {band:.3e} inside |Pf| <= {eps_sing} exceeds the "
            f"{BAND_MASS_BUDGET:.1%} budget",
            excluded_mass=band,
        )
    return norm_sq, band


def nilpotent_plancherel_ratio(
    f: SampledField,
    desc: CrossSectionDescriptor,
    w_nodes: int = 20,
    t_nodes: int = 32,
    eps_sing: float = EPS_SINGULAR,
    profile=None,
) -> float:
    """(int_W hs2(xi) |Pf(xi)| dxi) / ||f||_2^2; tends to 1 for the built-ins.

    Fields carrying >= 0.5% of their spectral mass inside the excluded
    band are rejected with the excluded mass attached to the error.
    """
    norm_sq, _ = _plancherel_guard(f, desc, eps_sing)
    if profile is None:
        profile = nilpotent_w_profile(f, desc, w_nodes, t_nodes, eps_sing)
    points, weights, values = profile
    pf = np.array([abs(float(desc.pfaffian(desc.embed(p)))) for p in points])
    return float(np.sum(weights * values * pf)) / norm_sq


def nilpotent_uncertainty(
    f: SampledField,
    desc: CrossSectionDescriptor,
    spec,
    w_nodes: int = 20,
    t_nodes: int = 32,
    eps_sing: float = EPS_SINGULAR,
    profile=None,
) -> UncertaintyTerms:
    """Uncertainty product on the group, momentum side over the cross-section.

    momentum^(2b) = int_W |xi|^{2b} hs2(xi) / (|h|^b |Pf|^{b-1}) dxi with
    |xi| the Euclidean norm of the cross-section point (vanishing slots
    contribute zero); position side is the Euclidean moment in exponential
    coordinates; lhs = ||f||^{1/a + 1/b} / (4 pi).
    """
    norm_sq, _ = _plancherel_guard(f, desc, eps_sing)
    position = checked_moment(f, 2.0 * spec.a, "position") ** (1.0 / (2.0 * spec.a))
    if profile is None:
        profile = nilpotent_w_profile(f, desc, w_nodes, t_nodes, eps_sing)
    points, weights, values = profile
    total = 0.0
    for xi_cross, w, hs in zip(points, weights, values):
        xi = desc.embed(xi_cross)
        pf = abs(float(desc.pfaffian(xi)))
        habs = abs(float(desc.h(xi)))
        r2b = float(np.sum(xi**2)) ** spec.b
        total += w * r2b * hs / (habs**spec.b * pf ** (spec.b - 1.0))
    momentum = total ** (1.0 / (2.0 * spec.b))
    lhs = norm_sq ** (0.5 * (1.0 / spec.a + 1.0 / spec.b)) / (4.0 * np.pi)
    return _terms(lhs, position, momentum)


# ---------------------------------------------------------------------------
# corpus
# ---------------------------------------------------------------------------


def nilpotent_corpus(grid, seed: int, count: int) -> list[SampledField]:
    """Seeded corpus with dual energy pushed away from the singular band.

    Alternates packets modulated along the first axis (dual centre near
    +-1) with first-axis Hermite packets (dual density vanishing at
    xi_1 = 0); both keep the spectral mass in |xi_1| < 0.05 far below the
    0.5% budget.  Raises DecayError when the grid cannot support the
    required margins.
    """
    rng = np.random.default_rng(seed)
    L = grid.half_extents
    W = grid.dual_half_extents
    delta = 2.84
    w_hi = (L[0] - 0.2) / delta
    alpha = min(1.0, W[0] - delta / w_hi)
    w_lo = delta / (W[0] - alpha)
    if w_lo > w_hi or alpha < 0.6:
        raise DecayError(
            f"grid (extents {L}, counts {grid.counts}) too coarse for a "
            "band-avoiding corpus"
        )
    out = []
    for i in range(count):
        widths = [rng.uniform(w_lo, w_hi)]
        centers = [rng.uniform(-0.2, 0.2)]
        mods = [rng.choice([-1.0, 1.0]) * rng.uniform(0.9 * alpha, alpha)]
        for a in range(1, grid.dim):
            w_hi_a = (L[a] - 0.2) / delta
            w_lo_a = delta / (W[a] - 0.25)
            widths.append(rng.uniform(w_lo_a, min(w_hi_a, 1.3 * w_lo_a)))
            centers.append(rng.uniform(-0.2, 0.2))
            mods.append(rng.uniform(-0.25, 0.25))
        if i % 2 == 1:
            mods[0] = 0.0
            f = gaussian_packet(grid, centers, widths, mods, hermite_axis=0, hermite_degree=1)
        else:
            f = gaussian_packet(grid, centers, widths, mods)
        scale = 1.0 / np.sqrt(l2_norm_sq(f))
        out.append(SampledField(grid, f.values * scale))
    return out


# ---------------------------------------------------------------------------
# descriptor definition files
# ---------------------------------------------------------------------------


def _expr_env(desc_n: int, xi: np.ndarray, t=None) -> dict:
    env = {f"xi{i + 1}": xi[i] for i in range(desc_n)}
    if t is not None:
        for a, arr in enumerate(t):
            env[f"t{a + 1}"] = arr
    return env


def descriptor_from_json(data: dict) -> tuple[CrossSectionDescriptor, LieAlgebraData | None]:
    """Build a descriptor (and optional algebra) from its JSON dict.

    Expressions use variables xi1..xin and t1..t_{n-k} (t_k fills the k-th
    vanishing slot, ascending).  Substitute entries may be omitted: a
    vanishing slot defaults to its t variable, any other slot to its xi.
    """
    n = int(data["n"])
    vanishing = tuple(sorted(int(j) for j in data["vanishing"]))
    pf_expr = parse_expression(str(data["pfaffian"]))
    h_expr = parse_expression(str(data["h"]))
    sub_sources: dict[int, str] = {}
    for slot in range(1, n + 1):
        given = data.get("substitute", {}).get(str(slot))
        if given is None:
            if slot in vanishing:
                given = f"t{vanishing.index(slot) + 1}"
            else:
                given = f"xi{slot}"
        sub_sources[slot] = str(given)
    sub_exprs = {slot: parse_expression(src) for slot, src in sub_sources.items()}

    def pfaffian(xi):
        return pf_expr(_expr_env(n, xi))

    def h(xi):
        return h_expr(_expr_env(n, xi))

    def substitute(xi, t):
        env = _expr_env(n, xi, t)
        zero = sum(0.0 * np.asarray(arr) for arr in t)
        return [sub_exprs[slot](env) + zero * 0 for slot in range(1, n + 1)]

    bounds = {}
    for slot_str, pieces in data["bounds"].items():
        bounds[int(slot_str)] = tuple((float(lo), float(hi)) for lo, hi in pieces)
    algebra = None
    if "structure_constants" in data:
        c = np.zeros((n, n, n))
        for i, j, k, value in data["structure_constants"]:
            c[int(i) - 1, int(j) - 1, int(k) - 1] = float(value)
            c[int(j) - 1, int(i) - 1, int(k) - 1] = -float(value)
        algebra = LieAlgebraData(n, c)
    desc = CrossSectionDescriptor(
        n=n,
        vanishing=vanishing,
        pfaffian=pfaffian,
        h=h,
        substitute=substitute,
        bounds=bounds,
        singular_axis=data.get("singular_axis"),
        label=str(data.get("name", "descriptor")),
        pfaffian_source=str(data["pfaffian"]),
        h_source=str(data["h"]),
        substitute_source=sub_sources,
    )
    return desc, algebra


def descriptor_to_json(desc: CrossSectionDescriptor) -> dict:
    """JSON dict of an expression-backed descriptor (round-trips files)."""
    if desc.pfaffian_source is None:
        raise ValueError("descriptor was not built from expressions")
    return {
        "schema": 1,
        "name": desc.label,
        "n": desc.n,
        "vanishing": list(desc.vanishing),
        "pfaffian": desc.pfaffian_source,
        "h": desc.h_source,
        "substitute": {str(k): v for k, v in desc.substitute_source.items()},
        "bounds": {str(k): [list(p) for p in v] for k, v in desc.bounds.items()},
        "singular_axis": desc.singular_axis,
    }


def load_descriptor_file(path) -> tuple[CrossSectionDescriptor, LieAlgebraData | None]:
    with open(path) as fh:
        return descriptor_from_json(json.load(fh))


def validate_descriptor(
    desc: CrossSectionDescriptor,
    algebra: LieAlgebraData | None = None,
    seed: int = 0,
    samples: int = 25,
) -> list[str]:
    """Sampled invariant checks; returns violation messages (empty = valid).

    With algebra data present, the descriptor's Pfaffian is cross-checked
    against det M_S(xi) from the structure constants and the jump set
    against the vanishing slots, at sampled cross-section points.
    """
    report = []
    rng = np.random.default_rng(seed)
    if algebra is not None:
        report.extend(algebra_violations(algebra))
        if algebra.dim != desc.n:
            report.append(f"algebra dimension {algebra.dim} != descriptor n {desc.n}")
    n_axes = len(desc.vanishing)
    for _ in range(samples):
        xi_cross = np.array(
            [rng.uniform(*desc.bounds[slot][rng.integers(len(desc.bounds[slot]))])
             for slot in desc.cross_slots]
        )
        xi = desc.embed(xi_cross)
        pf = float(desc.pfaffian(xi))
        if not np.isfinite(pf) or pf == 0.0:
            report.append(f"pfaffian vanishes at {xi_cross}")
            continue
        if not np.isfinite(float(desc.h(xi))) or float(desc.h(xi)) == 0.0:
            report.append(f"h vanishes at {xi_cross}")
        t_a = [rng.uniform(-1.0, 1.0, size=4) for _ in range(n_axes)]
        sparse = [
            arr.reshape([1] * a + [4] + [1] * (n_axes - a - 1)) for a, arr in enumerate(t_a)
        ]
        coords = desc.substitute(xi, sparse)
        pts = np.stack([np.broadcast_to(c, (4,) * n_axes).ravel() for c in coords], axis=-1)
        dists = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        np.fill_diagonal(dists, np.inf)
        if dists.min() < 1e-12:
            report.append(f"substitute is not injective in t at {xi_cross}")
        if algebra is not None:
            try:
                jump = jump_indices(algebra, xi)
            except IllConditionedError as exc:
                report.append(f"jump computation flagged at {xi_cross}: {exc}")
                continue
            if set(jump.indices) != set(desc.vanishing):
                report.append(
                    f"jump set {jump.indices} != vanishing slots {desc.vanishing} at {xi_cross}"
                )
                continue
            det = pfaffian_sq(jump)
            if abs(det - pf**2) > 1e-10 * max(1.0, pf**2):
                report.append(
                    f"pfaffian mismatch at {xi_cross}: det M_S = {det}, descriptor^2 = {pf**2}"
                )
    return report
