"""Grids, sampled fields and the Euclidean Fourier transform.

Everything downstream (product groups, the motion group, nilpotent groups)
is built on complex fields sampled on a uniform box grid.  The transform
convention is

    fhat(xi) = int f(x) exp(-2*pi*i*<x, xi>) dx

throughout.  A grid over [-L, L)^n with N points per axis induces a dual
grid over [-N/(4L), N/(4L)) with spacing 1/(2L); with that pairing the
discrete transform below is an exactly unitary approximation of the
integral (Parseval holds to machine precision), so Plancherel defects
measured later are genuine quadrature/truncation effects and not FFT
bookkeeping.

A field may carry one trailing discrete axis (a compact-group coordinate)
with quadrature weights summing to 1; norms and moments sum over it, the
Fourier transform acts on the spatial axes only.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import AliasingError, DecayError

__all__ = [
    "Grid",
    "SampledField",
    "MomentSpec",
    "make_grid",
    "field_from_function",
    "gaussian_packet",
    "l2_norm_sq",
    "weighted_moment",
    "moment_boundary_fraction",
    "euclidean_ft",
    "inverse_euclidean_ft",
    "nudft_at",
    "spectral_partial",
    "test_corpus",
    "boundary_decay",
    "axis_band_fraction",
    "save_field",
    "load_field",
]


@dataclass(frozen=True)
class Grid:
    """Uniform lattice over the box prod_i [-L_i, L_i), left-closed.

    Attributes:
        half_extents: per-axis half width L_i.
        counts: per-axis sample count N_i (powers of two recommended).
    """

    half_extents: tuple[float, ...]
    counts: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.half_extents)

    @property
    def spacings(self) -> tuple[float, ...]:
        return tuple(2.0 * L / N for L, N in zip(self.half_extents, self.counts))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacings))

    @property
    def dual_spacings(self) -> tuple[float, ...]:
        return tuple(1.0 / (2.0 * L) for L in self.half_extents)

    @property
    def dual_half_extents(self) -> tuple[float, ...]:
        return tuple(N / (4.0 * L) for L, N in zip(self.half_extents, self.counts))

    def axis(self, i: int) -> np.ndarray:
        """Sample coordinates x_j = -L_i + j*h_i along axis i."""
        L = self.half_extents[i]
        N = self.counts[i]
        return -L + (2.0 * L / N) * np.arange(N)

    def axes(self) -> list[np.ndarray]:
        return [self.axis(i) for i in range(self.dim)]

    def dual(self) -> "Grid":
        """Grid of dual sample points induced by the discrete transform."""
        return Grid(self.dual_half_extents, self.counts)

    def radius_sq(self) -> np.ndarray:
        """|x|^2 on the full lattice, shape == counts."""
        r2 = np.zeros(self.counts)
        for i in range(self.dim):
            shape = [1] * self.dim
            shape[i] = self.counts[i]
            r2 = r2 + (self.axis(i) ** 2).reshape(shape)
        return r2


def make_grid(dim, half_extents, counts) -> Grid:
    """Validated Grid constructor.

    Raises ValueError for nonpositive extents, counts < 2 or a dimension
    mismatch between the argument lists.
    """
    if int(dim) < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    half_extents = tuple(float(L) for L in np.atleast_1d(half_extents))
    counts = tuple(int(N) for N in np.atleast_1d(counts))
    if len(half_extents) != dim or len(counts) != dim:
        raise ValueError(
            f"expected {dim} extents and counts, got {len(half_extents)} and {len(counts)}"
        )
    for L in half_extents:
        if not np.isfinite(L) or L <= 0.0:
            raise ValueError(f"half extents must be positive, got {L}")
    for N in counts:
        if N < 2:
            raise ValueError(f"sample counts must be >= 2, got {N}")
    return Grid(half_extents, counts)


@dataclass(frozen=True)
class SampledField:
    """Complex samples on a Grid, optionally crossed with a discrete group axis.

    ``values`` has shape ``grid.counts`` (plus one trailing axis of size
    ``len(group_weights)`` when a group coordinate is present).  Instances
    are immutable; the value array is marked read-only.
    """

    grid: Grid
    values: np.ndarray
    group_weights: np.ndarray | None = None

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.complex128)
        expected = tuple(self.grid.counts)
        if self.group_weights is not None:
            w = np.ascontiguousarray(self.group_weights, dtype=np.float64)
            if w.ndim != 1 or w.size < 1:
                raise ValueError("group_weights must be a 1-D array")
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise ValueError("group weights must be positive and finite")
            expected = expected + (w.size,)
            w.setflags(write=False)
            object.__setattr__(self, "group_weights", w)
        if vals.shape != expected:
            raise ValueError(f"values shape {vals.shape} does not match grid {expected}")
        if not np.all(np.isfinite(vals.view(np.float64))):
            raise ValueError("field contains NaN or Inf entries")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def has_group_axis(self) -> bool:
        return self.group_weights is not None


@dataclass(frozen=True)
class MomentSpec:
    """Exponent pair (a, b) for the position/frequency moments; both >= 1."""

    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and self.a >= 1.0):
            raise ValueError(f"a must be >= 1, got {self.a}")
        if not (np.isfinite(self.b) and self.b >= 1.0):
            raise ValueError(f"b must be >= 1, got {self.b}")


def field_from_function(grid: Grid, fn) -> SampledField:
    """Sample ``fn(x_1, ..., x_n)`` (vectorised over broadcast arrays)."""
    mesh = np.meshgrid(*grid.axes(), indexing="ij", sparse=True)
    vals = np.broadcast_to(np.asarray(fn(*mesh), dtype=np.complex128), grid.counts)
    return SampledField(grid, vals.copy())


def gaussian_packet(
    grid: Grid,
    centers=None,
    widths=None,
    modulations=None,
    hermite_axis: int | None = None,
    hermite_degree: int = 0,
) -> SampledField:
    """Product Gaussian wave packet, optionally times a Hermite-type factor.

    f(x) = H_d(sqrt(2*pi) u_k) * prod_i exp(-pi ((x_i-c_i)/w_i)^2 + 2*pi*i a_i x_i)

    with u_k = (x_k - c_k)/w_k on the designated axis.  This is the basic
    smooth, rapidly decaying test function; centers/widths/modulations
    default to 0 / 1 / 0 on every axis.
    """
    d = grid.dim
    centers = np.broadcast_to(0.0 if centers is None else centers, (d,)).astype(float)
    widths = np.broadcast_to(1.0 if widths is None else widths, (d,)).astype(float)
    modulations = np.broadcast_to(0.0 if modulations is None else modulations, (d,)).astype(float)
    vals = np.ones(grid.counts, dtype=np.complex128)
    for i in range(d):
        x = grid.axis(i)
        u = (x - centers[i]) / widths[i]
        fac = np.exp(-np.pi * u**2 + 2j * np.pi * modulations[i] * x)
        if hermite_axis == i and hermite_degree > 0:
            coeffs = [0.0] * hermite_degree + [1.0]
            fac = fac * np.polynomial.hermite.hermval(np.sqrt(2 * np.pi) * u, coeffs)
        shape = [1] * d
        shape[i] = grid.counts[i]
        vals = vals * fac.reshape(shape)
    return SampledField(grid, vals)


def _group_density(f: SampledField) -> np.ndarray:
    """|f|^2 with the group axis (if any) summed out against its weights."""
    dens = np.abs(f.values) ** 2
    if f.has_group_axis:
        dens = np.tensordot(dens, f.group_weights, axes=(-1, 0))
    return dens


def l2_norm_sq(f: SampledField) -> float:
    """Riemann-sum approximation of the squared L2 norm."""
    return float(_group_density(f).sum() * f.grid.cell_volume)


def weighted_moment(f: SampledField, exponent: float) -> float:
    """Quadrature of int |x|^exponent |f(x)|^2 dx (group axis summed).

    ``exponent`` must be nonnegative; exponent 0 reproduces l2_norm_sq
    exactly (0^0 is taken as 1).
    """
    if exponent < 0:
        raise ValueError(f"moment exponent must be >= 0, got {exponent}")
    dens = _group_density(f)
    r2 = f.grid.radius_sq()
    return float((r2 ** (exponent / 2.0) * dens).sum() * f.grid.cell_volume)


def moment_boundary_fraction(f: SampledField, exponent: float) -> float:
    """Fraction of the moment integrand mass carried by boundary cells.

    Large values mean the moment is dominated by the box edge and cannot
    be trusted (the underlying integral may diverge).
    """
    dens = _group_density(f) * f.grid.radius_sq() ** (exponent / 2.0)
    total = float(dens.sum())
    if total <= 0.0:
        return 0.0
    interior = dens[tuple(slice(1, -1) for _ in range(f.grid.dim))]
    return 1.0 - float(interior.sum()) / total


def _fft_phases(grid: Grid):
    """Per-axis (pre, post) phase vectors turning fftn into the box transform.

    With x_j = -L + j*h and xi_k = -W + k/(2L), W = N/(4L), one has
    exp(-2*pi*i x_j xi_k) = (-1)^j * (-i)^N * (-1)^k * exp(-2*pi*i jk/N);
    the sign vectors are exact, no rounded phases enter.
    """
    pres, posts = [], []
    for N in grid.counts:
        j = np.arange(N)
        pre = np.where(j % 2 == 0, 1.0, -1.0).astype(np.complex128)
        post = ((-1j) ** (N % 4)) * pre
        pres.append(pre)
        posts.append(post)
    return pres, posts


def _apply_axis_vectors(values: np.ndarray, vectors, dim: int) -> np.ndarray:
    out = values
    for i, vec in enumerate(vectors):
        shape = [1] * values.ndim
        shape[i] = len(vec)
        out = out * vec.reshape(shape)
    return out


def euclidean_ft(f: SampledField) -> SampledField:
    """Forward transform onto the dual grid.

    Approximates fhat(xi) = int f(x) exp(-2*pi*i<x,xi>) dx at the dual grid
    points; exact Parseval partner of inverse_euclidean_ft.  A group axis
    passes through untouched.
    """
    g = f.grid
    pres, posts = _fft_phases(g)
    vals = _apply_axis_vectors(f.values, pres, g.dim)
    vals = np.fft.fftn(vals, axes=tuple(range(g.dim)))
    vals = _apply_axis_vectors(vals, posts, g.dim) * g.cell_volume
    return SampledField(g.dual(), vals, f.group_weights)


def inverse_euclidean_ft(fhat: SampledField) -> SampledField:
    """Inverse of euclidean_ft; maps a dual-grid field back to the primal grid."""
    gdual = fhat.grid
    gprim = gdual.dual()
    pres, posts = _fft_phases(gprim)
    vals = _apply_axis_vectors(fhat.values, [np.conj(p) for p in posts], gdual.dim)
    vals = np.fft.ifftn(vals, axes=tuple(range(gdual.dim)))
    vals = _apply_axis_vectors(vals, pres, gdual.dim)
    vals = vals * (np.prod(gdual.counts) * gdual.cell_volume)
    return SampledField(gprim, vals, fhat.group_weights)


def _axis_phase(nodes: np.ndarray, coords: np.ndarray, sign: float) -> np.ndarray:
    return np.exp(sign * 2j * np.pi * np.outer(nodes, coords))


def tensor_dft(f: SampledField, axis_nodes, sign: float = -1.0) -> np.ndarray:
    """Direct transform on a tensor product of per-axis node lists.

    Returns sum_x f(x) exp(sign*2*pi*i<x, xi>) * cell_volume on the grid
    {xi} = axis_nodes[0] x ... x axis_nodes[d-1], evaluated by sequential
    axis contractions (no FFT, no interpolation).  Cost is one pass over
    the sample array per leading node axis.
    """
    if f.has_group_axis:
        raise ValueError("tensor_dft applies to spatial-only fields")
    T = f.values
    for i in range(f.grid.dim):
        ph = _axis_phase(np.asarray(axis_nodes[i], dtype=float), f.grid.axis(i), sign)
        # contract the current leading spatial axis; node axis lands at the end
        T = np.tensordot(T, ph, axes=(0, 1))
    return T * f.grid.cell_volume


def nudft_at(f: SampledField, points) -> np.ndarray:
    """Direct evaluation of the forward transform at arbitrary dual points.

    Same integral as euclidean_ft, summed term by term, so it agrees with
    the FFT path at dual grid points to roundoff.  Points outside the dual
    box are rejected: the grid cannot distinguish such frequencies from
    their aliases.
    """
    if f.has_group_axis:
        raise ValueError("nudft_at applies to spatial-only fields")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != f.grid.dim:
        raise ValueError(f"points must have {f.grid.dim} columns, got {pts.shape[1]}")
    W = np.asarray(f.grid.dual_half_extents)
    if np.any(np.abs(pts) > W * (1.0 + 1e-12)):
        raise AliasingError("evaluation point outside the dual box (aliasing unsafe)")
    out = np.empty(pts.shape[0], dtype=np.complex128)
    for start in range(0, pts.shape[0], 256):
        chunk = pts[start : start + 256]
        T = np.tensordot(_axis_phase(chunk[:, 0], f.grid.axis(0), -1.0), f.values, axes=(1, 0))
        for a in range(1, f.grid.dim):
            ph = _axis_phase(chunk[:, a], f.grid.axis(a), -1.0)
            T = np.einsum("cj...,cj->c...", T, ph)
        out[start : start + 256] = T
    return out * f.grid.cell_volume


def spectral_partial(f: SampledField, axis: int) -> SampledField:
    """Partial derivative along a spatial axis via the transform.

    Forward transform, multiply by 2*pi*i*xi_axis, transform back; accurate
    for fields that are smooth and decayed inside the box.
    """
    fhat = euclidean_ft(f)
    xi = fhat.grid.axis(axis)
    shape = [1] * fhat.values.ndim
    shape[axis] = xi.size
    vals = fhat.values * (2j * np.pi * xi).reshape(shape)
    return inverse_euclidean_ft(SampledField(fhat.grid, vals, fhat.group_weights))


def boundary_decay(f: SampledField) -> float:
    """max |f| over boundary faces divided by max |f| overall (0 for f == 0)."""
    mag = np.abs(f.values)
    peak = float(mag.max())
    if peak == 0.0:
        return 0.0
    worst = 0.0
    for i in range(f.grid.dim):
        for edge in (0, -1):
            idx = [slice(None)] * mag.ndim
            idx[i] = edge
            worst = max(worst, float(mag[tuple(idx)].max()))
    return worst / peak


def axis_band_fraction(f: SampledField, axis: int, cut: float, nodes: int = 64) -> float:
    """Fraction of spectral energy with |xi_axis| < cut.

    Uses the marginal dual density g(xi) = int |F_axis f(xi, x_rest)|^2 dx_rest
    evaluated by a direct 1-D transform on Gauss-Legendre nodes over
    [-cut, cut], so bands much narrower than the dual grid spacing are
    still resolved.
    """
    if f.has_group_axis:
        raise ValueError("axis_band_fraction applies to spatial-only fields")
    x, w = np.polynomial.legendre.leggauss(nodes)
    xi = cut * x
    ph = _axis_phase(xi, f.grid.axis(axis), -1.0) * f.grid.spacings[axis]
    vals = np.moveaxis(f.values, axis, 0)
    slab = np.tensordot(ph, vals, axes=(1, 0))  # (nodes, rest...)
    rest_vol = f.grid.cell_volume / f.grid.spacings[axis]
    dens = (np.abs(slab) ** 2).reshape(nodes, -1).sum(axis=1) * rest_vol
    band = float(np.dot(w * cut, dens))
    total = l2_norm_sq(f)  # Parseval: total spectral energy
    return band / total if total > 0 else 0.0


# ---------------------------------------------------------------------------
# test corpus
# ---------------------------------------------------------------------------

# boundary / dual decay targets used when drawing corpus parameters;
# exp(-pi*delta^2) <= 1e-11 for delta = 2.84
_DECAY_DELTA = 2.84


def _corpus_bounds(grid: Grid):
    """Feasible (width_lo, width_hi, c_max, a_max) per axis, or None."""
    out = []
    for L, W in zip(grid.half_extents, grid.dual_half_extents):
        c_max = L / 12.0
        a_max = min(W / 10.0, 0.75)
        w_lo = _DECAY_DELTA / (W - a_max)
        w_hi = (L - c_max) / _DECAY_DELTA
        if w_lo > w_hi:
            return None
        out.append((w_lo, w_hi, c_max, a_max))
    return out


def _draw_packet(grid: Grid, rng, hermite: bool) -> SampledField:
    bounds = _corpus_bounds(grid)
    if bounds is None:
        raise DecayError(
            "grid too coarse for the corpus decay margins "
            f"(counts {grid.counts}, extents {grid.half_extents})"
        )
    widths, centers, mods = [], [], []
    for w_lo, w_hi, c_max, a_max in bounds:
        lo = max(w_lo, min(0.7, w_hi))
        hi = min(w_hi, max(1.6, w_lo))
        widths.append(rng.uniform(lo, hi))
        centers.append(rng.uniform(-c_max, c_max))
        mods.append(rng.uniform(-a_max, a_max))
    if hermite:
        axis = int(rng.integers(grid.dim))
        deg = int(rng.integers(1, 3))
        # polynomial growth eats margin; shrink the width on that axis
        widths[axis] *= 0.85
        f = gaussian_packet(grid, centers, widths, mods, hermite_axis=axis, hermite_degree=deg)
    else:
        f = gaussian_packet(grid, centers, widths, mods)
    return f


def _draw_band_limited(grid: Grid, rng) -> SampledField | None:
    """Random dual coefficients on the inner quarter of the dual box, windowed.

    The window width and the mode-support margin are chosen so the spatial
    boundary decay stays below 1e-10 while the dual leakage outside the
    inner quarter stays below 1e-12 of the total energy; returns None when
    the grid's time-bandwidth product cannot support both.
    """
    d = grid.dim
    windows, supports = [], []
    for L, W, dxi in zip(grid.half_extents, grid.dual_half_extents, grid.dual_spacings):
        w_win = L / _DECAY_DELTA
        margin = 3.0 / w_win
        s_max = W / 4.0 - margin
        if s_max < 2.0 * dxi:
            return None
        windows.append(w_win)
        supports.append(s_max)
    coef = np.zeros(grid.counts, dtype=np.complex128)
    dual = grid.dual()
    mask = np.ones(grid.counts, dtype=bool)
    for i in range(d):
        shape = [1] * d
        shape[i] = grid.counts[i]
        mask &= (np.abs(dual.axis(i)) <= supports[i]).reshape(shape)
    n_modes = int(mask.sum())
    coef[mask] = rng.standard_normal(n_modes) + 1j * rng.standard_normal(n_modes)
    field = inverse_euclidean_ft(SampledField(dual, coef))
    window = gaussian_packet(grid, widths=windows)
    return SampledField(grid, field.values * window.values)


def test_corpus(grid: Grid, seed: int, count: int) -> list[SampledField]:
    """Deterministic-by-seed corpus of nonzero smooth decaying fields.

    Cycles through shifted/modulated Gaussians, Hermite-type polynomials
    times Gaussians, and windowed random band-limited fields (the latter
    replaced by another Gaussian packet on grids whose time-bandwidth
    product cannot meet the decay margins).  Every member is normalised to
    unit L2 norm.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    members = []
    for i in range(count):
        kind = i % 3
        if kind == 1:
            f = _draw_packet(grid, rng, hermite=True)
        elif kind == 2:
            f = _draw_band_limited(grid, rng)
            if f is None:
                f = _draw_packet(grid, rng, hermite=False)
        else:
            f = _draw_packet(grid, rng, hermite=False)
        scale = 1.0 / np.sqrt(l2_norm_sq(f))
        members.append(SampledField(grid, f.values * scale))
    return members


# ---------------------------------------------------------------------------
# serialization: flat row-major complex pairs behind a small header
# ---------------------------------------------------------------------------

_MAGIC = b"GFLD"
_VERSION = 1


def save_field(f: SampledField, path) -> None:
    """Write a field as header + row-major float64 (re, im) pairs."""
    with open(path, "wb") as fh:
        flags = 1 if f.has_group_axis else 0
        fh.write(_MAGIC)
        fh.write(struct.pack("<III", _VERSION, f.grid.dim, flags))
        for L, N in zip(f.grid.half_extents, f.grid.counts):
            fh.write(struct.pack("<dQ", L, N))
        if f.has_group_axis:
            fh.write(struct.pack("<Q", f.group_weights.size))
            fh.write(np.ascontiguousarray(f.group_weights).tobytes())
        fh.write(np.ascontiguousarray(f.values).tobytes())


def load_field(path) -> SampledField:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path}: not a groupft field file")
        version, dim, flags = struct.unpack("<III", fh.read(12))
        if version != _VERSION:
            raise ValueError(f"{path}: unsupported field file version {version}")
        extents, counts = [], []
        for _ in range(dim):
            L, N = struct.unpack("<dQ", fh.read(16))
            extents.append(L)
            counts.append(int(N))
        grid = make_grid(dim, extents, counts)
        weights = None
        shape = tuple(counts)
        if flags & 1:
            (k,) = struct.unpack("<Q", fh.read(8))
            weights = np.frombuffer(fh.read(8 * k), dtype=np.float64)
            shape = shape + (k,)
        n_vals = int(np.prod(shape))
        vals = np.frombuffer(fh.read(16 * n_vals), dtype=np.complex128).reshape(shape)
        return SampledField(grid, vals.copy(), weights)
