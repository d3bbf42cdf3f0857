"""Grid, transform, moment and corpus tests against closed-form oracles."""

import math

import numpy as np
import pytest

from groupft.errors import AliasingError
from groupft.fields import test_corpus as corpus
from groupft.fields import (
    SampledField,
    axis_band_fraction,
    boundary_decay,
    euclidean_ft,
    field_from_function,
    gaussian_packet,
    inverse_euclidean_ft,
    l2_norm_sq,
    load_field,
    make_grid,
    moment_boundary_fraction,
    nudft_at,
    save_field,
    spectral_partial,
    tensor_dft,
    weighted_moment,
)

# closed-form Gaussian moments for f(x) = exp(-pi x^2):
#   int exp(-2 pi x^2) dx            = 2^(-1/2)
#   int x^2 exp(-2 pi x^2) dx        = (1/(4 pi)) 2^(-1/2)
#   int x^4 exp(-2 pi x^2) dx        = 3 / (16 pi^2 sqrt(2))
GAUSS_L2 = 2.0**-0.5
GAUSS_X2 = GAUSS_L2 / (4.0 * np.pi)
GAUSS_X4 = 3.0 / (16.0 * np.pi**2 * np.sqrt(2.0))


@pytest.fixture(scope="module")
def grid1d():
    return make_grid(1, [8.0], [1024])


@pytest.fixture(scope="module")
def gauss1d(grid1d):
    return gaussian_packet(grid1d)


class TestMakeGrid:
    def test_spacing(self):
        g = make_grid(1, [8.0], [1024])
        assert g.spacings == (16.0 / 1024,)

    def test_dual_spacing(self):
        g = make_grid(2, [6.0, 6.0], [128, 128])
        assert g.dual_spacings == (1.0 / 12.0, 1.0 / 12.0)
        assert g.dual_half_extents == (128 / 24.0, 128 / 24.0)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            make_grid(1, [0.0], [64])
        with pytest.raises(ValueError):
            make_grid(1, [8.0], [1])
        with pytest.raises(ValueError):
            make_grid(2, [8.0], [64, 64])

    def test_dual_of_dual_is_identity(self):
        g = make_grid(2, [6.0, 4.0], [128, 64])
        assert g.dual().dual() == g


class TestNorms:
    def test_gaussian_l2(self, gauss1d):
        assert l2_norm_sq(gauss1d) == pytest.approx(GAUSS_L2, abs=1e-9)

    def test_zero_field(self, grid1d):
        z = SampledField(grid1d, np.zeros(grid1d.counts))
        assert l2_norm_sq(z) == 0.0

    def test_unit_box(self):
        g = make_grid(1, [4.0], [256])
        f = field_from_function(g, lambda x: (np.abs(x) <= 0.5).astype(complex))
        assert l2_norm_sq(f) == pytest.approx(1.0, abs=g.spacings[0])

    def test_moment_exponent_two(self, gauss1d):
        assert weighted_moment(gauss1d, 2.0) == pytest.approx(GAUSS_X2, abs=1e-7)

    def test_moment_exponent_four(self, gauss1d):
        assert weighted_moment(gauss1d, 4.0) == pytest.approx(GAUSS_X4, abs=1e-7)

    def test_moment_zero_field(self, grid1d):
        z = SampledField(grid1d, np.zeros(grid1d.counts))
        assert weighted_moment(z, 2.0) == 0.0

    def test_moment_rejects_negative_exponent(self, gauss1d):
        with pytest.raises(ValueError):
            weighted_moment(gauss1d, -1.0)

    def test_moment_exponent_zero_is_l2(self, gauss1d):
        assert weighted_moment(gauss1d, 0.0) == l2_norm_sq(gauss1d)


class TestEuclideanFT:
    def test_gaussian_self_dual(self, grid1d, gauss1d):
        fhat = euclidean_ft(gauss1d)
        xi = fhat.grid.axis(0)
        assert np.max(np.abs(fhat.values - np.exp(-np.pi * xi**2))) <= 1e-9

    def test_zero(self, grid1d):
        z = SampledField(grid1d, np.zeros(grid1d.counts))
        assert np.all(euclidean_ft(z).values == 0)

    def test_translation_modulation_law(self, grid1d):
        c = 0.75
        shifted = gaussian_packet(grid1d, centers=[c])
        fhat = euclidean_ft(shifted)
        xi = fhat.grid.axis(0)
        expected = np.exp(-2j * np.pi * c * xi) * np.exp(-np.pi * xi**2)
        assert np.max(np.abs(fhat.values - expected)) <= 1e-9

    def test_parseval_exact(self, gauss1d):
        fhat = euclidean_ft(gauss1d)
        assert abs(l2_norm_sq(fhat) - l2_norm_sq(gauss1d)) <= 1e-12

    def test_roundtrip(self, gauss1d):
        back = inverse_euclidean_ft(euclidean_ft(gauss1d))
        assert np.max(np.abs(back.values - gauss1d.values)) <= 1e-12

    def test_2d_gaussian(self):
        g = make_grid(2, [6.0, 6.0], [128, 128])
        f = gaussian_packet(g)
        fhat = euclidean_ft(f)
        xi = fhat.grid
        expected = np.exp(-np.pi * xi.radius_sq())
        assert np.max(np.abs(fhat.values - expected)) <= 1e-9


class TestNudft:
    def test_gaussian_off_grid(self, gauss1d):
        val = nudft_at(gauss1d, [[0.3]])[0]
        assert val == pytest.approx(np.exp(-np.pi * 0.09), abs=1e-9)

    def test_matches_fft_on_grid(self, gauss1d):
        fhat = euclidean_ft(gauss1d)
        xi = fhat.grid.axis(0)[::97]
        direct = nudft_at(gauss1d, xi[:, None])
        scale = np.max(np.abs(fhat.values))
        assert np.max(np.abs(direct - fhat.values[::97])) <= 1e-12 * scale

    def test_zero_field(self, grid1d):
        z = SampledField(grid1d, np.zeros(grid1d.counts))
        assert np.all(nudft_at(z, [[0.1], [0.2]]) == 0)

    def test_outside_dual_box_rejected(self, gauss1d):
        W = gauss1d.grid.dual_half_extents[0]
        with pytest.raises(AliasingError):
            nudft_at(gauss1d, [[W * 1.01]])

    def test_tensor_dft_matches_nudft(self):
        g = make_grid(2, [4.0, 4.0], [32, 32])
        f = gaussian_packet(g, centers=[0.2, -0.1])
        nodes = [np.array([-0.4, 0.3]), np.array([0.1, 0.7, -0.2])]
        block = tensor_dft(f, nodes)
        pts = [(a, b) for a in nodes[0] for b in nodes[1]]
        direct = nudft_at(f, pts).reshape(2, 3)
        assert np.max(np.abs(block - direct)) <= 1e-12


class TestSpectralPartial:
    def test_gaussian_derivative(self, grid1d, gauss1d):
        d = spectral_partial(gauss1d, 0)
        x = grid1d.axis(0)
        exact = -2.0 * np.pi * x * np.exp(-np.pi * x**2)
        rel = np.linalg.norm(d.values - exact) / np.linalg.norm(exact)
        assert rel <= 1e-6

    def test_windowed_sine(self):
        g = make_grid(1, [16.0], [2048])
        x = g.axis(0)
        f = SampledField(g, np.sin(x) * np.exp(-0.1 * x**2))
        d = spectral_partial(f, 0)
        exact = np.cos(x) * np.exp(-0.1 * x**2) - 0.2 * x * np.sin(x) * np.exp(-0.1 * x**2)
        rel = np.linalg.norm(d.values - exact) / np.linalg.norm(exact)
        assert rel <= 1e-5

    def test_constant_periodized(self, grid1d):
        f = SampledField(grid1d, np.ones(grid1d.counts))
        d = spectral_partial(f, 0)
        assert np.max(np.abs(d.values)) <= 1e-10

    def test_against_finite_differences(self, grid1d):
        # fourth-order central stencil as the independent derivative oracle;
        # band-limited members (every third) oscillate too fast for it
        h = grid1d.spacings[0]
        members = [f for i, f in enumerate(corpus(grid1d, 11, 6)) if i % 3 != 2]
        for f in members:
            d = spectral_partial(f, 0)
            v = f.values
            fd = (-np.roll(v, -2) + 8 * np.roll(v, -1) - 8 * np.roll(v, 1) + np.roll(v, 2)) / (
                12 * h
            )
            interior = slice(2, -2)
            rel = np.linalg.norm(d.values[interior] - fd[interior]) / np.linalg.norm(
                d.values[interior]
            )
            assert rel <= 1e-4


class TestCorpus:
    def test_members_nonzero(self, grid1d):
        fields = corpus(grid1d, 7, 3)
        assert len(fields) == 3
        assert all(l2_norm_sq(f) > 0 for f in fields)

    def test_deterministic(self, grid1d):
        a = corpus(grid1d, 7, 5)
        b = corpus(grid1d, 7, 5)
        assert all(np.array_equal(x.values, y.values) for x, y in zip(a, b))

    def test_boundary_decay(self, grid1d):
        assert all(boundary_decay(f) <= 1e-10 for f in corpus(grid1d, 13, 6))

    def test_band_limited_member_quarter_support(self, grid1d):
        f = corpus(grid1d, 7, 3)[2]
        fhat = euclidean_ft(f)
        xi = fhat.grid.axis(0)
        outside = np.abs(xi) > fhat.grid.half_extents[0] / 4.0
        leak = (np.abs(fhat.values[outside]) ** 2).sum() / (np.abs(fhat.values) ** 2).sum()
        assert leak <= 1e-12

    def test_plancherel_on_corpus(self, grid1d):
        for f in corpus(grid1d, 5, 6):
            n = l2_norm_sq(f)
            assert abs(l2_norm_sq(euclidean_ft(f)) - n) <= 1e-8 * n

    def test_2d_corpus(self):
        g = make_grid(2, [8.0, 8.0], [256, 256])
        for f in corpus(g, 2, 3):
            assert boundary_decay(f) <= 1e-10
            n = l2_norm_sq(f)
            assert abs(l2_norm_sq(euclidean_ft(f)) - n) <= 1e-8 * n


class TestDiagnostics:
    def test_boundary_fraction_flags_heavy_tails(self):
        g = make_grid(1, [8.0], [256])
        f = field_from_function(g, lambda x: 1.0 / (1.0 + x**2) + 0j)
        # x^4 /(1+x^2)^2 integrand grows toward the boundary
        assert moment_boundary_fraction(f, 4.0) > 1e-6
        assert moment_boundary_fraction(gaussian_packet(g), 2.0) < 1e-8

    def test_axis_band_fraction(self, grid1d):
        f = gaussian_packet(grid1d)  # dual density exp(-2 pi xi^2)
        got = axis_band_fraction(f, 0, 0.05)
        expected = math.erf(0.05 * np.sqrt(2 * np.pi))
        assert got == pytest.approx(expected, rel=1e-6)


class TestSerialization:
    def test_roundtrip(self, tmp_path, gauss1d):
        p = tmp_path / "f.gfld"
        save_field(gauss1d, p)
        back = load_field(p)
        assert back.grid == gauss1d.grid
        assert np.array_equal(back.values, gauss1d.values)

    def test_roundtrip_group_axis(self, tmp_path):
        g = make_grid(1, [4.0], [64])
        w = np.full(6, 1.0 / 6.0)
        vals = np.random.default_rng(0).standard_normal((64, 6)) * (1 + 0j)
        f = SampledField(g, vals, w)
        p = tmp_path / "fk.gfld"
        save_field(f, p)
        back = load_field(p)
        assert np.array_equal(back.values, f.values)
        assert np.array_equal(back.group_weights, w)

    def test_rejects_garbage(self, tmp_path):
        p = tmp_path / "bad.gfld"
        p.write_bytes(b"not a field")
        with pytest.raises(ValueError):
            load_field(p)
