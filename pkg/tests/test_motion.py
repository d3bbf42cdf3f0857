"""Motion-group transform: kernel probes, Plancherel constancy, inequality."""

import numpy as np
import pytest

from groupft.errors import AliasingError, SpectralTailError, ZeroFieldError
from groupft.fields import MomentSpec, gaussian_packet, l2_norm_sq, make_grid
from groupft.motion import (
    PLANCHEREL_C2,
    OperatorMatrix,
    make_lambda_grid,
    mn_derivative_bound_slack,
    mn_derivative_identity_residual,
    mn_ft,
    mn_hs_norm_sq,
    mn_hs_profile,
    mn_plancherel_ratio,
    mn_uncertainty,
    motion_corpus,
    motion_field,
    pi_matrix_element,
)

from .oracles import bessel_j


@pytest.fixture(scope="module")
def grid():
    return make_grid(2, [6.0, 6.0], [64, 64])


@pytest.fixture(scope="module")
def corpus(grid):
    return motion_corpus(grid, 128, 5, 4)


@pytest.fixture(scope="module")
def lgrid():
    return make_lambda_grid(16.0, panels=6, nodes_per_panel=10)


def radial_field(grid, n_theta=64):
    g = gaussian_packet(grid)
    return motion_field(grid, np.repeat(g.values[..., None], n_theta, axis=-1))


class TestKernel:
    def test_single_point_probe_vs_bessel(self):
        rng = np.random.default_rng(0)
        for _ in range(40):
            lam = rng.uniform(0.3, 3.0)
            r = rng.uniform(0.05, 10.0 / lam)
            phi = rng.uniform(0.0, 2 * np.pi)
            z = (r * np.cos(phi), r * np.sin(phi))
            m, n = int(rng.integers(-8, 9)), int(rng.integers(-8, 9))
            got = abs(pi_matrix_element(lam, z, m, n, 128))
            want = abs(float(bessel_j(n - m, lam * r)))
            assert got == pytest.approx(want, abs=1e-6)

    def test_zero_field(self, grid):
        f = motion_field(grid, np.zeros(grid.counts + (16,)))
        assert np.all(mn_ft(f, 1.0, 4).matrix == 0)

    def test_radial_field_is_diagonal(self, grid):
        op = mn_ft(radial_field(grid), 1.3, 8)
        off = np.array(op.matrix)
        np.fill_diagonal(off, 0.0)
        assert np.max(np.abs(off)) <= 1e-8

    def test_linearity(self, grid, corpus):
        f, g = corpus[0], corpus[1]
        comb = motion_field(grid, 1.5 * f.values - 0.5j * g.values)
        lhs = mn_ft(comb, 1.0, 8).matrix
        rhs = 1.5 * mn_ft(f, 1.0, 8).matrix - 0.5j * mn_ft(g, 1.0, 8).matrix
        assert np.max(np.abs(lhs - rhs)) <= 1e-12

    def test_rejects_bad_lambda_and_truncation(self, grid):
        f = radial_field(grid, n_theta=16)
        with pytest.raises(ValueError):
            mn_ft(f, -1.0, 4)
        with pytest.raises(AliasingError):
            mn_ft(f, 1.0, 8)  # needs 2M+2 = 18 > 16 samples


class TestHSNorm:
    def test_zero(self):
        op = OperatorMatrix(1.0, 2, np.zeros((5, 5)))
        assert mn_hs_norm_sq(op) == 0.0

    def test_identity(self):
        op = OperatorMatrix(1.0, 3, np.eye(7))
        assert mn_hs_norm_sq(op) == 7.0

    def test_trace_identity(self, grid, corpus):
        op = mn_ft(corpus[0], 1.0, 8)
        trace = float(np.trace(op.matrix @ op.matrix.conj().T).real)
        assert mn_hs_norm_sq(op) == pytest.approx(trace, rel=1e-12)

    def test_truncation_monotone_and_cauchy(self, corpus):
        f = corpus[0]
        vals = [mn_hs_profile(f, [3.0], m)[0] for m in (4, 8, 16, 32)]
        assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))
        assert abs(vals[-1] - vals[-2]) <= 1e-6 * vals[-1]


class TestPlancherel:
    def test_constancy_across_corpus(self, corpus, lgrid):
        ratios = [mn_plancherel_ratio(f, lgrid, 16) for f in corpus]
        mean = np.mean(ratios)
        assert all(abs(r - mean) <= 0.02 * mean for r in ratios)

    def test_dilated_pair_same_ratio(self, grid, lgrid):
        thetas = 2 * np.pi * np.arange(64) / 64
        mode = np.exp(1j * thetas)
        g1 = gaussian_packet(grid).values[..., None] * mode
        g2 = gaussian_packet(grid, widths=[0.5, 0.5]).values[..., None] * mode
        r1 = mn_plancherel_ratio(motion_field(grid, g1), lgrid, 16)
        r2 = mn_plancherel_ratio(motion_field(grid, g2), lgrid, 16)
        assert abs(r1 - r2) <= 0.02 * r1

    def test_kappa_is_two_pi_for_this_convention(self, corpus, lgrid):
        # e^{i lambda <.,.>} against e^{-2 pi i <.,.>} costs exactly 2 pi
        r = mn_plancherel_ratio(corpus[0], lgrid, 16)
        assert r == pytest.approx(2.0 * np.pi, rel=1e-6)

    def test_zero_rejected(self, grid, lgrid):
        f = motion_field(grid, np.zeros(grid.counts + (16,)))
        with pytest.raises(ZeroFieldError):
            mn_plancherel_ratio(f, lgrid, 8)

    def test_tail_diagnostic(self, corpus):
        tiny = make_lambda_grid(0.5, panels=2, nodes_per_panel=4)
        with pytest.raises(SpectralTailError):
            mn_plancherel_ratio(corpus[0], tiny, 8)


class TestDerivativeIdentity:
    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_residual_small(self, corpus, lam):
        assert mn_derivative_identity_residual(corpus[0], lam, 16) <= 1e-3

    def test_gaussian_times_mode(self, grid):
        thetas = 2 * np.pi * np.arange(64) / 64
        vals = gaussian_packet(grid).values[..., None] * np.exp(1j * thetas)
        f = motion_field(grid, vals)
        assert mn_derivative_identity_residual(f, 1.0, 16) <= 1e-3

    def test_zero_field_residual_zero(self, grid):
        f = motion_field(grid, np.zeros(grid.counts + (16,)))
        assert mn_derivative_identity_residual(f, 1.0, 4) == 0.0

    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_proof_bound(self, corpus, lam):
        for f in corpus[:2]:
            assert mn_derivative_bound_slack(f, lam, 16) >= -1e-6


class TestUncertainty:
    def test_gaussian_bump(self, grid, lgrid):
        vals = np.repeat(gaussian_packet(grid).values[..., None], 64, axis=-1)
        f = motion_field(grid, vals)
        terms = mn_uncertainty(f, MomentSpec(1.0, 1.0), lgrid, 16)
        assert terms.ratio >= 1.0

    def test_corpus_lattice(self, corpus, lgrid):
        from groupft.motion import mn_hs_profile

        for f in corpus[:3]:
            profile = mn_hs_profile(f, lgrid.nodes, 16)
            for a in (1.0, 2.0):
                for b in (1.0, 2.0):
                    terms = mn_uncertainty(f, MomentSpec(a, b), lgrid, 16, profile=profile)
                    assert terms.ratio >= 1.0 - 1e-4

    def test_zero_rejected(self, grid, lgrid):
        f = motion_field(grid, np.zeros(grid.counts + (16,)))
        with pytest.raises(ZeroFieldError):
            mn_uncertainty(f, MomentSpec(1.0, 1.0), lgrid, 8)
