"""Frequency-side machinery: grids, roots with their estimate bundle, flows."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wie import symbols
from wie.forcing import ForcingTerm, constant_profile, exponential_profile
from wie.quadrature import ExponentOverflowError
from wie.spectral import (
    FrequencyGrid,
    SpectralField,
    SpectralProblem,
    apriori_bound,
    el_residual,
    energy_physical,
    energy_spectral,
    inequality_report,
    l2_norm,
    minimizer_hat,
    real_field,
    root_data,
    root_margins,
    semigroup_solution,
    vl_norm,
)

MARGIN_KEYS = {
    "disc_sqrt_floor",
    "symbol_over_disc",
    "ratio_order",
    "ratio_cap",
    "fast_root_floor",
    "slow_root_cap",
    "slow_root_sqrt",
    "slow_root_symbol",
    "vieta_sum",
    "vieta_product",
}


def _grid(n=64, dx=0.25):
    return FrequencyGrid.uniform_fft(n, dx)


def _gaussian_problem(grid, symbol=None, forcing=None):
    kwargs = {} if forcing is None else {"forcing": forcing}
    return SpectralProblem(
        grid=grid,
        symbol=symbol if symbol is not None else symbols.classical(),
        initial_hat=np.exp(-0.5 * grid.nodes**2).astype(complex),
        **kwargs,
    )


class TestFrequencyGrid:
    def test_uniform_fft_layout(self):
        g = FrequencyGrid.uniform_fft(8, 0.5)
        np.testing.assert_allclose(g.nodes, 2.0 * math.pi * np.fft.fftfreq(8, d=0.5))
        np.testing.assert_allclose(g.weights, np.full(8, 2.0 * math.pi / 4.0))
        # default spatial window is centered at the origin
        np.testing.assert_allclose(g.x, -2.0 + 0.5 * np.arange(8))

    def test_plancherel_is_discrete_exact(self):
        g = _grid()
        rng = np.random.default_rng(7)
        for u in (
            np.exp(-0.5 * g.x**2),
            rng.standard_normal(g.n) + 1j * rng.standard_normal(g.n),
        ):
            lhs = g.dx * float(np.sum(np.abs(u) ** 2))
            rhs = float(np.sum(g.weights * np.abs(g.from_physical(u)) ** 2))
            assert rhs == pytest.approx(lhs, rel=1e-14)

    def test_transform_roundtrip(self):
        g = _grid()
        rng = np.random.default_rng(11)
        u = rng.standard_normal(g.n) + 1j * rng.standard_normal(g.n)
        back = g.to_physical(g.from_physical(u))
        assert np.abs(back - u).max() <= 1e-13 * np.abs(u).max()

    def test_gaussian_transform_pair(self):
        # exp(-x^2/2) is its own transform in this convention
        g = _grid()
        u_hat = g.from_physical(np.exp(-0.5 * g.x**2))
        assert np.abs(u_hat - np.exp(-0.5 * g.nodes**2)).max() <= 1e-13

    def test_conjugate_symmetry_residual(self):
        g = _grid()
        u_hat = g.from_physical(np.exp(-0.5 * g.x**2))
        assert g.conjugate_symmetry_residual(u_hat) <= 1e-14
        broken = u_hat.copy()
        broken[3] += 0.5j
        assert g.conjugate_symmetry_residual(broken) > 0.1

    def test_real_field_strips_or_refuses(self):
        g = _grid()
        u = np.exp(-0.5 * g.x**2)
        recovered = real_field(g.to_physical(g.from_physical(u)))
        assert not np.iscomplexobj(recovered)
        np.testing.assert_allclose(recovered, u, atol=1e-13)
        bad = g.from_physical(u)
        bad[3] += 0.5j
        with pytest.raises(ValueError, match="imaginary residue"):
            real_field(g.to_physical(bad))

    def test_explicit_grid_validation(self):
        with pytest.raises(ValueError, match="matching 1-d"):
            FrequencyGrid.explicit([0.0, 1.0], [1.0])
        with pytest.raises(ValueError, match="positive"):
            FrequencyGrid.explicit([0.0, 1.0], [1.0, 0.0])
        g = FrequencyGrid.explicit([0.0, 1.0, 2.0], [0.5, 1.0, 0.5])
        with pytest.raises(ValueError, match="uniform_fft"):
            g.to_physical(np.ones(3, dtype=complex))


class TestRootData:
    def test_refuses_deep_negative_symbol(self):
        with pytest.raises(ValueError, match=r"1 \+ 4\*eps\*symbol <= 1/2"):
            root_data(np.array([-1.0]), 0.2)

    def test_refuses_bad_scalars(self):
        with pytest.raises(ValueError, match="positive"):
            root_data(np.array([1.0]), 0.0)
        with pytest.raises(ValueError, match="capped at zero"):
            root_data(np.array([1.0]), 0.1, lower_bound=0.5)

    def test_margin_bundle_keys_and_signs(self):
        g = _grid()
        rd = root_data(g.nodes**2, 0.05)
        margins = root_margins(rd)
        assert set(margins) == MARGIN_KEYS
        for name, m in margins.items():
            assert np.asarray(m).min() >= -1e-9, name

    def test_inequality_report_clean(self):
        g = _grid(n=128, dx=0.125)
        rd = root_data(g.nodes**2, 0.01)
        report = inequality_report(rd)
        assert set(report) == MARGIN_KEYS
        for entry in report.values():
            assert entry["checked"] == 128
            assert entry["violations"] == 0

    @given(
        eps=st.floats(1e-5, 0.12),
        shift=st.floats(-0.9, 0.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_vieta_on_admissible_inputs(self, eps, shift):
        ell = np.array([shift, 0.0, 0.7, 12.0, 400.0])
        if float(1.0 + 4.0 * eps * ell.min()) <= 0.5:
            ell = ell[1:]
        rd = root_data(ell, eps, check=True)
        scale_sum = 1.0 / eps
        assert np.abs(rd.slow + rd.fast - 1.0 / eps).max() <= 1e-12 * scale_sum
        scale_prod = np.maximum(1.0, np.abs(ell) / eps)
        assert np.abs(rd.slow * rd.fast + ell / eps).max() <= float(
            (1e-12 * scale_prod).max()
        )


class TestSemigroup:
    def test_matches_closed_form(self):
        g = _grid()
        prob = _gaussian_problem(g)
        flow = semigroup_solution(prob)
        for t in (0.0, 0.37, 1.4):
            expected = np.exp(-g.nodes**2 * t) * prob.initial_hat
            assert np.abs(flow.value(t) - expected).max() <= 1e-14

    def test_derivative_is_generator_action(self):
        g = _grid()
        fc = ForcingTerm.from_multipliers(
            [(exponential_profile(0.7, -0.4), lambda xi: np.exp(-(xi**2)))]
        )
        prob = _gaussian_problem(g, forcing=fc)
        flow = semigroup_solution(prob)
        t = 0.52
        lhs = flow.derivative(t)
        rhs = -prob.symbol_values * flow.value(t) + prob.forcing_values(t)
        assert np.abs(lhs - rhs).max() <= 1e-14

    def test_constant_forcing_closed_form(self):
        g = _grid()
        c = 0.8
        fc = ForcingTerm.from_multipliers(
            [(constant_profile(c), lambda xi: np.exp(-(xi**2)))]
        )
        prob = _gaussian_problem(g, forcing=fc)
        flow = semigroup_solution(prob)
        t = 0.6
        ell = prob.symbol_values
        H = np.exp(-g.nodes**2)
        safe = np.where(ell > 0.0, ell, 1.0)
        ramp = np.where(ell > 0.0, (1.0 - np.exp(-ell * t)) / safe, t)
        expected = np.exp(-ell * t) * prob.initial_hat + c * H * ramp
        assert np.abs(flow.value(t) - expected).max() <= 1e-10

    def test_growing_mode_overflow_guard(self):
        g = _grid()
        unstable = symbols.from_table([0.0, 8.0], [-1.0, -1.0])
        flow = semigroup_solution(_gaussian_problem(g, symbol=unstable))
        with pytest.raises(ExponentOverflowError, match="exp\\(700\\)"):
            flow.value(800.0)


class TestSelectedMinimizer:
    def test_starts_at_initial_data(self):
        g = _grid()
        prob = _gaussian_problem(g)
        m = minimizer_hat(prob, 0.05)
        assert np.array_equal(m.value(0.0), prob.initial_hat)
        fc = ForcingTerm.from_multipliers(
            [(exponential_profile(0.7, -0.4), lambda xi: np.exp(-(xi**2)))]
        )
        forced = _gaussian_problem(g, forcing=fc)
        mf = minimizer_hat(forced, 0.05)
        dev = np.abs(mf.value(0.0) - forced.initial_hat).max()
        assert dev <= 1e-14 * np.abs(forced.initial_hat).max()

    def test_el_residual_small_and_second_order(self):
        g = _grid()
        fc = ForcingTerm.from_multipliers(
            [(exponential_profile(0.7, -0.4), lambda xi: np.exp(-(xi**2)))]
        )
        prob = _gaussian_problem(g, forcing=fc)
        m = minimizer_hat(prob, 0.05)
        res, scale = el_residual(m, prob, 0.5, h=1e-3)
        assert res <= 1e-5 * scale
        res_half, scale_half = el_residual(m, prob, 0.5, h=5e-4)
        assert (res / scale) / (res_half / scale_half) >= 3.5
        with pytest.raises(ValueError, match="centered stencil"):
            el_residual(m, prob, 1e-4, h=1e-3)

    def test_energy_at_most_semigroup_energy(self):
        g = _grid()
        fc = ForcingTerm.from_multipliers(
            [(exponential_profile(0.7, -0.4), lambda xi: np.exp(-(xi**2)))]
        )
        prob = _gaussian_problem(g, forcing=fc)
        for eps in (0.1, 0.02):
            m = minimizer_hat(prob, eps)
            flow = semigroup_solution(prob)
            j_min, crossed = energy_spectral(m.value, m.derivative, prob, eps)
            j_flow, _ = energy_spectral(flow.value, flow.derivative, prob, eps)
            assert crossed is None
            assert j_min <= j_flow + 1e-12

    def test_gap_to_semigroup_shrinks_with_eps(self):
        g = _grid()
        prob = _gaussian_problem(g)
        flow = semigroup_solution(prob)
        ell = prob.symbol_values

        def gap(eps):
            m = minimizer_hat(prob, eps)
            return max(
                vl_norm(m.value(float(t)) - flow.value(float(t)), g.weights, ell)
                for t in np.linspace(0.0, 1.0, 21)
            )

        assert gap(0.01) < 0.2 * gap(0.1)


class TestNormsAndBounds:
    def test_norm_literals(self):
        # 1*(1+0)*1 + 1*(1+1)*1 + 1*(1+4)*0.25 = 4.25
        got = vl_norm([1.0, 1.0j, 0.5], [1.0, 1.0, 1.0], [0.0, 1.0, 4.0])
        assert got == pytest.approx(2.0615528128088303, rel=1e-15)
        assert l2_norm([1.0, 1.0j, 0.5], [1.0, 1.0, 1.0]) == pytest.approx(1.5)

    def test_energy_routes_agree(self):
        g = _grid()
        fc = ForcingTerm.from_multipliers(
            [(exponential_profile(0.7, -0.4), lambda xi: np.exp(-(xi**2)))]
        )
        prob = _gaussian_problem(g, forcing=fc)
        eps = 0.05
        m = minimizer_hat(prob, eps)
        j_spec, _ = energy_spectral(m.value, m.derivative, prob, eps)
        j_phys, _ = energy_physical(m.value, m.derivative, prob, eps)
        assert j_phys == pytest.approx(j_spec, rel=1e-10)

    def test_apriori_bound_values(self):
        assert apriori_bound(0.0, 1.0, 1.0) == 4.0
        assert apriori_bound(-1.0, 1.0, 1.0) == pytest.approx(
            8.0 * math.e**2, rel=1e-13
        )
        with pytest.raises(ValueError, match="capped at zero"):
            apriori_bound(0.5, 1.0, 1.0)
        with pytest.raises(ValueError, match="nonnegative"):
            apriori_bound(0.0, -1.0, 1.0)
        with pytest.raises(ExponentOverflowError):
            apriori_bound(-400.0, 1.0, 1.0)


class TestSpectralField:
    def test_bytes_roundtrip_and_meta(self):
        g = _grid()
        prob = _gaussian_problem(g)
        m = minimizer_hat(prob, 0.05)
        times = [0.0, 0.1, 0.2]
        field = SpectralField.sample(m, g, times)
        blob = field.to_bytes()
        assert len(blob) == 16 * len(times) * g.n
        back = np.frombuffer(blob, dtype="<c16").reshape(len(times), g.n)
        assert np.array_equal(back, field.values)
        meta = field.meta()
        assert meta["shape"] == [3, 64]
        assert meta["times"] == [0.0, 0.1, 0.2]
        assert meta["frequencies"] == [float(x) for x in g.nodes]

    def test_problem_rejects_bad_inputs(self):
        g = _grid()
        with pytest.raises(ValueError, match="frequency-side"):
            SpectralProblem(
                grid=g,
                symbol=symbols.classical(),
                initial_hat=np.zeros(g.n, dtype=complex),
                forcing=ForcingTerm.from_vectors(
                    [(constant_profile(1.0), np.ones(2))]
                ),
            )
        with pytest.raises(ValueError, match="does not match the grid"):
            SpectralProblem(
                grid=g,
                symbol=symbols.classical(),
                initial_hat=np.zeros(g.n - 1, dtype=complex),
            )
