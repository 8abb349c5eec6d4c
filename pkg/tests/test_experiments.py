import math

import numpy as np
import pytest

from noonsim.device import default_params, mhz
from noonsim.experiments import (
    DEFAULT_G_MHZ,
    ResultRow,
    SweepSpec,
    _eval_point,
    coherence_scaled,
    fidelity,
    golden_section_maximize,
    sweep_n,
    sweep_t_g,
)
from noonsim.lindblad import IntegratorConfig
from noonsim.qspace import DimensionError, HilbertSpace, ket_to_dm
from tests.conftest import fast_device_config


@pytest.fixture
def space():
    return HilbertSpace(3, 3)


class TestFidelity:
    def test_pure_target(self, space):
        psi = space.basis_ket(1, 0, 1)
        assert fidelity(ket_to_dm(psi), psi) == pytest.approx(1.0)

    def test_orthogonal(self, space):
        psi = space.basis_ket(1, 0, 1)
        phi = space.basis_ket(1, 1, 0)
        assert fidelity(ket_to_dm(phi), psi) == pytest.approx(0.0)

    def test_even_mixture(self, space):
        psi = space.basis_ket(1, 0, 1)
        phi = space.basis_ket(1, 1, 0)
        rho = 0.5 * ket_to_dm(psi) + 0.5 * ket_to_dm(phi)
        assert fidelity(rho, psi) == pytest.approx(0.5)

    def test_two_code_paths_agree(self, space, rng):
        m = rng.standard_normal((27, 27)) + 1j * rng.standard_normal((27, 27))
        rho = m @ m.conj().T
        rho /= np.trace(rho)
        psi = rng.standard_normal(27) + 1j * rng.standard_normal(27)
        psi /= np.linalg.norm(psi)
        via_quadratic = fidelity(rho, psi)
        via_trace = float(np.trace(rho @ ket_to_dm(psi)).real)
        assert abs(via_quadratic - via_trace) < 1e-12

    def test_global_phase_invariance(self, space, rng):
        # the (-i)^N factor on the target never matters
        m = rng.standard_normal((27, 27)) + 1j * rng.standard_normal((27, 27))
        rho = m @ m.conj().T
        rho /= np.trace(rho)
        psi = rng.standard_normal(27) + 1j * rng.standard_normal(27)
        psi /= np.linalg.norm(psi)
        for n in (1, 2, 3, 4):
            assert fidelity(rho, (-1j) ** n * psi) == pytest.approx(fidelity(rho, psi))

    def test_rejects_unphysical(self, space):
        psi = space.basis_ket(0, 0, 0)
        with pytest.raises(ValueError):
            fidelity(3.0 * ket_to_dm(psi), psi)

    def test_shape_mismatch(self, space):
        with pytest.raises(DimensionError):
            fidelity(np.eye(4) / 4, space.basis_ket(0, 0, 0))


class TestGoldenSection:
    def test_parabola(self):
        x, f, evals = golden_section_maximize(lambda x: -(x - 2.0) ** 2, 0.0, 5.0, 1e-6)
        assert x == pytest.approx(2.0, abs=1e-5)
        assert f == pytest.approx(0.0, abs=1e-9)
        assert len(evals) > 5

    def test_cosine(self):
        x, _, _ = golden_section_maximize(math.cos, 2.0, 8.0, 1e-7)
        assert x == pytest.approx(2 * math.pi, abs=1e-6)

    def test_best_not_worse_than_endpoints(self):
        fn = lambda x: -(x - 1.3) ** 4 + 0.2 * x
        x, f, _ = golden_section_maximize(fn, 0.0, 4.0, 1e-4)
        assert f >= fn(0.0) and f >= fn(4.0)

    def test_nonfinite_objective_rejected(self):
        with pytest.raises(ValueError):
            golden_section_maximize(lambda x: math.nan, 0.0, 1.0, 1e-3)

    def test_bad_bracket(self):
        with pytest.raises(ValueError):
            golden_section_maximize(lambda x: x, 1.0, 0.0, 1e-3)


class TestCoherenceScaling:
    def test_reference_point_recovered_at_3us(self):
        p = default_params()
        scaled = coherence_scaled(p, 3e-6)
        assert scaled.gamma_phi_f == pytest.approx(p.gamma_phi_f, rel=1e-12)
        assert scaled.gamma_phi_e == pytest.approx(p.gamma_phi_e, rel=1e-12)
        assert scaled.gamma_fe == pytest.approx(p.gamma_fe, rel=1e-12)
        assert scaled.gamma_eg == pytest.approx(p.gamma_eg, rel=1e-12)
        assert scaled.kappa_a == p.kappa_a  # resonator losses stay put

    def test_t10_rule(self):
        scaled = coherence_scaled(default_params(), 10e-6)
        assert scaled.gamma_phi_f == pytest.approx(1e5)
        assert scaled.gamma_fe == pytest.approx(2e5)
        assert scaled.gamma_eg == pytest.approx(1e5)


class TestSweepSpecValidation:
    def test_empty_n(self):
        with pytest.raises(ValueError):
            SweepSpec(n_values=())

    def test_bad_keyword(self):
        with pytest.raises(ValueError):
            SweepSpec(n_values=(1,), g_values="optimal")

    def test_negative_g(self):
        with pytest.raises(ValueError):
            SweepSpec(n_values=(1,), g_values=(-mhz(1.0),))

    def test_bad_workers(self):
        with pytest.raises(ValueError):
            SweepSpec(n_values=(1,), workers=0)

    def test_default_couplings_table(self):
        assert DEFAULT_G_MHZ == {1: 3.9, 2: 2.2, 3: 1.8, 4: 1.5, 5: 1.3}


class TestSweepLogic:
    def test_grid_size_and_order(self, monkeypatch):
        calls = []

        def stub(args):
            n, ratio, g, t, _, _ = args
            calls.append((n, ratio, g))
            return ResultRow(n, ratio, g, 3e-6, 0.5, 1e-7, 0, 0, 0, 0)

        import noonsim.experiments as exp

        monkeypatch.setattr(exp, "_eval_point", stub)
        spec = SweepSpec(n_values=(3, 1, 2, 4, 5), gab_ratios=(2.0, 0.0, 1.0),
                         g_values="default", params=default_params())
        table = exp.sweep_n(spec)
        assert len(table) == 15
        keys = [(r.n, r.gab_ratio) for r in table]
        assert keys == sorted(keys)

    def test_default_g_lookup_fails_above_table(self):
        spec = SweepSpec(n_values=(6,), g_values="default", params=default_params())
        with pytest.raises(ValueError):
            sweep_n(spec)

    def test_error_rows_recorded(self):
        # an invalid override must produce an error row, not abort the sweep
        row = _eval_point((1, -2.0, mhz(50.0), None, default_params(), IntegratorConfig()))
        assert row.error is not None
        assert math.isnan(row.fidelity)

    def test_sweep_tg_needs_explicit_grids(self):
        spec = SweepSpec(n_values=(3,), g_values=(mhz(1.8),), params=default_params())
        with pytest.raises(ValueError):
            sweep_t_g(spec)


class TestSweepDeterminism:
    @pytest.mark.slow
    def test_serial_parallel_bitwise_identical(self):
        p = default_params(**fast_device_config())
        kwargs = dict(n_values=(1,), gab_ratios=(0.0, 2.0),
                      g_values=(mhz(40.0), mhz(50.0)), params=p)
        serial_1 = sweep_n(SweepSpec(**kwargs, workers=1))
        serial_2 = sweep_n(SweepSpec(**kwargs, workers=1))
        parallel = sweep_n(SweepSpec(**kwargs, workers=2))
        rows_s1 = [(r.n, r.gab_ratio, r.g, r.fidelity, r.tau) for r in serial_1]
        rows_s2 = [(r.n, r.gab_ratio, r.g, r.fidelity, r.tau) for r in serial_2]
        rows_p = [(r.n, r.gab_ratio, r.g, r.fidelity, r.tau) for r in parallel]
        assert rows_s1 == rows_s2 == rows_p
