import math

import numpy as np
import pytest

from noonsim.device import default_params, derive_couplings, mhz, tau_total
from noonsim.experiments import fidelity
from noonsim.lindblad import IntegratorConfig
from noonsim.protocol import (
    PULSE_EG_STAGE1,
    PULSE_EG_STAGE2,
    PULSE_FE_STAGE2,
    RETUNE_IDLE,
    SWAP_A_GE,
    SWAP_B_FE,
    Schedule,
    build_schedule,
    ideal_intermediate_state,
    ideal_noon_state,
    initial_state,
    protocol_space,
    run_protocol,
    schedule_matches_total_time,
)
from noonsim.qspace import (
    LEVEL_E,
    LEVEL_F,
    LEVEL_G,
    DimensionError,
    HilbertSpace,
    overlap,
)

KIND_TO_POINT = {
    SWAP_A_GE: "swap",
    SWAP_B_FE: "swap",
    PULSE_EG_STAGE1: "pulse",
    PULSE_FE_STAGE2: "pulse",
    PULSE_EG_STAGE2: "pulse",
}


class TestSchedule:
    def test_n1_pattern(self, params):
        d = derive_couplings(params)
        sched = build_schedule(1, d, params)
        kinds = [s.kind for s in sched.segments]
        assert kinds == [RETUNE_IDLE, SWAP_A_GE, RETUNE_IDLE,
                         PULSE_EG_STAGE2, SWAP_B_FE, RETUNE_IDLE]

    def test_n3_stage1_swap_durations(self):
        p = default_params(g_mhz=1.8)
        sched = build_schedule(3, derive_couplings(p), p)
        swaps = [s.duration * 1e9 for s in sched.segments if s.kind == SWAP_A_GE]
        assert swaps == [pytest.approx(138.9, abs=0.05),
                         pytest.approx(98.2, abs=0.05),
                         pytest.approx(80.2, abs=0.05)]

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_segment_count(self, n, params):
        sched = build_schedule(n, derive_couplings(params), params)
        assert len(sched.segments) == 4 * n + 2
        idles = [s for s in sched.segments if s.kind == RETUNE_IDLE]
        assert len(idles) == 3

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_total_duration_identity(self, n, params):
        d = derive_couplings(params)
        sched = build_schedule(n, d, params)
        assert schedule_matches_total_time(sched, d, params)
        assert sched.total_duration == pytest.approx(tau_total(n, d, params), rel=1e-12)

    def test_stage_clocks_continuous(self, params):
        sched = build_schedule(3, derive_couplings(params), params)
        for stage in (1, 2):
            clock = 0.0
            for seg in sched.segments:
                if seg.stage != stage or seg.kind == RETUNE_IDLE:
                    continue
                assert seg.clock_start == pytest.approx(clock, rel=1e-12)
                clock += seg.duration

    def test_pattern_regression_n2(self, params):
        # stage 1: swap,pulse,swap; stage 2: swap,pulse, then eg-pulse,swap
        sched = build_schedule(2, derive_couplings(params), params)
        kinds = [s.kind for s in sched.segments]
        assert kinds == [
            RETUNE_IDLE,
            SWAP_A_GE, PULSE_EG_STAGE1, SWAP_A_GE,
            RETUNE_IDLE,
            SWAP_B_FE, PULSE_FE_STAGE2, PULSE_EG_STAGE2, SWAP_B_FE,
            RETUNE_IDLE,
        ]

    def test_invalid_n(self, params):
        with pytest.raises(ValueError):
            build_schedule(0, derive_couplings(params), params)


class TestIdealStates:
    def test_initial_state(self):
        space = HilbertSpace(3, 3)
        psi = initial_state(space)
        assert overlap(space.basis_ket(LEVEL_F, 0, 0), psi) == pytest.approx(1 / math.sqrt(2))
        assert overlap(space.basis_ket(LEVEL_E, 0, 0), psi) == pytest.approx(1 / math.sqrt(2))

    def test_noon_n1_amplitudes(self):
        space = HilbertSpace(3, 3)
        psi = ideal_noon_state(1, space)
        amp = -1j / math.sqrt(2)
        assert overlap(space.basis_ket(LEVEL_E, 0, 1), psi) == pytest.approx(amp)
        assert overlap(space.basis_ket(LEVEL_E, 1, 0), psi) == pytest.approx(amp)
        assert np.linalg.norm(psi) == pytest.approx(1.0)
        assert overlap(space.basis_ket(LEVEL_G, 0, 0), psi) == 0

    def test_noon_truncation_guard(self):
        space = HilbertSpace(3, 3)
        with pytest.raises(DimensionError):
            ideal_noon_state(2, space)   # |2> would be the top retained level

    def test_first_swap_checkpoint(self):
        # after the first stage-1 swap: (|f,0,0> - i|g,1,0>)/sqrt(2)
        space = HilbertSpace(4, 4)
        psi = ideal_intermediate_state(2, space, 1, 1, "swap")
        assert overlap(space.basis_ket(LEVEL_F, 0, 0), psi) == pytest.approx(1 / math.sqrt(2))
        assert overlap(space.basis_ket(LEVEL_G, 1, 0), psi) == pytest.approx(-1j / math.sqrt(2))

    def test_stage1_last_pulse_checkpoint(self):
        # after stage-1 step N-1: (|f,0,0> + (-i)^{N-1}|e,N-1,0>)/sqrt(2)
        n = 3
        space = HilbertSpace(6, 6)
        psi = ideal_intermediate_state(n, space, 1, n - 1, "pulse")
        assert overlap(space.basis_ket(LEVEL_F, 0, 0), psi) == pytest.approx(1 / math.sqrt(2))
        assert overlap(space.basis_ket(LEVEL_E, n - 1, 0), psi) == \
            pytest.approx((-1j) ** (n - 1) / math.sqrt(2))

    def test_stage2_last_swap_before_final_checkpoint(self):
        # after stage-2 step N-1: ((-i)^{N-1}|f,0,N-1> + (-i)^N|g,N,0>)/sqrt(2)
        n = 3
        space = HilbertSpace(6, 6)
        psi = ideal_intermediate_state(n, space, 2, n - 1, "pulse")
        assert overlap(space.basis_ket(LEVEL_F, 0, n - 1), psi) == \
            pytest.approx((-1j) ** (n - 1) / math.sqrt(2))
        assert overlap(space.basis_ket(LEVEL_G, n, 0), psi) == \
            pytest.approx((-1j) ** n / math.sqrt(2))

    def test_final_checkpoint_equals_target(self):
        space = HilbertSpace(5, 5)
        psi = ideal_intermediate_state(3, space, 2, 3, "swap")
        np.testing.assert_allclose(psi, ideal_noon_state(3, space), atol=1e-15)

    def test_inconsistent_checkpoints_rejected(self):
        space = HilbertSpace(5, 5)
        with pytest.raises(ValueError):
            ideal_intermediate_state(1, space, 1, 1, "pulse")   # no stage-1 pulse at N=1
        with pytest.raises(ValueError):
            ideal_intermediate_state(1, space, 1, 2, "swap")    # step beyond N
        with pytest.raises(ValueError):
            ideal_intermediate_state(3, space, 3, 1, "swap")    # no stage 3
        with pytest.raises(ValueError):
            ideal_intermediate_state(3, space, 1, 1, "idle")    # bad point


class TestIdealRun:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_final_fidelity(self, n, params):
        res = run_protocol(n, params, mode="ideal")
        target = ideal_noon_state(n, protocol_space(n, params))
        assert fidelity(res.rho_final, target) > 0.9999

    def test_every_checkpoint(self, params):
        n = 3
        res = run_protocol(n, params, mode="ideal", record_checkpoints=True)
        space = protocol_space(n, params)
        assert len(res.checkpoints) == 4 * n - 1
        for seg, psi in res.checkpoints:
            expected = ideal_intermediate_state(n, space, seg.stage,
                                                seg.step_index,
                                                KIND_TO_POINT[seg.kind])
            assert abs(overlap(expected, psi)) ** 2 > 1 - 1e-8

    def test_invalid_mode(self, params):
        with pytest.raises(ValueError):
            run_protocol(1, params, mode="exact")


class TestFullRun:
    def test_smoke_and_diagnostics(self):
        from tests.conftest import fast_device_config

        p = default_params(**fast_device_config())
        res = run_protocol(1, p, mode="full")
        assert res.max_trace_drift < 1e-6
        assert res.min_eig > -1e-6
        assert res.physicality_problems() == []
        assert len(res.segments) == 6
        assert res.rho_final.shape == (protocol_space(1, p).total_dim,) * 2

    def test_deterministic(self):
        from tests.conftest import fast_device_config

        p = default_params(**fast_device_config())
        r1 = run_protocol(1, p, mode="full")
        r2 = run_protocol(1, p, mode="full")
        np.testing.assert_array_equal(r1.rho_final, r2.rho_final)

    @pytest.mark.slow
    def test_fidelity_monotone_in_rates(self):
        # doubling any single decay rate cannot improve the fidelity
        cfg = IntegratorConfig(samples_per_fastest_period=20)
        p0 = default_params(g_mhz=2.2, gab_ratio=2.0)
        target = ideal_noon_state(2, protocol_space(2, p0))
        f0 = fidelity(run_protocol(2, p0, cfg, mode="full").rho_final, target)
        for field in ("kappa_a", "kappa_b", "gamma_fe", "gamma_eg",
                      "gamma_phi_f", "gamma_phi_e"):
            p = p0.with_overrides(**{field: 2 * getattr(p0, field)})
            f = fidelity(run_protocol(2, p, cfg, mode="full").rho_final, target)
            assert f <= f0 + 1e-9, field
