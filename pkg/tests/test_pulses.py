import numpy as np
import pytest

from rbtlab.groups import a4_elements, clifford24_elements, rotation_unitary
from rbtlab.pulses import (
    DuffingModel,
    PulseSpec,
    RotationSpec,
    atomic_pulse_for,
    axis_angle_from_unitary,
    drag_correction,
    gaussian_envelope,
    phase_ramp,
    simulate_duffing,
    simulate_qubit,
    unitary_infidelity,
)
from rbtlab.pauli import superop_from_unitary

DURATION = 33.3e-9
HAD_AXIS = np.array([1.0, 0.0, 1.0]) / np.sqrt(2.0)
HADAMARD = rotation_unitary(HAD_AXIS, np.pi)


def hadamard_pulse(n_samples, order):
    dt = DURATION / n_samples
    envelope = gaussian_envelope(DURATION / 4.0, dt, np.pi * HAD_AXIS[0])
    return phase_ramp(envelope, dt, RotationSpec(axis=HAD_AXIS, angle=np.pi), order)


class TestGaussianEnvelope:
    def test_zero_angle_all_zero(self):
        env = gaussian_envelope(8e-9, 1e-9, 0.0)
        assert env.shape == (32,)
        assert np.all(env == 0.0)

    def test_halving_dt_doubles_samples_preserves_area(self):
        coarse = gaussian_envelope(8e-9, 1e-9, 1.7)
        fine = gaussian_envelope(8e-9, 0.5e-9, 1.7)
        assert fine.size == 2 * coarse.size
        assert coarse.sum() * 1e-9 == pytest.approx(1.7, abs=1e-12)
        assert fine.sum() * 0.5e-9 == pytest.approx(1.7, abs=1e-12)

    def test_device_scale_peak_amplitude(self):
        # pi-area pulse over 33.3 ns: peak drive in the tens of MHz
        env = gaussian_envelope(DURATION / 4.0, DURATION / 40.0, np.pi)
        peak_mhz = env.max() / (2 * np.pi) / 1e6
        assert 10.0 < peak_mhz < 60.0

    def test_rejects_coarse_step(self):
        with pytest.raises(ValueError, match="step"):
            gaussian_envelope(1e-9, 2e-9, 1.0)


class TestPhaseRamp:
    def test_in_plane_axis_has_no_ramp(self):
        env = gaussian_envelope(8e-9, 1e-9, np.pi)
        pulse = phase_ramp(env, 1e-9, RotationSpec(axis=(1.0, 0.0, 0.0), angle=np.pi), 2)
        assert np.all(pulse.phases == 0.0)
        assert pulse.frame_update == 0.0

    def test_azimuthal_axis_is_constant_offset(self):
        env = gaussian_envelope(8e-9, 1e-9, np.pi)
        pulse = phase_ramp(env, 1e-9, RotationSpec(axis=(0.0, 1.0, 0.0), angle=np.pi), 2)
        assert np.allclose(pulse.phases, np.pi / 2)

    def test_hadamard_order2_precision_at_forty_samples(self):
        pulse = hadamard_pulse(40, order=2)
        assert unitary_infidelity(simulate_qubit(pulse), HADAMARD) < 1e-6

    def test_order1_at_least_ten_times_worse(self):
        worse = unitary_infidelity(simulate_qubit(hadamard_pulse(40, 1)), HADAMARD)
        better = unitary_infidelity(simulate_qubit(hadamard_pulse(40, 2)), HADAMARD)
        assert worse >= 10.0 * better

    def test_frame_update_equals_z_projection(self):
        pulse = hadamard_pulse(40, 2)
        assert pulse.frame_update == pytest.approx(np.pi * HAD_AXIS[2], rel=1e-12)

    def test_pure_z_axis_rejected(self):
        env = gaussian_envelope(8e-9, 1e-9, 1.0)
        with pytest.raises(ValueError, match="frame update"):
            phase_ramp(env, 1e-9, RotationSpec(axis=(0.0, 0.0, 1.0), angle=0.5), 2)

    def test_rotation_spec_requires_unit_axis(self):
        with pytest.raises(ValueError, match="unit"):
            RotationSpec(axis=(1.0, 1.0, 0.0), angle=0.3)


class TestSimulateQubit:
    def test_zero_pulse_is_identity(self):
        pulse = PulseSpec(dt=1e-9, amplitudes=np.zeros(0), phases=np.zeros(0))
        assert np.array_equal(simulate_qubit(pulse), np.eye(2))

    def test_resonant_pi_pulse_is_x_gate(self):
        pulse = PulseSpec(
            dt=1e-9, amplitudes=np.full(16, np.pi / 16e-9), phases=np.zeros(16)
        )
        target = rotation_unitary((1.0, 0.0, 0.0), np.pi)
        assert unitary_infidelity(simulate_qubit(pulse), target) < 1e-12

    def test_halving_dt_monotonically_improves(self):
        infids = [
            unitary_infidelity(simulate_qubit(hadamard_pulse(n, 2)), HADAMARD)
            for n in (10, 20, 40, 80)
        ]
        assert all(a > b for a, b in zip(infids, infids[1:]))


class TestTrotterOrders:
    def test_error_magnitude_slopes(self):
        # convergence order read off the coherent error magnitude (the square
        # root of the average infidelity): first order 1, midpoint rule 2
        counts = np.array([8, 16, 32, 64, 128])
        slopes = {}
        for order in (1, 2):
            infids = [
                unitary_infidelity(simulate_qubit(hadamard_pulse(n, order)), HADAMARD)
                for n in counts
            ]
            x = np.log(DURATION / counts)
            y = 0.5 * np.log(infids)
            slopes[order] = np.polyfit(x, y, 1)[0]
        assert abs(slopes[1] - 1.0) <= 0.3
        assert abs(slopes[2] - 2.0) <= 0.3


class TestAxisAngleExtraction:
    def test_identity(self):
        axis, angle = axis_angle_from_unitary(np.eye(2))
        assert angle == 0.0

    def test_round_trip_all_cliffords(self, rng):
        for el in clifford24_elements():
            axis, angle = axis_angle_from_unitary(el.unitary)
            rebuilt = rotation_unitary(axis, angle) if angle else np.eye(2)
            # compare as channels (global phase dropped)
            assert np.abs(
                superop_from_unitary(rebuilt) - el.superop
            ).max() < 1e-10

    def test_global_phase_ignored(self, rng):
        u = rotation_unitary((0.0, 1.0, 0.0), 1.1)
        axis, angle = axis_angle_from_unitary(np.exp(1j * 0.7) * u)
        assert angle == pytest.approx(1.1, abs=1e-10)
        assert np.allclose(axis, (0.0, 1.0, 0.0), atol=1e-10)


class TestAtomicPulses:
    def test_identity_is_zero_length(self):
        pulse = atomic_pulse_for(a4_elements()[0])
        assert pulse.n_samples == 0
        assert pulse.frame_update == 0.0

    def test_pure_z_is_frame_update_only(self):
        # element 4 of the twirl group is the half turn about Z
        pulse = atomic_pulse_for(a4_elements()[3])
        assert pulse.n_samples == 0
        assert abs(pulse.frame_update) == pytest.approx(np.pi, abs=1e-12)

    def test_body_diagonal_element_axis_angle(self):
        pulse = atomic_pulse_for(a4_elements()[4], n_samples=40)
        axis, angle = axis_angle_from_unitary(a4_elements()[4].unitary)
        assert angle == pytest.approx(2 * np.pi / 3, abs=1e-12)
        assert np.allclose(np.abs(axis), 1 / np.sqrt(3), atol=1e-12)
        assert pulse.n_samples == 40

    def test_round_trip_infidelity_under_1e5(self):
        for el in clifford24_elements():
            pulse = atomic_pulse_for(el, n_samples=40, order=2)
            infid = unitary_infidelity(simulate_qubit(pulse), el.unitary)
            assert infid < 1e-5

    def test_zero_length_count(self):
        zero_length = sum(
            atomic_pulse_for(el).n_samples == 0 for el in clifford24_elements()
        )
        assert zero_length == 4  # identity plus three Z rotations


class TestDuffing:
    MODEL = DuffingModel(levels=5, anharmonicity=-2 * np.pi * 200e6)

    def test_zero_drive_identity_no_leakage(self):
        pulse = PulseSpec(dt=1e-9, amplitudes=np.zeros(8), phases=np.zeros(8))
        superop, leakage = simulate_duffing(pulse, self.MODEL)
        assert np.abs(superop - np.eye(4)).max() < 1e-12
        assert leakage == pytest.approx(0.0, abs=1e-12)

    def test_drag_improves_hadamard_at_every_step_count(self):
        target = superop_from_unitary(HADAMARD)
        for n in (8, 16, 32, 64):
            pulse = hadamard_pulse(n, 2)
            s_off, _ = simulate_duffing(pulse, self.MODEL, drag=False)
            s_on, _ = simulate_duffing(pulse, self.MODEL, drag=True)
            infid_off = 1 - (np.tensordot(target, s_off, axes=2) + 2) / 6
            infid_on = 1 - (np.tensordot(target, s_on, axes=2) + 2) / 6
            assert infid_on < infid_off

    def test_larger_anharmonicity_approaches_ideal_qubit(self):
        target = superop_from_unitary(HADAMARD)
        infids = []
        for alpha_mhz in (100, 400, 1600):
            model = DuffingModel(levels=5, anharmonicity=-2 * np.pi * alpha_mhz * 1e6)
            pulse = hadamard_pulse(64, 2)
            superop, _ = simulate_duffing(pulse, model, drag=True)
            infids.append(1 - (np.tensordot(target, superop, axes=2) + 2) / 6)
        assert infids[0] > infids[1] > infids[2]

    def test_drag_correction_adjusts_frame(self):
        pulse = hadamard_pulse(32, 2)
        dragged = drag_correction(pulse, self.MODEL)
        assert dragged.frame_update != pulse.frame_update
        assert dragged.amplitudes is pulse.amplitudes or np.array_equal(
            dragged.amplitudes, pulse.amplitudes
        )

    def test_leakage_reported(self):
        pulse = hadamard_pulse(8, 2)
        _, leakage = simulate_duffing(pulse, self.MODEL, drag=False)
        assert 0.0 < leakage < 0.1


class TestFrameThreading:
    def test_composition_with_threaded_frame_update(self):
        # playing pulse B after pulse A, with A's frame update folded into
        # B's phases and final frame, reproduces the product gate
        ax2 = np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)
        u2 = rotation_unitary(ax2, 2 * np.pi / 3)
        n = 200
        dt = DURATION / n
        env1 = gaussian_envelope(DURATION / 4.0, dt, np.pi * HAD_AXIS[0])
        p1 = phase_ramp(env1, dt, RotationSpec(axis=HAD_AXIS, angle=np.pi), 2)
        env2 = gaussian_envelope(DURATION / 4.0, dt, 2 * np.pi / 3 * np.hypot(ax2[0], ax2[1]))
        p2 = phase_ramp(env2, dt, RotationSpec(axis=ax2, angle=2 * np.pi / 3), 2)
        p1_no_frame = PulseSpec(dt=dt, amplitudes=p1.amplitudes, phases=p1.phases)
        p2_threaded = PulseSpec(
            dt=dt,
            amplitudes=p2.amplitudes,
            phases=p2.phases - p1.frame_update,
            frame_update=p2.frame_update + p1.frame_update,
        )
        total = simulate_qubit(p2_threaded) @ simulate_qubit(p1_no_frame)
        assert unitary_infidelity(total, u2 @ HADAMARD) < 1e-8
