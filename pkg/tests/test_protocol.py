"""Protocol schedule, closed forms, stage checkpoints, and the ideal runner."""

from pathlib import Path

import numpy as np
import pytest

from qutricav.hilbert import basis_ket
from qutricav.linalg import norm_error
from qutricav.protocol import (
    EQUAL_WEIGHTS,
    CavityWindow,
    ClosedFormDomainError,
    ProtocolError,
    PulseSegment,
    RetuneIdle,
    WeightVector,
    apply_segment,
    build_schedule,
    closed_form_cavity,
    closed_form_oracle_check,
    closed_form_pulse,
    format_schedule,
    ideal_run,
    initial_state,
    phase_fixed,
    schedule_digest,
    segment_duration,
    stage_states,
    state_mismatch,
    target_state,
    total_time,
    verify_pulse_chains,
)

GOLDEN = Path(__file__).parent / "golden_schedule_serial.txt"


# ---------------------------------------------------------------------------
# schedule structure
# ---------------------------------------------------------------------------

def test_schedule_segment_counts():
    for mode in ("serial", "concurrent"):
        s = build_schedule(mode)
        assert s.count(CavityWindow) == 6
        assert s.count(RetuneIdle) == 8
        assert s.count(PulseSegment) == 10


def test_schedule_window_order_and_angles():
    s = build_schedule()
    windows = [seg for seg in s.segments if isinstance(seg, CavityWindow)]
    assert [w.qutrit for w in windows] == [1, 2, 1, 1, 2, 1]
    expected = [np.pi / 2, np.pi, 3 * np.pi / 2, np.pi / 2, np.pi, 3 * np.pi / 2]
    assert np.allclose([w.angle for w in windows], expected)


def test_schedule_pulse_angle_sums():
    s = build_schedule()
    pulses = [seg for seg in s.segments if isinstance(seg, PulseSegment)]
    total_01 = sum(p.angle for p in pulses if p.transition == "01")
    total_12 = sum(p.angle for p in pulses if p.transition == "12")
    assert total_01 == pytest.approx(7 * np.pi / 4)
    assert total_12 == pytest.approx(13 * np.pi / 4)
    windows = [seg for seg in s.segments if isinstance(seg, CavityWindow)]
    assert sum(w.angle for w in windows if w.qutrit == 1) == pytest.approx(4 * np.pi)
    assert sum(w.angle for w in windows if w.qutrit == 2) == pytest.approx(2 * np.pi)


def test_schedule_is_weight_independent_and_stable():
    # The builder takes no weights at all; repeated builds print identically.
    a = format_schedule(build_schedule())
    b = format_schedule(build_schedule())
    assert a == b
    assert schedule_digest(build_schedule()) == schedule_digest(build_schedule())


def test_schedule_matches_golden_file():
    assert format_schedule(build_schedule()) == GOLDEN.read_text()


def test_schedule_rejects_unknown_mode():
    with pytest.raises(ValueError):
        build_schedule("parallel")


def test_concurrent_mode_merges_stage5_and_stage7():
    s = build_schedule("concurrent")
    multi = [b for b in s.blocks if len(b.tracks) > 1]
    assert [b.stage for b in multi] == [5, 7]
    # same flat segment content as serial mode
    assert format_schedule(s) == format_schedule(build_schedule("serial"))


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def test_cavity_map_quarter_window(layout):
    # |1>|0_c> with angle pi/2 -> -i |0>|1_c>
    state = basis_ket(1, 0, 0, layout)
    out = closed_form_cavity(state, np.pi / 2, 1, layout)
    assert np.max(np.abs(out - (-1j) * basis_ket(0, 0, 1, layout))) < 1e-15


def test_cavity_map_half_window_sign(layout):
    # |0>|1_c> with angle pi -> -|0>|1_c>
    state = basis_ket(0, 0, 1, layout)
    out = closed_form_cavity(state, np.pi, 1, layout)
    assert np.max(np.abs(out + state)) < 1e-15


def test_cavity_map_three_quarter_window(layout):
    # |0>|1_c> with angle 3pi/2 -> +i |1>|0_c>
    state = basis_ket(0, 1, 1, layout)
    out = closed_form_cavity(state, 3 * np.pi / 2, 1, layout)
    assert np.max(np.abs(out - 1j * basis_ket(1, 1, 0, layout))) < 1e-14


def test_cavity_map_leaves_level2_alone(layout, rng):
    state = basis_ket(2, 0, 1, layout)
    for angle in rng.uniform(0, 2 * np.pi, size=5):
        assert np.array_equal(closed_form_cavity(state, angle, 1, layout), state)


def test_cavity_map_domain_errors(layout):
    with pytest.raises(ClosedFormDomainError):
        closed_form_cavity(basis_ket(0, 0, 2, layout), 0.3, 1, layout)
    with pytest.raises(ClosedFormDomainError):
        closed_form_cavity(basis_ket(1, 0, 1, layout), 0.3, 1, layout)
    # the same state is fine when the *other* qutrit is the target
    closed_form_cavity(basis_ket(1, 0, 1, layout), 0.3, 2, layout)


def test_cavity_map_composition_full_cycle(layout, rng):
    # pi/2 followed by 3pi/2 is the 2pi map, which is the identity.
    from qutricav.protocol import random_exchange_sector_state
    state = random_exchange_sector_state(1, layout, rng)
    partial = closed_form_cavity(state, np.pi / 2, 1, layout)
    full = closed_form_cavity(partial, 3 * np.pi / 2, 1, layout)
    assert np.max(np.abs(full - state)) < 1e-14


def test_pulse_map_known_rotations(layout):
    k = lambda a, b, c: basis_ket(a, b, c, layout)
    # 0-1 pulse, phi=-pi/2, angle pi/4: |0> -> (|0>+|1>)/sqrt2
    out = closed_form_pulse(k(0, 0, 0), "01", -np.pi / 2, np.pi / 4, 1, layout)
    assert np.max(np.abs(out - (k(0, 0, 0) + k(1, 0, 0)) / np.sqrt(2))) < 1e-15
    # 1-2 pulse, phi=-pi/2, angle pi/2: |1> -> |2>
    out = closed_form_pulse(k(0, 1, 0), "12", -np.pi / 2, np.pi / 2, 2, layout)
    assert np.max(np.abs(out - k(0, 2, 0))) < 1e-15
    # 1-2 pulse, phi=+pi/2, angle pi: |2> -> -|2>
    out = closed_form_pulse(k(2, 0, 0), "12", np.pi / 2, np.pi, 1, layout)
    assert np.max(np.abs(out + k(2, 0, 0))) < 1e-15
    # 0-1 pulse, phi=+pi/2, angle pi/2: |1> -> |0>
    out = closed_form_pulse(k(1, 0, 0), "01", np.pi / 2, np.pi / 2, 1, layout)
    assert np.max(np.abs(out - k(0, 0, 0))) < 1e-15


def test_pulse_map_spectators_untouched(layout):
    # 1-2 pulses never move level 0; cavity label rides along.
    state = basis_ket(0, 0, 2, layout)
    out = closed_form_pulse(state, "12", 0.4, 1.1, 2, layout)
    assert np.array_equal(out, state)


def test_closed_form_vs_propagator_random_cases(layout):
    report = closed_form_oracle_check(layout, cases=200, seed=42)
    assert report.max_cavity_error <= 1e-10
    assert report.max_pulse_error <= 1e-10


# ---------------------------------------------------------------------------
# weights and reference states
# ---------------------------------------------------------------------------

def test_weight_vector_normalization():
    w = WeightVector(0.6, 0.48, 0.64)
    assert w.norm_error < 1e-15          # 0.36 + 0.2304 + 0.4096 = 1 exactly
    with pytest.raises(ValueError):
        WeightVector(0.0, 0.0, 0.0).normalized()
    w2 = WeightVector(2.0, 0.0, 0.0).normalized()
    assert w2.alpha == pytest.approx(1.0)


def test_target_state_examples(layout):
    t = target_state(WeightVector(1.0, 0.0, 0.0), layout)
    assert np.array_equal(t, basis_ket(0, 0, 0, layout))
    t = target_state(EQUAL_WEIGHTS, layout)
    expected = (basis_ket(0, 0, 0, layout) + basis_ket(1, 1, 0, layout)
                + basis_ket(2, 2, 0, layout)) / np.sqrt(3)
    assert np.max(np.abs(t - expected)) < 1e-15
    w = WeightVector(0.6, 0.48, 0.64)
    t = target_state(w, layout)
    assert t[layout.flat_index(0, 0, 0)] == pytest.approx(0.6)
    assert t[layout.flat_index(1, 1, 0)] == pytest.approx(0.48)
    assert t[layout.flat_index(2, 2, 0)] == pytest.approx(0.64)
    assert norm_error(t) < 1e-12


def test_initial_state_level_ordering(layout):
    # gamma sits on level 1 and beta on level 2 of qutrit 1
    w = WeightVector(0.6, 0.48, 0.64)
    s = initial_state(w, layout)
    assert s[layout.flat_index(0, 0, 0)] == pytest.approx(0.6)    # alpha
    assert s[layout.flat_index(1, 0, 0)] == pytest.approx(0.64)   # gamma
    assert s[layout.flat_index(2, 0, 0)] == pytest.approx(0.48)   # beta


def test_initial_state_requires_normalized_weights(layout):
    with pytest.raises(ValueError):
        initial_state(WeightVector(1.0, 1.0, 0.0), layout)


def test_stage_states_are_normalized(layout, rng):
    for _ in range(5):
        w = WeightVector.random(rng)
        for stage, state in stage_states(w, layout).items():
            assert norm_error(state) < 1e-12, f"stage {stage}"


# ---------------------------------------------------------------------------
# ideal runner
# ---------------------------------------------------------------------------

def test_ideal_run_alpha_branch_is_invariant(layout):
    result = ideal_run(WeightVector(1.0, 0.0, 0.0), layout)
    assert np.max(np.abs(result.final - basis_ket(0, 0, 0, layout))) < 1e-12


def test_ideal_run_equal_weights(layout):
    result = ideal_run(EQUAL_WEIGHTS, layout)
    assert result.overlap_with(target_state(EQUAL_WEIGHTS, layout)) >= 1 - 1e-12


def test_ideal_run_checkpoint_after_stage2(layout, rng):
    # Independent statement of the post-stage-2 superposition: the gamma
    # branch has moved onto the photon with a -i factor.
    w = WeightVector.random(rng)
    result = ideal_run(w, layout)
    s = 1 / np.sqrt(2)
    k = lambda a, b, c: basis_ket(a, b, c, layout)
    expected = (
        s * w.alpha * (k(0, 0, 0) + k(0, 2, 0))
        + s * w.beta * (k(2, 0, 0) + k(2, 2, 0))
        - 1j * s * w.gamma * (k(0, 0, 1) + k(0, 2, 1))
    )
    assert state_mismatch(result.checkpoints[2], expected) < 1e-12


def test_ideal_run_all_checkpoints_random_weights(layout, rng):
    for _ in range(10):
        w = WeightVector.random(rng)
        for path in ("closed_form", "oracle"):
            result = ideal_run(w, layout, path=path)  # check=True validates stages
            refs = stage_states(w, layout)
            for stage, state in result.checkpoints.items():
                assert state_mismatch(state, refs[stage]) < 1e-9


def test_ideal_run_norm_preserved_each_segment(layout, rng):
    w = WeightVector.random(rng)
    state = initial_state(w, layout)
    for seg in build_schedule().segments:
        state = apply_segment(state, seg, layout)
        assert norm_error(state) <= 1e-12


def test_ideal_run_concurrent_equals_serial(layout, rng):
    w = WeightVector.random(rng)
    serial = ideal_run(w, layout, schedule=build_schedule("serial"))
    conc = ideal_run(w, layout, schedule=build_schedule("concurrent"))
    assert np.max(np.abs(serial.final - conc.final)) < 1e-12


def test_ideal_run_detects_schedule_fault(layout):
    from qutricav.cli import _drop_stage7_pulse
    broken = _drop_stage7_pulse(build_schedule())
    with pytest.raises(ProtocolError):
        ideal_run(EQUAL_WEIGHTS, layout, schedule=broken)


def test_phase_fixed_alignment(layout, rng):
    state = np.asarray(rng.normal(size=5) + 1j * rng.normal(size=5))
    state /= np.linalg.norm(state)
    rotated = state * np.exp(1j * 1.23)
    assert np.max(np.abs(phase_fixed(state) - phase_fixed(rotated))) < 1e-14
    assert state_mismatch(state, rotated) < 1e-14


# ---------------------------------------------------------------------------
# timing
# ---------------------------------------------------------------------------

def test_total_time_reference_point():
    w = 2 * np.pi * 100e6
    assert total_time(w, w, w, w, 1.5e-9) * 1e9 == pytest.approx(67.0, abs=1e-9)


def test_total_time_without_idles():
    # term-wise: 8.75 + 16.25 + 20 + 10 ns
    w = 2 * np.pi * 100e6
    assert total_time(w, w, w, w, 0.0) * 1e9 == pytest.approx(55.0, abs=1e-9)


def test_total_time_scales_linearly():
    w = 2 * np.pi * 100e6
    assert total_time(w / 2, w / 2, w / 2, w / 2, 0.0) * 1e9 == pytest.approx(110.0)
    with pytest.raises(ValueError):
        total_time(0.0, w, w, w, 0.0)


def test_segment_durations(layout):
    from qutricav.protocol import ProtocolParams
    p = ProtocolParams.reference()
    assert segment_duration(CavityWindow(1, np.pi / 2), p) * 1e9 == pytest.approx(2.5)
    assert segment_duration(PulseSegment(2, "01", 0.0, np.pi / 4), p) * 1e9 == pytest.approx(1.25)
    assert segment_duration(RetuneIdle(1.5e-9), p) == pytest.approx(1.5e-9)


# ---------------------------------------------------------------------------
# pulse chains
# ---------------------------------------------------------------------------

def test_pulse_chains_all_arrows(layout):
    report = verify_pulse_chains(layout)
    assert len(report.arrows) == 16
    assert report.max_error <= 1e-10
    assert report.passed()
