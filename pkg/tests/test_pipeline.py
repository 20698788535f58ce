import logging

import numpy as np
import pytest

from crossknit_sim.core import Frame, ResistanceMatrix, load_preset
from crossknit_sim.network import scan_frame_static
from crossknit_sim.pipeline import (
    CalibrationTable,
    ContactEvent,
    Grab,
    Push,
    calibrate,
    classify_gesture,
    deghost,
    detect_active,
    estimate_force,
    events_to_csv,
    extract_events,
    localize,
    segment,
)
from crossknit_sim.pressure import ContactPatch, Disk, PressureField, field_to_resistance


@pytest.fixture(scope="module")
def cfg4():
    return load_preset("4x4")


def frame_of(counts, t=0):
    return Frame(t_start_us=t, counts=np.asarray(counts, dtype=int))


def synthetic_samples(slope, intercept, taxel=(1, 1), forces=(5, 10, 15, 20)):
    samples = []
    for f in forces:
        counts = np.zeros((4, 4), dtype=int)
        counts[taxel] = round(slope * f + intercept)
        samples.append((frame_of(counts), taxel, float(f)))
    return samples


class TestCalibrate:
    def test_recovers_exact_line(self):
        table = calibrate(synthetic_samples(10.0, 30.0))
        cal = table.get(1, 1)
        assert cal.slope == pytest.approx(10.0, abs=1e-9)
        assert cal.intercept == pytest.approx(30.0, abs=1e-9)
        assert cal.r_squared == pytest.approx(1.0, abs=1e-12)
        assert cal.force_min_n == 5.0 and cal.force_max_n == 20.0

    def test_rank_deficient_marked_invalid(self):
        samples = synthetic_samples(10.0, 30.0, forces=(10, 10, 10))
        table = calibrate(samples)
        assert not table.get(1, 1).valid

    def test_json_roundtrip(self, tmp_path):
        table = calibrate(synthetic_samples(10.0, 30.0))
        path = tmp_path / "cal.json"
        table.save(str(path))
        loaded = CalibrationTable.load(str(path))
        assert loaded == table


class TestDetectSegment:
    def test_all_zero_none_active(self):
        assert not detect_active(frame_of(np.zeros((4, 4)))).any()

    def test_single_loaded_taxel(self):
        counts = np.zeros((4, 4))
        counts[2, 3] = 100
        active = detect_active(frame_of(counts))
        assert active.sum() == 1 and active[2, 3]

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            detect_active(frame_of(np.zeros((2, 2))), threshold=0)

    def test_threshold_one_counts_the_ghost(self, cfg4):
        matrix = (
            ResistanceMatrix.all_open(cfg4)
            .with_taxel(0, 2, 1e5)
            .with_taxel(1, 1, 1e5)
            .with_taxel(1, 2, 1e5)
        )
        frame = scan_frame_static(cfg4, matrix)
        assert detect_active(frame, threshold=1).sum() == 4  # trio plus ghost

    def test_diagonal_actives_stay_separate(self):
        active = np.array([[1, 0], [0, 1]], dtype=bool)
        comps = segment(active)
        assert len(comps) == 2

    def test_block_is_one_component(self):
        active = np.zeros((4, 4), dtype=bool)
        active[1:3, 1:3] = True
        comps = segment(active)
        assert len(comps) == 1
        assert sorted(comps[0]) == [(1, 1), (1, 2), (2, 1), (2, 2)]

    def test_component_order_by_top_left(self):
        active = np.zeros((4, 4), dtype=bool)
        active[3, 0] = active[0, 3] = active[1, 1] = True
        comps = segment(active)
        assert [c[0] for c in comps] == [(0, 3), (1, 1), (3, 0)]


class TestLocalize:
    def test_single_taxel_center(self, cfg4):
        counts = np.zeros((4, 4))
        counts[1, 2] = 77
        assert localize([(1, 2)], frame_of(counts), cfg4) == cfg4.taxel_center_mm(1, 2)

    def test_equal_pair_midpoint(self, cfg4):
        counts = np.zeros((4, 4))
        counts[1, 1] = counts[1, 2] = 200
        cx, cy = localize([(1, 1), (1, 2)], frame_of(counts), cfg4)
        x1 = cfg4.taxel_center_mm(1, 1)[0]
        x2 = cfg4.taxel_center_mm(1, 2)[0]
        assert cx == pytest.approx((x1 + x2) / 2)
        assert cy == pytest.approx(cfg4.taxel_center_mm(1, 1)[1])

    def test_empty_component_rejected(self, cfg4):
        with pytest.raises(ValueError):
            localize([], frame_of(np.zeros((4, 4))), cfg4)


class TestDeghost:
    def test_l_pattern_corner_split_and_flagged(self, cfg4):
        matrix = (
            ResistanceMatrix.all_open(cfg4)
            .with_taxel(0, 2, 1e5)
            .with_taxel(1, 1, 1e5)
            .with_taxel(1, 2, 1e5)
        )
        frame = scan_frame_static(cfg4, matrix)
        refined = deghost(segment(detect_active(frame)), frame)
        flagged = [comp for comp, f in refined if f]
        solid = [comp for comp, f in refined if not f]
        assert flagged == [[(0, 1)]]
        assert solid == [[(0, 2), (1, 1), (1, 2)]]

    def test_four_equal_contacts_not_flagged(self, cfg4):
        matrix = ResistanceMatrix.all_open(cfg4)
        for (i, j) in [(0, 0), (0, 2), (2, 0), (2, 2)]:
            matrix = matrix.with_taxel(i, j, 1e5)
        frame = scan_frame_static(cfg4, matrix)
        refined = deghost(segment(detect_active(frame)), frame)
        assert len(refined) == 4
        assert not any(f for _, f in refined)

    def test_single_contact_never_flagged(self, cfg4):
        matrix = ResistanceMatrix.all_open(cfg4).with_taxel(2, 2, 1e5)
        frame = scan_frame_static(cfg4, matrix)
        refined = deghost(segment(detect_active(frame)), frame)
        assert [f for _, f in refined] == [False]

    def test_two_or_fewer_active_never_flagged(self, cfg4):
        rng = np.random.default_rng(8)
        for _ in range(50):
            counts = np.zeros((4, 4), dtype=int)
            spots = rng.choice(16, size=rng.integers(1, 3), replace=False)
            for s in spots:
                counts[s // 4, s % 4] = rng.integers(10, 1024)
            frame = frame_of(counts)
            refined = deghost(segment(detect_active(frame)), frame)
            assert not any(f for _, f in refined)


class TestGesture:
    def _event(self, taxels, peak=200, ghost=False, force=None):
        return ContactEvent(
            component_id=0,
            taxels=tuple(taxels),
            centroid_mm=(50.0, 50.0),
            force_n=force,
            peak_reading=peak,
            ghost=ghost,
            t_us=0,
        )

    def test_empty_is_none(self, cfg4):
        assert classify_gesture([], cfg4) is None

    def test_single_taxel_is_push(self, cfg4):
        gesture = classify_gesture([self._event([(1, 1)])], cfg4)
        assert isinstance(gesture, Push)

    def test_large_component_is_grab(self, cfg4):
        taxels = [(i, j) for i in range(2) for j in range(3)]
        assert isinstance(classify_gesture([self._event(taxels)], cfg4), Grab)

    def test_joint_coverage_is_grab(self, cfg4):
        events = [
            self._event([(0, 0), (0, 1)]),
            self._event([(2, 0), (2, 1)]),
            self._event([(3, 2)]),
        ]  # 5 of 16 taxels >= 30%
        assert isinstance(classify_gesture(events, cfg4), Grab)

    def test_ghosts_ignored(self, cfg4):
        events = [self._event([(i, j) for i in range(3) for j in range(3)], ghost=True)]
        assert classify_gesture(events, cfg4) is None

    def test_palm_disk_on_8x8_is_grab(self):
        cfg = load_preset("8x8")
        field = PressureField(
            (ContactPatch(Disk(30.0), cfg.taxel_center_mm(3, 3), 45.0, "palm"),)
        )
        frame = scan_frame_static(cfg, field_to_resistance(field, cfg))
        events = extract_events(frame, cfg)
        assert isinstance(classify_gesture(events, cfg), Grab)


class TestEstimateForce:
    def test_zero_readings_zero_force(self):
        table = calibrate(synthetic_samples(10.0, 0.0))
        est = estimate_force([(1, 1)], frame_of(np.zeros((4, 4))), table)
        assert est == pytest.approx(0.0, abs=1e-9)

    def test_recovers_known_force(self):
        table = calibrate(synthetic_samples(10.0, 30.0))
        counts = np.zeros((4, 4), dtype=int)
        counts[1, 1] = round(10.0 * 12.0 + 30.0)
        est = estimate_force([(1, 1)], frame_of(counts), table)
        assert est == pytest.approx(12.0, abs=0.05)  # reading quantization

    def test_monotone_in_readings(self):
        table = calibrate(synthetic_samples(10.0, 30.0, taxel=(0, 0)))
        table2 = calibrate(
            synthetic_samples(10.0, 30.0, taxel=(0, 0))
            + synthetic_samples(8.0, 10.0, taxel=(0, 1))
        )
        counts = np.zeros((4, 4), dtype=int)
        counts[0, 0] = 100
        counts[0, 1] = 90
        base = estimate_force([(0, 0), (0, 1)], frame_of(counts), table2)
        for bump in ((0, 0), (0, 1)):
            higher = counts.copy()
            higher[bump] += 50
            assert estimate_force([(0, 0), (0, 1)], frame_of(higher), table2) >= base

    def test_split_contact_total_within_15_percent(self, cfg4):
        from crossknit_sim.demos import ramp_calibration

        table = ramp_calibration(cfg4, [(1, 1), (1, 2)])
        x1 = cfg4.taxel_center_mm(1, 1)[0]
        x2 = cfg4.taxel_center_mm(1, 2)[0]
        y = cfg4.taxel_center_mm(1, 1)[1]
        for force in (16.0, 20.0, 24.0):
            field = PressureField(
                (ContactPatch(Disk(10.0), ((x1 + x2) / 2, y), force, "split"),)
            )
            frame = scan_frame_static(cfg4, field_to_resistance(field, cfg4))
            events = extract_events(frame, cfg4, table)
            assert len(events) == 1 and events[0].taxels == ((1, 1), (1, 2))
            assert abs(events[0].force_n - force) / force <= 0.15

    def test_uncalibrated_members_skipped_with_warning(self, caplog):
        table = calibrate(synthetic_samples(10.0, 30.0))
        counts = np.zeros((4, 4), dtype=int)
        counts[1, 1] = 130
        counts[3, 3] = 500
        with caplog.at_level(logging.WARNING):
            est = estimate_force([(1, 1), (3, 3)], frame_of(counts), table)
        assert est == pytest.approx(10.0, abs=0.05)
        assert "uncalibrated" in caplog.text


class TestPipelineProperties:
    def test_translation_equivariance(self, cfg4):
        counts = np.zeros((4, 4), dtype=int)
        counts[1, 1], counts[1, 2] = 300, 150
        events = extract_events(frame_of(counts), cfg4)
        shifted = np.zeros((4, 4), dtype=int)
        shifted[2, 2], shifted[2, 3] = 300, 150
        events_shifted = extract_events(frame_of(shifted), cfg4)
        dx = events_shifted[0].centroid_mm[0] - events[0].centroid_mm[0]
        dy = events_shifted[0].centroid_mm[1] - events[0].centroid_mm[1]
        assert dx == pytest.approx(cfg4.taxel_pitch_mm)
        assert dy == pytest.approx(cfg4.taxel_pitch_mm)

    def test_localization_error_bounded_over_position_grid(self, cfg4):
        # single-disk contacts across the grid span localize within half a
        # pitch of the true indenter center
        y_lo = cfg4.taxel_center_mm(0, 0)[1]
        y_hi = cfg4.taxel_center_mm(3, 0)[1]
        x_lo = cfg4.taxel_center_mm(0, 0)[0]
        x_hi = cfg4.taxel_center_mm(0, 3)[0]
        worst = 0.0
        for x in np.linspace(x_lo, x_hi, 11):
            for y in np.linspace(y_lo, y_hi, 11):
                field = PressureField((ContactPatch(Disk(10.0), (x, y), 15.0, "p"),))
                frame = scan_frame_static(cfg4, field_to_resistance(field, cfg4))
                events = [e for e in extract_events(frame, cfg4) if not e.ghost]
                assert len(events) == 1
                err = np.hypot(
                    events[0].centroid_mm[0] - x, events[0].centroid_mm[1] - y
                )
                worst = max(worst, float(err))
        assert worst <= cfg4.taxel_pitch_mm / 2


class TestCsvExport:
    def test_csv_layout(self, cfg4):
        counts = np.zeros((4, 4), dtype=int)
        counts[0, 0] = 120
        events = extract_events(frame_of(counts, t=999), cfg4)
        text = events_to_csv(events)
        lines = text.strip().splitlines()
        assert lines[0] == "t_us,id,centroid_x_mm,centroid_y_mm,force_n,ghost,n_taxels"
        assert lines[1].startswith("999,0,35.000,35.000,,0,1")
