import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crossknit_sim.core import (
    ADC_FULL_SCALE,
    OPEN,
    Frame,
    ResistanceMatrix,
    SensorConfig,
    is_open,
    load_preset,
    network_resistance_from_reading,
    reading_from_network_resistance,
    series_margin_counts,
)


class TestPresets:
    def test_table_values(self):
        p4 = load_preset("4x4")
        assert (p4.rows, p4.cols) == (4, 4)
        assert p4.taxel_size_mm == 22.0 and p4.margin_width_mm == 3.0
        assert p4.r_ref_ohm == 50e3

        p316 = load_preset("3x16")
        assert (p316.rows, p316.cols) == (3, 16)
        assert p316.taxel_size_mm == 42.0 and p316.margin_width_mm == 5.0
        assert p316.r_ref_ohm == 120e3

        p8 = load_preset("8x8")
        assert (p8.rows, p8.cols) == (8, 8)
        assert p8.taxel_size_mm == 18.0 and p8.margin_width_mm == 3.0
        assert p8.r_ref_ohm == 120e3

        for p in (p4, p316, p8):
            assert p.adc_max_code == p.adc_full_scale - 1 == 1023
            assert p.vcc_volts == 5.0
            assert p.r_margin_ohm == 3000.0

    def test_unknown_preset(self):
        with pytest.raises(ValueError, match="unknown preset"):
            load_preset("9x9")

    def test_custom_toml(self, tmp_path):
        path = tmp_path / "tiny.toml"
        path.write_text(
            "rows = 2\ncols = 2\ntaxel_size_mm = 10.0\nmargin_width_mm = 2.0\n"
            "taxel_pitch_mm = 12.0\nr_margin_ohm = 1000.0\nr_ref_ohm = 20000.0\n"
        )
        config = load_preset(str(path))
        assert config.rows == 2 and config.r_ref_ohm == 20000.0
        assert config.surface_width_mm == 24.0  # defaults to the grid extent

    def test_grid_geometry_centered(self):
        p4 = load_preset("4x4")
        assert p4.grid_origin_mm == (22.5, 22.5)
        assert p4.taxel_center_mm(0, 0) == (35.0, 35.0)
        x0, y0, x1, y1 = p4.taxel_bounds_mm(0, 0)
        assert (x1 - x0, y1 - y0) == (22.0, 22.0)
        # surface midpoint sits between the two middle taxels
        assert p4.surface_width_mm / 2.0 == 72.5


class TestConfigValidation:
    def test_rejects_bad_geometry(self):
        with pytest.raises(ValueError):
            SensorConfig(rows=0, cols=4, taxel_size_mm=22, margin_width_mm=3,
                         taxel_pitch_mm=25, r_margin_ohm=3e3, r_ref_ohm=5e4)
        with pytest.raises(ValueError, match="pitch"):
            SensorConfig(rows=4, cols=4, taxel_size_mm=22, margin_width_mm=3,
                         taxel_pitch_mm=26, r_margin_ohm=3e3, r_ref_ohm=5e4)
        with pytest.raises(ValueError):
            SensorConfig(rows=4, cols=4, taxel_size_mm=22, margin_width_mm=3,
                         taxel_pitch_mm=25, r_margin_ohm=3e3, r_ref_ohm=0.0)
        with pytest.raises(ValueError, match="adc_max_code"):
            SensorConfig(rows=4, cols=4, taxel_size_mm=22, margin_width_mm=3,
                         taxel_pitch_mm=25, r_margin_ohm=3e3, r_ref_ohm=5e4,
                         adc_max_code=1022)

    def test_zero_margin_allowed(self):
        config = SensorConfig(rows=2, cols=2, taxel_size_mm=22, margin_width_mm=3,
                              taxel_pitch_mm=25, r_margin_ohm=0.0, r_ref_ohm=5e4)
        assert config.r_margin_ohm == 0.0


class TestConversions:
    def test_formula_midpoint(self):
        assert network_resistance_from_reading(512, 50e3) == pytest.approx(50e3)

    def test_formula_endpoint(self):
        assert network_resistance_from_reading(1024, 50e3) == 0.0

    def test_zero_reading_is_open(self):
        assert is_open(network_resistance_from_reading(0, 50e3))

    def test_out_of_range_reading(self):
        with pytest.raises(ValueError):
            network_resistance_from_reading(1025, 50e3)
        with pytest.raises(ValueError):
            network_resistance_from_reading(-1, 50e3)

    def test_open_divider_reads_zero(self):
        assert reading_from_network_resistance(OPEN, 50e3) == 0

    def test_short_circuit_clamps(self):
        assert reading_from_network_resistance(0.0, 50e3) == 1023

    def test_equal_divider(self):
        assert reading_from_network_resistance(50e3, 50e3) == 512

    @given(
        r_net=st.floats(min_value=math.log(1e3), max_value=math.log(1e7)).map(math.exp),
        r_ref=st.sampled_from([50e3, 120e3]),
    )
    @settings(max_examples=300)
    def test_roundtrip_quantization_bound(self, r_net, r_ref):
        # One ADC step of rounding error bounds the relative resistance error
        # by 512 / (tr * (1024 - tr_exact)); below r_ref that is looser than
        # 1/tr, at or above r_ref it tightens to at most 1/tr.
        tr = reading_from_network_resistance(r_net, r_ref)
        assert tr >= 1
        back = network_resistance_from_reading(tr, r_ref)
        rel = abs(back - r_net) / r_net
        tr_exact = ADC_FULL_SCALE * r_ref / (r_ref + r_net)
        assert rel <= 512.0 / (tr * (ADC_FULL_SCALE - tr_exact)) + 1e-12
        if r_net >= r_ref:
            assert rel <= 1.0 / tr + 1e-12

    @given(
        r_lo=st.floats(min_value=0, max_value=1e7),
        r_hi=st.floats(min_value=0, max_value=1e7),
    )
    @settings(max_examples=200)
    def test_reading_non_increasing(self, r_lo, r_hi):
        if r_lo > r_hi:
            r_lo, r_hi = r_hi, r_lo
        assert reading_from_network_resistance(r_lo, 50e3) >= reading_from_network_resistance(r_hi, 50e3)


class TestMarginCounts:
    def test_r32_sees_two_column_and_three_row_margins(self):
        # 1-based (row 3, col 2) reads 2 column- plus 3 row-margin resistors
        config = load_preset("4x4")
        assert series_margin_counts(config, 2, 1) == (2, 3)

    def test_nearest_and_farthest(self):
        config = load_preset("4x4")
        assert series_margin_counts(config, 0, 0) == (1, 1)
        assert series_margin_counts(config, 3, 3) == (4, 4)

    def test_sum_is_one_based_row_plus_col(self):
        config = load_preset("8x8")
        for i in range(8):
            for j in range(8):
                assert sum(series_margin_counts(config, i, j)) == (i + 1) + (j + 1)

    def test_out_of_range(self):
        config = load_preset("4x4")
        with pytest.raises(IndexError):
            series_margin_counts(config, 4, 0)


class TestResistanceMatrix:
    def test_all_open(self):
        m = ResistanceMatrix.all_open(load_preset("4x4"))
        assert m.shape == (4, 4)
        assert np.all(np.isinf(m.values))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            ResistanceMatrix(np.array([[1e3, -5.0]]))
        with pytest.raises(ValueError):
            ResistanceMatrix(np.array([[0.0]]))
        with pytest.raises(ValueError):
            ResistanceMatrix(np.array([[np.nan]]))

    def test_with_taxel_copies(self):
        m = ResistanceMatrix.all_open(load_preset("4x4"))
        m2 = m.with_taxel(1, 2, 5e4)
        assert is_open(m.values[1, 2])
        assert m2.values[1, 2] == 5e4


class TestFrame:
    def test_rejects_out_of_range_counts(self):
        with pytest.raises(ValueError):
            Frame(t_start_us=0, counts=np.array([[0, 2000]]))
        with pytest.raises(ValueError):
            Frame(t_start_us=0, counts=np.array([[-1, 0]]))

    def test_per_taxel_times_must_increase(self):
        counts = np.zeros((2, 2), dtype=int)
        Frame(t_start_us=0, counts=counts,
              per_taxel_time_us=np.array([[1.0, 2.0], [3.0, 4.0]]))
        with pytest.raises(ValueError, match="strictly increasing"):
            Frame(t_start_us=0, counts=counts,
                  per_taxel_time_us=np.array([[1.0, 2.0], [2.0, 4.0]]))
