import csv

import numpy as np
import pytest

from phasesync import (
    ContractError,
    DegeneratePhaseError,
    FilterBand,
    Month,
    Panel,
    PipelineConfig,
    RecessionCalendar,
    RegimeSpec,
    SyncSeries,
    TimeSeries,
    annotate_recessions,
    gen_regime_panel,
    normalize_di,
    ratio_above,
    round_half_up,
    run_pipeline,
    sync_index_windowed,
    write_metadata,
)

BAND = FilterBand(4, 18)


def small_panel(members=3, n=240, seed=0, start=Month(1980, 1)):
    spec = RegimeSpec(segments=((n, "uncoupled"),), seed=seed)
    return gen_regime_panel(members, spec, start=start)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestPipelineConfig:
    def test_defaults(self):
        config = PipelineConfig(band=BAND, window=13)
        assert config.thresholds == (0.7, 0.8)
        assert config.detrend and config.trim

    @pytest.mark.parametrize("kwargs", [
        {"window": 12},
        {"window": 1},
        {"thresholds": ()},
        {"thresholds": (0.8, 0.7)},
        {"thresholds": (0.7, 0.7)},
        {"thresholds": (1.5,)},
        {"amplitude_floor": -1.0},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ContractError):
            PipelineConfig(band=BAND, **{"window": 13, **kwargs})

    def test_window_must_fit_after_trim(self):
        # N=60, upper=18 -> margin 3, usable 54
        PipelineConfig(band=BAND, window=53).validate_for(60)
        with pytest.raises(ContractError, match="window 55"):
            PipelineConfig(band=BAND, window=55).validate_for(60)


class TestRunPipeline:
    def test_pair_count_three_members(self):
        result = run_pipeline(small_panel(3), PipelineConfig(band=BAND, window=13))
        assert result.n_pairs == 3
        assert set(result.pair_gamma) == {("m01", "m02"), ("m01", "m03"), ("m02", "m03")}

    def test_pair_count_formula(self):
        result = run_pipeline(small_panel(6), PipelineConfig(band=BAND, window=13))
        assert result.n_pairs == 15

    def test_needs_two_series(self):
        member = small_panel(2).series[0]
        with pytest.raises(ContractError, match="need >= 2 series"):
            run_pipeline(Panel((member,)), PipelineConfig(band=BAND, window=13))

    def test_deterministic(self):
        config = PipelineConfig(band=BAND, window=13)
        panel = small_panel(4)
        a = run_pipeline(panel, config)
        b = run_pipeline(panel, config)
        for key in a.pair_gamma:
            np.testing.assert_array_equal(a.pair_gamma[key].gamma2,
                                          b.pair_gamma[key].gamma2)
        for r in config.thresholds:
            np.testing.assert_array_equal(a.ratios[r], b.ratios[r])

    def test_workers_do_not_change_output(self):
        config = PipelineConfig(band=BAND, window=13)
        panel = small_panel(5)
        serial = run_pipeline(panel, config, workers=1)
        threaded = run_pipeline(panel, config, workers=4)
        for key in serial.pair_gamma:
            np.testing.assert_array_equal(serial.pair_gamma[key].gamma2,
                                          threaded.pair_gamma[key].gamma2)

    def test_workers_env_var(self, monkeypatch):
        monkeypatch.setenv("PHASESYNC_WORKERS", "3")
        result = run_pipeline(small_panel(3), PipelineConfig(band=BAND, window=13))
        assert result.n_pairs == 3
        monkeypatch.setenv("PHASESYNC_WORKERS", "zero")
        with pytest.raises(ContractError, match="PHASESYNC_WORKERS"):
            run_pipeline(small_panel(3), PipelineConfig(band=BAND, window=13))

    def test_trim_bookkeeping(self):
        panel = small_panel(3, n=240)
        result = run_pipeline(panel, PipelineConfig(band=BAND, window=13))
        margin = round_half_up(240 / 18)
        assert result.meta.trim_offset == margin
        assert result.n_samples == (240 - 2 * margin) - 13 + 1
        assert result.t_of(0) == 7
        assert result.month_of(0) == Month(1980, 1) + margin + 6

    def test_no_trim(self):
        panel = small_panel(3, n=240)
        result = run_pipeline(panel, PipelineConfig(band=BAND, window=13, trim=False))
        assert result.meta.trim_offset == 0
        assert result.n_samples == 240 - 13 + 1
        assert result.month_of(0) == Month(1980, 7)

    def test_ratio_monotone_in_threshold(self):
        config = PipelineConfig(band=BAND, window=13,
                                thresholds=(0.2, 0.5, 0.7, 0.9))
        result = run_pipeline(small_panel(5), config)
        for low, high in zip(config.thresholds, config.thresholds[1:]):
            assert np.all(result.ratios[high] <= result.ratios[low])

    def test_ratio_matches_manual_count(self):
        config = PipelineConfig(band=BAND, window=13)
        result = run_pipeline(small_panel(4), config)
        stacked = np.vstack([s.gamma2 for s in result.pair_gamma.values()])
        np.testing.assert_array_equal(result.ratios[0.7],
                                      (stacked >= 0.7).mean(axis=0))

    def test_amplitude_invariance(self):
        panel = small_panel(3, seed=5)
        scaled = Panel((
            panel.series[0],
            TimeSeries(panel.series[1].id, panel.start, panel.series[1].values * 3.7),
            panel.series[2],
        ))
        config = PipelineConfig(band=BAND, window=13)
        base = run_pipeline(panel, config)
        other = run_pipeline(scaled, config)
        for key in base.pair_gamma:
            np.testing.assert_allclose(other.pair_gamma[key].gamma2,
                                       base.pair_gamma[key].gamma2, atol=1e-9)
        for r in config.thresholds:
            np.testing.assert_allclose(other.ratios[r], base.ratios[r], atol=1e-9)

    def test_common_offset_invariance(self):
        panel = small_panel(3, seed=6)
        shifted = Panel(tuple(
            TimeSeries(s.id, s.start, s.values + 125.0) for s in panel
        ))
        config = PipelineConfig(band=BAND, window=13)
        base = run_pipeline(panel, config)
        other = run_pipeline(shifted, config)
        for key in base.pair_gamma:
            np.testing.assert_allclose(other.pair_gamma[key].gamma2,
                                       base.pair_gamma[key].gamma2, atol=1e-9)

    def test_member_order_invariance(self):
        panel = small_panel(4, seed=7)
        reordered = Panel(tuple(reversed(panel.series)))
        config = PipelineConfig(band=BAND, window=13)
        base = run_pipeline(panel, config)
        other = run_pipeline(reordered, config)
        for (id_i, id_j), series in base.pair_gamma.items():
            np.testing.assert_allclose(other.pair_gamma[(id_j, id_i)].gamma2,
                                       series.gamma2, atol=1e-12)
        for r in config.thresholds:
            np.testing.assert_allclose(other.ratios[r], base.ratios[r], atol=1e-12)

    def test_degenerate_series_named(self):
        # constant series detrends to exact zeros, so the analytic signal
        # has no amplitude anywhere
        flat = TimeSeries("flatliner", Month(1980, 1), np.full(240, 5.0))
        panel = Panel((small_panel(2).series[0], flat))
        with pytest.raises(DegeneratePhaseError, match="flatliner"):
            run_pipeline(panel, PipelineConfig(band=BAND, window=13))


class TestRatioAbove:
    def make(self, *rows):
        return [SyncSeries(gamma2=np.asarray(row, dtype=float), window=13)
                for row in rows]

    def test_all_above(self):
        series = self.make([1.0, 1.0], [1.0, 1.0])
        np.testing.assert_array_equal(ratio_above(series, 0.8), [1.0, 1.0])

    def test_none_above(self):
        series = self.make([0.5, 0.5], [0.5, 0.5])
        np.testing.assert_array_equal(ratio_above(series, 0.7), [0.0, 0.0])

    def test_two_of_three(self):
        series = self.make([0.9], [0.75], [0.2])
        np.testing.assert_allclose(ratio_above(series, 0.7), [2.0 / 3.0])

    def test_inclusive_comparison(self):
        series = self.make([0.7], [0.69999])
        np.testing.assert_allclose(ratio_above(series, 0.7), [0.5])

    def test_accepts_mapping(self):
        mapping = {("a", "b"): SyncSeries(gamma2=np.array([1.0]), window=13)}
        np.testing.assert_array_equal(ratio_above(mapping, 0.5), [1.0])

    def test_misaligned_rejected(self):
        a = SyncSeries(gamma2=np.zeros(5), window=13)
        b = SyncSeries(gamma2=np.zeros(5), window=15)
        with pytest.raises(ContractError, match="misaligned"):
            ratio_above([a, b], 0.7)
        c = SyncSeries(gamma2=np.zeros(6), window=13)
        with pytest.raises(ContractError, match="misaligned"):
            ratio_above([a, c], 0.7)

    def test_threshold_range(self):
        series = self.make([0.5])
        with pytest.raises(ContractError):
            ratio_above(series, 1.2)

    def test_empty_rejected(self):
        with pytest.raises(ContractError):
            ratio_above([], 0.5)


class TestNormalizeDi:
    def test_midpoint(self):
        np.testing.assert_array_equal(normalize_di([50.0]), [0.0])

    def test_bounds(self):
        np.testing.assert_array_equal(normalize_di([100.0, 0.0]), [1.0, -1.0])

    def test_linear_map(self):
        np.testing.assert_allclose(normalize_di([75.0, 25.0]), [0.5, -0.5])

    def test_out_of_range_named(self):
        with pytest.raises(ContractError, match="index 1"):
            normalize_di([10.0, 101.0])

    def test_non_finite(self):
        with pytest.raises(ContractError):
            normalize_di([np.nan])


class TestAnnotateRecessions:
    CAL = RecessionCalendar(((Month(1990, 7), Month(1991, 3)),))

    def result(self, start=Month(1988, 1)):
        # trim margin 13 plus half window 6 puts the first sample at
        # start + 19 months; starting 1988-01 covers the 1990-91 episode
        panel = small_panel(3, n=120, seed=8, start=start)
        return run_pipeline(panel, PipelineConfig(band=FilterBand(2, 9), window=13))

    def test_labels(self):
        result = self.result()
        annotation = annotate_recessions(result, self.CAL)
        by_month = dict(zip(annotation.months, annotation.labels))
        assert by_month[Month(1990, 8)] == "contraction"
        assert by_month[Month(1991, 3)] == "contraction"
        assert by_month[Month(1990, 7)] == "expansion"   # peak month
        assert by_month[Month(1990, 6)] == "expansion"   # before first peak
        assert by_month[Month(1991, 4)] == "expansion"

    def test_regime_means(self):
        result = self.result()
        annotation = annotate_recessions(result, self.CAL)
        mask = np.array([lbl == "contraction" for lbl in annotation.labels])
        for r, ratio in result.ratios.items():
            assert annotation.regime_means[r]["contraction"] == pytest.approx(
                ratio[mask].mean())
            assert annotation.regime_means[r]["expansion"] == pytest.approx(
                ratio[~mask].mean())

    def test_disjoint_calendar_rejected(self):
        result = self.result(start=Month(2030, 1))
        with pytest.raises(ContractError, match="disjoint"):
            annotate_recessions(result, self.CAL)

    def test_rows_iterate_in_order(self):
        result = self.result()
        annotation = annotate_recessions(result, self.CAL)
        rows = list(annotation.rows())
        assert rows[0][0] == 0
        assert rows[0][1] == result.month_of(0)
        assert len(rows) == result.n_samples


class TestResultOutputs:
    @pytest.fixture()
    def result(self):
        return run_pipeline(small_panel(3, n=120, seed=9),
                            PipelineConfig(band=FilterBand(2, 9), window=13))

    def test_gamma_csv(self, result, tmp_path):
        path = tmp_path / "gamma2.csv"
        result.write_gamma_csv(path)
        rows = read_rows(path)
        assert rows[0] == ["t", "date", "pair_i", "pair_j", "gamma2"]
        assert len(rows) == 1 + result.n_pairs * result.n_samples
        pairs = {(row[2], row[3]) for row in rows[1:]}
        assert pairs == set(result.pair_gamma)
        first = rows[1]
        assert int(first[0]) == result.t_of(0)
        assert first[1] == str(result.month_of(0))
        assert float(first[4]) == pytest.approx(
            result.pair_gamma[("m01", "m02")].gamma2[0], rel=1e-11)

    def test_ratio_long_csv(self, result, tmp_path):
        path = tmp_path / "ratios_long.csv"
        result.write_ratio_long_csv(path)
        rows = read_rows(path)
        assert rows[0] == ["t", "date", "r", "R"]
        assert len(rows) == 1 + 2 * result.n_samples
        r_values = {row[2] for row in rows[1:]}
        assert r_values == {"0.7", "0.8"}

    def test_ratio_wide_csv(self, result, tmp_path):
        path = tmp_path / "ratios.csv"
        result.write_ratio_wide_csv(path)
        rows = read_rows(path)
        assert rows[0] == ["t", "date", "R_0.7", "R_0.8"]
        assert len(rows) == 1 + result.n_samples
        np.testing.assert_allclose(
            [float(row[2]) for row in rows[1:]], result.ratios[0.7], rtol=1e-11)

    def test_ratio_wide_with_labels(self, result, tmp_path):
        path = tmp_path / "ratios.csv"
        labels = tuple("expansion" for _ in range(result.n_samples))
        result.write_ratio_wide_csv(path, labels)
        rows = read_rows(path)
        assert rows[0][-1] == "regime"
        assert all(row[-1] == "expansion" for row in rows[1:])

    def test_ratio_wide_label_length_checked(self, result, tmp_path):
        with pytest.raises(ContractError, match="labels"):
            result.write_ratio_wide_csv(tmp_path / "r.csv", ("expansion",))

    def test_meta_items_and_sidecar(self, result, tmp_path):
        items = result.meta_items()
        as_dict = dict(items)
        assert as_dict["n_series"] == "3"
        assert as_dict["n_months"] == "120"
        assert as_dict["window"] == "13"
        assert as_dict["thresholds"] == "0.7,0.8"
        assert as_dict["trim_offset"] == str(round_half_up(120 / 9))
        assert as_dict["first_sample_date"] == str(result.meta.anchor)
        assert as_dict["backend"] in ("numba", "numpy")
        path = tmp_path / "metadata.txt"
        write_metadata(path, items)
        lines = path.read_text().splitlines()
        parsed = dict(line.split(" = ", 1) for line in lines)
        assert parsed == as_dict
