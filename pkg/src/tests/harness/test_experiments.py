"""
Test cases for experiment orchestration, result files and trend checks
"""

import numpy as np
import pytest

from owc_alloc.harness.experiments import (
    CDF_HEADER,
    SWEEP_HEADER,
    TRAINING_HEADER,
    ExperimentResult,
    cdf_dominates,
    deciles,
    drop_settings,
    load_or_generate_dataset,
    read_rows,
    run_beamwaist_sweep,
    run_cdf_experiment,
    run_training_curves,
    sweep_trend_holds,
    train_surrogates,
    training_settings,
    training_trend_holds,
    write_rows,
    write_run_config,
)
from owc_alloc.surrogate.weights_io import write_weights
from owc_alloc.utils.errors import InvalidParameterError, ParseError
from tests.test_utils import quick_settings


@pytest.fixture(scope="module")
def out_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("results")


@pytest.fixture(scope="module")
def settings(out_dir):
    return quick_settings(out_dir)


@pytest.fixture(scope="module")
def models(settings, out_dir):
    return train_surrogates(settings, out_dir)


def curve(size, start, end, epochs=5, val_end=None):
    train = np.geomspace(start, end, epochs)
    val = np.geomspace(start, val_end if val_end is not None else end, epochs)
    return [(e + 1, float(t), float(v), size) for e, (t, v) in enumerate(zip(train, val))]


class TestSettingsHelpers:
    def test_training_settings_span_beam_waists(self, settings):
        assert training_settings(settings).dataset.beam_waists_um == [10.0, 20.0, 30.0]

    def test_explicit_dataset_waists_kept(self):
        settings = quick_settings(dataset={"beam_waists_um": [15.0]})
        assert training_settings(settings).dataset.beam_waists_um == [15.0]

    def test_drop_settings_fix_the_waist(self, settings):
        point = drop_settings(training_settings(settings), 20.0)
        assert point.dataset.beam_waists_um == []
        assert point.channel.beam_waist_um == 20.0


class TestTrainingCurves:
    """Training-curve experiment"""

    def test_rows_per_size(self, settings, out_dir):
        result = run_training_curves(settings, out_dir)
        assert result.header == TRAINING_HEADER
        assert len(result.rows) == 2 * settings.surrogate.epochs
        assert {row[3] for row in result.rows} == {30, 60}
        assert [row[0] for row in result.rows[:3]] == [1, 2, 3]

    def test_dataset_is_cached(self, settings, out_dir):
        load_or_generate_dataset(settings, out_dir)
        path = out_dir / f"dataset_seed{settings.seed}_n60.csv"
        stamp = path.stat().st_mtime_ns
        dataset = load_or_generate_dataset(settings, out_dir)
        assert path.stat().st_mtime_ns == stamp
        assert 1 <= dataset.size <= 60

    def test_deterministic(self, settings, out_dir):
        assert run_training_curves(settings, out_dir).rows == run_training_curves(settings, out_dir).rows


class TestSurrogates:
    def test_one_model_per_size(self, models):
        assert set(models) == {"surrogate", "surrogate-n30"}

    def test_weights_path(self, models, out_dir, settings):
        path = write_weights(models["surrogate"], out_dir / "fixed.weights")
        fixed = settings.model_copy(
            update={"experiments": settings.experiments.model_copy(update={"weights_path": str(path)})}
        )
        assert set(train_surrogates(fixed, out_dir)) == {"surrogate"}


class TestEvaluation:
    """Sweep and CDF experiments"""

    def test_sweep_rows(self, settings, out_dir, models):
        result = run_beamwaist_sweep(settings, out_dir, models)
        assert result.header == SWEEP_HEADER
        methods = ["dual", "surrogate-n30", "surrogate", "uniform"]
        assert [row[1] for row in result.rows[:4]] == methods
        assert [row[0] for row in result.rows[::4]] == [10.0, 20.0, 30.0]
        assert all(row[2] >= 0 for row in result.rows)

    def test_sweep_is_deterministic(self, settings, out_dir, models):
        first = run_beamwaist_sweep(settings, out_dir, models)
        second = run_beamwaist_sweep(settings, out_dir, models)
        assert first.rows == second.rows

    def test_cdf_rows(self, settings, out_dir, models):
        result = run_cdf_experiment(settings, out_dir, models["surrogate"])
        assert result.header == CDF_HEADER
        assert len(result.rows) == 3 * settings.experiments.cdf_drops
        assert {row[1] for row in result.rows} == {"dual", "surrogate", "uniform"}

    def test_absolute_rates(self, settings, out_dir, models):
        coverage = {"placement": "coverage"}
        scaled = quick_settings(out_dir, dataset=coverage, experiments={"absolute_rates": True, "cdf_drops": 2})
        plain = quick_settings(out_dir, dataset=coverage, experiments={"cdf_drops": 2})
        ratio = run_cdf_experiment(scaled, out_dir, models["surrogate"]).rows[0][2] / \
            run_cdf_experiment(plain, out_dir, models["surrogate"]).rows[0][2]
        assert ratio == pytest.approx(settings.channel.bandwidth_ghz * 1e9)


class TestResultFiles:
    """Experiment CSVs"""

    def test_write_and_read(self, tmp_path):
        result = ExperimentResult("beamwaist_sweep", SWEEP_HEADER, [(10.0, "dual", 0.1 + 0.2), (10.0, "uniform", 0.25)])
        written = write_rows(result, tmp_path / "sweep.csv")
        assert written.path == tmp_path / "sweep.csv"
        loaded = read_rows(written.path)
        assert loaded.name == "beamwaist_sweep"
        assert loaded.rows == result.rows

    def test_run_config(self, settings, tmp_path):
        path = write_run_config(settings, tmp_path)
        assert "[experiments]" in path.read_text()

    @pytest.mark.parametrize("content,line", [
        ("", 1),
        ("a,b,c\n1,2,3\n", 1),
        ("drop,method,sum_rate\n0,dual\n", 2),
        ("drop,method,sum_rate\n0,dual,1.0\n1,dual,fast\n", 3),
    ])
    def test_parse_errors(self, tmp_path, content, line):
        path = tmp_path / "bad.csv"
        path.write_text(content)
        with pytest.raises(ParseError) as info:
            read_rows(path)
        assert info.value.line == line

    def test_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("drop,method,sum_rate\n")
        with pytest.raises(ParseError, match="no rows"):
            read_rows(path)


class TestTrendChecks:
    """Qualitative checks on experiment rows"""

    def test_training_trend(self):
        good = curve(100, 1.0, 0.1, val_end=0.3) + curve(1000, 1.0, 0.05, val_end=0.1)
        assert training_trend_holds([good, good, good])

    def test_training_trend_needs_majority(self):
        good = curve(100, 1.0, 0.1, val_end=0.3) + curve(1000, 1.0, 0.05, val_end=0.1)
        bad = curve(100, 1.0, 0.1, val_end=0.1) + curve(1000, 1.0, 0.05, val_end=0.3)
        assert not training_trend_holds([good, bad, bad])

    def test_flat_curve_fails(self):
        flat = curve(100, 1.0, 0.8) + curve(1000, 1.0, 0.05)
        assert not training_trend_holds([flat])

    def test_no_runs(self):
        with pytest.raises(InvalidParameterError):
            training_trend_holds([])

    def test_sweep_trend(self):
        rows = [(10.0, "dual", 1.0), (20.0, "dual", 1.5), (10.0, "uniform", 0.5), (20.0, "uniform", 1.6)]
        assert not sweep_trend_holds(rows)
        rows[3] = (20.0, "uniform", 1.2)
        assert sweep_trend_holds(rows)
        rows[1] = (20.0, "dual", 0.9)
        assert not sweep_trend_holds(rows)

    def test_deciles(self):
        np.testing.assert_allclose(deciles(np.arange(11)), np.arange(1, 10))

    def test_cdf_dominance(self):
        rows = [(i, "surrogate", 1.0 + i) for i in range(20)] + [(i, "uniform", 0.5 + i) for i in range(20)]
        assert cdf_dominates(rows)
        assert not cdf_dominates(rows, better="uniform", worse="surrogate")
        with pytest.raises(InvalidParameterError):
            cdf_dominates(rows, better="dual")


@pytest.mark.slow
class TestExperimentTrends:
    """Full experiment runs on the two-AP preset"""

    @pytest.fixture(scope="class")
    def trend_settings(self, tmp_path_factory):
        return quick_settings(
            tmp_path_factory.mktemp("trends"),
            surrogate={"epochs": 80, "batch_size": 32, "learning_rate": 0.005},
            experiments={"dataset_sizes": [100, 400], "sweep_drops": 5, "cdf_drops": 100},
        )

    def test_training_curves_over_seeds(self, trend_settings, tmp_path):
        runs = [run_training_curves(trend_settings, tmp_path, seed=seed).rows for seed in (1, 2, 3)]
        assert training_trend_holds(runs)

    def test_sweep_with_coverage_drops(self, tmp_path):
        # each drop keeps its normalized offsets, so rates scale with the beam waist
        settings = quick_settings(tmp_path, dataset={"placement": "coverage"}, experiments={"sweep_drops": 5})
        result = run_beamwaist_sweep(settings, tmp_path, models={})
        assert {row[1] for row in result.rows} == {"dual", "uniform"}
        assert sweep_trend_holds(result.rows)

    def test_cdf_surrogate_over_uniform(self, trend_settings, tmp_path):
        model = train_surrogates(trend_settings, tmp_path)["surrogate"]
        result = run_cdf_experiment(trend_settings, tmp_path, model)
        assert len(result.rows) == 300
        assert cdf_dominates(result.rows)
