"""
Test cases for TrainSurrogateTool and PredictAllocationTool
"""

import pytest

from owc_alloc.dataset.scenario import generate_dataset, sample_scenario, write_scenario
from owc_alloc.dataset.store import write_dataset
from owc_alloc.surrogate.tools import PredictAllocationTool, SurrogateModule, TrainSurrogateTool
from owc_alloc.surrogate.weights_io import read_weights
from tests.base_test import BaseToolTest
from tests.test_utils import make_context, quick_settings


@pytest.fixture(scope="module")
def settings():
    return quick_settings()


@pytest.fixture(scope="module")
def dataset_path(settings, tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "dataset.csv"
    return write_dataset(generate_dataset(30, settings, seed=3), path)


class TestTrainSurrogateTool(BaseToolTest):
    """Test cases for TrainSurrogateTool"""

    tool_class = TrainSurrogateTool
    tool_name = "train_surrogate"
    required = ("dataset",)

    @pytest.fixture
    def tool(self, tmp_path, settings):
        return self.make_tool(make_context(tmp_path, settings))

    def test_tool_definition(self, tool):
        self.check_definition(tool)

    def test_missing_dataset(self, tool):
        self.check_missing_arguments(tool)

    def test_trains_and_writes_weights(self, tool, tmp_path, dataset_path):
        data = self.payload(self.execute(tool, {"dataset": str(dataset_path), "epochs": 4, "arch": "dense:8"}))
        assert data["path"] == str(tmp_path / "surrogate.weights")
        assert data["epochs"] == 4
        assert data["best_val_mse"] <= data["final_val_mse"]
        model = read_weights(data["path"])
        assert len(model.history) == 4
        assert (model.K, model.L) == (3, 2)

    def test_unreadable_dataset(self, tool, tmp_path):
        response = self.execute(tool, {"dataset": str(tmp_path / "absent.csv")})
        assert response.startswith("❌ train_surrogate failed")

    def test_bad_arch(self, tool, dataset_path):
        response = self.execute(tool, {"dataset": str(dataset_path), "arch": "pool:2"})
        assert "malformed layer" in response


class TestPredictAllocationTool(BaseToolTest):
    """Test cases for PredictAllocationTool"""

    tool_class = PredictAllocationTool
    tool_name = "predict_allocation"
    required = ("weights", "scenario")

    @pytest.fixture
    def context(self, tmp_path, settings):
        return make_context(tmp_path, settings)

    @pytest.fixture
    def weights_path(self, context, dataset_path):
        trainer = TrainSurrogateTool(context)
        data = self.payload(self.execute(trainer, {"dataset": str(dataset_path), "epochs": 3}))
        return data["path"]

    @pytest.fixture
    def tool(self, context):
        return self.make_tool(context)

    def test_tool_definition(self, tool):
        self.check_definition(tool)

    def test_missing_arguments(self, tool):
        self.check_missing_arguments(tool)

    def test_feasible_prediction(self, tool, tmp_path, settings, weights_path):
        drop = sample_scenario(21, quick_settings(dataset={"placement": "coverage"}))
        scenario = write_scenario(drop, tmp_path / "scenario.toml")
        data = self.payload(self.execute(tool, {"weights": weights_path, "scenario": str(scenario), "refine": 2}))
        assert data["feasible"] is True
        assert len(data["e"]) == 3 and len(data["e"][0]) == 2
        assert data["sum_rate"] > 0


def test_surrogate_module_tools(tmp_path):
    module = SurrogateModule(make_context(tmp_path))
    assert set(module.tools) == {"train_surrogate", "predict_allocation"}
