"""
Test cases for GenerateDatasetTool and SampleScenarioTool
"""

import pytest

from owc_alloc.dataset.scenario import read_scenario
from owc_alloc.dataset.store import read_dataset
from owc_alloc.dataset.tools import DatasetModule, GenerateDatasetTool, SampleScenarioTool
from tests.base_test import BaseToolTest
from tests.test_utils import desk_settings, make_context


class TestGenerateDatasetTool(BaseToolTest):
    """Test cases for GenerateDatasetTool"""

    tool_class = GenerateDatasetTool
    tool_name = "generate_dataset"
    required = ("n",)

    @pytest.fixture
    def tool(self, tmp_path):
        return self.make_tool(make_context(tmp_path, desk_settings()))

    def test_tool_definition(self, tool):
        schema = self.check_definition(tool)
        assert schema["properties"]["n"]["minimum"] == 1

    def test_missing_n(self, tool):
        self.check_missing_arguments(tool)

    def test_default_output(self, tool, tmp_path):
        data = self.payload(self.execute(tool, {"n": 3, "seed": 1}))
        assert data["path"] == str(tmp_path / "dataset.csv")
        assert (data["K"], data["L"]) == (3, 2)
        assert read_dataset(data["path"]).size == data["samples"]

    def test_explicit_output(self, tool, tmp_path):
        target = tmp_path / "nested" / "d.csv"
        data = self.payload(self.execute(tool, {"n": 2, "out": str(target)}))
        assert target.exists() and data["path"] == str(target)

    def test_zero_samples(self, tool):
        assert self.execute(tool, {"n": 0}).startswith("❌")


class TestSampleScenarioTool(BaseToolTest):
    """Test cases for SampleScenarioTool"""

    tool_class = SampleScenarioTool
    tool_name = "sample_scenario"
    required = ("seed",)

    @pytest.fixture
    def tool(self, tmp_path):
        return self.make_tool(make_context(tmp_path, desk_settings()))

    def test_tool_definition(self, tool):
        self.check_definition(tool)

    def test_writes_scenario(self, tool, tmp_path):
        data = self.payload(self.execute(tool, {"seed": 8}))
        assert data["path"] == str(tmp_path / "scenario_8.toml")
        scenario = read_scenario(data["path"])
        assert (scenario.K, scenario.L) == (3, 2)


def test_dataset_module_tools(tmp_path):
    module = DatasetModule(make_context(tmp_path))
    assert set(module.tools) == {"generate_dataset", "sample_scenario"}
