"""
Test cases for ComputeChannelTool
"""

import pytest

from owc_alloc.channel.tools import ChannelModule, ComputeChannelTool
from tests.base_test import BaseToolTest
from tests.test_utils import desk_settings, make_context


class TestComputeChannelTool(BaseToolTest):
    """Test cases for ComputeChannelTool"""

    tool_class = ComputeChannelTool
    tool_name = "compute_channel"

    @pytest.fixture
    def tool(self, tmp_path):
        return self.make_tool(make_context(tmp_path, desk_settings()))

    def test_tool_definition(self, tool):
        schema = self.check_definition(tool)
        assert {"users", "beam_waist_um", "strict"} <= set(schema["properties"])

    def test_default_user_at_room_center(self, tool):
        data = self.payload(self.execute(tool))
        assert len(data["channels"]) == 1
        assert data["channels"][0]["position"][:2] == [2.5, 2.5]
        assert data["beam_radius_m"] > 0

    def test_matrices_for_given_users(self, tool):
        data = self.payload(self.execute(tool, {"users": [[1.25, 2.5], [3.75, 2.5]]}))
        assert [c["user"] for c in data["channels"]] == [0, 1]
        for channel in data["channels"]:
            assert len(channel["H"]) == 2 and len(channel["H"][0]) == 2
            assert channel["noise_var"] > 0

    def test_strict_reports_degenerate_user(self, tool):
        response = self.execute(tool, {"users": [[1.25, 2.5]], "strict": True})
        assert response.startswith("❌ compute_channel failed")
        assert "rank deficient" in response

    def test_invalid_beam_waist(self, tool):
        response = self.execute(tool, {"beam_waist_um": -1.0})
        assert response.startswith("❌")

    def test_module_lists_tool(self, tmp_path):
        module = ChannelModule(make_context(tmp_path))
        assert [d["name"] for d in module.get_tool_definitions()] == ["compute_channel"]
