"""
owc-alloc tool server
Line-delimited JSON-RPC 2.0 on stdin/stdout exposing every simulator tool.
"""

import asyncio
import json
import logging
import os
import sys
from typing import Any, Dict, Optional

from pydantic import BaseModel

from .allocator.tools import AllocatorModule
from .bia.tools import BiaModule
from .channel.tools import ChannelModule
from .dataset.tools import DatasetModule
from .harness.tools import HarnessModule
from .surrogate.tools import SurrogateModule
from .utils.base import SimTool, SimulationContext, ToolResult
from .utils.config import PREDEFINED_CONFIGS, SCENARIO_PRESETS, ToolConfig, apply_predefined_config

logger = logging.getLogger(__name__)

SERVER_NAME = "owc-alloc"
SERVER_VERSION = "0.1.0"

MODULE_CLASSES = {
    "channel": ChannelModule,
    "bia": BiaModule,
    "allocator": AllocatorModule,
    "dataset": DatasetModule,
    "surrogate": SurrogateModule,
    "harness": HarnessModule,
}


class NoArguments(BaseModel):
    pass


class ListConfigurationsTool(SimTool):
    name = "list_configurations"
    description = "List scenario presets and predefined tool sets"
    Arguments = NoArguments

    def __init__(self, server: "SimulationServer"):
        super().__init__(server.context)
        self.server = server

    def run(self, args: NoArguments) -> ToolResult:
        data = {
            "profiles": {name: preset["description"] for name, preset in SCENARIO_PRESETS.items()},
            "toolsets": {name: config["description"] for name, config in PREDEFINED_CONFIGS.items()},
            "current": self.server.config.get_configuration_summary(),
        }
        return ToolResult("Available configurations (select with OWC_PROFILE and OWC_TOOLSET)", data)


class GetConfigurationTool(SimTool):
    name = "get_configuration"
    description = "Get the effective simulation settings and the enabled tools"
    Arguments = NoArguments

    def __init__(self, server: "SimulationServer"):
        super().__init__(server.context)
        self.server = server

    def run(self, args: NoArguments) -> ToolResult:
        data = {
            "settings": self.context.settings.model_dump(),
            "output_dir": str(self.context.out_dir),
            "modules": {
                name: sorted(tool for tool in module.tools if self.server.config.is_tool_enabled(tool))
                for name, module in self.server.modules.items()
            },
            "tools": len(self.server.tools),
        }
        return ToolResult("Current server configuration", data)


class SimulationServer:
    """Tool server over every enabled simulator module"""

    def __init__(self, context: Optional[SimulationContext] = None):
        self.context = context or SimulationContext()

        toolset = os.getenv("OWC_TOOLSET", "")
        if toolset:
            if apply_predefined_config(toolset):
                logger.info(f"Using predefined tool set: {toolset}")
            else:
                logger.warning(f"Unknown predefined tool set: {toolset}")
        self.config = ToolConfig()

        self.modules = {}
        for module_name, module_class in MODULE_CLASSES.items():
            if self.config.is_module_enabled(module_name):
                self.modules[module_name] = module_class(self.context, self.config)
                logger.info(f"Module '{module_name}' loaded with {len(self.modules[module_name].tools)} tools")
            else:
                logger.info(f"Module '{module_name}' disabled by configuration")

        self.tools: Dict[str, SimTool] = {}
        for module in self.modules.values():
            for tool_name, tool in module.tools.items():
                if self.config.is_tool_enabled(tool_name):
                    self.tools[tool_name] = tool

        for tool in (ListConfigurationsTool(self), GetConfigurationTool(self)):
            if self.config.is_tool_enabled(tool.name):
                self.tools[tool.name] = tool

        summary = self.config.get_configuration_summary()
        logger.info(f"Server initialized with {len(self.tools)} enabled tools ({summary['configuration_mode']} mode)")

    async def call_tool(self, tool_name: str, arguments: Dict[str, Any]) -> str:
        if tool_name in self.tools:
            return await self.tools[tool_name].execute(arguments)
        return f"Unknown tool: {tool_name}"

    async def handle_request(self, request: Dict[str, Any]) -> Optional[Dict[str, Any]]:
        """Handle one JSON-RPC request; notifications return None"""
        method = request.get("method")
        request_id = request.get("id")

        if method == "initialize":
            result = {
                "protocolVersion": "2024-11-05",
                "capabilities": {"tools": {"listChanged": False}},
                "serverInfo": {"name": SERVER_NAME, "version": SERVER_VERSION},
            }
        elif method == "notifications/initialized":
            return None
        elif method == "tools/list":
            result = {"tools": [tool.get_tool_definition() for tool in self.tools.values()]}
        elif method == "tools/call":
            params = request.get("params", {})
            text = await self.call_tool(params.get("name"), params.get("arguments", {}))
            result = {"content": [{"type": "text", "text": text}]}
        else:
            return {
                "jsonrpc": "2.0",
                "id": request_id,
                "error": {"code": -32601, "message": f"Method not found: {method}"},
            }
        return {"jsonrpc": "2.0", "id": request_id, "result": result}

    async def run(self):
        """Serve requests until stdin closes"""
        logger.info("Starting owc-alloc tool server")
        loop = asyncio.get_running_loop()
        try:
            while True:
                line = await loop.run_in_executor(None, sys.stdin.readline)
                if not line:
                    break
                if not line.strip():
                    continue

                request = None
                try:
                    request = json.loads(line)
                    response = await self.handle_request(request)
                    if response is not None:
                        print(json.dumps(response), flush=True)
                except json.JSONDecodeError:
                    logger.error(f"Invalid JSON: {line.strip()}")
                except Exception as e:
                    logger.error(f"Error handling request: {e}")
                    print(json.dumps({
                        "jsonrpc": "2.0",
                        "id": request.get("id") if isinstance(request, dict) else None,
                        "error": {"code": -32603, "message": str(e)},
                    }), flush=True)
        except KeyboardInterrupt:
            logger.info("Shutdown requested.")


async def main(context: Optional[SimulationContext] = None):
    """Main entry point"""
    logging.basicConfig(level=logging.INFO, stream=sys.stderr)
    server = SimulationServer(context)
    await server.run()


if __name__ == "__main__":
    asyncio.run(main())
