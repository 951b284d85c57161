"""
Base classes and utilities for owc-alloc tools
"""

import asyncio
import json
import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Type

import numpy as np
from pydantic import BaseModel, ValidationError

from .config import Settings, ToolConfig, load_settings
from .errors import InvalidParameterError, OwcAllocError

logger = logging.getLogger(__name__)


class SimulationContext:
    """Effective settings and output directory shared by every tool"""

    def __init__(self, settings: Optional[Settings] = None, out_dir: Optional[str] = None):
        self.settings = settings if settings is not None else load_settings()
        self.out_dir = Path(out_dir or self.settings.experiments.output_dir)

    def output_path(self, name: str) -> Path:
        """Path of an artifact inside the output directory (created on demand)"""
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    def resolve(self, path: Optional[str], default_name: str) -> Path:
        """Explicit path if given, otherwise default_name in the output directory"""
        if path:
            resolved = Path(path)
            resolved.parent.mkdir(parents=True, exist_ok=True)
            return resolved
        return self.output_path(default_name)


class ToolResult(NamedTuple):
    message: str
    data: Optional[Dict[str, Any]] = None


class SimTool(ABC):
    """Abstract base class for simulator tools"""

    name: str = ""
    description: str = ""
    Arguments: Type[BaseModel]

    def __init__(self, context: SimulationContext):
        self.context = context

    def get_tool_definition(self) -> Dict[str, Any]:
        """Return the tool definition with a JSON schema built from the argument model"""
        schema = self.Arguments.model_json_schema()
        schema.pop("title", None)
        return {
            "name": self.name,
            "description": self.description,
            "inputSchema": schema,
        }

    def parse_arguments(self, arguments: Optional[Dict[str, Any]]) -> BaseModel:
        try:
            return self.Arguments.model_validate(arguments or {})
        except ValidationError as e:
            first = e.errors()[0]
            field = ".".join(str(part) for part in first.get("loc", ())) or "arguments"
            raise InvalidParameterError(f"{field}: {first.get('msg', 'invalid value')}") from e

    @abstractmethod
    def run(self, args: BaseModel) -> ToolResult:
        """Do the work synchronously and describe the outcome"""

    async def execute(self, arguments: Dict[str, Any]) -> str:
        """Execute the tool with given arguments"""
        try:
            args = self.parse_arguments(arguments)
            loop = asyncio.get_running_loop()
            result = await loop.run_in_executor(None, self.run, args)
        except OwcAllocError as e:
            logger.warning(f"Tool {self.name} failed: {e}")
            return format_error_response(f"{self.name} failed", str(e))
        return format_success_response(result.message, result.data)


class SimModule(ABC):
    """Abstract base class for tool modules (groups of related tools)"""

    def __init__(self, context: SimulationContext, config: Optional[ToolConfig] = None):
        self.context = context
        self.config = config
        self.tools: Dict[str, SimTool] = {}
        self._initialize_tools()

    @abstractmethod
    def _initialize_tools(self):
        """Initialize all tools for this module"""

    def get_tool_definitions(self) -> List[Dict[str, Any]]:
        """Get all tool definitions for this module"""
        return [tool.get_tool_definition() for tool in self.tools.values()]

    def get_enabled_tool_definitions(self) -> List[Dict[str, Any]]:
        """Get enabled tool definitions for this module"""
        if not self.config:
            return self.get_tool_definitions()
        return [
            tool.get_tool_definition()
            for tool_name, tool in self.tools.items()
            if self.config.is_tool_enabled(tool_name)
        ]

    async def call_tool(self, tool_name: str, arguments: Dict[str, Any]) -> str:
        """Call a specific tool in this module"""
        if tool_name in self.tools:
            return await self.tools[tool_name].execute(arguments)
        return f"Unknown tool: {tool_name}"


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def format_success_response(message: str, data: Optional[Dict] = None) -> str:
    """Format a success response"""
    response = f"✅ {message}"
    if data:
        response += f"\n{json.dumps(data, indent=2, default=_json_default)}"
    return response


def format_error_response(message: str, error: Optional[str] = None) -> str:
    """Format an error response"""
    response = f"❌ {message}"
    if error:
        response += f"\nError: {error}"
    return response
