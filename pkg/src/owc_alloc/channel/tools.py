"""
Channel tools: per-user channel matrices for the configured room
"""

from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..utils.base import SimModule, SimTool, ToolResult
from .model import (
    DetectorParams,
    VcselParams,
    beam_radius,
    build_channel_matrix,
    build_topology,
    coverage_radius,
    is_full_rank,
)


class ComputeChannelArguments(BaseModel):
    users: Optional[List[Tuple[float, float]]] = Field(
        None, description="User (x, y) positions on the receiving plane in meters; default is the room center"
    )
    beam_waist_um: Optional[float] = Field(None, gt=0, description="VCSEL beam waist override in micrometers")
    strict: bool = Field(False, description="Fail when a user's channel matrix is rank deficient")


class ComputeChannelTool(SimTool):
    """Tool for computing preset-mode channel matrices"""

    name = "compute_channel"
    description = "Compute the preset-mode channel matrix and noise variance of each user"
    Arguments = ComputeChannelArguments

    def run(self, args: ComputeChannelArguments) -> ToolResult:
        settings = self.context.settings
        if args.beam_waist_um is not None:
            settings = settings.with_beam_waist(args.beam_waist_um)
        room = settings.room
        vcsel = VcselParams.from_config(settings.channel)
        detector = DetectorParams.from_config(settings.channel)

        users = args.users or [(room.width_m / 2, room.depth_m / 2)]
        topology = build_topology(room, detector, np.array(users, dtype=float))

        channels = []
        for k in range(topology.K):
            channel = build_channel_matrix(
                topology, vcsel, k, strict=args.strict, literal=settings.channel.axial_literal,
            )
            channels.append({
                "user": k,
                "position": topology.user_positions[k],
                "H": channel.H,
                "noise_var": channel.noise_var,
                "full_rank": is_full_rank(channel.H),
            })

        data = {
            "beam_radius_m": beam_radius(vcsel.beam_waist, vcsel.wavelength, room.plane_gap_m),
            "coverage_radius_m": coverage_radius(
                vcsel, detector, room.plane_gap_m, settings.bia.stream_power, room.users,
                settings.bia.coverage_snr_db, settings.channel.axial_literal,
            ),
            "channels": channels,
        }
        return ToolResult(f"Computed channel matrices for {topology.K} users", data)


class ChannelModule(SimModule):
    """Channel module containing the channel tools"""

    def _initialize_tools(self):
        self.tools = {
            "compute_channel": ComputeChannelTool(self.context),
        }
