"""
BIA tools: supersymbol verification and rate computation
"""

from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..channel.model import ChannelMatrix, DetectorParams, VcselParams, build_topology, channel_matrices, is_full_rank
from ..utils.base import SimModule, SimTool, ToolResult
from .rates import rate_matrix, user_rate
from .supersymbol import build_supersymbol, check_plan, plan_to_text, verify_decoding


class VerifyBiaArguments(BaseModel):
    L: int = Field(2, ge=2, description="Number of APs (preset modes used)")
    K: int = Field(3, ge=1, description="Number of users")
    draws: int = Field(100, ge=1, description="Random channel/symbol draws")
    noise_std: float = Field(0.0, ge=0, description="Receiver noise standard deviation")
    seed: Optional[int] = Field(None, description="Random seed (defaults to the configured seed)")
    plan_out: Optional[str] = Field(None, description="Write the slot table to this file")


class VerifyBiaTool(SimTool):
    """Tool for checking blind interference cancellation by simulated transmission"""

    name = "verify_bia"
    description = "Build a BIA supersymbol, check its structure and decode random transmissions"
    Arguments = VerifyBiaArguments

    def run(self, args: VerifyBiaArguments) -> ToolResult:
        seed = self.context.settings.seed if args.seed is None else args.seed
        rng = np.random.default_rng(seed)
        plan = build_supersymbol(args.L, args.K)
        violations = check_plan(plan)

        residuals = []
        for _ in range(args.draws):
            channels = [
                ChannelMatrix(k, np.eye(args.L) + 0.5 * rng.random((args.L, args.L)), 1.0)
                for k in range(args.K)
            ]
            symbols = [rng.standard_normal((plan.blocks_per_user, args.L)) for _ in range(args.K)]
            residuals.append(verify_decoding(plan, channels, symbols, args.noise_std, rng).residual)

        data = {
            "L": args.L,
            "K": args.K,
            "length": plan.length,
            "block1_len": plan.block1_len,
            "block2_len": plan.block2_len,
            "sum_dof": plan.sum_dof,
            "violations": violations,
            "max_residual": max(residuals),
            "residuals": residuals,
        }
        if args.plan_out:
            path = self.context.resolve(args.plan_out, "plan.txt")
            path.write_text(plan_to_text(plan), encoding="utf-8")
            data["plan_file"] = str(path)
        return ToolResult(f"Verified {args.draws} BIA transmissions with L={args.L}, K={args.K}", data)


class ComputeRatesArguments(BaseModel):
    users: List[Tuple[float, float]] = Field(..., min_length=1, description="User (x, y) positions in meters")
    beam_waist_um: Optional[float] = Field(None, gt=0, description="VCSEL beam waist override in micrometers")


class ComputeRatesTool(SimTool):
    """Tool for computing per-link and BIA user rates"""

    name = "compute_rates"
    description = "Compute the per-link rate matrix and BIA user rates for given user positions"
    Arguments = ComputeRatesArguments

    def run(self, args: ComputeRatesArguments) -> ToolResult:
        settings = self.context.settings
        if args.beam_waist_um is not None:
            settings = settings.with_beam_waist(args.beam_waist_um)
        vcsel = VcselParams.from_config(settings.channel)
        detector = DetectorParams.from_config(settings.channel)
        topology = build_topology(settings.room, detector, np.array(args.users, dtype=float))
        channels = channel_matrices(topology, vcsel, strict=False, literal=settings.channel.axial_literal)

        power = settings.bia.stream_power
        user_rates = [
            user_rate(c, power, topology.L, topology.K) if is_full_rank(c.H) else None
            for c in channels
        ]
        data = {
            "rates": rate_matrix(channels, power),
            "user_rates": user_rates,
        }
        return ToolResult(f"Computed rates for {topology.K} users and {topology.L} APs", data)


class BiaModule(SimModule):
    """BIA module containing the supersymbol and rate tools"""

    def _initialize_tools(self):
        self.tools = {
            "verify_bia": VerifyBiaTool(self.context),
            "compute_rates": ComputeRatesTool(self.context),
        }
