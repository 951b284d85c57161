"""
Surrogate tools: train a network on a dataset and predict allocations
"""

import logging
from typing import Optional

from pydantic import BaseModel, Field

from ..allocator.problem import sum_rate
from ..dataset.scenario import read_scenario
from ..dataset.store import read_dataset
from ..utils.base import SimModule, SimTool, ToolResult
from .training import fit_surrogate, predict_and_repair
from .weights_io import read_weights, write_weights

logger = logging.getLogger(__name__)


class TrainSurrogateArguments(BaseModel):
    dataset: str = Field(..., description="Path of the dataset CSV")
    arch: Optional[str] = Field(None, description="Hidden layers, e.g. conv1d:16:3,dense:64")
    epochs: Optional[int] = Field(None, ge=1, description="Training epochs")
    lr: Optional[float] = Field(None, ge=0, description="Learning rate")
    seed: Optional[int] = Field(None, description="Initialization and shuffling seed")
    out: Optional[str] = Field(None, description="Weights file path")


class TrainSurrogateTool(SimTool):
    """Tool for training the surrogate network"""

    name = "train_surrogate"
    description = "Train the allocation surrogate on a dataset CSV and write its weights file"
    Arguments = TrainSurrogateArguments

    def run(self, args: TrainSurrogateArguments) -> ToolResult:
        settings = self.context.settings
        updates = {
            key: value
            for key, value in (("arch", args.arch), ("epochs", args.epochs), ("learning_rate", args.lr))
            if value is not None
        }
        cfg = settings.surrogate.model_copy(update=updates)
        seed = settings.seed if args.seed is None else args.seed

        dataset = read_dataset(args.dataset)
        model = fit_surrogate(dataset, cfg, settings.dataset.train_fraction, seed)
        path = write_weights(model, self.context.resolve(args.out, "surrogate.weights"))

        _, final_train, final_val = model.history[-1]
        data = {
            "path": str(path),
            "samples": dataset.size,
            "epochs": cfg.epochs,
            "final_train_mse": final_train,
            "final_val_mse": final_val,
            "best_val_mse": min(v for _, _, v in model.history),
        }
        return ToolResult(f"Trained surrogate on {dataset.size} samples", data)


class PredictAllocationArguments(BaseModel):
    weights: str = Field(..., description="Path of the weights file")
    scenario: str = Field(..., description="Path of the TOML scenario file")
    refine: Optional[int] = Field(None, ge=0, description="Refinement iterations after repair")


class PredictAllocationTool(SimTool):
    """Tool for predicting a feasible allocation with a trained surrogate"""

    name = "predict_allocation"
    description = "Predict a feasible allocation for a scenario with a trained surrogate"
    Arguments = PredictAllocationArguments

    def run(self, args: PredictAllocationArguments) -> ToolResult:
        settings = self.context.settings
        model = read_weights(args.weights)
        problem = read_scenario(args.scenario, settings).problem()
        refine = settings.surrogate.refine if args.refine is None else args.refine

        solution = predict_and_repair(model, problem, settings.solver, refine)
        data = {
            "utility": solution.utility,
            "sum_rate": sum_rate(solution.e, problem),
            "feasible": solution.feasible,
            "e": solution.e,
        }
        return ToolResult(f"Predicted {problem.K}x{problem.L} allocation", data)


class SurrogateModule(SimModule):
    """Surrogate module containing the training and prediction tools"""

    def _initialize_tools(self):
        self.tools = {
            "train_surrogate": TrainSurrogateTool(self.context),
            "predict_allocation": PredictAllocationTool(self.context),
        }
