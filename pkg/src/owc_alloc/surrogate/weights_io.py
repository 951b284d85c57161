"""
Versioned text format for trained surrogate weights

    owc-alloc-surrogate v1
    layout K=<K> L=<L> output=<totals|full> inputs=<n>
    arch <layer tokens including the output layer>
    feature_min / feature_max / target_min / target_max <values>
    history <epoch>:<train_mse>:<val_mse> ...
    layer <i> <dims of W>
    <one line per row of W flattened to (out, -1)>
    <bias values>
"""

import logging
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from ..utils.errors import ConfigurationError, ParseError
from .network import SurrogateModel, format_arch, parse_arch

logger = logging.getLogger(__name__)

MAGIC = "owc-alloc-surrogate v1"
VECTOR_KEYS = ("feature_min", "feature_max", "target_min", "target_max")


def _line(values) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(values))


def weights_to_text(model: SurrogateModel) -> str:
    lines = [
        MAGIC,
        f"layout K={model.K} L={model.L} output={model.output_layout} inputs={model.input_dim}",
        f"arch {format_arch(model.specs)}",
    ]
    for key in VECTOR_KEYS:
        value = getattr(model, key)
        if value is not None:
            lines.append(f"{key} {_line(value)}")
    if model.history:
        lines.append("history " + " ".join(f"{e}:{t!r}:{v!r}" for e, t, v in model.history))
    for index, (W, b) in enumerate(model.params):
        lines.append(f"layer {index} {' '.join(str(d) for d in W.shape)}")
        lines.extend(_line(row) for row in W.reshape(W.shape[0], -1))
        lines.append(_line(b))
    return "\n".join(lines) + "\n"


def write_weights(model: SurrogateModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(weights_to_text(model), encoding="utf-8")
    logger.info(f"Surrogate weights written to {path}")
    return path


class _Lines:
    def __init__(self, text: str, path: str):
        self.lines = text.splitlines()
        self.index = 0
        self.path = path

    def error(self, message: str) -> ParseError:
        return ParseError(message, path=self.path, line=self.index)

    def next(self) -> str:
        if self.index >= len(self.lines):
            raise ParseError("unexpected end of file", path=self.path, line=self.index + 1)
        self.index += 1
        return self.lines[self.index - 1]

    def peek(self) -> str:
        return self.lines[self.index] if self.index < len(self.lines) else ""

    def floats(self, text: str, expected: int) -> np.ndarray:
        try:
            values = np.array([float(v) for v in text.split()])
        except ValueError as e:
            raise self.error(f"non-numeric value: {e}") from e
        if values.size != expected:
            raise self.error(f"expected {expected} values, found {values.size}")
        return values


def read_weights(path: Union[str, Path]) -> SurrogateModel:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read weights file: {e}", path=str(path)) from e

    lines = _Lines(text, str(path))
    if lines.next().strip() != MAGIC:
        raise lines.error(f"not a surrogate weights file (expected '{MAGIC}')")

    layout = lines.next().split()
    if not layout or layout[0] != "layout":
        raise lines.error("expected the layout line")
    try:
        fields = dict(item.split("=", 1) for item in layout[1:])
        K, L, input_dim = int(fields["K"]), int(fields["L"]), int(fields["inputs"])
        output_layout = fields["output"]
    except (KeyError, ValueError) as e:
        raise lines.error(f"malformed layout line: {e}") from e

    arch_line = lines.next().split(maxsplit=1)
    if len(arch_line) != 2 or arch_line[0] != "arch":
        raise lines.error("expected the arch line")
    try:
        specs = parse_arch(arch_line[1])
    except ConfigurationError as e:
        raise lines.error(str(e)) from e

    n_outputs = specs[-1].width
    sizes = {"feature_min": input_dim, "feature_max": input_dim, "target_min": n_outputs, "target_max": n_outputs}
    vectors = {}
    history: List[Tuple[int, float, float]] = []
    while lines.peek().partition(" ")[0] in VECTOR_KEYS + ("history",):
        key, _, rest = lines.next().partition(" ")
        if key == "history":
            try:
                history = [(int(e), float(t), float(v)) for e, t, v in (item.split(":") for item in rest.split())]
            except ValueError as e:
                raise lines.error(f"malformed history: {e}") from e
        else:
            vectors[key] = lines.floats(rest, sizes[key])

    params = []
    channels, length = 1, input_dim
    for index, spec in enumerate(specs):
        header = lines.next().split()
        if len(header) < 3 or header[0] != "layer" or header[1] != str(index):
            raise lines.error(f"expected header of layer {index}")
        shape = tuple(int(d) for d in header[2:])
        if spec.kind == "conv1d":
            expected = (spec.width, channels, spec.kernel)
            channels = spec.width
        else:
            expected = (spec.width, channels * length)
            channels, length = 1, spec.width
        if shape != expected:
            raise lines.error(f"layer {index} has shape {shape}, expected {expected}")
        row_size = int(np.prod(shape[1:]))
        rows = [lines.floats(lines.next(), row_size) for _ in range(shape[0])]
        W = np.vstack(rows).reshape(shape)
        b = lines.floats(lines.next(), spec.width)
        params.append((W, b))

    return SurrogateModel(
        specs=specs,
        params=params,
        input_dim=input_dim,
        K=K,
        L=L,
        output_layout=output_layout,
        history=history,
        **{key: vectors.get(key) for key in VECTOR_KEYS},
    )
