"""
Blind interference alignment supersymbols

Block 1 holds (L-1)^K slots indexed by mode tuples t in {0..L-2}^K, user k
listening with mode t[k]. User k's alignment block a = t without t[k] spans
the L-1 Block 1 slots sharing a plus one Block 2 slot where only that block
is transmitted and user k listens with the reference mode L-1. In that slot
every other user j listens with mode a[j], which measures the interference
it sees from user k during Block 1.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..channel.model import ChannelMatrix, is_full_rank
from ..utils.errors import (
    DecodeFailureError,
    InvalidParameterError,
    ProblemTooLargeError,
    UnsupportedConfigurationError,
)

logger = logging.getLogger(__name__)

MAX_PLAN_SLOTS = 1_000_000


def check_dimensions(L: int, K: int):
    if L < 2:
        raise UnsupportedConfigurationError(f"BIA needs at least two preset modes, got L={L}")
    if K < 1:
        raise InvalidParameterError(f"K must be at least 1, got {K}")


def supersymbol_length(L: int, K: int) -> int:
    check_dimensions(L, K)
    return (L - 1) ** K + K * (L - 1) ** (K - 1)


def sum_dof(L: int, K: int) -> float:
    """Decodable symbols per slot over the whole supersymbol"""
    check_dimensions(L, K)
    return K * L / (L + K - 1)


class SlotAssignment(NamedTuple):
    user: int
    mode: int
    block: Optional[int]


@dataclass(frozen=True)
class SupersymbolPlan:
    """
    Slot schedule of one supersymbol

    modes[n, k] is the preset mode of user k in slot n. activation[k, n, a]
    is 1 when alignment block a of user k is transmitted in slot n.
    """

    L: int
    K: int
    length: int
    block1_len: int
    block2_len: int
    modes: np.ndarray
    activation: np.ndarray

    @property
    def blocks_per_user(self) -> int:
        return (self.L - 1) ** (self.K - 1)

    @property
    def sum_dof(self) -> float:
        return sum_dof(self.L, self.K)

    @property
    def schedule(self) -> List[List[SlotAssignment]]:
        """Per slot: every user's mode and the block served to it, if any"""
        slots = []
        for n in range(self.length):
            row = []
            for k in range(self.K):
                served = np.flatnonzero(self.activation[k, n])
                row.append(SlotAssignment(k, int(self.modes[n, k]), int(served[0]) if served.size else None))
            slots.append(row)
        return slots

    def precoder(self, user: int) -> np.ndarray:
        """Beamforming matrix of one user: kron(activation, I_L), shape (length*L, blocks*L)"""
        if not 0 <= user < self.K:
            raise InvalidParameterError(f"user index {user} out of range for K={self.K}")
        return np.kron(self.activation[user], np.eye(self.L, dtype=int))

    def block1_slot(self, t: Sequence[int]) -> int:
        return _tuple_index(t, self.L - 1)

    def block2_slot(self, user: int, block: int) -> int:
        return self.block1_len + user * self.blocks_per_user + block


def _tuple_index(digits: Sequence[int], base: int) -> int:
    index = 0
    for digit in digits:
        index = index * base + int(digit)
    return index


def _insert(block: Tuple[int, ...], user: int, mode: int) -> Tuple[int, ...]:
    return block[:user] + (mode,) + block[user:]


def build_supersymbol(L: int, K: int) -> SupersymbolPlan:
    length = supersymbol_length(L, K)
    if length > MAX_PLAN_SLOTS:
        raise ProblemTooLargeError(f"supersymbol of {length} slots exceeds the {MAX_PLAN_SLOTS}-slot limit")

    base = L - 1
    block1_len = base ** K
    n_blocks = base ** (K - 1)
    modes = np.zeros((length, K), dtype=int)
    activation = np.zeros((K, length, n_blocks), dtype=int)

    for n, t in enumerate(itertools.product(range(base), repeat=K)):
        modes[n] = t
        for k in range(K):
            activation[k, n, _tuple_index(t[:k] + t[k + 1:], base)] = 1

    for k in range(K):
        for a_index, a in enumerate(itertools.product(range(base), repeat=K - 1)):
            n = block1_len + k * n_blocks + a_index
            modes[n] = _insert(a, k, L - 1)
            activation[k, n, a_index] = 1

    logger.debug(f"Built supersymbol L={L} K={K} with {length} slots")
    return SupersymbolPlan(
        L=L, K=K, length=length, block1_len=block1_len, block2_len=length - block1_len,
        modes=modes, activation=activation,
    )


def check_plan(plan: SupersymbolPlan) -> List[str]:
    """Return every structural violation of the plan (empty when valid)"""
    problems = []
    L, K = plan.L, plan.K
    if plan.length != supersymbol_length(L, K):
        problems.append(f"length {plan.length} != {supersymbol_length(L, K)}")
    if plan.block1_len + plan.block2_len != plan.length:
        problems.append("block lengths do not add up to the supersymbol length")
    if not np.isin(plan.activation, (0, 1)).all():
        problems.append("beamforming entries outside {0, 1}")

    for k in range(K):
        act = plan.activation[k]
        if act.shape[1] != plan.blocks_per_user:
            problems.append(f"user {k} has {act.shape[1]} alignment blocks, expected {plan.blocks_per_user}")
        for a in range(act.shape[1]):
            slots = np.flatnonzero(act[:, a])
            if len(slots) != L:
                problems.append(f"user {k} block {a} spans {len(slots)} slots, expected {L}")
            if sorted(plan.modes[slots, k]) != list(range(L)):
                problems.append(f"user {k} block {a} does not see every preset mode once")

    for n in range(plan.block1_len, plan.length):
        active = plan.activation[:, n, :].sum()
        if active != 1:
            problems.append(f"Block 2 slot {n} serves {active} streams")

    # every Block 1 interferer must appear alone in a slot where the victim keeps its mode
    for n in range(plan.block1_len):
        for j in range(K):
            blocks = np.flatnonzero(plan.activation[j, n])
            if len(blocks) != 1:
                problems.append(f"user {j} has {len(blocks)} streams in Block 1 slot {n}")
                continue
            alone = [
                m for m in range(plan.block1_len, plan.length)
                if plan.activation[j, m, blocks[0]] and plan.activation[:, m, :].sum() == 1
            ]
            for k in range(K):
                if k == j:
                    continue
                if not any(plan.modes[m, k] == plan.modes[n, k] for m in alone):
                    problems.append(f"interference of user {j} on user {k} in slot {n} is not measurable")
    return problems


def _received(plan: SupersymbolPlan, H: List[np.ndarray], symbols: List[np.ndarray]) -> np.ndarray:
    """Noiseless received samples y[k, n]"""
    x = np.zeros((plan.length, plan.L))
    for k in range(plan.K):
        x += plan.activation[k] @ symbols[k]
    y = np.empty((plan.K, plan.length))
    for k in range(plan.K):
        y[k] = np.einsum("nl,nl->n", H[k][plan.modes[:, k]], x)
    return y


class DecodeResult(NamedTuple):
    decoded: List[np.ndarray]
    residual: float


def verify_decoding(
    plan: SupersymbolPlan,
    channels: Sequence[ChannelMatrix],
    symbols: Sequence[np.ndarray],
    noise_std: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> DecodeResult:
    """
    Transmit one supersymbol, cancel interference using Block 2 and invert
    each user's channel

    symbols[k] has shape (blocks_per_user, L).
    """
    if len(channels) != plan.K or len(symbols) != plan.K:
        raise InvalidParameterError(f"expected {plan.K} channels and symbol sets")
    H = [np.asarray(c.H if isinstance(c, ChannelMatrix) else c, dtype=float) for c in channels]
    u = [np.asarray(s, dtype=float).reshape(plan.blocks_per_user, plan.L) for s in symbols]
    for k, Hk in enumerate(H):
        if Hk.shape != (plan.L, plan.L):
            raise InvalidParameterError(f"user {k} channel has shape {Hk.shape}, expected {(plan.L, plan.L)}")
        if not is_full_rank(Hk):
            raise DecodeFailureError(f"channel matrix of user {k} is singular")

    y = _received(plan, H, u)
    if noise_std > 0:
        rng = rng if rng is not None else np.random.default_rng()
        y = y + rng.normal(0.0, noise_std, size=y.shape)

    L, K = plan.L, plan.K
    decoded = []
    for k in range(K):
        estimates = np.empty((plan.blocks_per_user, L))
        for a_index, a in enumerate(itertools.product(range(L - 1), repeat=K - 1)):
            z = np.empty(L)
            for m in range(L - 1):
                t = _insert(a, k, m)
                sample = y[k, plan.block1_slot(t)]
                for j in range(K):
                    if j != k:
                        block_j = _tuple_index(t[:j] + t[j + 1:], L - 1)
                        sample -= y[k, plan.block2_slot(j, block_j)]
                z[m] = sample
            z[L - 1] = y[k, plan.block2_slot(k, a_index)]
            try:
                estimates[a_index] = np.linalg.solve(H[k], z)
            except np.linalg.LinAlgError as e:
                raise DecodeFailureError(f"cannot invert the channel of user {k}: {e}") from e
        decoded.append(estimates)

    residual = max(float(np.max(np.abs(d - s), initial=0.0)) for d, s in zip(decoded, u))
    return DecodeResult(decoded, residual)


def plan_to_text(plan: SupersymbolPlan) -> str:
    """Slot table: one line per slot with user:mode:block entries ('-' when not served)"""
    lines = [f"# supersymbol L={plan.L} K={plan.K} length={plan.length} "
             f"block1={plan.block1_len} block2={plan.block2_len}"]
    for n, row in enumerate(plan.schedule):
        part = "block1" if n < plan.block1_len else "block2"
        entries = " ".join(
            f"u{a.user}:m{a.mode}:{'-' if a.block is None else a.block}" for a in row
        )
        lines.append(f"slot {n} {part} {entries}")
    return "\n".join(lines) + "\n"
