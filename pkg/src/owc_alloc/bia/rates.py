"""
Achievable BIA user rates and per-link rates (bits/s/Hz)
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..channel.model import ChannelMatrix, is_full_rank
from ..utils.errors import DegenerateGeometryError, InvalidParameterError
from .supersymbol import check_dimensions


@dataclass(frozen=True)
class NoiseCovariance:
    """Post-cancellation noise covariance diag(K I_{L-1}, 1)"""

    R_z: np.ndarray

    @property
    def determinant(self) -> float:
        return float(np.prod(np.diag(self.R_z)))


def noise_covariance(L: int, K: int) -> NoiseCovariance:
    check_dimensions(L, K)
    diagonal = np.full(L, float(K))
    diagonal[-1] = 1.0
    return NoiseCovariance(R_z=np.diag(diagonal))


def _validate(channel: ChannelMatrix, stream_power: float, L: int, K: int):
    if not stream_power >= 0:
        raise InvalidParameterError(f"stream power must be nonnegative, got {stream_power}")
    if K < 1:
        raise InvalidParameterError(f"K must be at least 1, got {K}")
    if channel.H.shape[1] != L:
        raise InvalidParameterError(f"channel has {channel.H.shape[1]} APs, expected L={L}")


def user_rate(channel: ChannelMatrix, stream_power: float, L: int, K: int) -> float:
    """(1/(L+K-1)) log2 det(I + (P_str/sigma^2) H H^T R_z^-1)"""
    _validate(channel, stream_power, L, K)
    R_z = noise_covariance(L, K).R_z
    H = channel.H
    if H.shape != (L, L) or not is_full_rank(H):
        raise DegenerateGeometryError("channel matrix is singular", user=channel.user_id)

    # det(I + c H H^T R^-1) = det(I + c R^-1/2 H H^T R^-1/2), which is symmetric positive definite
    scaled = H / np.sqrt(np.diag(R_z))[:, None]
    gram = np.eye(L) + (stream_power / channel.noise_var) * scaled @ scaled.T
    sign, logdet = np.linalg.slogdet(gram)
    if sign <= 0:
        raise DegenerateGeometryError("rate determinant is not positive", user=channel.user_id)
    return logdet / math.log(2.0) / (L + K - 1)


def link_rates(channel: ChannelMatrix, stream_power: float, K: int) -> np.ndarray:
    """Per-link rates of one user towards every AP, using the best-aligned mode per AP"""
    L = channel.L
    _validate(channel, stream_power, L, K)
    best_gain_sq = np.max(channel.H, axis=0) ** 2
    snr = stream_power * best_gain_sq / (K * channel.noise_var)
    return np.log1p(snr) / math.log(2.0) / (L + K - 1)


def per_link_rate(channel: ChannelMatrix, stream_power: float, l: int, L: int, K: int) -> float:
    if not 0 <= l < channel.L:
        raise IndexError(f"AP index {l} out of range for L={channel.L}")
    _validate(channel, stream_power, L, K)
    return float(link_rates(channel, stream_power, K)[l])


def rate_matrix(channels: Sequence[ChannelMatrix], stream_power: float) -> np.ndarray:
    """K x L matrix of per-link rates r[k, l]"""
    K = len(channels)
    if K == 0:
        raise InvalidParameterError("at least one channel is required")
    return np.vstack([link_rates(channel, stream_power, K) for channel in channels])
