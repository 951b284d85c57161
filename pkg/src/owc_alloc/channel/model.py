"""
Gaussian-beam VCSEL propagation, line-of-sight gains for reconfigurable
multi-photodiode detectors and receiver noise
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.constants import Boltzmann, elementary_charge

from ..utils.config import ChannelConfig, RoomConfig
from ..utils.errors import (
    DegenerateGeometryError,
    InvalidParameterError,
    UnsupportedConfigurationError,
)

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-10
ORIENTATION_TOLERANCE = 1e-9


@dataclass(frozen=True)
class VcselParams:
    """Transmitter and photodetection constants in SI units"""

    wavelength: float
    beam_waist: float
    tx_power: float
    bandwidth: float
    rin_db_hz: float
    responsivity: float

    def __post_init__(self):
        for name in ("wavelength", "beam_waist", "tx_power", "bandwidth", "responsivity"):
            value = getattr(self, name)
            if not value > 0:
                raise InvalidParameterError(f"{name} must be positive, got {value}")
        if not self.rin_db_hz < 0:
            raise InvalidParameterError(f"rin_db_hz must be a negative dB/Hz value, got {self.rin_db_hz}")

    @classmethod
    def from_config(cls, cfg: ChannelConfig) -> "VcselParams":
        return cls(
            wavelength=cfg.wavelength_nm * 1e-9,
            beam_waist=cfg.beam_waist_um * 1e-6,
            tx_power=cfg.tx_power_mw * 1e-3,
            bandwidth=cfg.bandwidth_ghz * 1e9,
            rin_db_hz=cfg.rin_db_hz,
            responsivity=cfg.responsivity_a_w,
        )


@dataclass(frozen=True)
class DetectorParams:
    """Reconfigurable detector: M photodiodes sharing the area A_rec"""

    area: float
    photodiodes: int
    fov_deg: float = 45.0
    mode_tilt_deg: float = 25.0
    filter_gain: float = 1.0
    load_ohms: float = 50.0
    temperature_k: float = 300.0

    def __post_init__(self):
        if not self.area > 0:
            raise InvalidParameterError(f"detector area must be positive, got {self.area}")
        if self.photodiodes < 1:
            raise InvalidParameterError(f"photodiodes must be at least 1, got {self.photodiodes}")
        if not 0 < self.fov_deg <= 90:
            raise InvalidParameterError(f"fov_deg must lie in (0, 90], got {self.fov_deg}")
        if not 0 <= self.mode_tilt_deg < 90:
            raise InvalidParameterError(f"mode_tilt_deg must lie in [0, 90), got {self.mode_tilt_deg}")
        if not self.filter_gain > 0:
            raise InvalidParameterError(f"filter_gain must be positive, got {self.filter_gain}")

    @classmethod
    def from_config(cls, cfg: ChannelConfig) -> "DetectorParams":
        return cls(
            area=cfg.detector_area_mm2 * 1e-6,
            photodiodes=cfg.photodiodes,
            fov_deg=cfg.fov_deg,
            mode_tilt_deg=cfg.mode_tilt_deg,
            filter_gain=cfg.filter_gain,
            load_ohms=cfg.load_ohms,
            temperature_k=cfg.temperature_k,
        )

    @property
    def element_area(self) -> float:
        """A_m = A_rec / M"""
        return self.area / self.photodiodes

    def preset_orientations(self) -> np.ndarray:
        """
        Unit normals of the preset modes, shape (M, 3)

        Pyramid arrangement: the tilted modes at equally spaced azimuths
        come first, followed by one vertical mode when M is odd.
        """
        m = self.photodiodes
        n_tilted = m - (m % 2)
        tilt = math.radians(self.mode_tilt_deg)
        azimuths = 2.0 * np.pi * np.arange(n_tilted) / max(n_tilted, 1)
        tilted = np.column_stack([
            np.sin(tilt) * np.cos(azimuths),
            np.sin(tilt) * np.sin(azimuths),
            np.full(n_tilted, np.cos(tilt)),
        ])
        if m % 2:
            tilted = np.vstack([tilted, [0.0, 0.0, 1.0]])
        return tilted


@dataclass(frozen=True)
class NetworkTopology:
    """Room, ceiling AP positions, users on the receiving plane and their detector"""

    room_dims: np.ndarray
    ap_positions: np.ndarray
    user_positions: np.ndarray
    plane_gap: float
    detector: DetectorParams
    orientations: np.ndarray = field(default=None)

    def __post_init__(self):
        room = np.asarray(self.room_dims, dtype=float)
        aps = np.atleast_2d(np.asarray(self.ap_positions, dtype=float))
        users = np.atleast_2d(np.asarray(self.user_positions, dtype=float))
        orientations = self.orientations
        if orientations is None:
            orientations = self.detector.preset_orientations()
        orientations = np.atleast_2d(np.asarray(orientations, dtype=float))

        object.__setattr__(self, "room_dims", room)
        object.__setattr__(self, "ap_positions", aps)
        object.__setattr__(self, "user_positions", users)
        object.__setattr__(self, "orientations", orientations)

        if room.shape != (3,) or np.any(room <= 0):
            raise InvalidParameterError(f"room_dims must be three positive lengths, got {room}")
        if not self.plane_gap > 0:
            raise InvalidParameterError(f"plane_gap must be positive, got {self.plane_gap}")
        if aps.shape[1] != 3 or users.shape[1] != 3:
            raise InvalidParameterError("positions must be 3-D points")
        if len(aps) < 1 or len(users) < 1:
            raise InvalidParameterError("topology needs at least one AP and one user")
        for label, points in (("AP", aps), ("user", users)):
            if np.any(points < -1e-12) or np.any(points > room + 1e-12):
                raise InvalidParameterError(f"{label} position outside the room")
        norms = np.linalg.norm(orientations, axis=1)
        if np.any(np.abs(norms - 1.0) > ORIENTATION_TOLERANCE):
            raise InvalidParameterError("preset mode orientations must be unit vectors")
        if len(orientations) != self.detector.photodiodes:
            raise InvalidParameterError(
                f"expected {self.detector.photodiodes} orientations, got {len(orientations)}"
            )

    @property
    def L(self) -> int:
        return len(self.ap_positions)

    @property
    def K(self) -> int:
        return len(self.user_positions)

    @property
    def M(self) -> int:
        return len(self.orientations)

    def with_users(self, user_xy: np.ndarray) -> "NetworkTopology":
        """Same room and APs with users moved to new receiving-plane coordinates"""
        return NetworkTopology(
            room_dims=self.room_dims,
            ap_positions=self.ap_positions,
            user_positions=_plane_points(user_xy, self.room_dims[2] - self.plane_gap),
            plane_gap=self.plane_gap,
            detector=self.detector,
            orientations=self.orientations,
        )


@dataclass(frozen=True)
class ChannelMatrix:
    """Preset-mode gains of one user: H[m, l] for mode m and AP l"""

    user_id: int
    H: np.ndarray
    noise_var: float

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        object.__setattr__(self, "H", H)
        if np.any(H < 0) or not np.all(np.isfinite(H)):
            raise InvalidParameterError("channel gains must be finite and nonnegative")
        if not self.noise_var > 0:
            raise InvalidParameterError(f"noise variance must be positive, got {self.noise_var}")

    @property
    def L(self) -> int:
        return self.H.shape[1]


def _plane_points(user_xy: np.ndarray, height: float) -> np.ndarray:
    xy = np.atleast_2d(np.asarray(user_xy, dtype=float))
    return np.column_stack([xy, np.full(len(xy), height)])


def ap_grid(room: RoomConfig) -> np.ndarray:
    """Ceiling AP positions on a uniform rows x cols grid, shape (L, 3)"""
    xs = (np.arange(room.ap_cols) + 0.5) * room.width_m / room.ap_cols
    ys = (np.arange(room.ap_rows) + 0.5) * room.depth_m / room.ap_rows
    grid_x, grid_y = np.meshgrid(xs, ys)
    return np.column_stack([
        grid_x.ravel(),
        grid_y.ravel(),
        np.full(grid_x.size, room.height_m),
    ])


def build_topology(room: RoomConfig, detector: DetectorParams, user_xy: np.ndarray) -> NetworkTopology:
    """Topology for the configured room with users at the given plane coordinates"""
    return NetworkTopology(
        room_dims=np.array([room.width_m, room.depth_m, room.height_m]),
        ap_positions=ap_grid(room),
        user_positions=_plane_points(user_xy, room.height_m - room.plane_gap_m),
        plane_gap=room.plane_gap_m,
        detector=detector,
    )


def beam_radius(beam_waist: float, wavelength: float, distance: float) -> float:
    """Gaussian beam radius W_d at axial distance d"""
    if not beam_waist > 0 or not wavelength > 0:
        raise InvalidParameterError("beam waist and wavelength must be positive")
    if distance < 0:
        raise InvalidParameterError(f"distance must be nonnegative, got {distance}")
    rayleigh = math.pi * beam_waist ** 2 / wavelength
    return beam_waist * math.sqrt(1.0 + (distance / rayleigh) ** 2)


def axial_received_power(tx_power: float, beam_radius_d: float, element_area: float, literal: bool = False) -> float:
    """
    Power collected by a photodiode directly below the VCSEL

    Default: encircled power of a circular aperture of radius sqrt(A_m/pi).
    literal: the exponent uses A_m / (2 pi W_d) as the integration limit.
    """
    if not tx_power > 0 or not beam_radius_d > 0 or not element_area > 0:
        raise InvalidParameterError("power, beam radius and area must be positive")
    if literal:
        exponent = -2.0 * (element_area / (2.0 * math.pi * beam_radius_d)) ** 2
    else:
        exponent = -2.0 * (element_area / math.pi) / beam_radius_d ** 2
    return tx_power * -math.expm1(exponent)


def _gain_matrix(
    ap_positions: np.ndarray,
    user_position: np.ndarray,
    orientations: np.ndarray,
    vcsel: VcselParams,
    detector: DetectorParams,
    literal: bool,
) -> np.ndarray:
    """LoS gains of every (mode, AP) pair for one user, shape (M, L)"""
    delta = ap_positions - user_position
    heights = delta[:, 2]
    if np.any(heights <= 0):
        raise InvalidParameterError("every AP must lie above the receiving plane")

    offsets_sq = delta[:, 0] ** 2 + delta[:, 1] ** 2
    axial = np.empty(len(ap_positions))
    radii = np.empty(len(ap_positions))
    for l, d in enumerate(heights):
        radii[l] = beam_radius(vcsel.beam_waist, vcsel.wavelength, d)
        axial[l] = axial_received_power(1.0, radii[l], detector.element_area, literal)
    profile = axial * np.exp(-2.0 * offsets_sq / radii ** 2)

    directions = delta / np.linalg.norm(delta, axis=1, keepdims=True)
    cos_inc = orientations @ directions.T
    cos_fov = math.cos(math.radians(detector.fov_deg))
    visible = (cos_inc >= cos_fov) & (cos_inc > 0)
    return np.where(visible, cos_inc * profile[None, :] * detector.filter_gain, 0.0)


def los_gain(
    ap_pos: Sequence[float],
    user_pos: Sequence[float],
    mode_orientation: Sequence[float],
    fov_deg: float,
    vcsel: VcselParams,
    element_area: float,
    literal: bool = False,
    filter_gain: float = 1.0,
) -> float:
    """Fraction of P_t received by one preset mode from one AP (0 outside the FOV)"""
    orientation = np.asarray(mode_orientation, dtype=float)
    norm = np.linalg.norm(orientation)
    if norm == 0:
        raise InvalidParameterError("mode orientation must be nonzero")
    detector = DetectorParams(
        area=element_area, photodiodes=1, fov_deg=fov_deg, filter_gain=filter_gain,
    )
    gains = _gain_matrix(
        np.atleast_2d(np.asarray(ap_pos, dtype=float)),
        np.asarray(user_pos, dtype=float),
        np.atleast_2d(orientation / norm),
        vcsel,
        detector,
        literal,
    )
    return float(gains[0, 0])


def noise_variance(
    received_power: float,
    vcsel: VcselParams,
    temperature: float = 300.0,
    load_ohms: float = 50.0,
) -> float:
    """Shot + thermal + RIN noise variance (A^2) at the photodiode output"""
    if received_power < 0:
        raise InvalidParameterError(f"received power must be nonnegative, got {received_power}")
    photocurrent = vcsel.responsivity * received_power
    shot = 2.0 * elementary_charge * photocurrent * vcsel.bandwidth
    thermal = 4.0 * Boltzmann * temperature / load_ohms * vcsel.bandwidth
    rin = 10.0 ** (vcsel.rin_db_hz / 10.0) * photocurrent ** 2 * vcsel.bandwidth
    return shot + thermal + rin


def build_channel_matrix(
    topology: NetworkTopology,
    vcsel: VcselParams,
    user: int,
    strict: bool = True,
    literal: bool = False,
) -> ChannelMatrix:
    """
    Channel matrix of one user from the first L preset modes

    With strict=False the rank check is skipped; the rate pipeline only
    needs per-link gains.
    """
    if not 0 <= user < topology.K:
        raise InvalidParameterError(f"user index {user} out of range for K={topology.K}")
    if topology.M < topology.L:
        raise UnsupportedConfigurationError(
            f"detector has {topology.M} preset modes but the network has {topology.L} APs"
        )

    H = _gain_matrix(
        topology.ap_positions,
        topology.user_positions[user],
        topology.orientations[: topology.L],
        vcsel,
        topology.detector,
        literal,
    )
    received = vcsel.tx_power * float(H.sum(axis=1).max())
    sigma2 = noise_variance(received, vcsel, topology.detector.temperature_k, topology.detector.load_ohms)

    if not is_full_rank(H):
        if strict:
            raise DegenerateGeometryError("channel matrix is rank deficient", user=user)
        logger.debug(f"User {user} has a rank-deficient channel matrix")
    return ChannelMatrix(user_id=user, H=H, noise_var=sigma2)


def channel_matrices(
    topology: NetworkTopology,
    vcsel: VcselParams,
    strict: bool = False,
    literal: bool = False,
) -> List[ChannelMatrix]:
    return [build_channel_matrix(topology, vcsel, k, strict, literal) for k in range(topology.K)]


def is_full_rank(H: np.ndarray) -> bool:
    scale = np.linalg.norm(H)
    if scale == 0:
        return False
    return int(np.linalg.matrix_rank(H, tol=RANK_TOLERANCE * scale)) == min(H.shape)


def coverage_radius(
    vcsel: VcselParams,
    detector: DetectorParams,
    plane_gap: float,
    stream_power: float,
    users: int,
    snr_threshold_db: float = 0.0,
    literal: bool = False,
) -> float:
    """
    Offset from an AP's beam axis at which the best-link SNR falls to the threshold

    Uses the per-link SNR P_str g^2 / (K sigma^2) with the best-aligned
    mode of an on-axis user. Returns 0 when even the on-axis SNR is below it.
    """
    if users < 1:
        raise InvalidParameterError(f"users must be at least 1, got {users}")
    radius = beam_radius(vcsel.beam_waist, vcsel.wavelength, plane_gap)
    axial = axial_received_power(1.0, radius, detector.element_area, literal)
    best_cos = float(detector.preset_orientations()[:, 2].max())
    if best_cos < math.cos(math.radians(detector.fov_deg)):
        return 0.0
    gain = axial * best_cos * detector.filter_gain
    sigma2 = noise_variance(vcsel.tx_power * gain, vcsel, detector.temperature_k, detector.load_ohms)
    snr0 = stream_power * gain ** 2 / (users * sigma2)
    threshold = 10.0 ** (snr_threshold_db / 10.0)
    if snr0 <= threshold:
        return 0.0
    return 0.5 * radius * math.sqrt(math.log(snr0 / threshold))
