"""Radio layer: Rician sampling, cascaded SNR, throughput and energy metrics.

All powers are linear watts.  Path SNR for a route with hop distances
``d_1..d_m`` (m = 1 for a direct link, 2 for one reflector, ...) is::

    P * rho_L**m * (d_1 * ... * d_m)**(-alpha) * |cascade|**2 / sigma**2
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .environment import Environment, cell_center
from .errors import (
    DegenerateGeometry,
    InvalidConfiguration,
    Unsupported,
    ValidationError,
    ZeroThroughput,
)

SPEED_OF_LIGHT = 299_792_458.0
THERMAL_NOISE_DBM_HZ = -174.0


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


def watts_to_dbm(w: float) -> float:
    return 10.0 * math.log10(w * 1000.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def thermal_noise(bandwidth_hz: float) -> float:
    return dbm_to_watts(THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(bandwidth_hz))


@dataclass(frozen=True)
class ChannelParams:
    carrier_hz: float = 60e9
    bandwidth_hz: float = 500e6
    tx_power: float = 1.0
    phase_shift_power: float = 10 ** -2.5
    noise_variance: Optional[float] = None  # None: thermal noise over the bandwidth
    pathloss_1m: float = 10 ** -3.53
    pathloss_exponent: float = 2.0
    rician_k: float = 10.0
    packets: int = 1
    bits_per_packet: int = 1000

    def __post_init__(self):
        for name in ("carrier_hz", "bandwidth_hz", "tx_power", "pathloss_1m",
                     "pathloss_exponent", "packets", "bits_per_packet"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ValidationError(f"{name} must be positive and finite, got {v!r}")
        if not self.phase_shift_power >= 0:
            raise ValidationError("phase_shift_power must be >= 0")
        if not self.rician_k >= 0:
            raise ValidationError("rician_k must be >= 0")
        if self.noise_variance is not None and not self.noise_variance > 0:
            raise ValidationError("noise_variance must be positive")

    @property
    def noise(self) -> float:
        if self.noise_variance is not None:
            return self.noise_variance
        return thermal_noise(self.bandwidth_hz)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def default_threshold(self) -> float:
        """1 bit/s/Hz over the configured bandwidth."""
        return self.bandwidth_hz


@dataclass(frozen=True)
class RisSpec:
    rows: int
    cols: int
    subgroups: int
    subgroup_side: int
    phase_power_per_subgroup: float = 10 ** -2.5
    placement: Optional[int] = None

    def __post_init__(self):
        for name in ("rows", "cols", "subgroups", "subgroup_side"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ValidationError(f"RIS {name} must be a positive integer, got {v!r}")
        if self.subgroups * self.subgroup_side ** 2 != self.rows * self.cols:
            raise ValidationError(
                f"{self.subgroups} subgroups of {self.subgroup_side}x{self.subgroup_side} "
                f"do not tile a {self.rows}x{self.cols} RIS"
            )
        if not self.phase_power_per_subgroup >= 0:
            raise ValidationError("phase_power_per_subgroup must be >= 0")

    @classmethod
    def tiled(cls, rows: int, cols: int, subgroups: int, phase_power: float = 10 ** -2.5):
        """Derive the subgroup side from the RIS shape and subgroup count."""
        if subgroups < 1 or (rows * cols) % subgroups:
            raise ValidationError(f"{subgroups} subgroups do not divide {rows}x{cols} elements")
        side = math.isqrt(rows * cols // subgroups)
        return cls(rows, cols, subgroups, side, phase_power)

    @property
    def elements(self) -> int:
        return self.rows * self.cols

    def units(self, mode: str = "gbs") -> tuple[int, int, float]:
        """(units per RIS, elements per unit, phase power per unit) for a mode.

        ``gbs`` switches one N_g x N_g subgroup with a single common phase
        shift.  ``ngbs`` drives the whole surface, paying the phase-shift power
        once per element.
        """
        if mode == "gbs":
            return self.subgroups, self.subgroup_side ** 2, self.phase_power_per_subgroup
        if mode == "ngbs":
            return 1, self.elements, self.phase_power_per_subgroup * self.elements
        raise Unsupported(f"unknown RIS mode {mode!r}")


@dataclass(frozen=True)
class ChannelRealization:
    h_in: np.ndarray
    h_out: np.ndarray
    h_mid: Optional[np.ndarray] = None
    common_phases: tuple = ()


@dataclass(frozen=True)
class LinkEvaluation:
    snr: float
    throughput: float
    energy: float
    efficiency: float


# -- sampling -------------------------------------------------------------------

def _link_key(link_id) -> int:
    digest = hashlib.blake2b(repr(link_id).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def link_rng(seed: int, link_id) -> np.random.Generator:
    """Generator keyed by (seed, link_id); independent of call order."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) % 2**64, _link_key(link_id)]))


def rician_weights(k_factor: float) -> tuple[float, float]:
    """(LoS amplitude, scatter amplitude) for a unit-power Rician entry."""
    if math.isinf(k_factor):
        return 1.0, 0.0
    return math.sqrt(k_factor / (k_factor + 1.0)), math.sqrt(1.0 / (k_factor + 1.0))


def los_phase(distance: float, params: ChannelParams) -> float:
    lam = params.wavelength
    return 2.0 * math.pi * math.fmod(distance, lam) / lam


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly symmetric CN(0, 1) samples."""
    z = rng.standard_normal(shape + (2,) if isinstance(shape, tuple) else (shape, 2))
    return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5)


def sample_link(a, b, shape, params: ChannelParams, seed: int, link_id) -> np.ndarray:
    """Rician channel between points ``a`` and ``b``.

    Every entry shares the LoS phase of the exact a-b path length; the
    scattered part is i.i.d. CN(0, 1).  ``shape`` is an element count or a
    tuple (``(n, n)`` for a reflector-to-reflector matrix).
    """
    shape = (int(shape),) if np.isscalar(shape) else tuple(int(s) for s in shape)
    if any(s < 1 for s in shape):
        raise ValidationError("channel dimensions must be >= 1")
    los, nlos = rician_weights(params.rician_k)
    d = math.dist(a, b)
    mean = los * complex(math.cos(los_phase(d, params)), math.sin(los_phase(d, params)))
    h = np.full(shape, mean, dtype=complex)
    if nlos:
        h += nlos * complex_normal(link_rng(seed, link_id), shape)
    return h


# -- SNR ---------------------------------------------------------------------------

def _check_distances(distances):
    for d in distances:
        if not d > 0:
            raise DegenerateGeometry(f"hop distance must be positive, got {d}")


def path_snr(gain: float, distances: Sequence[float], params: ChannelParams) -> float:
    """SNR of a route with cascade power ``gain`` over the given hop distances."""
    _check_distances(distances)
    dprod = math.prod(distances)
    m = len(distances)
    return params.tx_power * params.pathloss_1m ** m * dprod ** (-params.pathloss_exponent) * gain / params.noise


def cascade(reals: Sequence[np.ndarray]) -> complex:
    """Scalar cascade h_out . H_k ... H_1 . h_in for ``[h_in, H_1, ..., h_out]``."""
    x = np.asarray(reals[0])
    for h in reals[1:-1]:
        x = np.asarray(h) @ x
    return complex(np.asarray(reals[-1]) @ x)


def optimal_phase(c: complex) -> float:
    """Common phase that rotates the cascade onto the positive real axis."""
    return -math.atan2(c.imag, c.real)


def _phased_gain(c: complex, phases) -> float:
    total = float(sum(phases)) if phases else 0.0
    return abs(c * complex(math.cos(total), math.sin(total))) ** 2


def snr_single(real: ChannelRealization, d_u: float, d_v: float, params: ChannelParams) -> float:
    c = cascade([real.h_in, real.h_out])
    return path_snr(_phased_gain(c, real.common_phases), (d_u, d_v), params)


def snr_double(real: ChannelRealization, d_u: float, d_mid: float, d_v: float, params: ChannelParams) -> float:
    if real.h_mid is None:
        raise ValidationError("double reflection needs h_mid")
    c = cascade([real.h_in, real.h_mid, real.h_out])
    return path_snr(_phased_gain(c, real.common_phases), (d_u, d_mid, d_v), params)


def snr_khop(reals: Sequence[np.ndarray], distances: Sequence[float], params: ChannelParams,
             phases=()) -> float:
    """SNR through k = 1..3 reflectors; ``reals`` is ``[h_in, mids..., h_out]``."""
    k = len(distances) - 1
    if k not in (1, 2, 3):
        raise Unsupported(f"only 1 to 3 reflections are supported, got {k}")
    if len(reals) != k + 1:
        raise ValidationError(f"{k} reflections need {k + 1} channel factors, got {len(reals)}")
    return path_snr(_phased_gain(cascade(reals), phases), distances, params)


# -- rate and energy ----------------------------------------------------------------

_LN2 = math.log(2.0)


def throughput(snr: float, params: ChannelParams) -> float:
    """Shannon rate in bits/s."""
    if snr < 0:
        raise ValidationError("snr must be >= 0")
    return params.bandwidth_hz * (math.log2(1.0 + snr) if snr > 1e-6 else math.log1p(snr) / _LN2)


def energy_path(t: float, phase_powers: Sequence[float], params: ChannelParams) -> float:
    """Joules to deliver all packets at rate ``t`` through the listed reflectors."""
    if not t > 0:
        raise ZeroThroughput("throughput must be positive to deliver any packet")
    return params.packets * params.bits_per_packet * (1.0 / t) * (params.tx_power + sum(phase_powers))


def energy_single(t: float, phase_power: float, params: ChannelParams) -> float:
    return energy_path(t, (phase_power,), params)


def energy_double(t: float, phase_power_i: float, phase_power_j: float, params: ChannelParams) -> float:
    return energy_path(t, (phase_power_i, phase_power_j), params)


def efficiency(t: float, energy: float) -> float:
    """Delivered bits per joule."""
    if not energy > 0:
        raise InvalidConfiguration("energy must be positive")
    return t / energy


def evaluate(gain: float, distances: Sequence[float], phase_powers: Sequence[float],
             params: ChannelParams) -> LinkEvaluation:
    g = path_snr(gain, distances, params)
    t = throughput(g, params)
    if t <= 0:
        return LinkEvaluation(g, 0.0, math.inf, 0.0)
    e = energy_path(t, phase_powers, params)
    return LinkEvaluation(g, t, e, efficiency(t, e))


# -- per-plan channel bank ------------------------------------------------------------

class ChannelBank:
    """Deterministic channel realisations for devices and deployed RIS units.

    Device-to-unit vectors are shared by every route using that access hop.
    Unit-to-unit matrices are materialised when a unit has at most
    ``dense_limit`` elements; above that the mid hop is applied through its
    exact conditional law (LoS term plus ``||x||`` times fresh CN(0, I)
    noise), which keeps every route's marginal distribution while costing
    O(n) instead of O(n^2).
    """

    def __init__(self, env: Environment, ris_cells: Sequence[int], ris: RisSpec,
                 params: ChannelParams, seed: int, mode: str = "gbs", dense_limit: int = 64):
        self.env = env
        self.ris_cells = tuple(ris_cells)
        self.ris = ris
        self.params = params
        self.seed = int(seed)
        self.mode = mode
        self.n_units, self.n, self.unit_power = ris.units(mode)
        self.dense = self.n <= dense_limit
        self._access: dict = {}
        self._mid: dict = {}
        self._los, self._nlos = rician_weights(params.rician_k)

    def point(self, cell: int):
        return cell_center(self.env, cell)

    def hop_distances(self, u: int, chain: Sequence[int], v: int) -> list[float]:
        pts = [self.point(u)] + [self.point(self.ris_cells[i]) for i in chain] + [self.point(v)]
        return [math.dist(a, b) for a, b in zip(pts, pts[1:])]

    def access(self, device: int, ris: int) -> np.ndarray:
        """(units, n) array of device <-> unit channels."""
        key = (device, ris)
        h = self._access.get(key)
        if h is None:
            h = sample_link(self.point(device), self.point(self.ris_cells[ris]), (self.n_units, self.n),
                            self.params, self.seed, ("access", self.mode, device, self.ris_cells[ris]))
            self._access[key] = h
        return h

    def mid(self, a: int, b: int) -> np.ndarray:
        """(units_lo, units_hi, n, n) matrices from the lower-index RIS to the higher.

        ``H[t, s]`` maps unit t of the lower RIS into unit s of the higher one;
        the reverse direction is its transpose (reciprocity).
        """
        lo, hi = min(a, b), max(a, b)
        h = self._mid.get((lo, hi))
        if h is None:
            h = sample_link(self.point(self.ris_cells[lo]), self.point(self.ris_cells[hi]),
                            (self.n_units, self.n_units, self.n, self.n), self.params, self.seed,
                            ("mid", self.mode, self.ris_cells[lo], self.ris_cells[hi]))
            self._mid[(lo, hi)] = h
        return h

    def _apply_mid(self, x: np.ndarray, a: int, b: int, link_id) -> np.ndarray:
        """Propagate unit signals ``x`` (..., units_a, n) from RIS a into RIS b.

        Returns (..., units_a, units_b, n).
        """
        if self.dense:
            h = self.mid(a, b)
            if a < b:
                # x_b[s] = H[t, s] @ x_a[t]
                return np.einsum("tsij,...tj->...tsi", h, x)
            # reverse direction uses the transpose of the b -> a matrix: H[s, t].T
            return np.einsum("stji,...tj->...tsi", h, x)
        d = math.dist(self.point(self.ris_cells[a]), self.point(self.ris_cells[b]))
        ph = los_phase(d, self.params)
        mu = self._los * complex(math.cos(ph), math.sin(ph))
        lead = x.shape[:-1]
        # every unit of b receives the same LoS image of x plus fresh scatter
        s = x.sum(axis=-1)[..., None, None]
        norm = np.linalg.norm(x, axis=-1)[..., None, None]
        shape = lead + (self.n_units, self.n)
        out = np.broadcast_to(mu * s, shape).astype(complex)
        if self._nlos:
            w = complex_normal(link_rng(self.seed, link_id), shape)
            out = out + self._nlos * norm * w
        return out

    def chain_gains(self, u: int, chain: Sequence[int], v: int) -> np.ndarray:
        """|cascade|^2 for every unit combination along ``chain`` (RIS indices).

        Result has one axis per reflector, indexed by unit (0-based).
        """
        x = self.access(u, chain[0])  # (K, n)
        for hop, (a, b) in enumerate(zip(chain, chain[1:])):
            x = self._apply_mid(x, a, b, ("route", self.mode, u, v, tuple(chain), hop))
        out = self.access(v, chain[-1])  # (K, n)
        c = np.einsum("...ti,ti->...t", x, out)
        return np.abs(c) ** 2

    def direct(self, u: int, v: int) -> LinkEvaluation:
        lo, hi = min(u, v), max(u, v)
        h = sample_link(self.point(u), self.point(v), 1, self.params, self.seed, ("direct", lo, hi))
        d = math.dist(self.point(u), self.point(v))
        return evaluate(float(abs(h[0]) ** 2), (d,), (), self.params)

    def realization(self, u: int, chain: Sequence[int], units: Sequence[int], v: int) -> ChannelRealization:
        """Explicit single or double realisation (dense banks only)."""
        if not self.dense:
            raise Unsupported("explicit realisations need a dense channel bank")
        if len(chain) not in (1, 2):
            raise Unsupported("realisations cover single and double reflection")
        h_in = self.access(u, chain[0])[units[0]]
        h_out = self.access(v, chain[-1])[units[-1]]
        h_mid = None
        if len(chain) == 2:
            a, b = chain
            t, s = units
            full = self.mid(a, b)
            h_mid = full[t, s] if a < b else full[s, t].T
        factors = [h_in] + ([h_mid] if h_mid is not None else []) + [h_out]
        c = cascade(factors)
        return ChannelRealization(h_in, h_out, h_mid, (optimal_phase(c),) + (0.0,) * (len(chain) - 1))
