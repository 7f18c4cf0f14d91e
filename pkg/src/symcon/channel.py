"""Symbiotic-radio link physics.

Gaussian tail helpers, the spreading-factor mutualism bound, composite
SNR laws, and the finite-blocklength relation tying link success
probability to single-message airtime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

from .errors import BlocklengthError, DegenerateInputError, InfeasibleRateError

_LOG2E = math.log2(math.e)
_SQRT2 = math.sqrt(2.0)
_SQRT_PI = math.sqrt(math.pi)
_STD_NORMAL = NormalDist()

# Bisection control for airtime inversion. The bracket halves far past the
# nominal 1e-9 s tolerance so the probability round-trip holds to 1e-9 too.
_BISECT_TOL = 1e-9
_BISECT_MAX_ITER = 200


def q_function(x: float) -> float:
    """Standard-normal tail probability P(Z > x).

    Monotone decreasing, q(0) = 0.5, q(x) + q(-x) = 1.
    """
    if not math.isfinite(x):
        raise ValueError(f"q_function needs a finite argument, got {x!r}")
    return 0.5 * math.erfc(x / _SQRT2)


def q_inverse(p: float) -> float:
    """Inverse of q_function on (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"q_inverse needs p in (0,1), got {p!r}")
    return _STD_NORMAL.inv_cdf(1.0 - p)


def _erf_series(y: float) -> float:
    # Maclaurin series of erf, adequate to machine precision for |y| < 2.
    term = y
    acc = y
    y2 = y * y
    k = 0
    while True:
        k += 1
        term *= -y2 / k
        delta = term / (2 * k + 1)
        acc += delta
        if abs(delta) <= 1e-18 * abs(acc):
            return 2.0 * acc / _SQRT_PI


def _erfc_continued_fraction(y: float) -> float:
    # Upper-incomplete-gamma continued fraction at a=1/2, z=y**2,
    # evaluated with the modified Lentz scheme. Good for y >= 2.
    z = y * y
    tiny = 1e-300
    b = z + 0.5
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for k in range(1, 400):
        a = -k * (k - 0.5)
        b += 2.0
        d = a * d + b
        if d == 0.0:
            d = tiny
        c = b + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-17:
            break
    return y * math.exp(-z) / _SQRT_PI * h


def q_rational(x: float) -> float:
    """Gaussian tail via rational arithmetic only (series plus a Lentz
    continued fraction), no libm erfc. Fallback path, kept under test to
    1e-14 absolute agreement with :func:`q_function` on [-8, 8].
    """
    if not math.isfinite(x):
        raise ValueError(f"q_rational needs a finite argument, got {x!r}")
    if x < 0.0:
        return 1.0 - q_rational(-x)
    y = x / _SQRT2
    if y < 2.0:
        erfc = 1.0 - _erf_series(y)
    else:
        erfc = _erfc_continued_fraction(y)
    return 0.5 * erfc


@dataclass(frozen=True)
class ChannelParams:
    """Physical-layer symbols of one primary/secondary radio pair.

    gamma_d is the linear SNR of the direct link, gamma_b the linear SNR
    of the backscatter link, delta_gamma their ratio. Either gamma_b or
    delta_gamma may be omitted and is then derived from the other.
    """

    gamma_d: float
    gamma_b: float | None = None
    delta_gamma: float | None = None
    antennas: int = 1
    spreading_factor: int = 1

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gamma_d) and self.gamma_d > 0.0):
            raise ValueError(f"gamma_d must be positive, got {self.gamma_d!r}")
        if self.gamma_b is None and self.delta_gamma is None:
            raise ValueError("supply gamma_b or delta_gamma")
        if self.gamma_b is None:
            object.__setattr__(self, "gamma_b", self.delta_gamma * self.gamma_d)
        if self.delta_gamma is None:
            object.__setattr__(self, "delta_gamma", self.gamma_b / self.gamma_d)
        if self.gamma_b < 0.0 or self.delta_gamma < 0.0:
            raise ValueError("backscatter SNR cannot be negative")
        recomputed = self.gamma_b / self.gamma_d
        scale = max(abs(self.delta_gamma), 1.0)
        if abs(recomputed - self.delta_gamma) > 1e-12 * scale:
            raise ValueError(
                f"inconsistent SNR ratio: delta_gamma={self.delta_gamma!r} "
                f"but gamma_b/gamma_d={recomputed!r}"
            )
        if int(self.antennas) != self.antennas or self.antennas < 1:
            raise ValueError(f"antennas must be a positive integer, got {self.antennas!r}")
        if int(self.spreading_factor) != self.spreading_factor or self.spreading_factor < 1:
            raise ValueError(
                f"spreading_factor must be a positive integer, got {self.spreading_factor!r}"
            )

    @property
    def omega(self) -> float:
        """Dispersion-like combination of gamma_d, delta_gamma and the
        antenna count; exactly zero when delta_gamma is zero."""
        if self.delta_gamma == 0.0:
            return 0.0
        m = self.antennas
        gd = self.gamma_d
        dg = self.delta_gamma
        q_gd = q_function(math.sqrt(m * gd))
        num = math.sqrt(2.0 * m * dg) * (1.0 - 2.0 * q_gd)
        den = math.sqrt(1.0 / gd + 4.0 * m * dg * q_gd * (1.0 - q_gd))
        return num / den


def spreading_factor_bound(params: ChannelParams) -> float:
    """Real-valued lower bound on the spreading factor, before ceiling.

    The bound compares the detection margins of the direct and composite
    signals; it is singular at delta_gamma == 0.
    """
    if params.delta_gamma == 0.0:
        raise DegenerateInputError(
            "spreading bound is singular at delta_gamma == 0 (omega vanishes)"
        )
    m = params.antennas
    gd = params.gamma_d
    dg = params.delta_gamma
    q_hi = q_function(math.sqrt(m * gd * (1.0 + dg)))
    num = q_function(math.sqrt(m * gd)) - q_hi
    den = q_function(math.sqrt(m * gd / (1.0 + dg)) * (1.0 - dg)) - q_hi
    if den == 0.0:
        raise DegenerateInputError("spreading bound denominator vanished")
    ratio = num / den
    if not 0.0 < ratio < 1.0:
        raise DegenerateInputError(
            f"detection-margin ratio {ratio!r} outside (0,1); no finite bound"
        )
    omega = params.omega
    return (q_inverse(ratio) / omega) ** 2


def min_spreading_factor(params: ChannelParams) -> int:
    """Smallest integer spreading factor supporting mutualism (never
    below 1)."""
    return max(1, math.ceil(spreading_factor_bound(params)))


def composite_snr(params: ChannelParams) -> tuple[float, float]:
    """(primary composite SNR, secondary SNR) for one radio pair.

    The primary receiver adds the backscattered copy of its own signal;
    the secondary collects spreading gain over the backscatter SNR.
    """
    gamma_p = params.gamma_d + params.gamma_b
    gamma_s = params.spreading_factor * params.gamma_b
    return gamma_p, gamma_s


def _dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def _success_prob_raw(t: float, bandwidth: float, rate: float, cap: float,
                      subcarriers: int) -> float:
    # Normal-approximation success probability in per-channel-use form:
    # blocklength L = N*T*B, spectral rate/capacity R/B and cap/B.
    length = subcarriers * t * bandwidth
    arg = (length * (cap / bandwidth) - length * (rate / bandwidth)
           + 0.5 * math.log2(length)) / (_LOG2E * math.sqrt(length))
    return 1.0 - q_function(arg)


def _invert_raw(p_target: float, bandwidth: float, rate: float, cap: float,
                subcarriers: int) -> float:
    if cap <= rate:
        raise InfeasibleRateError(
            f"capacity {cap!r} must exceed rate {rate!r} for a finite airtime"
        )
    # Bracket grown geometrically from one channel use per subcarrier.
    t0 = 1.0 / bandwidth
    lo = hi = t0
    if _success_prob_raw(t0, bandwidth, rate, cap, subcarriers) < p_target:
        for _ in range(_BISECT_MAX_ITER):
            hi *= 2.0
            if _success_prob_raw(hi, bandwidth, rate, cap, subcarriers) >= p_target:
                break
        else:
            raise InfeasibleRateError("failed to bracket the target probability")
    else:
        for _ in range(_BISECT_MAX_ITER):
            lo *= 0.5
            if _success_prob_raw(lo, bandwidth, rate, cap, subcarriers) <= p_target:
                break
        else:
            raise InfeasibleRateError("failed to bracket the target probability")
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _success_prob_raw(mid, bandwidth, rate, cap, subcarriers) < p_target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _BISECT_TOL * 1e-9:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class LinkBudget:
    """Bandwidth/rate/capacity/power operating point of one network.

    Derived on construction: transmit power in watts, the single-message
    airtimes t_single_plain (plain link at target p_s) and
    t_single_enhanced (enhanced link at target p_e). When
    enhanced_capacity is omitted it is scaled from capacity by the
    Shannon-rate ratio of the composite and direct SNRs of `channel`,
    and equals capacity if no channel is attached.
    """

    bandwidth: float
    rate: float
    capacity: float
    enhanced_capacity: float | None = None
    subcarriers: int = 1
    transmit_power_dbm: float = 30.0
    p_s: float = 0.8
    p_e: float = 0.9
    channel: ChannelParams | None = None

    def __post_init__(self) -> None:
        for name in ("bandwidth", "rate", "capacity"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive, got {value!r}")
        if int(self.subcarriers) != self.subcarriers or self.subcarriers < 1:
            raise ValueError(f"subcarriers must be a positive integer, got {self.subcarriers!r}")
        if not (0.0 < self.p_s < 1.0 and 0.0 < self.p_e < 1.0):
            raise ValueError("p_s and p_e must lie in (0,1)")
        if self.p_s > self.p_e:
            raise ValueError(
                f"multipath gain never degrades a link: need p_s <= p_e, "
                f"got p_s={self.p_s!r}, p_e={self.p_e!r}"
            )
        if self.enhanced_capacity is None:
            if self.channel is not None:
                gamma_p, _ = composite_snr(self.channel)
                scale = math.log2(1.0 + gamma_p) / math.log2(1.0 + self.channel.gamma_d)
            else:
                scale = 1.0
            object.__setattr__(self, "enhanced_capacity", self.capacity * scale)
        if self.enhanced_capacity < self.capacity:
            raise ValueError(
                f"enhanced capacity {self.enhanced_capacity!r} below plain "
                f"capacity {self.capacity!r}"
            )

    @property
    def transmit_power_w(self) -> float:
        return _dbm_to_watts(self.transmit_power_dbm)

    @property
    def t_single_plain(self) -> float:
        """Airtime of one plain message at target success p_s."""
        return invert_latency(self.p_s, self, enhanced=False)

    @property
    def t_single_enhanced(self) -> float:
        """Airtime of one enhanced message at target success p_e."""
        return invert_latency(self.p_e, self, enhanced=True)


def link_success_prob(t: float, budget: LinkBudget, enhanced: bool = False) -> float:
    """Success probability of a single message of airtime t seconds.

    Strictly increasing in t. Raises BlocklengthError below one channel
    use (t * bandwidth < 1).
    """
    if not (math.isfinite(t) and t > 0.0):
        raise ValueError(f"airtime must be positive, got {t!r}")
    if t * budget.bandwidth < 1.0:
        raise BlocklengthError(
            f"t*B = {t * budget.bandwidth!r} grants less than one channel use"
        )
    cap = budget.enhanced_capacity if enhanced else budget.capacity
    return _success_prob_raw(t, budget.bandwidth, budget.rate, cap, budget.subcarriers)


def invert_latency(p_target: float, budget: LinkBudget, enhanced: bool = False) -> float:
    """Airtime t such that link_success_prob(t) == p_target.

    Deterministic bisection; the returned t reproduces p_target through
    the forward map within 1e-9.
    """
    if not 0.0 < p_target < 1.0:
        raise ValueError(f"p_target must lie in (0,1), got {p_target!r}")
    cap = budget.enhanced_capacity if enhanced else budget.capacity
    return _invert_raw(p_target, budget.bandwidth, budget.rate, cap, budget.subcarriers)
