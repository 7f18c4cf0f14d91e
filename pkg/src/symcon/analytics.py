"""Closed-form consensus performance models.

Success rate, latency, communication overhead, and energy for PBFT- and
RAFT-style consensus over a mix of plain, enhanced, and backscatter
links. Success semantics are node-centric with a cumulative death
budget: a node dies in a phase when more of its phase links fail than
the phase tolerates, and consensus succeeds when total deaths stay
within the fault budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

from .errors import CatalogError, DegenerateInputError

PBFT_LIKE = frozenset({
    "PBFT", "S-PBFT", "T-PBFT", "ST-PBFT", "ABC-PBFT", "SABC-PBFT",
    "VaaP", "S-VaaP", "DPBFT", "S-DPBFT", "NBFT", "S-NBFT",
})
RAFT_LIKE = frozenset({
    "RAFT", "S-RAFT", "TH-RAFT", "STH-RAFT", "KRAFT", "S-KRAFT",
    "VSSB-RAFT", "SVSSB-RAFT",
})
ALL_CMS = PBFT_LIKE | RAFT_LIKE

SPBFT_PHASES = ("pre_prepare", "prepare", "commit", "reply")

# Switch to log-space binomials above this population to dodge overflow.
_LOG_SPACE_N = 60


def pbft_fault_bound(n: int) -> int:
    """Largest tolerable Byzantine count, floor((n-1)/3)."""
    if n < 1:
        raise ValueError(f"need at least one node, got {n!r}")
    return (n - 1) // 3


def raft_fault_bound(n: int) -> int:
    """Largest tolerable crash count, floor((n-1)/2)."""
    if n < 1:
        raise ValueError(f"need at least one node, got {n!r}")
    return (n - 1) // 2


def cm_family(cm: str) -> str:
    if cm in PBFT_LIKE:
        return "pbft"
    if cm in RAFT_LIKE:
        return "raft"
    raise CatalogError(f"unknown consensus mechanism {cm!r}")


@dataclass(frozen=True)
class ConsensusConfig:
    """One consensus instance: mechanism, size, budget, link quality.

    fault_budget defaults to the family bound. p_b is the backscatter
    link success probability and defaults to p_s. enhanced_direction
    selects which RAFT-style direction is labeled enhanced in reported
    intermediates; the two-stage composite is symmetric in the labels,
    so the numeric success rate does not depend on it.
    """

    n: int
    cm: str = "S-PBFT"
    fault_budget: int | None = None
    multiplexing: str = "FD"
    p_s: float = 0.8
    p_e: float = 0.9
    p_b: float | None = None
    enhanced_direction: str = "uplink"

    def __post_init__(self) -> None:
        family = cm_family(self.cm)
        min_n = 4 if family == "pbft" else 3
        if int(self.n) != self.n or self.n < min_n:
            raise DegenerateInputError(
                f"{self.cm} needs at least {min_n} nodes, got {self.n!r}"
            )
        if self.multiplexing not in ("FD", "TD"):
            raise ValueError(f"multiplexing must be FD or TD, got {self.multiplexing!r}")
        # The operating regime is the open interval; the closed endpoints
        # stay admissible for degenerate-limit checks (certain loss/win).
        if not (0.0 <= self.p_s <= 1.0 and 0.0 <= self.p_e <= 1.0):
            raise ValueError("p_s and p_e must lie in [0,1]")
        if self.p_s > self.p_e:
            raise ValueError(
                f"enhancement never degrades a link: need p_s <= p_e, "
                f"got p_s={self.p_s!r}, p_e={self.p_e!r}"
            )
        if self.p_b is None:
            object.__setattr__(self, "p_b", self.p_s)
        if not 0.0 <= self.p_b <= 1.0:
            raise ValueError(f"p_b must lie in [0,1], got {self.p_b!r}")
        if self.enhanced_direction not in ("uplink", "downlink"):
            raise ValueError(
                f"enhanced_direction must be uplink or downlink, "
                f"got {self.enhanced_direction!r}"
            )
        if self.fault_budget is None:
            bound = pbft_fault_bound(self.n) if family == "pbft" else raft_fault_bound(self.n)
            object.__setattr__(self, "fault_budget", bound)
        if int(self.fault_budget) != self.fault_budget or self.fault_budget < 0:
            raise ValueError(f"fault_budget must be a non-negative integer")

    @property
    def family(self) -> str:
        return cm_family(self.cm)

    def baseline_twin(self) -> "ConsensusConfig":
        """Same structure with enhancement stripped (p_e := p_s)."""
        twin_cm = self.cm[2:] if self.cm.startswith("S-") else self.cm
        if self.cm.startswith("S") and not self.cm.startswith("S-"):
            twin_cm = self.cm[1:]  # SABC-PBFT, STH-RAFT, SVSSB-RAFT style ids
        return replace(self, cm=twin_cm, p_e=self.p_s, p_b=self.p_s)


@dataclass(frozen=True)
class PhaseTimings:
    """Phase airtimes: t1/t2 are the plain broadcast and single-message
    airtimes, t3/t4 their enhanced counterparts. t1 == (n-1) t2 and
    t3 == (n-1) t4 for the same n.
    """

    t1: float
    t2: float
    t3: float
    t4: float

    def __post_init__(self) -> None:
        for name in ("t1", "t2", "t3", "t4"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive, got {value!r}")
        ratio_plain = self.t1 / self.t2
        ratio_enh = self.t3 / self.t4
        if abs(ratio_plain - ratio_enh) > 1e-9 * max(ratio_plain, 1.0):
            raise ValueError(
                f"inconsistent broadcast widths: t1/t2={ratio_plain!r} "
                f"but t3/t4={ratio_enh!r}"
            )

    @classmethod
    def for_network(cls, n: int, t_plain: float, t_enhanced: float) -> "PhaseTimings":
        if n < 2:
            raise ValueError(f"need at least two nodes for a broadcast, got {n!r}")
        return cls(t1=(n - 1) * t_plain, t2=t_plain, t3=(n - 1) * t_enhanced,
                   t4=t_enhanced)

    @property
    def broadcast_width(self) -> int:
        """Receiver count n-1 encoded in the t1/t2 ratio."""
        return round(self.t1 / self.t2)

    @property
    def enhancement_orderly(self) -> bool:
        """True when the enhanced airtimes undercut the plain ones.

        Holds whenever plain and enhanced links target equal success
        probabilities; an experiment pair with a stricter enhanced
        target can legitimately break it.
        """
        return self.t3 <= self.t1 and self.t4 <= self.t2


@dataclass(frozen=True)
class MetricSet:
    """Success probability, latency, active-message count, energy."""

    success: float
    latency: float
    overhead: int
    energy: float

    def __post_init__(self) -> None:
        if not -1e-12 <= self.success <= 1.0 + 1e-12:
            raise ValueError(f"success must be a probability, got {self.success!r}")
        if self.latency < 0.0 or self.energy < 0.0:
            raise ValueError("latency and energy must be non-negative")
        if int(self.overhead) != self.overhead or self.overhead < 0:
            raise ValueError(f"overhead must be a non-negative integer")


# ---------------------------------------------------------------------------
# binomial helpers


@lru_cache(maxsize=None)
def _binom_pmf(n: int, k: int, q: float) -> float:
    """P(exactly k failures among n links failing independently w.p. q).

    Zero outside 0 <= k <= n; log-space above the overflow threshold.
    """
    if k < 0 or k > n or n < 0:
        return 0.0
    if q <= 0.0:
        return 1.0 if k == 0 else 0.0
    if q >= 1.0:
        return 1.0 if k == n else 0.0
    if n > _LOG_SPACE_N:
        log_c = math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
        return math.exp(log_c + k * math.log(q) + (n - k) * math.log1p(-q))
    return math.comb(n, k) * q ** k * (1.0 - q) ** (n - k)


@lru_cache(maxsize=None)
def _binom_tail_le(n: int, tol: int, q: float) -> float:
    """P(at most tol failures among n links), 0 when tol < 0."""
    if tol < 0:
        return 0.0
    total = 0.0
    for k in range(0, min(tol, n) + 1):
        total += _binom_pmf(n, k, q)
    return min(total, 1.0)


def _mixed_tail_le(n_a: int, q_a: float, n_b: int, q_b: float, tol: int) -> float:
    """P(total failures <= tol) across two independent link classes."""
    if tol < 0:
        return 0.0
    total = 0.0
    for a in range(0, min(tol, n_a) + 1):
        wa = _binom_pmf(n_a, a, q_a)
        if wa == 0.0:
            continue
        total += wa * _binom_tail_le(n_b, tol - a, q_b)
    return min(total, 1.0)


# ---------------------------------------------------------------------------
# S-PBFT success model


def _require_pbft_size(n: int) -> None:
    if n < 4:
        raise DegenerateInputError(
            f"the commit-phase split needs n >= 4, got {n!r}"
        )


def replica_commit_success(cfg: ConsensusConfig) -> float:
    """Probability one replica collects enough commit messages.

    A replica hears n-3 enhanced links plus the 2 backscatter links of
    its ring neighbors; it survives while at most fault_budget of those
    inbound links fail.
    """
    _require_pbft_size(cfg.n)
    return _mixed_tail_le(cfg.n - 3, 1.0 - cfg.p_e, 2, 1.0 - cfg.p_b,
                          cfg.fault_budget)


def primary_commit_success(cfg: ConsensusConfig) -> float:
    """Probability the primary collects enough commit messages.

    All n-1 inbound links are enhanced; at most fault_budget may fail.
    """
    _require_pbft_size(cfg.n)
    return _binom_tail_le(cfg.n - 1, cfg.fault_budget, 1.0 - cfg.p_e)


def replica_commit_success_cases(cfg: ConsensusConfig) -> tuple[float, float, float]:
    """Three-way case split of the replica commit probability.

    Case terms: at most budget-2 enhanced failures; exactly one
    backscatter failure with budget-1 enhanced failures; both
    backscatter links failed with budget-2 enhanced failures. Empty
    sums and out-of-range binomials contribute zero.
    """
    _require_pbft_size(cfg.n)
    n, b = cfg.n, cfg.fault_budget
    q_e, p_e, p_s = 1.0 - cfg.p_e, cfg.p_e, cfg.p_b
    case1 = sum(_binom_pmf(n - 3, k, q_e) for k in range(0, b - 1))
    case2 = (_binom_pmf(n - 3, b - 1, q_e) * 2.0 * p_s * (1.0 - p_s)
             if 0 <= b - 1 <= n - 3 else 0.0)
    case3 = (_binom_pmf(n - 3, b - 2, q_e) * p_s ** 2
             if 0 <= b - 2 <= n - 3 else 0.0)
    return case1, case2, case3


def replica_commit_success_truncated(cfg: ConsensusConfig) -> float:
    """Sum of the three-way case split.

    Retained for cross-checking the case analysis; the cases cover only
    boundary failure patterns, so this disagrees with the exhaustive
    tail of replica_commit_success away from degenerate budgets (see
    the validation report). The exhaustive tail is the operative value.
    """
    return sum(replica_commit_success_cases(cfg))


def commit_phase_success_cases(cfg: ConsensusConfig) -> tuple[float, float]:
    """Two-way case split of the commit phase: at most budget-1 replica
    losses alone, or budget-1 replica losses plus the primary."""
    _require_pbft_size(cfg.n)
    n, b = cfg.n, cfg.fault_budget
    p_re = replica_commit_success(cfg)
    p_pn = primary_commit_success(cfg)
    case1 = sum(_binom_pmf(n - 1, l, 1.0 - p_re) for l in range(0, b))
    case2 = (_binom_pmf(n - 1, b - 1, 1.0 - p_re) * p_pn
             if 0 <= b - 1 <= n - 1 else 0.0)
    return case1, case2


def commit_phase_success_truncated(cfg: ConsensusConfig) -> float:
    """Sum of the two-way commit-phase case split.

    The cases overlap, so the sum can exceed 1 at small n; kept only so
    the case analysis stays comparable. The nested composition in
    spbft_success is the operative model.
    """
    return sum(commit_phase_success_cases(cfg))


def spbft_phase_success(phase: str, cfg: ConsensusConfig,
                        carried_failures: int = 0) -> float:
    """Probability one phase stays within the remaining death budget.

    carried_failures is the death count already spent by earlier
    phases; the phase population shrinks accordingly and its budget is
    fault_budget - carried_failures.
    """
    _require_pbft_size(cfg.n)
    if phase not in SPBFT_PHASES:
        raise ValueError(f"unknown phase {phase!r}")
    if not 0 <= carried_failures <= cfg.fault_budget:
        raise ValueError(
            f"carried_failures must lie in [0, fault_budget], "
            f"got {carried_failures!r}"
        )
    n, b, c = cfg.n, cfg.fault_budget, carried_failures
    q_e, q_b = 1.0 - cfg.p_e, 1.0 - cfg.p_b
    if phase == "pre_prepare":
        return _binom_tail_le(n - 1 - c, b - c, q_e)
    if phase == "prepare":
        return _binom_tail_le(n - 1 - c, b - c, q_e)
    if phase == "commit":
        p_re = replica_commit_success(cfg)
        p_pn = primary_commit_success(cfg)
        slack = b - c
        total = 0.0
        for lr in range(0, slack + 1):
            w = _binom_pmf(n - 1 - c, lr, 1.0 - p_re)
            if w == 0.0:
                continue
            if lr < slack:
                total += w  # primary may fall or not, both fit the budget
            else:
                total += w * p_pn
        return total
    # reply: every live node answers the client over backscatter
    return _binom_tail_le(n - c, b - c, q_b)


def spbft_success(cfg: ConsensusConfig) -> float:
    """Four-phase success rate under the cumulative death budget.

    Nested sum over deaths per phase: enhanced fan-out, enhanced
    prepare, commit collection (replicas via replica_commit_success,
    primary via primary_commit_success), backscatter reply.
    """
    _require_pbft_size(cfg.n)
    if cfg.fault_budget < 1:
        raise DegenerateInputError(
            f"fault_budget must be at least 1, got {cfg.fault_budget!r}"
        )
    return _pbft_chain_success(
        cfg.n, cfg.fault_budget,
        q_link=1.0 - cfg.p_e,
        q_ring=1.0 - cfg.p_b,
        q_reply=1.0 - cfg.p_b,
    )


def _pbft_chain_success(n: int, budget: int, q_link: float, q_ring: float,
                        q_reply: float, zero_death: bool = False) -> float:
    """Generic four-phase chain used by both twins and the catalog.

    q_link drives fan-out, prepare, the static commit inbound, and the
    primary's commit quorum; q_ring the two ring-neighbor commit links;
    q_reply the reply links. zero_death restricts acceptance to the
    no-death path (budget still shapes per-node commit tolerances).
    """
    _require_pbft_size(n)
    b = budget
    p_re = _mixed_tail_le(n - 3, q_link, 2, q_ring, b)
    p_pn = _binom_tail_le(n - 1, b, q_link)
    i_max = 0 if zero_death else b
    total = 0.0
    for i in range(0, i_max + 1):
        w1 = _binom_pmf(n - 1, i, q_link)
        if w1 == 0.0:
            continue
        for j in range(0, (0 if zero_death else b - i) + 1):
            w2 = _binom_pmf(n - 1 - i, j, q_link)
            if w2 == 0.0:
                continue
            slack = 0 if zero_death else b - i - j
            for lr in range(0, slack + 1):
                w3 = _binom_pmf(n - 1 - i - j, lr, 1.0 - p_re)
                if w3 == 0.0:
                    continue
                for lp in (0, 1):
                    if lr + lp > slack:
                        continue
                    w4 = p_pn if lp == 0 else 1.0 - p_pn
                    dead = i + j + lr + lp
                    rem = 0 if zero_death else b - dead
                    w5 = _binom_tail_le(n - dead, rem, q_reply)
                    total += w1 * w2 * w3 * w4 * w5
    return min(total, 1.0)


def sraft_success(cfg: ConsensusConfig) -> float:
    """Two-stage success rate: the fan-out stage may lose up to i
    followers and the vote stage up to fault_budget - i more.

    The two per-direction probabilities multiply symmetrically, so the
    enhanced_direction labeling does not change the value.
    """
    if cfg.n < 3:
        raise DegenerateInputError(f"need n >= 3, got {cfg.n!r}")
    if cfg.enhanced_direction == "uplink":
        p_down, p_up = cfg.p_s, cfg.p_e
    else:
        p_down, p_up = cfg.p_e, cfg.p_s
    return _raft_chain_success(cfg.n, cfg.fault_budget,
                               1.0 - p_down, 1.0 - p_up)


def _raft_chain_success(n: int, budget: int, q_down: float, q_up: float) -> float:
    total = 0.0
    for i in range(0, budget + 1):
        w = _binom_pmf(n - 1, i, q_down)
        if w == 0.0:
            continue
        total += w * _binom_tail_le(n - 1 - i, budget - i, q_up)
    return min(total, 1.0)


# ---------------------------------------------------------------------------
# latency / overhead / energy for the four base mechanisms


def latency(cfg: ConsensusConfig, timings: PhaseTimings) -> float:
    """Consensus latency of the four base mechanisms.

    PBFT-style: three broadcast phases plus a reply slot, with TD mode
    serializing the prepare/commit broadcasts into n-1 and n slots.
    RAFT-style: one broadcast plus one reply slot, identical in FD and
    TD because the votes ride a single shared slot.
    """
    n = cfg.n
    key = (cfg.cm, cfg.multiplexing)
    if cfg.cm in ("PBFT", "S-PBFT"):
        broadcast, single = ((timings.t1, timings.t2) if cfg.cm == "PBFT"
                             else (timings.t3, timings.t4))
        if cfg.multiplexing == "FD":
            return 3.0 * broadcast + single
        return 2.0 * n * broadcast + single
    if cfg.cm in ("RAFT", "S-RAFT"):
        broadcast, single = ((timings.t1, timings.t2) if cfg.cm == "RAFT"
                             else (timings.t3, timings.t4))
        return broadcast + single
    raise CatalogError(f"latency dispatch has no entry for {key!r}")


def overhead(cfg: ConsensusConfig) -> int:
    """Active-message count; backscatter messages are excluded."""
    n = cfg.n
    if cfg.cm == "S-PBFT":
        return 2 * n * n - 5 * n + 3
    if cfg.cm == "PBFT":
        return 2 * n * n - n
    if cfg.cm == "S-RAFT":
        return n
    if cfg.cm == "RAFT":
        return 2 * n - 1
    raise CatalogError(f"overhead dispatch has no entry for {cfg.cm!r}")


def energy(cfg: ConsensusConfig, timings: PhaseTimings, p_t: float) -> float:
    """Transmit energy in joules; passive backscatter contributes zero.

    Each active message in a broadcast phase is charged the full phase
    airtime, which reproduces the cubic growth of the plain PBFT cost.
    """
    if p_t < 0.0:
        raise ValueError(f"transmit power must be non-negative, got {p_t!r}")
    n = cfg.n
    if cfg.cm == "S-PBFT":
        return (2 * n * n - 5 * n + 3) * timings.t3 * p_t
    if cfg.cm == "PBFT":
        return ((2.0 * n * n - 2.0 * n) * timings.t1 + n * timings.t2) * p_t
    if cfg.cm == "S-RAFT":
        return n * timings.t3 * p_t
    if cfg.cm == "RAFT":
        return ((n - 1) * timings.t1 + n * timings.t2) * p_t
    raise CatalogError(f"energy dispatch has no entry for {cfg.cm!r}")
