"""Fixed-time attractiveness of bounded-perturbation orbits.

When the nominal map admits a fixed-time decrement certificate with a
Lipschitz candidate (constant L_V) and the per-step perturbation norm stays
below delta0, orbits are drawn into the sublevel set {V <= B} within a
fixed number of steps.  The level and the step bound trade off through the
free slack constants m1, m2 > 1:

    branch "level above 1":  B = (m1 L_V delta0 / beta)^(1/r2),
                             steps from phase-1 kernel with
                             beta_d = (1 - 1/m1) beta
    branch "level at most 1": B = (m2 L_V delta0 / alpha)^(1/r1),
                             steps from phase-2 kernel with
                             alpha_d = (1 - 1/m2) alpha

Substituting B back into the feasibility inequality gives exactly zero, so
feasibility at the computed level holds with equality; strict feasibility
is a statement about levels outside the attractive set, which is why the
feasibility check takes an explicit target level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import EmptyDomainError, ParameterDomainError
from .lyapunov import FixedTimeGains, LyapunovCandidate
from .settling import FLOOR_GUARD, phase1_bound, phase2_bound
from .systems import Trajectory

BRANCH_HIGH = "V0_GT_1"
BRANCH_LOW = "V0_LE_1"
_BRANCHES = (BRANCH_HIGH, BRANCH_LOW)


@dataclass(frozen=True)
class AttractivenessConfig:
    """Inputs of the perturbed-attractiveness analysis.

    ``lv_source`` records whether the Lipschitz constant was user-supplied
    or produced by a grid estimate.
    """

    gains: FixedTimeGains
    lipschitz_lv: float
    delta0: float
    m1: float = 2.0
    m2: float = 2.0
    branch: str = BRANCH_HIGH
    lv_source: str = "user"

    def __post_init__(self):
        if not self.m1 > 1.0:
            raise ParameterDomainError(
                f"m1={self.m1!r} must exceed 1 so the slackened gain "
                "beta_d = (1 - 1/m1) beta stays positive"
            )
        if not self.m2 > 1.0:
            raise ParameterDomainError(
                f"m2={self.m2!r} must exceed 1 so the slackened gain "
                "alpha_d = (1 - 1/m2) alpha stays positive"
            )
        if not self.lipschitz_lv > 0.0:
            raise ParameterDomainError("lipschitz_lv must be positive")
        if not (math.isfinite(self.delta0) and self.delta0 >= 0.0):
            raise ParameterDomainError("delta0 must be finite and nonnegative")
        if self.branch not in _BRANCHES:
            raise ParameterDomainError(
                f"branch must be one of {_BRANCHES}, got {self.branch!r}"
            )


def choose_branch(v0: float) -> str:
    """Branch selection from the initial candidate level."""
    return BRANCH_HIGH if v0 > 1.0 else BRANCH_LOW


def attractive_level(cfg: AttractivenessConfig) -> float:
    """The sublevel threshold B of the attractive set {V <= B}.

    Collapses to 0 in the unperturbed limit delta0 = 0.
    """
    lv_delta = cfg.lipschitz_lv * cfg.delta0
    if cfg.branch == BRANCH_HIGH:
        return (cfg.m1 * lv_delta / cfg.gains.beta) ** (1.0 / cfg.gains.r2)
    return (cfg.m2 * lv_delta / cfg.gains.alpha) ** (1.0 / cfg.gains.r1)


def feasibility_residual(cfg: AttractivenessConfig, b_target: float) -> float:
    """Left side of the slack feasibility inequality at an arbitrary level.

    Positive means the slack condition holds strictly at ``b_target``; at
    ``b_target = attractive_level(cfg)`` the result is exactly 0, because
    the level formula is the inequality's algebraic inverse.
    """
    if not b_target > 0.0:
        raise ParameterDomainError("b_target must be positive")
    lv_delta = cfg.lipschitz_lv * cfg.delta0
    if cfg.branch == BRANCH_HIGH:
        return cfg.gains.beta * b_target ** cfg.gains.r2 - cfg.m1 * lv_delta
    return cfg.gains.alpha * b_target ** cfg.gains.r1 - cfg.m2 * lv_delta


def slackened_gain(cfg: AttractivenessConfig) -> float:
    """beta_d or alpha_d, the decrement gain left after perturbation slack."""
    if cfg.branch == BRANCH_HIGH:
        return (1.0 - 1.0 / cfg.m1) * cfg.gains.beta
    return (1.0 - 1.0 / cfg.m2) * cfg.gains.alpha


def perturbed_settling_bound(cfg: AttractivenessConfig, guard: float = FLOOR_GUARD) -> int:
    """Fixed step bound for reaching the attractive set under perturbation.

    Reuses the phase-bound kernels with the slackened gain of the active
    branch.  The slackened gain lies in (0, 1) whenever m > 1 and the gains
    are admissible, so the kernels' own domain checks cannot fire.
    """
    gain_d = slackened_gain(cfg)
    if not 0.0 < gain_d < 1.0:
        raise ParameterDomainError(
            f"slackened gain {gain_d!r} left (0, 1); check m and the gains"
        )
    if cfg.branch == BRANCH_HIGH:
        return phase1_bound(gain_d, cfg.gains.r2, guard)
    return phase2_bound(gain_d, cfg.gains.r1, guard)


def verify_attractiveness(
    traj: Trajectory, V: LyapunovCandidate, B: float
) -> Tuple[Optional[int], bool]:
    """Empirical entry into {V <= B} on a recorded orbit.

    Returns ``(entry, remained)`` where ``entry`` is the smallest k with
    V(y(j)) <= B for every recorded j >= k (None if the orbit never enters
    and stays), and ``remained`` is True exactly when the orbit never left
    the set again after first reaching it.
    """
    if B < 0.0:
        raise ParameterDomainError("B must be nonnegative")
    values = traj.values(V.value)
    outside = np.nonzero(values > B)[0]
    if len(outside) == 0:
        return 0, True
    last_out = int(outside[-1])
    entry = last_out + 1 if last_out + 1 < len(values) else None
    inside = np.nonzero(values <= B)[0]
    first_entry = int(inside[0]) if len(inside) else None
    remained = first_entry is not None and entry == first_entry
    return entry, remained


def remark_tradeoff_table(
    cfg: AttractivenessConfig, m_values: Sequence[float], guard: float = FLOOR_GUARD
) -> Tuple[Tuple[float, float, int], ...]:
    """(m, B, K*) rows for a sweep of the active branch's slack constant.

    Enlarging m grows the attractive set and shrinks the step bound, so B
    is nondecreasing and K* nonincreasing along any increasing m grid.
    """
    if len(m_values) == 0:
        raise EmptyDomainError("m grid is empty")
    rows = []
    for m in m_values:
        cfg_m = replace(cfg, m1=m) if cfg.branch == BRANCH_HIGH else replace(cfg, m2=m)
        rows.append(
            (float(m), attractive_level(cfg_m), perturbed_settling_bound(cfg_m, guard))
        )
    return tuple(rows)


@dataclass(frozen=True)
class AttractivenessReport:
    """Outcome of one attractiveness analysis.

    ``feasibility_residual`` is evaluated at the computed level B (zero by
    the inverse identity, recorded for visibility).  ``v_crossing_index``
    reports, for orbits started above level 1, the first index at which the
    candidate dropped to 1 or below.
    """

    branch: str
    B: float
    K_star: int
    gain_d: float
    feasibility_residual: float
    lv_source: str
    empirical_entry: Optional[int] = None
    remained_inside: bool = False
    v_crossing_index: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "B": self.B,
            "K_star": self.K_star,
            "gain_d": self.gain_d,
            "feasibility_residual": self.feasibility_residual,
            "lv_source": self.lv_source,
            "empirical_entry": self.empirical_entry,
            "remained_inside": self.remained_inside,
            "v_crossing_index": self.v_crossing_index,
        }

    @staticmethod
    def from_dict(d: dict) -> "AttractivenessReport":
        entry = d["empirical_entry"]
        crossing = d["v_crossing_index"]
        return AttractivenessReport(
            branch=d["branch"],
            B=float(d["B"]),
            K_star=int(d["K_star"]),
            gain_d=float(d["gain_d"]),
            feasibility_residual=float(d["feasibility_residual"]),
            lv_source=d["lv_source"],
            empirical_entry=None if entry is None else int(entry),
            remained_inside=bool(d["remained_inside"]),
            v_crossing_index=None if crossing is None else int(crossing),
        )


def analyze_attractiveness(
    cfg: AttractivenessConfig,
    traj: Optional[Trajectory] = None,
    V: Optional[LyapunovCandidate] = None,
    guard: float = FLOOR_GUARD,
) -> AttractivenessReport:
    """Compute level, bound and feasibility, and verify a recorded orbit.

    Mixed orbits (candidate starting above 1 and ending below) are analyzed
    with the high branch; the index of the crossing below level 1 is
    reported alongside.
    """
    b_level = attractive_level(cfg)
    k_star = perturbed_settling_bound(cfg, guard)
    gain_d = slackened_gain(cfg)
    residual = feasibility_residual(cfg, b_level) if b_level > 0.0 else 0.0

    entry = None
    remained = False
    crossing = None
    if traj is not None:
        if V is None:
            raise ParameterDomainError("orbit verification needs a candidate V")
        entry, remained = verify_attractiveness(traj, V, b_level)
        values = traj.values(V.value)
        if len(values) and values[0] > 1.0:
            below = np.nonzero(values <= 1.0)[0]
            crossing = int(below[0]) if len(below) else None
    return AttractivenessReport(
        branch=cfg.branch,
        B=b_level,
        K_star=k_star,
        gain_d=gain_d,
        feasibility_residual=residual,
        lv_source=cfg.lv_source,
        empirical_entry=entry,
        remained_inside=remained,
        v_crossing_index=crossing,
    )
