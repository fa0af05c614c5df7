"""Distributed control laws and the auxiliary consensus dynamics.

Every function here is a pure per-agent computation on a frozen snapshot
of local and neighbor state. The conventional law drives plain state
disagreement; the compensated law drives the disagreement between each
state and a noise-free auxiliary system that performs exact average
consensus on the initial conditions, which is what confines the effect
of residual model error.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidParam, SingularGain
from .plants import PlantSpec


@dataclass(frozen=True)
class ControlGains:
    """Consensus gain c and auxiliary-dynamics gain c_bar."""

    c: float
    c_bar: float

    def __post_init__(self):
        if not (self.c > 0.0):
            raise InvalidParam(f"c must be > 0, got {self.c}")
        if not (self.c_bar > 0.0):
            raise InvalidParam(f"c_bar must be > 0, got {self.c_bar}")


@dataclass(frozen=True)
class AgentView:
    """Everything one agent can see when computing its input.

    f_hat is the model's posterior mean at the agent's own current
    state; neighbor lists are aligned with the topology's neighbor order.
    """

    x: float
    x_bar: float
    neighbor_x: tuple[float, ...]
    neighbor_x_bar: tuple[float, ...]
    f_hat: float


def auxiliary_rate(view: AgentView, gains: ControlGains) -> float:
    """Rate of the agent's auxiliary state: -c_bar * sum_j (x_bar_i - x_bar_j)."""
    disagreement = sum(view.x_bar - xbj for xbj in view.neighbor_x_bar)
    return -gains.c_bar * disagreement


def _checked_gain(plant: PlantSpec, x: float) -> float:
    gain = plant.g(x)
    if abs(gain) < plant.g_min:
        raise SingularGain(f"|g({x:.6g})| = {abs(gain):.3g} < g_min={plant.g_min}")
    return gain


def control_conventional(view: AgentView, plant: PlantSpec, gains: ControlGains) -> float:
    """Feedback-linearizing law on raw state disagreement.

    u = -(1/g) ( h(x) + f_hat + c * sum_j (x_i - x_j) ).
    """
    gain = _checked_gain(plant, view.x)
    consensus = sum(view.x - xj for xj in view.neighbor_x)
    return -(plant.h(view.x) + view.f_hat + gains.c * consensus) / gain


def control_proposed(
    view: AgentView, plant: PlantSpec, gains: ControlGains, x_bar_rate: float
) -> float:
    """Compensated law on auxiliary-relative disagreement.

    With xt_i = x_i - x_bar_i,
    u = -(1/g) ( h(x) + f_hat + c ( sum_j (xt_i - xt_j) + xt_i ) - x_bar_rate ),
    where x_bar_rate is the closed-form rate of the agent's auxiliary
    state this same step (no numerical differentiation).
    """
    gain = _checked_gain(plant, view.x)
    xt = view.x - view.x_bar
    consensus = sum(
        xt - (xj - xbj) for xj, xbj in zip(view.neighbor_x, view.neighbor_x_bar)
    )
    r = consensus + xt
    return -(plant.h(view.x) + view.f_hat + gains.c * r - x_bar_rate) / gain


def epsilon_bound(gains: ControlGains, n_agents: int, eta_bar_lower: float) -> float:
    """Ultimate accuracy radius 2 N eta_bar / c of the compensated loop."""
    if n_agents < 1:
        raise InvalidParam(f"n_agents must be >= 1, got {n_agents}")
    if not (eta_bar_lower > 0.0):
        raise InvalidParam(f"eta_bar_lower must be > 0, got {eta_bar_lower}")
    return 2.0 * n_agents * eta_bar_lower / gains.c


def check_domain_containment(
    domain_lo: float, domain_hi: float, x_bar_star: float, epsilon: float
) -> bool:
    """Whether the accuracy band around the initial mean stays inside the domain."""
    return domain_lo <= x_bar_star - epsilon and x_bar_star + epsilon <= domain_hi
