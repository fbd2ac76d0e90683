"""Steady-state currents per reservoir and the entropy production rate.

Currents are evaluated in the energy basis, where both the Hamiltonian and
the excitation-number operator are diagonal, by tracing the per-reservoir
dissipator action against the observable.  Positive current means flow from
that reservoir into the system.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ConfigurationError
from .generator import Generator, build_generator
from .model import SystemParams
from .rates import ReservoirSpec, Statistics
from .steady import SteadyResult, steady_state

CURRENT_RESIDUAL_TOL = 1e-8


class Observable(enum.Enum):
    ENERGY = "energy"
    PARTICLE_NUMBER = "particle-number"


@dataclass(frozen=True)
class TransportReport:
    """Per-reservoir currents and entropy production rate.

    current_a + current_b = 0 in any steady state (continuity); sigma
    vanishes at equilibrium and is nonnegative otherwise.
    """

    current_a: float
    current_b: float
    sigma: float | None
    observable: Observable


def currents(g: Generator, rho_ss: SteadyResult) -> TransportReport:
    """Steady currents I_j = Tr(D_j[rho] * H) (bosonic) or Tr(D_j[rho] * N)
    (fermionic particle current)."""
    if rho_ss.residual > CURRENT_RESIDUAL_TOL:
        raise ValueError(
            f"state residual {rho_ss.residual:.3g} too large for a steady state"
        )
    if g.rates.statistics is Statistics.BOSE:
        weights = g.eig.energies
        observable = Observable.ENERGY
    else:
        weights = g.eig.number_eigenvalues()
        observable = Observable.PARTICLE_NUMBER
    v = rho_ss.vector6
    i_a = float((g.res_a_part @ v)[:4].real @ weights)
    i_b = float((g.res_b_part @ v)[:4].real @ weights)
    return TransportReport(
        current_a=i_a, current_b=i_b, sigma=None, observable=observable
    )


def entropy_production(
    t: TransportReport, ra: ReservoirSpec, rb: ReservoirSpec
) -> float:
    """sigma = I_B (1/T_A - 1/T_B) for heat, I_B (mu_B - mu_A)/T for particles.

    The particle form assumes equal reservoir temperatures.
    """
    if ra.statistics is not rb.statistics:
        raise ConfigurationError("reservoirs must share statistics")
    if ra.statistics is Statistics.BOSE:
        return t.current_b * (1.0 / ra.temperature - 1.0 / rb.temperature)
    if not math.isclose(ra.temperature, rb.temperature, rel_tol=1e-12):
        raise ConfigurationError(
            "particle-current entropy production requires equal temperatures"
        )
    return t.current_b * (rb.mu - ra.mu) / ra.temperature


def transport_report(g: Generator, rho_ss: SteadyResult) -> TransportReport:
    """Currents plus the matching entropy production rate."""
    rep = currents(g, rho_ss)
    sigma = entropy_production(rep, g.reservoir_a, g.reservoir_b)
    return TransportReport(
        current_a=rep.current_a,
        current_b=rep.current_b,
        sigma=sigma,
        observable=rep.observable,
    )


def rectification(p: SystemParams, base: ReservoirSpec, delta: float) -> float:
    """Heat-current asymmetry |I(+dT)| / |I(-dT)| under mirrored temperature bias.

    A ratio above 1 means the flow driven by the hotter B reservoir exceeds
    the mirrored flow, i.e. conduction from reservoir A toward B is the
    blocked direction.
    """
    if base.statistics is not Statistics.BOSE:
        raise ConfigurationError("rectification is defined for the bosonic setup")
    if delta <= 0 or delta >= 2 * base.temperature:
        raise ValueError("need 0 < delta < 2*T so both temperatures stay positive")
    t_lo = base.temperature - 0.5 * delta
    t_hi = base.temperature + 0.5 * delta
    forward = _heat_current_b(p, t_lo, t_hi)   # T_B > T_A
    backward = _heat_current_b(p, t_hi, t_lo)  # T_A > T_B
    return abs(forward) / abs(backward)


def _heat_current_b(p: SystemParams, t_a: float, t_b: float) -> float:
    ra = ReservoirSpec(Statistics.BOSE, t_a)
    rb = ReservoirSpec(Statistics.BOSE, t_b)
    g = build_generator(p, ra, rb)
    return currents(g, steady_state(g)).current_b
