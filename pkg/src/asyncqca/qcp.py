"""Dictionary between the automaton's density-recursion coefficients and the
rates of a continuous-time contact process with an extra coherent branching
channel, plus the branching-strength ratio g = omega / kappa_b.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .meanfield import MFCoefficients, coefficients
from .params import GateParams


class UndefinedRatioError(ZeroDivisionError):
    """g is undefined because the incoherent branching coefficient vanishes."""


@dataclass(frozen=True)
class QCPRates:
    gamma: float
    kappa_c: float
    kappa_b: float
    omega: float
    dt: float
    negative_kc: bool = False

    @property
    def g(self) -> Optional[float]:
        if self.kappa_b <= 0.0:
            return None
        return self.omega / self.kappa_b


def qcp_coefficients(rates: QCPRates) -> tuple[MFCoefficients, bool]:
    """Discretized coefficient set; the flag marks r-values outside [0, 1]."""
    if rates.dt <= 0:
        raise ValueError("dt must be positive")
    r = MFCoefficients(
        r_dec=1.0 - rates.gamma * rates.dt,
        r_coag=1.0 - (rates.gamma + rates.kappa_c) * rates.dt,
        r_branch=rates.kappa_b * rates.dt,
        r_star=rates.omega * rates.dt,
    )
    valid = all(0.0 <= v <= 1.0 for v in (r.r_dec, r.r_coag, r.r_branch)) and (
        0.0 <= abs(r.r_star) <= 1.0
    )
    return r, not valid


def map_qca_to_qcp(params: GateParams, dt: float = 1.0) -> QCPRates:
    """Invert the discretization on the automaton's coefficient set."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    r = coefficients(params)
    kappa_c = (r.r_dec - r.r_coag) / dt
    return QCPRates(
        gamma=(1.0 - r.r_dec) / dt,
        kappa_c=kappa_c,
        kappa_b=r.r_branch / dt,
        omega=r.r_star / dt,
        dt=dt,
        negative_kc=kappa_c < 0,
    )


def g_ratio(params: GateParams) -> float:
    """Quantum-to-classical branching ratio r_star / r_branch (dt-free)."""
    r = coefficients(params)
    if r.r_branch <= 0.0:
        raise UndefinedRatioError("incoherent branching coefficient is zero")
    return r.r_star / r.r_branch
