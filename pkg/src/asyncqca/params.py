"""Gate parameter container shared by every module.

The five scalars fix both local gates completely: three flip probabilities
(decay, coagulation-like, branching-like), the extra probability entering the
asynchronous mixing unitary, and the asynchronism strength ``lam``.
Complements q = 1 - p are always computed at use sites, never stored.
"""

from __future__ import annotations

from dataclasses import dataclass


class ParameterError(ValueError):
    """Raised when a probability or lam lies outside [0, 1]."""


@dataclass(frozen=True)
class GateParams:
    p_dec: float     # survival amplitude^2 parameter of the isolated-site unitary
    p_coag: float    # flip probability of the occupied-neighborhood unitary
    p_branch: float  # flip probability of the empty-center unitary (branching)
    p_plus: float    # flip probability inside the asynchronous mixing unitary
    lam: float = 0.0  # asynchronism strength

    def __post_init__(self) -> None:
        for name in ("p_dec", "p_coag", "p_branch", "p_plus", "lam"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ParameterError(f"{name}={v!r} outside [0, 1]")

    @property
    def q_dec(self) -> float:
        return 1.0 - self.p_dec

    @property
    def q_coag(self) -> float:
        return 1.0 - self.p_coag

    @property
    def q_branch(self) -> float:
        return 1.0 - self.p_branch

    @property
    def q_plus(self) -> float:
        return 1.0 - self.p_plus

    def with_lam(self, lam: float) -> "GateParams":
        return GateParams(self.p_dec, self.p_coag, self.p_branch, self.p_plus, lam)

    def with_branch(self, p_branch: float) -> "GateParams":
        return GateParams(self.p_dec, self.p_coag, p_branch, self.p_plus, self.lam)


def standard_params(p_branch: float, lam: float) -> GateParams:
    """The fixed-parameter family used in all phase-diagram scans.

    Isolated-site survival probability 0.1 (i.e. p_dec = 0.9), coagulation and
    mixing probabilities 0.1, with branching probability and asynchronism free.
    """
    return GateParams(p_dec=0.9, p_coag=0.1, p_branch=p_branch, p_plus=0.1, lam=lam)
