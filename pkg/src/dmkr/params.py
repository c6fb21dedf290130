"""Shared physical parameters of the dissipative modified kicked rotator.

The map acts on an angle q in [0, 2pi) and a scaled momentum p.  One period:

    p' = gamma * p + K * f(q)        f(q) = sin(q) + a * sin(2q + phi)
    q' = (q + p') mod 2pi

The same parameter set drives the quantum side, where the kick potential is
K/hbar_eff * [cos(q) + (a/2) cos(2q + phi)] and hbar_eff plays the role of
the kick period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class MapParams:
    """Physical parameters shared by the classical and quantum maps.

    K is the scaled kick strength, gamma the dissipation (1 = conservative,
    0 = maximal damping), hbar_eff the effective Planck constant, a and phi
    the second-harmonic amplitude and phase of the kick potential.

    force_unit_second_harmonic switches the classical kick force to
    sin(q) + sin(2q + phi), i.e. unit weight on the second harmonic instead
    of `a`.  The default (False) keeps the force equal to minus the gradient
    of the kick potential, which is what the quantum kick implements; the
    switch affects the classical map only.
    """

    K: float
    gamma: float = 0.2
    hbar_eff: float = 0.062
    a: float = 0.5
    phi: float = math.pi / 2
    force_unit_second_harmonic: bool = False

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if not self.hbar_eff > 0.0:
            raise ValueError(f"hbar_eff must be positive, got {self.hbar_eff}")
        if self.K < 0.0:
            raise ValueError(f"K must be non-negative, got {self.K}")

    @property
    def k(self) -> float:
        """Unscaled kick strength K / hbar_eff."""
        return self.K / self.hbar_eff

    @property
    def second_harmonic_weight(self) -> float:
        """Coefficient of sin(2q + phi) in the classical kick force."""
        return 1.0 if self.force_unit_second_harmonic else self.a

    @property
    def g(self) -> float:
        """Lindblad coupling sqrt(-ln gamma); infinite at gamma = 0."""
        if self.gamma == 0.0:
            return math.inf
        return math.sqrt(-math.log(self.gamma))

    def with_K(self, K: float) -> "MapParams":
        return replace(self, K=K)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian momentum noise for the classical map.

    sigma is the standard deviation of the kick-to-kick momentum noise;
    None means "use hbar_eff of the accompanying MapParams".  With
    enabled=False the map is a pure deterministic function.
    """

    enabled: bool = False
    sigma: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.sigma is not None and self.sigma < 0.0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")

    def resolve_sigma(self, params: MapParams) -> float:
        if self.sigma is not None:
            return self.sigma
        return params.hbar_eff


NO_NOISE = NoiseSpec(enabled=False)
