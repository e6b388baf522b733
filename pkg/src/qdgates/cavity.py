"""
Optical response of a charged quantum dot in a double-sided microcavity.

All rates are dimensionless ratios to the cavity decay rate kappa, so kappa
itself never appears: ``g_over_kappa = 2.4`` means g = 2.4 kappa.

The steady-state transmission of one cavity face to the other is

    t(w) = -[i(w_X - w) + gamma/2]
           / ([i(w_X - w) + gamma/2][i(w_c - w) + 1 + kappa_s/2] + g^2)

with reflection r = 1 + t.  The "hot" cavity uses the given g, the "cold"
(uncoupled) cavity the same expression with g = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class InvalidParameterError(ValueError):
    """Raised for non-finite or out-of-range physical parameters."""


@dataclass(frozen=True)
class CavityParams:
    """Physical parameters of one QD-cavity system, in units of kappa.

    Detunings are measured from the common reference frequency w0:
    ``detuning_photon = w - w0``, ``detuning_cavity = w_c - w0`` and
    ``detuning_exciton = w_X - w0``.
    """

    g_over_kappa: float
    kappa_s_over_kappa: float
    gamma_over_kappa: float = 0.1
    detuning_photon: float = 0.0
    detuning_cavity: float = 0.0
    detuning_exciton: float = 0.0

    def __post_init__(self):
        for name in ("g_over_kappa", "kappa_s_over_kappa", "gamma_over_kappa",
                     "detuning_photon", "detuning_cavity", "detuning_exciton"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be a finite real, got {value!r}")
        for name in ("g_over_kappa", "kappa_s_over_kappa", "gamma_over_kappa"):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be non-negative")

    @classmethod
    def from_total_coupling(cls, g_over_total: float, kappa_s_over_kappa: float,
                            gamma_over_kappa: float = 0.1) -> "CavityParams":
        """Build from g/(kappa + kappa_s), the form experiments usually quote."""
        return cls(g_over_total * (1.0 + kappa_s_over_kappa), kappa_s_over_kappa,
                   gamma_over_kappa)

    @property
    def is_resonant(self) -> bool:
        return self.detuning_photon == self.detuning_cavity == self.detuning_exciton

    def as_dict(self) -> dict:
        return {
            "g_over_kappa": self.g_over_kappa,
            "kappa_s_over_kappa": self.kappa_s_over_kappa,
            "gamma_over_kappa": self.gamma_over_kappa,
            "detuning_photon": self.detuning_photon,
            "detuning_cavity": self.detuning_cavity,
            "detuning_exciton": self.detuning_exciton,
        }


@dataclass(frozen=True)
class ScatteringCoefficients:
    """Reflection/transmission amplitudes of the coupled (hot) and uncoupled
    (cold) cavity at one photon frequency."""

    r_hot: complex
    t_hot: complex
    r_cold: complex
    t_cold: complex

    @classmethod
    def ideal(cls) -> "ScatteringCoefficients":
        """Lossless strong-coupling limit: hot cavity reflects, cold transmits with a sign flip."""
        return cls(1.0 + 0j, 0j, 0j, -1.0 + 0j)

    def magnitudes(self) -> tuple[float, float, float, float]:
        """``(|r|, |t|, |r0|, |t0|)``."""
        return abs(self.r_hot), abs(self.t_hot), abs(self.r_cold), abs(self.t_cold)

    def passivity_residuals(self) -> tuple[float, float]:
        """``1 - |r|^2 - |t|^2`` for the hot and cold cavity; the photon loss probability."""
        hot = 1.0 - abs(self.r_hot) ** 2 - abs(self.t_hot) ** 2
        cold = 1.0 - abs(self.r_cold) ** 2 - abs(self.t_cold) ** 2
        return hot, cold

    def is_passive(self, tol: float = 1e-12) -> bool:
        return min(self.passivity_residuals()) >= -tol


def _transmission(g: float, params: CavityParams) -> complex:
    dipole = complex(params.gamma_over_kappa / 2,
                     params.detuning_exciton - params.detuning_photon)
    field = complex(1.0 + params.kappa_s_over_kappa / 2,
                    params.detuning_cavity - params.detuning_photon)
    if g == 0.0:
        # dipole factor cancels; also covers gamma = 0 on exciton resonance
        return -1.0 / field
    if dipole == 0:
        # lossless dipole on resonance: fully reflecting for any g > 0, even if g*g underflows
        return 0j
    return -dipole / (dipole * field + g * g)


def coefficients(params: CavityParams) -> ScatteringCoefficients:
    """Hot and cold reflection/transmission coefficients for ``params``.

    >>> c = coefficients(CavityParams(2.4, 0.2, 0.1))
    >>> round(c.t_cold.real, 6), round(c.r_hot.real, 6)
    (-0.909091, 0.991402)
    """
    t_hot = _transmission(params.g_over_kappa, params)
    t_cold = _transmission(0.0, params)
    return ScatteringCoefficients(1.0 + t_hot, t_hot, 1.0 + t_cold, t_cold)


@dataclass(frozen=True)
class FeasibilityReport:
    critical_photon_number: float
    min_photon_interval: float
    dephasing_penalty: float


def feasibility(params: CavityParams, tau: float, T2: float) -> FeasibilityReport:
    """Weak-excitation and dephasing figures of merit.

    ``critical_photon_number`` is gamma^2 / (2 g^2); photons must be spaced
    by at least ``tau / n0`` (same time unit as ``tau``).  The exciton
    dephasing penalty ``1 - exp(-tau/T2)`` is reported as-is; how it combines
    with a gate fidelity is left to the caller.
    """
    if params.g_over_kappa == 0:
        raise ZeroDivisionError("critical photon number is undefined for g = 0")
    if tau < 0 or not math.isfinite(tau):
        raise InvalidParameterError("tau must be finite and non-negative")
    if not T2 > 0:
        raise InvalidParameterError("T2 must be positive")
    n0 = params.gamma_over_kappa ** 2 / (2.0 * params.g_over_kappa ** 2)
    interval = tau / n0 if n0 > 0 else math.inf
    return FeasibilityReport(n0, interval, -math.expm1(-tau / T2))
