"""Movement patterns of the recursion and their closed-form calculus.

Three numbers summarise how a convergent particle moves around its
equilibrium, independent of where the attractors happen to sit:

* ``rho1``  -- lag-1 autocorrelation of the stationary position series,
  ``rho1 = mu_l / (mu_w + 1)`` with ``mu_l = 1 + mu_w - mu_phi1 - mu_phi2``.
  Higher lags obey ``rho[i] = mu_l rho[i-1] - mu_w rho[i-2]``.
* ``vc``    -- the attractor-free part of the equilibrium variance.  For the
  two-parameter uniform-coefficient family below, ``V_x = gamma * vc`` where
  ``gamma`` collects every attractor term.
* ``focus`` -- the squared pull ratio ``(mu_phi2 / mu_phi1)^2``; values
  above 1 bias sampling toward the second attractor.

The uniform-coefficient family ``IpsoParams(omega, c, alpha)`` holds the
inertia weight fixed at ``omega`` and draws ``phi1 ~ U[0, c]``,
``phi2 ~ U[0, alpha c]`` fresh per iteration, giving

    mu_phi1 = c/2,        sigma_phi1 = |c| / sqrt(12),
    mu_phi2 = alpha c/2,  sigma_phi2 = |alpha c| / sqrt(12).

Its movement pattern has closed forms in both directions: ``vc`` maps
``(omega, c, alpha)`` to the variance coefficient, and
:func:`solve_coefficients` inverts a full ``MovementPattern`` back to
parameters, which is what makes pattern scheduling practical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DegenerateParameterError
from .moments import (
    AttractorMoments,
    CoefficientMoments,
    is_order1_convergent,
    stability_terms,
)

_SQRT12 = math.sqrt(12.0)


@dataclass(frozen=True)
class IpsoParams:
    """Inertia weight plus the uniform pull ranges ``[0, c]`` and ``[0, alpha c]``."""

    omega: float
    c: float
    alpha: float

    def __post_init__(self):
        for name in ("omega", "c", "alpha"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class MovementPattern:
    """Target triple (rho1, vc, focus) describing a stationary movement."""

    rho1: float
    vc: float
    focus: float

    def __post_init__(self):
        rho1, vc, focus = float(self.rho1), float(self.vc), float(self.focus)
        if not (-1.0 < rho1 < 1.0):
            raise ValueError("rho1 must lie in (-1,1)")
        if not (vc > 0.0 and math.isfinite(vc)):
            raise ValueError("vc must be positive and finite")
        if not (focus > 0.0 and math.isfinite(focus)):
            raise ValueError("focus must be positive and finite")
        object.__setattr__(self, "rho1", rho1)
        object.__setattr__(self, "vc", vc)
        object.__setattr__(self, "focus", focus)


@dataclass(frozen=True)
class AutocorrelationSeq:
    """Autocorrelation by lag; ``rho[0]`` is always exactly 1."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        if rho.ndim != 1 or rho.size < 1:
            raise ValueError("rho must be a non-empty 1-d array")
        if rho[0] != 1.0:
            raise ValueError("rho[0] must be exactly 1")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    def __len__(self) -> int:
        return int(self.rho.size)

    def __getitem__(self, lag):
        return self.rho[lag]

    @property
    def lags(self) -> np.ndarray:
        return np.arange(self.rho.size)


def ipso_to_moments(params: IpsoParams) -> CoefficientMoments:
    """First two moments of the uniform-coefficient family.

    Standard deviations are stored as magnitudes so that negative ``c`` or
    ``alpha`` (legitimate mirrored search) still yields a valid moment set.
    """
    c, alpha = params.c, params.alpha
    return CoefficientMoments(
        mu_omega=params.omega,
        sigma_omega=0.0,
        mu_phi1=c / 2.0,
        sigma_phi1=abs(c) / _SQRT12,
        mu_phi2=alpha * c / 2.0,
        sigma_phi2=abs(alpha * c) / _SQRT12,
    )


def rho1(coeffs: CoefficientMoments) -> float:
    """Lag-1 autocorrelation of the stationary position series."""
    mu_w = coeffs.mu_omega
    if mu_w == -1.0:
        raise DegenerateParameterError("rho1 undefined at mu_omega = -1")
    mu_l = 1.0 + mu_w - coeffs.mu_phi1 - coeffs.mu_phi2
    return mu_l / (mu_w + 1.0)


def autocorrelation(coeffs: CoefficientMoments, max_lag: int) -> AutocorrelationSeq:
    """Autocorrelation sequence out to ``max_lag`` via the two-term recursion."""
    if max_lag < 0:
        raise ValueError("max_lag must be non-negative")
    mu_w = coeffs.mu_omega
    if mu_w == -1.0:
        raise DegenerateParameterError("autocorrelation undefined at mu_omega = -1")
    mu_l = 1.0 + mu_w - coeffs.mu_phi1 - coeffs.mu_phi2
    rho = np.empty(max_lag + 1)
    rho[0] = 1.0
    if max_lag >= 1:
        rho[1] = mu_l / (mu_w + 1.0)
    for i in range(2, max_lag + 1):
        rho[i] = mu_l * rho[i - 1] - mu_w * rho[i - 2]
    return AutocorrelationSeq(rho)


def expected_movement_distance(v_x: float, rho_1: float) -> float:
    """Mean squared step length at equilibrium: ``E (x[t+1]-x[t])^2 = 2 V_x (1 - rho1)``."""
    return 2.0 * v_x * (1.0 - rho_1)


def gamma(attractors: AttractorMoments, alpha: float) -> float:
    """Attractor-dependent factor of the equilibrium variance.

    ``V_x = gamma * vc``: the geometry of the attractors (their spreads and
    separation) scales the variance, while ``vc`` carries everything the
    coefficients control.
    """
    sep = attractors.mu_p - attractors.mu_g
    return (2.0 * (alpha + 1.0) ** 2
            * (attractors.sigma_p ** 2 + alpha ** 2 * attractors.sigma_g ** 2)
            + alpha ** 2 * sep ** 2)


def _m1_m2(alpha: float) -> tuple[float, float]:
    a1 = (alpha + 1.0) ** 2
    m1 = a1 * (alpha ** 2 + 3.0 * alpha + 1.0)
    m2 = a1 * (2.0 * alpha ** 2 + 3.0 * alpha + 2.0)
    return m1, m2


def vc(params: IpsoParams) -> float:
    """Variance coefficient of the uniform-coefficient family.

    ``vc = -c (omega + 1) / (c (m2 - m1 omega) + (alpha+1)^3 (6 omega^2 - 6))``
    with ``m1 = (alpha+1)^2 (alpha^2 + 3 alpha + 1)`` and
    ``m2 = (alpha+1)^2 (2 alpha^2 + 3 alpha + 2)``.
    """
    omega, c, alpha = params.omega, params.c, params.alpha
    m1, m2 = _m1_m2(alpha)
    den = c * (m2 - m1 * omega) + (alpha + 1.0) ** 3 * (6.0 * omega ** 2 - 6.0)
    if den == 0.0:
        raise DegenerateParameterError("variance coefficient denominator vanishes")
    return -c * (omega + 1.0) / den


def c_for_vc(vc_target: float, omega: float, alpha: float) -> float:
    """Pull range ``c`` achieving a requested variance coefficient.

    Inverts :func:`vc` at fixed ``omega`` and ``alpha``:
    ``c = -6 vc (alpha+1)^3 (omega^2 - 1) / (vc (m2 - m1 omega) + omega + 1)``.
    """
    m1, m2 = _m1_m2(alpha)
    den = vc_target * (m2 - m1 * omega) + (omega + 1.0)
    if den == 0.0:
        raise DegenerateParameterError("no finite c reaches the requested vc")
    return -6.0 * vc_target * (alpha + 1.0) ** 3 * (omega ** 2 - 1.0) / den


def focus(coeffs: CoefficientMoments) -> float:
    """Squared pull ratio ``(mu_phi2 / mu_phi1)^2``."""
    if coeffs.mu_phi1 == 0.0:
        raise DegenerateParameterError("focus undefined when mu_phi1 is zero")
    return (coeffs.mu_phi2 / coeffs.mu_phi1) ** 2


def ipso_is_convergent(params: IpsoParams) -> bool:
    """Order-2 convergence test specialised to the uniform family.

    Requires ``-1 < omega < 1``, ``0 < c (1 + alpha) < 4 (1 + omega)`` and
    a negative quadratic stability term ``k2``.
    """
    omega, c, alpha = params.omega, params.c, params.alpha
    if not (-1.0 < omega < 1.0):
        return False
    spread = c * (1.0 + alpha)
    if not (0.0 < spread < 4.0 * (1.0 + omega)):
        return False
    _, k2 = stability_terms(ipso_to_moments(params))
    return k2 < 0.0


def convergence_report(params: IpsoParams) -> dict:
    """Condition-by-condition stability diagnostics for one parameter triple."""
    omega, c, alpha = params.omega, params.c, params.alpha
    spread = c * (1.0 + alpha)
    spread_bound = 4.0 * (1.0 + omega)
    _, k2 = stability_terms(ipso_to_moments(params))
    return {
        "omega": omega,
        "c": c,
        "alpha": alpha,
        "omega_in_range": -1.0 < omega < 1.0,
        "spread": spread,
        "spread_bound": spread_bound,
        "spread_ok": 0.0 < spread < spread_bound,
        "k2": k2,
        "k2_negative": k2 < 0.0,
        "convergent": ipso_is_convergent(params),
    }


_ROUND_TRIP_RTOL = 1e-9


def solve_coefficients(target: MovementPattern, alpha_sign: int = 1) -> IpsoParams:
    """Parameters of the uniform family realising a movement pattern.

    ``alpha = alpha_sign * sqrt(focus)`` fixes the pull ratio; the remaining
    two parameters then come out in closed form,

        omega = (m1 vc + m2 rho1 vc + rho1 - 1) / (m2 vc + m1 rho1 vc - rho1 + 1),
        c     = 2 (1 - rho1) (omega + 1) / (alpha + 1).

    The solution is verified by substituting back into :func:`rho1`,
    :func:`vc` and :func:`focus`; a relative residual above 1e-9 raises
    :class:`ConsistencyError` rather than returning a silently wrong triple.
    """
    if alpha_sign not in (1, -1):
        raise ValueError("alpha_sign must be +1 or -1")
    alpha = alpha_sign * math.sqrt(target.focus)
    if alpha == -1.0:
        raise DegenerateParameterError(
            "alpha = -1 leaves the second pull cancelling the first; "
            "no parameters realise this pattern")
    m1, m2 = _m1_m2(alpha)
    r, v = target.rho1, target.vc
    den = m2 * v + m1 * r * v - r + 1.0
    if den == 0.0:
        raise DegenerateParameterError("pattern solver denominator vanishes")
    omega = (m1 * v + m2 * r * v + r - 1.0) / den
    c = 2.0 * (1.0 - r) * (omega + 1.0) / (alpha + 1.0)
    params = IpsoParams(omega=omega, c=c, alpha=alpha)

    coeffs = ipso_to_moments(params)
    checks = (
        ("rho1", rho1(coeffs), target.rho1),
        ("vc", vc(params), target.vc),
        ("focus", focus(coeffs), target.focus),
    )
    for name, got, want in checks:
        if abs(got - want) > _ROUND_TRIP_RTOL * max(1.0, abs(want)):
            raise ConsistencyError(
                f"pattern solver round-trip failed on {name}: "
                f"got {got!r}, wanted {want!r}")
    return params
