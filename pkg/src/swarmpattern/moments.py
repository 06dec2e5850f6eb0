"""Moment dynamics of the stochastic position recursion.

A particle whose attractors are held statistically fixed follows the scalar
recursion

    x[t+1] = l[t] * x[t] - w[t] * x[t-1] + phi1[t] * p[t] + phi2[t] * g[t]

with ``l = 1 + w - phi1 - phi2``.  The coefficient draws ``w, phi1, phi2``
are mutually independent across terms and across iterations, and independent
of the attractor draws ``p, g``.  Writing ``P = phi1 * p + phi2 * g`` for the
combined attractor pull, the first and second moments of the position evolve
linearly:

    z[t+1] = M z[t] + b,
    z = (E x[t], E x[t-1], E x[t]^2, E x[t-1]^2, E x[t] x[t-1]).

Only the first two moments of the coefficient and attractor distributions
enter ``M`` and ``b``, so every result in this module is distribution-free.
``M`` is block lower-triangular: the 2x2 block driving the means and the 3x3
block driving the second moments are both attractor-free, hence stability
never depends on where the attractors sit.

Closed forms are provided for the fixed points of the mean (``E_x``) and the
variance (``V_x``), together with the two stability predicates:

* order-1 (means settle):   -1 < mu_w < 1  and  0 < s < 2 (mu_w + 1),
  where ``s = mu_phi1 + mu_phi2``;
* order-2 (variances settle): order-1 plus ``k2 < 0`` for the quadratic
  stability term ``k2`` defined in :func:`stability_terms`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    DegenerateParameterError,
    DivergenceError,
    StabilityError,
)

# A moment trajectory whose components pass this magnitude is declared
# divergent rather than being iterated into float overflow.
DIVERGENCE_LIMIT = 1e100


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class CoefficientMoments:
    """First two moments of the random recursion coefficients.

    ``mu_*`` are means, ``sigma_*`` standard deviations.  The recursion sees
    nothing beyond these, so any generating distributions with matching
    moments give identical mean/variance dynamics.
    """

    mu_omega: float
    sigma_omega: float
    mu_phi1: float
    sigma_phi1: float
    mu_phi2: float
    sigma_phi2: float

    def __post_init__(self):
        for name in ("mu_omega", "sigma_omega", "mu_phi1", "sigma_phi1",
                     "mu_phi2", "sigma_phi2"):
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))
        for name in ("sigma_omega", "sigma_phi1", "sigma_phi2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class AttractorMoments:
    """First two moments of the stationary attractor pair ``(p, g)``."""

    mu_p: float
    sigma_p: float
    mu_g: float
    sigma_g: float

    def __post_init__(self):
        for name in ("mu_p", "sigma_p", "mu_g", "sigma_g"):
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))
        if self.sigma_p < 0 or self.sigma_g < 0:
            raise ValueError("attractor standard deviations must be non-negative")

    @property
    def e_p2(self) -> float:
        """Raw second moment ``E p^2``."""
        return self.sigma_p ** 2 + self.mu_p ** 2

    @property
    def e_g2(self) -> float:
        """Raw second moment ``E g^2``."""
        return self.sigma_g ** 2 + self.mu_g ** 2


@dataclass(frozen=True)
class DerivedExpectations:
    """Expectations of coefficient products entering the moment update.

    ``e_p``, ``e_p2`` and ``e_lp`` refer to the combined pull
    ``P = phi1 * p + phi2 * g``, not to the attractor ``p`` itself.
    """

    e_l: float
    e_omega2: float
    e_phi1_2: float
    e_phi2_2: float
    e_omega_p: float
    e_l2: float
    e_p: float
    e_p2: float
    e_lp: float


@dataclass(frozen=True)
class MomentSystem:
    """Affine update ``z -> m @ z + b`` for the five position moments.

    Systems produced by :func:`build_moment_system` always carry the two
    shift rows ``[1,0,0,0,0]`` and ``[0,0,1,0,0]`` at indices 1 and 3 and
    zeros in ``b`` everywhere except indices 0 and 2; the constructor only
    enforces shape and finiteness so that degenerate matrices can still be
    fed to :func:`spectral_radius` and :func:`iterate_moments` directly.
    """

    m: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if m.shape != (5, 5):
            raise ValueError(f"m must be 5x5, got shape {m.shape}")
        if b.shape != (5,):
            raise ValueError(f"b must have shape (5,), got {b.shape}")
        if not np.all(np.isfinite(m)) or not np.all(np.isfinite(b)):
            raise ValueError("moment system entries must be finite")
        m.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class MomentState:
    """One point of the moment trajectory, ordered as ``z`` above."""

    z: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        if z.shape != (5,):
            raise ValueError(f"z must have shape (5,), got {z.shape}")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @property
    def mean(self) -> float:
        return float(self.z[0])

    @property
    def second_moment(self) -> float:
        return float(self.z[2])

    @property
    def variance(self) -> float:
        return float(self.z[2] - self.z[0] ** 2)


def derive_expectations(coeffs: CoefficientMoments,
                        attractors: AttractorMoments) -> DerivedExpectations:
    """Expand the product expectations feeding the moment update.

    Everything follows from independence of ``w``, ``phi1``, ``phi2``,
    ``p`` and ``g``; the only care needed is that ``l`` shares randomness
    with each coefficient it contains.
    """
    mu_w = coeffs.mu_omega
    mu1, mu2 = coeffs.mu_phi1, coeffs.mu_phi2
    e_omega2 = coeffs.sigma_omega ** 2 + mu_w ** 2
    e_phi1_2 = coeffs.sigma_phi1 ** 2 + mu1 ** 2
    e_phi2_2 = coeffs.sigma_phi2 ** 2 + mu2 ** 2
    mu_p, mu_g = attractors.mu_p, attractors.mu_g

    e_l = 1.0 + mu_w - mu1 - mu2
    e_p = mu1 * mu_p + mu2 * mu_g
    e_omega_p = mu_w * e_p
    e_l2 = (1.0 + e_omega2 + e_phi1_2 + e_phi2_2
            + 2.0 * mu_w - 2.0 * (mu1 + mu2)
            - 2.0 * mu_w * (mu1 + mu2) + 2.0 * mu1 * mu2)
    e_p2 = (attractors.e_p2 * e_phi1_2 + attractors.e_g2 * e_phi2_2
            + 2.0 * mu1 * mu2 * mu_p * mu_g)
    e_lp = (mu1 * mu_p + mu2 * mu_g
            + mu_w * mu1 * mu_p + mu_w * mu2 * mu_g
            - mu_p * e_phi1_2 - mu1 * mu2 * (mu_p + mu_g)
            - mu_g * e_phi2_2)
    return DerivedExpectations(
        e_l=e_l, e_omega2=e_omega2, e_phi1_2=e_phi1_2, e_phi2_2=e_phi2_2,
        e_omega_p=e_omega_p, e_l2=e_l2, e_p=e_p, e_p2=e_p2, e_lp=e_lp,
    )


def build_moment_system(coeffs: CoefficientMoments,
                        attractors: AttractorMoments) -> MomentSystem:
    """Assemble the affine moment update from first/second moments."""
    e = derive_expectations(coeffs, attractors)
    mu_w = coeffs.mu_omega
    # E(l w) expands through the shared w term; the phi means factor out.
    e_l_omega = mu_w * e.e_l + coeffs.sigma_omega ** 2
    m = np.array([
        [e.e_l, -mu_w, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [2.0 * e.e_lp, -2.0 * e.e_omega_p, e.e_l2, e.e_omega2, -2.0 * e_l_omega],
        [0.0, 0.0, 1.0, 0.0, 0.0],
        [e.e_p, 0.0, e.e_l, 0.0, -mu_w],
    ])
    b = np.array([e.e_p, 0.0, e.e_p2, 0.0, 0.0])
    return MomentSystem(m=m, b=b)


def initial_state(x1: float, x0: float) -> MomentState:
    """Moment vector for a deterministic start at positions ``x1, x0``.

    ``x1`` is the newer of the two seed positions (the recursion needs two).
    """
    x1 = _require_finite("x1", x1)
    x0 = _require_finite("x0", x0)
    return MomentState(np.array([x1, x0, x1 * x1, x0 * x0, x1 * x0]))


def iterate_moments(system: MomentSystem, z0: MomentState,
                    steps: int) -> list[MomentState]:
    """Run the affine update ``steps`` times, returning z_1 ... z_steps.

    Raises :class:`DivergenceError` as soon as any component passes
    ``DIVERGENCE_LIMIT`` in magnitude; the partial trajectory (including the
    offending state) rides along on the exception.  Non-convergent parameter
    sets legitimately diverge, so callers probing them should catch it.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    m, b = system.m, system.b
    z = z0.z
    out: list[MomentState] = []
    for _ in range(steps):
        z = m @ z + b
        state = MomentState(z)
        out.append(state)
        if not np.all(np.isfinite(z)) or np.max(np.abs(z)) > DIVERGENCE_LIMIT:
            raise DivergenceError(
                f"moment trajectory exceeded {DIVERGENCE_LIMIT:g} after "
                f"{len(out)} steps", partial=out)
    return out


def iterate_to_fixed_point(system: MomentSystem,
                           z0: MomentState | None = None,
                           tol: float = 1e-12,
                           max_steps: int = 10 ** 6) -> MomentState:
    """Iterate until ``max|z[t+1] - z[t]| < tol``; return the settled state.

    The fixed point of a stable affine map is independent of ``z0``; the
    default start is the zero vector.
    """
    if z0 is None:
        z0 = MomentState(np.zeros(5))
    m, b = system.m, system.b
    z = z0.z
    for _ in range(max_steps):
        z_next = m @ z + b
        if not np.all(np.isfinite(z_next)) or np.max(np.abs(z_next)) > DIVERGENCE_LIMIT:
            raise DivergenceError(
                f"moment trajectory exceeded {DIVERGENCE_LIMIT:g} before settling",
                partial=[MomentState(z_next)])
        if np.max(np.abs(z_next - z)) < tol:
            return MomentState(z_next)
        z = z_next
    raise ConvergenceError(
        f"moment iteration did not settle to {tol:g} within {max_steps} steps")


def stability_terms(coeffs: CoefficientMoments) -> tuple[float, float]:
    """The attractor-free terms ``(k1, k2)`` of the variance fixed point.

    ``k1 = s^2`` with ``s = mu_phi1 + mu_phi2``; ``k2 < 0`` is the extra
    condition separating order-2 from order-1 convergence.
    """
    mu_w = coeffs.mu_omega
    s = coeffs.mu_phi1 + coeffs.mu_phi2
    k1 = s * s
    k2 = (k1 * (1.0 - mu_w)
          + 2.0 * s * (mu_w ** 2 + coeffs.sigma_omega ** 2 - 1.0)
          + (coeffs.sigma_phi1 ** 2 + coeffs.sigma_phi2 ** 2) * (mu_w + 1.0))
    return k1, k2


def variance_terms(coeffs: CoefficientMoments,
                   attractors: AttractorMoments) -> tuple[float, float, float, float]:
    """All four terms ``(k1, k2, k3, k4)`` of the variance fixed point."""
    k1, k2 = stability_terms(coeffs)
    mu1, mu2 = coeffs.mu_phi1, coeffs.mu_phi2
    s1, s2 = coeffs.sigma_phi1, coeffs.sigma_phi2
    vp, vg = attractors.sigma_p ** 2, attractors.sigma_g ** 2
    k3 = k1 * (mu1 ** 2 * vp + mu2 ** 2 * vg + s1 ** 2 * vp + s2 ** 2 * vg)
    k4 = (mu1 ** 2 * s2 ** 2 + mu2 ** 2 * s1 ** 2) * (attractors.mu_g - attractors.mu_p) ** 2
    return k1, k2, k3, k4


def is_order1_convergent(coeffs: CoefficientMoments) -> bool:
    """Whether the mean recursion settles (both 2x2 eigenvalues inside 1)."""
    s = coeffs.mu_phi1 + coeffs.mu_phi2
    return (-1.0 < coeffs.mu_omega < 1.0) and (0.0 < s < 2.0 * (coeffs.mu_omega + 1.0))


def is_order2_convergent(coeffs: CoefficientMoments) -> bool:
    """Whether the variance recursion also settles (order-1 plus ``k2 < 0``)."""
    if not is_order1_convergent(coeffs):
        return False
    _, k2 = stability_terms(coeffs)
    return k2 < 0.0


def expectation_fixed_point(coeffs: CoefficientMoments,
                            attractors: AttractorMoments) -> float:
    """Equilibrium mean: the phi-weighted average of the attractor means."""
    s = coeffs.mu_phi1 + coeffs.mu_phi2
    if s == 0.0:
        raise DegenerateParameterError(
            "mean fixed point undefined: mu_phi1 + mu_phi2 is zero")
    return (coeffs.mu_phi1 * attractors.mu_p + coeffs.mu_phi2 * attractors.mu_g) / s


def variance_fixed_point(coeffs: CoefficientMoments,
                         attractors: AttractorMoments) -> float:
    """Equilibrium variance ``V_x = -(k3 + k4) (mu_w + 1) / (k1 k2)``.

    Only meaningful on the order-2 convergent set; outside it the variance
    recursion has no finite attracting fixed point and a
    :class:`StabilityError` is raised.
    """
    k1, k2, k3, k4 = variance_terms(coeffs, attractors)
    if k1 == 0.0 or k2 == 0.0:
        raise DegenerateParameterError(
            f"variance fixed point degenerate: k1={k1!r}, k2={k2!r}")
    if not is_order2_convergent(coeffs):
        raise StabilityError(
            "variance fixed point requested for non-convergent parameters")
    return -(k3 + k4) / (k1 * k2) * (coeffs.mu_omega + 1.0)


def spectral_radius(system: MomentSystem | np.ndarray,
                    tol: float = 1e-10,
                    max_iter: int = 50_000,
                    seed: int = 0,
                    restarts: int = 8) -> float:
    """Dominant-eigenvalue magnitude of the update matrix by power iteration.

    The update matrix is real but its dominant eigenvalues often form a
    complex conjugate pair, so the classical single-vector Rayleigh estimate
    would oscillate forever.  Each sweep therefore fits the two-step
    recurrence ``A(Au) ~ a Au + b u`` by least squares and reads the dominant
    magnitude off the roots of ``t^2 - a t - b``; for a simple real dominant
    eigenvalue the fit degenerates gracefully to it.  The iterate advances by
    two applications of ``A`` per sweep and is renormalised each time.

    Restart-on-stall: if the fit residual stops improving before reaching
    ``tol`` (start vector orthogonal to the dominant subspace, or a modulus
    tie beyond a conjugate pair), the sweep restarts from a fresh seeded
    random vector.  Exhausting ``restarts`` raises
    :class:`ConvergenceError`; a result at or above 1 is a legitimate radius
    of an unstable system, never an error.
    """
    a = system.m if isinstance(system, MomentSystem) else np.asarray(system, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    n = a.shape[0]
    if not a.any():
        return 0.0

    rng = np.random.default_rng(seed)
    died_in_nullspace = 0
    for _ in range(restarts):
        u = rng.standard_normal(n)
        u /= np.linalg.norm(u)
        best = math.inf
        stalled = 0
        for _ in range(max_iter):
            w1 = a @ u
            if not np.linalg.norm(w1):
                died_in_nullspace += 1
                break
            w2 = a @ w1
            scale = np.linalg.norm(w2)
            if not scale:
                # A(Au) = 0 with Au != 0: the orbit dies, dominant part nilpotent.
                died_in_nullspace += 1
                break
            basis = np.column_stack([w1, u])
            coef, *_ = np.linalg.lstsq(basis, w2, rcond=None)
            residual = np.linalg.norm(w2 - basis @ coef) / scale
            roots = np.roots([1.0, -coef[0], -coef[1]])
            estimate = float(np.max(np.abs(roots)))
            if residual < tol:
                return estimate
            if residual < 0.999 * best:
                best = residual
                stalled = 0
            else:
                stalled += 1
                if stalled > 100:
                    break
            u = w2 / scale
    if died_in_nullspace == restarts:
        # Every random start was annihilated within finitely many steps.
        return 0.0
    raise ConvergenceError(
        f"power iteration failed to reach residual {tol:g} after "
        f"{restarts} restarts")
