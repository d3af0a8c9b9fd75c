"""Long-term behavior of a network run freely: limit points, oscillations, ellipses.

With the spectral radius normalized to 1 and distinct eigenvalues, every
sub-dominant term of the state dies out, so the asymptotic orbit is decided
by the dominant eigenvalue(s): a fixed point for +1, a two-point oscillation
for -1, and an ellipse for a properly complex conjugate pair on the unit
circle. In the ellipse case the whole network collapses to an equivalent
two-neuron system (v_hat, d_hat, x_hat).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .model import _readonly
from .spectral import EigenDecomposition

# |1 - |lambda|| tolerance for counting an eigenvalue as "on the unit circle"
UNIT_TOL = 1e-8


class Behavior(str, enum.Enum):
    SINGULARITY = "singularity"
    OSCILLATION = "oscillation"
    ELLIPSE = "ellipse"
    OTHER = "other"


@dataclass(frozen=True)
class EllipseAnalysis:
    """Dominant limit structure of a network.

    For the ellipse case: ``v_hat`` holds the unit-norm main axis directions,
    ``d_hat`` the 2x2 rotation-scaling step matrix, ``x_hat`` the two-neuron
    start vector, ``mu`` the axis ratio, ``omega`` the angular frequency in
    radians per unit time and ``phi`` the extremal angle. For a singularity
    or oscillation only ``limit_point`` is filled (the oscillation case
    alternates between +limit_point and -limit_point).
    """

    classification: Behavior
    v_hat: np.ndarray | None = None
    d_hat: np.ndarray | None = None
    x_hat: np.ndarray | None = None
    mu: float | None = None
    omega: float | None = None
    phi: float | None = None
    limit_point: np.ndarray | None = None
    note: str = ""

    def __post_init__(self):
        for name in ("v_hat", "d_hat", "x_hat", "limit_point"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, _readonly(val))


def classify_longterm(decomp: EigenDecomposition, tol: float = UNIT_TOL) -> Behavior:
    """Classify the asymptotic orbit from the sorted eigenvalues.

    Requires the spectral radius to sit on the unit circle within ``tol``;
    anything else (divergent or vanishing dynamics, or more than one
    dominant structure on the circle) classifies as OTHER.
    """
    lam = decomp.lambdas
    if abs(abs(lam[0]) - 1.0) > tol:
        return Behavior.OTHER
    on_circle = int(np.sum(np.abs(np.abs(lam) - 1.0) <= tol))
    lam1 = lam[0]
    if on_circle == 1:
        if abs(lam1.imag) <= tol and lam1.real > 0:
            return Behavior.SINGULARITY
        if abs(lam1.imag) <= tol and lam1.real < 0:
            return Behavior.OSCILLATION
        return Behavior.OTHER
    if on_circle == 2:
        lam2 = lam[1]
        if abs(lam1.imag) > tol and abs(lam1 - lam2.conjugate()) <= 10 * tol * max(1.0, abs(lam1)):
            return Behavior.ELLIPSE
        return Behavior.OTHER
    return Behavior.OTHER


def ellipse(decomp: EigenDecomposition, tau: float = 1.0, tol: float = UNIT_TOL) -> EllipseAnalysis:
    """Extract the two-neuron ellipse system from the dominant conjugate pair.

    The main axes are the extremal-length combinations kappa*v + conj both
    ways, with the extremal angle phi solving
    tan(2 phi) = -2 (v_re . v_im) / (|v_re|^2 - |v_im|^2); the degenerate
    circle case (both numerator and denominator zero) picks phi = 0, where
    any axis pair is extremal. The step matrix follows the extracted axis
    ratio mu = a/b and the rotation angle omega*tau of the eigenvalue, and
    the start vector solves v_hat @ d_hat @ x_hat = (dominant part of the
    state after one step).
    """
    if classify_longterm(decomp, tol) is not Behavior.ELLIPSE:
        raise ValueError("long-term behavior is not an ellipse; check classify_longterm first")
    lam = decomp.lambdas[0]
    v = decomp.v[:, 0]
    x1 = decomp.x[0]
    if lam.imag < 0:  # defensive: the sort puts the positive-imaginary member first
        lam, v, x1 = lam.conjugate(), v.conjugate(), decomp.x[1]

    v_re, v_im = v.real, v.imag
    num = -2.0 * float(v_re @ v_im)
    den = float(v_re @ v_re - v_im @ v_im)
    phi = 0.5 * math.atan2(num, den)

    axis1 = 2.0 * (math.cos(phi) * v_re - math.sin(phi) * v_im)
    axis2 = 2.0 * (-math.sin(phi) * v_re - math.cos(phi) * v_im)
    a_len = float(np.linalg.norm(axis1))
    b_len = float(np.linalg.norm(axis2))
    if a_len == 0.0 or b_len == 0.0:
        raise ValueError("degenerate dominant eigenvector: an ellipse axis has zero length")
    mu = a_len / b_len
    v_hat = np.column_stack([axis1 / a_len, axis2 / b_len])

    angle = math.atan2(lam.imag, lam.real)  # rotation per step of length tau
    omega = angle / tau
    c, s = math.cos(angle), math.sin(angle)
    d_hat = np.array([[c, -mu * s], [s / mu, c]])

    # dominant part of the state one step in: x1*lam*v + conjugate term
    rhs = 2.0 * (x1 * lam * v).real
    x_hat, _, _, _ = np.linalg.lstsq(v_hat @ d_hat, rhs, rcond=None)
    return EllipseAnalysis(
        classification=Behavior.ELLIPSE,
        v_hat=v_hat,
        d_hat=d_hat,
        x_hat=x_hat,
        mu=mu,
        omega=omega,
        phi=phi,
    )


def analyze_longterm(
    decomp: EigenDecomposition, tau: float = 1.0, tol: float = UNIT_TOL
) -> EllipseAnalysis:
    """Classify the orbit and fill in whatever limit structure applies."""
    kind = classify_longterm(decomp, tol)
    if kind is Behavior.ELLIPSE:
        return ellipse(decomp, tau, tol)
    if kind in (Behavior.SINGULARITY, Behavior.OSCILLATION):
        point = (decomp.x[0] * decomp.v[:, 0]).real
        return EllipseAnalysis(classification=kind, limit_point=point)
    sr = abs(decomp.lambdas[0])
    if sr > 1.0 + tol:
        note = f"divergent: spectral radius {sr!r} exceeds 1 by more than tol={tol:g}"
    elif sr < 1.0 - tol:
        note = f"vanishing: spectral radius {sr!r} is below 1 by more than tol={tol:g}"
    else:
        note = "no single dominant structure on the unit circle"
    return EllipseAnalysis(classification=Behavior.OTHER, note=note)
