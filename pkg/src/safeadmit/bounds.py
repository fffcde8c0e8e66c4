"""Closed-form bounds on the model-following error of an overdamped axis.

For one axis of A_p, with signed lower-block entries k1 (stiffness) and k2
(damping), the characteristic roots are lambda_{1,2} = (k2 -/+ Delta)/2 with
Delta = sqrt(k2^2 + 4 k1).  Driving the velocity row by a constant D from rest
gives position D (b1 l2 - b2 l1)/(k1 Delta) and velocity D (b2 - b1)/Delta,
b_j = exp(l_j t) - 1.
"""
from dataclasses import dataclass

import numpy as np

from .errors import Underdamped
from .reference import axis_coefficients

CONFLUENT_TOL = 1e-8


@dataclass(frozen=True)
class AxisEigenData:
    k1: float
    k2: float
    delta: float
    lam1: float
    lam2: float

    @property
    def confluent(self):
        return abs(self.lam1 - self.lam2) < CONFLUENT_TOL


def axis_eigen(k1, k2):
    disc = k2 * k2 + 4.0 * k1
    if not disc > 0:
        raise Underdamped(f"discriminant k2^2 + 4 k1 = {disc:.6g} <= 0; bound needs real eigenvalues")
    delta = np.sqrt(disc)
    return AxisEigenData(float(k1), float(k2), float(delta), (k2 - delta) / 2.0, (k2 + delta) / 2.0)


def axes_of(A):
    """AxisEigenData for every axis of a [[0, I], [diag, diag]] subsystem matrix."""
    m = A.shape[0] // 2
    return [axis_eigen(*axis_coefficients(A, i)) for i in range(m)]


def position_bound_limit(k1):
    if not k1 < 0:
        raise ValueError("k1 must be negative")
    return -1.0 / k1


def stationary_time(lam1, lam2):
    """Time of the velocity-bound peak, ln(l2/l1)/(l1 - l2)."""
    if not lam1 <= lam2 < 0:
        raise ValueError("require lam1 <= lam2 < 0")
    if lam2 - lam1 < CONFLUENT_TOL:
        lam = 0.5 * (lam1 + lam2)
        return -1.0 / lam
    return np.log(lam2 / lam1) / (lam1 - lam2)


def velocity_bound_beta(lam1, lam2, delta):
    ts = stationary_time(lam1, lam2)
    if lam2 - lam1 < CONFLUENT_TOL:
        # limit of (e^{l2 t} - e^{l1 t})/Delta as l1 -> l2 is t e^{l t}
        lam = 0.5 * (lam1 + lam2)
        return ts * np.exp(lam * ts)
    return (np.exp(lam2 * ts) - np.exp(lam1 * ts)) / delta


def _position_response(ax: AxisEigenData, t):
    if ax.confluent:
        lam = 0.5 * (ax.lam1 + ax.lam2)
        return (1.0 - np.exp(lam * t) + lam * t * np.exp(lam * t)) / lam**2
    b1 = np.expm1(ax.lam1 * t)
    b2 = np.expm1(ax.lam2 * t)
    return (b1 * ax.lam2 - b2 * ax.lam1) / (ax.k1 * ax.delta)


def _velocity_response(ax: AxisEigenData, t):
    if ax.confluent:
        lam = 0.5 * (ax.lam1 + ax.lam2)
        return t * np.exp(lam * t)
    return (np.expm1(ax.lam2 * t) - np.expm1(ax.lam1 * t)) / ax.delta


def error_bound_vector(t, D, axes):
    """Elementwise bound on |e_a(t)| (positions first, then velocities)."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be nonnegative")
    pos = [D * _position_response(ax, t) for ax in axes]
    vel = [D * _velocity_response(ax, t) for ax in axes]
    return np.array(pos + vel)


def envelope_entries(D, axes):
    return np.array([D * position_bound_limit(ax.k1) for ax in axes]
                    + [D * velocity_bound_beta(ax.lam1, ax.lam2, ax.delta) for ax in axes])


def envelope_dbar(D, axes):
    return float(np.max(envelope_entries(D, axes)))


def switched_envelope(D, subsystems):
    """Largest envelope over the subsystem matrices that may be active."""
    return max(envelope_dbar(D, axes_of(A)) for A in subsystems)


@dataclass
class ErrorEnvelope:
    D: float
    position_limits: np.ndarray
    velocity_maxima: np.ndarray

    @property
    def dbar(self):
        return float(max(self.position_limits.max(), self.velocity_maxima.max()))

    @classmethod
    def from_axes(cls, D, axes):
        e = envelope_entries(D, axes)
        m = len(axes)
        return cls(D, e[:m], e[m:])


def envelope_table(D, subsystems, names=("A1", "A2")):
    """Rows of (subsystem, axis, lam1, lam2, Delta, t_s, beta, -1/k1) plus the overall D_bar."""
    rows = []
    for name, A in zip(names, subsystems):
        for i, ax in enumerate(axes_of(A)):
            rows.append({
                "subsystem": name, "axis": i + 1,
                "lam1": ax.lam1, "lam2": ax.lam2, "delta": ax.delta,
                "t_s": stationary_time(ax.lam1, ax.lam2),
                "beta": velocity_bound_beta(ax.lam1, ax.lam2, ax.delta),
                "pos_limit": position_bound_limit(ax.k1),
            })
    return rows, switched_envelope(D, subsystems)
