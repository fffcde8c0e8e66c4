"""Box constraints in error coordinates, invariance functions and the switching rule.

Constraint on axis i:  h_i = |e_i + xi_d_i| - eta_bar_i(t) <= 0, where the bound
eta_i(t) = offset + amplitude * sin(frequency * t) is shrunk by the disturbance
envelope D_bar.  The reference state E_r = [e_r; edot_r] carries its own velocity,
so h_dot needs no extra argument.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConditionViolated

GAMMA_CLAMP = 1e-3


@dataclass(frozen=True)
class ConstraintSpec:
    """Per-axis bounds, desired pose and the switching-rule tuning.

    ``hysteresis`` is a fraction of the resting distance to the shrunk boundary;
    ``activation_band`` (m) selects the axes whose h_dot is checked on re-entry.
    """

    offset: np.ndarray
    desired: np.ndarray
    amplitude: np.ndarray = None
    frequency: np.ndarray = None
    dbar: float = 0.0
    hysteresis: float = 0.02
    activation_band: float = 0.05
    dwell: float = 0.05

    def __post_init__(self):
        offset = np.atleast_1d(np.asarray(self.offset, dtype=float))
        m = offset.shape[0]

        def vec(x):
            if x is None:
                return np.zeros(m)
            x = np.atleast_1d(np.asarray(x, dtype=float))
            return np.full(m, x[0]) if x.shape[0] == 1 and m > 1 else x

        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "desired", vec(self.desired))
        object.__setattr__(self, "amplitude", vec(self.amplitude))
        object.__setattr__(self, "frequency", vec(self.frequency))
        if self.dbar < 0:
            raise ValueError("disturbance envelope must be nonnegative")
        if self.dwell < 0 or self.hysteresis < 0:
            raise ValueError("dwell and hysteresis must be nonnegative")
        if np.any(self.eta_bar_min() <= np.abs(self.desired)):
            raise ValueError("desired pose must lie strictly inside the shrunk bound")

    @property
    def m(self):
        return self.offset.shape[0]

    def eta(self, t):
        return self.offset + self.amplitude * np.sin(self.frequency * t)

    def eta_dot(self, t):
        return self.amplitude * self.frequency * np.cos(self.frequency * t)

    def eta_ddot(self, t):
        return -self.amplitude * self.frequency**2 * np.sin(self.frequency * t)

    def eta_bar(self, t):
        return self.eta(t) - self.dbar

    def eta_bar_min(self):
        return self.offset - np.abs(self.amplitude) - self.dbar

    @cached_property
    def hysteresis_abs(self):
        """Hysteresis band in metres: fraction of the resting distance to the shrunk bound."""
        rest = np.abs(np.abs(self.desired) - self.eta_bar(0.0))
        return self.hysteresis * float(rest.min())

    def with_dbar(self, dbar):
        return ConstraintSpec(self.offset, self.desired, self.amplitude, self.frequency,
                              dbar, self.hysteresis, self.activation_band, self.dwell)


@dataclass
class SwitchState:
    p: int = 1
    t_last_switch: float = -np.inf
    switches: int = 0

    def __post_init__(self):
        if self.p not in (1, 2):
            raise ValueError("p must be 1 or 2")


def _split(E_r, m):
    E_r = np.asarray(E_r, dtype=float)
    return E_r[:m], E_r[m:2 * m]


def constraint_h_all(E_r, t, spec: ConstraintSpec, shrunk=True):
    e, _ = _split(E_r, spec.m)
    bound = spec.eta_bar(t) if shrunk else spec.eta(t)
    return np.abs(e + spec.desired) - bound


def constraint_h(E_r, t, spec: ConstraintSpec, axis):
    return float(constraint_h_all(E_r, t, spec)[axis])


def constraint_hdot_all(E_r, t, spec: ConstraintSpec):
    e, edot = _split(E_r, spec.m)
    # np.sign(0) == 0: at the centre only the bound motion contributes
    return np.sign(e + spec.desired) * edot - spec.eta_dot(t)


def constraint_hdot(E_r, t, spec: ConstraintSpec, axis):
    return float(constraint_hdot_all(E_r, t, spec)[axis])


def gamma_all(A2, E_r, B_a, f_ext, spec: ConstraintSpec):
    m = spec.m
    e, _ = _split(E_r, m)
    acc = (np.asarray(A2) @ np.asarray(E_r, dtype=float) + np.asarray(B_a) @ np.atleast_1d(f_ext))[m:]
    return np.minimum(np.sign(e + spec.desired) * acc, -GAMMA_CLAMP)


def gamma_term(A2, E_r, B_a, f_ext, axis, spec: ConstraintSpec):
    """Per-axis deceleration available under the stiff subsystem, clamped to <= -1e-3."""
    return float(gamma_all(A2, E_r, B_a, f_ext, spec)[axis])


def phi_value(h, hdot, gamma):
    """Relative-degree-two invariance function; elementwise on arrays."""
    h = np.asarray(h, dtype=float)
    hdot = np.asarray(hdot, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if (gamma >= 0).any():
        raise ValueError("gamma must be negative")
    return np.where(hdot <= 0.0, h, h - hdot * hdot / (2.0 * gamma))


def phi1(E_r, t, spec: ConstraintSpec, gamma, axis):
    h = constraint_h(E_r, t, spec, axis)
    hdot = constraint_hdot(E_r, t, spec, axis)
    return float(phi_value(h, hdot, gamma))


def phi_all(E_r, t, spec: ConstraintSpec, gamma):
    return phi_value(constraint_h_all(E_r, t, spec), constraint_hdot_all(E_r, t, spec), gamma)


def phi_max(E_r, t, spec: ConstraintSpec, gamma):
    return float(np.max(phi_all(E_r, t, spec, gamma)))


@dataclass
class A2Report:
    margins: np.ndarray
    boundary_points: list = field(default_factory=list)

    @property
    def passed(self):
        return bool(np.all(self.margins >= 0.0))

    @property
    def worst_axis(self):
        return int(np.argmin(self.margins))

    def raise_if_failed(self):
        if not self.passed:
            i = self.worst_axis
            raise ConditionViolated(
                f"A2 condition violated on axis {i + 1}: margin {self.margins[i]:.6g}",
                axis=i, margin=float(self.margins[i]))
        return self

    def lines(self):
        out = []
        for i, mg in enumerate(self.margins):
            out.append(f"a2_margin_axis{i + 1} = {mg:.6g} ({'pass' if mg >= 0 else 'FAIL'})")
        return out


def verify_a2_condition(A2, B_a, f_bar, spec: ConstraintSpec, velocity_bound=None):
    """Check 2|B_a f_bar| <= |A2 E_bar| on the acceleration rows for every boundary point.

    Boundary points put axis i on either side of the shrunk bound (at its tightest
    over time) with zero velocity, and again with ``velocity_bound`` pointing outward.
    The margin of an axis is the smallest slack over its boundary points.
    """
    A2 = np.asarray(A2, dtype=float)
    B_a = np.asarray(B_a, dtype=float)
    m = spec.m
    fb = np.broadcast_to(np.atleast_1d(np.asarray(f_bar, dtype=float)), (m,))
    force_term = 2.0 * np.abs(B_a @ fb)[m:]
    vbar = np.zeros(m) if velocity_bound is None else np.broadcast_to(
        np.atleast_1d(np.asarray(velocity_bound, dtype=float)), (m,))
    eta_min = spec.eta_bar_min()
    margins = np.full(m, np.inf)
    points = []
    for i in range(m):
        for side in (1.0, -1.0):
            for v in {0.0, float(vbar[i])}:
                E = np.zeros(2 * m)
                E[i] = side * eta_min[i] - spec.desired[i]
                E[m + i] = side * v
                slack = np.abs(A2 @ E)[m + i] - force_term[i]
                points.append(E)
                margins[i] = min(margins[i], slack)
    return A2Report(margins=margins, boundary_points=points)


def indicator(E_r, t, spec: ConstraintSpec, switch: SwitchState, gamma):
    """Select the active reference subsystem and update ``switch`` in place.

    Phi_max >= 0 forces the stiff subsystem immediately.  Returning to the
    compliant one needs Phi_max <= -delta, h_dot <= 0 on every axis within
    ``activation_band`` of its boundary, and ``dwell`` seconds since the last switch.
    Inside the band the previous subsystem is kept.
    """
    h = constraint_h_all(E_r, t, spec)
    hdot = constraint_hdot_all(E_r, t, spec)
    phi = phi_value(h, hdot, gamma)
    pmax = float(phi.max())
    p = switch.p
    if pmax >= 0.0:
        p = 2
    elif pmax <= -spec.hysteresis_abs:
        active = phi > -spec.activation_band
        inward = bool(np.all(hdot[active] <= 0.0))
        dwelled = (t - switch.t_last_switch) >= spec.dwell - 1e-12
        if inward and (switch.p == 1 or dwelled):
            p = 1
    if p != switch.p:
        switch.p = p
        switch.t_last_switch = t
        switch.switches += 1
    return p
