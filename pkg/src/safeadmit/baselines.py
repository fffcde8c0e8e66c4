"""Switching invariance-control baseline acting directly on the plant error."""
from dataclasses import dataclass

import numpy as np

from .admittance import AdmittanceParams
from .safety import ConstraintSpec, constraint_h_all, constraint_hdot_all, phi_value


@dataclass(frozen=True)
class InvarianceBaselineConfig:
    gamma_b: float = -5.0

    def __post_init__(self):
        if not self.gamma_b < 0:
            raise ValueError("gamma_b must be negative")


def baseline_phi(E, t, spec: ConstraintSpec, cfg: InvarianceBaselineConfig):
    h = constraint_h_all(E, t, spec)
    hdot = constraint_hdot_all(E, t, spec)
    return phi_value(h, hdot, np.full(spec.m, cfg.gamma_b))


def corrective_axis(E, t, spec: ConstraintSpec, cfg: InvarianceBaselineConfig):
    """Most-violated axis if the state lies outside the invariant set, else None."""
    phi = baseline_phi(E, t, spec, cfg)
    i = int(np.argmax(phi))
    return i if phi[i] >= 0.0 else None


def corrective_input(E, t, spec, params: AdmittanceParams, u_c, axis, cfg):
    """Override u_c so that h_ddot = gamma_b on ``axis``; other axes keep their nominal acceleration."""
    E = np.asarray(E, dtype=float)
    m = spec.m
    e, edot = E[:m], E[m:]
    base = params.D_a @ edot + params.K_a @ e
    acc = np.linalg.solve(params.M_a, np.asarray(u_c, dtype=float) - base)
    sgn = np.sign(e[axis] + spec.desired[axis]) or 1.0
    acc[axis] = sgn * (cfg.gamma_b + spec.eta_ddot(t)[axis])
    return params.M_a @ acc + base


def invariance_control_step(E, t, spec: ConstraintSpec, u_c, params: AdmittanceParams,
                            cfg: InvarianceBaselineConfig = InvarianceBaselineConfig()):
    """Nominal passthrough inside the invariant set, IO-linearising override on its boundary."""
    axis = corrective_axis(E, t, spec, cfg)
    if axis is None:
        return np.asarray(u_c, dtype=float)
    return corrective_input(E, t, spec, params, u_c, axis, cfg)
