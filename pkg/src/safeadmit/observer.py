"""Momentum residual observer for the external torque on the single-link arm.

The continuous observer is

    tau_hat(t) = K_o (J_eq omega(t) - J_eq omega(0) - int_0^t (A_m V_m - B_eq omega + tau_hat) ds)

which, under an exact model, gives tau_hat' = K_o (tau_ext - tau_hat).  The
discrete update below is the exact zero-order-hold discretisation of that lag,
with the momentum increment and the known-input integral (trapezoidal in omega)
taken over each sample interval.
"""
from dataclasses import dataclass

import numpy as np

from .dynamics import SingleLinkModel


@dataclass
class ResidualObserverState:
    K_o: float = 50.0
    integral: float = 0.0
    estimate: float = 0.0
    omega_prev: float = None

    def __post_init__(self):
        if not self.K_o > 0:
            raise ValueError("observer gain must be positive")


def residual_step(obs: ResidualObserverState, model: SingleLinkModel, omega, V_m, dt):
    """Update ``obs`` with the new velocity sample; V_m is the voltage held over the last interval."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if obs.omega_prev is None:
        obs.omega_prev = float(omega)
        return obs.estimate
    known = dt * (model.A_m * V_m - model.B_eq * 0.5 * (obs.omega_prev + omega))
    momentum = model.J_eq * (omega - obs.omega_prev)
    tau_avg = (momentum - known) / dt
    a = np.exp(-obs.K_o * dt)
    obs.integral += known + dt * obs.estimate
    obs.estimate = a * obs.estimate + (1.0 - a) * tau_avg
    obs.omega_prev = float(omega)
    return obs.estimate


def noise_gain_bound(model: SingleLinkModel, K_o, noise):
    """Worst-case estimate perturbation from velocity noise bounded by ``noise``: (2 K_o J_eq + B_eq) n."""
    return (2.0 * K_o * model.J_eq + model.B_eq) * noise
