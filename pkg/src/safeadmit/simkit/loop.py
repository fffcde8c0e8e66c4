"""Closed-loop execution: plant, admittance law, adaptive gains, switched reference.

Each step: read forces, choose the reference subsystem with the indicator, then
advance plant, reference and the active gain together with one RK4 step while
the subsystem index (and for the single-link arm the voltage) is held.  When
the indicator would change within a step, the crossing time is found by
bisection and the rest of the step runs on the new subsystem.
"""
import math

import numpy as np

from ..baselines import corrective_axis, corrective_input
from ..dynamics import SINGULAR_DET, DLS_DAMPING, inverse_kinematics, single_link_voltage
from ..errors import NumericalDivergence
from ..observer import ResidualObserverState, residual_step
from ..safety import SwitchState, constraint_h_all, gamma_all, indicator, phi_value, constraint_hdot_all
from .log import TrajectoryLog, trajectory_columns
from .profiles import Disturbance
from .scenario import Scenario, precheck

DIVERGENCE_LIMIT = 1e6
EVENT_BISECTIONS = 40


class TwoLinkPlant:
    """Two-link arm under computed torque; force sensed exactly."""

    n = 2
    zoh = False

    def __init__(self, model, desired):
        self.model = model
        self.desired = np.asarray(desired, dtype=float)
        self.damped_steps = 0
        self._kin_key = None

    def initial_state(self):
        q0 = inverse_kinematics(self.model, self.desired)
        return np.array([q0[0], q0[1], 0.0, 0.0])

    def kinematics(self, x):
        key = (x[0], x[1], x[2], x[3])
        if key == self._kin_key:
            return self._kin_val
        md = self.model
        q1, q2, qd1, qd2 = key
        s1, c1 = math.sin(q1), math.cos(q1)
        s12, c12 = math.sin(q1 + q2), math.cos(q1 + q2)
        j11 = -md.l1 * s1 - md.l2 * s12
        j12 = -md.l2 * s12
        j21 = md.l1 * c1 + md.l2 * c12
        j22 = md.l2 * c12
        xi = (md.l1 * c1 + md.l2 * c12, md.l1 * s1 + md.l2 * s12)
        xidot = (j11 * qd1 + j12 * qd2, j21 * qd1 + j22 * qd2)
        self._kin_key, self._kin_val = key, (xi, xidot, (j11, j12, j21, j22))
        self._trig = (s1, c1, s12, c12)
        return self._kin_val

    def measure(self, x, held):
        xi, xidot, _ = self.kinematics(x)
        return np.array(xi), np.array(xidot)

    def error_state(self, x, desired, held):
        (a, b), (c, d), _ = self.kinematics(x)
        return np.array([a - desired[0], b - desired[1], c, d])

    def deriv(self, t, x, u, f_meas, f_true, d, held):
        md = self.model
        q1, q2, qd1, qd2 = x
        (_, _), (_, _), (j11, j12, j21, j22) = self.kinematics(x)
        s1, c1, s12, c12 = self._trig
        w12 = qd1 + qd2
        # Jdot @ qdot
        jd1 = (-md.l1 * c1 * qd1 - md.l2 * c12 * w12) * qd1 - md.l2 * c12 * w12 * qd2
        jd2 = (-md.l1 * s1 * qd1 - md.l2 * s12 * w12) * qd1 - md.l2 * s12 * w12 * qd2
        det = j11 * j22 - j12 * j21
        if abs(det) < SINGULAR_DET:
            self.damped_steps += 1
            J = np.array([[j11, j12], [j21, j22]])
            Ji = J.T @ np.linalg.inv(J @ J.T + DLS_DAMPING * np.eye(2))
            i11, i12, i21, i22 = Ji.ravel()
        else:
            i11, i12, i21, i22 = j22 / det, -j12 / det, -j21 / det, j11 / det
        a1, a2 = u[0] - jd1, u[1] - jd2
        v1, v2 = i11 * a1 + i12 * a2, i21 * a1 + i22 * a2
        # inertia and Coriolis vector
        c2, s2 = math.cos(q2), math.sin(q2)
        a = md.m2 * md.l2 ** 2
        b = md.m2 * md.l1 * md.l2 * c2
        m11 = a + 2.0 * b + (md.m1 + md.m2) * md.l1 ** 2
        m12 = a + b
        m22 = a
        k = md.m2 * md.l1 * md.l2 * s2
        h1 = -k * (qd2 * qd2 + 2.0 * qd1 * qd2)
        h2 = k * qd1 * qd1
        fm1, fm2 = f_meas[0], f_meas[1]
        ft1, ft2 = f_true[0], f_true[1]
        # computed torque (controller side)
        tc1 = m11 * v1 + m12 * v2 + h1 - (j11 * fm1 + j21 * fm2)
        tc2 = m12 * v1 + m22 * v2 + h2 - (j12 * fm1 + j22 * fm2)
        # disturbance torque realising xi_ddot += d on every axis
        dv1, dv2 = (i11 + i12) * d, (i21 + i22) * d
        td1 = m11 * dv1 + m12 * dv2
        td2 = m12 * dv1 + m22 * dv2
        # plant
        r1 = tc1 + td1 + (j11 * ft1 + j21 * ft2) - h1
        r2 = tc2 + td2 + (j12 * ft1 + j22 * ft2) - h2
        mdet = m11 * m22 - m12 * m12
        qdd1 = (m22 * r1 - m12 * r2) / mdet
        qdd2 = (-m12 * r1 + m11 * r2) / mdet
        return np.array([qd1, qd2, qdd1, qdd2]), (tc1, tc2)


class SingleLinkPlant:
    """Voltage-driven link; zero-order-hold voltage, noisy tachometer, observer force."""

    n = 1
    zoh = True

    def __init__(self, model, desired, noise=None):
        self.model = model
        self.desired = np.asarray(desired, dtype=float)
        self.noise = noise
        self.damped_steps = 0

    def initial_state(self):
        return np.array([self.desired[0], 0.0])

    def measure(self, x, held):
        return np.array([x[0]]), np.array([x[1] + held["noise"]])

    def error_state(self, x, desired, held):
        return np.array([x[0] - desired[0], x[1] + held["noise"]])

    def deriv(self, t, x, u, f_meas, f_true, d, held):
        md = self.model
        V = held["V"]
        tau_true = f_true[0] * md.l
        wdot = (md.A_m * V + tau_true - md.B_eq * x[1]) / md.J_eq + d
        return np.array([x[1], wdot]), (V,)


def _make_plant(s: Scenario):
    if s.model == "two_link":
        return TwoLinkPlant(s.plant, s.constraints.desired)
    return SingleLinkPlant(s.plant, s.constraints.desired)


def run_scenario(s: Scenario, pre=None) -> TrajectoryLog:
    pre = pre or precheck(s)
    models, gains, spec = pre.models, pre.gains, pre.constraints
    m = s.m
    A_a, B_a = s.state_space()
    Minv = np.linalg.inv(s.admittance.M_a)
    D_a, K_a = s.admittance.D_a, s.admittance.K_a
    # u = -M_a^-1 (D_a edot + K_a e - u_c) = feedback E + M_a^-1 u_c
    feedback = -Minv @ np.hstack([K_a, D_a])
    A = {1: models.A1, 2: models.A2}
    P = gains.P
    Ginv = {1: np.linalg.inv(gains.Gamma1), 2: np.linalg.inv(gains.Gamma2)}
    GBtP = {p: gains.gamma(p) @ B_a.T @ P for p in (1, 2)}
    Kstar = {1: gains.K1_star, 2: gains.K2_star}
    proposed = s.controller == "proposed"
    desired = spec.desired

    seq = np.random.SeedSequence(s.seed if s.seed is not None else 0)
    dist_seq, noise_seq = seq.spawn(2)
    dc = s.disturbance
    dist = Disturbance(dc.enabled, dc.sine_amplitude, dc.sine_frequency, dc.random_amplitude,
                       dc.start, dc.end, dc.sample_period,
                       np.random.default_rng(dist_seq) if dc.enabled and dc.random_amplitude else None,
                       s.duration + 1.0)
    oc = s.observer
    noise_rng = np.random.default_rng(noise_seq)
    n_noise = int(math.ceil((s.duration + 1.0) / oc.noise_period)) + 2
    noise = (noise_rng.uniform(-oc.velocity_noise, oc.velocity_noise, n_noise)
             if oc.enabled and oc.velocity_noise else np.zeros(n_noise))
    obs = ResidualObserverState(K_o=oc.gain) if oc.enabled else None

    def noise_at(t):
        return noise[min(int(math.floor(t / oc.noise_period + 1e-9)), n_noise - 1)]

    plant = _make_plant(s)
    x = plant.initial_state()
    E_r = np.zeros(2 * m)
    if s.model == "two_link":
        xi0, _, _ = plant.kinematics(x)
        E_r[:m] = np.array(xi0) - desired
    K = {1: gains.K1.copy(), 2: gains.K2.copy()}
    switch = SwitchState(p=1)
    if obs is not None:
        residual_step(obs, s.plant, x[1] + noise_at(0.0), 0.0, s.dt)
    step_start = [0.0]
    last_force = [None, None]

    def force(tt):
        # pieces are taken from the step start so a jump on a grid point is not
        # seen by the last RK4 stage of the preceding step
        key = (tt, step_start[0])
        if last_force[0] != key:
            last_force[0] = key
            last_force[1] = s.force(tt, s.force.segment(step_start[0]))
        return last_force[1]

    f_hat = np.zeros(m)
    nx = x.shape[0]
    nE = 2 * m
    dt = s.dt
    N = s.steps
    rows = []

    def controller(t, xs, Er, Kp, p, held):
        E = plant.error_state(xs, desired, held)
        fm = held["f_meas"](t)
        if proposed:
            uc = Kp @ E + fm
        else:
            uc = Kstar[1] @ E + fm
            if held["axis"] is not None:
                uc = corrective_input(E, t, held["spec_b"], s.admittance, uc, held["axis"], s.baseline)
        u = feedback @ E + Minv @ uc
        return E, fm, uc, u

    def derivative(t, z, p, held, signals=False):
        xs = z[:nx]
        Er = z[nx:nx + nE]
        Kp = z[nx + nE:].reshape(m, 2 * m)
        E, fm, uc, u = controller(t, xs, Er, Kp, p, held)
        xdot, tau = plant.deriv(t, xs, u, fm, force(t), held["d"](t), held)
        Erdot = A[p] @ Er + B_a @ fm
        if proposed:
            Kdot = -np.multiply.outer(GBtP[p] @ (E - Er), E)
        else:
            Kdot = np.zeros((m, 2 * m))
        dz = np.concatenate([xdot, Erdot, Kdot.ravel()])
        if signals:
            return dz, (E, uc, u, tau)
        return dz

    def advance(t0, z0, h, p, held, k1=None):
        if h <= 0.0:
            return z0
        if k1 is None:
            k1 = derivative(t0, z0, p, held)
        k2 = derivative(t0 + 0.5 * h, z0 + 0.5 * h * k1, p, held)
        k3 = derivative(t0 + 0.5 * h, z0 + 0.5 * h * k2, p, held)
        k4 = derivative(t0 + h, z0 + h * k3, p, held)
        return z0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def flips(tt, zz, p, held):
        if p == 2 and tt - switch.t_last_switch < spec.dwell - 1e-12:
            return False
        Er = zz[nx:nx + nE]
        trial = SwitchState(switch.p, switch.t_last_switch, switch.switches)
        return indicator(Er, tt, spec, trial, gamma_all(A[2], Er, B_a, held["f_meas"](tt), spec)) != p

    shrunk_b = spec.with_dbar(0.0)
    t = 0.0
    checked_clean, checked_segment = False, None
    for k in range(N + 1):
        t = k * dt
        held = {"noise": noise_at(t) if obs is not None else 0.0, "axis": None, "spec_b": shrunk_b}
        if obs is not None:
            fh = f_hat.copy()
            held["f_meas"] = lambda _t, _f=fh: _f
        else:
            held["f_meas"] = force
        step_start[0] = t
        r_sample = dist.random_sample(t) if dist.enabled else 0.0
        # window membership is decided at the step start for the same reason
        d_active = dist.enabled and dist.start <= t < dist.end

        def d_of(tt, _r=r_sample, _on=d_active):
            if not _on:
                return 0.0
            return dist.sine_amplitude * math.sin(dist.sine_frequency * tt) + dist.random_amplitude * _r

        held["d"] = d_of
        fm0 = held["f_meas"](t)
        gam = gamma_all(A[2], E_r, B_a, fm0, spec)
        if proposed:
            # the end-of-step check already evaluated the indicator on the same
            # inputs unless the force piece changed or the estimate moved
            if not (checked_clean and obs is None and s.force.segment(t) == checked_segment):
                p = indicator(E_r, t, spec, switch, gam)
        else:
            xi, xidot = plant.measure(x, held)
            E0 = np.concatenate([xi - desired, xidot])
            held["axis"] = corrective_axis(E0, t, shrunk_b, s.baseline)
            p = 1 if held["axis"] is None else 2
        Kp = K[p] if proposed else K[1]
        if plant.zoh:
            _, _, _, u0 = controller(t, x, E_r, Kp, p, held)
            xi, xidot = plant.measure(x, held)
            held["V"] = single_link_voltage(s.plant, xidot[0], u0[0], fm0[0] * s.plant.l)

        # the first RK4 stage is evaluated at the logged state
        z = np.concatenate([x, E_r, Kp.ravel()])
        k1, (E, uc, u, tau) = derivative(t, z, p, held, signals=True)
        xi_true, xid_true = _true_task(plant, x)
        e_a = E - E_r
        V = 0.5 * e_a @ P @ e_a
        for q in (1, 2):
            Kt = K[q] - Kstar[q]
            V += 0.5 * np.trace(Kt.T @ Ginv[q] @ Kt)
        h_r = constraint_h_all(E_r, t, spec)
        phi = phi_value(h_r, constraint_hdot_all(E_r, t, spec), gam)
        eta = spec.eta(t)
        hx = np.abs(xi_true) - eta
        rows.append(np.concatenate([
            [t], xi_true, xid_true, E_r[:m] + desired, desired, E, E_r, e_a, [p], uc, u, tau,
            K[1].ravel(), K[2].ravel(), [V, phi.max()], h_r, hx, eta, force(t), fm0, [held["d"](t)],
        ]))
        if k == N:
            break

        z_next = advance(t, z, dt, p, held, k1)
        checked_segment = s.force.segment(t)
        checked_clean = True
        if proposed and flips(t + dt, z_next, p, held):
            checked_clean = False
            # locate the switching instant inside the step so that it does not
            # depend on the step size, then finish the step on the new subsystem
            lo, hi = 0.0, dt
            for _ in range(EVENT_BISECTIONS):
                mid = 0.5 * (lo + hi)
                if flips(t + mid, advance(t, z, mid, p, held, k1), p, held):
                    hi = mid
                else:
                    lo = mid
            z_hit = advance(t, z, hi, p, held, k1)
            E_hit = z_hit[nx:nx + nE]
            p_new = indicator(E_hit, t + hi, spec, switch,
                              gamma_all(A[2], E_hit, B_a, held["f_meas"](t + hi), spec))
            K[p] = z_hit[nx + nE:].reshape(m, 2 * m).copy()
            z_hit = np.concatenate([z_hit[:nx + nE], K[p_new].ravel()])
            z_next = advance(t + hi, z_hit, dt - hi, p_new, held)
            p = p_new
        z = z_next
        if not np.all(np.isfinite(z)) or np.max(np.abs(z)) > DIVERGENCE_LIMIT:
            raise NumericalDivergence(f"state diverged at t={t + dt:.6f}")
        x = z[:nx]
        E_r = z[nx:nx + nE]
        if proposed:
            K[p] = z[nx + nE:].reshape(m, 2 * m)
        if obs is not None:
            w_meas = x[1] + noise_at(t + dt)
            residual_step(obs, s.plant, w_meas, held["V"], dt)
            f_hat = np.array([obs.estimate / s.plant.l])

    log = TrajectoryLog(trajectory_columns(m, plant.n), np.array(rows))
    log.meta.update(scenario=s.name, controller=s.controller, dbar=pre.dbar,
                    margin=gains.margin, damped_steps=plant.damped_steps, switches=switch.switches)
    return log


def _true_task(plant, x):
    if isinstance(plant, TwoLinkPlant):
        xi, xidot, _ = plant.kinematics(x)
        return np.array(xi), np.array(xidot)
    return np.array([x[0]]), np.array([x[1]])
