"""Scenario description and configuration-time checks."""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..admittance import AdmittanceParams, build_state_space
from ..baselines import InvarianceBaselineConfig
from ..bounds import axes_of, envelope_table, switched_envelope, velocity_bound_beta
from ..dynamics import SingleLinkModel, TwoLinkModel
from ..errors import ConfigRejected, SafeAdmitError, Underdamped
from ..mrac import AdaptiveGainSet
from ..reference import ReferenceModelSet, axis_coefficients, companion_matrix
from ..safety import A2Report, ConstraintSpec, verify_a2_condition
from .profiles import ForceProfile

MODELS = ("two_link", "single_link")
CONTROLLERS = ("proposed", "invariance_baseline")


@dataclass
class DisturbanceConfig:
    enabled: bool = False
    sine_amplitude: float = 0.1
    sine_frequency: float = 50.0
    random_amplitude: float = 0.05
    start: float = 15.0
    end: float = 25.0
    sample_period: float = 1e-3

    @property
    def bound(self):
        return abs(self.sine_amplitude) + abs(self.random_amplitude) if self.enabled else 0.0


@dataclass
class ObserverConfig:
    enabled: bool = False
    gain: float = 50.0
    velocity_noise: float = 0.0
    noise_period: float = 1e-3


@dataclass
class Scenario:
    name: str
    model: str
    plant: object
    admittance: AdmittanceParams
    compliant: tuple
    safe: tuple
    constraints: ConstraintSpec
    force: ForceProfile
    mismatch: float
    force_bound: float
    adaptation_rate: tuple
    gain_offset: Optional[np.ndarray] = None
    disturbance: DisturbanceConfig = field(default_factory=DisturbanceConfig)
    observer: ObserverConfig = field(default_factory=ObserverConfig)
    baseline: InvarianceBaselineConfig = field(default_factory=InvarianceBaselineConfig)
    controller: str = "proposed"
    dt: float = 1e-3
    duration: float = 30.0
    seed: Optional[int] = None
    error_channel: str = "axis:1"
    published_P: Optional[np.ndarray] = None
    compliant_is_admittance: bool = False

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigRejected(f"unknown model {self.model!r}")
        if self.controller not in CONTROLLERS:
            raise ConfigRejected(f"unknown controller {self.controller!r}")
        if not self.dt > 0 or not self.duration > self.dt:
            raise ConfigRejected("require dt > 0 and duration > dt")
        expected = TwoLinkModel if self.model == "two_link" else SingleLinkModel
        if not isinstance(self.plant, expected):
            raise ConfigRejected(f"plant parameters do not match model {self.model}")
        m = 2 if self.model == "two_link" else 1
        if self.admittance.m != m or self.constraints.m != m:
            raise ConfigRejected(f"model {self.model} needs {m}-dimensional admittance and constraints")
        if len(self.force.amplitude) != m:
            raise ConfigRejected(f"force amplitude needs {m} entries")
        if self.mismatch < 0 or self.force_bound < 0:
            raise ConfigRejected("mismatch and force bound must be nonnegative")
        needs_rng = (self.disturbance.enabled and self.disturbance.random_amplitude != 0.0) or \
            (self.observer.enabled and self.observer.velocity_noise != 0.0)
        if needs_rng and self.seed is None:
            raise ConfigRejected("a seed is required when random disturbances or noise are enabled")
        if self.observer.enabled and self.model != "single_link":
            raise ConfigRejected("the residual observer is only available for the single-link model")
        if self.force.peak > self.force_bound + 1e-12:
            raise ConfigRejected(f"force profile peak {self.force.peak} exceeds force bound {self.force_bound}")

    @property
    def m(self):
        return self.admittance.m

    @property
    def steps(self):
        return int(round(self.duration / self.dt))

    def state_space(self):
        return build_state_space(self.admittance)

    def reference_models(self):
        A_a, B_a = self.state_space()
        A1 = A_a.copy() if self.compliant_is_admittance else companion_matrix(*self.compliant)
        A2 = companion_matrix(*self.safe)
        return ReferenceModelSet(A1, A2, B_a)

    def dbar(self, models=None):
        models = models or self.reference_models()
        return switched_envelope(self.mismatch, (models.A1, models.A2))

    def shrunk_constraints(self, models=None):
        return self.constraints.with_dbar(self.dbar(models))

    def gains(self, models=None):
        models = models or self.reference_models()
        A_a, B_a = self.state_space()
        return AdaptiveGainSet.build(A_a, B_a, models.A1, models.A2, self.adaptation_rate, self.gain_offset)

    def reference_velocity_bound(self, models):
        """Peak reference speed from rest under a force step of size force_bound."""
        fb = np.abs(models.B_a @ np.full(self.m, self.force_bound))[self.m:]
        betas = []
        for i in range(self.m):
            betas.append(max(_peak_unit_velocity(A, i) for A in (models.A1, models.A2)))
        return fb * np.array(betas)

    def with_(self, **changes):
        from dataclasses import replace
        return replace(self, **changes)


def _peak_unit_velocity(A, axis):
    """sup_t of the velocity response to a unit force step on one axis."""
    try:
        ax = axes_of(A)[axis]
        return velocity_bound_beta(ax.lam1, ax.lam2, ax.delta)
    except Underdamped:
        # complex pair: sample (e^{l1 t} - e^{l2 t}) / (l1 - l2) densely
        k, d = axis_coefficients(A, axis)
        l1, l2 = np.roots([1.0, -d, -k])
        t = np.linspace(0.0, 20.0 / abs(l1.real), 20001)
        return float(np.max(np.abs(((np.exp(l1 * t) - np.exp(l2 * t)) / (l1 - l2)).real)))


@dataclass
class PrecheckReport:
    models: ReferenceModelSet
    gains: AdaptiveGainSet
    constraints: ConstraintSpec
    a2: A2Report
    envelope_rows: list
    dbar: float

    def lines(self):
        out = ["[prechecks]"]
        for name, A in (("A1", self.models.A1), ("A2", self.models.A2)):
            eig = np.linalg.eigvals(A)
            out.append(f"hurwitz_{name} = pass (max real eigenvalue {eig.real.max():.6g})")
        out.extend(self.a2.lines())
        out.append(f"common_P_margin = {self.gains.margin:.6g}")
        out.append("common_P = " + " ".join(f"{x:.6g}" for x in self.gains.P.ravel()))
        for r in self.envelope_rows:
            out.append(
                f"envelope {r['subsystem']} axis{r['axis']}: lam1={r['lam1']:.6g} lam2={r['lam2']:.6g} "
                f"delta={r['delta']:.6g} t_s={r['t_s']:.6g} beta={r['beta']:.6g} "
                f"pos_limit={r['pos_limit']:.6g}")
        out.append(f"dbar = {self.dbar:.6g}")
        return out


def precheck(s: Scenario) -> PrecheckReport:
    """Hurwitz, common-P, envelope and A2-condition checks; raises ConfigRejected on failure."""
    try:
        models = s.reference_models()
        # the A2 condition is reported first; without an envelope it is checked
        # against the unshrunk bound, which is the most lenient case
        try:
            rows, dbar = envelope_table(s.mismatch, (models.A1, models.A2))
            envelope_error = None
        except SafeAdmitError as exc:
            rows, dbar, envelope_error = [], 0.0, exc
        spec = s.constraints.with_dbar(dbar)
        a2 = verify_a2_condition(models.A2, models.B_a, s.force_bound, spec,
                                 velocity_bound=s.reference_velocity_bound(models))
        a2.raise_if_failed()
        if envelope_error is not None:
            raise envelope_error
        gains = s.gains(models)
    except ConfigRejected:
        raise
    except (SafeAdmitError, ValueError) as exc:
        raise ConfigRejected(f"{type(exc).__name__}: {exc}") from exc
    return PrecheckReport(models, gains, spec, a2, rows, dbar)
