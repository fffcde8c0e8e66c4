"""Interaction-force and disturbance signals."""
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ForceProfile:
    """Piecewise force: cosine ramp up, hold at 2a, cosine ramp down.

    With ``smooth`` false the ramps use cos(ramp_rate * pi * t) verbatim, which
    is discontinuous at the segment joints; with ``smooth`` true the cosine phase
    is rescaled to each ramp interval so the profile is continuous.
    """

    amplitude: tuple = (1.0, 0.0)
    breakpoints: tuple = (10.0, 11.0, 20.0, 21.0)
    ramp_rate: float = 0.3
    smooth: bool = False

    def __post_init__(self):
        b = tuple(float(x) for x in self.breakpoints)
        if len(b) != 4 or not (b[0] <= b[1] <= b[2] <= b[3]):
            raise ValueError("breakpoints must be four nondecreasing times")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "amplitude", tuple(float(a) for a in np.atleast_1d(self.amplitude)))

    @property
    def peak(self):
        return 2.0 * max(abs(a) for a in self.amplitude)

    def segment(self, t):
        """Index of the piece containing t: 0 before, 1 ramp up, 2 hold, 3 ramp down, 4 after."""
        return bisect_right(self.breakpoints, t)

    def shape(self, t, segment=None):
        """Unit-amplitude profile value (the force is amplitude * shape).

        ``segment`` evaluates that piece's expression at t, so an integrator step
        that starts on a piece keeps using it up to the step end.
        """
        t0, t1, t2, t3 = self.breakpoints
        seg = self.segment(t) if segment is None else segment
        if seg == 0 or seg == 4:
            return 0.0
        if seg == 1:
            phase = np.pi * (t - t0) / (t1 - t0) if self.smooth else self.ramp_rate * np.pi * t
            return 1.0 - np.cos(phase)
        if seg == 2:
            return 2.0
        phase = np.pi * (t - t2) / (t3 - t2) if self.smooth else self.ramp_rate * np.pi * t
        return 1.0 + np.cos(phase)

    def __call__(self, t, segment=None):
        return np.asarray(self.amplitude) * self.shape(t, segment)


def force_profile(t, a=(1.0, 0.0), **kwargs):
    return ForceProfile(amplitude=tuple(a), **kwargs)(t)


@dataclass
class Disturbance:
    """d(t) = sine_amplitude sin(sine_frequency t) + random_amplitude r_o(t) on (start, end).

    r_o is uniform on [0, 1], drawn once per ``sample_period`` on a fixed time
    grid so the signal does not depend on the integration step.
    """

    enabled: bool = True
    sine_amplitude: float = 0.1
    sine_frequency: float = 50.0
    random_amplitude: float = 0.05
    start: float = 15.0
    end: float = 25.0
    sample_period: float = 1e-3
    rng: np.random.Generator = None
    horizon: float = 30.0

    def __post_init__(self):
        if self.enabled and self.random_amplitude != 0.0 and self.rng is None:
            raise ValueError("a seeded random generator is required for the random term")
        n = int(np.ceil(self.horizon / self.sample_period)) + 2
        self._samples = self.rng.random(n) if self.rng is not None else np.zeros(n)

    @property
    def bound(self):
        return abs(self.sine_amplitude) + abs(self.random_amplitude) if self.enabled else 0.0

    def random_sample(self, t):
        idx = min(int(np.floor(t / self.sample_period + 1e-9)), self._samples.shape[0] - 1)
        return self._samples[idx]

    def __call__(self, t):
        if not self.enabled or not (self.start < t < self.end):
            return 0.0
        return (self.sine_amplitude * np.sin(self.sine_frequency * t)
                + self.random_amplitude * self.random_sample(t))


def disturbance(t, rng_value):
    """Default disturbance with an explicit r_o value."""
    if not 15.0 < t < 25.0:
        return 0.0
    return 0.1 * np.sin(50.0 * t) + 0.05 * rng_value
