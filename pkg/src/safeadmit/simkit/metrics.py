"""Integral error indices and control-effort statistics."""
from dataclasses import dataclass, asdict

import numpy as np

from .log import TrajectoryLog

# numpy 2 renamed trapz
_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass
class MetricsRecord:
    ISE: float
    IAE: float
    ITSE: float
    ITAE: float
    rms_u: float
    tv_u: float
    switch_count: int
    channel: str = "axis:1"

    def __post_init__(self):
        for k in ("ISE", "IAE", "ITSE", "ITAE", "rms_u", "tv_u"):
            if getattr(self, k) < 0:
                raise ValueError(f"{k} must be nonnegative")

    def as_dict(self):
        return asdict(self)

    def lines(self):
        d = self.as_dict()
        return [f"{k} = {v:.9g}" if isinstance(v, float) else f"{k} = {v}" for k, v in d.items()]


def error_signal(log: TrajectoryLog, channel="axis:1"):
    """Scalar error xi - xi_d selected by ``channel``: 'axis[:i]', 'norm' or 'sum'."""
    e = log.block("xi") - log.block("xid")
    if channel.startswith("axis"):
        _, _, idx = channel.partition(":")
        i = int(idx) - 1 if idx else 0
        if not 0 <= i < e.shape[1]:
            raise ValueError(f"axis {i + 1} out of range")
        return np.abs(e[:, i])
    if channel == "norm":
        return np.linalg.norm(e, axis=1)
    if channel == "sum":
        return np.abs(e).sum(axis=1)
    raise ValueError(f"unknown error channel {channel!r}")


def integral_indices(t, e):
    """ISE, IAE, ITSE, ITAE by the trapezoidal rule."""
    t = np.asarray(t, dtype=float)
    e = np.abs(np.asarray(e, dtype=float))
    return (_trapezoid(e**2, t), _trapezoid(e, t), _trapezoid(t * e**2, t), _trapezoid(t * e, t))


def total_variation(u):
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if u.shape[0] == 1:
        u = u.T
    return float(np.abs(np.diff(u, axis=0)).sum())


def compute_metrics(log: TrajectoryLog, error_channel="axis:1") -> MetricsRecord:
    t = log.t
    if len(t) > 2 and not np.allclose(np.diff(t), t[1] - t[0], rtol=1e-6, atol=1e-12):
        raise ValueError("metrics need a uniformly spaced log")
    e = error_signal(log, error_channel)
    ise, iae, itse, itae = integral_indices(t, e)
    u = log.block("u")
    rms = float(np.sqrt(np.mean(np.sum(u**2, axis=1))))
    switches = int(np.count_nonzero(np.diff(log["p"])))
    return MetricsRecord(float(ise), float(iae), float(itse), float(itae), rms, total_variation(u),
                         switches, error_channel)
