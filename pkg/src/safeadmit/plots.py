"""Static report figures written to PNG files (non-interactive backend)."""
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .reference import axis_coefficients  # noqa: E402

# no timestamps or version strings so repeated runs give identical files
_PNG_META = {"Software": None}


def _save(fig, path):
    fig.savefig(path, dpi=110, metadata=_PNG_META)
    plt.close(fig)
    return Path(path)


def plot_tracking(log, path):
    t = log.t
    xi, xir, eta = log.block("xi"), log.block("xir"), log.block("eta")
    m = xi.shape[1]
    fig, axes = plt.subplots(m, 1, figsize=(7, 2.6 * m), sharex=True, squeeze=False)
    for i, ax in enumerate(axes[:, 0]):
        ax.plot(t, xi[:, i], label="position")
        ax.plot(t, xir[:, i], "--", label="reference")
        ax.plot(t, eta[:, i], "k:", lw=1, label="bound")
        ax.plot(t, -eta[:, i], "k:", lw=1)
        ax.set_ylabel(f"axis {i + 1}")
    axes[0, 0].legend(loc="upper right", fontsize=8)
    axes[-1, 0].set_xlabel("time [s]")
    fig.tight_layout()
    return _save(fig, path)


def plot_subsystem(log, path, compliant_stiffness=None, safe_stiffness=None):
    """Active subsystem index and, if given, the resulting stiffness on axis 1."""
    t, p = log.t, log["p"]
    fig, ax = plt.subplots(2 if compliant_stiffness is not None else 1, 1, figsize=(7, 4), sharex=True,
                           squeeze=False)
    ax[0, 0].step(t, p, where="post")
    ax[0, 0].set_yticks([1, 2])
    ax[0, 0].set_ylabel("subsystem")
    if compliant_stiffness is not None:
        k = np.where(p == 2, safe_stiffness, compliant_stiffness)
        ax[1, 0].step(t, k, where="post")
        ax[1, 0].set_ylabel("stiffness")
    ax[-1, 0].set_xlabel("time [s]")
    fig.tight_layout()
    return _save(fig, path)


def plot_control(log, path):
    t, u = log.t, log.block("u")
    fig, ax = plt.subplots(figsize=(7, 3))
    for i in range(u.shape[1]):
        ax.plot(t, u[:, i], lw=0.8, label=f"u{i + 1}")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("task acceleration")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_comparison(logs, path, axis=0):
    """Overlay position and control input of several runs, keyed by label."""
    fig, (a1, a2) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    for label, log in logs.items():
        a1.plot(log.t, log.block("xi")[:, axis], label=label)
        a2.plot(log.t, log.block("u")[:, axis], lw=0.8, label=label)
    first = next(iter(logs.values()))
    a1.plot(first.t, first.block("eta")[:, axis], "k:", lw=1, label="bound")
    a1.set_ylabel(f"position axis {axis + 1}")
    a2.set_ylabel(f"input axis {axis + 1}")
    a2.set_xlabel("time [s]")
    a1.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def render_run(log, out_dir, scenario=None):
    out_dir = Path(out_dir)
    ks = (None, None)
    if scenario is not None:
        models = scenario.reference_models()
        ks = (abs(axis_coefficients(models.A1, 0)[0]), abs(axis_coefficients(models.A2, 0)[0]))
    return [
        plot_tracking(log, out_dir / "tracking.png"),
        plot_subsystem(log, out_dir / "subsystem.png", *ks),
        plot_control(log, out_dir / "control.png"),
    ]
