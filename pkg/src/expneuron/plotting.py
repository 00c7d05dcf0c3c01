"""Optional PNG renderings of CLI outputs.

Only used by ``--plot``; matplotlib is imported lazily with the Agg backend so
the library itself never needs a display.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _save(fig, path: Path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    fig.clf()
    return path


def plot_series(path: Path, steps, xs, title: str = "", ylabel: str = "x") -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(8, 3))
    ax.plot(steps, xs, lw=0.6)
    ax.set_xlabel("step")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    out = _save(fig, path)
    plt.close(fig)
    return out


def plot_sweep(path: Path, axis: str, values, x_min, x_max, title: str = "") -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(values, x_max, ".", ms=2, label="max x")
    ax.plot(values, x_min, ".", ms=2, label="min x")
    ax.set_xlabel(axis)
    ax.set_ylabel("x")
    ax.set_title(title)
    ax.legend(loc="best", fontsize="small")
    out = _save(fig, path)
    plt.close(fig)
    return out


def plot_phase(path: Path, xs, ys, title: str = "") -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(xs, ys, ",", color="k")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title)
    out = _save(fig, path)
    plt.close(fig)
    return out


def plot_noise_response(path: Path, sigmas, rates, bursts, title: str = "") -> Path:
    plt = _pyplot()
    sig = np.asarray(sigmas, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(sig, rates, "o-", label="spikes / 1000 steps")
    ax.set_xlabel("sigma")
    ax.set_ylabel("spike rate")
    if np.all(sig > 0):
        ax.set_xscale("log")
    twin = ax.twinx()
    twin.plot(sig, bursts, "s--", color="tab:red", label="burst fraction")
    twin.set_ylim(-0.05, 1.05)
    twin.set_ylabel("burst fraction")
    ax.set_title(title)
    out = _save(fig, path)
    plt.close(fig)
    return out
