"""Figure rendering for completed runs.

Reads the delimited outputs a run leaves behind (trace.csv, events.csv) and
writes PNG summaries next to them. Everything here is presentation only;
numbers are taken from the CSVs, never recomputed from the models.
"""

from __future__ import annotations

import csv
import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

TRACE_FILE = "trace.csv"
EVENTS_FILE = "events.csv"


def _read_csv(path: str) -> list[dict[str, str]]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def _floats(rows: list[dict[str, str]], key: str) -> list[float]:
    return [float(r[key]) for r in rows]


def _save(fig, out_dir: str, name: str, written: list[str]) -> None:
    path = os.path.join(out_dir, name)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)


def render_run_figures(run_dir: str, out_dir: str | None = None) -> list[str]:
    """Render all figures for a run directory; returns the files written.

    Requires trace.csv; events.csv is optional (a run may end without any
    handoff).
    """
    out_dir = out_dir or run_dir
    trace_path = os.path.join(run_dir, TRACE_FILE)
    if not os.path.exists(trace_path):
        raise FileNotFoundError(trace_path)
    rows = _read_csv(trace_path)
    if not rows:
        raise ValueError(f"{trace_path} has no data rows")
    events_path = os.path.join(run_dir, EVENTS_FILE)
    events = _read_csv(events_path) if os.path.exists(events_path) else []
    os.makedirs(out_dir, exist_ok=True)

    t = _floats(rows, "t_ms")
    written: list[str] = []

    # one-step prediction errors
    et = [float(r["t_ms"]) for r in rows if r["err_x"] != ""]
    ex = [float(r["err_x"]) for r in rows if r["err_x"] != ""]
    ey = [float(r["err_y"]) for r in rows if r["err_y"] != ""]
    fig, (top, bot) = plt.subplots(2, 1, sharex=True, figsize=(8, 5))
    top.plot(et, ex, lw=0.6, color="tab:blue")
    top.set_ylabel("error x (m)")
    bot.plot(et, ey, lw=0.6, color="tab:orange")
    bot.set_ylabel("error y (m)")
    bot.set_xlabel("t (ms)")
    top.set_title("one-step position prediction error")
    fig.tight_layout()
    _save(fig, out_dir, "errors.png", written)

    # speed estimate vs. ground truth derived from the true track
    true_x = _floats(rows, "true_x")
    true_y = _floats(rows, "true_y")
    true_speed = [0.0]
    for i in range(1, len(rows)):
        dt = t[i] - t[i - 1]
        step = math.hypot(true_x[i] - true_x[i - 1], true_y[i] - true_y[i - 1])
        true_speed.append(step / dt if dt > 0 else 0.0)
    fig, ax = plt.subplots(figsize=(8, 3.2))
    ax.plot(t, _floats(rows, "s_avg"), lw=0.8, label="estimated")
    ax.plot(t, true_speed, lw=0.8, ls="--", label="true (per step)")
    ax.set_xlabel("t (ms)")
    ax.set_ylabel("speed (m/ms)")
    ax.set_title("average speed estimate")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, out_dir, "speed.png", written)

    # trigger distance
    fig, ax = plt.subplots(figsize=(8, 3.2))
    ax.plot(t, _floats(rows, "d"), lw=0.8, color="tab:green")
    ax.set_xlabel("t (ms)")
    ax.set_ylabel("d (m)")
    ax.set_title("handoff trigger distance")
    fig.tight_layout()
    _save(fig, out_dir, "trigger.png", written)

    # error-bound window per axis
    fig, (top, bot) = plt.subplots(2, 1, sharex=True, figsize=(8, 5))
    top.plot(t, _floats(rows, "pe_x"), lw=0.8, label="max")
    top.plot(t, _floats(rows, "ne_x"), lw=0.8, label="min")
    top.set_ylabel("x window (m)")
    top.legend(loc="best", fontsize=8)
    bot.plot(t, _floats(rows, "pe_y"), lw=0.8, label="max")
    bot.plot(t, _floats(rows, "ne_y"), lw=0.8, label="min")
    bot.set_ylabel("y window (m)")
    bot.set_xlabel("t (ms)")
    top.set_title("prediction window half-extents")
    fig.tight_layout()
    _save(fig, out_dir, "window.png", written)

    # plan view of the run
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.plot(_floats(rows, "meas_x"), _floats(rows, "meas_y"),
            lw=0.4, color="0.6", label="measured")
    ax.plot(true_x, true_y, lw=1.0, color="tab:blue", label="true")
    if events:
        ax.scatter(_floats(events, "x"), _floats(events, "y"),
                   marker="x", s=60, color="tab:red", zorder=5, label="handoff")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_aspect("equal")
    ax.set_title("trajectory")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, out_dir, "path.png", written)

    return written
