"""Figure rendering for experiment tables.

The CSV is the data contract; these renderers draw the same rows into a PNG
written next to the table so a sweep is inspectable at a glance.  Layout is
chosen from the experiment's measure and sweep axes.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .experiments import ResultTable

plt.rcParams["figure.figsize"] = (6.0, 4.0)
plt.rcParams["axes.grid"] = True
plt.rcParams["grid.alpha"] = 0.3

_Y_LABELS = {
    "exit-prob": "exit probability to all-ones consensus",
    "consensus-time": "mean consensus time",
}


def _column(table: ResultTable, name: str) -> list:
    idx = table.columns.index(name)
    return [row[idx] for row in table.rows]


def _series_groups(table: ResultTable, axes: list[str]):
    """Split rows by the secondary axis (if any); yields (label, row subset)."""
    if len(axes) < 2:
        yield None, list(table.rows)
        return
    second = table.columns.index(axes[1])
    seen = []
    for row in table.rows:
        if row[second] not in seen:
            seen.append(row[second])
    for value in seen:
        yield f"{axes[1]}={value}", [r for r in table.rows if r[second] == value]


def render_table(table: ResultTable, path) -> None:
    """Render a ResultTable to an image file; dispatches on the measure."""
    config = table.provenance["config"]
    measure = config["measure"]
    fig, ax = plt.subplots()
    if measure == "trajectory":
        _draw_trajectory(ax, table)
    elif measure == "equilibrium":
        _draw_equilibrium(ax, table, config)
    else:
        _draw_sweep(ax, table, config)
    note = table.provenance.get("note", "")
    if note:
        ax.set_title(note, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _draw_sweep(ax, table: ResultTable, config: dict):
    axes = list(config["sweep"]) or ["n"]
    primary = axes[0]
    x_idx = table.columns.index(primary)
    est_idx = table.columns.index("estimate")
    err_idx = table.columns.index("stderr")
    exact_idx = table.columns.index("exact") if "exact" in table.columns else None
    mf_idx = table.columns.index("meanfield") if "meanfield" in table.columns else None
    for label, rows in _series_groups(table, axes):
        x = [r[x_idx] for r in rows]
        ax.errorbar(
            x,
            [r[est_idx] for r in rows],
            yerr=[r[err_idx] for r in rows],
            fmt="o",
            capsize=3,
            label=("simulation" if label is None else f"simulation, {label}"),
        )
        if exact_idx is not None:
            ax.plot(
                x,
                [r[exact_idx] for r in rows],
                "-",
                alpha=0.7,
                label=("exact" if label is None else f"exact, {label}"),
            )
    if mf_idx is not None:
        x = [r[x_idx] for r in table.rows]
        ax.plot(x, [r[mf_idx] for r in table.rows], "--", label="mean-field estimate")
    if primary == "n":
        ax.set_xscale("log")
    ax.set_xlabel(primary)
    ax.set_ylabel(_Y_LABELS.get(config["measure"], config["measure"]))
    ax.legend(fontsize=8)


def _draw_trajectory(ax, table: ResultTable):
    t = _column(table, "t")
    x = _column(table, "x")
    ax.step(t, x, where="post", linewidth=0.7)
    ax.set_xlabel("time")
    ax.set_ylabel("opinion-1 fraction")
    ax.set_ylim(-0.02, 1.02)


def _draw_equilibrium(ax, table: ResultTable, config: dict):
    axes = list(config["sweep"])
    primary = axes[0] if axes else "gamma1"
    x_idx = table.columns.index(primary)
    lo_idx = table.columns.index("stable_low")
    hi_idx = table.columns.index("stable_high")
    for label, rows in _series_groups(table, axes):
        x = [r[x_idx] for r in rows]
        lo = [r[lo_idx] for r in rows]
        hi = [r[hi_idx] for r in rows]
        lines = ax.plot(x, lo, "o-", label=("stable" if label is None else label))
        pairs = [(xi, h) for xi, l, h in zip(x, lo, hi) if not math.isclose(l, h)]
        if pairs:  # second stable branch where bistable
            ax.plot(*zip(*pairs), "s--", color=lines[0].get_color(), alpha=0.7)
    ax.set_xlabel(primary)
    ax.set_ylabel("equilibrium opinion-1 fraction (non-stubborn)")
    ax.set_ylim(0, 1)
    ax.legend(fontsize=8)
