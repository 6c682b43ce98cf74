"""Serialization of simulation reports: CSV time series, figures, plot scripts.

Floats are written with 17 significant digits so re-reading a CSV reproduces
the in-memory values exactly. Figures can be rendered directly to PNG or
emitted as standalone matplotlib scripts that read the CSVs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig, serialize_config
from .simulation import SimulationReport

PHASE1_COLUMNS = ["t", "ximp1", "ximp2", "xdimp1", "xdimp2", "fh1", "fh2", "u1", "u2"]
REFERENCE_COLUMNS = ["t", "qd1", "qd2", "qdd1", "qdd2"]
TRACKING_COLUMNS = ["t", "q1", "q2", "qd1", "qd2", "e1", "e2", "ec1", "ec2",
                    "tau1", "tau2", "kR"]
METRICS_COLUMNS = ["key", "value"]

FIGURES = {
    1: ("xy_path", "End-effector path in the XY plane"),
    2: ("cartesian_vs_time", "Planned Cartesian positions over time"),
    3: ("interaction_force", "Human interaction force over time"),
    4: ("joint1_tracking", "Joint 1 reference vs actual"),
    5: ("joint2_tracking", "Joint 2 reference vs actual"),
    6: ("commutative_error", "Mixed tracking errors over time"),
}


@dataclass
class OutputBundle:
    """Paths of everything one run wrote."""

    directory: str
    phase1_csv: str
    reference_csv: str
    tracking_csv: str
    metrics_csv: str
    config_yaml: str
    figures: list = field(default_factory=list)
    scripts: list = field(default_factory=list)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path: str, columns, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fp:
        fp.write(",".join(columns) + "\n")
        for row in rows:
            fp.write(",".join(row) + "\n")


def _read_csv(path: str, expected_columns):
    with open(path, "r", encoding="utf-8") as fp:
        header = fp.readline().strip().split(",")
        if header != expected_columns:
            raise ValueError(f"{path}: unexpected columns {header}")
        data = [line.strip().split(",") for line in fp if line.strip()]
    return data


def write_table_csv(path: str, columns, arrays) -> None:
    """Write named float columns (all the same length) as one CSV file."""
    n = len(arrays[0]) if arrays else 0
    rows = ([_fmt(col[k]) for col in arrays] for k in range(n))
    _write_csv(path, columns, rows)


def write_phase1_csv(path: str, grid, x_imp, xd_imp, f_h, u) -> None:
    write_table_csv(path, PHASE1_COLUMNS,
                    [grid, x_imp[:, 0], x_imp[:, 1], xd_imp[:, 0], xd_imp[:, 1],
                     f_h[:, 0], f_h[:, 1], u[:, 0], u[:, 1]])


def write_reference_csv(path: str, grid, q_d, qd_d) -> None:
    write_table_csv(path, REFERENCE_COLUMNS,
                    [grid, q_d[:, 0], q_d[:, 1], qd_d[:, 0], qd_d[:, 1]])


def write_tracking_csv(path: str, record) -> None:
    write_table_csv(path, TRACKING_COLUMNS,
                    [record.grid, record.q[:, 0], record.q[:, 1],
                     record.q_d[:, 0], record.q_d[:, 1],
                     record.e[:, 0], record.e[:, 1],
                     record.e_c[:, 0], record.e_c[:, 1],
                     record.tau[:, 0], record.tau[:, 1], record.k_R])


def write_metrics_csv(path: str, metrics: dict) -> None:
    _write_csv(path, METRICS_COLUMNS,
               ([key, _fmt(value)] for key, value in metrics.items()))


def write_config_echo(path: str, config: ScenarioConfig) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fp:
        fp.write(serialize_config(config))


def write_timeseries(report: SimulationReport, directory) -> OutputBundle:
    """Write the four CSV files plus the resolved configuration echo."""
    directory = str(directory)
    os.makedirs(directory, exist_ok=True)
    p1 = report.phase1

    phase1_path = os.path.join(directory, "phase1_state.csv")
    write_phase1_csv(phase1_path, p1.trajectory.grid, p1.x_imp, p1.xd_imp,
                     p1.f_h, p1.trajectory.u)
    reference_path = os.path.join(directory, "reference.csv")
    write_reference_csv(reference_path, report.reference.grid,
                        report.reference.q_d, report.reference.qd_d)
    tracking_path = os.path.join(directory, "tracking.csv")
    write_tracking_csv(tracking_path, report.tracking)
    metrics_path = os.path.join(directory, "metrics.csv")
    write_metrics_csv(metrics_path, report.metrics)
    config_path = os.path.join(directory, "config_resolved.yaml")
    write_config_echo(config_path, report.config)

    return OutputBundle(directory, phase1_path, reference_path, tracking_path,
                        metrics_path, config_path)


def _read_float_table(path: str, columns) -> np.ndarray:
    rows = _read_csv(path, columns)
    if not rows:
        return np.empty((0, len(columns)))
    return np.array(rows, dtype=float)


def read_phase1_csv(path: str):
    """(grid, x_imp, xd_imp, f_h, u) exactly as written."""
    data = _read_float_table(path, PHASE1_COLUMNS)
    return (data[:, 0], data[:, 1:3], data[:, 3:5], data[:, 5:7], data[:, 7:9])


def read_reference_csv(path: str):
    """(grid, q_d, qd_d) exactly as written."""
    data = _read_float_table(path, REFERENCE_COLUMNS)
    return (data[:, 0], data[:, 1:3], data[:, 3:5])


def read_tracking_csv(path: str):
    """Column-name -> array mapping of the tracking series."""
    data = _read_float_table(path, TRACKING_COLUMNS)
    return {name: data[:, i] for i, name in enumerate(TRACKING_COLUMNS)}


def read_metrics_csv(path: str) -> dict:
    return {key: float(value) for key, value in _read_csv(path, METRICS_COLUMNS)}


def _figure_recipe(figure: int):
    """(csv filename, plot commands) for one figure index."""
    if figure == 1:
        return "phase1_state.csv", [
            "ax.plot(d['ximp1'], d['ximp2'])",
            "ax.plot(d['ximp1'][:1], d['ximp2'][:1], 'o', label='start')",
            "ax.plot(d['ximp1'][-1:], d['ximp2'][-1:], 's', label='goal')",
            "ax.set_xlabel('x (m)'); ax.set_ylabel('y (m)')",
            "ax.legend(); ax.set_aspect('equal', adjustable='datalim')",
        ]
    if figure == 2:
        return "phase1_state.csv", [
            "ax.plot(d['t'], d['ximp1'], label='x')",
            "ax.plot(d['t'], d['ximp2'], label='y')",
            "ax.set_xlabel('t (s)'); ax.set_ylabel('position (m)')",
            "ax.legend()",
        ]
    if figure == 3:
        return "phase1_state.csv", [
            "ax.plot(d['t'], d['fh1'], label='f_h x')",
            "ax.plot(d['t'], d['fh2'], label='f_h y')",
            "ax.set_xlabel('t (s)'); ax.set_ylabel('force (N)')",
            "ax.legend()",
        ]
    if figure in (4, 5):
        j = figure - 3
        return "tracking.csv", [
            f"ax.plot(d['t'], d['qd{j}'], '--', label='reference')",
            f"ax.plot(d['t'], d['q{j}'], label='actual')",
            f"ax.set_xlabel('t (s)'); ax.set_ylabel('joint {j} angle (rad)')",
            "ax.legend()",
        ]
    if figure == 6:
        return "tracking.csv", [
            "ax.plot(d['t'], d['ec1'], label='e_c joint 1')",
            "ax.plot(d['t'], d['ec2'], label='e_c joint 2')",
            "ax.set_xlabel('t (s)'); ax.set_ylabel('mixed error')",
            "ax.legend()",
        ]
    raise ValueError(f"unknown figure index {figure} (expected 1..6)")


def emit_plot_script(directory, figure: int) -> str:
    """Write a standalone script that renders one figure from the CSVs."""
    csv_name, commands = _figure_recipe(figure)
    slug, title = FIGURES[figure]
    body = "\n".join(commands)
    script = f"""#!/usr/bin/env python3
# {title}; reads {csv_name} from the directory this script lives in.
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

here = os.path.dirname(os.path.abspath(__file__))
d = np.genfromtxt(os.path.join(here, {csv_name!r}), delimiter=",", names=True)
fig, ax = plt.subplots(figsize=(6, 4))
{body}
ax.set_title({title!r})
fig.tight_layout()
fig.savefig(os.path.join(here, "figure{figure}_{slug}.png"), dpi=150)
print("wrote figure{figure}_{slug}.png")
"""
    path = os.path.join(str(directory), f"figure{figure}_{slug}.py")
    with open(path, "w", encoding="utf-8", newline="\n") as fp:
        fp.write(script)
    return path


def render_figure(directory, figure: int) -> str:
    """Render one figure straight to PNG next to the CSVs."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    csv_name, commands = _figure_recipe(figure)
    slug, title = FIGURES[figure]
    d = np.genfromtxt(os.path.join(str(directory), csv_name),
                      delimiter=",", names=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    for command in commands:
        exec(command, {"ax": ax, "d": d})  # recipes are package-internal literals
    ax.set_title(title)
    fig.tight_layout()
    path = os.path.join(str(directory), f"figure{figure}_{slug}.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def emit_all_figures(bundle: OutputBundle, figures=None, render: bool = True,
                     scripts: bool = True) -> OutputBundle:
    """Write plot scripts and/or rendered PNGs for the requested figures."""
    for figure in figures or sorted(FIGURES):
        if scripts:
            bundle.scripts.append(emit_plot_script(bundle.directory, figure))
        if render:
            bundle.figures.append(render_figure(bundle.directory, figure))
    return bundle
