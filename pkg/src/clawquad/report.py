"""Mass and inertia consistency report, as text, delimited rows and figures.

The shipped model carries the robot's aggregate masses and the leg moments
of inertia for both leg variants.  This module checks the mass budget
(body + 2 plain legs + 2 gripper legs = total), reports the MoI increase the
gripper hardware costs, and can render the same numbers as figures next to
the delimited output.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .kinematics import MoiReport, RobotModel, moi_report

MASS_TOLERANCE_G = 0.1


def mass_budget_ok(model: RobotModel, tolerance_g: float = MASS_TOLERANCE_G) -> bool:
    return model.mass_identity_error_g() <= tolerance_g


def report_rows(model: RobotModel) -> list[tuple[str, str, str]]:
    """(property, value, unit) rows for the delimited report."""
    moi = moi_report(model)
    derived = (model.body.mass_g + 2.0 * model.leg.mass_plain_g
               + 2.0 * model.leg.mass_dactylus_g)
    return [
        ("body_mass", f"{model.body.mass_g:.1f}", "g"),
        ("leg_mass_plain", f"{model.leg.mass_plain_g:.1f}", "g"),
        ("leg_mass_dactylus", f"{model.leg.mass_dactylus_g:.1f}", "g"),
        ("total_mass_declared", f"{model.total_mass_g:.1f}", "g"),
        ("total_mass_derived", f"{derived:.1f}", "g"),
        ("mass_identity_error", f"{model.mass_identity_error_g():.4f}", "g"),
        ("moi_sagittal_plain", f"{moi.sagittal_plain:.3e}", "g_mm2"),
        ("moi_sagittal_dactylus", f"{moi.sagittal_dactylus:.3e}", "g_mm2"),
        ("moi_coronal_plain", f"{moi.coronal_plain:.3e}", "g_mm2"),
        ("moi_coronal_dactylus", f"{moi.coronal_dactylus:.3e}", "g_mm2"),
        ("moi_increase_sagittal", f"{moi.sagittal_increase * 100.0:.1f}", "percent"),
        ("moi_increase_coronal", f"{moi.coronal_increase * 100.0:.1f}", "percent"),
        ("moi_increase_mean", f"{moi.mean_increase * 100.0:.1f}", "percent"),
    ]


def format_report(model: RobotModel) -> str:
    moi = moi_report(model)
    err = model.mass_identity_error_g()
    verdict = "OK" if mass_budget_ok(model) else f"VIOLATED by {err:.2f} g"
    lines = [
        "mass budget",
        f"  body {model.body.mass_g:.1f} g + 2 x {model.leg.mass_plain_g:.1f} g "
        f"+ 2 x {model.leg.mass_dactylus_g:.1f} g = "
        f"{model.body.mass_g + 2 * model.leg.mass_plain_g + 2 * model.leg.mass_dactylus_g:.1f} g",
        f"  declared total {model.total_mass_g:.1f} g -> {verdict}",
        "leg moment of inertia (fully extended, about the proximal motor axes)",
        f"  sagittal {moi.sagittal_plain:.2e} -> {moi.sagittal_dactylus:.2e} g mm^2 "
        f"(+{moi.sagittal_increase * 100.0:.1f}%)",
        f"  coronal  {moi.coronal_plain:.2e} -> {moi.coronal_dactylus:.2e} g mm^2 "
        f"(+{moi.coronal_increase * 100.0:.1f}%)",
        f"  mean increase from gripper hardware: {moi.mean_increase * 100.0:.1f}%",
    ]
    return "\n".join(lines) + "\n"


def write_report_csv(model: RobotModel, stream) -> None:
    stream.write("property,value,unit\n")
    for name, value, unit in report_rows(model):
        stream.write(f"{name},{value},{unit}\n")


def render_report_figures(model: RobotModel, outdir: str) -> list[str]:
    """Render the mass budget and MoI comparison to PNG files; returns paths."""
    os.makedirs(outdir, exist_ok=True)
    moi = moi_report(model)
    paths = []

    fig, ax = plt.subplots(figsize=(5.5, 3.4))
    parts = ["body", "2 x plain leg", "2 x gripper leg"]
    masses = [model.body.mass_g, 2 * model.leg.mass_plain_g, 2 * model.leg.mass_dactylus_g]
    bars = ax.bar(parts, masses, color=["#777777", "#4a7fb5", "#b5574a"])
    ax.bar_label(bars, fmt="%.1f g")
    ax.axhline(model.total_mass_g, color="k", linestyle=":", linewidth=1)
    ax.text(0.02, model.total_mass_g, f"declared total {model.total_mass_g:.1f} g",
            va="bottom", fontsize=8, transform=ax.get_yaxis_transform())
    ax.set_ylabel("mass [g]")
    ax.set_title("Mass budget")
    fig.tight_layout()
    path = os.path.join(outdir, "mass_budget.png")
    fig.savefig(path, dpi=130)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(5.5, 3.4))
    x = np.arange(2)
    width = 0.38
    plain = [moi.sagittal_plain, moi.coronal_plain]
    dact = [moi.sagittal_dactylus, moi.coronal_dactylus]
    ax.bar(x - width / 2, plain, width, label="plain leg", color="#4a7fb5")
    ax.bar(x + width / 2, dact, width, label="gripper leg", color="#b5574a")
    for i, (lo, hi) in enumerate(zip(plain, dact)):
        ax.text(i + width / 2, hi, f"+{(hi / lo - 1) * 100:.0f}%",
                ha="center", va="bottom", fontsize=9)
    ax.set_xticks(x, ["sagittal", "coronal"])
    ax.set_ylabel("MoI [g mm$^2$]")
    ax.set_title(f"Leg MoI, mean increase {moi.mean_increase * 100.0:.1f}%")
    ax.legend()
    fig.tight_layout()
    path = os.path.join(outdir, "moi_comparison.png")
    fig.savefig(path, dpi=130)
    plt.close(fig)
    paths.append(path)
    return paths


def render_profile_figure(times, positions, path: str, title: str = "joint trajectory") -> str:
    """Four-panel position / velocity / acceleration / jerk figure for one or
    more sampled joints, derivatives by finite differences."""
    times = np.asarray(times, dtype=float)
    rows = np.atleast_2d(np.asarray(positions, dtype=float))
    fig, axes = plt.subplots(4, 1, figsize=(6.4, 7.2), sharex=True)
    labels = ["position [rad]", "velocity [rad/s]", "acceleration [rad/s$^2$]",
              "jerk [rad/s$^3$]"]
    for i, row in enumerate(rows):
        series, t = row, times
        for ax in axes:
            label = f"q{i}" if ax is axes[0] and len(rows) > 1 else None
            ax.plot(t, series, linewidth=1.0, label=label)
            if len(t) < 2:
                break
            series = np.diff(series) / np.diff(t)
            t = 0.5 * (t[1:] + t[:-1])
    for ax, label in zip(axes, labels):
        ax.set_ylabel(label)
    axes[-1].set_xlabel("time [s]")
    axes[0].set_title(title)
    if len(rows) > 1:
        axes[0].legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
