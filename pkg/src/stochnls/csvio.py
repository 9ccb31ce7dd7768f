"""CSV and manifest persistence.

All numeric fields are written with 17 significant digits, enough for an
IEEE double to round-trip bit-exactly, with '.' as the decimal separator
regardless of locale. Line endings are fixed to "\\n" so identical runs
produce byte-identical files on every platform.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .experiments import ConvergenceReport, EnsembleStats
from .gridcore import GridSpec, StateVector
from .observables import ObservableSeries


def fmt(value: float) -> str:
    """17-significant-digit decimal form (round-trip exact for doubles)."""
    return format(float(value), ".17g")


def write_state_csv(path: str | Path, u: StateVector, grid: GridSpec) -> None:
    """Rows ``j,x,re,im`` over the interior nodes."""
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (grid.n_interior,):
        raise ValueError(f"state length {u.shape} does not match grid {grid.n_interior}")
    x = grid.interior_nodes()
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["j", "x", "re", "im"])
        for j in range(grid.n_interior):
            writer.writerow([j + 1, fmt(x[j]), fmt(u[j].real), fmt(u[j].imag)])


def read_state_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of write_state_csv; returns (values, node coordinates)."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header != ["j", "x", "re", "im"]:
            raise ValueError(f"{path}: unexpected header {header}")
        xs, values = [], []
        for row in reader:
            xs.append(float(row[1]))
            values.append(complex(float(row[2]), float(row[3])))
    return np.array(values, dtype=np.complex128), np.array(xs)


def write_observables_csv(path: str | Path, series: ObservableSeries, tau: float) -> None:
    """Rows ``n,t,charge,energy,charge_resid,energy_resid`` per recorded state."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["n", "t", "charge", "energy", "charge_resid", "energy_resid"])
        for i, t in enumerate(series.times):
            writer.writerow(
                [
                    int(round(t / tau)),
                    fmt(t),
                    fmt(series.charge[i]),
                    fmt(series.energy[i]),
                    fmt(series.charge_residual[i]),
                    fmt(series.energy_residual[i]),
                ]
            )


def write_ensemble_csv(path: str | Path, stats: EnsembleStats) -> None:
    """Rows ``t,mean_charge,se_charge,mean_energy,se_energy``."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["t", "mean_charge", "se_charge", "mean_energy", "se_energy"])
        for i in range(len(stats.times)):
            writer.writerow(
                [
                    fmt(stats.times[i]),
                    fmt(stats.mean_charge[i]),
                    fmt(stats.se_charge[i]),
                    fmt(stats.mean_energy[i]),
                    fmt(stats.se_energy[i]),
                ]
            )


def write_convergence_csv(path: str | Path, report: ConvergenceReport) -> None:
    """Rows ``tau,rms_error,se,log2_tau,log2_err`` per tested step size."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["tau", "rms_error", "se", "log2_tau", "log2_err"])
        for i in range(len(report.taus)):
            writer.writerow(
                [
                    fmt(report.taus[i]),
                    fmt(report.errors[i]),
                    fmt(report.std_errors[i]),
                    fmt(np.log2(report.taus[i])),
                    fmt(np.log2(report.errors[i])),
                ]
            )


def read_convergence_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Columns of a convergence CSV as arrays keyed by header name."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        rows = [[float(cell) for cell in row] for row in reader]
    data = np.array(rows)
    return {name: data[:, i] for i, name in enumerate(header)}


def write_manifest(path: str | Path, entries: dict[str, str]) -> None:
    """Plain ``key: value`` lines describing a finished run."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        for key, value in entries.items():
            handle.write(f"{key}: {value}\n")
