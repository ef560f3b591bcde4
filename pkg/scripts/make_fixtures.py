"""Regenerate the packaged CSV fixtures in src/vecopt/data/.

Disk brake and vehicle safety rows are the closed-form engineering models
evaluated on a scrambled Sobol sample (seed 0, 128 points). Objective
columns are raw minimization values; ``vecopt.problems.DATASETS`` flags them
for negation on load.

    python scripts/make_fixtures.py
"""

import csv
from pathlib import Path

import numpy as np
from scipy.stats import qmc

OUT = Path(__file__).resolve().parents[1] / "src" / "vecopt" / "data"
N_POINTS = 128


def sobol(lower, upper, n=N_POINTS, seed=0):
    s = qmc.Sobol(d=len(lower), scramble=True, seed=seed).random(n)
    return qmc.scale(s, lower, upper)


def disk_brake(x):
    x1, x2, x3, x4 = x.T
    a2 = x2**2 - x1**2
    a3 = x2**3 - x1**3
    mass = 4.9e-5 * a2 * (x4 - 1.0)
    stop = 9.82e6 * a2 / (x3 * x4 * a3)
    g = np.column_stack([
        (x2 - x1) - 20.0,
        0.4 - x3 / (3.14 * a2),
        1.0 - 2.22e-3 * x3 * a3 / a2**2,
        2.66e-2 * x3 * x4 * a3 / a2 - 900.0,
    ])
    viol = np.sum(np.maximum(-g, 0.0), axis=1)
    return np.column_stack([mass, stop, viol])


def vehicle_safety(x):
    x1, x2, x3, x4, x5 = x.T
    mass = 1640.2823 + 2.3573285 * x1 + 2.3220035 * x2 + 4.5688768 * x3 + 7.7213633 * x4 + 4.4559504 * x5
    accel = (
        6.5856 + 1.15 * x1 - 1.0427 * x2 + 0.9738 * x3 + 0.8364 * x4
        - 0.3695 * x1 * x4 + 0.0861 * x1 * x5 + 0.3628 * x2 * x4
        - 0.1106 * x1**2 - 0.3437 * x3**2 + 0.1764 * x4**2
    )
    intrusion = (
        -0.0551 + 0.0181 * x1 + 0.1024 * x2 + 0.0421 * x3
        - 0.0073 * x1 * x2 + 0.024 * x2 * x3 - 0.0118 * x2 * x4
        - 0.0204 * x3 * x4 - 0.008 * x3 * x5 - 0.0241 * x2**2 + 0.0109 * x4**2
    )
    return np.column_stack([mass, accel, intrusion])


def write(name, header, X, Y):
    with open(OUT / name, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for x, y in zip(X, Y):
            w.writerow([repr(float(v)) for v in (*x, *y)])


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    write("toy3.csv", ["x", "f1", "f2"], np.array([[0.0], [1.0], [2.0]]), np.array([[1.0, 2.0], [2.0, 1.0], [0.0, 0.0]]))
    X = sobol([55.0, 75.0, 1000.0, 11.0], [80.0, 110.0, 3000.0, 20.0])
    write("disk_brake.csv", ["x1", "x2", "x3", "x4", "mass", "stopping_time", "constraint_violation"], X, disk_brake(X))
    X = sobol([1.0] * 5, [3.0] * 5)
    write(
        "vehicle_safety.csv",
        ["x1", "x2", "x3", "x4", "x5", "mass", "acceleration", "toe_board_intrusion"],
        X,
        vehicle_safety(X),
    )


if __name__ == "__main__":
    main()
