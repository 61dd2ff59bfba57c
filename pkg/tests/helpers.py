"""CSV builders shared by the I/O, CLI and acceptance tests."""

import csv

import numpy as np

R = float(np.sqrt(0.5))
# two centred groups whose Grams are diag(2, 1) and [[1.5, .5], [.5, 1.5]]
ROT_ROWS = [("a", 1.0, 0.0), ("a", -1.0, 0.0), ("a", 0.0, R), ("a", 0.0, -R),
            ("b", R, R), ("b", -R, -R), ("b", 0.5, -0.5), ("b", -0.5, 0.5)]


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return path


def rotated_csv(path):
    return write_rows(path, ["grp", "x", "y"], ROT_ROWS)


def heart_like_csv(path, seed=0, sizes=(201, 96), n=13):
    rng = np.random.default_rng(seed)
    rows = []
    for lab, m in zip(("1", "0"), sizes):
        X = rng.standard_normal((m, n)) * rng.uniform(0.5, 3.0, n) + rng.uniform(-2, 2, n)
        rows += [(lab,) + tuple(float(x) for x in row) for row in X]
    order = rng.permutation(len(rows))
    return write_rows(path, ["sex"] + [f"f{j}" for j in range(n)], [rows[i] for i in order])


def gaussian_groups_csv(path, seed, k=3, m=50, n=10):
    rng = np.random.default_rng(seed)
    rows = []
    for g in range(k):
        X = rng.standard_normal((m, n))
        rows += [(f"g{g}",) + tuple(float(x) for x in row) for row in X]
    return write_rows(path, ["group"] + [f"x{j}" for j in range(n)], rows)
