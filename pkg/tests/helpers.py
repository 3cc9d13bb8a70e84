import numpy as np

from elliptic_canon.system_model import SystemSpec, ellipticity_info


def rand_transform(rng, cond_max=100.0, positive_det=False):
    """Random 2x2 matrix, entries in [-5, 5], condition number at most cond_max."""
    while True:
        m = rng.uniform(-5.0, 5.0, (2, 2))
        if np.linalg.cond(m) <= cond_max and (not positive_det or np.linalg.det(m) > 0):
            return m


def rand_elliptic(rng, min_margin=1e-4):
    """Random system with entries in [-1, 1] that is elliptic with some margin."""
    while True:
        spec = SystemSpec(*rng.uniform(-1.0, 1.0, (3, 2, 2)))
        if ellipticity_info(spec).margin > min_margin:
            return spec


def root_set_distance(a, b):
    """Max distance after greedy matching of two small complex multisets."""
    a, b = list(a), list(b)
    worst = 0.0
    for z in a:
        k = int(np.argmin([abs(z - w) for w in b]))
        worst = max(worst, abs(z - b[k]))
        b.pop(k)
    return worst
