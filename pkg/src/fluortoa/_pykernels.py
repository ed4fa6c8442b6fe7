"""Pure numpy versions of the stepper inner loops.

Used when the compiled extension is unavailable or when
``FLUORTOA_PURE_PYTHON`` is set. Same signatures and in-place semantics as
the Cython module.
"""

import numpy as np


def apply_potential(psi, a11, a12, a22):
    g = psi[0].copy()
    e = psi[1]
    psi[0] *= a11
    psi[0] += a12 * e
    e *= a22
    e += a12 * g


def apply_phase(psi, phase):
    psi *= phase


def populations(psi):
    dens = psi.real**2 + psi.imag**2
    se = float(np.sum(dens[1]))
    return float(np.sum(dens[0])) + se, se


def edge_density(psi, width):
    n = psi.shape[1]
    width = min(int(width), n)
    edges = np.concatenate((psi[:, :width], psi[:, n - width:]), axis=1)
    return float(np.max(np.sum(edges.real**2 + edges.imag**2, axis=0)))
