"""Shared fixtures-in-spirit: hand-built channels and independent oracles."""

import numpy as np

from qchanlab.channels import Channel


def amplitude_damping(gamma: float) -> Channel:
    """Non-unital reference channel, built by hand (independent of generators)."""
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=np.complex128)
    k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=np.complex128)
    return Channel(dim_in=2, dim_out=2, kraus=np.stack([k0, k1]), label=f"amp:{gamma}")


def numeric_gradient(f, x: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a real function of a complex array.

    Convention: df = Re <grad, dx> over independent real/imag coordinates,
    matching the analytic gradients the solvers descend.
    """
    grad = np.zeros(x.size, dtype=np.complex128)
    flat = x.reshape(-1)
    for a in range(flat.size):
        for unit in (1.0, 1j):
            plus = flat.copy()
            minus = flat.copy()
            plus[a] += step * unit
            minus[a] -= step * unit
            diff = (f(plus.reshape(x.shape)) - f(minus.reshape(x.shape))) / (2 * step)
            grad[a] += diff if unit == 1.0 else 1j * diff
    return grad.reshape(x.shape)


def rel_error(a: np.ndarray, b: np.ndarray) -> float:
    denom = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-30)
    return float(np.max(np.abs(a - b)) / denom)
