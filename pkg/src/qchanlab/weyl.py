"""Discrete shift/clock unitaries W_z = U^x V^y on a d-dimensional space.

Conjugating by all d^2 of them and averaging sends every state to the
maximally mixed state; that complete-noise identity is what the channel
extensions are built on. The index convention z = (x, y) -> x*d + y is
normative for every serialized Kraus ordering in the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .linalg import maximally_mixed

INDEX_CONVENTION = "z=(x,y)->x*d+y"


@dataclass(frozen=True)
class WeylSystem:
    """All d^2 operators W_z, plus the generating shift U and clock V.

    ops[x*d + y] = U^x V^y. Arrays are read-only after construction.
    """

    dim: int
    shift: np.ndarray
    clock: np.ndarray
    ops: np.ndarray  # (d*d, d, d)

    def op(self, z: tuple[int, int] | int) -> np.ndarray:
        return self.ops[flat_index(z, self.dim)]


def flat_index(z: tuple[int, int] | int, d: int) -> int:
    """Normalize a group element (x, y) or flat integer to x*d + y."""
    if isinstance(z, (int, np.integer)):
        idx = int(z)
        if not 0 <= idx < d * d:
            raise DomainError(f"index {idx} out of range for d={d}")
        return idx
    x, y = z
    if not (0 <= x < d and 0 <= y < d):
        raise DomainError(f"group element {z} out of range for d={d}")
    return int(x) * d + int(y)


def build_weyl(d: int) -> WeylSystem:
    """Construct the full system on dimension d in the computational basis."""
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    shift = np.zeros((d, d), dtype=np.complex128)
    for k in range(d):
        shift[(k + 1) % d, k] = 1.0
    phases = np.exp(2j * np.pi * np.arange(d) / d)
    clock = np.diag(phases).astype(np.complex128)
    ops = np.empty((d * d, d, d), dtype=np.complex128)
    u_pow = np.eye(d, dtype=np.complex128)
    for x in range(d):
        v_pow = np.eye(d, dtype=np.complex128)
        for y in range(d):
            ops[x * d + y] = u_pow @ v_pow
            v_pow = v_pow @ clock
        u_pow = u_pow @ shift
    for arr in (shift, clock, ops):
        arr.setflags(write=False)
    return WeylSystem(dim=d, shift=shift, clock=clock, ops=ops)


def twirl(ws: WeylSystem, rho: np.ndarray) -> np.ndarray:
    """(1/d^2) sum_z W_z rho W_z^dag; equals the maximally mixed state for
    every valid input."""
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (ws.dim, ws.dim):
        raise ValidationError(
            f"state shape {rho.shape} does not match system dimension {ws.dim}"
        )
    d = ws.dim
    out = np.zeros((d, d), dtype=np.complex128)
    for z in range(d * d):
        w = ws.ops[z]
        out += w @ rho @ w.conj().T
    return out / (d * d)


def complete_noise_residual(ws: WeylSystem, rho: np.ndarray) -> float:
    """Sup-norm distance of the twirled state from the maximally mixed state."""
    return float(np.max(np.abs(twirl(ws, rho) - maximally_mixed(ws.dim))))
