"""Dense complex-matrix operations: entropy, Schatten norms, tensor products,
partial traces, and the shared matrix JSON encoding.

Matrices are plain complex128 numpy arrays. Logarithms are natural (nats)
throughout; :func:`nats_to_bits` converts for report display only.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .errors import DomainError, ValidationError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
EIG_CLAMP = 1e-10  # eigenvalues in [-EIG_CLAMP, 0) count as float noise
UNIT_NORM_TOL = 1e-12

LN2 = math.log(2.0)


def nats_to_bits(value: float) -> float:
    """Convert an entropy from nats to bits (display only)."""
    return value / LN2


def max_abs(a: np.ndarray) -> float:
    """Entrywise sup-norm, the residual measure used everywhere."""
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a)))


def hermiticity_residual(a: np.ndarray) -> float:
    return max_abs(a - a.conj().T)


def check_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"matrix must be square, got shape {a.shape}")
    res = hermiticity_residual(a)
    if res > tol:
        raise ValidationError("matrix is not Hermitian", res)


def check_density_matrix(rho: np.ndarray, tol_trace: float = TRACE_TOL) -> None:
    """Raise ValidationError unless rho is Hermitian, unit-trace, and positive
    up to the eigenvalue clamp."""
    check_hermitian(rho)
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > tol_trace:
        raise ValidationError("density matrix trace must be 1", abs(tr - 1.0))
    lo = float(np.linalg.eigvalsh(rho)[0])
    if lo < -EIG_CLAMP:
        raise ValidationError("density matrix has a negative eigenvalue", -lo)


def check_pure_state(psi: np.ndarray, tol: float = UNIT_NORM_TOL) -> None:
    if psi.ndim != 1:
        raise ValidationError(f"state vector must be 1-d, got shape {psi.shape}")
    res = abs(float(np.linalg.norm(psi)) - 1.0)
    if res > tol:
        raise ValidationError("state vector must have unit norm", res)


def projector(psi: np.ndarray) -> np.ndarray:
    """Rank-one density matrix |psi><psi|."""
    v = np.asarray(psi, dtype=np.complex128)
    return np.outer(v, v.conj())


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128) / dim


def _clamped_eigenvalues(a: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian PSD matrix with float noise clamped to 0.

    Values in [-EIG_CLAMP, 0) are rounded up; anything more negative is a
    genuinely invalid state and raises.
    """
    w = np.linalg.eigvalsh(a)
    if w[0] < -EIG_CLAMP:
        raise ValidationError("matrix has a negative eigenvalue", float(-w[0]))
    return np.clip(w, 0.0, None)


def von_neumann_entropy(rho: np.ndarray, validate: bool = True) -> float:
    """Von Neumann entropy -tr[rho ln rho] in nats.

    Eigenvalues are clamped to [0, 1] before evaluation; the result lies in
    [0, ln dim].
    """
    rho = np.asarray(rho, dtype=np.complex128)
    if validate:
        check_density_matrix(rho)
    w = np.clip(_clamped_eigenvalues(rho), 0.0, 1.0)
    return _kernels.entropy_from_eigs(w)


def schatten_norm(a: np.ndarray, p: float) -> float:
    """Schatten p-norm (tr |a|^p)^(1/p) of a Hermitian PSD matrix.

    p = math.inf is the distinguished operator-norm value; p < 1 is out of
    domain.
    """
    if p != math.inf and p < 1.0:
        raise DomainError(f"Schatten norm requires p >= 1, got {p}")
    a = np.asarray(a, dtype=np.complex128)
    check_hermitian(a)
    w = _clamped_eigenvalues(a)
    if p == math.inf:
        return float(w[-1])
    if p == 1.0:
        return float(np.sum(w))
    return float(np.sum(w**p) ** (1.0 / p))


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the (i1 i2, j1 j2) -> a[i1,j1] b[i2,j2] convention."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def partial_trace(rho: np.ndarray, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Reduced state of a bipartite density matrix.

    dims = (dim of first factor, dim of second factor); keep selects the
    factor that survives (0 = first, 1 = second).
    """
    da, db = dims
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (da * db, da * db):
        raise ValidationError(
            f"partial trace dims {dims} do not match matrix shape {rho.shape}"
        )
    if keep not in (0, 1):
        raise DomainError(f"keep must be 0 or 1, got {keep}")
    r = rho.reshape(da, db, da, db)
    if keep == 0:
        return np.trace(r, axis1=1, axis2=3)
    return np.trace(r, axis1=0, axis2=2)


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unit vector (Gaussian components, normalized)."""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return (v / np.linalg.norm(v)).astype(np.complex128)


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random mixed state G G^dag / tr from a complex Gaussian factor."""
    if rank is None:
        rank = dim
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return (rho / np.trace(rho).real).astype(np.complex128)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return ((g + g.conj().T) / 2).astype(np.complex128)


def matrix_to_json(a: np.ndarray) -> dict:
    """Shared wire format: {"rows", "cols", "data": [[re, im], ...]} row-major."""
    a = np.asarray(a, dtype=np.complex128)
    rows, cols = a.shape
    flat = a.reshape(-1)
    return {
        "rows": int(rows),
        "cols": int(cols),
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows = int(obj["rows"])
        cols = int(obj["cols"])
        data = obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed matrix JSON: missing field {exc}") from exc
    if len(data) != rows * cols:
        raise ValidationError(
            f"matrix JSON length {len(data)} != rows*cols = {rows * cols}"
        )
    out = np.empty(rows * cols, dtype=np.complex128)
    for i, pair in enumerate(data):
        out[i] = complex(pair[0], pair[1])
    return out.reshape(rows, cols)
