"""Kraus-form CPTP maps: construction, validation, application, tensor
products, and generators for random and named channel families.

A Channel only enforces shape at construction so that deliberately broken
instances can still be inspected; trace preservation is certified by
:func:`validate` and re-checked whenever a channel is loaded from disk.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, ValidationError
from .linalg import (
    matrix_from_json,
    matrix_to_json,
    max_abs,
    maximally_mixed,
)

TP_TOL = 1e-10
UNITAL_TOL = 1e-10
CHOI_TOL = 1e-10

KIND_GENERAL = "general"
KIND_BISTOCHASTIC = "bistochastic"
KIND_UNITAL = "unital"


@dataclass(frozen=True)
class Channel:
    """A quantum channel as an ordered Kraus family.

    kraus is a (n_kraus, dim_out, dim_in) complex array; operators apply as
    rho -> sum_j K_j rho K_j^dag. Immutable and safe to share across threads.
    """

    dim_in: int
    dim_out: int
    kraus: np.ndarray
    label: str = ""

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.kraus, dtype=np.complex128))
        if arr.ndim != 3:
            raise ValidationError(
                f"kraus must stack to 3 dims, got shape {arr.shape}"
            )
        if arr.shape[0] < 1:
            raise ValidationError("channel needs at least one Kraus operator")
        if arr.shape[1] != self.dim_out or arr.shape[2] != self.dim_in:
            raise ValidationError(
                f"Kraus shape {arr.shape[1:]} does not match "
                f"(dim_out, dim_in) = ({self.dim_out}, {self.dim_in})"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "kraus", arr)

    @property
    def n_kraus(self) -> int:
        return self.kraus.shape[0]


@dataclass(frozen=True)
class ChannelReport:
    """Outcome of validate(): residuals, inferred kind, and overall verdict."""

    label: str
    dim_in: int
    dim_out: int
    n_kraus: int
    tp_residual: float
    unitality_residual: float
    choi_min_eigenvalue: float
    kind: str
    valid: bool

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "dim_in": self.dim_in,
            "dim_out": self.dim_out,
            "n_kraus": self.n_kraus,
            "tp_residual": self.tp_residual,
            "unitality_residual": self.unitality_residual,
            "choi_min_eigenvalue": self.choi_min_eigenvalue,
            "kind": self.kind,
            "valid": self.valid,
        }


def apply(phi: Channel, rho: np.ndarray) -> np.ndarray:
    """Channel action sum_j K_j rho K_j^dag."""
    rho = np.ascontiguousarray(np.asarray(rho, dtype=np.complex128))
    if rho.shape != (phi.dim_in, phi.dim_in):
        raise ValidationError(
            f"input shape {rho.shape} does not match channel dim_in {phi.dim_in}"
        )
    return _kernels.apply_channel(phi.kraus, rho)


def tp_residual(phi: Channel) -> float:
    acc = np.zeros((phi.dim_in, phi.dim_in), dtype=np.complex128)
    for k in phi.kraus:
        acc += k.conj().T @ k
    return max_abs(acc - np.eye(phi.dim_in))


def unitality_residual(phi: Channel) -> float:
    out = apply(phi, maximally_mixed(phi.dim_in))
    return max_abs(out - maximally_mixed(phi.dim_out))


def choi_matrix(phi: Channel) -> np.ndarray:
    """Unnormalized Choi matrix sum_ij |i><j| (x) Phi(|i><j|)."""
    d_in, d_out = phi.dim_in, phi.dim_out
    choi = np.zeros((d_in * d_out, d_in * d_out), dtype=np.complex128)
    for k in phi.kraus:
        w = k.T.reshape(-1)  # sum_i |i> (x) K|i>, flattened in-major
        choi += np.outer(w, w.conj())
    return choi


def validate(phi: Channel) -> ChannelReport:
    """Report trace preservation, unitality, Choi positivity, and kind.

    Never raises; failures are carried in the report.
    """
    tp = tp_residual(phi)
    uni = unitality_residual(phi)
    choi_min = float(np.linalg.eigvalsh(choi_matrix(phi))[0])
    if uni <= UNITAL_TOL:
        kind = KIND_UNITAL if phi.dim_in == phi.dim_out else KIND_BISTOCHASTIC
    else:
        kind = KIND_GENERAL
    valid = tp <= TP_TOL and choi_min >= -CHOI_TOL
    return ChannelReport(
        label=phi.label,
        dim_in=phi.dim_in,
        dim_out=phi.dim_out,
        n_kraus=phi.n_kraus,
        tp_residual=tp,
        unitality_residual=uni,
        choi_min_eigenvalue=choi_min,
        kind=kind,
        valid=valid,
    )


def tensor_channel(phi: Channel, omega: Channel) -> Channel:
    """Product channel with Kraus family {K_j (x) L_k}, j-major."""
    n = phi.n_kraus * omega.n_kraus
    d_out = phi.dim_out * omega.dim_out
    d_in = phi.dim_in * omega.dim_in
    kraus = np.empty((n, d_out, d_in), dtype=np.complex128)
    idx = 0
    for k in phi.kraus:
        for l_op in omega.kraus:
            kraus[idx] = np.kron(k, l_op)
            idx += 1
    label = f"({phi.label})(x)({omega.label})" if phi.label or omega.label else ""
    return Channel(dim_in=d_in, dim_out=d_out, kraus=kraus, label=label)


def maps_equal(phi: Channel, omega: Channel, tol: float = 1e-10) -> bool:
    """Compare two channels as maps on the matrix-unit spanning set.

    Kraus lists are not unique, so equality is only meaningful this way.
    """
    if phi.dim_in != omega.dim_in or phi.dim_out != omega.dim_out:
        return False
    d = phi.dim_in
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=np.complex128)
            unit[i, j] = 1.0
            a = _kernels.apply_channel(phi.kraus, unit)
            b = _kernels.apply_channel(omega.kraus, unit)
            if max_abs(a - b) > tol:
                return False
    return True


def random_channel(
    dim_in: int,
    dim_out: int,
    env_dim: int | None = None,
    seed: int = 0,
    label: str | None = None,
) -> Channel:
    """Channel compressed from a Haar-random isometry into an environment basis.

    The isometry V: dim_in -> dim_out * env_dim comes from the QR of a complex
    Gaussian matrix with the R diagonal phase-corrected; Kraus operators are
    K_e = (I (x) <e|) V. env_dim defaults to dim_in * dim_out (full rank).
    Deterministic for a fixed seed.
    """
    if dim_in < 1 or dim_out < 1:
        raise DomainError(f"dimensions must be >= 1, got ({dim_in}, {dim_out})")
    if env_dim is None:
        env_dim = dim_in * dim_out
    if env_dim < 1:
        raise DomainError(f"env_dim must be >= 1, got {env_dim}")
    if dim_out * env_dim < dim_in:
        raise DomainError(
            f"no isometry C^{dim_in} -> C^{dim_out * env_dim}: "
            "need dim_out * env_dim >= dim_in"
        )
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim_out * env_dim, dim_in)) + 1j * rng.standard_normal(
        (dim_out * env_dim, dim_in)
    )
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r).copy()
    diag[np.abs(diag) == 0] = 1.0
    v = q * (diag / np.abs(diag))
    blocks = v.reshape(dim_out, env_dim, dim_in)
    kraus = np.ascontiguousarray(blocks.transpose(1, 0, 2))
    if label is None:
        label = f"random:din={dim_in}:dout={dim_out}:env={env_dim}:seed={seed}"
    return Channel(dim_in=dim_in, dim_out=dim_out, kraus=kraus, label=label)


def identity_channel(dim: int) -> Channel:
    if dim < 1:
        raise DomainError(f"dimension must be >= 1, got {dim}")
    kraus = np.eye(dim, dtype=np.complex128)[np.newaxis, :, :]
    return Channel(dim_in=dim, dim_out=dim, kraus=kraus, label=f"identity:{dim}")


def depolarizing_channel(dim: int, lam: float) -> Channel:
    """rho -> lam rho + (1 - lam) tr[rho] I/d, in the shift/clock Kraus form."""
    if dim < 1:
        raise DomainError(f"dimension must be >= 1, got {dim}")
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"depolarizing weight must lie in [0, 1], got {lam}")
    from .weyl import build_weyl

    ws = build_weyl(dim)
    d2 = dim * dim
    kraus = np.empty((d2, dim, dim), dtype=np.complex128)
    base = (1.0 - lam) / d2
    for z in range(d2):
        coeff = base + (lam if z == 0 else 0.0)
        kraus[z] = np.sqrt(coeff) * ws.ops[z]
    return Channel(dim_in=dim, dim_out=dim, kraus=kraus, label=f"depolarizing:{dim}:{lam}")


def completely_depolarizing_channel(dim: int) -> Channel:
    """Constant map onto the maximally mixed state, Kraus {|i><j| / sqrt(d)}."""
    if dim < 1:
        raise DomainError(f"dimension must be >= 1, got {dim}")
    kraus = np.zeros((dim * dim, dim, dim), dtype=np.complex128)
    scale = 1.0 / np.sqrt(dim)
    for i in range(dim):
        for j in range(dim):
            kraus[i * dim + j, i, j] = scale
    return Channel(
        dim_in=dim, dim_out=dim, kraus=kraus, label=f"completely_depolarizing:{dim}"
    )


def werner_holevo_channel(dim: int) -> Channel:
    """rho -> (tr[rho] I - rho^T) / (d - 1) via the antisymmetric Kraus family."""
    if dim < 2:
        raise DomainError(f"this family needs dimension >= 2, got {dim}")
    n = dim * (dim - 1) // 2
    kraus = np.zeros((n, dim, dim), dtype=np.complex128)
    scale = 1.0 / np.sqrt(dim - 1.0)
    idx = 0
    for i in range(dim):
        for j in range(i + 1, dim):
            kraus[idx, i, j] = scale
            kraus[idx, j, i] = -scale
            idx += 1
    return Channel(dim_in=dim, dim_out=dim, kraus=kraus, label=f"werner_holevo:{dim}")


NAMED_CHANNELS = {
    "identity": (identity_channel, 0),
    "depolarizing": (depolarizing_channel, 1),
    "completely_depolarizing": (completely_depolarizing_channel, 0),
    "werner_holevo": (werner_holevo_channel, 0),
}


def named_channel(name: str, dim: int, param: float | None = None) -> Channel:
    """Canonical channel families addressable by name."""
    if name not in NAMED_CHANNELS:
        raise DomainError(
            f"unknown channel name {name!r}; known: {sorted(NAMED_CHANNELS)}"
        )
    factory, n_params = NAMED_CHANNELS[name]
    if n_params == 0:
        if param is not None:
            raise DomainError(f"channel {name!r} takes no parameter")
        return factory(dim)
    if param is None:
        raise DomainError(f"channel {name!r} requires a parameter")
    return factory(dim, param)


def parse_channel_spec(spec: str) -> Channel:
    """Parse the inline syntax name:dim[:param], e.g. depolarizing:2:0.5."""
    parts = spec.split(":")
    if len(parts) < 2 or len(parts) > 3:
        raise DomainError(f"bad channel spec {spec!r}; expected name:dim[:param]")
    name = parts[0]
    try:
        dim = int(parts[1])
    except ValueError as exc:
        raise DomainError(f"bad dimension in channel spec {spec!r}") from exc
    param = None
    if len(parts) == 3:
        try:
            param = float(parts[2])
        except ValueError as exc:
            raise DomainError(f"bad parameter in channel spec {spec!r}") from exc
    return named_channel(name, dim, param)


def channel_to_json(phi: Channel) -> dict:
    return {
        "label": phi.label,
        "dim_in": phi.dim_in,
        "dim_out": phi.dim_out,
        "kraus": [matrix_to_json(k) for k in phi.kraus],
    }


def channel_from_json(obj: dict, strict: bool = True) -> Channel:
    """Rebuild a channel from its wire format, re-validating on ingest.

    strict=False skips the trace-preservation gate so broken files can still
    be inspected by validate().
    """
    try:
        label = str(obj["label"])
        dim_in = int(obj["dim_in"])
        dim_out = int(obj["dim_out"])
        kraus_json = obj["kraus"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed channel JSON: missing field {exc}") from exc
    if not kraus_json:
        raise ValidationError("channel JSON has an empty Kraus list")
    kraus = np.stack([matrix_from_json(m) for m in kraus_json])
    phi = Channel(dim_in=dim_in, dim_out=dim_out, kraus=kraus, label=label)
    if strict:
        res = tp_residual(phi)
        if res > TP_TOL:
            raise ValidationError(
                "loaded channel is not trace preserving: sum K^dag K != I", res
            )
    return phi


def dumps_channel(phi: Channel) -> str:
    return json.dumps(channel_to_json(phi), indent=2) + "\n"


def save_channel(path: str, phi: Channel) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_channel(phi))


def load_channel(path: str, strict: bool = True) -> Channel:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    return channel_from_json(obj, strict=strict)


def channel_hash(phi: Channel) -> str:
    """Stable content hash used to identify channels inside reports."""
    payload = dumps_channel(phi).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:16]
