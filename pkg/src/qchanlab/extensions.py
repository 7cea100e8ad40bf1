"""Channel extensions that trade input-space size for bistochasticity.

Given Phi: B(C^c) -> B(C^d) with Kraus family {K_j}, two derived channels are
built:

* ext' on B(C^{d^2} (x) C^c) -> B(C^d), acting as
  rho~ -> sum_z W_z Phi(E_z rho~ E_z^dag) W_z^dag with block selectors
  E_z = <z| (x) I and the shift/clock unitaries W_z on the output space.
  The complete-noise identity makes ext' bistochastic for every Phi.
* ext'' = I_bar_{cd} (x) ext', which is square (input and output dimension
  d^2 c) and therefore unital. Output entropies shift by exactly ln(cd) and
  p-norms scale by (cd)^((1-p)/p) relative to ext'.

Kraus ordering is normative for serialization: z-major, then the base Kraus
index j, then the flag index m of the attached maximally mixed factor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .channels import Channel, channel_from_json, channel_to_json
from .errors import DomainError, ValidationError
from .weyl import INDEX_CONVENTION, WeylSystem, build_weyl, flat_index


@dataclass(frozen=True)
class ExtensionBundle:
    """A channel together with its bistochastic and unital extensions."""

    base: Channel
    bistochastic_ext: Channel
    unital_ext: Channel
    d: int  # output dimension of the base channel
    c: int  # input dimension of the base channel
    weyl: WeylSystem


def embed_selector(z: tuple[int, int] | int, d: int, c: int) -> np.ndarray:
    """Block selector E_z = <z| (x) I_c, a c x (d^2 c) matrix.

    E_z rho E_z^dag extracts diagonal block z of the d^2 x d^2 block
    structure; sum_z E_z^dag E_z = I.
    """
    idx = flat_index(z, d)
    sel = np.zeros((c, d * d * c), dtype=np.complex128)
    sel[:, idx * c : (idx + 1) * c] = np.eye(c)
    return sel


def embed_input(rho: np.ndarray, d: int) -> np.ndarray:
    """Place rho in block (0,0) of the enlarged input space, zeros elsewhere."""
    rho = np.asarray(rho, dtype=np.complex128)
    n = rho.shape[0]
    out = np.zeros((d * d * n, d * d * n), dtype=np.complex128)
    out[:n, :n] = rho
    return out


def bistochastic_extension(phi: Channel, ws: WeylSystem | None = None) -> Channel:
    """Bistochastic channel on the d^2-fold enlarged input space.

    Kraus family {W_z K_j E_z}, z-major then j. The block structure gives
    ext'(|z><z| (x) rho) = W_z Phi(rho) W_z^dag, so block (0,0) embeds the
    base channel exactly.
    """
    d, c = phi.dim_out, phi.dim_in
    if ws is None:
        ws = build_weyl(d)
    elif ws.dim != d:
        raise DomainError(
            f"shift/clock system dimension {ws.dim} != channel dim_out {d}"
        )
    d2 = d * d
    n_k = phi.n_kraus
    kraus = np.zeros((d2 * n_k, d, d2 * c), dtype=np.complex128)
    for z in range(d2):
        w = ws.ops[z]
        for j in range(n_k):
            kraus[z * n_k + j, :, z * c : (z + 1) * c] = w @ phi.kraus[j]
    label = f"bistochastic_ext({phi.label})" if phi.label else "bistochastic_ext"
    return Channel(dim_in=d2 * c, dim_out=d, kraus=kraus, label=label)


def unital_extension(phi: Channel, ws: WeylSystem | None = None) -> Channel:
    """Unital (square) channel attaching a maximally mixed cd-dimensional flag.

    Kraus family {(1/sqrt(cd)) |m> (x) (W_z K_j E_z)} ordered z-major, then j,
    then m. dim_in = d^2 c = cd * d = dim_out.
    """
    d, c = phi.dim_out, phi.dim_in
    if ws is None:
        ws = build_weyl(d)
    elif ws.dim != d:
        raise DomainError(
            f"shift/clock system dimension {ws.dim} != channel dim_out {d}"
        )
    d2 = d * d
    cd = c * d
    n_k = phi.n_kraus
    scale = 1.0 / np.sqrt(cd)
    kraus = np.zeros((d2 * n_k * cd, cd * d, d2 * c), dtype=np.complex128)
    idx = 0
    for z in range(d2):
        w = ws.ops[z]
        for j in range(n_k):
            block = scale * (w @ phi.kraus[j])
            for m in range(cd):
                kraus[idx, m * d : (m + 1) * d, z * c : (z + 1) * c] = block
                idx += 1
    label = f"unital_ext({phi.label})" if phi.label else "unital_ext"
    return Channel(dim_in=d2 * c, dim_out=cd * d, kraus=kraus, label=label)


def build_extension_bundle(phi: Channel) -> ExtensionBundle:
    ws = build_weyl(phi.dim_out)
    return ExtensionBundle(
        base=phi,
        bistochastic_ext=bistochastic_extension(phi, ws),
        unital_ext=unital_extension(phi, ws),
        d=phi.dim_out,
        c=phi.dim_in,
        weyl=ws,
    )


def block_weights(rho_hat: np.ndarray, d: int) -> np.ndarray:
    """Traces of the d^2 diagonal blocks of a state on the enlarged space."""
    if rho_hat.shape[0] % (d * d) != 0:
        raise ValidationError(
            f"state dimension {rho_hat.shape[0]} is not a multiple of d^2 = {d * d}"
        )
    n = rho_hat.shape[0] // (d * d)
    weights = np.empty(d * d)
    for z in range(d * d):
        block = rho_hat[z * n : (z + 1) * n, z * n : (z + 1) * n]
        weights[z] = np.trace(block).real
    return weights


def diagonal_block(rho_hat: np.ndarray, z: int, d: int) -> np.ndarray:
    """Diagonal block z of a state on the enlarged space (unnormalized)."""
    n = rho_hat.shape[0] // (d * d)
    return rho_hat[z * n : (z + 1) * n, z * n : (z + 1) * n].copy()


def bundle_to_json(bundle: ExtensionBundle) -> dict:
    return {
        "d": bundle.d,
        "c": bundle.c,
        "weyl_index_convention": INDEX_CONVENTION,
        "base": channel_to_json(bundle.base),
        "bistochastic_ext": channel_to_json(bundle.bistochastic_ext),
        "unital_ext": channel_to_json(bundle.unital_ext),
    }


def bundle_from_json(obj: dict, strict: bool = True) -> ExtensionBundle:
    try:
        d = int(obj["d"])
        c = int(obj["c"])
        convention = obj["weyl_index_convention"]
        base = channel_from_json(obj["base"], strict=strict)
        bist = channel_from_json(obj["bistochastic_ext"], strict=strict)
        unital = channel_from_json(obj["unital_ext"], strict=strict)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed bundle JSON: missing field {exc}") from exc
    if convention != INDEX_CONVENTION:
        raise ValidationError(
            f"bundle uses index convention {convention!r}, expected {INDEX_CONVENTION!r}"
        )
    return ExtensionBundle(
        base=base,
        bistochastic_ext=bist,
        unital_ext=unital,
        d=d,
        c=c,
        weyl=build_weyl(d),
    )


def dumps_bundle(bundle: ExtensionBundle) -> str:
    return json.dumps(bundle_to_json(bundle), indent=2) + "\n"


def save_bundle(path: str, bundle: ExtensionBundle) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_bundle(bundle))


def load_bundle(path: str, strict: bool = True) -> ExtensionBundle:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    return bundle_from_json(obj, strict=strict)
