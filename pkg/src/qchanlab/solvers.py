"""Optimization of the three output functionals of a channel: minimal output
entropy, maximal output p-norm, and the convex closure of output entropy.

All three run multi-start projected gradient descent (Armijo backtracking,
renormalization / QR retraction) with restart seeds derived as seed + index,
so results are independent of how many workers execute the restarts. Entropy
and norm optimizations search the unit sphere of pure inputs: entropy is
concave and norms are convex over the state set, so their optima sit at
extreme points. The convex closure searches isometric mixings of a fixed
square-root factorization of the average state, which reach every pure-member
decomposition with at most rank^2 members.

A sampling oracle (Haar pure inputs, plus an angular grid on qubits and a low
rate of mixed-state guards) provides an independent cross-check on solver
values at small dimension.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .channels import Channel
from .errors import DomainError, ValidationError
from .linalg import matrix_to_json, max_abs, random_density_matrix, random_pure_state

ORACLE_DIM_CAP = 8
RANK_TOL = 1e-12
MEMBER_WEIGHT_FLOOR = 1e-12

_QUBIT_GRID_THETA = 91
_QUBIT_GRID_PHI = 180
_MIXED_GUARD_RATE = 100  # one mixed guard state per this many pure samples


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 64
    max_iterations: int = 2000
    step_tolerance: float = 1e-10
    value_tolerance: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise DomainError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_iterations < 1:
            raise DomainError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.step_tolerance <= 0 or self.value_tolerance <= 0:
            raise DomainError("tolerances must be positive")

    def with_seed(self, seed: int) -> "OptimizerConfig":
        return replace(self, seed=seed)

    def to_json(self) -> dict:
        return {
            "restarts": self.restarts,
            "max_iterations": self.max_iterations,
            "step_tolerance": self.step_tolerance,
            "value_tolerance": self.value_tolerance,
            "seed": self.seed,
        }


DEFAULT_CONFIG = OptimizerConfig()


@dataclass(frozen=True)
class Ensemble:
    """Finite decomposition sum_i p_i rho_i of a prescribed average state."""

    members: tuple[tuple[float, np.ndarray], ...]

    def average(self) -> np.ndarray:
        dim = self.members[0][1].shape[0]
        acc = np.zeros((dim, dim), dtype=np.complex128)
        for weight, state in self.members:
            acc += weight * state
        return acc

    def to_json(self) -> dict:
        return {
            "members": [
                {"weight": float(w), "state": matrix_to_json(s)}
                for w, s in self.members
            ]
        }


def validate_ensemble(
    ens: Ensemble,
    average: np.ndarray,
    weight_tol: float = 1e-10,
    average_tol: float = 1e-8,
) -> None:
    weights = np.array([w for w, _ in ens.members])
    if np.any(weights < 0):
        raise ValidationError("ensemble weights must be nonnegative", float(-weights.min()))
    res = abs(float(weights.sum()) - 1.0)
    if res > weight_tol:
        raise ValidationError("ensemble weights must sum to 1", res)
    res = max_abs(ens.average() - average)
    if res > average_tol:
        raise ValidationError("ensemble does not average to the prescribed state", res)


@dataclass(frozen=True)
class Optimum:
    """Best value over all restarts, with convergence diagnostics.

    argument is the optimizing unit vector (entropy / p-norm objectives) or
    the optimizing Ensemble (convex closure). restarts_agreeing counts
    restarts within value_tolerance of the best; converged reflects the best
    restart only.
    """

    value: float
    argument: np.ndarray | Ensemble
    restarts_agreeing: int
    residual_gradient_norm: float
    converged: bool
    iterations: int
    seed: int
    config: OptimizerConfig

    def to_json(self) -> dict:
        if isinstance(self.argument, Ensemble):
            arg = {"kind": "ensemble"}
            arg.update(self.argument.to_json())
        else:
            arg = {
                "kind": "pure_state",
                "amplitudes": [
                    [float(z.real), float(z.imag)] for z in np.asarray(self.argument)
                ],
            }
        return {
            "value": float(self.value),
            "argument": arg,
            "converged": bool(self.converged),
            "restarts_agreeing": int(self.restarts_agreeing),
            "residual_gradient_norm": float(self.residual_gradient_norm),
            "iterations": int(self.iterations),
            "seed": int(self.seed),
            "config": self.config.to_json(),
        }


def _run_restarts(task, n_restarts: int, workers: int) -> list:
    """Execute restart closures 0..n-1, preserving index order in the result."""
    if workers <= 1:
        return [task(i) for i in range(n_restarts)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, range(n_restarts)))


def _reduce(results, minimize: bool, value_tolerance: float):
    """Pick the best restart (ties broken by lowest index) and count agreement."""
    best_idx = 0
    best_val = results[0][0]
    for i in range(1, len(results)):
        v = results[i][0]
        if (v < best_val) if minimize else (v > best_val):
            best_val = v
            best_idx = i
    agreeing = sum(1 for r in results if abs(r[0] - best_val) <= value_tolerance)
    return best_idx, agreeing


def min_output_entropy(
    phi: Channel, cfg: OptimizerConfig = DEFAULT_CONFIG, workers: int = 1
) -> Optimum:
    """Minimize the output entropy S(Phi(|psi><psi|)) over unit vectors."""
    kraus = phi.kraus

    def task(i: int):
        rng = np.random.default_rng(cfg.seed + i)
        start = random_pure_state(phi.dim_in, rng)
        return _kernels.descend_entropy(
            kraus, start, cfg.max_iterations, cfg.step_tolerance
        )

    results = _run_restarts(task, cfg.restarts, workers)
    best, agreeing = _reduce(results, minimize=True, value_tolerance=cfg.value_tolerance)
    val, psi, g_norm, converged, iters = results[best]
    return Optimum(
        value=float(val),
        argument=psi,
        restarts_agreeing=agreeing,
        residual_gradient_norm=float(g_norm),
        converged=bool(converged),
        iterations=int(iters),
        seed=cfg.seed,
        config=cfg,
    )


def max_output_pnorm(
    phi: Channel,
    p: float,
    cfg: OptimizerConfig = DEFAULT_CONFIG,
    workers: int = 1,
) -> Optimum:
    """Maximize the output Schatten p-norm over unit vectors.

    p = 1 short-circuits: the trace norm of every output state is 1.
    """
    if p != math.inf and p < 1.0:
        raise DomainError(f"p must be >= 1 or inf, got {p}")
    if p == 1.0:
        e0 = np.zeros(phi.dim_in, dtype=np.complex128)
        e0[0] = 1.0
        return Optimum(
            value=1.0,
            argument=e0,
            restarts_agreeing=cfg.restarts,
            residual_gradient_norm=0.0,
            converged=True,
            iterations=0,
            seed=cfg.seed,
            config=cfg,
        )
    kraus = phi.kraus

    def task(i: int):
        rng = np.random.default_rng(cfg.seed + i)
        start = random_pure_state(phi.dim_in, rng)
        if p == math.inf:
            return _kernels.descend_opnorm(
                kraus, start, cfg.max_iterations, cfg.step_tolerance
            )
        return _kernels.descend_pnorm(
            kraus, start, p, cfg.max_iterations, cfg.step_tolerance
        )

    results = _run_restarts(task, cfg.restarts, workers)
    best, agreeing = _reduce(results, minimize=False, value_tolerance=cfg.value_tolerance)
    val, psi, g_norm, converged, iters = results[best]
    return Optimum(
        value=float(val),
        argument=psi,
        restarts_agreeing=agreeing,
        residual_gradient_norm=float(g_norm),
        converged=bool(converged),
        iterations=int(iters),
        seed=cfg.seed,
        config=cfg,
    )


def sqrt_factor(rho: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Square-root factor B with rho = B B^dag, columns spanning the support.

    Columns are eigenvectors scaled by sqrt(eigenvalue), in descending
    eigenvalue order; zero modes below rank_tol are dropped.
    """
    w, v = np.linalg.eigh(np.asarray(rho, dtype=np.complex128))
    order = np.argsort(w)[::-1]
    cols = [v[:, k] * np.sqrt(w[k]) for k in order if w[k] > rank_tol]
    if not cols:
        raise ValidationError("state has no support above the rank tolerance")
    return np.ascontiguousarray(np.stack(cols, axis=1))


def _ensemble_from_mix(bfac: np.ndarray, mix: np.ndarray) -> Ensemble:
    members_mat = bfac @ mix.T
    members = []
    for i in range(members_mat.shape[1]):
        phi_vec = members_mat[:, i]
        weight = float(np.vdot(phi_vec, phi_vec).real)
        if weight < MEMBER_WEIGHT_FLOOR:
            continue
        state = np.outer(phi_vec, phi_vec.conj()) / weight
        members.append((weight, state))
    total = sum(w for w, _ in members)
    members = [(w / total, s) for w, s in members]
    return Ensemble(members=tuple(members))


def convex_closure(
    phi: Channel,
    rho: np.ndarray,
    cfg: OptimizerConfig = DEFAULT_CONFIG,
    workers: int = 1,
) -> Optimum:
    """Minimize sum_i p_i S(Phi(rho_i)) over decompositions sum_i p_i rho_i = rho.

    Pure members suffice (the objective is linear in weights and concave in
    the member state), and every pure decomposition with at most rank^2
    members arises from an isometric mixing of one square-root factor of rho.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (phi.dim_in, phi.dim_in):
        raise ValidationError(
            f"state shape {rho.shape} does not match channel dim_in {phi.dim_in}"
        )
    bfac = sqrt_factor(rho)
    rank = bfac.shape[1]
    n_members = rank * rank
    kraus = phi.kraus

    def task(i: int):
        rng = np.random.default_rng(cfg.seed + i)
        start = rng.standard_normal((n_members, rank)) + 1j * rng.standard_normal(
            (n_members, rank)
        )
        return _kernels.descend_roof(
            kraus, bfac, start, cfg.max_iterations, cfg.step_tolerance
        )

    results = _run_restarts(task, cfg.restarts, workers)
    best, agreeing = _reduce(results, minimize=True, value_tolerance=cfg.value_tolerance)
    val, mix, g_norm, converged, iters = results[best]
    return Optimum(
        value=float(val),
        argument=_ensemble_from_mix(bfac, mix),
        restarts_agreeing=agreeing,
        residual_gradient_norm=float(g_norm),
        converged=bool(converged),
        iterations=int(iters),
        seed=cfg.seed,
        config=cfg,
    )


def _qubit_grid() -> np.ndarray:
    thetas = np.linspace(0.0, np.pi, _QUBIT_GRID_THETA)
    phis = np.linspace(0.0, 2 * np.pi, _QUBIT_GRID_PHI, endpoint=False)
    grid = np.empty((_QUBIT_GRID_THETA * _QUBIT_GRID_PHI, 2), dtype=np.complex128)
    idx = 0
    for th in thetas:
        for ph in phis:
            grid[idx, 0] = np.cos(th / 2)
            grid[idx, 1] = np.exp(1j * ph) * np.sin(th / 2)
            idx += 1
    return grid


def brute_force_oracle(
    phi: Channel,
    objective: str,
    samples: int,
    seed: int,
    p: float | None = None,
) -> float:
    """Best objective value over random sampling; independent of the solvers.

    Scans `samples` Haar-random pure inputs, a deterministic angular grid when
    dim_in = 2, and a low rate of random mixed states as a guard against the
    pure-state restriction.
    """
    if phi.dim_in > ORACLE_DIM_CAP:
        raise DomainError(
            f"oracle input dimension capped at {ORACLE_DIM_CAP}, got {phi.dim_in}"
        )
    if objective not in ("moe", "pnorm"):
        raise DomainError(f"objective must be 'moe' or 'pnorm', got {objective!r}")
    if objective == "pnorm":
        if p is None:
            raise DomainError("pnorm objective requires p")
        if p != math.inf and p < 1.0:
            raise DomainError(f"p must be >= 1 or inf, got {p}")
        if p == 1.0:
            return 1.0
    rng = np.random.default_rng(seed)
    pure = rng.standard_normal((samples, phi.dim_in)) + 1j * rng.standard_normal(
        (samples, phi.dim_in)
    )
    pure /= np.linalg.norm(pure, axis=1)[:, np.newaxis]
    pure = np.ascontiguousarray(pure.astype(np.complex128))
    n_mixed = max(1, samples // _MIXED_GUARD_RATE)
    mixed = np.stack(
        [random_density_matrix(phi.dim_in, rng) for _ in range(n_mixed)]
    )
    mixed = np.ascontiguousarray(mixed)
    kraus = phi.kraus
    if objective == "moe":
        best, _ = _kernels.scan_entropy(kraus, pure)
        if phi.dim_in == 2:
            grid_best, _ = _kernels.scan_entropy(kraus, _qubit_grid())
            best = min(best, grid_best)
        best = min(best, _kernels.scan_entropy_mixed(kraus, mixed))
        return float(best)
    if p == math.inf:
        best, _ = _kernels.scan_opnorm(kraus, pure)
        if phi.dim_in == 2:
            grid_best, _ = _kernels.scan_opnorm(kraus, _qubit_grid())
            best = max(best, grid_best)
        best = max(best, _kernels.scan_opnorm_mixed(kraus, mixed))
        return float(best)
    best, _ = _kernels.scan_pnorm(kraus, pure, p)
    if phi.dim_in == 2:
        grid_best, _ = _kernels.scan_pnorm(kraus, _qubit_grid(), p)
        best = max(best, grid_best)
    best = max(best, _kernels.scan_pnorm_mixed(kraus, mixed, p))
    return float(best)


def moe_value_and_grad(phi: Channel, psi: np.ndarray) -> tuple[float, np.ndarray]:
    """Output entropy of the (not necessarily normalized) vector input psi and
    its Euclidean gradient; the solver descends the tangent projection of this."""
    psi = np.ascontiguousarray(np.asarray(psi, dtype=np.complex128))
    return _kernels.moe_value_grad(phi.kraus, psi)


def pnorm_value_and_grad(
    phi: Channel, psi: np.ndarray, p: float
) -> tuple[float, np.ndarray]:
    """Output p-norm of the vector input psi and its Euclidean gradient."""
    if p != math.inf and p < 1.0:
        raise DomainError(f"p must be >= 1 or inf, got {p}")
    psi = np.ascontiguousarray(np.asarray(psi, dtype=np.complex128))
    if p == math.inf:
        return _kernels.opnorm_value_grad(phi.kraus, psi)
    return _kernels.pnorm_value_grad(phi.kraus, psi, p)


def roof_value_and_grad(
    phi: Channel, bfac: np.ndarray, mix: np.ndarray
) -> tuple[float, np.ndarray]:
    """Ensemble-averaged output entropy at mixing matrix `mix` and its
    Euclidean gradient with respect to mix."""
    bfac = np.ascontiguousarray(np.asarray(bfac, dtype=np.complex128))
    mix = np.ascontiguousarray(np.asarray(mix, dtype=np.complex128))
    return _kernels.roof_value_grad(phi.kraus, bfac, mix)
