"""Harness that numerically certifies the identities and inequalities behind
the extension constructions, on concrete channel pairs.

The claim catalog (anchors referenced by every check):

* moe / pnorm / ccoe transfer: the bistochastic extension preserves minimal
  output entropy, maximal output p-norm, and the convex closure of output
  entropy of the product with any second channel. Each equality is certified
  from both sides: the embedding direction is construction-exact, while the
  converse follows from the block decomposition of the enlarged input
  (concavity of entropy / triangle inequality of norms).
* unital shift: the unital extension shifts every output entropy by exactly
  ln(cd) and scales every output p-norm by (cd)^((1-p)/p).
* unital reduction: chaining both constructions reduces additivity questions
  for arbitrary pairs to unital pairs; every link is asserted separately.

Superadditivity of the convex closure across a *general* pair is an open
question, so the harness records it observationally and only asserts it on
instances where it is provable (see known_superadditive_instance).

Construction identities are checked at 1e-9..1e-12; solver-mediated
equalities at 2e-4..5e-4, reflecting multi-start optimization noise. Checks
are independent and may run concurrently; reports list them in declared
order. Wall-clock timings are diagnostic only and never serialized, so a
report replayed from its config and seeds is byte-identical.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    Channel,
    channel_hash,
    identity_channel,
    tensor_channel,
    unitality_residual,
)
from .errors import ScaleCapError, ValidationError
from .extensions import (
    bistochastic_extension,
    diagonal_block,
    embed_input,
    unital_extension,
)
from .linalg import (
    maximally_mixed,
    partial_trace,
    random_density_matrix,
    schatten_norm,
    von_neumann_entropy,
)
from .solvers import (
    DEFAULT_CONFIG,
    OptimizerConfig,
    convex_closure,
    max_output_pnorm,
    min_output_entropy,
    sqrt_factor,
)
from . import channels as _channels

SCALE_CAP = 64
CONSTRUCTION_TOL = 1e-9
EXACT_TOL = 1e-12
UNITALITY_TOL = 1e-10
MOE_SOLVER_TOL = 2e-4
PNORM_SOLVER_TOL = 1e-4
CCOE_SOLVER_TOL = 5e-4

_SEED_STRIDE = 100_000
_N_BLOCK_SAMPLES = 20


@dataclass(frozen=True)
class TheoremCheck:
    """One certified relation: lhs (relation) rhs within tolerance.

    observational checks are recorded but never gate a report; every check
    must carry a nonempty claim anchor.
    """

    name: str
    anchor: str
    lhs: float
    rhs: float
    relation: str
    tolerance: float
    seeds: tuple[int, ...] = ()
    observational: bool = False

    def __post_init__(self):
        if not self.anchor:
            raise ValidationError("every check must name a claim anchor")
        if self.relation not in ("=", "<=", ">="):
            raise ValidationError(f"unknown relation {self.relation!r}")

    @property
    def passed(self) -> bool:
        if self.relation == "=":
            return abs(self.lhs - self.rhs) <= self.tolerance
        if self.relation == "<=":
            return self.lhs <= self.rhs + self.tolerance
        return self.lhs >= self.rhs - self.tolerance

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "relation": self.relation,
            "tol": float(self.tolerance),
            "passed": bool(self.passed),
            "observational": bool(self.observational),
            "seeds": [int(s) for s in self.seeds],
        }


@dataclass
class VerificationReport:
    """Structured record of every relation checked on a set of channels.

    Self-contained for replay: the config echo plus the per-check seeds
    reproduce every lhs/rhs bit for bit. timings hold wall-clock seconds per
    check and are deliberately kept out of the JSON form.
    """

    channels: list[dict]
    checks: list[TheoremCheck] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if not c.observational)

    def to_json(self) -> dict:
        return {
            "channels": self.channels,
            "checks": [c.to_json() for c in self.checks],
            "config": self.config,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"

    def render_text(self) -> str:
        lines = []
        for entry in self.channels:
            lines.append(f"channel {entry['label']!r}  hash {entry['hash']}")
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            tag = " (observational)" if c.observational else ""
            lines.append(
                f"[{status}] {c.name}: {c.lhs:.10g} {c.relation} {c.rhs:.10g} "
                f"(tol {c.tolerance:.1e}){tag}"
            )
        verdict = "ALL ASSERTED CHECKS PASSED" if self.passed else "FAILURES PRESENT"
        lines.append(verdict)
        return "\n".join(lines) + "\n"


class _ReportBuilder:
    """Accumulates checks in declared order and times each block."""

    def __init__(self, channels: list[Channel], cfg: OptimizerConfig, extra: dict):
        config = {"optimizer": cfg.to_json()}
        config.update(extra)
        self.report = VerificationReport(
            channels=[
                {"label": c.label, "hash": channel_hash(c)} for c in channels
            ],
            config=config,
        )
        self._cfg = cfg
        self._runs = 0

    def next_seed(self) -> int:
        seed = self._cfg.seed + self._runs * _SEED_STRIDE
        self._runs += 1
        return seed

    def sub_config(self) -> OptimizerConfig:
        return self._cfg.with_seed(self.next_seed())

    def add(self, check: TheoremCheck, elapsed: float = 0.0) -> None:
        self.report.checks.append(check)
        self.report.timings[check.name] = elapsed


def _check_scale(phi: Channel, omega: Channel) -> None:
    d, c = phi.dim_out, phi.dim_in
    total = d * d * c * omega.dim_in
    if total > SCALE_CAP:
        raise ScaleCapError(
            f"extended product input dimension d^2*c*dim_in(omega) = {total} "
            f"exceeds the desk-scale cap {SCALE_CAP}; use channels with "
            f"d^2*c*dim_in(omega) <= {SCALE_CAP}"
        )


def _default_omega(omega: Channel | None) -> Channel:
    # identity qubit default: makes the transfer equalities exactly checkable
    return identity_channel(2) if omega is None else omega


def _random_block_states(dim: int, count: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    return [random_density_matrix(dim, rng) for _ in range(count)]


def check_moe_transfer(
    phi: Channel,
    omega: Channel | None = None,
    cfg: OptimizerConfig = DEFAULT_CONFIG,
    workers: int = 1,
) -> VerificationReport:
    """Certify that the bistochastic extension preserves the minimal output
    entropy of the product with omega, from both directions."""
    omega = _default_omega(omega)
    _check_scale(phi, omega)
    d = phi.dim_out
    ext = bistochastic_extension(phi)
    product = tensor_channel(phi, omega)
    ext_product = tensor_channel(ext, omega)
    builder = _ReportBuilder([phi, omega, ext], cfg, {"claim": "moe-transfer"})

    t0 = time.perf_counter()
    cfg_a = builder.sub_config()
    base_opt = min_output_entropy(product, cfg_a, workers=workers)
    cfg_b = builder.sub_config()
    ext_opt = min_output_entropy(ext_product, cfg_b, workers=workers)
    t_solve = time.perf_counter() - t0

    # the embedded base argmin is an admissible extension input with the
    # same output entropy, realizing the <= direction constructively
    t0 = time.perf_counter()
    e0 = np.zeros(d * d, dtype=np.complex128)
    e0[0] = 1.0
    embedded_argmin = np.kron(e0, np.asarray(base_opt.argument))
    embedded_val = von_neumann_entropy(
        _apply_to_pure(ext_product, embedded_argmin), validate=False
    )
    builder.add(
        TheoremCheck(
            name="embedding-attains-base-optimum",
            anchor="moe-embedding-equality",
            lhs=embedded_val,
            rhs=base_opt.value,
            relation="=",
            tolerance=CONSTRUCTION_TOL,
            seeds=(cfg_a.seed,),
        ),
        time.perf_counter() - t0,
    )
    builder.add(
        TheoremCheck(
            name="moe-extension-le",
            anchor="moe-embedding-direction",
            lhs=ext_opt.value,
            rhs=base_opt.value,
            relation="<=",
            tolerance=MOE_SOLVER_TOL,
            seeds=(cfg_a.seed, cfg_b.seed),
        ),
        t_solve,
    )
    builder.add(
        TheoremCheck(
            name="moe-extension-ge",
            anchor="moe-block-concavity-direction",
            lhs=ext_opt.value,
            rhs=base_opt.value,
            relation=">=",
            tolerance=MOE_SOLVER_TOL,
            seeds=(cfg_a.seed, cfg_b.seed),
        )
    )
    builder.add(
        TheoremCheck(
            name="moe-extension-eq",
            anchor="moe-transfer-equality",
            lhs=ext_opt.value,
            rhs=base_opt.value,
            relation="=",
            tolerance=MOE_SOLVER_TOL,
            seeds=(cfg_a.seed, cfg_b.seed),
        )
    )

    # concavity chain on random block states of the enlarged product input
    t0 = time.perf_counter()
    sample_seed = builder.next_seed()
    states = _random_block_states(ext_product.dim_in, _N_BLOCK_SAMPLES, sample_seed)
    worst_chain = math.inf
    worst_tail = math.inf
    for rho_hat in states:
        lhs_entropy = von_neumann_entropy(
            _channels.apply(ext_product, rho_hat), validate=False
        )
        avg = 0.0
        for z in range(d * d):
            block = diagonal_block(rho_hat, z, d)
            weight = float(np.trace(block).real)
            if weight < 1e-14:
                continue
            avg += weight * von_neumann_entropy(
                _channels.apply(product, block / weight), validate=False
            )
        worst_chain = min(worst_chain, lhs_entropy - avg)
        worst_tail = min(worst_tail, avg)
    builder.add(
        TheoremCheck(
            name=f"block-concavity-chain({_N_BLOCK_SAMPLES} samples)",
            anchor="moe-block-concavity-chain",
            lhs=worst_chain,
            rhs=0.0,
            relation=">=",
            tolerance=CONSTRUCTION_TOL,
            seeds=(sample_seed,),
        ),
        time.perf_counter() - t0,
    )
    builder.add(
        TheoremCheck(
            name="block-average-dominates-minimum",
            anchor="moe-block-concavity-chain",
            lhs=worst_tail,
            rhs=base_opt.value,
            relation=">=",
            tolerance=MOE_SOLVER_TOL,
            seeds=(sample_seed, cfg_a.seed),
        )
    )
    return builder.report


def check_pnorm_transfer(
    phi: Channel,
    omega: Channel | None = None,
    p: float = 2.0,
    cfg: OptimizerConfig = DEFAULT_CONFIG,
    workers: int = 1,
) -> VerificationReport:
    """Certify that the bistochastic extension preserves the maximal output
    p-norm of the product with omega."""
    omega = _default_omega(omega)
    _check_scale(phi, omega)
    d = phi.dim_out
    ext = bistochastic_extension(phi)
    product = tensor_channel(phi, omega)
    ext_product = tensor_channel(ext, omega)
    builder = _ReportBuilder(
        [phi, omega, ext], cfg, {"claim": "pnorm-transfer", "p": _p_json(p)}
    )

    t0 = time.perf_counter()
    cfg_a = builder.sub_config()
    base_opt = max_output_pnorm(product, p, cfg_a, workers=workers)
    cfg_b = builder.sub_config()
    ext_opt = max_output_pnorm(ext_product, p, cfg_b, workers=workers)
    t_solve = time.perf_counter() - t0

    t0 = time.perf_counter()
    e0 = np.zeros(d * d, dtype=np.complex128)
    e0[0] = 1.0
    embedded_argmax = np.kron(e0, np.asarray(base_opt.argument))
    embedded_val = schatten_norm(_apply_to_pure(ext_product, embedded_argmax), p)
    builder.add(
        TheoremCheck(
            name="embedding-attains-base-optimum",
            anchor="pnorm-embedding-equality",
            lhs=embedded_val,
            rhs=base_opt.value,
            relation="=",
            tolerance=CONSTRUCTION_TOL,
            seeds=(cfg_a.seed,),
        ),
        time.perf_counter() - t0,
    )
    builder.add(
        TheoremCheck(
            name="pnorm-extension-ge",
            anchor="pnorm-embedding-direction",
            lhs=ext_opt.value,
            rhs=base_opt.value,
            relation=">=",
            tolerance=PNORM_SOLVER_TOL,
            seeds=(cfg_a.seed, cfg_b.seed),
        ),
        t_solve,
    )
    builder.add(
        TheoremCheck(
            name="pnorm-extension-le",
            anchor="pnorm-block-triangle-direction",
            lhs=ext_opt.value,
            rhs=base_opt.value,
            relation="<=",
            tolerance=PNORM_SOLVER_TOL,
            seeds=(cfg_a.seed, cfg_b.seed),
        )
    )
    builder.add(
        TheoremCheck(
            name="pnorm-extension-eq",
            anchor="pnorm-transfer-equality",
            lhs=ext_opt.value,
            rhs=base_opt.value,
            relation="=",
            tolerance=PNORM_SOLVER_TOL,
            seeds=(cfg_a.seed, cfg_b.seed),
        )
    )

    # block/triangle chain: extension output norm is dominated by the block
    # average, which the base optimum dominates in turn
    t0 = time.perf_counter()
    sample_seed = builder.next_seed()
    states = _random_block_states(ext_product.dim_in, _N_BLOCK_SAMPLES, sample_seed)
    worst_chain = math.inf
    worst_tail = -math.inf
    for rho_hat in states:
        lhs_norm = schatten_norm(_channels.apply(ext_product, rho_hat), p)
        avg = 0.0
        for z in range(d * d):
            block = diagonal_block(rho_hat, z, d)
            weight = float(np.trace(block).real)
            if weight < 1e-14:
                continue
            avg += weight * schatten_norm(
                _channels.apply(product, block / weight), p
            )
        worst_chain = min(worst_chain, avg - lhs_norm)
        worst_tail = max(worst_tail, avg)
    builder.add(
        TheoremCheck(
            name=f"block-triangle-chain({_N_BLOCK_SAMPLES} samples)",
            anchor="pnorm-block-triangle-chain",
            lhs=worst_chain,
            rhs=0.0,
            relation=">=",
            tolerance=CONSTRUCTION_TOL,
            seeds=(sample_seed,),
        ),
        time.perf_counter() - t0,
    )
    builder.add(
        TheoremCheck(
            name="block-average-below-maximum",
            anchor="pnorm-block-triangle-chain",
            lhs=worst_tail,
            rhs=base_opt.value,
            relation="<=",
            tolerance=PNORM_SOLVER_TOL,
            seeds=(sample_seed, cfg_a.seed),
        )
    )
    return builder.report


def known_superadditive_instance(
    phi: Channel, omega: Channel, rho: np.ndarray
) -> bool:
    """True when superadditivity of the convex closure is provable for this
    instance rather than conjectural.

    Recognized cases: a completely depolarizing factor (the closure splits
    off an exact ln d), and a pure product input (both sides coincide).
    """
    if _is_completely_depolarizing(phi) or _is_completely_depolarizing(omega):
        return True
    if _is_identity(phi) and _is_identity(omega):
        return True
    return _is_pure_product(rho, phi.dim_in, omega.dim_in)


def _is_completely_depolarizing(ch: Channel) -> bool:
    from .channels import completely_depolarizing_channel, maps_equal

    if ch.dim_in != ch.dim_out:
        return False
    return maps_equal(ch, completely_depolarizing_channel(ch.dim_in))


def _is_identity(ch: Channel) -> bool:
    from .channels import maps_equal

    if ch.dim_in != ch.dim_out:
        return False
    return maps_equal(ch, identity_channel(ch.dim_in))


def _is_pure_product(rho: np.ndarray, dim_a: int, dim_b: int) -> bool:
    w = np.linalg.eigvalsh(rho)
    if abs(w[-1] - 1.0) > 1e-10:
        return False
    rho_a = partial_trace(rho, (dim_a, dim_b), 0)
    return abs(float(np.linalg.eigvalsh(rho_a)[-1]) - 1.0) <= 1e-10


def check_ccoe_transfer(
    phi: Channel,
    omega: Channel | None = None,
    rho: np.ndarray | None = None,
    cfg: OptimizerConfig = DEFAULT_CONFIG,
    workers: int = 1,
) -> VerificationReport:
    """Certify that the bistochastic extension preserves the convex closure of
    output entropy at the embedded state, and record the superadditivity
    comparison (asserted only on provably-true instances)."""
    omega = _default_omega(omega)
    _check_scale(phi, omega)
    d, c = phi.dim_out, phi.dim_in
    k1 = omega.dim_in
    if rho is None:
        rho = maximally_mixed(c * k1)
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (c * k1, c * k1):
        raise ValidationError(
            f"state shape {rho.shape} does not match product input dim {c * k1}"
        )
    ext = bistochastic_extension(phi)
    product = tensor_channel(phi, omega)
    ext_product = tensor_channel(ext, omega)
    builder = _ReportBuilder([phi, omega, ext], cfg, {"claim": "ccoe-transfer"})

    t0 = time.perf_counter()
    cfg_a = builder.sub_config()
    base_roof = convex_closure(product, rho, cfg_a, workers=workers)
    embedded = embed_input(rho, d)
    cfg_b = builder.sub_config()
    ext_roof = convex_closure(ext_product, embedded, cfg_b, workers=workers)
    builder.add(
        TheoremCheck(
            name="ccoe-embedding-eq",
            anchor="ccoe-embedding-equality",
            lhs=ext_roof.value,
            rhs=base_roof.value,
            relation="=",
            tolerance=CCOE_SOLVER_TOL,
            seeds=(cfg_a.seed, cfg_b.seed),
        ),
        time.perf_counter() - t0,
    )

    # every decomposition of the embedded state stays confined to the
    # selected block; probed on random isometric mixings
    t0 = time.perf_counter()
    probe_seed = builder.next_seed()
    rng = np.random.default_rng(probe_seed)
    bfac = sqrt_factor(embedded)
    rank = bfac.shape[1]
    n_inner = c * k1
    worst_leak = 0.0
    for _ in range(10):
        g = rng.standard_normal((rank * rank, rank)) + 1j * rng.standard_normal(
            (rank * rank, rank)
        )
        q, _ = np.linalg.qr(g)
        members = bfac @ q.T
        leak = float(np.sum(np.abs(members[n_inner:, :]) ** 2))
        worst_leak = max(worst_leak, leak)
    builder.add(
        TheoremCheck(
            name="embedded-decompositions-confined",
            anchor="embedded-block-support",
            lhs=worst_leak,
            rhs=0.0,
            relation="<=",
            tolerance=EXACT_TOL,
            seeds=(probe_seed,),
        ),
        time.perf_counter() - t0,
    )

    t0 = time.perf_counter()
    rho_a = partial_trace(rho, (c, k1), 0)
    rho_b = partial_trace(rho, (c, k1), 1)
    cfg_c = builder.sub_config()
    roof_a = convex_closure(phi, rho_a, cfg_c, workers=workers)
    cfg_d = builder.sub_config()
    roof_b = convex_closure(omega, rho_b, cfg_d, workers=workers)
    provable = known_superadditive_instance(phi, omega, rho)
    builder.add(
        TheoremCheck(
            name="ccoe-superadditivity",
            anchor="ccoe-superadditivity"
            + ("-provable-instance" if provable else "-open-general"),
            lhs=base_roof.value,
            rhs=roof_a.value + roof_b.value,
            relation=">=",
            tolerance=CCOE_SOLVER_TOL,
            seeds=(cfg_a.seed, cfg_c.seed, cfg_d.seed),
            observational=not provable,
        ),
        time.perf_counter() - t0,
    )
    return builder.report


def check_unital_shift(
    phi: Channel,
    omega: Channel | None = None,
    p: float = 2.0,
    cfg: OptimizerConfig = DEFAULT_CONFIG,
) -> VerificationReport:
    """Certify the pointwise ln(cd) entropy shift and (cd)^((1-p)/p) norm
    factor between the unital and bistochastic extensions."""
    omega = _default_omega(omega)
    _check_scale(phi, omega)
    d, c = phi.dim_out, phi.dim_in
    cd = c * d
    ext = bistochastic_extension(phi)
    uni = unital_extension(phi)
    ext_product = tensor_channel(ext, omega)
    uni_product = tensor_channel(uni, omega)
    builder = _ReportBuilder(
        [phi, omega, uni], cfg, {"claim": "unital-shift", "p": _p_json(p)}
    )

    t0 = time.perf_counter()
    builder.add(
        TheoremCheck(
            name="unital-extension-unitality",
            anchor="unital-extension-is-unital",
            lhs=unitality_residual(uni),
            rhs=0.0,
            relation="<=",
            tolerance=UNITALITY_TOL,
        ),
        time.perf_counter() - t0,
    )
    builder.add(
        TheoremCheck(
            name="unital-extension-square",
            anchor="unital-extension-is-unital",
            lhs=float(uni.dim_in),
            rhs=float(uni.dim_out),
            relation="=",
            tolerance=0.0,
        )
    )

    t0 = time.perf_counter()
    sample_seed = builder.next_seed()
    states = _random_block_states(ext_product.dim_in, _N_BLOCK_SAMPLES, sample_seed)
    shift_target = math.log(cd)
    factor_target = cd ** ((1.0 - p) / p) if p != math.inf else 1.0 / cd
    worst_shift = shift_target
    worst_factor = factor_target
    for rho_hat in states:
        out_ext = _channels.apply(ext_product, rho_hat)
        out_uni = _channels.apply(uni_product, rho_hat)
        shift = von_neumann_entropy(out_uni, validate=False) - von_neumann_entropy(
            out_ext, validate=False
        )
        if abs(shift - shift_target) > abs(worst_shift - shift_target):
            worst_shift = shift
        factor = schatten_norm(out_uni, p) / schatten_norm(out_ext, p)
        if abs(factor - factor_target) > abs(worst_factor - factor_target):
            worst_factor = factor
    builder.add(
        TheoremCheck(
            name=f"entropy-shift({_N_BLOCK_SAMPLES} samples)",
            anchor="unital-shift-entropy",
            lhs=worst_shift,
            rhs=shift_target,
            relation="=",
            tolerance=CONSTRUCTION_TOL,
            seeds=(sample_seed,),
        ),
        time.perf_counter() - t0,
    )
    builder.add(
        TheoremCheck(
            name=f"pnorm-factor({_N_BLOCK_SAMPLES} samples)",
            anchor="unital-shift-pnorm",
            lhs=worst_factor,
            rhs=factor_target,
            relation="=",
            tolerance=CONSTRUCTION_TOL,
            seeds=(sample_seed,),
        )
    )
    return builder.report


def check_unital_reduction(
    phi: Channel,
    omega: Channel | None = None,
    cfg: OptimizerConfig = DEFAULT_CONFIG,
    workers: int = 1,
) -> VerificationReport:
    """Replay the reduction chain S_min(base (x) omega) = S_min(ext' (x) omega)
    = S_min(ext'' (x) omega) - ln(cd), asserting every link separately, with
    both channels' unital extensions certified unital."""
    omega = _default_omega(omega)
    _check_scale(phi, omega)
    d, c = phi.dim_out, phi.dim_in
    cd = c * d
    ext = bistochastic_extension(phi)
    uni = unital_extension(phi)
    omega_ext = bistochastic_extension(omega)
    omega_uni = unital_extension(omega)
    builder = _ReportBuilder([phi, omega, uni, omega_uni], cfg, {"claim": "unital-reduction"})

    t0 = time.perf_counter()
    for name, ch, tol in (
        ("phi-bistochastic-ext-residual", ext, UNITALITY_TOL),
        ("phi-unital-ext-residual", uni, UNITALITY_TOL),
        ("omega-bistochastic-ext-residual", omega_ext, UNITALITY_TOL),
        ("omega-unital-ext-residual", omega_uni, UNITALITY_TOL),
    ):
        builder.add(
            TheoremCheck(
                name=name,
                anchor="extension-bistochasticity",
                lhs=unitality_residual(ch),
                rhs=0.0,
                relation="<=",
                tolerance=tol,
            )
        )
    builder.report.timings["extension-residuals"] = time.perf_counter() - t0

    product = tensor_channel(phi, omega)
    ext_product = tensor_channel(ext, omega)
    uni_product = tensor_channel(uni, omega)

    t0 = time.perf_counter()
    cfg_a = builder.sub_config()
    v_base = min_output_entropy(product, cfg_a, workers=workers)
    cfg_b = builder.sub_config()
    v_ext = min_output_entropy(ext_product, cfg_b, workers=workers)
    cfg_c = builder.sub_config()
    v_uni = min_output_entropy(uni_product, cfg_c, workers=workers)
    elapsed = time.perf_counter() - t0

    builder.add(
        TheoremCheck(
            name="reduction-link-bistochastic",
            anchor="moe-transfer-equality",
            lhs=v_ext.value,
            rhs=v_base.value,
            relation="=",
            tolerance=CCOE_SOLVER_TOL,
            seeds=(cfg_a.seed, cfg_b.seed),
        ),
        elapsed,
    )
    builder.add(
        TheoremCheck(
            name="reduction-link-unital-shift",
            anchor="unital-shift-entropy",
            lhs=v_uni.value,
            rhs=v_ext.value + math.log(cd),
            relation="=",
            tolerance=CCOE_SOLVER_TOL,
            seeds=(cfg_b.seed, cfg_c.seed),
        )
    )
    builder.add(
        TheoremCheck(
            name="reduction-chain-closure",
            anchor="unital-reduction-chain",
            lhs=v_base.value,
            rhs=v_uni.value - math.log(cd),
            relation="=",
            tolerance=CCOE_SOLVER_TOL,
            seeds=(cfg_a.seed, cfg_c.seed),
        )
    )
    return builder.report


def _apply_to_pure(ch: Channel, psi: np.ndarray) -> np.ndarray:
    from . import _kernels

    psi = np.ascontiguousarray(np.asarray(psi, dtype=np.complex128))
    return _kernels.output_of_pure(ch.kraus, psi)


def _p_json(p: float):
    return "inf" if p == math.inf else float(p)
