"""Acceptance suite: one test per criterion, each printing a PASS line with
its measured runtime. Tolerances and budgets are pinned, not calibrated."""

import json
import math
import time

import numpy as np
import pytest

from helpers import numeric_gradient, rel_error

from qchanlab.channels import (
    Channel,
    apply,
    completely_depolarizing_channel,
    depolarizing_channel,
    identity_channel,
    random_channel,
    tensor_channel,
    validate,
)
from qchanlab.cli import main as cli_main
from qchanlab.extensions import (
    bistochastic_extension,
    diagonal_block,
    embed_input,
    unital_extension,
)
from qchanlab.linalg import (
    max_abs,
    maximally_mixed,
    projector,
    random_density_matrix,
    random_pure_state,
    schatten_norm,
    tensor,
    von_neumann_entropy,
)
from qchanlab.solvers import (
    OptimizerConfig,
    brute_force_oracle,
    convex_closure,
    max_output_pnorm,
    min_output_entropy,
    moe_value_and_grad,
    pnorm_value_and_grad,
    roof_value_and_grad,
    sqrt_factor,
)
from qchanlab.weyl import build_weyl, complete_noise_residual

DEPOL_HALF_MOE = -(0.75 * math.log(0.75) + 0.25 * math.log(0.25))  # 0.5623351...
DEPOL_HALF_NU2 = math.sqrt(10.0) / 4.0  # 0.7905694...

DEFAULT = OptimizerConfig()
TRANSFER = OptimizerConfig(restarts=12, max_iterations=800, seed=0)


@pytest.fixture(scope="module", autouse=True)
def warm_kernels():
    """JIT compilation is a build cost, not part of any criterion's budget."""
    phi = random_channel(2, 2, seed=0)
    cfg = OptimizerConfig(restarts=1, max_iterations=5, seed=0)
    min_output_entropy(phi, cfg)
    max_output_pnorm(phi, 1.5, cfg)
    max_output_pnorm(phi, math.inf, cfg)
    convex_closure(phi, maximally_mixed(2), cfg)
    brute_force_oracle(phi, "moe", samples=64, seed=0)
    brute_force_oracle(phi, "pnorm", samples=64, seed=0, p=2.0)


def _report(number: int, label: str, started: float, budget: float):
    elapsed = time.time() - started
    print(f"ACCEPTANCE {number:02d} [{label}]: PASS ({elapsed:.2f}s / budget {budget:.0f}s)")
    assert elapsed < budget, f"criterion {number} exceeded its runtime budget"


def test_criterion_01_complete_noise_identity():
    started = time.time()
    worst = 0.0
    for d in range(2, 7):
        ws = build_weyl(d)
        rng = np.random.default_rng(d)
        for _ in range(50):
            rho = random_density_matrix(d, rng)
            worst = max(worst, complete_noise_residual(ws, rho))
    assert worst <= 1e-12
    _report(1, "complete-noise identity", started, 1.0)


def test_criterion_02_cptp_validation():
    started = time.time()
    rng = np.random.default_rng(2)
    channels = []
    for _ in range(100):
        din = int(rng.integers(2, 5))
        dout = int(rng.integers(2, 5))
        env = int(rng.integers(1, 17))
        if dout * env < din:
            env = din  # keep the isometry feasible
        seed = int(rng.integers(0, 2**31))
        channels.append(random_channel(din, dout, env_dim=env, seed=seed))
    for phi in channels:
        assert validate(phi).tp_residual <= 1e-10
    # deliberately corrupted fixtures must all fail
    base = channels[0]
    corrupted = [
        Channel(base.dim_in, base.dim_out, 0.9 * base.kraus, label="scaled"),
        Channel(base.dim_in, base.dim_out, base.kraus[:-1], label="dropped"),
        Channel(
            base.dim_in,
            base.dim_out,
            np.concatenate([base.kraus[:-1], np.zeros_like(base.kraus[:1])]),
            label="zeroed",
        ),
    ]
    for broken in corrupted:
        assert not validate(broken).valid
    _report(2, "CPTP validation", started, 5.0)


def test_criterion_03_bistochastic_extension():
    started = time.time()
    rng = np.random.default_rng(3)
    ws_cache = {d: build_weyl(d) for d in (2, 3)}
    combos = [(2, 2), (2, 3), (3, 2), (3, 3)]
    for i in range(50):
        c, d = combos[i % 4]
        phi = random_channel(c, d, seed=1000 + i)
        ext = bistochastic_extension(phi, ws_cache[d])
        assert max_abs(
            apply(ext, maximally_mixed(ext.dim_in)) - maximally_mixed(d)
        ) <= 1e-10
        for _ in range(50):
            rho = random_density_matrix(c, rng)
            assert max_abs(apply(ext, embed_input(rho, d)) - apply(phi, rho)) <= 1e-12
        rho = random_density_matrix(c, rng)
        base_out = apply(phi, rho)
        for z in range(d * d):
            basis = np.zeros(d * d, dtype=complex)
            basis[z] = 1.0
            w_op = ws_cache[d].ops[z]
            lhs = apply(ext, tensor(projector(basis), rho))
            assert max_abs(lhs - w_op @ base_out @ w_op.conj().T) <= 1e-12
    _report(3, "bistochastic extension", started, 30.0)


def test_criterion_04_unital_shift_values():
    started = time.time()
    omega = identity_channel(2)
    cd = 4
    for i in range(10):
        phi = random_channel(2, 2, seed=2000 + i)
        uni = unital_extension(phi)
        assert validate(uni).unitality_residual <= 1e-10
        ext_prod = tensor_channel(bistochastic_extension(phi), omega)
        uni_prod = tensor_channel(uni, omega)
        rng = np.random.default_rng(4000 + i)
        for _ in range(20):
            rho_hat = random_density_matrix(ext_prod.dim_in, rng)
            out_e = apply(ext_prod, rho_hat)
            out_u = apply(uni_prod, rho_hat)
            shift = von_neumann_entropy(out_u, validate=False) - von_neumann_entropy(
                out_e, validate=False
            )
            assert abs(shift - math.log(cd)) <= 1e-9
            for p in (1.5, 2.0, math.inf):
                factor = cd ** ((1 - p) / p) if p != math.inf else 1 / cd
                assert abs(
                    schatten_norm(out_u, p) - factor * schatten_norm(out_e, p)
                ) <= 1e-9
    _report(4, "unital-extension shifts", started, 60.0)


def test_criterion_05_solver_ground_truth():
    started = time.time()
    for d in (2, 3):
        assert min_output_entropy(identity_channel(d), DEFAULT).value <= 1e-8
        cd_val = min_output_entropy(completely_depolarizing_channel(d), DEFAULT).value
        assert abs(cd_val - math.log(d)) <= 1e-8
    depol = depolarizing_channel(2, 0.5)
    assert abs(min_output_entropy(depol, DEFAULT).value - DEPOL_HALF_MOE) <= 1e-6
    assert abs(max_output_pnorm(depol, 2.0, DEFAULT).value - DEPOL_HALF_NU2) <= 1e-6
    _report(5, "solver ground truth (default config)", started, 60.0)


def test_criterion_06_oracle_equivalence():
    started = time.time()
    cfg = OptimizerConfig(restarts=16, max_iterations=800, seed=6)
    for seed in range(10):
        phi = random_channel(2, 2, seed=5000 + seed)
        solver_moe = min_output_entropy(phi, cfg, workers=4).value
        oracle_moe = brute_force_oracle(phi, "moe", samples=100_000, seed=seed)
        assert abs(solver_moe - oracle_moe) <= 1e-3
        solver_nu2 = max_output_pnorm(phi, 2.0, cfg, workers=4).value
        oracle_nu2 = brute_force_oracle(phi, "pnorm", samples=100_000, seed=seed, p=2.0)
        assert abs(solver_nu2 - oracle_nu2) <= 1e-3
    _report(6, "solver/oracle agreement", started, 300.0)


def test_criterion_07_transfer_equalities():
    started = time.time()
    for i in range(10):
        phi = random_channel(2, 2, seed=100 + i)
        ext = bistochastic_extension(phi)
        omegas = (identity_channel(2), random_channel(2, 2, seed=300 + i))
        for omega in omegas:
            prod = tensor_channel(phi, omega)
            ext_prod = tensor_channel(ext, omega)
            v_base = min_output_entropy(
                prod, TRANSFER.with_seed(17 + i), workers=4
            ).value
            v_ext = min_output_entropy(
                ext_prod, TRANSFER.with_seed(1017 + i), workers=4
            ).value
            assert abs(v_base - v_ext) <= 2e-4
            for p in (1.5, 2.0):
                n_base = max_output_pnorm(
                    prod, p, TRANSFER.with_seed(27 + i), workers=4
                ).value
                n_ext = max_output_pnorm(
                    ext_prod, p, TRANSFER.with_seed(2027 + i), workers=4
                ).value
                assert abs(n_base - n_ext) <= 1e-4
            # concavity chain on sampled block states
            rng = np.random.default_rng(7000 + i)
            for _ in range(10):
                rho_hat = random_density_matrix(ext_prod.dim_in, rng)
                lhs = von_neumann_entropy(apply(ext_prod, rho_hat), validate=False)
                avg = 0.0
                for z in range(4):
                    block = diagonal_block(rho_hat, z, 2)
                    w = float(np.trace(block).real)
                    if w < 1e-14:
                        continue
                    avg += w * von_neumann_entropy(
                        apply(prod, block / w), validate=False
                    )
                assert lhs >= avg - 1e-9
    _report(7, "transfer equalities", started, 900.0)


def test_criterion_08_convex_closure():
    started = time.time()
    small = OptimizerConfig(restarts=4, max_iterations=300, seed=8)
    rng = np.random.default_rng(8)
    for _ in range(20):
        rho = random_density_matrix(2, rng)
        assert convex_closure(identity_channel(2), rho, small).value <= 1e-6
    for seed in range(3):
        phi = random_channel(2, 2, seed=6000 + seed)
        psi = random_pure_state(2, rng)
        roof = convex_closure(phi, projector(psi), small).value
        direct = von_neumann_entropy(apply(phi, projector(psi)), validate=False)
        assert abs(roof - direct) <= 1e-9
    # transfer equality at the embedded state on 5 random qubit instances
    for i in range(5):
        phi = random_channel(2, 2, seed=6100 + i)
        omega = identity_channel(2) if i % 2 == 0 else random_channel(2, 2, seed=6200 + i)
        prod = tensor_channel(phi, omega)
        ext_prod = tensor_channel(bistochastic_extension(phi), omega)
        rho = random_density_matrix(4, rng)
        h_base = convex_closure(
            prod, rho, TRANSFER.with_seed(47 + i), workers=4
        ).value
        h_ext = convex_closure(
            ext_prod, embed_input(rho, 2), TRANSFER.with_seed(4047 + i), workers=4
        ).value
        assert abs(h_base - h_ext) <= 5e-4
    _report(8, "convex closure", started, 900.0)


def test_criterion_09_replay_determinism(tmp_path):
    started = time.time()
    blobs = {}
    for tag, workers in (("a", "1"), ("b", "8"), ("c", "1")):
        out = tmp_path / f"report_{tag}.json"
        code = cli_main([
            "verify", "--theorem", "1-moe",
            "--phi", "depolarizing:2:0.5", "--omega", "identity:2",
            "--seed", "9", "--restarts", "8", "--max-iter", "400",
            "--workers", workers, "-o", str(out),
        ])
        assert code == 0
        blobs[tag] = out.read_bytes()
    assert blobs["a"] == blobs["b"], "worker count changed the report"
    assert blobs["a"] == blobs["c"], "identical rerun changed the report"
    opt_blobs = {}
    for tag, workers in (("a", "1"), ("b", "8")):
        out = tmp_path / f"moe_{tag}.json"
        assert cli_main([
            "moe", "depolarizing:2:0.5", "--seed", "9", "--restarts", "8",
            "--max-iter", "400", "--workers", workers, "-o", str(out),
        ]) == 0
        opt_blobs[tag] = out.read_bytes()
    assert opt_blobs["a"] == opt_blobs["b"]
    json.loads(blobs["a"])  # artifacts stay parseable
    _report(9, "replay determinism", started, 120.0)


def test_criterion_10_gradient_contract():
    started = time.time()
    for point in range(10):
        rng = np.random.default_rng(900 + point)
        phi = random_channel(3, 2, seed=point)
        psi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        psi = (psi / np.linalg.norm(psi)).astype(complex)
        _, grad = moe_value_and_grad(phi, psi)
        fd = numeric_gradient(lambda x: moe_value_and_grad(phi, x)[0], psi)
        assert rel_error(grad, fd) <= 1e-4
    for p in (1.5, 2.0):
        for point in range(10):
            rng = np.random.default_rng(950 + point)
            phi = random_channel(2, 2, seed=point)
            psi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            psi = (psi / np.linalg.norm(psi)).astype(complex)
            _, grad = pnorm_value_and_grad(phi, psi, p)
            fd = numeric_gradient(lambda x: pnorm_value_and_grad(phi, x, p)[0], psi)
            assert rel_error(grad, fd) <= 1e-4
    for point in range(10):
        rng = np.random.default_rng(980 + point)
        phi = random_channel(2, 2, seed=point)
        bfac = sqrt_factor(random_density_matrix(2, rng))
        rank = bfac.shape[1]
        mix = rng.standard_normal((rank * rank, rank)) + 1j * rng.standard_normal(
            (rank * rank, rank)
        )
        _, grad = roof_value_and_grad(phi, bfac, mix)
        fd = numeric_gradient(lambda m: roof_value_and_grad(phi, bfac, m)[0], mix)
        assert rel_error(grad, fd) <= 1e-4
    _report(10, "gradient contract", started, 120.0)
