import math

import numpy as np
import pytest

from qchanlab.channels import (
    apply,
    completely_depolarizing_channel,
    identity_channel,
    random_channel,
    tensor_channel,
    validate,
)
from qchanlab.errors import DomainError
from qchanlab.extensions import (
    bistochastic_extension,
    build_extension_bundle,
    bundle_from_json,
    bundle_to_json,
    diagonal_block,
    dumps_bundle,
    embed_input,
    embed_selector,
    load_bundle,
    save_bundle,
    unital_extension,
)
from qchanlab.linalg import (
    max_abs,
    maximally_mixed,
    partial_trace,
    projector,
    random_density_matrix,
    schatten_norm,
    tensor,
    von_neumann_entropy,
)
from qchanlab.weyl import build_weyl


class TestEmbedSelector:
    def test_first_block_selector(self):
        sel = embed_selector((0, 0), 2, 2)
        expected = np.hstack([np.eye(2), np.zeros((2, 6))])
        assert sel.shape == (2, 8)
        assert max_abs(sel - expected) == 0.0

    def test_completeness(self):
        acc = np.zeros((8, 8), dtype=complex)
        for z in range(4):
            sel = embed_selector(z, 2, 2)
            acc += sel.conj().T @ sel
        assert max_abs(acc - np.eye(8)) == 0.0

    def test_extracts_diagonal_block(self):
        rng = np.random.default_rng(0)
        rho_hat = random_density_matrix(8, rng)
        for z in range(4):
            sel = embed_selector(z, 2, 2)
            block = sel @ rho_hat @ sel.conj().T
            assert max_abs(block - diagonal_block(rho_hat, z, 2)) < 1e-15

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            embed_selector((2, 0), 2, 2)


class TestBistochasticExtension:
    def test_dimensions_and_kraus_count(self):
        phi = identity_channel(2)
        ext = bistochastic_extension(phi)
        assert (ext.dim_in, ext.dim_out) == (8, 2)
        assert ext.n_kraus == 4
        assert max_abs(apply(ext, maximally_mixed(8)) - maximally_mixed(2)) <= 1e-12

        wide = random_channel(2, 3, env_dim=2, seed=1)
        ext2 = bistochastic_extension(wide)
        assert ext2.n_kraus == 18
        assert ext2.dim_in == 9 * 2

    def test_completely_depolarizing_maps_everything_to_noise(self):
        ext = bistochastic_extension(completely_depolarizing_channel(2))
        rng = np.random.default_rng(2)
        for _ in range(10):
            sigma = random_density_matrix(8, rng)
            assert max_abs(apply(ext, sigma) - maximally_mixed(2)) <= 1e-12

    @pytest.mark.parametrize("d,c", [(2, 2), (2, 3), (3, 2), (3, 3)])
    def test_bistochastic_for_random_channels(self, d, c):
        for seed in range(5):
            phi = random_channel(c, d, seed=seed)
            ext = bistochastic_extension(phi)
            report = validate(ext)
            assert report.tp_residual <= 1e-10
            assert report.unitality_residual <= 1e-10
            assert report.kind in ("bistochastic", "unital")

    def test_embedding_equality(self):
        rng = np.random.default_rng(3)
        for seed in range(3):
            phi = random_channel(2, 2, seed=seed)
            ext = bistochastic_extension(phi)
            for _ in range(50):
                rho = random_density_matrix(2, rng)
                lhs = apply(ext, embed_input(rho, 2))
                rhs = apply(phi, rho)
                assert max_abs(lhs - rhs) <= 1e-12

    def test_covariance_on_every_block(self):
        phi = random_channel(2, 2, seed=4)
        ext = bistochastic_extension(phi)
        ws = build_weyl(2)
        rng = np.random.default_rng(5)
        rho = random_density_matrix(2, rng)
        for z in range(4):
            basis = np.zeros(4, dtype=complex)
            basis[z] = 1.0
            block_state = tensor(projector(basis), rho)
            lhs = apply(ext, block_state)
            w = ws.ops[z]
            rhs = w @ apply(phi, rho) @ w.conj().T
            assert max_abs(lhs - rhs) <= 1e-12

    def test_off_diagonal_blocks_are_ignored(self):
        phi = random_channel(2, 2, seed=6)
        ext = bistochastic_extension(phi)
        rng = np.random.default_rng(7)
        base = random_density_matrix(8, rng)
        # re-randomize strictly off-diagonal blocks, keeping Hermiticity
        noise = np.zeros((8, 8), dtype=complex)
        for zi in range(4):
            for zj in range(zi + 1, 4):
                blk = 0.05 * (
                    rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
                )
                noise[2 * zi : 2 * zi + 2, 2 * zj : 2 * zj + 2] = blk
        perturbed = base + noise + noise.conj().T
        assert max_abs(apply(ext, perturbed) - apply(ext, base)) <= 1e-12


class TestUnitalExtension:
    def test_square_and_unital(self):
        for seed in range(3):
            phi = random_channel(2, 2, seed=seed)
            uni = unital_extension(phi)
            assert uni.dim_in == uni.dim_out == 8
            report = validate(uni)
            assert report.kind == "unital"
            assert report.unitality_residual <= 1e-10

    def test_matches_map_definition_on_spanning_set(self):
        # the chosen Kraus family must reproduce I_bar (x) ext'(.) exactly
        phi = random_channel(2, 2, seed=8)
        ext = bistochastic_extension(phi)
        uni = unital_extension(phi)
        cd = 4
        for i in range(8):
            for j in range(8):
                unit = np.zeros((8, 8), dtype=complex)
                unit[i, j] = 1.0
                got = apply(uni, unit)
                want = tensor(maximally_mixed(cd), apply(ext, unit))
                assert max_abs(got - want) <= 1e-12

    def test_entropy_shift_and_pnorm_factor_with_tensor_factor(self):
        phi = random_channel(2, 2, seed=9)
        omega = random_channel(2, 2, seed=10)
        ext_prod = tensor_channel(bistochastic_extension(phi), omega)
        uni_prod = tensor_channel(unital_extension(phi), omega)
        cd = 4
        rng = np.random.default_rng(11)
        for _ in range(20):
            rho_hat = random_density_matrix(ext_prod.dim_in, rng)
            out_e = apply(ext_prod, rho_hat)
            out_u = apply(uni_prod, rho_hat)
            shift = von_neumann_entropy(out_u, validate=False) - von_neumann_entropy(
                out_e, validate=False
            )
            assert shift == pytest.approx(math.log(cd), abs=1e-9)
            for p in (1.5, 2.0, math.inf):
                factor = cd ** ((1 - p) / p) if p != math.inf else 1 / cd
                lhs = schatten_norm(out_u, p)
                rhs = factor * schatten_norm(out_e, p)
                assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_kraus_count(self):
        phi = random_channel(2, 2, env_dim=4, seed=12)
        assert unital_extension(phi).n_kraus == 4 * 4 * 4


class TestEmbedInput:
    def test_specialization_without_second_factor(self):
        phi = random_channel(3, 2, seed=13)
        ext = bistochastic_extension(phi)
        rng = np.random.default_rng(14)
        rho = random_density_matrix(3, rng)
        assert max_abs(apply(ext, embed_input(rho, 2)) - apply(phi, rho)) <= 1e-12

    def test_with_tensor_factor(self):
        phi = random_channel(2, 2, seed=15)
        omega = random_channel(2, 2, seed=16)
        ext_prod = tensor_channel(bistochastic_extension(phi), omega)
        prod = tensor_channel(phi, omega)
        rng = np.random.default_rng(17)
        for _ in range(10):
            rho = random_density_matrix(4, rng)
            lhs = apply(ext_prod, embed_input(rho, 2))
            rhs = apply(prod, rho)
            assert max_abs(lhs - rhs) <= 1e-12

    def test_trace_preserved(self):
        rng = np.random.default_rng(18)
        rho = random_density_matrix(4, rng)
        emb = embed_input(rho, 2)
        assert np.trace(emb).real == pytest.approx(1.0, abs=1e-14)


class TestConcavityLowerBound:
    def test_block_average_bounds_extension_entropy(self):
        phi = random_channel(2, 2, seed=19)
        omega = identity_channel(2)
        prod = tensor_channel(phi, omega)
        ext_prod = tensor_channel(bistochastic_extension(phi), omega)
        rng = np.random.default_rng(20)
        for _ in range(20):
            rho_hat = random_density_matrix(16, rng)
            lhs = von_neumann_entropy(apply(ext_prod, rho_hat), validate=False)
            avg = 0.0
            for z in range(4):
                block = diagonal_block(rho_hat, z, 2)
                w = float(np.trace(block).real)
                if w < 1e-14:
                    continue
                avg += w * von_neumann_entropy(apply(prod, block / w), validate=False)
            assert lhs >= avg - 1e-9


class TestBundle:
    def test_round_trip(self, tmp_path):
        bundle = build_extension_bundle(random_channel(2, 2, seed=21))
        path = tmp_path / "bundle.json"
        save_bundle(path, bundle)
        again = load_bundle(path)
        assert again.d == bundle.d and again.c == bundle.c
        assert max_abs(again.bistochastic_ext.kraus - bundle.bistochastic_ext.kraus) == 0.0
        assert max_abs(again.unital_ext.kraus - bundle.unital_ext.kraus) == 0.0

    def test_json_carries_convention_tag(self):
        bundle = build_extension_bundle(identity_channel(2))
        obj = bundle_to_json(bundle)
        assert obj["weyl_index_convention"] == "z=(x,y)->x*d+y"
        rebuilt = bundle_from_json(obj)
        assert rebuilt.weyl.dim == 2

    def test_dumps_stable(self):
        bundle = build_extension_bundle(identity_channel(2))
        assert dumps_bundle(bundle) == dumps_bundle(
            bundle_from_json(bundle_to_json(bundle))
        )


def test_marginal_consistency_of_embedding():
    # embedding leaves the second-factor marginal untouched
    rng = np.random.default_rng(22)
    rho = random_density_matrix(4, rng)
    emb = embed_input(rho, 2)
    marg = partial_trace(emb, (8, 2), 1)
    assert max_abs(marg - partial_trace(rho, (2, 2), 1)) <= 1e-12
