import numpy as np
import pytest

import plantedlab as pl
from plantedlab.errors import InvalidSpec
from plantedlab.models import (
    EdgeListGraph, _sample_sbm_layer, haar_orthogonal_batch,
    instance_from_json, instance_to_json, sample_null, sample_planted,
    symmetric_gaussian,
)
from plantedlab.rng import RandomStream


def wilson99(k, n):
    return pl.wilson_interval(k, n, z=2.5758293035489004)


# ---------------------------------------------------------------------------
# spec validation
# ---------------------------------------------------------------------------

def test_invalid_specs_rejected():
    with pytest.raises(InvalidSpec):
        pl.PlantedSubmatrix(n=5, lam=-1.0, rho=0.5)
    with pytest.raises(InvalidSpec):
        pl.PlantedDenseSubgraph(n=5, rho=0.5, p0=0.7, p1=0.4)
    with pytest.raises(InvalidSpec):
        pl.SBM(n=10, q=2, d=8.0, lam=0.9)  # within-community prob > 1
    with pytest.raises(InvalidSpec):
        pl.MultiLayerSBM(n=10, q=2, L=2, rho=0.5, d_layers=(1.0,),
                         lam_layers=(0.5, 0.5))


def test_sbm_probabilities():
    # lam = 1 zeroes the cross-community rate
    spec = pl.SBM(n=10, q=2, d=3.0, lam=1.0)
    assert spec.p_in == pytest.approx(0.6)
    assert spec.p_out == 0.0


# ---------------------------------------------------------------------------
# determinism
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("spec", [
    pl.PlantedSubmatrix(n=20, lam=0.8, rho=0.3),
    pl.SBM(n=25, q=3, d=4.0, lam=0.5),
    pl.AngularSync(n=8, L=2, lam=0.6),
    pl.OrthSync(n=5, d=2, lam=0.4),
    pl.MultiLayerSBM(n=15, q=2, L=2, rho=0.7, d_layers=(3.0, 2.0),
                     lam_layers=(0.4, 0.6)),
])
def test_sampler_determinism(spec):
    a = sample_planted(spec, RandomStream(11, 4))
    b = sample_planted(spec, RandomStream(11, 4))
    assert np.array_equal(np.asarray(a.observation), np.asarray(b.observation))
    for key in a.latent:
        assert np.array_equal(a.latent[key], b.latent[key])
    c = sample_planted(spec, RandomStream(11, 5))
    assert not np.array_equal(np.asarray(a.observation), np.asarray(c.observation))


# ---------------------------------------------------------------------------
# planted submatrix
# ---------------------------------------------------------------------------

def test_submatrix_rho_one_gives_all_ones_theta():
    inst = sample_planted(pl.PlantedSubmatrix(n=3, lam=1.0, rho=1.0),
                          RandomStream(0))
    assert np.array_equal(inst.latent["theta"], np.ones(3))
    assert np.array_equal(inst.theta_matrix, np.ones((3, 3)))


def test_submatrix_lam_zero_matches_null_law():
    # same stream: the lam=0 planted draw is the null draw plus a zero matrix
    planted = sample_planted(pl.PlantedSubmatrix(n=12, lam=0.0, rho=0.5),
                             RandomStream(3))
    assert np.allclose(planted.theta_matrix, 0.0)
    obs = planted.observation
    assert np.allclose(obs, obs.T)


def test_submatrix_noise_variances():
    gen = RandomStream(9).generator()
    diag, off = [], []
    for _ in range(60):
        w = symmetric_gaussian(40, gen, diag_var=2.0)
        diag.append(np.diag(w))
        off.append(w[np.triu_indices(40, k=1)])
    dv = np.var(np.concatenate(diag))
    ov = np.var(np.concatenate(off))
    assert abs(dv - 2.0) < 0.12   # 2400 samples, var of var ~ 2*4/2400
    assert abs(ov - 1.0) < 0.02


def test_submatrix_null_mean_centered():
    gen = RandomStream(5).generator()
    entries = np.concatenate([
        symmetric_gaussian(50, gen)[np.triu_indices(50)] for _ in range(80)
    ])
    assert len(entries) >= 10 ** 5
    assert abs(entries.mean()) < 4 * entries.std() / np.sqrt(len(entries))


def test_submatrix_theta_norm_concentration():
    # rho sqrt(n) = 4: ||Theta||_F / (lam rho n) in [1/2, 2] at least 99%
    spec = pl.PlantedSubmatrix(n=100, lam=0.7, rho=0.4)
    ok = 0
    trials = 400
    for i in range(trials):
        inst = sample_planted(spec, RandomStream(21, i))
        ratio = np.linalg.norm(inst.theta_matrix) / (spec.lam * spec.rho * spec.n)
        ok += 1 / 2 <= ratio <= 2
    assert ok / trials >= 0.99


# ---------------------------------------------------------------------------
# binary models: conditional edge frequencies (Wilson 99%)
# ---------------------------------------------------------------------------

def test_pds_conditional_edge_frequencies():
    spec = pl.PlantedDenseSubgraph(n=60, rho=0.3, p0=0.2, p1=0.55)
    in_edges = in_pairs = out_edges = out_pairs = 0
    for i in range(80):
        inst = sample_planted(spec, RandomStream(33, i))
        theta = inst.latent["theta"].astype(bool)
        iu = np.triu_indices(spec.n, k=1)
        planted_pair = theta[iu[0]] & theta[iu[1]]
        obs = inst.observation[iu]
        in_edges += int(obs[planted_pair].sum())
        in_pairs += int(planted_pair.sum())
        out_edges += int(obs[~planted_pair].sum())
        out_pairs += int((~planted_pair).sum())
    assert out_pairs > 10 ** 5
    lo, hi = wilson99(in_edges, in_pairs)
    assert lo <= spec.p1 <= hi
    lo, hi = wilson99(out_edges, out_pairs)
    assert lo <= spec.p0 <= hi


def test_pds_null_edge_frequency_half():
    spec = pl.PlantedDenseSubgraph(n=80, rho=0.2, p0=0.5, p1=0.5)
    total = pairs = 0
    for i in range(40):
        inst = sample_null(spec, RandomStream(17, i))
        iu = np.triu_indices(spec.n, k=1)
        total += int(inst.observation[iu].sum())
        pairs += len(iu[0])
    freq = total / pairs
    assert abs(freq - 0.5) <= 3 / np.sqrt(pairs)


def test_sbm_conditional_edge_frequencies():
    spec = pl.SBM(n=70, q=3, d=10.0, lam=0.6)
    same_e = same_p = cross_e = cross_p = 0
    for i in range(60):
        inst = sample_planted(spec, RandomStream(41, i))
        sig = inst.latent["sigma"]
        iu = np.triu_indices(spec.n, k=1)
        same = sig[iu[0]] == sig[iu[1]]
        obs = inst.observation[iu]
        same_e += int(obs[same].sum())
        same_p += int(same.sum())
        cross_e += int(obs[~same].sum())
        cross_p += int((~same).sum())
    lo, hi = wilson99(same_e, same_p)
    assert lo <= spec.p_in <= hi
    lo, hi = wilson99(cross_e, cross_p)
    assert lo <= spec.p_out <= hi


def test_multilayer_label_flip_rate():
    spec = pl.MultiLayerSBM(n=200, q=4, L=3, rho=0.5,
                            d_layers=(3.0, 3.0, 3.0),
                            lam_layers=(0.5, 0.5, 0.5))
    keep = total = 0
    for i in range(30):
        inst = sample_planted(spec, RandomStream(55, i))
        keep += int((inst.latent["sigma_layers"] == inst.latent["sigma"]).sum())
        total += spec.n * spec.L
    target = (1 + (spec.q - 1) * spec.rho) / spec.q
    assert abs(keep / total - target) <= 3 / np.sqrt(total)


# ---------------------------------------------------------------------------
# synchronization models
# ---------------------------------------------------------------------------

def test_angular_null_second_moment():
    # off-diagonal complex entries have E|Y_ij|^2 = 1
    spec = pl.AngularSync(n=40, L=2, lam=0.3)
    vals = []
    for i in range(40):
        inst = sample_null(spec, RandomStream(61, i))
        for ell in range(spec.L):
            m = inst.observation[ell]
            assert np.allclose(m, m.conj().T)
            vals.append(np.abs(m[np.triu_indices(spec.n, k=1)]) ** 2)
    vals = np.concatenate(vals)
    assert abs(vals.mean() - 1.0) <= 4 * vals.std() / np.sqrt(len(vals))


def test_angular_planted_signal():
    spec = pl.AngularSync(n=12, L=2, lam=0.8)
    inst = sample_planted(spec, RandomStream(62))
    x = np.exp(1j * inst.latent["phases"])
    for ell in (1, 2):
        expected = spec.lam / np.sqrt(spec.n) * np.outer(x ** ell,
                                                         (x ** ell).conj())
        assert np.allclose(inst.theta_matrix[ell - 1], expected)


def test_orth_sync_block_structure():
    spec = pl.OrthSync(n=4, d=3, lam=1.5)
    inst = sample_planted(spec, RandomStream(63))
    blocks = inst.latent["blocks"]
    theta = inst.theta_matrix
    for i in range(spec.n):
        for j in range(spec.n):
            bl = theta[i * 3:(i + 1) * 3, j * 3:(j + 1) * 3]
            expected = spec.lam / np.sqrt(spec.n) * blocks[i].T @ blocks[j]
            assert np.allclose(bl, expected)


# ---------------------------------------------------------------------------
# Haar sampling
# ---------------------------------------------------------------------------

def test_haar_orthogonality():
    for d in (1, 2, 5, 8):
        o = pl.haar_orthogonal(d, RandomStream(71, d))
        assert np.abs(o.T @ o - np.eye(d)).max() <= 1e-10


def test_haar_d1_sign_frequency():
    gen = RandomStream(72).generator()
    draws = haar_orthogonal_batch(1, 4000, gen)[:, 0, 0]
    assert set(np.round(np.abs(draws), 12)) == {1.0}
    freq = (draws > 0).mean()
    assert abs(freq - 0.5) <= 3 / np.sqrt(4000)


def test_haar_d2_second_moment():
    gen = RandomStream(73).generator()
    draws = haar_orthogonal_batch(2, 6000, gen)[:, 0, 0]
    assert abs((draws ** 2).mean() - 0.5) <= 3 / np.sqrt(6000)


def test_haar_left_invariance():
    gen = RandomStream(74).generator()
    o = haar_orthogonal_batch(3, 5000, gen)
    r = pl.haar_orthogonal(3, RandomStream(75))
    ro = np.einsum("ij,njk->nik", r, o)
    # compare first-entry second moments of O and RO (both should be 1/d)
    m1 = (o[:, 0, 0] ** 2).mean()
    m2 = (ro[:, 0, 0] ** 2).mean()
    se = np.sqrt(np.var(o[:, 0, 0] ** 2) / 5000)
    assert abs(m1 - m2) <= 5 * se
    assert abs(m1 - 1 / 3) <= 5 * se


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("spec", [
    pl.PlantedSubmatrix(n=6, lam=1.2, rho=0.4),
    pl.SBM(n=8, q=2, d=3.0, lam=0.7),
    pl.AngularSync(n=4, L=2, lam=0.5),
    pl.MultiLayerSBM(n=6, q=2, L=2, rho=0.3, d_layers=(2.0, 2.5),
                     lam_layers=(0.5, 0.6)),
])
def test_instance_json_roundtrip(spec):
    inst = sample_planted(spec, RandomStream(81))
    doc = instance_to_json(inst)
    back = instance_from_json(doc)
    assert back.spec == inst.spec
    assert np.allclose(np.asarray(back.observation),
                       np.asarray(inst.observation))
    for key in inst.latent:
        assert np.allclose(back.latent[key], inst.latent[key])
    assert np.allclose(back.theta_matrix, inst.theta_matrix)


def test_edge_list_roundtrip_lossless():
    g = EdgeListGraph(n=6, edges=np.array([[0, 1], [2, 5], [1, 3]]))
    dense = g.to_dense()
    assert dense.sum() == 6  # three undirected edges
    assert np.array_equal(dense, dense.T)
    iu = np.triu_indices(6, k=1)
    pairs = {(i, j) for i, j in zip(*iu) if dense[i, j]}
    assert pairs == {(0, 1), (2, 5), (1, 3)}


def test_sparse_sampler_beyond_dense_limit(monkeypatch):
    import plantedlab.models as models
    monkeypatch.setattr(models, "DENSE_GRAPH_LIMIT", 30)
    spec = pl.SBM(n=100, q=2, d=5.0, lam=0.5)
    inst = models.sample_planted(spec, RandomStream(91))
    assert isinstance(inst.observation, EdgeListGraph)
    edges = inst.observation.edges
    assert np.all(edges[:, 0] < edges[:, 1])
    # expected edge count ~ n d / 2 = 250 with binomial fluctuation
    assert 150 <= len(edges) <= 370
    again = models.sample_planted(spec, RandomStream(91))
    assert np.array_equal(edges, again.observation.edges)
    # thinning preserves the conditional law: same-community edges at p_in
    sig = inst.latent["sigma"]
    same_edges = int((sig[edges[:, 0]] == sig[edges[:, 1]]).sum())
    same_pairs = sum(
        int((sig[i + 1:] == sig[i]).sum()) for i in range(spec.n)
    )
    lo, hi = wilson99(same_edges, same_pairs)
    assert lo <= spec.p_in <= hi


def test_sbm_layer_helper_matches_theta():
    spec = pl.SBM(n=20, q=3, d=4.0, lam=0.5)
    gen = RandomStream(95).generator()
    sigma = gen.integers(0, 3, size=20)
    y, theta = _sample_sbm_layer(spec, sigma, gen)
    same = sigma[:, None] == sigma[None, :]
    expected = np.where(same, 2.0, -1.0) * (spec.lam * spec.d / spec.n)
    np.fill_diagonal(expected, 0.0)
    assert np.allclose(theta, expected)
    assert set(np.unique(y)) <= {0, 1}
