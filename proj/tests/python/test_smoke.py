import numpy as np
import pytest

import adnpca


def small_spec(seed=0):
    spec = adnpca.BenchmarkSpec()
    spec.seed = seed
    spec.n_train = 600
    spec.n_test = 200
    spec.d = 16
    spec.k_true = 4
    return spec


def test_whitening_matches_explicit_inverse():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(6, 6))
    x = rng.normal(size=(40, 6)) @ a.T
    model = adnpca.spectral_decompose(adnpca.fit_gaussian(x, 0.0))
    w = adnpca.whiten(model, x).data
    inv = np.linalg.inv(np.cov(x, rowvar=False))
    diff = x - x.mean(axis=0)
    expect = np.sqrt(np.einsum("ij,jk,ik->i", diff, inv, diff))
    np.testing.assert_allclose(np.linalg.norm(w, axis=1), expect, rtol=1e-10)
    assert adnpca.mahalanobis(model, x[0]) == pytest.approx(expect[0], rel=1e-10)


def test_eigenvalues_ascending():
    x = np.random.default_rng(1).normal(size=(50, 5)) * np.arange(1, 6)
    model = adnpca.spectral_decompose(adnpca.fit_gaussian(x))
    assert np.all(np.diff(model.eigenvalues) >= 0)


def test_auroc_against_pair_count():
    normal = [0.1, 0.4, 0.4, 0.2]
    anom = [0.4, 0.9, 0.3]
    wins = sum((a > n) + 0.5 * (a == n) for a in anom for n in normal)
    assert adnpca.auroc(normal, anom) == wins / (len(normal) * len(anom))
    roc = adnpca.roc_curve(normal + anom, [False] * 4 + [True] * 3)
    assert roc["auroc"] == pytest.approx(wins / 12, abs=1e-12)


def test_benchmark_pipeline_recovers_planted_size():
    b = adnpca.generate_benchmark(small_spec(2))
    model = adnpca.spectral_decompose(adnpca.fit_gaussian(b["train"].data))
    sel = adnpca.select_k_argmax(adnpca.eigenvalue_ratio_curve(model))
    assert sel.k_tilde == 4
    sweep = adnpca.sweep_k(adnpca.whiten(model, b["test_normal"]), adnpca.whiten(model, b["test_anomalous"]))
    assert 1 <= sweep.k_star <= 16
    assert adnpca.regret(sweep, sel) >= 0.0


def test_relative_distance_and_normality_curves():
    b = adnpca.generate_benchmark(small_spec(3))
    model = adnpca.spectral_decompose(adnpca.fit_gaussian(b["train"].data))
    wn = adnpca.whiten(model, b["test_normal"])
    ws = adnpca.whiten(model, b["synthetic"])
    curve = adnpca.relative_distance_curve(wn, ws, b["pairing"])
    assert len(curve) == 16
    diff = adnpca.differential_curve(curve)
    assert len(diff) == 16
    assert np.cumsum(diff.values) == pytest.approx(curve.values, rel=1e-12)
    normality = adnpca.normality_curve(adnpca.whiten(model, b["train"]))
    assert all(0.0 <= v <= 1.0 for v in normality.values)
    assert adnpca.select_k_tolerance(normality).k_tilde >= 1


def test_featmat_round_trip(tmp_path):
    data = np.arange(6.0).reshape(2, 3)
    fm = adnpca.FeatureMatrix(data, "bottle", 2, adnpca.Split.test_normal, ["a", "b"])
    path = tmp_path / "x.featmat"
    adnpca.write_feature_matrix(fm, path)
    back = adnpca.read_feature_matrix(path)
    np.testing.assert_array_equal(back.data, data)
    assert back.image_ids == ["a", "b"]
    assert back.split == adnpca.Split.test_normal


def test_errors_carry_kind():
    with pytest.raises(adnpca.AdnpcaError) as info:
        adnpca.fit_gaussian(np.zeros((1, 3)))
    assert info.value.kind == "TooFewSamples"
    with pytest.raises(adnpca.AdnpcaError) as info:
        adnpca.auroc([], [1.0])
    assert info.value.kind == "EmptyClass"


def test_ks_reference_value():
    assert adnpca.kolmogorov_sf(1.0) == pytest.approx(0.26999967167735456, rel=1e-12)
