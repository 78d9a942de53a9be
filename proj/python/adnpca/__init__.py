"""Gaussian feature-space anomaly detection with Negated PCA."""

from ._adnpca import (
    AdnpcaError,
    BenchmarkSpec,
    CurveMethod,
    FeatureMatrix,
    GaussianModel,
    HeuristicCurve,
    KsCorrection,
    Selection,
    SpectralModel,
    Split,
    SweepResult,
    WhitenedMatrix,
    auroc,
    differential_curve,
    eigenvalue_ratio_curve,
    fit_gaussian,
    gaussian_logpdf,
    generate_benchmark,
    kolmogorov_sf,
    ks_pvalue,
    ks_statistic,
    load_model,
    mahalanobis,
    normality_curve,
    npca_score,
    planted_spectrum,
    read_feature_matrix,
    regret,
    relative_distance_curve,
    roc_curve,
    save_model,
    select_k_argmax,
    select_k_tolerance,
    spectral_decompose,
    sweep_k,
    whiten,
    write_feature_matrix,
)

__all__ = [name for name in dir() if not name.startswith("_")]
