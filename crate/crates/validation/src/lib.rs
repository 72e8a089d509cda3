//! Reference data for the acceptance checks in `tests/acceptance.rs`.
//!
//! Run them with `cargo test -p skewkit-validation --test acceptance`; the
//! target prints one PASS/FAIL line per criterion and exits non-zero if any
//! criterion fails.

/// Published population values, three decimals, J = 100.
/// Column order: γ_p and λ_p at p = 0.05, 0.10, 0.15, 0.20, 0.25, then
/// AUC_γ, AUC_λ, AUC_γ*, AUC_λ*.
pub const REFERENCE_ROWS: [(&str, [f64; 14]); 5] = [
    (
        "lognormal(0,1)",
        [
            0.676, 0.565, 0.476, 0.398, 0.325, 4.180, 2.602, 1.819, 1.320, 0.963, 0.175, 0.858,
            0.028, 0.092,
        ],
    ),
    (
        "exp(1)",
        [
            0.564, 0.465, 0.388, 0.322, 0.262, 2.587, 1.738, 1.269, 0.950, 0.710, 0.144, 0.540,
            0.022, 0.065,
        ],
    ),
    (
        "chisq(5)",
        [
            0.354, 0.281, 0.230, 0.188, 0.151, 1.096, 0.782, 0.596, 0.462, 0.356, 0.087, 0.242,
            0.013, 0.032,
        ],
    ),
    (
        "weibull(2)",
        [
            0.194, 0.148, 0.118, 0.095, 0.076, 0.482, 0.348, 0.269, 0.211, 0.164, 0.046, 0.108,
            0.007, 0.015,
        ],
    ),
    (
        "beta(5,10)",
        [
            0.106, 0.083, 0.068, 0.055, 0.044, 0.238, 0.182, 0.145, 0.117, 0.092, 0.026, 0.056,
            0.004, 0.008,
        ],
    ),
];

/// Measure list matching the columns of [`REFERENCE_ROWS`].
pub const REFERENCE_MEASURES: &str = "gamma@0.05,gamma@0.1,gamma@0.15,gamma@0.2,gamma@0.25,\
    lambda@0.05,lambda@0.1,lambda@0.15,lambda@0.2,lambda@0.25,\
    auc_gamma,auc_lambda,auc_gamma_star,auc_lambda_star";

/// Every distribution with a published population row, plus a symmetric
/// control. Property checks sweep this set.
pub const ZOO: [&str; 21] = [
    "normal(2,1)",
    "lognormal(0,1)",
    "lognormal(1,2)",
    "exp(1)",
    "chisq(2)",
    "chisq(5)",
    "chisq(25)",
    "pareto2(1,4)",
    "pareto2(1,7)",
    "pareto2(1,100)",
    "beta(2,5)",
    "beta(5,10)",
    "weibull(0.5)",
    "weibull(1)",
    "weibull(2)",
    "weibull(10)",
    "gamma(2)",
    "gamma(5)",
    "gamma(10)",
    "f(1,6)",
    "f(2,8)",
];
