//! Dimension estimates, gale-success diagnostics, and win certificates.
//!
//! The dimension of a stream is estimated as the minimum over block lengths
//! `ℓ ≤ L_max` of the running-minimum normalised block entropy `H_ℓ`; the two
//! window modes estimate the same quantity, and [`equivalence_experiment`]
//! measures how closely they agree on a finite prefix.
//!
//! A gambler built from a block distribution ℙ satisfies an exact log-capital
//! identity. Block-aligned, for a prefix of `n` symbols with block counts
//! `N(w)`:
//!
//! ```text
//! log2 d(X↾n) = s·n·log2 σ + Σ_w N(w)·log2 ℙ(w)
//! ```
//!
//! Sliding, the same sum runs over the complete interior windows
//! `w_j = X[j..j+ℓ]`, `ℓ ≤ j ≤ n−ℓ`, and the identity holds up to boundary
//! terms bounded by [`construct::sliding_boundary_budget`] (fair warm-up
//! plus partial-window conditionals). [`gale_win_certificate`] checks the
//! identity at the matching tolerance and reports whether the capital grew.
//!
//! Success of a gale is undecidable from a finite trajectory, so
//! [`success_diagnostic`] reports the honest finite surrogate: the maximum
//! log-capital seen and the least-squares slope of the trailing half of the
//! checkpoints, with a verdict only when the slope clears a threshold.

use serde::Serialize;
use thiserror::Error;

use crate::alphabet::Word;
use crate::construct::{self, ConstructError, SmoothingPolicy};
use crate::entropy::{self, BlockMode, DimensionEstimate, EntropyError, Schedule};
use crate::gambler::{GamblerError, GamblerSpec, Trajectory};
use crate::rat::{self, Rational};
use crate::seqgen::StreamSource;

/// Largest supported block length (the block table has σ^ℓ rows).
pub const MAX_BLOCK_LEN: usize = 12;

/// Default drift threshold, in bits per symbol, for calling a verdict.
pub const DEFAULT_SLOPE_THRESHOLD: f64 = 0.01;

/// Minimum number of trajectory checkpoints for a tail-slope verdict.
pub const MIN_CHECKPOINTS: usize = 10;

/// Slack for identities that are exact in rational arithmetic but evaluated
/// through floating-point logarithms.
const IDENTITY_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DimensionError {
    #[error("block length {got} exceeds the supported maximum {max}")]
    BlockLenTooLarge { got: usize, max: usize },
    #[error("need at least {need} checkpoints for a tail-slope verdict, got {got}")]
    TooFewCheckpoints { got: usize, need: usize },
    #[error(
        "s = {s} does not exceed the observed block entropy {h_observed}; \
         the certificate would be vacuous"
    )]
    SBelowEntropy { s: String, h_observed: f64 },
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Gambler(#[from] GamblerError),
}

/// Estimates finite-state dimension from the first `n` symbols of a stream:
/// the minimum over `ℓ = 1..=l_max` of the running-minimum normalised block
/// entropy, under the given window mode.
pub fn estimate_fs_dimension(
    source: &(dyn StreamSource + Sync),
    l_max: usize,
    mode: BlockMode,
    n: u64,
) -> Result<DimensionEstimate, DimensionError> {
    if l_max > MAX_BLOCK_LEN {
        return Err(DimensionError::BlockLenTooLarge { got: l_max, max: MAX_BLOCK_LEN });
    }
    Ok(entropy::entropy_rate_estimate(source, l_max, mode, n, Schedule::default_for(n))?)
}

/// Outcome of a finite-trajectory drift test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Winning,
    Losing,
    Indeterminate,
}

/// Drift summary of one gambler run.
///
/// `winning` requires both a positive tail slope above the threshold and a
/// positive peak; `losing` requires a tail slope below the negated threshold
/// (ruin anywhere in the tail counts as slope −∞); anything else is
/// `indeterminate`. Both the peak and the slope are reported so the reader
/// can weigh a high-water mark against late decay.
#[derive(Debug, Clone, Serialize)]
pub struct SuccessReport {
    pub s_param: String,
    pub max_log2_capital: f64,
    pub tail_slope: f64,
    /// Number of checkpoints the slope was fitted over (the trailing half).
    pub tail_points: usize,
    pub verdict: Verdict,
}

impl SuccessReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn least_squares_slope(points: &[(u64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|&(x, _)| x as f64).sum::<f64>() / n;
    let mean_y = points.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y) in points {
        let dx = x as f64 - mean_x;
        num += dx * (y - mean_y);
        den += dx * dx;
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Fits the trailing half of a trajectory's log-capital series and calls a
/// verdict at the given drift threshold (bits per symbol).
pub fn success_diagnostic(
    traj: &Trajectory,
    slope_threshold: f64,
) -> Result<SuccessReport, DimensionError> {
    let series = traj.log2_series();
    if series.len() < MIN_CHECKPOINTS {
        return Err(DimensionError::TooFewCheckpoints { got: series.len(), need: MIN_CHECKPOINTS });
    }
    let max_log2 = series.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
    let tail = &series[series.len() / 2..];
    let tail_slope = if tail.iter().any(|&(_, v)| !v.is_finite()) {
        f64::NEG_INFINITY
    } else {
        least_squares_slope(tail)
    };
    let verdict = if tail_slope > slope_threshold && max_log2 > 0.0 {
        Verdict::Winning
    } else if tail_slope < -slope_threshold {
        Verdict::Losing
    } else {
        Verdict::Indeterminate
    };
    Ok(SuccessReport {
        s_param: rat::format(traj.final_ledger().s_param()),
        max_log2_capital: max_log2,
        tail_slope,
        tail_points: tail.len(),
        verdict,
    })
}

/// One run of the distribution-matched gambler checked against its
/// closed-form log-capital.
///
/// `passes` asserts two things at once: the direct and formula values agree
/// within `tolerance` (exact for block-aligned runs, boundary-bounded for
/// sliding runs), and the final capital exceeds its starting value.
#[derive(Debug, Clone, Serialize)]
pub struct WinCertificate {
    pub mode: BlockMode,
    pub block_len: usize,
    pub s_param: String,
    /// Prefix length actually run (block-aligned runs drop a trailing
    /// partial block).
    pub n_used: u64,
    /// Normalised block entropy of the full input prefix.
    pub h_observed: f64,
    pub direct_log2: f64,
    pub formula_log2: f64,
    pub identity_gap: f64,
    pub tolerance: f64,
    pub capital_grows: bool,
    pub passes: bool,
    /// The gambler the certificate ran, as its serialized spec.
    pub gambler: serde_json::Value,
}

impl WinCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

fn gambler_value(spec: &GamblerSpec) -> serde_json::Value {
    serde_json::from_str(&spec.to_json()).expect("round-trips")
}

/// Builds the gambler matched to the smoothed empirical block distribution
/// of `x`, runs it at parameter `s`, and certifies the log-capital identity.
///
/// Requires `s` strictly above the observed block entropy of the prefix;
/// below it the capital cannot grow and the certificate is vacuous.
pub fn gale_win_certificate(
    x: &Word,
    s: &Rational,
    block_len: usize,
    mode: BlockMode,
) -> Result<WinCertificate, DimensionError> {
    if block_len > MAX_BLOCK_LEN {
        return Err(DimensionError::BlockLenTooLarge { got: block_len, max: MAX_BLOCK_LEN });
    }
    let sigma = x.alphabet().sigma();
    let log2_sigma = f64::from(sigma).log2();
    let counts = match mode {
        BlockMode::Disjoint => entropy::count_disjoint(x, block_len)?,
        BlockMode::Sliding => entropy::count_sliding(x, block_len)?,
    };
    let h_observed = entropy::block_entropy(&counts)?;
    if rat::to_f64(s) <= h_observed {
        return Err(DimensionError::SBelowEntropy { s: rat::format(s), h_observed });
    }

    let raw = construct::empirical_block_distribution(x, block_len, mode)?;
    let policy = SmoothingPolicy::default_for(sigma, block_len);
    let dist = construct::rationalize_distribution(&raw, &policy)?;
    let s_f = rat::to_f64(s);

    let (spec, n_used, direct, formula, tolerance) = match mode {
        BlockMode::Disjoint => {
            let spec = construct::build_disjoint_gambler(&dist)?;
            let n_used = block_len * (x.len() / block_len);
            let prefix = x.prefix(n_used);
            let traj = spec.run_word_checkpointed(s, &prefix, &[n_used as u64])?;
            let direct = traj.final_ledger().log2_value();
            let used = entropy::count_disjoint(&prefix, block_len)?;
            let cross: f64 =
                used.nonzero().map(|(w, c)| c as f64 * rat::to_f64(&dist.weight(&w)).log2()).sum();
            let formula = s_f * n_used as f64 * log2_sigma + cross;
            (spec, n_used, direct, formula, IDENTITY_TOL)
        }
        BlockMode::Sliding => {
            let spec = construct::build_sliding_gambler(&dist)?;
            let n = x.len();
            let traj = spec.run_word_checkpointed(s, x, &[n as u64])?;
            let direct = traj.final_ledger().log2_value();
            let mut interior = 0.0;
            if n >= 2 * block_len {
                for j in block_len..=(n - block_len) {
                    interior += rat::to_f64(&dist.weight(&x.slice(j..j + block_len))).log2();
                }
            }
            let formula = s_f * (block_len * n) as f64 * log2_sigma + interior;
            let max_abs_log2 =
                dist.iter().map(|(_, p)| rat::to_f64(p).log2().abs()).fold(0.0, f64::max);
            let boundary = construct::sliding_boundary_budget(block_len, sigma, max_abs_log2);
            (spec, n, direct, formula, boundary + IDENTITY_TOL)
        }
    };

    let identity_gap = (direct - formula).abs();
    let capital_grows = direct > 0.0;
    Ok(WinCertificate {
        mode,
        block_len,
        s_param: rat::format(s),
        n_used: n_used as u64,
        h_observed,
        direct_log2: direct,
        formula_log2: formula,
        identity_gap,
        tolerance,
        capital_grows,
        passes: identity_gap <= tolerance && capital_grows,
        gambler: gambler_value(&spec),
    })
}

/// Per-block-length comparison of the two window modes.
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceRow {
    pub block_len: usize,
    pub disjoint: f64,
    pub sliding: f64,
    pub gap: f64,
}

/// Paired dimension estimates under both window modes.
///
/// Per-ℓ values may differ substantially (a period-2 stream has sliding
/// `H_2 = 0.5` but block-aligned `H_2 = 0`); agreement is expected of the
/// minima over ℓ as `L_max` grows, and is what `estimate_gap` measures.
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub n_used: u64,
    pub l_max: usize,
    pub rows: Vec<EquivalenceRow>,
    pub disjoint_estimate: f64,
    pub sliding_estimate: f64,
    pub estimate_gap: f64,
    pub max_row_gap: f64,
}

impl EquivalenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per block length: `block_len,disjoint,sliding,gap`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("block_len,disjoint,sliding,gap\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{:.9},{:.9},{:.9}\n",
                row.block_len, row.disjoint, row.sliding, row.gap
            ));
        }
        out
    }
}

/// Runs [`estimate_fs_dimension`] under both window modes on the same stream
/// and tabulates the per-ℓ values and the two final estimates.
pub fn equivalence_experiment(
    source: &(dyn StreamSource + Sync),
    l_max: usize,
    n: u64,
) -> Result<EquivalenceReport, DimensionError> {
    if l_max > MAX_BLOCK_LEN {
        return Err(DimensionError::BlockLenTooLarge { got: l_max, max: MAX_BLOCK_LEN });
    }
    let schedule = Schedule::default_for(n);
    let disjoint = entropy::entropy_rate_estimate(source, l_max, BlockMode::Disjoint, n, schedule)?;
    let sliding = entropy::entropy_rate_estimate(source, l_max, BlockMode::Sliding, n, schedule)?;
    let mut rows = Vec::with_capacity(l_max);
    let mut max_row_gap: f64 = 0.0;
    for (&(ld, hd), &(ls, hs)) in disjoint.per_block_len.iter().zip(&sliding.per_block_len) {
        debug_assert_eq!(ld, ls);
        let gap = (hd - hs).abs();
        max_row_gap = max_row_gap.max(gap);
        rows.push(EquivalenceRow { block_len: ld, disjoint: hd, sliding: hs, gap });
    }
    Ok(EquivalenceReport {
        n_used: disjoint.n_used.max(sliding.n_used),
        l_max,
        rows,
        disjoint_estimate: disjoint.estimate,
        sliding_estimate: sliding.estimate,
        estimate_gap: (disjoint.estimate - sliding.estimate).abs(),
        max_row_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::seqgen::GeneratorConfig;
    use std::collections::BTreeMap;

    fn word(s: &str) -> Word {
        Word::from_glyphs(Alphabet::binary(), s).unwrap()
    }

    fn alternating(n: usize) -> Word {
        word(&"01".repeat(n / 2 + 1)[..n])
    }

    fn single_state_gambler(bet_on_one: Rational) -> GamblerSpec {
        let alphabet = Alphabet::binary();
        let one = Rational::from_integer(1.into());
        let mut delta = BTreeMap::new();
        delta.insert(("q".to_string(), '0'), "q".to_string());
        delta.insert(("q".to_string(), '1'), "q".to_string());
        let mut beta = BTreeMap::new();
        beta.insert("q".to_string(), vec![vec![one.clone() - bet_on_one.clone(), bet_on_one]]);
        GamblerSpec::new(alphabet, vec!["q".to_string()], "q", one, 1, &delta, &beta, None).unwrap()
    }

    #[test]
    fn block_len_cap_is_enforced() {
        let src = GeneratorConfig::periodic(word("01")).unwrap();
        let err = estimate_fs_dimension(&src, 13, BlockMode::Disjoint, 1000).unwrap_err();
        assert!(matches!(err, DimensionError::BlockLenTooLarge { got: 13, max: 12 }));
        let err = equivalence_experiment(&src, 13, 1000).unwrap_err();
        assert!(matches!(err, DimensionError::BlockLenTooLarge { .. }));
    }

    #[test]
    fn period_two_stream_has_dimension_zero_block_aligned() {
        let src = GeneratorConfig::periodic(word("01")).unwrap();
        let est = estimate_fs_dimension(&src, 2, BlockMode::Disjoint, 4096).unwrap();
        assert_eq!(est.estimate, 0.0);
        let h2 = est.per_block_len.iter().find(|&&(l, _)| l == 2).unwrap().1;
        assert_eq!(h2, 0.0);
    }

    #[test]
    fn equivalence_rows_differ_where_minima_need_longer_blocks() {
        // At ℓ=2 a period-2 stream is a single repeated aligned block but two
        // alternating sliding windows, so the per-ℓ rows disagree; the
        // sliding minimum up to L_max=2 stays near 0.5.
        let src = GeneratorConfig::periodic(word("01")).unwrap();
        let report = equivalence_experiment(&src, 2, 4096).unwrap();
        assert_eq!(report.disjoint_estimate, 0.0);
        assert!((report.sliding_estimate - 0.5).abs() < 1e-3, "{}", report.sliding_estimate);
        assert!((report.max_row_gap - 0.5).abs() < 1e-3);
        assert_eq!(report.rows.len(), 2);
        let csv = report.to_csv();
        assert!(csv.starts_with("block_len,disjoint,sliding,gap\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn all_in_run_is_winning_with_unit_slope() {
        let spec = single_state_gambler(rat::ratio(1, 1));
        let x = word(&"1".repeat(200));
        let traj = spec.run(&rat::ratio(1, 1), &x).unwrap();
        let report = success_diagnostic(&traj, DEFAULT_SLOPE_THRESHOLD).unwrap();
        assert_eq!(report.verdict, Verdict::Winning);
        assert!((report.tail_slope - 1.0).abs() < 1e-9);
        assert_eq!(report.max_log2_capital, 200.0);
        assert_eq!(report.tail_points, 101);
        assert!(report.to_json().contains("winning"));
    }

    #[test]
    fn ruin_in_the_tail_is_losing() {
        let spec = single_state_gambler(rat::ratio(1, 1));
        let mut text = "1".repeat(150);
        text.push('0');
        text.push_str(&"1".repeat(49));
        let traj = spec.run(&rat::ratio(1, 1), &word(&text)).unwrap();
        let report = success_diagnostic(&traj, DEFAULT_SLOPE_THRESHOLD).unwrap();
        assert_eq!(report.verdict, Verdict::Losing);
        assert_eq!(report.tail_slope, f64::NEG_INFINITY);
        assert_eq!(report.max_log2_capital, 150.0);
    }

    #[test]
    fn steady_decay_is_losing_without_ruin() {
        // Betting 1/4 on the symbol that always arrives halves capital each
        // step at s=1.
        let spec = single_state_gambler(rat::ratio(1, 4));
        let x = word(&"1".repeat(120));
        let traj = spec.run(&rat::ratio(1, 1), &x).unwrap();
        let report = success_diagnostic(&traj, DEFAULT_SLOPE_THRESHOLD).unwrap();
        assert_eq!(report.verdict, Verdict::Losing);
        assert!((report.tail_slope + 1.0).abs() < 1e-9);
    }

    #[test]
    fn fair_run_is_indeterminate() {
        let spec = single_state_gambler(rat::ratio(1, 2));
        let x = alternating(100);
        let traj = spec.run(&rat::ratio(1, 1), &x).unwrap();
        let report = success_diagnostic(&traj, DEFAULT_SLOPE_THRESHOLD).unwrap();
        assert_eq!(report.verdict, Verdict::Indeterminate);
        assert_eq!(report.tail_slope, 0.0);
        assert_eq!(report.max_log2_capital, 0.0);
    }

    #[test]
    fn short_trajectories_are_rejected() {
        let spec = single_state_gambler(rat::ratio(1, 2));
        let traj = spec.run(&rat::ratio(1, 1), &word("01010")).unwrap();
        let err = success_diagnostic(&traj, DEFAULT_SLOPE_THRESHOLD).unwrap_err();
        assert!(matches!(err, DimensionError::TooFewCheckpoints { got: 6, need: 10 }));
    }

    #[test]
    fn block_aligned_certificate_is_exact() {
        let x = alternating(128);
        let cert = gale_win_certificate(&x, &rat::ratio(1, 5), 2, BlockMode::Disjoint).unwrap();
        assert_eq!(cert.h_observed, 0.0);
        assert_eq!(cert.n_used, 128);
        assert!(cert.identity_gap <= 1e-6, "gap {}", cert.identity_gap);
        assert!(cert.capital_grows);
        assert!(cert.passes);
        // Dominant block keeps nearly all mass, so log2 d ≈ s·n.
        assert!((cert.direct_log2 - 0.2 * 128.0).abs() < 0.2);
        assert_eq!(cert.gambler["provenance"]["builder"], "disjoint");
    }

    #[test]
    fn sliding_certificate_passes_within_boundary_tolerance() {
        let x = alternating(128);
        let cert = gale_win_certificate(&x, &rat::ratio(9, 10), 2, BlockMode::Sliding).unwrap();
        assert!((cert.h_observed - 0.5).abs() < 1e-3);
        assert!(cert.capital_grows);
        assert!(cert.identity_gap <= cert.tolerance, "{} > {}", cert.identity_gap, cert.tolerance);
        assert!(cert.passes);
        assert_eq!(cert.gambler["provenance"]["builder"], "sliding");
        // Boundary budget: ℓ²·log2σ + ℓ(ℓ−1)·M with M = −log2(floor) = 12.
        assert!((cert.tolerance - (4.0 + 2.0 * 12.0)).abs() < 1e-3, "{}", cert.tolerance);
    }

    #[test]
    fn certificate_requires_s_above_observed_entropy() {
        let x = alternating(128);
        let err = gale_win_certificate(&x, &rat::ratio(1, 2), 1, BlockMode::Sliding).unwrap_err();
        assert!(matches!(err, DimensionError::SBelowEntropy { .. }));
    }

    #[test]
    fn coin_flip_certificate_growth_matches_entropy_margin() {
        let src = GeneratorConfig::bernoulli(rat::ratio(1, 4), 7).unwrap();
        let x = src.open().unwrap().take_word(10_000).unwrap();
        let cert = gale_win_certificate(&x, &rat::ratio(9, 10), 1, BlockMode::Disjoint).unwrap();
        assert!(cert.passes);
        let rate = cert.direct_log2 / 10_000.0;
        assert!((rate - (0.9 - 0.8113)).abs() < 0.05, "rate {rate}");
    }

    #[test]
    fn constant_stream_estimates_agree_at_zero() {
        let src = GeneratorConfig::periodic(word("0")).unwrap();
        let report = equivalence_experiment(&src, 3, 2048).unwrap();
        assert_eq!(report.disjoint_estimate, 0.0);
        assert_eq!(report.sliding_estimate, 0.0);
        assert_eq!(report.estimate_gap, 0.0);
        assert_eq!(report.max_row_gap, 0.0);
    }
}
