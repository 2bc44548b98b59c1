//! Builders that turn block distributions into gamblers, and gambler
//! transformations that preserve capital behaviour.
//!
//! The pipeline: measure a prefix's empirical block distribution at its
//! entropy running-min checkpoint, smooth it to strictly positive rationals,
//! then build a gambler whose cumulative bet on every block w is exactly
//! ℙ(w). Two builders cover the two counting modes:
//!
//! * disjoint: states Σ^{<ℓ}, one bet row, chain-rule conditional bets; the
//!   capital over aligned blocks factors as Π ℙ(block).
//! * sliding: states Σ^{<ℓ} ∪ Σ^ℓ, ℓ bet rows staggered so each complete
//!   window w contributes its full chain product ℙ(w); the first ℓ steps bet
//!   fair on every row and the ℓ-1 unfinished tail windows stay partial,
//!   which bounds the boundary error by [`sliding_boundary_budget`].
//!
//! [`extend_phase`] and [`replicate_bets`] rebuild a gambler with a phase
//! counter (identical trajectories) or with every bet row repeated m times
//! (capital raised to the m-th power).

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::alphabet::Word;
use crate::dist::{DistError, Distribution};
use crate::entropy::{
    count_disjoint, count_sliding, entropy_profile, BlockMode, EntropyError, Schedule,
};
use crate::gambler::{GamblerError, GamblerSpec, Provenance};
use crate::rat::{self, Rational};

/// Block-table cap for smoothing: σ^ℓ must stay enumerable.
const SMOOTH_TABLE_CAP: u128 = 1 << 20;

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("floor {floor} times {blocks} blocks exceeds total mass 1")]
    FloorTooLarge { floor: String, blocks: String },
    #[error("σ^ℓ = {0} blocks exceeds the smoothing table cap")]
    TableTooLarge(String),
    #[error("smoothing would shift block {block} by {shift:.4} bits, over the {budget} budget")]
    DistortionBudgetExceeded { block: String, shift: f64, budget: String },
    #[error("block {0} has zero mass; smooth the distribution first")]
    ZeroMassBlock(String),
    #[error("smoothing policy fields must be positive")]
    BadPolicy,
    #[error("phase count must be at least 1")]
    BadPhaseCount,
    #[error("replication factor must be at least 1")]
    BadReplication,
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Gambler(#[from] GamblerError),
}

/// How to make an empirical distribution strictly positive: every block gets
/// at least `floor`, and blocks that already carried at least `floor` may
/// move by less than `epsilon_prime` in log2.
#[derive(Debug, Clone)]
pub struct SmoothingPolicy {
    pub floor: Rational,
    pub epsilon_prime: Rational,
}

impl SmoothingPolicy {
    pub fn new(floor: Rational, epsilon_prime: Rational) -> Result<Self, ConstructError> {
        if floor.is_zero()
            || floor.is_negative()
            || epsilon_prime.is_zero()
            || epsilon_prime.is_negative()
        {
            return Err(ConstructError::BadPolicy);
        }
        Ok(SmoothingPolicy { floor, epsilon_prime })
    }

    /// floor = 1/(1024·σ^ℓ) keeps the total clamped mass under 1/1024, so
    /// the scaling factor shifts survivors by at most |log2(1023/1024)|,
    /// well inside the default budget of 1/100.
    pub fn default_for(sigma: u32, block_len: usize) -> Self {
        let cell = rat::pow(&rat::ratio(1, sigma as u64), block_len as u32);
        SmoothingPolicy { floor: cell * rat::ratio(1, 1024), epsilon_prime: rat::ratio(1, 100) }
    }
}

/// Exact block frequencies of the prefix at the entropy running-min
/// checkpoint (ties resolved toward the longest prefix).
pub fn empirical_block_distribution(
    x: &Word,
    block_len: usize,
    mode: BlockMode,
) -> Result<Distribution, ConstructError> {
    let n = x.len() as u64;
    let report = entropy_profile(x, block_len, mode, n, Schedule::default_for(n))?;
    let prefix = x.prefix(report.argmin_prefix as usize);
    let counts = match mode {
        BlockMode::Disjoint => count_disjoint(&prefix, block_len)?,
        BlockMode::Sliding => count_sliding(&prefix, block_len)?,
    };
    let total = counts.window_total();
    Ok(Distribution::from_counts(Arc::clone(x.alphabet()), block_len, counts.nonzero(), total)?)
}

/// Rescales a distribution so every block carries at least `policy.floor`.
///
/// Blocks below the floor (zeros included) are clamped to exactly the floor;
/// the rest are scaled by the exact factor t = (1 - floor·#clamped) /
/// mass(survivors), growing the clamped set until every survivor stays at or
/// above the floor. The result sums to exactly 1 in rationals. Errors if a
/// block that originally had at least `floor` mass would move by
/// `epsilon_prime` or more in log2.
pub fn rationalize_distribution(
    dist: &Distribution,
    policy: &SmoothingPolicy,
) -> Result<Distribution, ConstructError> {
    let alphabet = Arc::clone(dist.alphabet());
    let block_len = dist.block_len();
    let blocks = (alphabet.size() as u128).checked_pow(block_len as u32).unwrap_or(u128::MAX);
    if blocks > SMOOTH_TABLE_CAP {
        return Err(ConstructError::TableTooLarge(blocks.to_string()));
    }
    let blocks_r = Rational::from_integer(num_bigint::BigInt::from(blocks));
    if &policy.floor * &blocks_r > Rational::one() {
        return Err(ConstructError::FloorTooLarge {
            floor: rat::format(&policy.floor),
            blocks: blocks_r.to_string(),
        });
    }

    // Grow the clamped set until every survivor scales to at least the floor.
    let originals: Vec<(Word, Rational)> = dist.iter().map(|(w, r)| (w, r.clone())).collect();
    let mut clamped: Vec<bool> = vec![false; originals.len()];
    let zero_blocks = blocks - originals.len() as u128;
    let mut scale;
    loop {
        let clamped_count = zero_blocks + clamped.iter().filter(|&&c| c).count() as u128;
        let survivor_mass: Rational =
            originals.iter().zip(&clamped).filter(|(_, &c)| !c).map(|((_, r), _)| r).sum();
        let clamped_mass =
            &policy.floor * Rational::from_integer(num_bigint::BigInt::from(clamped_count));
        if survivor_mass.is_zero() {
            scale = Rational::zero();
            break;
        }
        scale = (Rational::one() - clamped_mass) / survivor_mass;
        let mut grew = false;
        for (i, (_, r)) in originals.iter().enumerate() {
            if !clamped[i] && &(r * &scale) < &policy.floor {
                clamped[i] = true;
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }

    let budget = rat::to_f64(&policy.epsilon_prime);
    let mut weights: BTreeMap<Vec<u8>, (Word, Rational)> = BTreeMap::new();
    for ((w, r), &is_clamped) in originals.iter().zip(&clamped) {
        let new = if is_clamped { policy.floor.clone() } else { r * &scale };
        if r >= &policy.floor {
            let shift = (rat::to_f64(&new).log2() - rat::to_f64(r).log2()).abs();
            if shift >= budget {
                return Err(ConstructError::DistortionBudgetExceeded {
                    block: w.to_string(),
                    shift,
                    budget: rat::format(&policy.epsilon_prime),
                });
            }
        }
        weights.insert(w.symbols().to_vec(), (w.clone(), new));
    }
    let mut full: Vec<(Word, Rational)> = Vec::with_capacity(blocks as usize);
    for w in alphabet.words_exact(block_len) {
        match weights.remove(w.symbols()) {
            Some((word, r)) => full.push((word, r)),
            None => full.push((w, policy.floor.clone())),
        }
    }
    Ok(Distribution::new(alphabet, block_len, full)?)
}

fn first_zero_block(dist: &Distribution) -> Option<Word> {
    dist.alphabet().words_exact(dist.block_len()).find(|w| dist.weight(w).is_zero())
}

fn fair_row(sigma: usize) -> Vec<Rational> {
    vec![rat::ratio(1, sigma as u64); sigma]
}

/// Gambler whose single bet row plays the chain rule of ℙ over aligned
/// ℓ-blocks: states are Σ^{<ℓ}, and the cumulative bet along any block w
/// starting at λ is exactly ℙ(w).
pub fn build_disjoint_gambler(dist: &Distribution) -> Result<GamblerSpec, ConstructError> {
    if let Some(w) = first_zero_block(dist) {
        return Err(ConstructError::ZeroMassBlock(w.to_string()));
    }
    let alphabet = Arc::clone(dist.alphabet());
    let block_len = dist.block_len();
    let sigma = alphabet.size();
    let mut labels = Vec::new();
    let mut delta = BTreeMap::new();
    let mut beta = BTreeMap::new();
    for state in alphabet.words_up_to(block_len - 1) {
        let label = state.to_string();
        for a in 0..sigma as u8 {
            let target = if state.len() + 1 < block_len {
                state.child(a).to_string()
            } else {
                String::new()
            };
            delta.insert((label.clone(), alphabet.glyph(a)), target);
        }
        beta.insert(label.clone(), vec![dist.conditional_row(&state)?]);
        labels.push(label);
    }
    let provenance = Provenance {
        builder: "disjoint".to_string(),
        params: BTreeMap::from([("block_len".to_string(), block_len.to_string())]),
        distribution: dist.iter().map(|(w, r)| (w.to_string(), rat::format(r))).collect(),
    };
    Ok(GamblerSpec::new(alphabet, labels, "", Rational::one(), 1, &delta, &beta, Some(provenance))?)
}

/// Upper bound on |log2 of the raw bet product − Σ_j log2 ℙ(w_j)| over the
/// complete interior windows ℓ ≤ j ≤ n−ℓ of a sliding-gambler run: the fair
/// warm-up contributes exactly ℓ²·log2 σ, and each partial-window
/// conditional at the two ends (ℓ(ℓ−1) of them) is bounded by
/// `max_abs_log2` = max_w |log2 ℙ(w)|. The ℓ = 1 builder shares the
/// block-aligned automaton and so bets real weights from the very first
/// step; that single non-fair factor costs one extra `max_abs_log2`.
pub fn sliding_boundary_budget(block_len: usize, sigma: u32, max_abs_log2: f64) -> f64 {
    let partials = if block_len == 1 { 1 } else { block_len * (block_len - 1) };
    (block_len * block_len) as f64 * f64::from(sigma).log2() + partials as f64 * max_abs_log2
}

/// Gambler with ℓ parallel bet rows that realises, per sliding window, the
/// chain-rule decomposition of ℙ: row r in a full state bets the conditional
/// of ℙ given the state's suffix starting at position r+1 (row ℓ-1 bets the
/// single-symbol marginal, opening a fresh window each step). States shorter
/// than ℓ bet fair on every row.
pub fn build_sliding_gambler(dist: &Distribution) -> Result<GamblerSpec, ConstructError> {
    if let Some(w) = first_zero_block(dist) {
        return Err(ConstructError::ZeroMassBlock(w.to_string()));
    }
    let block_len = dist.block_len();
    let provenance = Provenance {
        builder: "sliding".to_string(),
        params: BTreeMap::from([("block_len".to_string(), block_len.to_string())]),
        distribution: dist.iter().map(|(w, r)| (w.to_string(), rat::format(r))).collect(),
    };
    if block_len == 1 {
        // No overlap at ℓ=1: the constructions coincide.
        let mut spec = build_disjoint_gambler(dist)?;
        spec.set_provenance(Some(provenance));
        return Ok(spec);
    }
    let alphabet = Arc::clone(dist.alphabet());
    let sigma = alphabet.size();
    let mut labels = Vec::new();
    let mut delta = BTreeMap::new();
    let mut beta = BTreeMap::new();
    for state in alphabet.words_up_to(block_len) {
        let label = state.to_string();
        for a in 0..sigma as u8 {
            let target = if state.len() < block_len {
                state.child(a)
            } else {
                state.slice(1..block_len).child(a)
            };
            delta.insert((label.clone(), alphabet.glyph(a)), target.to_string());
        }
        let rows = if state.len() < block_len {
            vec![fair_row(sigma); block_len]
        } else {
            (0..block_len)
                .map(|r| dist.conditional_row(&state.slice(r + 1..block_len)))
                .collect::<Result<_, _>>()?
        };
        beta.insert(label.clone(), rows);
        labels.push(label);
    }
    Ok(GamblerSpec::new(
        alphabet,
        labels,
        "",
        Rational::one(),
        block_len,
        &delta,
        &beta,
        Some(provenance),
    )?)
}

/// Rebuilds the gambler's label-keyed tables from its accessors.
fn tables_of(
    spec: &GamblerSpec,
) -> (BTreeMap<(String, char), String>, BTreeMap<String, Vec<Vec<Rational>>>) {
    let alphabet = spec.alphabet();
    let labels = spec.state_labels();
    let mut delta = BTreeMap::new();
    let mut beta = BTreeMap::new();
    for (i, label) in labels.iter().enumerate() {
        for a in 0..alphabet.size() as u8 {
            delta.insert((label.clone(), alphabet.glyph(a)), labels[spec.transition(i, a)].clone());
        }
        beta.insert(label.clone(), spec.bet_rows(i).to_vec());
    }
    (delta, beta)
}

/// Adds a modular phase counter: states (q, p) with p advancing mod
/// `phases`, bets copied from q. Trajectories are exactly those of the
/// original; only the state space grows, to |Q|·phases.
pub fn extend_phase(spec: &GamblerSpec, phases: u32) -> Result<GamblerSpec, ConstructError> {
    if phases == 0 {
        return Err(ConstructError::BadPhaseCount);
    }
    let alphabet = Arc::clone(spec.alphabet());
    let (delta, beta) = tables_of(spec);
    let mut labels = Vec::with_capacity(spec.num_states() * phases as usize);
    let mut new_delta = BTreeMap::new();
    let mut new_beta = BTreeMap::new();
    for label in spec.state_labels() {
        for p in 0..phases {
            let name = format!("{label}@{p}");
            for a in 0..alphabet.size() as u8 {
                let glyph = alphabet.glyph(a);
                let target = &delta[&(label.clone(), glyph)];
                new_delta.insert((name.clone(), glyph), format!("{target}@{}", (p + 1) % phases));
            }
            new_beta.insert(name.clone(), beta[label].clone());
            labels.push(name);
        }
    }
    let q0 = format!("{}@0", spec.state_labels()[spec.start_state()]);
    Ok(GamblerSpec::new(
        alphabet,
        labels,
        &q0,
        spec.start_capital().clone(),
        spec.k(),
        &new_delta,
        &new_beta,
        Some(Provenance {
            builder: "extend_phase".to_string(),
            params: BTreeMap::from([("phases".to_string(), phases.to_string())]),
            distribution: BTreeMap::new(),
        }),
    )?)
}

/// Repeats every bet row m times (adjacent copies), raising the capital to
/// its m-th power: the new gambler has k·m rows, starting capital c0^m, and
/// mantissa(G', x) = mantissa(G, x)^m exactly.
pub fn replicate_bets(spec: &GamblerSpec, m: u32) -> Result<GamblerSpec, ConstructError> {
    if m == 0 {
        return Err(ConstructError::BadReplication);
    }
    let alphabet = Arc::clone(spec.alphabet());
    let (delta, beta) = tables_of(spec);
    let replicated: BTreeMap<String, Vec<Vec<Rational>>> = beta
        .into_iter()
        .map(|(label, rows)| {
            let mut out = Vec::with_capacity(rows.len() * m as usize);
            for row in rows {
                for _ in 0..m {
                    out.push(row.clone());
                }
            }
            (label, out)
        })
        .collect();
    let q0 = spec.state_labels()[spec.start_state()].clone();
    Ok(GamblerSpec::new(
        alphabet,
        spec.state_labels().to_vec(),
        &q0,
        rat::pow(spec.start_capital(), m),
        spec.k() * m as usize,
        &delta,
        &replicated,
        Some(Provenance {
            builder: "replicate_bets".to_string(),
            params: BTreeMap::from([("copies".to_string(), m.to_string())]),
            distribution: BTreeMap::new(),
        }),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::ledger::CapitalLedger;

    fn word(s: &str) -> Word {
        Word::from_glyphs(Alphabet::binary(), s).unwrap()
    }

    fn dist_of(pairs: &[(&str, Rational)], block_len: usize) -> Distribution {
        let alphabet = Alphabet::binary();
        Distribution::new(
            Arc::clone(&alphabet),
            block_len,
            pairs
                .iter()
                .map(|(b, r)| (Word::from_glyphs(Arc::clone(&alphabet), b).unwrap(), r.clone())),
        )
        .unwrap()
    }

    /// The worked sliding example: ℙ = {00: 1/2, 01: 1/4, 10: 1/8, 11: 1/8}.
    fn skewed_pairs() -> Distribution {
        dist_of(
            &[
                ("00", rat::ratio(1, 2)),
                ("01", rat::ratio(1, 4)),
                ("10", rat::ratio(1, 8)),
                ("11", rat::ratio(1, 8)),
            ],
            2,
        )
    }

    #[test]
    fn empirical_distribution_matches_window_counts() {
        let x = word("0110");
        let sliding = empirical_block_distribution(&x, 2, BlockMode::Sliding).unwrap();
        for b in ["01", "11", "10"] {
            assert_eq!(sliding.weight(&word(b)), rat::ratio(1, 3), "block {b}");
        }
        let disjoint = empirical_block_distribution(&x, 2, BlockMode::Disjoint).unwrap();
        assert_eq!(disjoint.weight(&word("01")), rat::ratio(1, 2));
        assert_eq!(disjoint.weight(&word("10")), rat::ratio(1, 2));

        let periodic = Word::from_glyphs(Alphabet::binary(), &"01".repeat(64)).unwrap();
        let d = empirical_block_distribution(&periodic, 2, BlockMode::Disjoint).unwrap();
        assert_eq!(d.weight(&word("01")), Rational::one());
        assert_eq!(d.support_size(), 1);
    }

    #[test]
    fn smoothing_clamps_zeros_and_rescales() {
        let dist = dist_of(&[("01", Rational::one())], 2);
        let policy = SmoothingPolicy::new(rat::ratio(1, 100), rat::ratio(1, 10)).unwrap();
        let smoothed = rationalize_distribution(&dist, &policy).unwrap();
        assert_eq!(smoothed.weight(&word("01")), rat::ratio(97, 100));
        for b in ["00", "10", "11"] {
            assert_eq!(smoothed.weight(&word(b)), rat::ratio(1, 100), "block {b}");
        }
        assert!(smoothed.is_positive());
    }

    #[test]
    fn smoothing_leaves_uniform_alone() {
        let quarter = rat::ratio(1, 4);
        let dist = dist_of(
            &[
                ("00", quarter.clone()),
                ("01", quarter.clone()),
                ("10", quarter.clone()),
                ("11", quarter),
            ],
            2,
        );
        let policy = SmoothingPolicy::default_for(2, 2);
        let smoothed = rationalize_distribution(&dist, &policy).unwrap();
        assert_eq!(smoothed, dist);
    }

    #[test]
    fn smoothing_clamps_small_positive_weights() {
        let dist = dist_of(&[("0", rat::ratio(1, 1000)), ("1", rat::ratio(999, 1000))], 1);
        let policy = SmoothingPolicy::new(rat::ratio(1, 100), rat::ratio(1, 10)).unwrap();
        let smoothed = rationalize_distribution(&dist, &policy).unwrap();
        assert_eq!(smoothed.weight(&word("0")), rat::ratio(1, 100));
        assert_eq!(smoothed.weight(&word("1")), rat::ratio(99, 100));
    }

    #[test]
    fn smoothing_rejects_oversized_floor() {
        let dist = dist_of(&[("01", Rational::one())], 2);
        let policy = SmoothingPolicy::new(rat::ratio(1, 2), rat::ratio(1, 10)).unwrap();
        assert!(matches!(
            rationalize_distribution(&dist, &policy),
            Err(ConstructError::FloorTooLarge { .. })
        ));
    }

    #[test]
    fn smoothing_enforces_distortion_budget() {
        let dist = dist_of(&[("01", Rational::one())], 2);
        // Shaving 3 floors off the point mass moves it by ~0.044 bits.
        let policy = SmoothingPolicy::new(rat::ratio(1, 100), rat::ratio(1, 100)).unwrap();
        assert!(matches!(
            rationalize_distribution(&dist, &policy),
            Err(ConstructError::DistortionBudgetExceeded { .. })
        ));
    }

    #[test]
    fn disjoint_builder_base_case() {
        let dist = dist_of(&[("0", rat::ratio(1, 4)), ("1", rat::ratio(3, 4))], 1);
        let spec = build_disjoint_gambler(&dist).unwrap();
        assert_eq!(spec.num_states(), 1);
        assert_eq!(spec.k(), 1);
        assert_eq!(spec.bet_rows(0)[0], vec![rat::ratio(1, 4), rat::ratio(3, 4)]);

        // s=1 on "1101": mantissa 2^4·(3/4)^3·(1/4) = 27/16.
        let traj = spec.run(&Rational::one(), &word("1101")).unwrap();
        assert_eq!(traj.final_ledger().mantissa(), rat::ratio(27, 16));
    }

    /// Skewed but positive distribution over Σ^3 summing to exactly 1.
    fn octal_dist() -> Distribution {
        dist_of(
            &[
                ("000", rat::ratio(1, 4)),
                ("001", rat::ratio(1, 12)),
                ("010", rat::ratio(1, 12)),
                ("011", rat::ratio(1, 12)),
                ("100", rat::ratio(1, 12)),
                ("101", rat::ratio(1, 12)),
                ("110", rat::ratio(1, 12)),
                ("111", rat::ratio(1, 4)),
            ],
            3,
        )
    }

    #[test]
    fn disjoint_builder_cumulative_bet_is_the_distribution() {
        let dist = octal_dist();
        let spec = build_disjoint_gambler(&dist).unwrap();
        assert_eq!(spec.num_states(), 7);
        for block in Alphabet::binary().words_exact(3) {
            assert_eq!(
                spec.cumulative_block_bet("", &block).unwrap(),
                dist.weight(&block),
                "block {block}"
            );
        }
    }

    #[test]
    fn disjoint_builder_requires_positive_mass() {
        let dist = dist_of(&[("01", Rational::one())], 2);
        assert!(matches!(
            build_disjoint_gambler(&dist),
            Err(ConstructError::ZeroMassBlock(b)) if b == "00"
        ));
    }

    #[test]
    fn sliding_builder_worked_example() {
        let spec = build_sliding_gambler(&skewed_pairs()).unwrap();
        assert_eq!(spec.k(), 2);
        assert_eq!(spec.num_states(), 7);
        let traj = spec.run(&Rational::one(), &word("00101")).unwrap();
        assert_eq!(traj.final_ledger().mantissa(), rat::ratio(1, 6));
    }

    #[test]
    fn sliding_builder_uniform_stays_fair() {
        let quarter = rat::ratio(1, 4);
        let dist = dist_of(
            &[
                ("00", quarter.clone()),
                ("01", quarter.clone()),
                ("10", quarter.clone()),
                ("11", quarter),
            ],
            2,
        );
        let spec = build_sliding_gambler(&dist).unwrap();
        let traj = spec.run(&Rational::one(), &word("0110100111")).unwrap();
        for p in traj.points() {
            assert_eq!(p.ledger.mantissa(), Rational::one());
        }
    }

    #[test]
    fn sliding_builder_at_length_one_matches_disjoint() {
        let dist = dist_of(&[("0", rat::ratio(2, 5)), ("1", rat::ratio(3, 5))], 1);
        let sliding = build_sliding_gambler(&dist).unwrap();
        let disjoint = build_disjoint_gambler(&dist).unwrap();
        assert_eq!(sliding.k(), 1);
        assert_eq!(sliding.num_states(), disjoint.num_states());
        let x = word("011010011");
        let s = rat::ratio(4, 5);
        assert!(sliding.run(&s, &x).unwrap().same_capitals(&disjoint.run(&s, &x).unwrap()));
        assert_eq!(sliding.provenance().unwrap().builder, "sliding");
    }

    #[test]
    fn sliding_boundary_error_is_bounded() {
        // Pseudo-random-looking fixed input long enough for many windows.
        let mut text = String::new();
        let mut v = 7u32;
        for _ in 0..300 {
            v = v.wrapping_mul(1103515245).wrapping_add(12345);
            text.push(if (v >> 16) & 1 == 1 { '1' } else { '0' });
        }
        let x = word(&text);
        for dist in [skewed_pairs(), octal_dist()] {
            let l = dist.block_len();
            let spec = build_sliding_gambler(&dist).unwrap();
            let traj = spec.run(&Rational::one(), &x).unwrap();
            let n = x.len();
            // log2 of the raw bet product: strip the 2^{nℓ} normalisation.
            let raw = traj.final_ledger().log2_mantissa() - (n * l) as f64;
            let interior: f64 =
                (l..=n - l).map(|j| rat::to_f64(&dist.weight(&x.slice(j..j + l))).log2()).sum();
            let max_log = dist.iter().map(|(_, r)| rat::to_f64(r).log2().abs()).fold(0.0, f64::max);
            let bound = sliding_boundary_budget(l, 2, max_log);
            assert!((raw - interior).abs() <= bound, "ℓ={l}: |{raw} - {interior}| > {bound}");
        }
    }

    #[test]
    fn phase_extension_preserves_trajectories() {
        let spec = build_disjoint_gambler(&dist_of(
            &[("0", rat::ratio(1, 3)), ("1", rat::ratio(2, 3))],
            1,
        ))
        .unwrap();
        let extended = extend_phase(&spec, 3).unwrap();
        assert_eq!(extended.num_states(), spec.num_states() * 3);
        let x = word("011010011101001110100111010011");
        let s = rat::ratio(1, 2);
        assert!(spec.run(&s, &x).unwrap().same_capitals(&extended.run(&s, &x).unwrap()));

        let identity = extend_phase(&spec, 1).unwrap();
        assert_eq!(identity.num_states(), spec.num_states());
        assert!(spec.run(&s, &x).unwrap().same_capitals(&identity.run(&s, &x).unwrap()));
    }

    #[test]
    fn phase_extension_multiplies_state_count() {
        let three_state = build_disjoint_gambler(&skewed_pairs()).unwrap();
        assert_eq!(three_state.num_states(), 3);
        assert_eq!(extend_phase(&three_state, 5).unwrap().num_states(), 15);
        let seven_state = build_sliding_gambler(&skewed_pairs()).unwrap();
        assert_eq!(extend_phase(&seven_state, 4).unwrap().num_states(), 28);
    }

    #[test]
    fn replication_raises_capital_to_a_power() {
        let spec = build_sliding_gambler(&skewed_pairs()).unwrap();
        let doubled = replicate_bets(&spec, 2).unwrap();
        assert_eq!(doubled.k(), 4);
        let x = word("0010110100101");
        let s = rat::ratio(5, 4);
        let base = spec.run(&s, &x).unwrap();
        let squared = doubled.run(&s, &x).unwrap();
        assert_eq!(squared.final_ledger().mantissa(), base.final_ledger().mantissa().pow(2));

        let same = replicate_bets(&spec, 1).unwrap();
        assert!(spec.run(&s, &x).unwrap().same_capitals(&same.run(&s, &x).unwrap()));
    }

    #[test]
    fn replication_squares_the_all_in_run() {
        let dist = dist_of(&[("0", rat::ratio(1, 100)), ("1", rat::ratio(99, 100))], 1);
        let spec = build_disjoint_gambler(&dist).unwrap();
        let doubled = replicate_bets(&spec, 2).unwrap();
        let x = word("111");
        let base = spec.run(&Rational::one(), &x).unwrap();
        let rep = doubled.run(&Rational::one(), &x).unwrap();
        assert_eq!(rep.final_ledger().mantissa(), base.final_ledger().mantissa().pow(2));
        // k doubles, so the product of two independent copies matches too.
        let product = CapitalLedger::product(&[base.final_ledger(), base.final_ledger()]).unwrap();
        assert!(product.same_capital(rep.final_ledger()));
    }
}
