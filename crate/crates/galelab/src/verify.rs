//! Randomized and exhaustive verification suites behind the `verify`
//! subcommand.
//!
//! Every suite draws its instances from a ChaCha8 generator seeded with an
//! explicit 64-bit value, so a (suite, trials, seed) triple reproduces the
//! same instances and the same report. A failing check records the trial and
//! the offending word; the suite keeps going so one run surfaces every
//! failure up to a reporting cap.
//!
//! The `gale` suite accepts an externally supplied gambler in place of the
//! random ones. Such specs are deliberately loaded without row validation by
//! the caller, so broken fixtures (rows that do not sum to 1) reach the
//! exact-averaging check and fail there rather than at parse time.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::alphabet::{Alphabet, Word};
use crate::construct;
use crate::dist::Distribution;
use crate::gale::{self, CoverStatus, GaleOracle, InducedGale, ProductGale};
use crate::gambler::GamblerSpec;
use crate::rat::{self, Rational};

/// Cap on stored failure descriptions; the count keeps rising past it.
pub const MAX_REPORTED_FAILURES: usize = 20;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown suite {0:?}; expected gale, root, kraft, cover, or construct")]
    UnknownSuite(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Exact per-word averaging of induced single-bet gales.
    Gale,
    /// Root-sum supergale inequality on random multi-bet gamblers.
    Root,
    /// Kraft sums over random antichains and anchors.
    Kraft,
    /// Span-cover extraction from gales built to win everywhere.
    Cover,
    /// Distribution-matched builders: cumulative bets, boundary bounds,
    /// bet replication.
    Construct,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::Gale => "gale",
            Suite::Root => "root",
            Suite::Kraft => "kraft",
            Suite::Cover => "cover",
            Suite::Construct => "construct",
        };
        write!(f, "{name}")
    }
}

impl FromStr for Suite {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gale" => Ok(Suite::Gale),
            "root" => Ok(Suite::Root),
            "kraft" => Ok(Suite::Kraft),
            "cover" => Ok(Suite::Cover),
            "construct" => Ok(Suite::Construct),
            other => Err(VerifyError::UnknownSuite(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: u64,
    pub seed: u64,
    /// Individual assertions evaluated.
    pub checks: u64,
    pub failure_count: u64,
    /// First [`MAX_REPORTED_FAILURES`] failure descriptions.
    pub failures: Vec<String>,
    pub passed: bool,
}

impl SuiteReport {
    fn new(suite: Suite, trials: u64, seed: u64) -> Self {
        SuiteReport {
            suite,
            trials,
            seed,
            checks: 0,
            failure_count: 0,
            failures: Vec::new(),
            passed: true,
        }
    }

    fn fail(&mut self, message: String) {
        self.failure_count += 1;
        if self.failures.len() < MAX_REPORTED_FAILURES {
            self.failures.push(message);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One-line summary, e.g. `suite=kraft trials=100 checks=100 failures=0 PASS`.
    pub fn summary_line(&self) -> String {
        format!(
            "suite={} trials={} checks={} failures={} {}",
            self.suite,
            self.trials,
            self.checks,
            self.failure_count,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

/// A random bet row summing to exactly 1: σ−1 cut points over a denominator
/// of at most 12 (zero entries allowed).
pub fn random_row<R: Rng>(rng: &mut R, sigma: u32) -> Vec<Rational> {
    let denom = rng.random_range(1..=12u64);
    let mut cuts: Vec<u64> = (1..sigma).map(|_| rng.random_range(0..=denom)).collect();
    cuts.sort_unstable();
    cuts.push(denom);
    let mut row = Vec::with_capacity(sigma as usize);
    let mut prev = 0;
    for c in cuts {
        row.push(rat::ratio(c - prev, denom));
        prev = c;
    }
    row
}

/// A random k-bet gambler with up to `max_states` states, unit starting
/// capital, and uniformly random transitions.
pub fn random_gambler<R: Rng>(
    rng: &mut R,
    alphabet: &Arc<Alphabet>,
    max_states: usize,
    k: usize,
) -> GamblerSpec {
    let m = rng.random_range(1..=max_states);
    let labels: Vec<String> = (0..m).map(|i| format!("q{i}")).collect();
    let mut delta = BTreeMap::new();
    let mut beta = BTreeMap::new();
    for label in &labels {
        for a in 0..alphabet.size() {
            let target = labels[rng.random_range(0..m)].clone();
            delta.insert((label.clone(), alphabet.glyph(a as u8)), target);
        }
        let rows: Vec<Vec<Rational>> = (0..k).map(|_| random_row(rng, alphabet.sigma())).collect();
        beta.insert(label.clone(), rows);
    }
    GamblerSpec::new(
        Arc::clone(alphabet),
        labels,
        "q0",
        Rational::from_integer(1.into()),
        k,
        &delta,
        &beta,
        None,
    )
    .expect("generated tables are valid")
}

pub fn random_word<R: Rng>(rng: &mut R, alphabet: &Arc<Alphabet>, len: usize) -> Word {
    let syms: Vec<u8> = (0..len).map(|_| rng.random_range(0..alphabet.size()) as u8).collect();
    Word::from_symbols(Arc::clone(alphabet), syms).expect("symbols drawn in range")
}

/// A strictly positive block distribution with small random integer weights.
pub fn random_distribution<R: Rng>(
    rng: &mut R,
    alphabet: &Arc<Alphabet>,
    block_len: usize,
) -> Distribution {
    let blocks: Vec<Word> = alphabet.words_exact(block_len).collect();
    let weights: Vec<u64> = blocks.iter().map(|_| rng.random_range(1..=8u64)).collect();
    let total: u64 = weights.iter().sum();
    Distribution::new(
        Arc::clone(alphabet),
        block_len,
        blocks.into_iter().zip(weights.iter().map(|&c| rat::ratio(c, total))),
    )
    .expect("weights sum to 1")
}

/// A product of single-bet induced gales sharing one random s ∈ [0, 2].
pub fn random_product_gale<R: Rng>(
    rng: &mut R,
    alphabet: &Arc<Alphabet>,
    max_states: usize,
    max_k: usize,
) -> ProductGale {
    let s = rat::ratio(rng.random_range(0..=8), 4);
    let k = rng.random_range(1..=max_k);
    let factors: Vec<Arc<dyn GaleOracle>> = (0..k)
        .map(|_| {
            let spec = random_gambler(rng, alphabet, max_states, 1);
            Arc::new(InducedGale::new(Arc::new(spec), s.clone())) as Arc<dyn GaleOracle>
        })
        .collect();
    ProductGale::new(factors).expect("factors share alphabet and s")
}

/// A product gale at s = 2 whose every factor bets within [2/5, 3/5], so its
/// capital grows by at least 1 + log2(4/5) ≈ 0.678 bits per symbol per
/// factor on every path. Cover extraction always completes on these.
pub fn random_winning_gale<R: Rng>(rng: &mut R) -> ProductGale {
    let alphabet = Alphabet::binary();
    let s = Rational::from_integer(2.into());
    let k = rng.random_range(1..=3);
    let factors: Vec<Arc<dyn GaleOracle>> = (0..k)
        .map(|_| {
            let bet = rat::ratio(rng.random_range(40..=60), 100);
            let label = "q".to_string();
            let mut delta = BTreeMap::new();
            delta.insert((label.clone(), '0'), label.clone());
            delta.insert((label.clone(), '1'), label.clone());
            let mut beta = BTreeMap::new();
            let counterpart = Rational::from_integer(1.into()) - bet.clone();
            beta.insert(label.clone(), vec![vec![counterpart, bet]]);
            let spec = GamblerSpec::new(
                Arc::clone(&alphabet),
                vec![label],
                "q",
                Rational::from_integer(1.into()),
                1,
                &delta,
                &beta,
                None,
            )
            .expect("single-state tables are valid");
            Arc::new(InducedGale::new(Arc::new(spec), s.clone())) as Arc<dyn GaleOracle>
        })
        .collect();
    ProductGale::new(factors).expect("factors share alphabet and s")
}

fn gale_suite(report: &mut SuiteReport, provided: Option<Arc<GamblerSpec>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(report.seed);
    let rounds = if provided.is_some() { 1 } else { report.trials };
    for trial in 0..rounds {
        let spec = match &provided {
            Some(spec) => Arc::clone(spec),
            None => Arc::new(random_gambler(&mut rng, &Alphabet::binary(), 8, 1)),
        };
        let alphabet = Arc::clone(spec.alphabet());
        let depth = if provided.is_some() { 6 } else { 4 };
        let s = rat::ratio(rng.random_range(1..=8), 4);
        let oracle = InducedGale::new(spec, s);
        for w in alphabet.words_up_to(depth) {
            report.checks += 1;
            match gale::check_gale_condition(&oracle, &w, 0.0) {
                Ok(true) => {}
                Ok(false) => {
                    report.fail(format!("trial {trial}: exact averaging fails at w = \"{w}\""))
                }
                Err(e) => report.fail(format!("trial {trial}: condition not checkable: {e}")),
            }
        }
    }
}

fn root_suite(report: &mut SuiteReport) {
    let mut rng = ChaCha8Rng::seed_from_u64(report.seed);
    let alphabet = Alphabet::binary();
    for trial in 0..report.trials {
        let k = rng.random_range(1..=4);
        let spec = random_gambler(&mut rng, &alphabet, 6, k);
        let s = rat::ratio(rng.random_range(0..=8), 4);
        let oracle = InducedGale::new(Arc::new(spec), s);
        for _ in 0..20 {
            let len = rng.random_range(0..=8);
            let w = random_word(&mut rng, &alphabet, len);
            report.checks += 1;
            match gale::check_root_supergale(&oracle, &w, 1e-9) {
                Ok(true) => {}
                Ok(false) => {
                    report.fail(format!("trial {trial}: root-sum bound fails at w = \"{w}\""))
                }
                Err(e) => report.fail(format!("trial {trial}: bound not checkable: {e}")),
            }
        }
    }
}

fn kraft_suite(report: &mut SuiteReport) {
    let mut rng = ChaCha8Rng::seed_from_u64(report.seed);
    let alphabet = Alphabet::binary();
    let sets = gale::enumerate_prefix_sets(2).expect("depth within cap");
    let anchors: Vec<Word> = alphabet.words_up_to(2).collect();
    for trial in 0..report.trials {
        let oracle = random_product_gale(&mut rng, &alphabet, 4, 3);
        let set = &sets[rng.random_range(0..sets.len())];
        let anchor = &anchors[rng.random_range(0..anchors.len())];
        report.checks += 1;
        match gale::check_kraft_inequality(&oracle, anchor, set, 1e-9) {
            Ok(true) => {}
            Ok(false) => report.fail(format!(
                "trial {trial}: kraft sum exceeds capital at anchor \"{anchor}\" over {} members",
                set.len()
            )),
            Err(e) => report.fail(format!("trial {trial}: kraft not checkable: {e}")),
        }
    }
}

fn cover_suite(report: &mut SuiteReport) {
    let mut rng = ChaCha8Rng::seed_from_u64(report.seed);
    for trial in 0..report.trials {
        let oracle = random_winning_gale(&mut rng);
        report.checks += 1;
        match gale::extract_cover(&oracle, 2, 1, 16) {
            Ok(cert) => {
                if cert.status != CoverStatus::Complete {
                    report.fail(format!(
                        "trial {trial}: cover search ended {:?} with {} uncovered",
                        cert.status, cert.uncovered
                    ));
                } else if !cert.validates() {
                    report.fail(format!(
                        "trial {trial}: kraft sum {} exceeds bound {}",
                        cert.kraft_sum, cert.bound
                    ));
                }
            }
            Err(e) => report.fail(format!("trial {trial}: extraction failed: {e}")),
        }
    }
}

fn construct_suite(report: &mut SuiteReport) {
    let mut rng = ChaCha8Rng::seed_from_u64(report.seed);
    let one = Rational::from_integer(1.into());
    for trial in 0..report.trials {
        let alphabet = if trial % 3 == 2 {
            Alphabet::digits(3).expect("base within range")
        } else {
            Alphabet::binary()
        };
        let block_len = rng.random_range(1..=3);
        let dist = random_distribution(&mut rng, &alphabet, block_len);

        let aligned = match construct::build_disjoint_gambler(&dist) {
            Ok(spec) => spec,
            Err(e) => {
                report.fail(format!("trial {trial}: block-aligned build failed: {e}"));
                continue;
            }
        };
        let start = aligned.state_labels()[aligned.start_state()].clone();
        for block in alphabet.words_exact(block_len) {
            report.checks += 1;
            match aligned.cumulative_block_bet(&start, &block) {
                Ok(bet) if bet == dist.weight(&block) => {}
                Ok(bet) => report.fail(format!(
                    "trial {trial}: cumulative bet {} != weight {} at block \"{block}\"",
                    rat::format(&bet),
                    rat::format(&dist.weight(&block))
                )),
                Err(e) => report.fail(format!("trial {trial}: bet not computable: {e}")),
            }
        }

        let sliding = match construct::build_sliding_gambler(&dist) {
            Ok(spec) => spec,
            Err(e) => {
                report.fail(format!("trial {trial}: sliding build failed: {e}"));
                continue;
            }
        };
        let n = 96;
        let x = random_word(&mut rng, &alphabet, n);
        let log2_sigma = f64::from(alphabet.sigma()).log2();
        report.checks += 1;
        match sliding.run_word_checkpointed(&one, &x, &[n as u64]) {
            Ok(traj) => {
                let bets_log2 =
                    traj.final_ledger().log2_mantissa() - (n * block_len) as f64 * log2_sigma;
                let mut interior = 0.0;
                for j in block_len..=(n - block_len) {
                    interior += rat::to_f64(&dist.weight(&x.slice(j..j + block_len))).log2();
                }
                let max_abs_log2 =
                    dist.iter().map(|(_, p)| rat::to_f64(p).log2().abs()).fold(0.0, f64::max);
                let bound =
                    construct::sliding_boundary_budget(block_len, alphabet.sigma(), max_abs_log2)
                        + 1e-6;
                let gap = (bets_log2 - interior).abs();
                if gap > bound {
                    report.fail(format!(
                        "trial {trial}: boundary gap {gap:.6} exceeds bound {bound:.6} at ℓ = {block_len}"
                    ));
                }
            }
            Err(e) => report.fail(format!("trial {trial}: sliding run failed: {e}")),
        }

        report.checks += 1;
        match construct::replicate_bets(&sliding, 2) {
            Ok(doubled) => {
                let base = sliding.run_word_checkpointed(&one, &x, &[n as u64]);
                let rep = doubled.run_word_checkpointed(&one, &x, &[n as u64]);
                match (base, rep) {
                    (Ok(b), Ok(r))
                        if r.final_ledger().mantissa() == b.final_ledger().mantissa().pow(2) => {}
                    (Ok(_), Ok(_)) => report.fail(format!(
                        "trial {trial}: replicated mantissa is not the square of the original"
                    )),
                    (Err(e), _) | (_, Err(e)) => {
                        report.fail(format!("trial {trial}: replication run failed: {e}"))
                    }
                }
            }
            Err(e) => report.fail(format!("trial {trial}: replication failed: {e}")),
        }
    }
}

/// Runs one suite. `spec` substitutes an externally supplied gambler for the
/// random instances of the `gale` suite (one round instead of `trials`) and
/// is ignored by the other suites.
pub fn run_suite(suite: Suite, trials: u64, seed: u64, spec: Option<GamblerSpec>) -> SuiteReport {
    let mut report = SuiteReport::new(suite, trials, seed);
    match suite {
        Suite::Gale => gale_suite(&mut report, spec.map(Arc::new)),
        Suite::Root => root_suite(&mut report),
        Suite::Kraft => kraft_suite(&mut report),
        Suite::Cover => cover_suite(&mut report),
        Suite::Construct => construct_suite(&mut report),
    }
    report.passed = report.failure_count == 0;
    report
}
