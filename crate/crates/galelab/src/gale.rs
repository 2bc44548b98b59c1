//! Gale-condition and product-gale inequality checkers, plus prefix-cover
//! extraction.
//!
//! An s-gale satisfies d(w) = σ^{-s}·Σ_a d(wa); in the factored ledger
//! representation the σ^s terms cancel and the identity becomes exact on
//! mantissas: m(w) = (1/σ)·Σ_a m(wa). A k-product s-gale is a pointwise
//! product d = d_1·…·d_k of s-gales. Two inequalities are checked in the
//! log2 domain (roots d^{1/k} are irrational, their logs are not):
//!
//! ```text
//!   d(w0)^{1/k} + d(w1)^{1/k} ≤ 2^s · d(w)^{1/k}
//!   Σ_{u∈B} 2^{-s|u|} · d(wu)^{1/k} ≤ d(w)^{1/k}      (B an antichain)
//! ```
//!
//! [`extract_cover`] runs the breadth-first search behind the second
//! inequality's covering argument: it collects the minimal words whose
//! capital reaches 2^{n·k}·a_ℓ and certifies the cover by its Kraft sum.

use std::collections::VecDeque;
use std::sync::Arc;

use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::alphabet::{Alphabet, Word};
use crate::gambler::GamblerSpec;
use crate::ledger::CapitalLedger;
use crate::rat::{self, Rational};

#[derive(Debug, Error)]
pub enum GaleError {
    #[error("check requires a single-factor gale, got k = {0}")]
    NotSingleFactor(u32),
    #[error("check is stated for the binary alphabet, got σ = {0}")]
    BinaryOnly(u32),
    #[error("{a:?} is a proper prefix of {b:?}, not an antichain")]
    NotAntichain { a: String, b: String },
    #[error("prefix-set enumeration is capped at depth {max}, got {got}")]
    DepthTooLarge { got: u32, max: u32 },
    #[error("words use a different alphabet than the oracle")]
    AlphabetMismatch,
    #[error("cover extraction requires d(λ) = 1, got mantissa {0}")]
    RootNotNormalized(String),
    #[error("product factors must share one alphabet and s parameter")]
    MixedProduct,
    #[error("a product gale needs at least one factor")]
    EmptyProduct,
}

/// Read access to a (product) gale's capital function.
///
/// Implementations must be pure: `evaluate` at equal words returns equal
/// capitals, and concurrent evaluation is safe. Words are assumed to use
/// [`GaleOracle::alphabet`]; implementations may panic otherwise.
pub trait GaleOracle: Send + Sync {
    fn alphabet(&self) -> &Arc<Alphabet>;
    fn s_param(&self) -> &Rational;
    /// Number of product factors; 1 for a plain s-gale.
    fn k_factors(&self) -> u32;
    fn evaluate(&self, w: &Word) -> CapitalLedger;

    /// log2 of the capital d(w); -inf at ruin.
    fn log2_capital(&self, w: &Word) -> f64 {
        self.evaluate(w).log2_value()
    }
}

/// The s-gale a finite-state gambler induces: capital after reading w at
/// fairness parameter s. A k-row gambler induces a k-product gale whose
/// factors are its row projections.
pub struct InducedGale {
    gambler: Arc<GamblerSpec>,
    s: Rational,
}

impl InducedGale {
    pub fn new(gambler: Arc<GamblerSpec>, s: Rational) -> Self {
        InducedGale { gambler, s }
    }

    pub fn gambler(&self) -> &Arc<GamblerSpec> {
        &self.gambler
    }
}

impl GaleOracle for InducedGale {
    fn alphabet(&self) -> &Arc<Alphabet> {
        self.gambler.alphabet()
    }

    fn s_param(&self) -> &Rational {
        &self.s
    }

    fn k_factors(&self) -> u32 {
        self.gambler.k() as u32
    }

    fn evaluate(&self, w: &Word) -> CapitalLedger {
        let traj = self
            .gambler
            .run_word_checkpointed(&self.s, w, &[w.len() as u64])
            .expect("word matches the gambler's alphabet");
        traj.final_ledger().clone()
    }
}

/// Pointwise product of gales sharing one alphabet and s parameter.
pub struct ProductGale {
    factors: Vec<Arc<dyn GaleOracle>>,
    k: u32,
}

impl ProductGale {
    pub fn new(factors: Vec<Arc<dyn GaleOracle>>) -> Result<Self, GaleError> {
        let first = factors.first().ok_or(GaleError::EmptyProduct)?;
        let alphabet = Arc::clone(first.alphabet());
        let s = first.s_param().clone();
        for f in &factors[1..] {
            if f.alphabet() != &alphabet || f.s_param() != &s {
                return Err(GaleError::MixedProduct);
            }
        }
        let k = factors.iter().map(|f| f.k_factors()).sum();
        Ok(ProductGale { factors, k })
    }
}

impl GaleOracle for ProductGale {
    fn alphabet(&self) -> &Arc<Alphabet> {
        self.factors[0].alphabet()
    }

    fn s_param(&self) -> &Rational {
        self.factors[0].s_param()
    }

    fn k_factors(&self) -> u32 {
        self.k
    }

    fn evaluate(&self, w: &Word) -> CapitalLedger {
        let parts: Vec<CapitalLedger> = self.factors.iter().map(|f| f.evaluate(w)).collect();
        let refs: Vec<&CapitalLedger> = parts.iter().collect();
        CapitalLedger::product(&refs).expect("factors share σ, s and step count")
    }
}

/// Checks the averaging identity d(w) = σ^{-s}·Σ_a d(wa) at one word.
///
/// The check runs exactly on mantissas (σ·m(w) = Σ_a m(wa)); `_tol` is kept
/// for oracles that could only expose log-domain values, which the ledger
/// never needs.
pub fn check_gale_condition(
    oracle: &dyn GaleOracle,
    w: &Word,
    _tol: f64,
) -> Result<bool, GaleError> {
    if oracle.k_factors() != 1 {
        return Err(GaleError::NotSingleFactor(oracle.k_factors()));
    }
    let sigma = oracle.alphabet().sigma();
    let mut sum = oracle.evaluate(&w.child(0)).mantissa();
    for a in 1..sigma {
        sum = sum.add(&oracle.evaluate(&w.child(a as u8)).mantissa());
    }
    Ok(oracle.evaluate(w).mantissa().scale(sigma) == sum)
}

/// log2(Σ 2^{t_i}) with -inf handled; empty input is an empty sum.
fn log2_sum(terms: &[f64]) -> f64 {
    let peak = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    peak + terms.iter().map(|t| (t - peak).exp2()).sum::<f64>().log2()
}

/// Checks d(w0)^{1/k} + d(w1)^{1/k} ≤ 2^s·d(w)^{1/k} at one word, in the
/// log2 domain within `tol`. Binary alphabet only.
pub fn check_root_supergale(
    oracle: &dyn GaleOracle,
    w: &Word,
    tol: f64,
) -> Result<bool, GaleError> {
    let sigma = oracle.alphabet().sigma();
    if sigma != 2 {
        return Err(GaleError::BinaryOnly(sigma));
    }
    let k = oracle.k_factors() as f64;
    let lhs =
        log2_sum(&[oracle.log2_capital(&w.child(0)) / k, oracle.log2_capital(&w.child(1)) / k]);
    let rhs = rat::to_f64(oracle.s_param()) + oracle.log2_capital(w) / k;
    Ok(lhs <= rhs + tol)
}

/// An antichain of words: no member is a proper prefix of another.
#[derive(Debug, Clone)]
pub struct PrefixSet {
    members: Vec<Word>,
}

impl PrefixSet {
    /// Validates the antichain property; duplicates collapse (set semantics).
    pub fn new(mut members: Vec<Word>) -> Result<Self, GaleError> {
        if let Some(first) = members.first() {
            let alphabet = first.alphabet().clone();
            if members.iter().any(|w| w.alphabet() != &alphabet) {
                return Err(GaleError::AlphabetMismatch);
            }
        }
        members.sort_by(|a, b| a.symbols().cmp(b.symbols()));
        members.dedup_by(|a, b| a.symbols() == b.symbols());
        // After a lexicographic sort any prefix pair is adjacent.
        for pair in members.windows(2) {
            if pair[0].is_prefix_of(&pair[1]) {
                return Err(GaleError::NotAntichain {
                    a: pair[0].to_string(),
                    b: pair[1].to_string(),
                });
            }
        }
        Ok(PrefixSet { members })
    }

    pub fn empty() -> Self {
        PrefixSet { members: Vec::new() }
    }

    pub fn members(&self) -> &[Word] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

const MAX_ENUM_DEPTH: u32 = 4;

/// Every antichain of the binary tree of depth `max_depth`, including the
/// empty one. Counts follow f(d) = f(d-1)² + 1 with f(0) = 2, so the depth
/// cap of 4 bounds the output at 458 330 sets.
pub fn enumerate_prefix_sets(max_depth: u32) -> Result<Vec<PrefixSet>, GaleError> {
    if max_depth > MAX_ENUM_DEPTH {
        return Err(GaleError::DepthTooLarge { got: max_depth, max: MAX_ENUM_DEPTH });
    }
    let alphabet = Alphabet::binary();
    let sets = antichains(max_depth);
    Ok(sets
        .into_iter()
        .map(|set| PrefixSet {
            members: set
                .into_iter()
                .map(|syms| Word::from_symbols_unchecked(Arc::clone(&alphabet), syms))
                .collect(),
        })
        .collect())
}

/// An antichain of the depth-d binary tree is empty, {λ}, or the disjoint
/// union of one antichain per subtree, prefixed by the branch symbol.
fn antichains(depth: u32) -> Vec<Vec<Vec<u8>>> {
    if depth == 0 {
        return vec![Vec::new(), vec![Vec::new()]];
    }
    let sub = antichains(depth - 1);
    let mut out = Vec::with_capacity(sub.len() * sub.len() + 1);
    out.push(vec![Vec::new()]);
    for left in &sub {
        for right in &sub {
            let mut set = Vec::with_capacity(left.len() + right.len());
            for w in left {
                let mut prefixed = Vec::with_capacity(w.len() + 1);
                prefixed.push(0);
                prefixed.extend_from_slice(w);
                set.push(prefixed);
            }
            for w in right {
                let mut prefixed = Vec::with_capacity(w.len() + 1);
                prefixed.push(1);
                prefixed.extend_from_slice(w);
                set.push(prefixed);
            }
            out.push(set);
        }
    }
    out
}

/// Checks Σ_{u∈B} 2^{-s|u|}·d(wu)^{1/k} ≤ d(w)^{1/k} at one anchor word, in
/// the log2 domain within `tol`. Binary alphabet only; the empty antichain
/// is trivially covered.
pub fn check_kraft_inequality(
    oracle: &dyn GaleOracle,
    w: &Word,
    set: &PrefixSet,
    tol: f64,
) -> Result<bool, GaleError> {
    let sigma = oracle.alphabet().sigma();
    if sigma != 2 {
        return Err(GaleError::BinaryOnly(sigma));
    }
    if set.members().iter().any(|u| u.alphabet() != oracle.alphabet()) {
        return Err(GaleError::AlphabetMismatch);
    }
    let s = rat::to_f64(oracle.s_param());
    let k = oracle.k_factors() as f64;
    let terms: Vec<f64> = set
        .members()
        .iter()
        .map(|u| {
            let wu = w.concat(u).expect("alphabets checked above");
            -s * u.len() as f64 + oracle.log2_capital(&wu) / k
        })
        .collect();
    let rhs = oracle.log2_capital(w) / k;
    Ok(log2_sum(&terms) <= rhs + tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverStatus {
    /// Every branch either reached the threshold or was ruined.
    Complete,
    /// Some branches were still live at the depth cap; their mass is
    /// reported in `uncovered`.
    Partial,
    /// No word within the depth cap reached the threshold.
    ThresholdNeverReached,
}

/// The outcome of [`extract_cover`]: the minimal words whose capital reached
/// the threshold, plus the Kraft-sum verdict.
#[derive(Debug, Clone)]
pub struct CoverCertificate {
    pub members: PrefixSet,
    pub kraft_sum: f64,
    /// 2^{-n_target}; the certificate validates iff kraft_sum stays below it.
    pub bound: f64,
    pub a_ell: f64,
    pub threshold_log2: f64,
    pub n_target: u32,
    pub ell_min: u32,
    pub max_depth: u32,
    /// Words at the depth cap still strictly between ruin and the threshold.
    pub uncovered: u64,
    pub status: CoverStatus,
}

#[derive(Serialize)]
struct CoverJson<'a> {
    members: Vec<String>,
    kraft_sum: String,
    bound: String,
    a_ell: String,
    threshold_log2: String,
    n_target: u32,
    ell_min: u32,
    max_depth: u32,
    uncovered: u64,
    status: &'a CoverStatus,
    valid: bool,
}

impl CoverCertificate {
    /// kraft_sum ≤ 2^{-n_target}, with at least one covered branch.
    pub fn validates(&self) -> bool {
        self.status != CoverStatus::ThresholdNeverReached && self.kraft_sum <= self.bound
    }

    pub fn to_json(&self) -> String {
        let json = CoverJson {
            members: self.members.members().iter().map(|w| w.to_string()).collect(),
            kraft_sum: format!("{}", self.kraft_sum),
            bound: format!("{}", self.bound),
            a_ell: format!("{}", self.a_ell),
            threshold_log2: format!("{}", self.threshold_log2),
            n_target: self.n_target,
            ell_min: self.ell_min,
            max_depth: self.max_depth,
            uncovered: self.uncovered,
            status: &self.status,
            valid: self.validates(),
        };
        serde_json::to_string_pretty(&json).expect("certificate serialises")
    }
}

/// Breadth-first search for the minimal words where the capital first
/// reaches 2^{n_target·k}·a_ℓ, with a_ℓ = 1 + max{d(v) : |v| ≤ ell_min}.
///
/// Ruined branches are pruned (zero capital is absorbing for any gale);
/// live branches at `max_depth` count as uncovered mass. Requires d(λ) = 1
/// and a binary alphabet.
pub fn extract_cover(
    oracle: &dyn GaleOracle,
    n_target: u32,
    ell_min: u32,
    max_depth: u32,
) -> Result<CoverCertificate, GaleError> {
    let alphabet = Arc::clone(oracle.alphabet());
    if alphabet.sigma() != 2 {
        return Err(GaleError::BinaryOnly(alphabet.sigma()));
    }
    let root = Word::empty(Arc::clone(&alphabet));
    let root_capital = oracle.evaluate(&root);
    if root_capital.mantissa() != Rational::one() {
        return Err(GaleError::RootNotNormalized(root_capital.mantissa().to_string()));
    }
    let k = oracle.k_factors();
    let max_low = alphabet
        .words_up_to(ell_min as usize)
        .map(|v| oracle.log2_capital(&v))
        .fold(f64::NEG_INFINITY, f64::max);
    let a_ell = 1.0 + max_low.exp2();
    let threshold_log2 = (n_target as f64) * (k as f64) + a_ell.log2();

    let mut members = Vec::new();
    let mut uncovered = 0u64;
    let mut queue = VecDeque::new();
    queue.push_back(root);
    while let Some(w) = queue.pop_front() {
        let capital = oracle.evaluate(&w);
        if capital.is_ruined() {
            continue;
        }
        if capital.log2_value() >= threshold_log2 {
            members.push(w);
            continue;
        }
        if w.len() as u32 >= max_depth {
            uncovered += 1;
            continue;
        }
        queue.push_back(w.child(0));
        queue.push_back(w.child(1));
    }

    let s = rat::to_f64(oracle.s_param());
    let kraft_sum = members.iter().map(|w| (-s * w.len() as f64).exp2()).sum();
    let status = if members.is_empty() {
        CoverStatus::ThresholdNeverReached
    } else if uncovered > 0 {
        CoverStatus::Partial
    } else {
        CoverStatus::Complete
    };
    Ok(CoverCertificate {
        members: PrefixSet::new(members).expect("first-hit words form an antichain"),
        kraft_sum,
        bound: (-(n_target as f64)).exp2(),
        a_ell,
        threshold_log2,
        n_target,
        ell_min,
        max_depth,
        uncovered,
        status,
    })
}
