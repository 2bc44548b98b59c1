//! Block frequencies and normalised block entropies along a stream.
//!
//! Two counting modes over an input prefix of n symbols:
//!
//! ```text
//!   disjoint: blocks x[iℓ .. (i+1)ℓ] for 0 <= i < floor(n/ℓ)   (aligned)
//!   sliding:  windows x[i .. i+ℓ]   for 0 <= i <= n-ℓ          (n-ℓ+1 windows)
//! ```
//!
//! The entropy at block length ℓ is the plug-in estimate normalised to
//! [0, 1]:
//!
//! ```text
//!   H_ℓ = -(1 / (ℓ·log2 σ)) · Σ_w P(w)·log2 P(w),   P(w) = N(w) / total
//! ```
//!
//! Entropy rates are limits inferior in the prefix length. At desk scale the
//! liminf is replaced by a running minimum over a geometric checkpoint
//! schedule, ignoring checkpoints before a burn-in of 100·σ^ℓ symbols where
//! small-sample bias dominates. Sliding counters update in O(1) per symbol by
//! keeping the current window as a packed index, so 10^7-symbol inputs are
//! routine.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::alphabet::{Alphabet, Word};
use crate::seqgen::{SeqError, StreamSource};

/// Largest allowed count table (σ^ℓ entries).
pub const MAX_TABLE: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum EntropyError {
    #[error("block length must be at least 1")]
    BadBlockLength,
    #[error("count table σ^ℓ = {sigma}^{block_len} exceeds the cap of {MAX_TABLE}")]
    TableTooLarge { sigma: u32, block_len: usize },
    #[error("input has {n} symbols, need at least {need} for one window of length {block_len}")]
    WordTooShort { n: u64, need: u64, block_len: usize },
    #[error("no complete block was counted; entropy is undefined")]
    EmptyCounts,
    #[error("l_max must be at least 1")]
    BadLMax,
    #[error(transparent)]
    Stream(#[from] SeqError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockMode {
    Disjoint,
    Sliding,
}

impl fmt::Display for BlockMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockMode::Disjoint => write!(f, "disjoint"),
            BlockMode::Sliding => write!(f, "sliding"),
        }
    }
}

impl FromStr for BlockMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "disjoint" => Ok(BlockMode::Disjoint),
            "sliding" => Ok(BlockMode::Sliding),
            other => Err(format!("unknown mode {other:?} (expected disjoint or sliding)")),
        }
    }
}

/// Dense block counts for one (ℓ, mode) pair.
#[derive(Debug, Clone)]
pub struct BlockCounts {
    alphabet: Arc<Alphabet>,
    block_len: usize,
    mode: BlockMode,
    counts: Vec<u64>,
    window_total: u64,
}

impl BlockCounts {
    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn mode(&self) -> BlockMode {
        self.mode
    }

    /// Number of windows counted (disjoint: floor(n/ℓ); sliding: n-ℓ+1).
    pub fn window_total(&self) -> u64 {
        self.window_total
    }

    pub fn count(&self, block: &Word) -> u64 {
        assert_eq!(block.len(), self.block_len, "block length mismatch");
        self.counts[pack(block.symbols(), self.alphabet.size())]
    }

    /// Blocks with nonzero count, in lexicographic order.
    pub fn nonzero(&self) -> impl Iterator<Item = (Word, u64)> + '_ {
        let sigma = self.alphabet.size();
        self.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(move |(i, &c)| {
            (
                Word::from_symbols_unchecked(
                    Arc::clone(&self.alphabet),
                    unpack(i, sigma, self.block_len),
                ),
                c,
            )
        })
    }

    /// Normalised block entropy in [0, 1]; errors when nothing was counted.
    pub fn entropy(&self) -> Result<f64, EntropyError> {
        block_entropy(self)
    }
}

fn pack(symbols: &[u8], sigma: usize) -> usize {
    symbols.iter().fold(0usize, |acc, &s| acc * sigma + s as usize)
}

fn unpack(mut index: usize, sigma: usize, len: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    for slot in out.iter_mut().rev() {
        *slot = (index % sigma) as u8;
        index /= sigma;
    }
    out
}

/// Incremental block counter; O(1) per symbol in both modes.
#[derive(Debug, Clone)]
pub struct StreamCounter {
    alphabet: Arc<Alphabet>,
    block_len: usize,
    mode: BlockMode,
    counts: Vec<u64>,
    window_total: u64,
    seen: u64,
    /// Packed index of the symbols gathered toward the current window.
    acc: usize,
    /// Symbols gathered so far (disjoint: 0..ℓ; sliding: warm-up only).
    filled: usize,
    /// σ^(ℓ-1), for dropping the oldest symbol of a sliding window.
    high_modulus: usize,
}

impl StreamCounter {
    pub fn new(
        alphabet: Arc<Alphabet>,
        block_len: usize,
        mode: BlockMode,
    ) -> Result<Self, EntropyError> {
        if block_len == 0 {
            return Err(EntropyError::BadBlockLength);
        }
        let sigma = alphabet.size() as u64;
        let table = sigma
            .checked_pow(block_len as u32)
            .filter(|&t| t <= MAX_TABLE)
            .ok_or(EntropyError::TableTooLarge { sigma: sigma as u32, block_len })?;
        let high_modulus = (table / sigma) as usize;
        Ok(StreamCounter {
            alphabet,
            block_len,
            mode,
            counts: vec![0; table as usize],
            window_total: 0,
            seen: 0,
            acc: 0,
            filled: 0,
            high_modulus,
        })
    }

    pub fn push(&mut self, symbol: u8) {
        debug_assert!((symbol as usize) < self.alphabet.size());
        let sigma = self.alphabet.size();
        self.seen += 1;
        match self.mode {
            BlockMode::Disjoint => {
                self.acc = self.acc * sigma + symbol as usize;
                self.filled += 1;
                if self.filled == self.block_len {
                    self.counts[self.acc] += 1;
                    self.window_total += 1;
                    self.acc = 0;
                    self.filled = 0;
                }
            }
            BlockMode::Sliding => {
                if self.filled < self.block_len {
                    self.acc = self.acc * sigma + symbol as usize;
                    self.filled += 1;
                } else {
                    self.acc = (self.acc % self.high_modulus) * sigma + symbol as usize;
                }
                if self.filled == self.block_len {
                    self.counts[self.acc] += 1;
                    self.window_total += 1;
                }
            }
        }
    }

    /// Symbols consumed so far.
    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn window_total(&self) -> u64 {
        self.window_total
    }

    /// Entropy of the counts so far; `None` before the first complete window.
    pub fn entropy_so_far(&self) -> Option<f64> {
        if self.window_total == 0 {
            return None;
        }
        Some(entropy_of_counts(
            &self.counts,
            self.window_total,
            self.block_len,
            self.alphabet.size(),
        ))
    }

    pub fn into_counts(self) -> BlockCounts {
        BlockCounts {
            alphabet: self.alphabet,
            block_len: self.block_len,
            mode: self.mode,
            counts: self.counts,
            window_total: self.window_total,
        }
    }
}

fn entropy_of_counts(counts: &[u64], total: u64, block_len: usize, sigma: usize) -> f64 {
    let total_f = total as f64;
    let mut sum = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / total_f;
            sum -= p * p.log2();
        }
    }
    // +0.0 normalises -0.0 from point masses to exactly 0.0.
    sum / (block_len as f64 * (sigma as f64).log2()) + 0.0
}

/// Counts aligned ℓ-blocks of `x`, discarding a trailing partial block.
pub fn count_disjoint(x: &Word, block_len: usize) -> Result<BlockCounts, EntropyError> {
    let mut counter = StreamCounter::new(Arc::clone(x.alphabet()), block_len, BlockMode::Disjoint)?;
    for &s in x.symbols() {
        counter.push(s);
    }
    Ok(counter.into_counts())
}

/// Counts all n-ℓ+1 sliding windows of `x`; errors when n < ℓ.
pub fn count_sliding(x: &Word, block_len: usize) -> Result<BlockCounts, EntropyError> {
    if (x.len() as u64) < block_len as u64 {
        return Err(EntropyError::WordTooShort {
            n: x.len() as u64,
            need: block_len as u64,
            block_len,
        });
    }
    let mut counter = StreamCounter::new(Arc::clone(x.alphabet()), block_len, BlockMode::Sliding)?;
    for &s in x.symbols() {
        counter.push(s);
    }
    Ok(counter.into_counts())
}

/// Normalised block entropy of a set of counts.
pub fn block_entropy(counts: &BlockCounts) -> Result<f64, EntropyError> {
    if counts.window_total == 0 {
        return Err(EntropyError::EmptyCounts);
    }
    Ok(entropy_of_counts(
        &counts.counts,
        counts.window_total,
        counts.block_len,
        counts.alphabet.size(),
    ))
}

/// Geometric checkpoint schedule n_j = ceil(first · ratio^j), always ending
/// at the full prefix.
#[derive(Debug, Clone, Copy)]
pub struct Schedule {
    pub first: u64,
    pub ratio: f64,
}

impl Schedule {
    pub fn geometric(first: u64, ratio: f64) -> Self {
        assert!(ratio > 1.0, "schedule ratio must exceed 1");
        Schedule { first: first.max(1), ratio }
    }

    /// Default: ~12 checkpoints ending at n, starting near n/100.
    pub fn default_for(n: u64) -> Self {
        Schedule::geometric((n / 100).max(16), 1.5)
    }

    pub fn points(&self, n: u64) -> Vec<u64> {
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        let mut x = self.first as f64;
        while (x.ceil() as u64) < n {
            let p = x.ceil() as u64;
            if out.last() != Some(&p) {
                out.push(p);
            }
            x *= self.ratio;
        }
        if out.last() != Some(&n) {
            out.push(n);
        }
        out
    }
}

/// Entropy trajectory for one (ℓ, mode) pair along a checkpoint schedule.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    pub block_len: usize,
    pub mode: BlockMode,
    /// Checkpoints before this many symbols do not qualify for the minimum.
    pub burn_in: u64,
    pub n_used: u64,
    /// (prefix length, entropy) pairs; prefixes with no complete window are
    /// omitted.
    pub checkpoints: Vec<(u64, f64)>,
    /// Minimum entropy over qualifying checkpoints (all past burn-in, or the
    /// final checkpoint when none qualify).
    pub running_min: f64,
    /// Prefix length achieving the running minimum; ties go to the longest.
    pub argmin_prefix: u64,
}

/// Burn-in before which checkpoints are ignored: 100·σ^ℓ symbols.
pub fn burn_in_for(sigma: u32, block_len: usize) -> u64 {
    (sigma as u64)
        .checked_pow(block_len as u32)
        .and_then(|t| t.checked_mul(100))
        .unwrap_or(u64::MAX)
}

/// Profiles the entropy of the first `n` symbols of the source at one block
/// length, recording entropies at scheduled checkpoints and their running
/// minimum past burn-in.
pub fn entropy_profile(
    source: &dyn StreamSource,
    block_len: usize,
    mode: BlockMode,
    n: u64,
    schedule: Schedule,
) -> Result<EntropyReport, EntropyError> {
    let alphabet = source.alphabet();
    let mut counter = StreamCounter::new(Arc::clone(&alphabet), block_len, mode)?;
    let mut checkpoints = Vec::new();
    let mut marks = schedule.points(n).into_iter().peekable();
    let mut stream = source.open()?;
    let mut consumed: u64 = 0;
    'outer: while consumed < n {
        match stream.next() {
            Some(sym) => {
                counter.push(sym?);
                consumed += 1;
            }
            None => break 'outer,
        }
        while marks.peek() == Some(&consumed) {
            marks.next();
            if let Some(h) = counter.entropy_so_far() {
                checkpoints.push((consumed, h));
            }
        }
    }
    // Stream ended before n: close the profile at the actual length.
    if checkpoints.last().map(|&(p, _)| p) != Some(consumed) {
        if let Some(h) = counter.entropy_so_far() {
            checkpoints.push((consumed, h));
        }
    }
    if checkpoints.is_empty() {
        return Err(EntropyError::EmptyCounts);
    }
    let burn_in = burn_in_for(alphabet.sigma(), block_len);
    let qualifying: Vec<&(u64, f64)> = checkpoints.iter().filter(|&&(p, _)| p >= burn_in).collect();
    let pool: Vec<&(u64, f64)> = if qualifying.is_empty() {
        vec![checkpoints.last().expect("nonempty")]
    } else {
        qualifying
    };
    let mut running_min = f64::INFINITY;
    let mut argmin_prefix = 0;
    for &&(prefix, h) in &pool {
        if h <= running_min {
            running_min = h;
            argmin_prefix = prefix;
        }
    }
    Ok(EntropyReport {
        block_len,
        mode,
        burn_in,
        n_used: consumed,
        checkpoints,
        running_min,
        argmin_prefix,
    })
}

/// Per-ℓ running minima and their minimum over ℓ: the working estimate of
/// the entropy rate (and, through the gale correspondence, of finite-state
/// dimension).
#[derive(Debug, Clone, Serialize)]
pub struct DimensionEstimate {
    pub mode: BlockMode,
    pub n_used: u64,
    /// (ℓ, running-min entropy) for ℓ = 1..=l_max.
    pub per_block_len: Vec<(usize, f64)>,
    /// min over ℓ of the per-ℓ running minima.
    pub estimate: f64,
}

/// Runs [`entropy_profile`] for every ℓ up to `l_max` (in parallel) and takes
/// the minimum over block lengths.
pub fn entropy_rate_estimate(
    source: &(dyn StreamSource + Sync),
    l_max: usize,
    mode: BlockMode,
    n: u64,
    schedule: Schedule,
) -> Result<DimensionEstimate, EntropyError> {
    if l_max == 0 {
        return Err(EntropyError::BadLMax);
    }
    let reports: Result<Vec<EntropyReport>, EntropyError> = (1..=l_max)
        .into_par_iter()
        .map(|l| entropy_profile(source, l, mode, n, schedule))
        .collect();
    let reports = reports?;
    let per_block_len: Vec<(usize, f64)> =
        reports.iter().map(|r| (r.block_len, r.running_min)).collect();
    let estimate = per_block_len.iter().map(|&(_, h)| h).fold(f64::INFINITY, f64::min);
    let n_used = reports.iter().map(|r| r.n_used).max().unwrap_or(0);
    Ok(DimensionEstimate { mode, n_used, per_block_len, estimate })
}
