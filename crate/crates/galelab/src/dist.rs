//! Exact rational distributions over fixed-length blocks.
//!
//! A [`Distribution`] assigns nonnegative rational weights summing to exactly
//! 1 to blocks in Σ^ℓ. Absent blocks carry weight 0. Prefix marginals and
//! conditional next-symbol bets satisfy the chain rule exactly:
//!
//! ```text
//!   P(w) = Π_{i<ℓ} bet(w[0:i], w[i])        where bet(v, a) = P'(va) / P'(v)
//! ```
//!
//! with P' the prefix marginal. These conditionals are what the gambler
//! builders turn into bet rows, so they are kept exact end to end.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::alphabet::{Alphabet, Word};
use crate::rat::{self, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DistError {
    #[error("block {block:?} has length {got}, expected {expected}")]
    WrongBlockLength { block: String, got: usize, expected: usize },
    #[error("block {block:?} has negative weight {weight}")]
    NegativeWeight { block: String, weight: String },
    #[error("weights sum to {0}, expected exactly 1")]
    SumNotOne(String),
    #[error("prefix length {len} exceeds block length {block_len}")]
    PrefixTooLong { len: usize, block_len: usize },
    #[error("conditional bet after prefix {prefix:?} is undefined: marginal weight is zero")]
    ZeroMarginal { prefix: String },
    #[error("block {0:?} uses a different alphabet")]
    AlphabetMismatch(String),
}

/// An exact distribution over Σ^ℓ. Only nonzero weights are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    alphabet: Arc<Alphabet>,
    block_len: usize,
    weights: BTreeMap<Vec<u8>, Rational>,
}

impl Distribution {
    /// Validates block lengths, nonnegativity, and that the weights sum to
    /// exactly 1. Zero weights are dropped (absence means zero).
    pub fn new(
        alphabet: Arc<Alphabet>,
        block_len: usize,
        weights: impl IntoIterator<Item = (Word, Rational)>,
    ) -> Result<Self, DistError> {
        let mut map = BTreeMap::new();
        let mut sum = Rational::zero();
        for (block, weight) in weights {
            if block.alphabet() != &alphabet {
                return Err(DistError::AlphabetMismatch(block.to_string()));
            }
            if block.len() != block_len {
                return Err(DistError::WrongBlockLength {
                    block: block.to_string(),
                    got: block.len(),
                    expected: block_len,
                });
            }
            if weight.is_negative() {
                return Err(DistError::NegativeWeight {
                    block: block.to_string(),
                    weight: rat::format(&weight),
                });
            }
            sum += &weight;
            if !weight.is_zero() {
                map.insert(block.symbols().to_vec(), weight);
            }
        }
        if !sum.is_one() {
            return Err(DistError::SumNotOne(rat::format(&sum)));
        }
        Ok(Distribution { alphabet, block_len, weights: map })
    }

    /// Builds from exact block counts (weight = count / total).
    pub fn from_counts(
        alphabet: Arc<Alphabet>,
        block_len: usize,
        counts: impl IntoIterator<Item = (Word, u64)>,
        total: u64,
    ) -> Result<Self, DistError> {
        let total_r = rat::from_u64(total);
        let weights = counts.into_iter().map(|(block, c)| (block, rat::from_u64(c) / &total_r));
        Self::new(alphabet, block_len, weights)
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// Weight of a block; zero when absent.
    pub fn weight(&self, block: &Word) -> Rational {
        debug_assert_eq!(block.len(), self.block_len);
        self.weights.get(block.symbols()).cloned().unwrap_or_else(Rational::zero)
    }

    /// Number of blocks with nonzero weight.
    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    /// True when every block in Σ^ℓ has positive weight.
    pub fn is_positive(&self) -> bool {
        self.weights.len() == (self.alphabet.size() as u128).pow(self.block_len as u32) as usize
    }

    /// The smallest nonzero weight.
    pub fn min_weight(&self) -> Option<&Rational> {
        self.weights.values().min()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Word, &Rational)> {
        self.weights.iter().map(|(syms, w)| {
            (Word::from_symbols_unchecked(Arc::clone(&self.alphabet), syms.clone()), w)
        })
    }

    /// Marginal weight of a prefix: the sum over all blocks extending it.
    pub fn marginal(&self, prefix: &Word) -> Result<Rational, DistError> {
        if prefix.len() > self.block_len {
            return Err(DistError::PrefixTooLong { len: prefix.len(), block_len: self.block_len });
        }
        let p = prefix.symbols();
        let mut sum = Rational::zero();
        for (syms, w) in &self.weights {
            if &syms[..p.len()] == p {
                sum += w;
            }
        }
        Ok(sum)
    }

    /// Conditional bet on `symbol` after seeing `prefix`:
    /// marginal(prefix·symbol) / marginal(prefix).
    pub fn conditional_bet(&self, prefix: &Word, symbol: u8) -> Result<Rational, DistError> {
        if prefix.len() + 1 > self.block_len {
            return Err(DistError::PrefixTooLong {
                len: prefix.len() + 1,
                block_len: self.block_len,
            });
        }
        let denom = self.marginal(prefix)?;
        if denom.is_zero() {
            return Err(DistError::ZeroMarginal { prefix: prefix.to_string() });
        }
        let numer = self.marginal(&prefix.child(symbol))?;
        Ok(numer / denom)
    }

    /// All σ conditional bets after `prefix`; sums to exactly 1.
    pub fn conditional_row(&self, prefix: &Word) -> Result<Vec<Rational>, DistError> {
        (0..self.alphabet.size() as u8).map(|a| self.conditional_bet(prefix, a)).collect()
    }

    /// Block entropy in bits (not normalised by block length).
    pub fn entropy_bits(&self) -> f64 {
        self.weights
            .values()
            .map(|w| {
                let p = rat::to_f64(w);
                -p * p.log2()
            })
            .sum()
    }

    /// Renders as `block:weight` pairs, sorted by block.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for (block, w) in self.iter() {
            if !out.is_empty() {
                out.push(' ');
            }
            let _ = write!(out, "{}:{}", block, rat::format(w));
        }
        out
    }
}
