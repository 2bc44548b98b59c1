//! Exact capital accounting for induced s-gales.
//!
//! A gambler's capital after n symbols has the form
//!
//! ```text
//!   d(w) = σ^((s-1)·k·n) · mantissa(w),    mantissa(w) = c0 · Π σ·bet_i
//! ```
//!
//! one bet factor per bet row per symbol (k rows). The σ·bet factors are the
//! fair-odds-normalised payouts: a uniform bet contributes factor 1, so a fair
//! gambler's mantissa stays at c0, and the irrational power σ^((s-1)kn) never
//! touches the exact part. In the binary case this is exactly the recursion
//! d(wb) = 2^s · d(w) · [(1-b)(1-β) + b·β], split so that the averaging
//! identity d(w) = (1/σ)·Σ_a d(wa) becomes an identity of exact rational
//! mantissas.
//!
//! [`CapitalLedger`] keeps the factor product in factored form (distinct
//! factor → multiplicity). Updates and snapshots are O(1)-ish, log2 values
//! come from the factor table without big-integer work, and the exact
//! mantissa is materialised on demand via binary exponentiation, so
//! 10^5-step runs stay cheap while equality tests stay exact.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::rat::{self, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LedgerError {
    #[error("bet factors must be nonnegative, got {0}")]
    NegativeBet(String),
    #[error("cannot multiply ledgers with different s, σ, or step counts")]
    MixedProduct,
}

/// An exact nonnegative rational kept as an unreduced numerator/denominator
/// pair. Comparisons cross-multiply, so values never need reducing; use
/// [`Mantissa::to_rational`] (which reduces) only on small values.
#[derive(Debug, Clone)]
pub struct Mantissa {
    numer: BigUint,
    denom: BigUint,
}

impl Mantissa {
    pub fn one() -> Self {
        Mantissa { numer: BigUint::one(), denom: BigUint::one() }
    }

    pub fn zero() -> Self {
        Mantissa { numer: BigUint::zero(), denom: BigUint::one() }
    }

    /// From a nonnegative rational.
    pub fn from_rational(r: &Rational) -> Result<Self, LedgerError> {
        if r.is_negative() {
            return Err(LedgerError::NegativeBet(rat::format(r)));
        }
        Ok(Mantissa { numer: r.numer().magnitude().clone(), denom: r.denom().magnitude().clone() })
    }

    pub fn is_zero(&self) -> bool {
        self.numer.is_zero()
    }

    pub fn mul_rational(&mut self, r: &Rational) {
        debug_assert!(!r.is_negative());
        self.numer *= r.numer().magnitude();
        self.denom *= r.denom().magnitude();
    }

    pub fn mul(&mut self, other: &Mantissa) {
        self.numer *= &other.numer;
        self.denom *= &other.denom;
    }

    pub fn pow(&self, exp: u32) -> Mantissa {
        Mantissa { numer: self.numer.pow(exp), denom: self.denom.pow(exp) }
    }

    pub fn add(&self, other: &Mantissa) -> Mantissa {
        Mantissa {
            numer: &self.numer * &other.denom + &other.numer * &self.denom,
            denom: &self.denom * &other.denom,
        }
    }

    /// Scales by a nonnegative integer.
    pub fn scale(&self, n: u32) -> Mantissa {
        Mantissa { numer: &self.numer * BigUint::from(n), denom: self.denom.clone() }
    }

    /// log2 of the value; -inf for zero.
    pub fn log2(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        rat::log2_biguint(&self.numer) - rat::log2_biguint(&self.denom)
    }

    /// Reduced rational value. Reduction runs a gcd over the full numerator
    /// and denominator, so keep this to small values (tests, short words).
    pub fn to_rational(&self) -> Rational {
        Rational::new(BigInt::from(self.numer.clone()), BigInt::from(self.denom.clone()))
    }

    pub fn to_f64(&self) -> f64 {
        let n = self.numer.to_f64().unwrap_or(f64::INFINITY);
        let d = self.denom.to_f64().unwrap_or(f64::INFINITY);
        if n.is_finite() && d.is_finite() && d != 0.0 {
            n / d
        } else {
            self.log2().exp2()
        }
    }
}

impl PartialEq for Mantissa {
    fn eq(&self, other: &Self) -> bool {
        &self.numer * &other.denom == &other.numer * &self.denom
    }
}

impl Eq for Mantissa {}

impl PartialOrd for Mantissa {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mantissa {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.numer * &other.denom).cmp(&(&other.numer * &self.denom))
    }
}

impl PartialEq<Rational> for Mantissa {
    fn eq(&self, other: &Rational) -> bool {
        if other.is_negative() {
            return false;
        }
        &self.numer * other.denom().magnitude() == other.numer().magnitude() * &self.denom
    }
}

impl fmt::Display for Mantissa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", rat::format(&self.to_rational()))
    }
}

/// Capital of an induced s-gale along one input, in factored form.
///
/// `log2_value()` is the exact gale capital log2 d(w); `mantissa()` is the
/// exact σ-normalised bet product including the starting capital.
#[derive(Debug, Clone)]
pub struct CapitalLedger {
    sigma: u32,
    k_bets: u32,
    s: Rational,
    start: Rational,
    steps: u64,
    /// Count of zero bet factors consumed; any makes the mantissa zero.
    zero_factors: u64,
    /// Distinct nonzero σ·bet factors with multiplicities.
    factors: BTreeMap<Rational, u64>,
}

impl CapitalLedger {
    pub fn new(sigma: u32, k_bets: u32, s: Rational, start: Rational) -> Self {
        assert!(sigma >= 2, "alphabet size must be at least 2");
        assert!(k_bets >= 1, "at least one bet row");
        assert!(!start.is_negative(), "starting capital must be nonnegative");
        CapitalLedger {
            sigma,
            k_bets,
            s,
            start,
            steps: 0,
            zero_factors: 0,
            factors: BTreeMap::new(),
        }
    }

    /// Consumes one input symbol: exactly k bet factors, each in [0, 1].
    pub fn advance<'a>(&mut self, bets: impl IntoIterator<Item = &'a Rational>) {
        let sigma = Rational::from_integer(BigInt::from(self.sigma));
        let mut applied = 0u32;
        for bet in bets {
            debug_assert!(!bet.is_negative(), "negative bet factor");
            if bet.is_zero() {
                self.zero_factors += 1;
            } else {
                *self.factors.entry(bet * &sigma).or_insert(0) += 1;
            }
            applied += 1;
        }
        debug_assert_eq!(applied, self.k_bets, "one bet factor per row per symbol");
        self.steps += 1;
    }

    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    pub fn k_bets(&self) -> u32 {
        self.k_bets
    }

    pub fn s_param(&self) -> &Rational {
        &self.s
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn start(&self) -> &Rational {
        &self.start
    }

    /// True once any zero bet factor (or zero starting capital) has entered.
    pub fn is_ruined(&self) -> bool {
        self.zero_factors > 0 || self.start.is_zero()
    }

    /// Exact mantissa: c0 · Π (σ·bet)^multiplicity.
    pub fn mantissa(&self) -> Mantissa {
        if self.is_ruined() {
            return Mantissa::zero();
        }
        let mut m = Mantissa::from_rational(&self.start).expect("start is nonnegative");
        for (factor, &count) in &self.factors {
            let base = Mantissa::from_rational(factor).expect("factors are positive");
            let exp = u32::try_from(count).expect("factor multiplicity fits u32");
            m.mul(&base.pow(exp));
        }
        m
    }

    /// log2 of the mantissa from the factor table; -inf when ruined.
    pub fn log2_mantissa(&self) -> f64 {
        if self.is_ruined() {
            return f64::NEG_INFINITY;
        }
        let mut total = rat::log2(&self.start).expect("positive start");
        for (factor, &count) in &self.factors {
            total += count as f64 * rat::log2(factor).expect("positive factor");
        }
        total
    }

    /// log2 of the gale capital d(w) = σ^((s-1)·k·n) · mantissa.
    pub fn log2_value(&self) -> f64 {
        let exponent = (rat::to_f64(&self.s) - 1.0)
            * self.k_bets as f64
            * self.steps as f64
            * (self.sigma as f64).log2();
        exponent + self.log2_mantissa()
    }

    /// Pointwise product of capitals: same σ, s, and step count; bet rows
    /// concatenate, starting capitals multiply.
    pub fn product(parts: &[&CapitalLedger]) -> Result<CapitalLedger, LedgerError> {
        let first = parts.first().ok_or(LedgerError::MixedProduct)?;
        let mut out = CapitalLedger {
            sigma: first.sigma,
            k_bets: 0,
            s: first.s.clone(),
            start: Rational::one(),
            steps: first.steps,
            zero_factors: 0,
            factors: BTreeMap::new(),
        };
        for part in parts {
            if part.sigma != out.sigma || part.s != out.s || part.steps != out.steps {
                return Err(LedgerError::MixedProduct);
            }
            out.k_bets += part.k_bets;
            out.start *= &part.start;
            out.zero_factors += part.zero_factors;
            for (factor, count) in &part.factors {
                *out.factors.entry(factor.clone()).or_insert(0) += count;
            }
        }
        Ok(out)
    }

    /// Exact equality of the capital processes (same σ, s, steps, k, and
    /// mantissa value).
    pub fn same_capital(&self, other: &CapitalLedger) -> bool {
        self.sigma == other.sigma
            && self.k_bets == other.k_bets
            && self.s == other.s
            && self.steps == other.steps
            && self.mantissa() == other.mantissa()
    }
}
