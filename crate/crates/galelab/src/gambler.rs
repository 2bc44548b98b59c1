//! Finite-state gamblers and their induced capital processes.
//!
//! A gambler is a finite automaton (states, total transition function δ,
//! start state, starting capital c0) whose states carry k bet rows, each an
//! exact probability vector over the alphabet. Reading symbol b in state q
//! multiplies the capital's mantissa by Π_i σ·β_i(q)[b] (see [`crate::ledger`]
//! for the factored form) and moves to δ(q, b). With one bet row over {0, 1}
//! this is exactly the classical recursion
//!
//! ```text
//!   d(λ)  = c0
//!   d(wb) = 2^s · d(w) · [ (1-b)·(1-β(q_w)) + b·β(q_w) ]
//! ```
//!
//! where q_w is the state reached on w. With k rows the per-symbol factors
//! multiply across rows, so the induced capital is the pointwise product of
//! the k row-projected capitals ([`GamblerSpec::project_row`]).
//!
//! Specs serialise to a small JSON schema with rationals as `"p/q"` strings;
//! [`GamblerSpec::from_json`] validates rows are exactly stochastic, while
//! [`GamblerSpec::from_json_unchecked`] skips that one check so verification
//! suites can demonstrate failures on tampered fixtures.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alphabet::{Alphabet, AlphabetError, Word};
use crate::ledger::CapitalLedger;
use crate::rat::{self, RatError, Rational};
use crate::seqgen::{SeqError, SymbolStream};

#[derive(Debug, Error)]
pub enum GamblerError {
    #[error("gambler needs at least one state")]
    NoStates,
    #[error("duplicate state label {0:?}")]
    DuplicateState(String),
    #[error("state label {0:?} contains a comma (reserved for transition keys)")]
    BadStateLabel(String),
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("transition key {0:?} is not of the form \"state,glyph\"")]
    BadTransitionKey(String),
    #[error("unknown glyph {glyph:?} in transition key {key:?}")]
    UnknownGlyph { key: String, glyph: String },
    #[error("missing transition for state {state:?} on glyph {glyph:?}")]
    MissingTransition { state: String, glyph: char },
    #[error("state {state:?} has {got} bet rows, expected k = {expected}")]
    WrongRowCount { state: String, got: usize, expected: usize },
    #[error("row {row} of state {state:?} has {got} entries, expected σ = {expected}")]
    WrongRowWidth { state: String, row: usize, got: usize, expected: usize },
    #[error("row {row} of state {state:?} sums to {sum}, expected exactly 1")]
    RowNotStochastic { state: String, row: usize, sum: String },
    #[error("bet {value} in row {row} of state {state:?} is outside [0, 1]")]
    BetOutOfRange { state: String, row: usize, value: String },
    #[error("starting capital {0} is negative")]
    NegativeCapital(String),
    #[error("k must be at least 1")]
    BadK,
    #[error("bet row index {row} out of range for k = {k}")]
    RowOutOfRange { row: usize, k: usize },
    #[error("input word uses a different alphabet than the gambler")]
    AlphabetMismatch,
    #[error("alphabet entry {0:?} must be a single glyph")]
    BadAlphabetEntry(String),
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
    #[error("bad rational: {0}")]
    Rational(#[from] RatError),
    #[error("bad gambler JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Stream(#[from] SeqError),
}

/// How a constructed gambler came to be; carried through serialisation for
/// reproducibility, ignored by equality and execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub builder: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
    /// Source distribution as block → "p/q".
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub distribution: BTreeMap<String, String>,
}

/// A validated finite-state gambler with k bet rows per state.
#[derive(Debug, Clone)]
pub struct GamblerSpec {
    alphabet: Arc<Alphabet>,
    k: usize,
    labels: Vec<String>,
    q0: usize,
    c0: Rational,
    /// delta[state][symbol] -> state
    delta: Vec<Vec<usize>>,
    /// beta[state][row][symbol] -> bet in [0, 1]; each row sums to exactly 1.
    beta: Vec<Vec<Vec<Rational>>>,
    provenance: Option<Provenance>,
}

/// The JSON shape of a gambler spec.
#[derive(Serialize, Deserialize)]
struct RawGambler {
    alphabet: Vec<String>,
    k: usize,
    states: Vec<String>,
    q0: String,
    c0: String,
    delta: BTreeMap<String, String>,
    beta: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

impl GamblerSpec {
    /// Builds and fully validates a gambler from label-keyed tables.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alphabet: Arc<Alphabet>,
        labels: Vec<String>,
        q0: &str,
        c0: Rational,
        k: usize,
        delta: &BTreeMap<(String, char), String>,
        beta: &BTreeMap<String, Vec<Vec<Rational>>>,
        provenance: Option<Provenance>,
    ) -> Result<Self, GamblerError> {
        Self::build(alphabet, labels, q0, c0, k, delta, beta, provenance, true)
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        alphabet: Arc<Alphabet>,
        labels: Vec<String>,
        q0: &str,
        c0: Rational,
        k: usize,
        delta: &BTreeMap<(String, char), String>,
        beta: &BTreeMap<String, Vec<Vec<Rational>>>,
        provenance: Option<Provenance>,
        check_rows: bool,
    ) -> Result<Self, GamblerError> {
        if labels.is_empty() {
            return Err(GamblerError::NoStates);
        }
        if k == 0 {
            return Err(GamblerError::BadK);
        }
        if c0.is_negative() {
            return Err(GamblerError::NegativeCapital(rat::format(&c0)));
        }
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, label) in labels.iter().enumerate() {
            if label.contains(',') {
                return Err(GamblerError::BadStateLabel(label.clone()));
            }
            if index.insert(label.as_str(), i).is_some() {
                return Err(GamblerError::DuplicateState(label.clone()));
            }
        }
        let q0 = *index.get(q0).ok_or_else(|| GamblerError::UnknownState(q0.to_string()))?;
        let sigma = alphabet.size();
        // Every delta key must name a known (state, glyph) pair…
        for ((state, glyph), target) in delta {
            if !index.contains_key(state.as_str()) {
                return Err(GamblerError::UnknownState(state.clone()));
            }
            if alphabet.index_of(*glyph).is_none() {
                return Err(GamblerError::UnknownGlyph {
                    key: format!("{state},{glyph}"),
                    glyph: glyph.to_string(),
                });
            }
            if !index.contains_key(target.as_str()) {
                return Err(GamblerError::UnknownState(target.clone()));
            }
        }
        // …and every pair must be present: δ is total.
        let mut delta_table = vec![vec![0usize; sigma]; labels.len()];
        for (i, label) in labels.iter().enumerate() {
            for a in 0..sigma {
                let glyph = alphabet.glyph(a as u8);
                let target = delta.get(&(label.clone(), glyph)).ok_or_else(|| {
                    GamblerError::MissingTransition { state: label.clone(), glyph }
                })?;
                delta_table[i][a] = index[target.as_str()];
            }
        }
        let mut beta_table = Vec::with_capacity(labels.len());
        for label in &labels {
            let rows = beta.get(label).ok_or_else(|| GamblerError::WrongRowCount {
                state: label.clone(),
                got: 0,
                expected: k,
            })?;
            if rows.len() != k {
                return Err(GamblerError::WrongRowCount {
                    state: label.clone(),
                    got: rows.len(),
                    expected: k,
                });
            }
            let mut state_rows = Vec::with_capacity(k);
            for (r, row) in rows.iter().enumerate() {
                if row.len() != sigma {
                    return Err(GamblerError::WrongRowWidth {
                        state: label.clone(),
                        row: r,
                        got: row.len(),
                        expected: sigma,
                    });
                }
                if check_rows {
                    let mut sum = Rational::zero();
                    for bet in row {
                        if bet.is_negative() || bet > &Rational::one() {
                            return Err(GamblerError::BetOutOfRange {
                                state: label.clone(),
                                row: r,
                                value: rat::format(bet),
                            });
                        }
                        sum += bet;
                    }
                    if !sum.is_one() {
                        return Err(GamblerError::RowNotStochastic {
                            state: label.clone(),
                            row: r,
                            sum: rat::format(&sum),
                        });
                    }
                }
                state_rows.push(row.clone());
            }
            beta_table.push(state_rows);
        }
        // Extra beta entries for unknown states are rejected for symmetry.
        for state in beta.keys() {
            if !index.contains_key(state.as_str()) {
                return Err(GamblerError::UnknownState(state.clone()));
            }
        }
        Ok(GamblerSpec {
            alphabet,
            k,
            labels,
            q0,
            c0,
            delta: delta_table,
            beta: beta_table,
            provenance,
        })
    }

    /// Parses and fully validates the JSON schema.
    pub fn from_json(text: &str) -> Result<Self, GamblerError> {
        Self::parse_raw(text, true)
    }

    /// Parses the JSON schema without checking that bet rows are stochastic.
    ///
    /// This exists for negative controls: a tampered spec whose rows do not
    /// sum to 1 still runs, and the gale-condition checker then produces a
    /// concrete counterexample word instead of a load-time rejection.
    pub fn from_json_unchecked(text: &str) -> Result<Self, GamblerError> {
        Self::parse_raw(text, false)
    }

    fn parse_raw(text: &str, check_rows: bool) -> Result<Self, GamblerError> {
        let raw: RawGambler = serde_json::from_str(text)?;
        let mut glyphs = Vec::with_capacity(raw.alphabet.len());
        for entry in &raw.alphabet {
            let mut chars = entry.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => glyphs.push(c),
                _ => return Err(GamblerError::BadAlphabetEntry(entry.clone())),
            }
        }
        let alphabet = Alphabet::new(glyphs)?;
        let mut delta = BTreeMap::new();
        for (key, target) in &raw.delta {
            let (state, glyph_text) =
                key.rsplit_once(',').ok_or_else(|| GamblerError::BadTransitionKey(key.clone()))?;
            let mut chars = glyph_text.chars();
            let glyph = match (chars.next(), chars.next()) {
                (Some(c), None) => c,
                _ => return Err(GamblerError::BadTransitionKey(key.clone())),
            };
            delta.insert((state.to_string(), glyph), target.clone());
        }
        let mut beta = BTreeMap::new();
        for (state, rows) in &raw.beta {
            let parsed: Result<Vec<Vec<Rational>>, RatError> =
                rows.iter().map(|row| row.iter().map(|s| rat::parse(s)).collect()).collect();
            beta.insert(state.clone(), parsed?);
        }
        Self::build(
            alphabet,
            raw.states.clone(),
            &raw.q0,
            rat::parse(&raw.c0)?,
            raw.k,
            &delta,
            &beta,
            raw.provenance,
            check_rows,
        )
    }

    pub fn to_json(&self) -> String {
        let mut delta = BTreeMap::new();
        for (i, label) in self.labels.iter().enumerate() {
            for a in 0..self.alphabet.size() {
                delta.insert(
                    format!("{},{}", label, self.alphabet.glyph(a as u8)),
                    self.labels[self.delta[i][a]].clone(),
                );
            }
        }
        let mut beta = BTreeMap::new();
        for (i, label) in self.labels.iter().enumerate() {
            let rows: Vec<Vec<String>> =
                self.beta[i].iter().map(|row| row.iter().map(rat::format).collect()).collect();
            beta.insert(label.clone(), rows);
        }
        let raw = RawGambler {
            alphabet: self.alphabet.glyphs().iter().map(|c| c.to_string()).collect(),
            k: self.k,
            states: self.labels.clone(),
            q0: self.labels[self.q0].clone(),
            c0: rat::format(&self.c0),
            delta,
            beta,
            provenance: self.provenance.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("gambler spec serialises")
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn sigma(&self) -> u32 {
        self.alphabet.sigma()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    pub fn state_labels(&self) -> &[String] {
        &self.labels
    }

    pub fn start_state(&self) -> usize {
        self.q0
    }

    pub fn start_capital(&self) -> &Rational {
        &self.c0
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn set_provenance(&mut self, provenance: Option<Provenance>) {
        self.provenance = provenance;
    }

    pub fn transition(&self, state: usize, symbol: u8) -> usize {
        self.delta[state][symbol as usize]
    }

    pub fn bet_rows(&self, state: usize) -> &[Vec<Rational>] {
        &self.beta[state]
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// The state reached from `from` after reading `w`.
    pub fn delta_star(&self, from: usize, w: &Word) -> usize {
        w.symbols().iter().fold(from, |q, &s| self.delta[q][s as usize])
    }

    /// Runs the gambler over a word, snapshotting the ledger at every prefix.
    pub fn run(&self, s: &Rational, x: &Word) -> Result<Trajectory, GamblerError> {
        if x.alphabet() != &self.alphabet {
            return Err(GamblerError::AlphabetMismatch);
        }
        let checkpoints: Vec<u64> = (0..=x.len() as u64).collect();
        self.run_symbols(s, x.symbols().iter().map(|&b| Ok(b)), &checkpoints)
    }

    /// Runs over a word, snapshotting only at the given sorted prefix lengths.
    pub fn run_word_checkpointed(
        &self,
        s: &Rational,
        x: &Word,
        checkpoints: &[u64],
    ) -> Result<Trajectory, GamblerError> {
        if x.alphabet() != &self.alphabet {
            return Err(GamblerError::AlphabetMismatch);
        }
        self.run_symbols(s, x.symbols().iter().map(|&b| Ok(b)), checkpoints)
    }

    /// Runs over the first `n` symbols of a stream, snapshotting at the given
    /// sorted prefix lengths (and at the end of a shorter stream).
    pub fn run_stream(
        &self,
        s: &Rational,
        stream: SymbolStream,
        n: u64,
        checkpoints: &[u64],
    ) -> Result<Trajectory, GamblerError> {
        if stream.alphabet() != &self.alphabet {
            return Err(GamblerError::AlphabetMismatch);
        }
        self.run_symbols(s, stream.take(n as usize), checkpoints)
    }

    fn run_symbols(
        &self,
        s: &Rational,
        symbols: impl Iterator<Item = Result<u8, SeqError>>,
        checkpoints: &[u64],
    ) -> Result<Trajectory, GamblerError> {
        debug_assert!(checkpoints.windows(2).all(|w| w[0] < w[1]));
        let mut ledger =
            CapitalLedger::new(self.sigma(), self.k as u32, s.clone(), self.c0.clone());
        let mut state = self.q0;
        let mut points = Vec::with_capacity(checkpoints.len());
        let mut marks = checkpoints.iter().copied().peekable();
        if marks.peek() == Some(&0) {
            marks.next();
            points.push(TrajectoryPoint { prefix_len: 0, state, ledger: ledger.clone() });
        }
        let mut consumed: u64 = 0;
        for sym in symbols {
            let sym = sym?;
            debug_assert!((sym as usize) < self.alphabet.size());
            ledger.advance(self.beta[state].iter().map(|row| &row[sym as usize]));
            state = self.delta[state][sym as usize];
            consumed += 1;
            if marks.peek() == Some(&consumed) {
                marks.next();
                points.push(TrajectoryPoint {
                    prefix_len: consumed,
                    state,
                    ledger: ledger.clone(),
                });
            }
        }
        if points.last().map(|p| p.prefix_len) != Some(consumed) {
            points.push(TrajectoryPoint { prefix_len: consumed, state, ledger });
        }
        Ok(Trajectory { labels: self.labels.clone(), points })
    }

    /// The exact product of all bet factors the gambler places along `block`,
    /// starting from `from_state` (all k rows, no σ normalisation).
    pub fn cumulative_block_bet(
        &self,
        from_state: &str,
        block: &Word,
    ) -> Result<Rational, GamblerError> {
        if block.alphabet() != &self.alphabet {
            return Err(GamblerError::AlphabetMismatch);
        }
        let mut state = self
            .state_index(from_state)
            .ok_or_else(|| GamblerError::UnknownState(from_state.to_string()))?;
        let mut product = Rational::one();
        for &sym in block.symbols() {
            for row in &self.beta[state] {
                product *= &row[sym as usize];
            }
            state = self.delta[state][sym as usize];
        }
        Ok(product)
    }

    /// The single-bet gambler that plays only row `row` on the same automaton.
    /// Running all k projections and multiplying their capitals pointwise
    /// recovers the original run exactly.
    pub fn project_row(&self, row: usize) -> Result<GamblerSpec, GamblerError> {
        if row >= self.k {
            return Err(GamblerError::RowOutOfRange { row, k: self.k });
        }
        Ok(GamblerSpec {
            alphabet: Arc::clone(&self.alphabet),
            k: 1,
            labels: self.labels.clone(),
            q0: self.q0,
            c0: if row == 0 { self.c0.clone() } else { Rational::one() },
            delta: self.delta.clone(),
            beta: self.beta.iter().map(|rows| vec![rows[row].clone()]).collect(),
            provenance: None,
        })
    }
}

/// One snapshot along a run.
#[derive(Debug, Clone)]
pub struct TrajectoryPoint {
    pub prefix_len: u64,
    pub state: usize,
    pub ledger: CapitalLedger,
}

/// A run's checkpointed capital history.
#[derive(Debug, Clone)]
pub struct Trajectory {
    labels: Vec<String>,
    points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn points(&self) -> &[TrajectoryPoint] {
        &self.points
    }

    pub fn final_point(&self) -> &TrajectoryPoint {
        self.points.last().expect("a trajectory has at least one point")
    }

    pub fn final_ledger(&self) -> &CapitalLedger {
        &self.final_point().ledger
    }

    pub fn final_state_label(&self) -> &str {
        &self.labels[self.final_point().state]
    }

    /// (prefix length, log2 capital) series.
    pub fn log2_series(&self) -> Vec<(u64, f64)> {
        self.points.iter().map(|p| (p.prefix_len, p.ledger.log2_value())).collect()
    }

    /// Exact pointwise equality of two capital histories.
    pub fn same_capitals(&self, other: &Trajectory) -> bool {
        self.points.len() == other.points.len()
            && self
                .points
                .iter()
                .zip(&other.points)
                .all(|(a, b)| a.prefix_len == b.prefix_len && a.ledger.same_capital(&b.ledger))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratio;

    /// One-state gambler that bets everything on '1'.
    pub(crate) fn all_in_on_one() -> GamblerSpec {
        let alphabet = Alphabet::binary();
        let mut delta = BTreeMap::new();
        delta.insert(("q".to_string(), '0'), "q".to_string());
        delta.insert(("q".to_string(), '1'), "q".to_string());
        let mut beta = BTreeMap::new();
        beta.insert("q".to_string(), vec![vec![Rational::zero(), Rational::one()]]);
        GamblerSpec::new(
            alphabet,
            vec!["q".to_string()],
            "q",
            Rational::one(),
            1,
            &delta,
            &beta,
            None,
        )
        .unwrap()
    }

    fn fair() -> GamblerSpec {
        let alphabet = Alphabet::binary();
        let mut delta = BTreeMap::new();
        delta.insert(("q".to_string(), '0'), "q".to_string());
        delta.insert(("q".to_string(), '1'), "q".to_string());
        let mut beta = BTreeMap::new();
        beta.insert("q".to_string(), vec![vec![ratio(1, 2), ratio(1, 2)]]);
        GamblerSpec::new(
            alphabet,
            vec!["q".to_string()],
            "q",
            Rational::one(),
            1,
            &delta,
            &beta,
            None,
        )
        .unwrap()
    }

    fn word(s: &str) -> Word {
        Word::from_glyphs(Alphabet::binary(), s).unwrap()
    }

    #[test]
    fn all_in_gambler_doubles_on_ones() {
        let g = all_in_on_one();
        let traj = g.run(&Rational::one(), &word("111")).unwrap();
        assert_eq!(traj.final_ledger().mantissa(), ratio(8, 1));
        assert!((traj.final_ledger().log2_value() - 3.0).abs() < 1e-12);
        let traj = g.run(&Rational::one(), &word("110")).unwrap();
        assert!(traj.final_ledger().mantissa().is_zero());
    }

    #[test]
    fn fair_gambler_mantissa_stays_at_start() {
        let g = fair();
        let traj = g.run(&Rational::one(), &word("0110100111")).unwrap();
        for p in traj.points() {
            assert_eq!(p.ledger.mantissa(), Rational::one());
        }
        assert!((traj.final_ledger().log2_value()).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_preserves_behaviour() {
        let g = all_in_on_one();
        let text = g.to_json();
        let back = GamblerSpec::from_json(&text).unwrap();
        let x = word("10101");
        let a = g.run(&ratio(1, 2), &x).unwrap();
        let b = back.run(&ratio(1, 2), &x).unwrap();
        assert!(a.same_capitals(&b));
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn validation_rejects_broken_specs() {
        let alphabet = Alphabet::binary();
        let mut delta = BTreeMap::new();
        delta.insert(("q".to_string(), '0'), "q".to_string());
        // Missing transition on '1'.
        let mut beta = BTreeMap::new();
        beta.insert("q".to_string(), vec![vec![ratio(1, 2), ratio(1, 2)]]);
        let err = GamblerSpec::new(
            Arc::clone(&alphabet),
            vec!["q".to_string()],
            "q",
            Rational::one(),
            1,
            &delta,
            &beta,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, GamblerError::MissingTransition { glyph: '1', .. }));

        delta.insert(("q".to_string(), '1'), "q".to_string());
        let mut bad_beta = BTreeMap::new();
        bad_beta.insert("q".to_string(), vec![vec![ratio(1, 2), ratio(1, 3)]]);
        let err = GamblerSpec::new(
            Arc::clone(&alphabet),
            vec!["q".to_string()],
            "q",
            Rational::one(),
            1,
            &delta,
            &bad_beta,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, GamblerError::RowNotStochastic { .. }));

        let err = GamblerSpec::new(
            alphabet,
            vec!["q".to_string()],
            "missing",
            Rational::one(),
            1,
            &delta,
            &beta,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, GamblerError::UnknownState(_)));
    }

    #[test]
    fn unchecked_parse_admits_nonstochastic_rows() {
        let g = all_in_on_one();
        let mut v: serde_json::Value = serde_json::from_str(&g.to_json()).unwrap();
        v["beta"]["q"][0][1] = serde_json::Value::String("2/3".to_string());
        let tampered = v.to_string();
        assert!(GamblerSpec::from_json(&tampered).is_err());
        let lax = GamblerSpec::from_json_unchecked(&tampered).unwrap();
        // Still runs; capital accounting just follows the broken rows.
        assert!(lax.run(&Rational::one(), &word("1")).is_ok());
    }

    #[test]
    fn product_of_row_projections_recovers_k_bet_run() {
        // Two-row gambler over two states.
        let alphabet = Alphabet::binary();
        let mut delta = BTreeMap::new();
        delta.insert(("a".to_string(), '0'), "b".to_string());
        delta.insert(("a".to_string(), '1'), "a".to_string());
        delta.insert(("b".to_string(), '0'), "a".to_string());
        delta.insert(("b".to_string(), '1'), "b".to_string());
        let mut beta = BTreeMap::new();
        beta.insert(
            "a".to_string(),
            vec![vec![ratio(1, 3), ratio(2, 3)], vec![ratio(3, 4), ratio(1, 4)]],
        );
        beta.insert(
            "b".to_string(),
            vec![vec![ratio(1, 2), ratio(1, 2)], vec![ratio(1, 5), ratio(4, 5)]],
        );
        let g = GamblerSpec::new(
            alphabet,
            vec!["a".to_string(), "b".to_string()],
            "a",
            ratio(2, 1),
            2,
            &delta,
            &beta,
            None,
        )
        .unwrap();
        let x = word("0110010111");
        let s = ratio(3, 4);
        let full = g.run(&s, &x).unwrap();
        let p0 = g.project_row(0).unwrap().run(&s, &x).unwrap();
        let p1 = g.project_row(1).unwrap().run(&s, &x).unwrap();
        let product = CapitalLedger::product(&[p0.final_ledger(), p1.final_ledger()]).unwrap();
        assert_eq!(product.mantissa(), full.final_ledger().mantissa());
        assert_eq!(product.k_bets(), full.final_ledger().k_bets());
    }

    #[test]
    fn cumulative_block_bet_multiplies_row_bets() {
        let g = all_in_on_one();
        assert_eq!(g.cumulative_block_bet("q", &word("111")).unwrap(), Rational::one());
        assert_eq!(g.cumulative_block_bet("q", &word("10")).unwrap(), Rational::zero());
    }

    #[test]
    fn checkpointed_run_snapshots_requested_prefixes() {
        let g = fair();
        let x = word("01101001");
        let traj = g.run_word_checkpointed(&Rational::one(), &x, &[2, 5, 8]).unwrap();
        let lens: Vec<u64> = traj.points().iter().map(|p| p.prefix_len).collect();
        assert_eq!(lens, vec![2, 5, 8]);
        // Stream ending early still closes the trajectory.
        let traj = g.run_word_checkpointed(&Rational::one(), &x, &[2, 500]).unwrap();
        let lens: Vec<u64> = traj.points().iter().map(|p| p.prefix_len).collect();
        assert_eq!(lens, vec![2, 8]);
    }
}
