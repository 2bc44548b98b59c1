//! Deterministic symbol sources: canned sequences, seeded coin flips, and
//! file ingestion.
//!
//! Every source is replayable: [`StreamSource::open`] returns a fresh cursor
//! over the same sequence, which is what lets entropy profiles for different
//! block lengths scan the same input independently. Randomness is pinned to
//! ChaCha8 with an explicit 64-bit seed and exact rational bias, so generated
//! corpora are reproducible across runs and platforms.

use std::io::{BufReader, Read};
use std::path::PathBuf;
use std::sync::Arc;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::alphabet::{Alphabet, AlphabetError, Word};
use crate::rat::{self, Rational};

/// PRNG identifier recorded in generated-corpus metadata.
pub const BERNOULLI_ALGORITHM: &str = "chacha8";

#[derive(Debug, Error)]
pub enum SeqError {
    #[error("periodic pattern must be nonempty")]
    EmptyPattern,
    #[error("bernoulli bias must be a rational strictly between 0 and 1, got {0}")]
    BadBias(String),
    #[error("champernowne base must be between 2 and 36, got {0}")]
    BadBase(u32),
    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("byte 0x{byte:02x} at offset {offset} is not a glyph of the alphabet")]
    BadSymbol { offset: u64, byte: u8 },
    #[error("malformed generator spec {spec:?}: {reason}")]
    BadSpec { spec: String, reason: String },
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
}

/// A replayable source of symbols over a fixed alphabet.
pub trait StreamSource: Sync {
    fn alphabet(&self) -> Arc<Alphabet>;
    fn open(&self) -> Result<SymbolStream, SeqError>;
}

/// A cursor over symbol indices. Items are `Err` only for fallible backends
/// (file ingestion); generator streams never fail mid-stream.
pub struct SymbolStream {
    alphabet: Arc<Alphabet>,
    inner: Box<dyn Iterator<Item = Result<u8, SeqError>> + Send>,
}

impl SymbolStream {
    pub fn new(
        alphabet: Arc<Alphabet>,
        inner: Box<dyn Iterator<Item = Result<u8, SeqError>> + Send>,
    ) -> Self {
        SymbolStream { alphabet, inner }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    /// Materialises up to `n` symbols as a [`Word`] (fewer if the stream ends).
    pub fn take_word(mut self, n: u64) -> Result<Word, SeqError> {
        let mut syms = Vec::with_capacity(n.min(1 << 24) as usize);
        for _ in 0..n {
            match self.inner.next() {
                Some(sym) => syms.push(sym?),
                None => break,
            }
        }
        Ok(Word::from_symbols_unchecked(self.alphabet, syms))
    }
}

impl Iterator for SymbolStream {
    type Item = Result<u8, SeqError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.inner.next()
    }
}

#[derive(Debug, Clone)]
pub enum GeneratorConfig {
    /// The pattern repeated forever.
    Periodic { pattern: Word },
    /// Base-σ Champernowne sequence: the base-σ digits of 0, 1, 2, …
    /// concatenated.
    Champernowne { base: u32 },
    /// Independent biased coin flips over {0, 1}.
    Bernoulli { bias: Rational, seed: u64 },
    /// The Thue-Morse sequence: parity of the binary digit sum of the index.
    ThueMorse,
    /// Glyphs read from a file, one byte per symbol.
    File { path: PathBuf, alphabet: Arc<Alphabet>, skip_whitespace: bool },
}

impl GeneratorConfig {
    pub fn periodic(pattern: Word) -> Result<Self, SeqError> {
        if pattern.is_empty() {
            return Err(SeqError::EmptyPattern);
        }
        Ok(GeneratorConfig::Periodic { pattern })
    }

    pub fn bernoulli(bias: Rational, seed: u64) -> Result<Self, SeqError> {
        let zero = Rational::from_integer(0.into());
        let one = Rational::from_integer(1.into());
        if bias <= zero || bias >= one {
            return Err(SeqError::BadBias(rat::format(&bias)));
        }
        if bias.numer().to_u64().is_none() || bias.denom().to_u64().is_none() {
            return Err(SeqError::BadBias(rat::format(&bias)));
        }
        Ok(GeneratorConfig::Bernoulli { bias, seed })
    }

    pub fn champernowne(base: u32) -> Result<Self, SeqError> {
        if !(2..=36).contains(&base) {
            return Err(SeqError::BadBase(base));
        }
        Ok(GeneratorConfig::Champernowne { base })
    }

    /// Parses the inline `kind:params` syntax used on the command line:
    /// `periodic:01`, `champernowne:2`, `bernoulli:1/4:seed42`, `thue_morse`,
    /// `file:corpus.txt`.
    pub fn parse(spec: &str) -> Result<Self, SeqError> {
        let bad =
            |reason: &str| SeqError::BadSpec { spec: spec.to_string(), reason: reason.to_string() };
        let mut parts = spec.splitn(2, ':');
        let kind = parts.next().unwrap_or("");
        let rest = parts.next();
        match kind {
            "periodic" => {
                let text = rest.ok_or_else(|| bad("expected periodic:PATTERN"))?;
                let alphabet = if text.chars().all(|c| c == '0' || c == '1') {
                    Alphabet::binary()
                } else {
                    let mut glyphs: Vec<char> = text.chars().collect();
                    glyphs.sort_unstable();
                    glyphs.dedup();
                    Alphabet::new(glyphs)?
                };
                Self::periodic(Word::from_glyphs(alphabet, text)?)
            }
            "champernowne" => {
                let base = match rest {
                    None | Some("") => 2,
                    Some(b) => b.parse().map_err(|_| bad("base must be an integer"))?,
                };
                Self::champernowne(base)
            }
            "bernoulli" => {
                let rest = rest.ok_or_else(|| bad("expected bernoulli:BIAS[:seedN]"))?;
                let mut fields = rest.split(':');
                let bias_text = fields.next().ok_or_else(|| bad("missing bias"))?;
                let bias = rat::parse(bias_text).map_err(|e| bad(&format!("bad bias: {e}")))?;
                let seed = match fields.next() {
                    None => 0,
                    Some(s) => s
                        .strip_prefix("seed")
                        .unwrap_or(s)
                        .parse()
                        .map_err(|_| bad("seed must be an integer"))?,
                };
                if fields.next().is_some() {
                    return Err(bad("too many fields"));
                }
                Self::bernoulli(bias, seed)
            }
            "thue_morse" => Ok(GeneratorConfig::ThueMorse),
            "file" => {
                let path = rest.ok_or_else(|| bad("expected file:PATH"))?;
                Ok(GeneratorConfig::File {
                    path: PathBuf::from(path),
                    alphabet: Alphabet::binary(),
                    skip_whitespace: true,
                })
            }
            _ => Err(bad(
                "unknown kind (expected periodic, champernowne, bernoulli, thue_morse, or file)",
            )),
        }
    }

    /// Metadata describing the source, recorded next to generated corpora.
    pub fn metadata(&self) -> serde_json::Value {
        match self {
            GeneratorConfig::Periodic { pattern } => json!({
                "kind": "periodic",
                "pattern": pattern.to_string(),
            }),
            GeneratorConfig::Champernowne { base } => json!({
                "kind": "champernowne",
                "base": base,
            }),
            GeneratorConfig::Bernoulli { bias, seed } => json!({
                "kind": "bernoulli",
                "bias": rat::format(bias),
                "seed": seed,
                "algorithm": BERNOULLI_ALGORITHM,
            }),
            GeneratorConfig::ThueMorse => json!({ "kind": "thue_morse" }),
            GeneratorConfig::File { path, alphabet, skip_whitespace } => json!({
                "kind": "file",
                "path": path.display().to_string(),
                "alphabet": alphabet.glyphs().iter().collect::<String>(),
                "skip_whitespace": skip_whitespace,
            }),
        }
    }
}

impl StreamSource for GeneratorConfig {
    fn alphabet(&self) -> Arc<Alphabet> {
        match self {
            GeneratorConfig::Periodic { pattern } => Arc::clone(pattern.alphabet()),
            GeneratorConfig::Champernowne { base } => {
                Alphabet::digits(*base).expect("validated base")
            }
            GeneratorConfig::Bernoulli { .. } | GeneratorConfig::ThueMorse => Alphabet::binary(),
            GeneratorConfig::File { alphabet, .. } => Arc::clone(alphabet),
        }
    }

    fn open(&self) -> Result<SymbolStream, SeqError> {
        let alphabet = StreamSource::alphabet(self);
        let inner: Box<dyn Iterator<Item = Result<u8, SeqError>> + Send> = match self {
            GeneratorConfig::Periodic { pattern } => {
                let syms = pattern.symbols().to_vec();
                Box::new(syms.into_iter().cycle().map(Ok))
            }
            GeneratorConfig::Champernowne { base } => Box::new(champernowne(*base).map(Ok)),
            GeneratorConfig::Bernoulli { bias, seed } => {
                let numer = bias.numer().to_u64().expect("validated bias");
                let denom = bias.denom().to_u64().expect("validated bias");
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Box::new(std::iter::from_fn(move || {
                    let draw = rng.random_range(0..denom);
                    Some(Ok(u8::from(draw < numer)))
                }))
            }
            GeneratorConfig::ThueMorse => {
                Box::new((0u64..).map(|i| Ok((i.count_ones() & 1) as u8)))
            }
            GeneratorConfig::File { path, alphabet, skip_whitespace } => {
                let file = std::fs::File::open(path)
                    .map_err(|source| SeqError::FileUnreadable { path: path.clone(), source })?;
                Box::new(file_symbols(file, Arc::clone(alphabet), *skip_whitespace))
            }
        };
        Ok(SymbolStream::new(alphabet, inner))
    }
}

impl StreamSource for Word {
    fn alphabet(&self) -> Arc<Alphabet> {
        Arc::clone(self.alphabet())
    }

    fn open(&self) -> Result<SymbolStream, SeqError> {
        let syms = self.symbols().to_vec();
        Ok(SymbolStream::new(Arc::clone(self.alphabet()), Box::new(syms.into_iter().map(Ok))))
    }
}

/// Digits of 0, 1, 2, … in the given base, most significant digit first.
fn champernowne(base: u32) -> impl Iterator<Item = u8> {
    let mut next_number: u64 = 0;
    let mut digits: Vec<u8> = Vec::new();
    std::iter::from_fn(move || {
        if digits.is_empty() {
            let mut n = next_number;
            next_number += 1;
            if n == 0 {
                digits.push(0);
            } else {
                while n > 0 {
                    digits.push((n % base as u64) as u8);
                    n /= base as u64;
                }
                digits.reverse();
            }
        }
        Some(digits.remove(0))
    })
}

fn file_symbols(
    file: std::fs::File,
    alphabet: Arc<Alphabet>,
    skip_whitespace: bool,
) -> impl Iterator<Item = Result<u8, SeqError>> + Send {
    let mut bytes = BufReader::new(file).bytes();
    let mut offset: u64 = 0;
    std::iter::from_fn(move || loop {
        let byte = match bytes.next()? {
            Ok(b) => b,
            Err(source) => {
                return Some(Err(SeqError::FileUnreadable {
                    path: PathBuf::from("<open stream>"),
                    source,
                }))
            }
        };
        let at = offset;
        offset += 1;
        if skip_whitespace && (byte == b' ' || byte == b'\t' || byte == b'\n' || byte == b'\r') {
            continue;
        }
        match alphabet.index_of(byte as char) {
            Some(sym) => return Some(Ok(sym)),
            None => return Some(Err(SeqError::BadSymbol { offset: at, byte })),
        }
    })
}
