//! Alphabets and finite words over them.
//!
//! A [`Word`] stores symbol indices (`u8`) into a shared [`Alphabet`], so the
//! counting and gambling code works in index space while parsing and display
//! stay glyph-based.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("alphabet needs at least 2 glyphs, got {0}")]
    TooSmall(usize),
    #[error("alphabet is limited to 256 glyphs, got {0}")]
    TooLarge(usize),
    #[error("duplicate glyph {0:?} in alphabet")]
    DuplicateGlyph(char),
    #[error("glyph {glyph:?} at offset {offset} is not in the alphabet")]
    UnknownGlyph { glyph: char, offset: usize },
    #[error("symbol index {index} out of range for alphabet of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("words belong to different alphabets")]
    AlphabetMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    glyphs: Vec<char>,
}

impl Alphabet {
    pub fn new(glyphs: impl IntoIterator<Item = char>) -> Result<Arc<Self>, AlphabetError> {
        let glyphs: Vec<char> = glyphs.into_iter().collect();
        if glyphs.len() < 2 {
            return Err(AlphabetError::TooSmall(glyphs.len()));
        }
        if glyphs.len() > 256 {
            return Err(AlphabetError::TooLarge(glyphs.len()));
        }
        for (i, g) in glyphs.iter().enumerate() {
            if glyphs[..i].contains(g) {
                return Err(AlphabetError::DuplicateGlyph(*g));
            }
        }
        Ok(Arc::new(Alphabet { glyphs }))
    }

    pub fn from_glyph_str(s: &str) -> Result<Arc<Self>, AlphabetError> {
        Self::new(s.chars())
    }

    /// The binary alphabet {0, 1}.
    pub fn binary() -> Arc<Self> {
        Self::new(['0', '1']).expect("binary alphabet is valid")
    }

    /// Digits 0..base, using 0-9 then a-z (base <= 36).
    pub fn digits(base: u32) -> Result<Arc<Self>, AlphabetError> {
        if base > 36 {
            return Err(AlphabetError::TooLarge(base as usize));
        }
        let glyphs = (0..base).map(|d| char::from_digit(d, 36).expect("digit in range"));
        Self::new(glyphs)
    }

    pub fn size(&self) -> usize {
        self.glyphs.len()
    }

    pub fn sigma(&self) -> u32 {
        self.glyphs.len() as u32
    }

    pub fn glyph(&self, index: u8) -> char {
        self.glyphs[index as usize]
    }

    pub fn index_of(&self, glyph: char) -> Option<u8> {
        self.glyphs.iter().position(|&g| g == glyph).map(|i| i as u8)
    }

    pub fn glyphs(&self) -> &[char] {
        &self.glyphs
    }

    /// All words of exactly `len` symbols, in lexicographic symbol order.
    pub fn words_exact(self: &Arc<Self>, len: usize) -> impl Iterator<Item = Word> {
        let alphabet = Arc::clone(self);
        let sigma = self.size();
        let total = (sigma as u128).checked_pow(len as u32).expect("table size overflow");
        let mut current = vec![0u8; len];
        let mut emitted: u128 = 0;
        std::iter::from_fn(move || {
            if emitted >= total {
                return None;
            }
            let word = Word::from_symbols_unchecked(Arc::clone(&alphabet), current.clone());
            emitted += 1;
            for slot in current.iter_mut().rev() {
                if (*slot as usize) + 1 < sigma {
                    *slot += 1;
                    break;
                }
                *slot = 0;
            }
            Some(word)
        })
    }

    /// All words of length 0..=len: the empty word first, then by length.
    pub fn words_up_to(self: &Arc<Self>, len: usize) -> impl Iterator<Item = Word> {
        let alphabet = Arc::clone(self);
        (0..=len).flat_map(move |l| alphabet.words_exact(l))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    alphabet: Arc<Alphabet>,
    syms: Vec<u8>,
}

impl Word {
    pub fn empty(alphabet: Arc<Alphabet>) -> Self {
        Word { alphabet, syms: Vec::new() }
    }

    pub fn from_glyphs(alphabet: Arc<Alphabet>, text: &str) -> Result<Self, AlphabetError> {
        let mut syms = Vec::with_capacity(text.len());
        for (offset, glyph) in text.chars().enumerate() {
            match alphabet.index_of(glyph) {
                Some(i) => syms.push(i),
                None => return Err(AlphabetError::UnknownGlyph { glyph, offset }),
            }
        }
        Ok(Word { alphabet, syms })
    }

    pub fn from_symbols(alphabet: Arc<Alphabet>, syms: Vec<u8>) -> Result<Self, AlphabetError> {
        let size = alphabet.size();
        for &s in &syms {
            if s as usize >= size {
                return Err(AlphabetError::IndexOutOfRange { index: s as usize, size });
            }
        }
        Ok(Word { alphabet, syms })
    }

    pub(crate) fn from_symbols_unchecked(alphabet: Arc<Alphabet>, syms: Vec<u8>) -> Self {
        Word { alphabet, syms }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.syms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syms.is_empty()
    }

    pub fn sym(&self, i: usize) -> u8 {
        self.syms[i]
    }

    pub fn symbols(&self) -> &[u8] {
        &self.syms
    }

    /// The word with `sym` appended; indices a child in the word tree.
    pub fn child(&self, sym: u8) -> Self {
        debug_assert!((sym as usize) < self.alphabet.size());
        let mut syms = self.syms.clone();
        syms.push(sym);
        Word { alphabet: Arc::clone(&self.alphabet), syms }
    }

    pub fn prefix(&self, len: usize) -> Self {
        Word { alphabet: Arc::clone(&self.alphabet), syms: self.syms[..len].to_vec() }
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Word { alphabet: Arc::clone(&self.alphabet), syms: self.syms[range].to_vec() }
    }

    pub fn concat(&self, other: &Word) -> Result<Self, AlphabetError> {
        if self.alphabet != other.alphabet {
            return Err(AlphabetError::AlphabetMismatch);
        }
        let mut syms = self.syms.clone();
        syms.extend_from_slice(&other.syms);
        Ok(Word { alphabet: Arc::clone(&self.alphabet), syms })
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        self.alphabet == other.alphabet
            && self.len() <= other.len()
            && self.syms[..] == other.syms[..self.len()]
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.syms {
            write!(f, "{}", self.alphabet.glyph(s))?;
        }
        Ok(())
    }
}
