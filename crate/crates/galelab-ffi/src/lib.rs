//! C ABI for gambler evaluation and block-entropy estimation.
//!
//! Every fallible entry point returns a [`GalelabStatus`] and writes its
//! result through an out-pointer, which is touched only on
//! [`GalelabStatus::Ok`]. Gambler handles are opaque, owned by the caller,
//! and released with [`galelab_gambler_free`]; strings returned by the
//! library are released with [`galelab_string_free`]. All strings crossing
//! the boundary are NUL-terminated UTF-8.
//!
//! The C header is generated into `include/galelab.h` by the crate build.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use galelab::alphabet::{Alphabet, Word};
use galelab::dimension::MAX_BLOCK_LEN;
use galelab::entropy::{self, BlockMode};
use galelab::gambler::GamblerSpec;
use galelab::rat;
use num_traits::Signed;

/// Disjoint (block-aligned) counting for [`galelab_entropy_estimate`].
pub const GALELAB_MODE_DISJOINT: u32 = 0;
/// Sliding-window counting for [`galelab_entropy_estimate`].
pub const GALELAB_MODE_SLIDING: u32 = 1;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GalelabStatus {
    /// The call succeeded and the out-parameter was written.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A JSON document, rational literal, or input word failed to parse.
    ParseError = 3,
    /// An argument was outside its documented range.
    InvalidArgument = 4,
    /// The computation itself failed; the inputs were well-formed.
    ComputeError = 5,
}

/// Opaque finite-state gambler handle.
pub struct GalelabGambler {
    spec: GamblerSpec,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn galelab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Static name for a status value previously returned by this library.
#[no_mangle]
pub extern "C" fn galelab_status_name(status: GalelabStatus) -> *const c_char {
    let name: &'static [u8] = match status {
        GalelabStatus::Ok => b"ok\0",
        GalelabStatus::NullPointer => b"null pointer\0",
        GalelabStatus::InvalidUtf8 => b"invalid utf-8\0",
        GalelabStatus::ParseError => b"parse error\0",
        GalelabStatus::InvalidArgument => b"invalid argument\0",
        GalelabStatus::ComputeError => b"compute error\0",
    };
    name.as_ptr().cast()
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, GalelabStatus> {
    if ptr.is_null() {
        return Err(GalelabStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| GalelabStatus::InvalidUtf8)
}

fn guarded(f: impl FnOnce() -> GalelabStatus) -> GalelabStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(GalelabStatus::ComputeError)
}

/// Parses a gambler from its JSON document and returns an owned handle.
///
/// The document is fully validated: rows must average to one exactly,
/// transitions must be total, and the starting capital must be nonnegative.
#[no_mangle]
pub unsafe extern "C" fn galelab_gambler_parse(
    json: *const c_char,
    out: *mut *mut GalelabGambler,
) -> GalelabStatus {
    if out.is_null() {
        return GalelabStatus::NullPointer;
    }
    *out = ptr::null_mut();
    let text = match read_str(json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    guarded(|| match GamblerSpec::from_json(text) {
        Ok(spec) => {
            *out = Box::into_raw(Box::new(GalelabGambler { spec }));
            GalelabStatus::Ok
        }
        Err(_) => GalelabStatus::ParseError,
    })
}

/// Releases a handle returned by [`galelab_gambler_parse`]. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn galelab_gambler_free(gambler: *mut GalelabGambler) {
    if !gambler.is_null() {
        drop(Box::from_raw(gambler));
    }
}

/// Alphabet size of the gambler.
#[no_mangle]
pub unsafe extern "C" fn galelab_gambler_sigma(
    gambler: *const GalelabGambler,
    out: *mut u32,
) -> GalelabStatus {
    if gambler.is_null() || out.is_null() {
        return GalelabStatus::NullPointer;
    }
    *out = (*gambler).spec.sigma();
    GalelabStatus::Ok
}

/// Number of parallel bet rows.
#[no_mangle]
pub unsafe extern "C" fn galelab_gambler_k(
    gambler: *const GalelabGambler,
    out: *mut u32,
) -> GalelabStatus {
    if gambler.is_null() || out.is_null() {
        return GalelabStatus::NullPointer;
    }
    match u32::try_from((*gambler).spec.k()) {
        Ok(k) => {
            *out = k;
            GalelabStatus::Ok
        }
        Err(_) => GalelabStatus::ComputeError,
    }
}

/// Number of states.
#[no_mangle]
pub unsafe extern "C" fn galelab_gambler_num_states(
    gambler: *const GalelabGambler,
    out: *mut u32,
) -> GalelabStatus {
    if gambler.is_null() || out.is_null() {
        return GalelabStatus::NullPointer;
    }
    match u32::try_from((*gambler).spec.num_states()) {
        Ok(n) => {
            *out = n;
            GalelabStatus::Ok
        }
        Err(_) => GalelabStatus::ComputeError,
    }
}

/// Serializes the gambler back to JSON as an owned string.
///
/// Release the string with [`galelab_string_free`].
#[no_mangle]
pub unsafe extern "C" fn galelab_gambler_to_json(
    gambler: *const GalelabGambler,
    out: *mut *mut c_char,
) -> GalelabStatus {
    if gambler.is_null() || out.is_null() {
        return GalelabStatus::NullPointer;
    }
    *out = ptr::null_mut();
    guarded(|| {
        let text = (*gambler).spec.to_json();
        match CString::new(text) {
            Ok(owned) => {
                *out = owned.into_raw();
                GalelabStatus::Ok
            }
            Err(_) => GalelabStatus::ComputeError,
        }
    })
}

/// Releases a string returned by this library. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn galelab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs the gambler over `input` and writes the final base-2 log capital of
/// the induced s-gale.
///
/// `s` is a rational literal (`"p/q"`, an integer, or an exact decimal) and
/// must be nonnegative. `input` is spelled in the gambler's own alphabet.
/// Capital accounting is exact; only the final logarithm is floating point,
/// and a ruined gambler yields negative infinity.
#[no_mangle]
pub unsafe extern "C" fn galelab_gambler_log2_capital(
    gambler: *const GalelabGambler,
    s: *const c_char,
    input: *const c_char,
    out: *mut f64,
) -> GalelabStatus {
    if gambler.is_null() || out.is_null() {
        return GalelabStatus::NullPointer;
    }
    let s_text = match read_str(s) {
        Ok(t) => t,
        Err(status) => return status,
    };
    let input_text = match read_str(input) {
        Ok(t) => t,
        Err(status) => return status,
    };
    guarded(|| {
        let spec = &(*gambler).spec;
        let s_value = match rat::parse(s_text) {
            Ok(v) => v,
            Err(_) => return GalelabStatus::ParseError,
        };
        if s_value.is_negative() {
            return GalelabStatus::InvalidArgument;
        }
        let word = match Word::from_glyphs(spec.alphabet().clone(), input_text) {
            Ok(w) => w,
            Err(_) => return GalelabStatus::ParseError,
        };
        let n = word.len() as u64;
        match spec.run_word_checkpointed(&s_value, &word, &[n]) {
            Ok(traj) => {
                *out = traj.final_ledger().log2_value();
                GalelabStatus::Ok
            }
            Err(_) => GalelabStatus::ComputeError,
        }
    })
}

/// Writes the block-entropy rate estimate of `input`: the minimum over block
/// lengths `1..=l_max` of the normalised block entropy, in `[0, 1]`.
///
/// `alphabet` lists the glyphs in symbol order (for example `"01"`). `mode`
/// is [`GALELAB_MODE_DISJOINT`] or [`GALELAB_MODE_SLIDING`]. `l_max` must be
/// between 1 and 12, and `input` must contain at least `l_max` symbols.
#[no_mangle]
pub unsafe extern "C" fn galelab_entropy_estimate(
    input: *const c_char,
    alphabet: *const c_char,
    l_max: u32,
    mode: u32,
    out: *mut f64,
) -> GalelabStatus {
    if out.is_null() {
        return GalelabStatus::NullPointer;
    }
    let input_text = match read_str(input) {
        Ok(t) => t,
        Err(status) => return status,
    };
    let alphabet_text = match read_str(alphabet) {
        Ok(t) => t,
        Err(status) => return status,
    };
    let mode = match mode {
        GALELAB_MODE_DISJOINT => BlockMode::Disjoint,
        GALELAB_MODE_SLIDING => BlockMode::Sliding,
        _ => return GalelabStatus::InvalidArgument,
    };
    if l_max == 0 || l_max as usize > MAX_BLOCK_LEN {
        return GalelabStatus::InvalidArgument;
    }
    guarded(|| {
        let alphabet = match Alphabet::from_glyph_str(alphabet_text) {
            Ok(a) => a,
            Err(_) => return GalelabStatus::ParseError,
        };
        let word = match Word::from_glyphs(alphabet, input_text) {
            Ok(w) => w,
            Err(_) => return GalelabStatus::ParseError,
        };
        let mut best = f64::INFINITY;
        for block_len in 1..=l_max as usize {
            let counts = match mode {
                BlockMode::Disjoint => entropy::count_disjoint(&word, block_len),
                BlockMode::Sliding => entropy::count_sliding(&word, block_len),
            };
            let h = match counts.and_then(|c| entropy::block_entropy(&c)) {
                Ok(h) => h,
                Err(_) => return GalelabStatus::ComputeError,
            };
            best = best.min(h);
        }
        *out = best;
        GalelabStatus::Ok
    })
}
