//! Test functions and `L²` elements with exact pairings, the oscillator norms `|·|_p`, and the
//! complex sectors used for scaling.

mod element;
pub mod hermite;
mod sector;

use serde::{Deserialize, Serialize};

pub use element::{inner_product, FunctionElement, Variant, MAX_HERMITE_LEN};
pub use sector::Sector;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormSign {
    Positive,
    Dual,
}

/// Selects `|·|_p` (positive) or `|·|_{-p}` (dual).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormSpec {
    pub p: u32,
    pub sign: NormSign,
}

impl NormSpec {
    pub const L2: NormSpec = NormSpec {
        p: 0,
        sign: NormSign::Positive,
    };

    pub fn positive(p: u32) -> Self {
        Self {
            p,
            sign: NormSign::Positive,
        }
    }

    pub fn dual(p: u32) -> Self {
        Self {
            p,
            sign: NormSign::Dual,
        }
    }
}

/// `|f|_p = |A^p f|_0`, computed spectrally from `A e_k = (2k+2) e_k`.
///
/// For `p = 0` any element is accepted and `|f|_0² = (f, f̄)`. For `p > 0` the element must
/// reduce to a Hermite span.
pub fn norm(f: &FunctionElement, spec: NormSpec) -> Result<f64> {
    if spec.p == 0 {
        return Ok(inner_product(f, &f.conj()).re.max(0.0).sqrt());
    }
    if f.contains_indicator() {
        return Err(Error::RaisedNormOfNonSchwartz { p: spec.p });
    }
    let exponent = match spec.sign {
        NormSign::Positive => 2.0 * spec.p as f64,
        NormSign::Dual => -2.0 * spec.p as f64,
    };
    let c = f.canonical();
    let sq: f64 = c
        .hermite
        .iter()
        .enumerate()
        .map(|(k, ck)| hermite::oscillator_eigenvalue(k).powf(exponent) * ck.norm_sqr())
        .sum();
    Ok(sq.sqrt())
}

pub fn norm0(f: &FunctionElement) -> f64 {
    norm(f, NormSpec::L2).expect("p = 0 norm is total")
}
