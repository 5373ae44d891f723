//! Command-line value syntax: complex numbers as `re+imi`, test functions as short specs or
//! JSON literals, payloads as inline JSON, `-` for stdin, or a file path.

use std::io::Read;
use std::str::FromStr;

use hida_core::{Complex64, FunctionElement};
use serde::de::DeserializeOwned;

use crate::error::CliError;

/// A complex number written `1.5`, `-2i`, `i`, `0.7071+0.7071i` or `1e-3-2.5e-1i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cplx(pub Complex64);

impl FromStr for Cplx {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_complex(s).map(Cplx)
    }
}

fn parse_real(s: &str, whole: &str) -> Result<f64, String> {
    match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => s
            .parse::<f64>()
            .map_err(|_| format!("cannot parse {whole:?} as a complex number (expected re+imi)")),
    }
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty complex number".into());
    }
    let z = match t.strip_suffix('i') {
        None => Complex64::new(parse_real(&t, s)?, 0.0),
        Some(body) => {
            // The imaginary part starts at the last sign that is not an exponent sign.
            let bytes = body.as_bytes();
            let split = (1..bytes.len())
                .rev()
                .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
            match split {
                Some(k) => Complex64::new(parse_real(&body[..k], s)?, parse_real(&body[k..], s)?),
                None => Complex64::new(0.0, parse_real(body, s)?),
            }
        }
    };
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(format!("{s:?} is not a finite complex number"));
    }
    Ok(z)
}

/// Test-function spec: `zero`, `basis:k`, `brownian:t`, `indicator:s,t`,
/// `hermite:c0,c1,...` (complex entries allowed), or a JSON element literal.
#[derive(Debug, Clone, PartialEq)]
pub struct Xi(pub FunctionElement);

impl FromStr for Xi {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_element(s).map(Xi)
    }
}

fn numbers(list: &str) -> Result<Vec<f64>, String> {
    list.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number {x:?}")))
        .collect()
}

pub fn parse_element(s: &str) -> Result<FunctionElement, String> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| format!("invalid function element: {e}"));
    }
    let (head, rest) = s.split_once(':').unwrap_or((s, ""));
    let element = match head {
        "zero" | "0" => Ok(FunctionElement::zero()),
        "basis" => {
            let k: usize = rest.trim().parse().map_err(|_| format!("bad basis index {rest:?}"))?;
            Ok(FunctionElement::basis(k))
        }
        "brownian" => FunctionElement::brownian(numbers(rest)?.first().copied().unwrap_or(f64::NAN)),
        "indicator" => match numbers(rest)?.as_slice() {
            [a, b] => FunctionElement::indicator(*a, *b),
            _ => return Err(format!("indicator needs two endpoints, got {rest:?}")),
        },
        "hermite" => {
            let coeffs = rest
                .split(',')
                .map(parse_complex)
                .collect::<Result<Vec<_>, _>>()?;
            FunctionElement::hermite(coeffs)
        }
        _ => {
            return Err(format!(
                "unknown test function {s:?}; use zero, basis:k, brownian:t, indicator:s,t, hermite:c0,c1,... or JSON"
            ))
        }
    };
    element.map_err(|e| e.to_string())
}

/// Reads a payload given inline (`{...}`), from stdin (`-`), or from a file.
pub fn read_payload<T: DeserializeOwned>(source: &str) -> Result<T, CliError> {
    let text = if source.trim_start().starts_with('{') {
        source.to_owned()
    } else if source == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Io(format!("reading stdin: {e}")))?;
        buf
    } else {
        std::fs::read_to_string(source).map_err(|e| CliError::Io(format!("reading {source}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Payload(e.to_string()))
}

/// Comma-separated list of positive integers.
pub fn parse_list(s: &str) -> Result<Vec<u32>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<u32>().map_err(|_| format!("bad integer {x:?}")))
        .collect()
}

/// `l:coeff` pairs such as `1:1,2:0.3,-1:0.2i`.
pub fn parse_modes(s: &str) -> Result<Vec<(i64, Complex64)>, String> {
    s.split(',')
        .map(|item| {
            let (l, a) = item
                .split_once(':')
                .ok_or_else(|| format!("mode {item:?} must look like l:coeff"))?;
            let l: i64 = l.trim().parse().map_err(|_| format!("bad mode index {l:?}"))?;
            Ok((l, parse_complex(a)?))
        })
        .collect()
}
