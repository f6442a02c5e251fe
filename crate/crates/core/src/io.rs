//! Plain-text state files and float formatting for CSV output.
//!
//! ```text
//! kind: pure
//! dim: 2
//! 0.7071067811865476,0 0.7071067811865476,0
//! ```
//!
//! A `density` file has `dim` further lines, one matrix row each. Tokens
//! are whitespace-separated `re,im` pairs; blank lines and lines starting
//! with `#` are ignored.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::states::{DensityMatrix, PureState};

#[derive(Debug, Clone, PartialEq)]
pub enum StateFile {
    Pure(PureState),
    Density(DensityMatrix),
}

impl StateFile {
    pub fn density(&self) -> DensityMatrix {
        match self {
            StateFile::Pure(x) => x.density(),
            StateFile::Density(rho) => rho.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            StateFile::Pure(x) => x.dim(),
            StateFile::Density(rho) => rho.dim(),
        }
    }
}

/// Parsed but unvalidated contents of a state file. Parsing only fails on
/// syntax; [`RawState::validate`] checks normalization, hermiticity and
/// positivity.
#[derive(Debug, Clone, PartialEq)]
pub enum RawState {
    Pure(Vec<C64>),
    Density { dim: usize, entries: Vec<C64> },
}

impl RawState {
    pub fn validate(self) -> Result<StateFile> {
        match self {
            RawState::Pure(amps) => PureState::new(amps).map(StateFile::Pure),
            RawState::Density { dim, entries } => {
                DensityMatrix::from_matrix(ComplexMatrix::new(dim, dim, entries)?).map(StateFile::Density)
            }
        }
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn header<'a>(line: Option<(usize, &'a str)>, key: &str, last_line: usize) -> Result<(usize, &'a str)> {
    let (no, text) = line.ok_or_else(|| parse_error(last_line + 1, format!("missing `{key}:` header")))?;
    let (k, v) = text
        .split_once(':')
        .ok_or_else(|| parse_error(no, format!("expected `{key}: ...`, found `{text}`")))?;
    if k.trim() != key {
        return Err(parse_error(no, format!("expected `{key}:`, found `{}:`", k.trim())));
    }
    Ok((no, v.trim()))
}

fn parse_pair(token: &str, line: usize) -> Result<C64> {
    let (re, im) = token
        .split_once(',')
        .ok_or_else(|| parse_error(line, format!("expected `re,im`, found `{token}`")))?;
    let parse = |s: &str| -> Result<f64> {
        let v: f64 = s
            .parse()
            .map_err(|_| parse_error(line, format!("`{s}` is not a number")))?;
        if !v.is_finite() {
            return Err(parse_error(line, format!("`{s}` is not finite")));
        }
        Ok(v)
    };
    Ok(C64::new(parse(re)?, parse(im)?))
}

fn parse_row(text: &str, line: usize, expected: usize) -> Result<Vec<C64>> {
    let row: Vec<C64> = text
        .split_whitespace()
        .map(|t| parse_pair(t, line))
        .collect::<Result<_>>()?;
    if row.len() != expected {
        return Err(parse_error(
            line,
            format!("expected {expected} entries, found {}", row.len()),
        ));
    }
    Ok(row)
}

/// Syntax-only parse of a state file.
pub fn parse_state_raw(text: &str) -> Result<RawState> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (kind_line, kind) = header(lines.next(), "kind", 0)?;
    let (dim_line, dim) = header(lines.next(), "dim", kind_line)?;
    let dim: usize = dim
        .parse()
        .map_err(|_| parse_error(dim_line, format!("`{dim}` is not a dimension")))?;
    if dim == 0 {
        return Err(parse_error(dim_line, "dimension must be at least 1"));
    }
    let raw = match kind {
        "pure" => {
            let (no, text) = lines
                .next()
                .ok_or_else(|| parse_error(dim_line + 1, "missing amplitude line"))?;
            RawState::Pure(parse_row(text, no, dim)?)
        }
        "density" => {
            let mut entries = Vec::with_capacity(dim * dim);
            let mut last = dim_line;
            for r in 0..dim {
                let (no, text) = lines
                    .next()
                    .ok_or_else(|| parse_error(last + 1, format!("missing matrix row {}", r + 1)))?;
                entries.extend(parse_row(text, no, dim)?);
                last = no;
            }
            RawState::Density { dim, entries }
        }
        other => {
            return Err(parse_error(
                kind_line,
                format!("unknown kind `{other}`, expected `pure` or `density`"),
            ))
        }
    };
    if let Some((no, _)) = lines.next() {
        return Err(parse_error(no, "unexpected trailing content"));
    }
    Ok(raw)
}

/// Parses and validates a state file.
pub fn parse_state(text: &str) -> Result<StateFile> {
    parse_state_raw(text)?.validate()
}

fn pair(z: C64) -> String {
    // Shortest round-trip representation.
    format!("{:?},{:?}", z.re, z.im)
}

pub fn format_pure(x: &PureState) -> String {
    let row: Vec<String> = x.amplitudes().iter().map(|&z| pair(z)).collect();
    format!("kind: pure\ndim: {}\n{}\n", x.dim(), row.join(" "))
}

pub fn format_density(rho: &DensityMatrix) -> String {
    let n = rho.dim();
    let mut out = format!("kind: density\ndim: {n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| pair(rho.entry(i, j))).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn format_state(state: &StateFile) -> String {
    match state {
        StateFile::Pure(x) => format_pure(x),
        StateFile::Density(rho) => format_density(rho),
    }
}

/// `printf("%.12g")`: 12 significant digits, trailing zeros removed,
/// exponent form outside `1e-4 <= |v| < 1e12`.
pub fn format_float(v: f64) -> String {
    const DIGITS: i32 = 12;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn float_format_matches_printf() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.5, "0.5"),
            (0.6875, "0.6875"),
            (1.0 / 3.0, "0.333333333333"),
            (2.0 / 3.0, "0.666666666667"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (1e-4, "0.0001"),
            (1.5e-5, "1.5e-05"),
            (-0.25, "-0.25"),
            (0.999_961_853_027_343_8, "0.999961853027"),
            (9.9999999999999e-1, "1"),
        ];
        for (v, want) in cases {
            assert_eq!(format_float(v), want, "{v:e}");
        }
    }

    #[test]
    fn pure_round_trip() {
        let text = "kind: pure\ndim: 2\n0.7071067811865476,0 0,0.7071067811865476\n";
        let state = parse_state(text).unwrap();
        match &state {
            StateFile::Pure(x) => assert!((x.amplitudes()[1].im - FRAC_1_SQRT_2).abs() < 1e-16),
            other => panic!("{other:?}"),
        }
        assert_eq!(parse_state(&format_state(&state)).unwrap(), state);
    }

    #[test]
    fn density_round_trip_and_comments() {
        let text = "# diagonal\nkind: density\ndim: 2\n\n0.3,0 0,0\n0,0 0.7,0\n";
        let state = parse_state(text).unwrap();
        assert_eq!(state.dim(), 2);
        assert_eq!(parse_state(&format_state(&state)).unwrap(), state);
    }

    fn line_of(text: &str) -> usize {
        match parse_state_raw(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert_eq!(line_of(""), 1);
        assert_eq!(line_of("kind: mixed\ndim: 2\n"), 1);
        assert_eq!(line_of("kind: pure\nsize: 2\n"), 2);
        assert_eq!(line_of("kind: pure\ndim: two\n"), 2);
        assert_eq!(line_of("kind: pure\ndim: 2\n1,0\n"), 3);
        assert_eq!(line_of("kind: pure\ndim: 2\n1,0 0;0\n"), 3);
        assert_eq!(line_of("kind: density\ndim: 2\n1,0 0,0\n"), 4);
        assert_eq!(line_of("kind: pure\ndim: 1\n1,0\n1,0\n"), 4);
        assert_eq!(line_of("kind: pure\ndim: 1\nnan,0\n"), 3);
    }

    #[test]
    fn invariant_errors_are_not_parse_errors() {
        let unnormalized = "kind: pure\ndim: 2\n1,0 1,0\n";
        assert!(parse_state_raw(unnormalized).is_ok());
        assert!(matches!(parse_state(unnormalized), Err(Error::Invariant(_))));
        let negative = "kind: density\ndim: 2\n1.5,0 0,0\n0,0 -0.5,0\n";
        assert!(matches!(parse_state(negative), Err(Error::Invariant(_))));
    }
}
