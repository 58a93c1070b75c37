//! Wire formats: JSON records for distributions, gamma and epsilon functions
//! and utilities, plus one-value-per-line sample files.
//!
//! Writers emit pretty-printed JSON with a trailing newline. Parsing a written
//! file and writing it again reproduces the same bytes.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sdorder::{from_samples, validate_epsilon, validate_gamma, Distribution, EpsilonFn, GammaFn, PiecewiseFn, UtilityPWL};

/// Parse or validation failure, located in its source file when possible.
#[derive(Debug)]
pub struct InputError {
    pub path: PathBuf,
    pub pos: Option<(usize, usize)>,
    pub msg: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some((line, col)) => write!(f, "{}:{line}:{col}: {}", self.path.display(), self.msg),
            None => write!(f, "{}: {}", self.path.display(), self.msg),
        }
    }
}

impl std::error::Error for InputError {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceRecord {
    pub x: f64,
    pub jump: f64,
    pub slope_after: f64,
}

/// Shared record for `cdf`, `gamma` and `epsilon` files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FnRecord {
    pub kind: String,
    /// Value left of the first piece.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub left: f64,
    pub pieces: Vec<PieceRecord>,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorRecord {
    pub x: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    At(f64),
    Tag(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentRecord {
    pub from: Bound,
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityRecord {
    pub kind: String,
    pub anchor: AnchorRecord,
    pub segments: Vec<SegmentRecord>,
}

struct Source<'a> {
    path: &'a Path,
    text: &'a str,
}

impl Source<'_> {
    fn err(&self, pos: Option<(usize, usize)>, msg: impl Into<String>) -> InputError {
        InputError { path: self.path.to_path_buf(), pos, msg: msg.into() }
    }

    fn at_key(&self, key: &str, msg: impl Into<String>) -> InputError {
        self.err(key_offset(self.text, key).map(|o| line_col(self.text, o)), msg)
    }

    fn at_element(&self, key: &str, index: usize, msg: impl Into<String>) -> InputError {
        let pos = element_offset(self.text, key, index).or_else(|| key_offset(self.text, key));
        self.err(pos.map(|o| line_col(self.text, o)), msg)
    }

    fn parse<T: for<'de> Deserialize<'de>>(&self) -> Result<T, InputError> {
        serde_json::from_str(self.text).map_err(|e| self.err(Some((e.line(), e.column())), e.to_string()))
    }

    fn expect_kind(&self, got: &str, want: &str) -> Result<(), InputError> {
        if got == want {
            Ok(())
        } else {
            Err(self.at_key("kind", format!("expected kind \"{want}\", found \"{got}\"")))
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(offset, |n| offset - n - 1) + 1;
    (line, col)
}

/// Byte offset of the first `"key":` outside string literals.
fn key_offset(text: &str, key: &str) -> Option<usize> {
    let quoted = format!("\"{key}\"");
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'"' {
            let end = string_end(bytes, i);
            if text[i..end].starts_with(&quoted) && end - i == quoted.len() {
                let rest = text[end..].trim_start();
                if rest.starts_with(':') {
                    return Some(i);
                }
            }
            i = end;
        } else {
            i += 1;
        }
    }
    None
}

/// Index just past the string literal starting at `start`.
fn string_end(bytes: &[u8], start: usize) -> usize {
    let mut i = start + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'"' => return i + 1,
            _ => i += 1,
        }
    }
    bytes.len()
}

/// Byte offset of element `index` of the array stored under `key`.
fn element_offset(text: &str, key: &str, index: usize) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut i = key_offset(text, key)?;
    i += text[i..].find('[')? + 1;
    let mut depth = 0usize;
    let mut seen = 0usize;
    let mut expecting = true;
    while i < bytes.len() {
        let c = bytes[i];
        if depth == 0 && expecting && !c.is_ascii_whitespace() {
            if c == b']' {
                return None;
            }
            if seen == index {
                return Some(i);
            }
            seen += 1;
            expecting = false;
        }
        match c {
            b'"' => {
                i = string_end(bytes, i);
                continue;
            }
            b'{' | b'[' => depth += 1,
            b'}' | b']' if depth == 0 => return None,
            b'}' | b']' => depth -= 1,
            b',' if depth == 0 => expecting = true,
            _ => {}
        }
        i += 1;
    }
    None
}

fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path)
        .map_err(|e| InputError { path: path.to_path_buf(), pos: None, msg: format!("cannot read file: {e}") })
}

/// CDF records need at least one piece and non-negative jumps and slopes;
/// gamma and epsilon records without pieces are constant at `left`.
fn check_pieces(src: &Source, pieces: &[PieceRecord], cdf: bool, tol: f64) -> Result<(), InputError> {
    if cdf && pieces.is_empty() {
        return Err(src.at_key("pieces", "at least one piece is required"));
    }
    for (i, p) in pieces.iter().enumerate() {
        if i > 0 && p.x <= pieces[i - 1].x {
            return Err(src.at_element("pieces", i, format!("x = {} does not increase", p.x)));
        }
        if cdf && p.jump < -tol {
            return Err(src.at_element("pieces", i, format!("negative jump {} at x = {}", p.jump, p.x)));
        }
        if cdf && p.slope_after < -tol {
            return Err(src.at_element("pieces", i, format!("negative slope {} after x = {}", p.slope_after, p.x)));
        }
    }
    Ok(())
}

/// Index of the piece whose segment contains `x`.
fn piece_at(pieces: &[PieceRecord], x: f64) -> usize {
    pieces.iter().rposition(|p| p.x <= x).unwrap_or(0)
}

fn carrier_of(rec: &FnRecord) -> Result<PiecewiseFn, sdorder::Error> {
    let knots = rec.pieces.iter().map(|p| p.x).collect();
    let jumps = rec.pieces.iter().map(|p| p.jump).collect();
    let slopes = rec.pieces.iter().map(|p| p.slope_after).collect();
    PiecewiseFn::from_jumps(rec.left, knots, jumps, slopes)
}

fn located(src: &Source, rec: &FnRecord, e: sdorder::Error) -> InputError {
    match e {
        sdorder::Error::NotMonotone { x } | sdorder::Error::RangeViolation { x, .. } => {
            src.at_element("pieces", piece_at(&rec.pieces, x), e.to_string())
        }
        _ => src.at_key("pieces", e.to_string()),
    }
}

pub fn parse_distribution(text: &str, path: &Path, tol: f64) -> Result<Distribution, InputError> {
    let src = Source { path, text };
    let rec: FnRecord = src.parse()?;
    src.expect_kind(&rec.kind, "cdf")?;
    if rec.left != 0.0 {
        return Err(src.at_key("left", "a CDF vanishes left of its first piece"));
    }
    check_pieces(&src, &rec.pieces, true, tol)?;
    let triples: Vec<_> = rec.pieces.iter().map(|p| (p.x, p.jump, p.slope_after)).collect();
    Distribution::from_pieces_with(&triples, tol).map_err(|e| located(&src, &rec, e))
}

pub fn parse_samples(text: &str, path: &Path) -> Result<Distribution, InputError> {
    let src = Source { path, text };
    let mut xs = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let v = line.trim();
        if v.is_empty() {
            continue;
        }
        let col = line.find(v).unwrap_or(0) + 1;
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => xs.push(x),
            _ => return Err(src.err(Some((k + 1, col)), format!("expected a finite real, found \"{v}\""))),
        }
    }
    from_samples(&xs).map_err(|e| src.err(None, e.to_string()))
}

pub fn parse_gamma(text: &str, path: &Path) -> Result<GammaFn, InputError> {
    let src = Source { path, text };
    let rec: FnRecord = src.parse()?;
    src.expect_kind(&rec.kind, "gamma")?;
    check_pieces(&src, &rec.pieces, false, 0.0)?;
    let carrier = carrier_of(&rec).map_err(|e| located(&src, &rec, e))?;
    validate_gamma(carrier).map_err(|e| located(&src, &rec, e))
}

pub fn parse_epsilon(text: &str, path: &Path) -> Result<EpsilonFn, InputError> {
    let src = Source { path, text };
    let rec: FnRecord = src.parse()?;
    src.expect_kind(&rec.kind, "epsilon")?;
    check_pieces(&src, &rec.pieces, false, 0.0)?;
    let carrier = carrier_of(&rec).map_err(|e| located(&src, &rec, e))?;
    validate_epsilon(carrier).map_err(|e| located(&src, &rec, e))
}

pub fn parse_utility(text: &str, path: &Path) -> Result<UtilityPWL, InputError> {
    let src = Source { path, text };
    let rec: UtilityRecord = src.parse()?;
    src.expect_kind(&rec.kind, "utility")?;
    if rec.segments.is_empty() {
        return Err(src.at_key("segments", "at least one segment is required"));
    }
    let mut knots = Vec::new();
    for (i, s) in rec.segments.iter().enumerate() {
        if s.slope < 0.0 {
            return Err(src.at_element("segments", i, format!("negative slope {}", s.slope)));
        }
        match (&s.from, i) {
            (Bound::Tag(t), 0) if t == "-inf" => {}
            (_, 0) => return Err(src.at_element("segments", 0, "the first segment must start at \"-inf\"")),
            (Bound::At(x), _) => knots.push(*x),
            (Bound::Tag(t), _) => {
                return Err(src.at_element("segments", i, format!("expected a number for \"from\", found \"{t}\"")))
            }
        }
    }
    let slopes = rec.segments.iter().map(|s| s.slope).collect();
    UtilityPWL::new((rec.anchor.x, rec.anchor.value), knots, slopes).map_err(|e| src.at_key("segments", e.to_string()))
}

/// Reads a distribution; `.csv` files hold samples, anything else JSON.
pub fn read_distribution(path: &Path, tol: f64) -> Result<Distribution, InputError> {
    let text = read(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        parse_samples(&text, path)
    } else {
        parse_distribution(&text, path, tol)
    }
}

pub fn read_gamma(path: &Path) -> Result<GammaFn, InputError> {
    parse_gamma(&read(path)?, path)
}

pub fn read_epsilon(path: &Path) -> Result<EpsilonFn, InputError> {
    parse_epsilon(&read(path)?, path)
}

pub fn read_utility(path: &Path) -> Result<UtilityPWL, InputError> {
    parse_utility(&read(path)?, path)
}

fn record_of(kind: &str, f: &PiecewiseFn) -> FnRecord {
    assert!(f.max_degree() <= 1, "wire records hold piecewise-linear functions");
    let pieces = f
        .knots()
        .iter()
        .zip(f.jumps())
        .zip(f.pieces())
        .map(|((&x, &jump), p)| PieceRecord { x, jump, slope_after: p.coef(1) })
        .collect();
    FnRecord { kind: kind.to_string(), left: f.left_value(), pieces }
}

pub fn distribution_record(d: &Distribution) -> FnRecord {
    record_of("cdf", d.carrier())
}

pub fn gamma_record(g: &GammaFn) -> FnRecord {
    record_of("gamma", g.carrier())
}

pub fn epsilon_record(e: &EpsilonFn) -> FnRecord {
    record_of("epsilon", e.carrier())
}

pub fn utility_record(u: &UtilityPWL) -> UtilityRecord {
    let (x, value) = u.anchor();
    let starts = std::iter::once(Bound::Tag("-inf".into())).chain(u.knots().iter().map(|&k| Bound::At(k)));
    let segments = starts.zip(u.slopes()).map(|(from, &slope)| SegmentRecord { from, slope }).collect();
    UtilityRecord { kind: "utility".into(), anchor: AnchorRecord { x, value }, segments }
}

/// Pretty JSON with a trailing newline.
pub fn to_text<T: Serialize>(rec: &T) -> String {
    let mut s = serde_json::to_string_pretty(rec).expect("records hold finite numbers");
    s.push('\n');
    s
}
