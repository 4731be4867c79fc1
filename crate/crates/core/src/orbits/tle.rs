//! Two-line element sets: fixed-column parsing, modulo-10 checksums and
//! byte-exact re-serialization.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

const LINE_LEN: usize = 69;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TleLine {
    Line1,
    Line2,
}

impl fmt::Display for TleLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TleLine::Line1 => f.write_str("line 1"),
            TleLine::Line2 => f.write_str("line 2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TleError {
    #[error("{line}: expected {LINE_LEN} ASCII characters, got {len}")]
    BadLength { line: TleLine, len: usize },
    #[error("{line}: checksum mismatch, expected {expected} but column 69 holds {actual}")]
    ChecksumMismatch { line: TleLine, expected: u8, actual: u8 },
    #[error("{line}: malformed {field} in columns {start}-{end}: {text:?}")]
    MalformedField {
        line: TleLine,
        field: &'static str,
        start: usize,
        end: usize,
        text: String,
    },
    #[error("satellite numbers differ between line 1 ({0}) and line 2 ({1})")]
    SatelliteNumberMismatch(u32, u32),
    #[error("TLE file ends inside an element set at line {0}")]
    Truncated(usize),
}

/// One parsed element set, all fields as published.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TleRecord {
    pub name: String,
    pub satellite_number: u32,
    pub classification: char,
    pub international_designator: String,
    pub epoch_year: u8,
    pub epoch_day_fraction: f64,
    pub mean_motion_dot: f64,
    pub mean_motion_ddot: f64,
    pub bstar_drag: f64,
    pub ephemeris_type: char,
    pub element_number: u32,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub eccentricity: f64,
    pub arg_perigee_deg: f64,
    pub mean_anomaly_deg: f64,
    pub mean_motion_rev_per_day: f64,
    pub revolution_number: u32,
    pub checksums: [u8; 2],
}

/// Modulo-10 sum over columns 1-68: digits count their value, minus signs
/// count 1, everything else 0.
pub fn tle_checksum(line: &str) -> u8 {
    let sum: u32 = line
        .bytes()
        .take(LINE_LEN - 1)
        .map(|b| match b {
            b'0'..=b'9' => (b - b'0') as u32,
            b'-' => 1,
            _ => 0,
        })
        .sum();
    (sum % 10) as u8
}

struct Columns<'a> {
    text: &'a str,
    line: TleLine,
}

impl<'a> Columns<'a> {
    fn new(raw: &'a str, line: TleLine) -> Result<Self, TleError> {
        let text = raw.trim_end_matches(['\r', '\n']);
        if text.len() != LINE_LEN || !text.is_ascii() {
            return Err(TleError::BadLength {
                line,
                len: text.chars().count(),
            });
        }
        Ok(Self { text, line })
    }

    /// Columns `start..=end`, 1-based as in the format definition.
    fn raw(&self, start: usize, end: usize) -> &'a str {
        &self.text[start - 1..end]
    }

    fn malformed(&self, field: &'static str, start: usize, end: usize) -> TleError {
        TleError::MalformedField {
            line: self.line,
            field,
            start,
            end,
            text: self.raw(start, end).to_string(),
        }
    }

    fn parse<T: std::str::FromStr>(&self, field: &'static str, start: usize, end: usize) -> Result<T, TleError> {
        self.raw(start, end)
            .trim()
            .parse()
            .map_err(|_| self.malformed(field, start, end))
    }

    fn char_at(&self, col: usize) -> char {
        self.text.as_bytes()[col - 1] as char
    }

    /// Fields such as `" 10191-3"`: sign, five mantissa digits with an
    /// assumed leading decimal point, signed exponent digit.
    fn implied_exponent(&self, field: &'static str, start: usize, end: usize) -> Result<f64, TleError> {
        let s = self.raw(start, end).trim();
        let err = || self.malformed(field, start, end);
        let (sign, rest) = match s.as_bytes().first() {
            Some(b'-') => (-1.0, &s[1..]),
            Some(b'+') => (1.0, &s[1..]),
            Some(_) => (1.0, s),
            None => return Err(err()),
        };
        if rest.len() < 3 {
            return Err(err());
        }
        let (mantissa, exponent) = rest.split_at(rest.len() - 2);
        if mantissa.is_empty() || !mantissa.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let exponent: i32 = exponent.parse().map_err(|_| err())?;
        let mantissa: f64 = format!("0.{mantissa}").parse().map_err(|_| err())?;
        Ok(sign * mantissa * 10f64.powi(exponent))
    }

    fn checksum(&self) -> Result<u8, TleError> {
        let actual = self.char_at(LINE_LEN);
        let actual = actual
            .to_digit(10)
            .ok_or_else(|| self.malformed("checksum", LINE_LEN, LINE_LEN))? as u8;
        let expected = tle_checksum(self.text);
        if expected != actual {
            return Err(TleError::ChecksumMismatch {
                line: self.line,
                expected,
                actual,
            });
        }
        Ok(actual)
    }
}

/// Parses one element set. `name_line` may be empty.
pub fn parse_tle(name_line: &str, line1: &str, line2: &str) -> Result<TleRecord, TleError> {
    let l1 = Columns::new(line1, TleLine::Line1)?;
    let l2 = Columns::new(line2, TleLine::Line2)?;
    let check1 = l1.checksum()?;
    let check2 = l2.checksum()?;

    if l1.char_at(1) != '1' {
        return Err(l1.malformed("line number", 1, 1));
    }
    if l2.char_at(1) != '2' {
        return Err(l2.malformed("line number", 1, 1));
    }

    let satellite_number: u32 = l1.parse("satellite number", 3, 7)?;
    let satellite_number_2: u32 = l2.parse("satellite number", 3, 7)?;
    if satellite_number != satellite_number_2 {
        return Err(TleError::SatelliteNumberMismatch(satellite_number, satellite_number_2));
    }

    let eccentricity_digits = l2.raw(27, 33);
    if !eccentricity_digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(l2.malformed("eccentricity", 27, 33));
    }

    Ok(TleRecord {
        name: name_line.trim().to_string(),
        satellite_number,
        classification: l1.char_at(8),
        international_designator: l1.raw(10, 17).trim_end().to_string(),
        epoch_year: l1.parse("epoch year", 19, 20)?,
        epoch_day_fraction: l1.parse("epoch day", 21, 32)?,
        mean_motion_dot: l1.parse("mean motion first derivative", 34, 43)?,
        mean_motion_ddot: l1.implied_exponent("mean motion second derivative", 45, 52)?,
        bstar_drag: l1.implied_exponent("BSTAR drag term", 54, 61)?,
        ephemeris_type: l1.char_at(63),
        element_number: l1.parse("element number", 65, 68)?,
        inclination_deg: l2.parse("inclination", 9, 16)?,
        raan_deg: l2.parse("right ascension of ascending node", 18, 25)?,
        eccentricity: format!("0.{eccentricity_digits}")
            .parse()
            .map_err(|_| l2.malformed("eccentricity", 27, 33))?,
        arg_perigee_deg: l2.parse("argument of perigee", 35, 42)?,
        mean_anomaly_deg: l2.parse("mean anomaly", 44, 51)?,
        mean_motion_rev_per_day: l2.parse("mean motion", 53, 63)?,
        revolution_number: l2.parse("revolution number", 64, 68)?,
        checksums: [check1, check2],
    })
}

/// Reads a file of element sets, with or without name lines.
pub fn parse_tle_file(content: &str) -> Result<Vec<TleRecord>, TleError> {
    let lines: Vec<(usize, &str)> = content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let mut records = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let (line_no, first) = lines[i];
        let named = !(first.starts_with("1 ") && first.trim_end().len() == LINE_LEN);
        let (name, start) = if named { (first, i + 1) } else { ("", i) };
        if start + 1 >= lines.len() {
            return Err(TleError::Truncated(line_no + 1));
        }
        records.push(parse_tle(name, lines[start].1, lines[start + 1].1)?);
        i = start + 2;
    }
    Ok(records)
}

impl TleRecord {
    /// The two element lines in the standard column layout, checksums
    /// recomputed.
    pub fn to_lines(&self) -> (String, String) {
        let mut line1 = format!(
            "1 {:05}{} {:<8} {:02}{:012.8} {} {} {} {} {:>4}",
            self.satellite_number,
            self.classification,
            self.international_designator,
            self.epoch_year,
            self.epoch_day_fraction,
            format_first_derivative(self.mean_motion_dot),
            format_implied_exponent(self.mean_motion_ddot),
            format_implied_exponent(self.bstar_drag),
            self.ephemeris_type,
            self.element_number,
        );
        line1.push(char::from(b'0' + tle_checksum(&line1)));

        let mut line2 = format!(
            "2 {:05} {:>8.4} {:>8.4} {:07} {:>8.4} {:>8.4} {:>11.8}{:>5}",
            self.satellite_number,
            self.inclination_deg,
            self.raan_deg,
            (self.eccentricity * 1e7).round() as u64,
            self.arg_perigee_deg,
            self.mean_anomaly_deg,
            self.mean_motion_rev_per_day,
            self.revolution_number,
        );
        line2.push(char::from(b'0' + tle_checksum(&line2)));
        (line1, line2)
    }
}

fn format_first_derivative(v: f64) -> String {
    let sign = if v < 0.0 { '-' } else { ' ' };
    let digits = format!("{:.8}", v.abs());
    format!("{sign}{}", digits.strip_prefix('0').unwrap_or(&digits))
}

fn format_implied_exponent(v: f64) -> String {
    if v == 0.0 {
        return " 00000-0".to_string();
    }
    let sign = if v < 0.0 { '-' } else { ' ' };
    let mut exponent = v.abs().log10().floor() as i32 + 1;
    let mut mantissa = (v.abs() / 10f64.powi(exponent) * 1e5).round() as u64;
    if mantissa >= 100_000 {
        mantissa /= 10;
        exponent += 1;
    }
    let exp_sign = if exponent < 0 { '-' } else { '+' };
    format!("{sign}{mantissa:05}{exp_sign}{}", exponent.abs())
}
