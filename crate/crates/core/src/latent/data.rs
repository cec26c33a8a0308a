use std::path::Path;

use crate::error::{Error, Result};

/// Number of dichotomous items.
pub const ITEMS: usize = 4;
/// Number of response patterns, `2^ITEMS`.
pub const PATTERNS: usize = 1 << ITEMS;

pub const BUNDLED_CSV: &str = include_str!("../../data/latent_class.csv");

/// Items of pattern `p`; bit `ITEMS - 1 - j` holds item `j`.
pub fn pattern_items(p: usize) -> [bool; ITEMS] {
    std::array::from_fn(|j| (p >> (ITEMS - 1 - j)) & 1 == 1)
}

/// Frequencies of the 16 response patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcData {
    /// Indexed by pattern number (item 1 is the high bit).
    pub frequency: [u32; PATTERNS],
    /// Pattern of each subject, grouped by pattern.
    subjects: Vec<u8>,
}

impl LcData {
    pub fn new(frequency: [u32; PATTERNS]) -> Result<Self> {
        if frequency.iter().all(|&f| f == 0) {
            return Err(Error::Invalid("latent class data has no subjects".into()));
        }
        let subjects = frequency
            .iter()
            .enumerate()
            .flat_map(|(p, &f)| std::iter::repeat_n(p as u8, f as usize))
            .collect();
        Ok(Self { frequency, subjects })
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_CSV, "latent_class.csv").expect("bundled latent class data is valid")
    }

    pub fn n(&self) -> usize {
        self.subjects.len()
    }

    /// Pattern of every subject.
    pub fn subjects(&self) -> &[u8] {
        &self.subjects
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Data {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses `y1,y2,y3,y4,frequency` rows, each pattern exactly once; `#`
    /// lines are comments.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut header_seen = false;
        let mut freq: [Option<u32>; PATTERNS] = [None; PATTERNS];
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if !header_seen {
                if fields != ["y1", "y2", "y3", "y4", "frequency"] {
                    return Err(Error::parse(origin, ln, "expected header `y1,y2,y3,y4,frequency`"));
                }
                header_seen = true;
                continue;
            }
            if fields.len() != ITEMS + 1 {
                return Err(Error::parse(
                    origin,
                    ln,
                    format!("expected 5 fields, found {}", fields.len()),
                ));
            }
            let mut p = 0;
            for f in &fields[..ITEMS] {
                p = p << 1
                    | match *f {
                        "0" => 0,
                        "1" => 1,
                        _ => return Err(Error::parse(origin, ln, format!("response `{f}` must be 0 or 1"))),
                    };
            }
            let n = fields[ITEMS]
                .parse::<u32>()
                .map_err(|_| Error::parse(origin, ln, format!("`{}` is not a nonnegative integer", fields[ITEMS])))?;
            if freq[p].replace(n).is_some() {
                return Err(Error::parse(origin, ln, "duplicate response pattern"));
            }
        }
        if !header_seen {
            return Err(Error::parse(origin, 1, "missing header"));
        }
        let mut frequency = [0; PATTERNS];
        for (p, f) in freq.iter().enumerate() {
            frequency[p] = f.ok_or_else(|| Error::parse(origin, 0, format!("pattern {p:04b} missing")))?;
        }
        Self::new(frequency).map_err(|e| Error::parse(origin, 0, e.to_string()))
    }
}
