use std::path::Path;

use crate::error::{Error, Result};

/// Number of subjects in the bundled table.
pub const SAMPLE_SIZE: u32 = 79;

pub const BUNDLED_CSV: &str = include_str!("../../data/logistic.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    /// Level of factor A (condition), 1 or 2.
    pub condition: u8,
    /// Level of factor B (treatment), 1 or 2.
    pub treatment: u8,
    pub survivals: u32,
    pub total: u32,
}

/// A 2×2 table of binomial counts, stored in order (1,1), (1,2), (2,1), (2,2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinomialTable {
    pub cells: [Cell; 4],
}

impl BinomialTable {
    pub fn new(mut cells: Vec<Cell>) -> Result<Self> {
        if cells.len() != 4 {
            return Err(Error::Invalid(format!("expected 4 cells, found {}", cells.len())));
        }
        cells.sort_by_key(|c| (c.condition, c.treatment));
        for (i, c) in cells.iter().enumerate() {
            let want = ((i / 2) as u8 + 1, (i % 2) as u8 + 1);
            if (c.condition, c.treatment) != want {
                return Err(Error::Invalid(format!(
                    "cells must cover conditions and treatments 1..2 exactly once; missing {want:?}"
                )));
            }
            if c.survivals > c.total {
                return Err(Error::Invalid(format!(
                    "cell ({}, {}) has more survivals than subjects",
                    c.condition, c.treatment
                )));
            }
        }
        Ok(Self {
            cells: cells.try_into().expect("four cells"),
        })
    }

    pub fn total(&self) -> u32 {
        self.cells.iter().map(|c| c.total).sum()
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_CSV, "logistic.csv").expect("bundled logistic data is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Data {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses `condition,treatment,survivals,total` rows; `#` lines are
    /// comments.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut header_seen = false;
        let mut cells = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if !header_seen {
                if fields != ["condition", "treatment", "survivals", "total"] {
                    return Err(Error::parse(
                        origin,
                        ln,
                        "expected header `condition,treatment,survivals,total`",
                    ));
                }
                header_seen = true;
                continue;
            }
            if fields.len() != 4 {
                return Err(Error::parse(
                    origin,
                    ln,
                    format!("expected 4 fields, found {}", fields.len()),
                ));
            }
            let num = |s: &str| -> Result<u32> {
                s.parse::<u32>()
                    .map_err(|_| Error::parse(origin, ln, format!("`{s}` is not a nonnegative integer")))
            };
            let level = |s: &str| -> Result<u8> {
                match s {
                    "1" => Ok(1),
                    "2" => Ok(2),
                    _ => Err(Error::parse(origin, ln, format!("level `{s}` must be 1 or 2"))),
                }
            };
            cells.push(Cell {
                condition: level(fields[0])?,
                treatment: level(fields[1])?,
                survivals: num(fields[2])?,
                total: num(fields[3])?,
            });
        }
        if !header_seen {
            return Err(Error::parse(origin, 1, "missing header"));
        }
        let table = Self::new(cells).map_err(|e| Error::parse(origin, 0, e.to_string()))?;
        if table.total() != SAMPLE_SIZE {
            return Err(Error::parse(
                origin,
                0,
                format!("cell totals sum to {}, expected {SAMPLE_SIZE}", table.total()),
            ));
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table() {
        let t = BinomialTable::bundled();
        assert_eq!(t.total(), 79);
        assert_eq!(t.cells[3].survivals, 5);
    }

    #[test]
    fn rejects_bad_rows() {
        let bad = "condition,treatment,survivals,total\n1,1,5,4\n1,2,1,1\n2,1,1,1\n2,2,1,73\n";
        assert!(BinomialTable::parse(bad, "x").is_err());
        let dup = "condition,treatment,survivals,total\n1,1,1,20\n1,1,1,20\n2,1,1,20\n2,2,1,19\n";
        assert!(BinomialTable::parse(dup, "x").is_err());
        let short = "condition,treatment,survivals,total\n1,1,1,20\n";
        assert!(BinomialTable::parse(short, "x").is_err());
    }

    #[test]
    fn rows_may_come_in_any_order() {
        let text = "condition,treatment,survivals,total\n2,2,5,20\n1,1,22,26\n2,1,7,12\n1,2,15,21\n";
        assert_eq!(BinomialTable::parse(text, "x").unwrap(), BinomialTable::bundled());
    }
}
