use std::fmt;

/// Zero-based model identifier. Displayed one-based (`M1`, `M2`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModelIndex(pub usize);

impl ModelIndex {
    /// One-based number used in reports.
    pub fn number(self) -> usize {
        self.0 + 1
    }
}

impl fmt::Display for ModelIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.number())
    }
}

/// The `(m, theta_m)` state of a transdimensional chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub model: ModelIndex,
    pub params: Vec<f64>,
}

impl ChainState {
    pub fn new(model: ModelIndex, params: Vec<f64>) -> Self {
        Self { model, params }
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }
}
