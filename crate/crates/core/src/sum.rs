//! Fixed-order reductions.
//!
//! Sums over pairs are accumulated per row in index order, and the row
//! partials are combined with [`pairwise_sum`], a binary tree over the
//! index range. The traversal does not depend on how rows were scheduled,
//! so parallel and serial evaluation agree bit for bit.

use crate::error::{Error, Result};

const LEAF: usize = 8;

pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= LEAF {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Accumulator for extended-real sums in which `+∞` and `−∞` are tracked
/// separately from the finite part.
#[derive(Debug, Default, Clone)]
pub struct ExtendedSum {
    finite: Vec<f64>,
    pos_inf: bool,
    neg_inf: bool,
}

impl ExtendedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, v: f64) {
        if v == f64::INFINITY {
            self.pos_inf = true;
        } else if v == f64::NEG_INFINITY {
            self.neg_inf = true;
        } else {
            self.finite.push(v);
        }
    }

    pub fn has_pos_inf(&self) -> bool {
        self.pos_inf
    }

    pub fn has_neg_inf(&self) -> bool {
        self.neg_inf
    }

    /// Total, or an error message when both infinities occurred.
    pub fn total(&self) -> std::result::Result<f64, &'static str> {
        match (self.pos_inf, self.neg_inf) {
            (true, true) => Err("+∞ and −∞ contributions of opposite sign"),
            (true, false) => Ok(f64::INFINITY),
            (false, true) => Ok(f64::NEG_INFINITY),
            (false, false) => Ok(pairwise_sum(&self.finite)),
        }
    }

    pub(crate) fn energy_total(&self) -> Result<f64> {
        self.total().map_err(|m| Error::UndefinedEnergy(m.to_string()))
    }
}

/// `w * k` with the conventions `0 · ±∞ = 0` and finite-weight scaling of infinities.
#[inline]
pub fn weighted(w: f64, k: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_small_sums() {
        let v: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 5050.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn extended_sum_tracks_infinities() {
        let mut s = ExtendedSum::new();
        s.push(1.0);
        s.push(f64::INFINITY);
        assert_eq!(s.total(), Ok(f64::INFINITY));
        s.push(f64::NEG_INFINITY);
        assert!(s.total().is_err());
        assert_eq!(weighted(0.0, f64::INFINITY), 0.0);
    }
}
