use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-9;

/// Row-major mixed-radix indexing: the last coordinate varies fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedRadix {
    radices: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl MixedRadix {
    pub fn new(radices: Vec<usize>) -> Self {
        let mut strides = alloc::vec![0; radices.len()];
        let mut acc = 1usize;
        for k in (0..radices.len()).rev() {
            strides[k] = acc;
            acc = acc.saturating_mul(radices[k]);
        }
        MixedRadix {
            radices,
            strides,
            len: acc,
        }
    }

    /// Number of cells, as a float so huge products do not wrap.
    pub fn size_f64(radices: &[usize]) -> f64 {
        radices.iter().map(|&r| r as f64).product()
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.strides)
            .map(|(d, s)| d * s)
            .sum()
    }

    pub fn decode(&self, mut index: usize, digits: &mut [usize]) {
        for k in (0..self.radices.len()).rev() {
            digits[k] = index % self.radices[k];
            index /= self.radices[k];
        }
    }

    /// Advances `digits` to the next configuration; returns false after the last.
    pub fn advance(&self, digits: &mut [usize]) -> bool {
        for k in (0..self.radices.len()).rev() {
            digits[k] += 1;
            if digits[k] < self.radices[k] {
                return true;
            }
            digits[k] = 0;
        }
        false
    }
}

/// An exact probability distribution over `∏_{v ∈ domain} A_v`.
///
/// The domain is a strictly increasing list of vertex ids; probabilities are
/// laid out row-major over the domain order.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbTable {
    domain: Vec<usize>,
    layout: MixedRadix,
    probs: Vec<f64>,
}

impl ProbTable {
    /// Validates and renormalizes. Fails on unsorted domains, length
    /// mismatches, negative or non-finite entries, or a total off by more
    /// than `1e-9`.
    pub fn new(domain: Vec<usize>, radices: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if domain.len() != radices.len() {
            return Err(Error::Domain("domain and radices differ in length".into()));
        }
        if domain.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("domain must be strictly increasing".into()));
        }
        let layout = MixedRadix::new(radices);
        if layout.len() != probs.len() {
            return Err(Error::Domain(alloc::format!(
                "table has {} entries, layout needs {}",
                probs.len(),
                layout.len()
            )));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Argument("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if math::abs(total - 1.0) > NORMALIZATION_TOL {
            return Err(Error::Argument(alloc::format!("probabilities sum to {total}")));
        }
        Ok(Self::from_parts_normalized(domain, layout, probs))
    }

    pub(crate) fn from_parts_normalized(
        domain: Vec<usize>,
        layout: MixedRadix,
        mut probs: Vec<f64>,
    ) -> Self {
        let total: f64 = probs.iter().sum();
        if total > 0.0 && total != 1.0 {
            for p in probs.iter_mut() {
                *p /= total;
            }
        }
        ProbTable {
            domain,
            layout,
            probs,
        }
    }

    pub fn point_mass(domain: Vec<usize>, radices: Vec<usize>, config: &[usize]) -> Result<Self> {
        let layout = MixedRadix::new(radices);
        let mut probs = alloc::vec![0.0; layout.len()];
        if config.len() != domain.len()
            || config.iter().zip(layout.radices()).any(|(c, r)| c >= r)
        {
            return Err(Error::Argument("configuration does not fit the layout".into()));
        }
        probs[layout.index(config)] = 1.0;
        ProbTable::new(domain, layout.radices().to_vec(), probs)
    }

    pub fn uniform(domain: Vec<usize>, radices: Vec<usize>) -> Result<Self> {
        let n = MixedRadix::size_f64(&radices);
        let len = MixedRadix::new(radices.clone()).len();
        ProbTable::new(domain, radices, alloc::vec![1.0 / n; len])
    }

    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn radices(&self) -> &[usize] {
        self.layout.radices()
    }

    pub fn layout(&self) -> &MixedRadix {
        &self.layout
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability of a configuration given in domain order.
    pub fn prob(&self, config: &[usize]) -> f64 {
        self.probs[self.layout.index(config)]
    }

    pub fn position(&self, vertex: usize) -> Option<usize> {
        self.domain.binary_search(&vertex).ok()
    }

    /// Marginal on `sub`, which must be a subset of the domain.
    pub fn marginal(&self, sub: &[usize]) -> Result<ProbTable> {
        let mut sub: Vec<usize> = sub.to_vec();
        sub.sort_unstable();
        sub.dedup();
        let pos = sub
            .iter()
            .map(|v| {
                self.position(*v)
                    .ok_or_else(|| Error::Domain(alloc::format!("vertex {v} not in table domain")))
            })
            .collect::<Result<Vec<_>>>()?;
        let radices: Vec<usize> = pos.iter().map(|&p| self.radices()[p]).collect();
        let out_layout = MixedRadix::new(radices);
        let mut out = alloc::vec![0.0; out_layout.len()];
        let mut digits = alloc::vec![0; self.domain.len()];
        let mut sub_digits = alloc::vec![0; pos.len()];
        for (i, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            self.layout.decode(i, &mut digits);
            for (k, &q) in pos.iter().enumerate() {
                sub_digits[k] = digits[q];
            }
            out[out_layout.index(&sub_digits)] += p;
        }
        Ok(ProbTable::from_parts_normalized(sub, out_layout, out))
    }

    /// Total-variation distance `½ Σ |p − q|`; the tables must share domain and layout.
    pub fn total_variation(&self, other: &ProbTable) -> Result<f64> {
        if self.domain != other.domain || self.layout != other.layout {
            return Err(Error::Domain("tables have different domains".into()));
        }
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| math::abs(a - b))
                .sum::<f64>())
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        math::sum(self.probs.iter().map(|&p| math::neg_xlogx(p)))
    }

    /// Configuration (in domain order) of a flat index.
    pub fn config_at(&self, index: usize) -> Vec<usize> {
        let mut d = alloc::vec![0; self.domain.len()];
        self.layout.decode(index, &mut d);
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_layout() {
        let l = MixedRadix::new(alloc::vec![2, 3]);
        assert_eq!(l.index(&[1, 0]), 3);
        assert_eq!(l.index(&[0, 2]), 2);
        let mut d = [0, 0];
        l.decode(5, &mut d);
        assert_eq!(d, [1, 2]);
        let mut d = [0, 0];
        let mut count = 1;
        while l.advance(&mut d) {
            count += 1;
        }
        assert_eq!(count, 6);
    }

    #[test]
    fn marginal_preserves_mass() {
        let t = ProbTable::new(
            alloc::vec![3, 7],
            alloc::vec![2, 2],
            alloc::vec![0.4, 0.1, 0.1, 0.4],
        )
        .unwrap();
        let m = t.marginal(&[7]).unwrap();
        assert_eq!(m.domain(), &[7]);
        assert!((m.probs()[0] - 0.5).abs() < 1e-15);
        assert!(t.marginal(&[5]).is_err());
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(ProbTable::new(alloc::vec![1, 0], alloc::vec![2, 2], alloc::vec![0.25; 4]).is_err());
        assert!(ProbTable::new(alloc::vec![0], alloc::vec![2], alloc::vec![0.5, 0.6]).is_err());
        assert!(ProbTable::new(alloc::vec![0], alloc::vec![2], alloc::vec![1.5, -0.5]).is_err());
    }
}
