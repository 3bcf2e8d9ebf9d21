//! Dobrushin interdependence coefficients.
//!
//! `b_{v,u}` is the largest total-variation distance between single-site
//! kernels at `v` whose boundary conditions differ only at `u`.

use alloc::vec::Vec;

use crate::gibbs::{site_conditional, GibbsStructure, MixedRadix};
use crate::group::{FiniteWindow, GroupWord};
use crate::shift::ShiftPotential;
use crate::{math, Error, Result, DEFAULT_BUDGET};

#[derive(Clone, Debug, PartialEq)]
pub struct DobrushinReport {
    rows: Vec<Vec<(usize, f64)>>,
    b_row: Vec<f64>,
    b_star: f64,
}

impl DobrushinReport {
    /// Nonzero pattern of row `v`: `(u, b_{v,u})` for `u ∈ ∂{v}`.
    pub fn row(&self, v: usize) -> &[(usize, f64)] {
        &self.rows[v]
    }

    /// `b_{v,u}`, zero off `∂{v}`.
    pub fn b(&self, v: usize, u: usize) -> f64 {
        self.rows[v]
            .iter()
            .find(|(w, _)| *w == u)
            .map_or(0.0, |(_, b)| *b)
    }

    /// Row sums `b_v`.
    pub fn b_row(&self) -> &[f64] {
        &self.b_row
    }

    /// `b* = max_v b_v`.
    pub fn b_star(&self) -> f64 {
        self.b_star
    }

    /// Whether the Dobrushin condition `b* < 1` holds.
    pub fn satisfied(&self) -> bool {
        self.b_star < 1.0
    }
}

fn row(g: &GibbsStructure, v: usize) -> Result<Vec<(usize, f64)>> {
    if g.pinned(v).is_some() {
        return Ok(Vec::new());
    }
    let bd = g.boundary(&[v]);
    let choices: Vec<Vec<usize>> = bd
        .iter()
        .map(|&u| (0..g.radix(u)).filter(|&a| g.allows(u, a)).collect())
        .collect();
    let radices: Vec<usize> = choices.iter().map(Vec::len).collect();
    let q = g.radix(v);
    let size = MixedRadix::size_f64(&radices) * q as f64;
    if size > DEFAULT_BUDGET as f64 {
        return Err(Error::Budget {
            what: "Dobrushin boundary enumeration",
            required: size,
            budget: DEFAULT_BUDGET,
        });
    }
    let layout = MixedRadix::new(radices);
    let mut omega = alloc::vec![0usize; g.len()];
    for w in 0..g.len() {
        omega[w] = g.pinned(w).unwrap_or(0);
    }
    let mut digits = alloc::vec![0; bd.len()];
    let mut kernels = alloc::vec![0.0; layout.len() * q];
    let mut buf = Vec::new();
    for i in 0..layout.len() {
        layout.decode(i, &mut digits);
        for (k, &u) in bd.iter().enumerate() {
            omega[u] = choices[k][digits[k]];
        }
        site_conditional(g, v, &omega, 1.0, &mut buf);
        kernels[i * q..(i + 1) * q].copy_from_slice(&buf);
    }
    let strides = layout.strides().to_vec();
    let mut out = Vec::with_capacity(bd.len());
    for (k, &u) in bd.iter().enumerate() {
        let mut best: f64 = 0.0;
        for i in 0..layout.len() {
            layout.decode(i, &mut digits);
            for alt in digits[k] + 1..choices[k].len() {
                let j = i + (alt - digits[k]) * strides[k];
                let tv = 0.5
                    * (0..q)
                        .map(|a| math::abs(kernels[i * q + a] - kernels[j * q + a]))
                        .sum::<f64>();
                best = best.max(tv);
            }
        }
        out.push((u, best.min(1.0)));
    }
    Ok(out)
}

fn report(rows: Vec<Vec<(usize, f64)>>) -> DobrushinReport {
    let b_row: Vec<f64> = rows.iter().map(|r| r.iter().map(|(_, b)| b).sum()).collect();
    let b_star = b_row.iter().copied().fold(0.0, f64::max);
    DobrushinReport { rows, b_row, b_star }
}

/// Exact coefficients for every vertex of a finite structure.
pub fn dobrushin(g: &GibbsStructure) -> Result<DobrushinReport> {
    let rows = (0..g.len()).map(|v| row(g, v)).collect::<Result<Vec<_>>>()?;
    Ok(report(rows))
}

/// Coefficients of the shift structure at `e`; by invariance `b* = b_e`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftDobrushinReport {
    /// `∂{e}` in canonical order.
    pub boundary: FiniteWindow,
    /// `b_{e,u}` aligned with `boundary`.
    pub coefficients: Vec<f64>,
    pub b_star: f64,
}

impl ShiftDobrushinReport {
    pub fn satisfied(&self) -> bool {
        self.b_star < 1.0
    }
}

pub fn dobrushin_shift(potential: &ShiftPotential) -> Result<ShiftDobrushinReport> {
    let (window, g) = potential.local_structure(&FiniteWindow::identity())?;
    let e = window.index_of(&GroupWord::identity()).unwrap();
    let r = row(&g, e)?;
    let boundary = potential.boundary(&FiniteWindow::identity());
    let coefficients = boundary
        .iter()
        .map(|u| {
            let k = window.index_of(u).unwrap();
            r.iter().find(|(w, _)| *w == k).map_or(0.0, |(_, b)| *b)
        })
        .collect::<Vec<f64>>();
    Ok(ShiftDobrushinReport {
        b_star: coefficients.iter().sum(),
        boundary,
        coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::{Alphabet, EnergyTerm};

    #[test]
    fn zero_potential_is_identically_zero() {
        let g = GibbsStructure::uniform(
            3,
            Alphabet::ising(),
            alloc::vec![EnergyTerm::new(alloc::vec![0, 1], alloc::vec![0.0; 4])],
        )
        .unwrap();
        let r = dobrushin(&g).unwrap();
        assert_eq!(r.b_star(), 0.0);
        assert!(r.b_row().iter().all(|&b| b == 0.0));
    }

    #[test]
    fn ising_edge_matches_closed_form() {
        let beta = 0.8;
        let g = GibbsStructure::uniform(
            2,
            Alphabet::ising(),
            alloc::vec![EnergyTerm::new(alloc::vec![0, 1], alloc::vec![-beta, beta, beta, -beta])],
        )
        .unwrap();
        let r = dobrushin(&g).unwrap();
        assert!((r.b(0, 1) - math::tanh(beta)).abs() < 1e-14);
        assert_eq!(r.b(0, 0), 0.0);
    }

    #[test]
    fn shift_ising_closed_form() {
        for beta in [0.0, 0.1, 0.3, 0.9] {
            let r = dobrushin_shift(&ShiftPotential::ising(beta, 2)).unwrap();
            assert_eq!(r.boundary.len(), 6);
            assert_eq!(r.coefficients.iter().filter(|&&b| b > 1e-12).count(), if beta > 0.0 { 4 } else { 0 });
            assert!((r.b_star - 2.0 * math::tanh(2.0 * beta)).abs() < 1e-13);
        }
    }
}
