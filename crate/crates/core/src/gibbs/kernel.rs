//! Local kernels `π_{Γ,Λ}`, their action on tables, exact Gibbs tables and
//! single-site heat-bath (Glauber) updates.

use alloc::vec::Vec;

use rand::Rng;

use super::{GibbsStructure, MixedRadix, ProbTable};
use crate::{math, Error, Result, DEFAULT_BUDGET};

/// Single-site conditional at `v` under energy scale `scale`: fills `out`
/// (resized to `|A_v|`) with the probabilities of each symbol given the rest
/// of `omega`. Inadmissible symbols get probability zero.
pub fn site_conditional(
    g: &GibbsStructure,
    v: usize,
    omega: &[usize],
    scale: f64,
    out: &mut Vec<f64>,
) {
    let q = g.radix(v);
    out.clear();
    out.resize(q, 0.0);
    for (a, w) in out.iter_mut().enumerate() {
        *w = if g.allows(v, a) { 0.0 } else { f64::NEG_INFINITY };
    }
    let current = omega[v];
    for &t in g.incident_terms(v) {
        let stride = g.term_stride_of(t, v);
        let base = g.term_index(t, omega) - current * stride;
        let table = g.terms()[t].table();
        for (a, w) in out.iter_mut().enumerate() {
            if *w != f64::NEG_INFINITY {
                *w -= scale * table[base + a * stride];
            }
        }
    }
    math::softmax_in_place(out);
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (a, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = a;
            if u < acc {
                return a;
            }
        }
    }
    last
}

impl GibbsStructure {
    fn normalized_lambda(&self, lambda: &[usize]) -> Result<Vec<usize>> {
        let mut lam = lambda.to_vec();
        lam.sort_unstable();
        lam.dedup();
        if let Some(&v) = lam.iter().find(|&&v| v >= self.len()) {
            return Err(Error::Argument(alloc::format!("vertex {v} out of range")));
        }
        Ok(lam)
    }

    fn terms_meeting(&self, lam: &[usize]) -> Vec<usize> {
        let mut ts: Vec<usize> = lam
            .iter()
            .flat_map(|&v| self.incident_terms(v).iter().copied())
            .filter(|&t| !self.terms()[t].is_zero())
            .collect();
        ts.sort_unstable();
        ts.dedup();
        ts
    }

    fn check_budget(what: &'static str, radices: &[usize], budget: usize) -> Result<()> {
        let size = MixedRadix::size_f64(radices);
        if size > budget as f64 {
            return Err(Error::Budget {
                what,
                required: size,
                budget,
            });
        }
        Ok(())
    }

    /// Normalized kernel weights over configurations of `lam`, with all other
    /// coordinates read from `work`. `work` is left with unspecified values on `lam`.
    fn kernel_weights(
        &self,
        lam: &[usize],
        terms: &[usize],
        layout: &MixedRadix,
        work: &mut [usize],
    ) -> Result<Vec<f64>> {
        let mut logw = alloc::vec![0.0; layout.len()];
        let mut digits = alloc::vec![0; lam.len()];
        for (i, lw) in logw.iter_mut().enumerate() {
            layout.decode(i, &mut digits);
            let mut ok = true;
            for (k, &v) in lam.iter().enumerate() {
                if !self.allows(v, digits[k]) {
                    ok = false;
                    break;
                }
                work[v] = digits[k];
            }
            *lw = if ok {
                -terms.iter().map(|&t| self.term_value(t, work)).sum::<f64>()
            } else {
                f64::NEG_INFINITY
            };
        }
        let lz = math::softmax_in_place(&mut logw);
        if !lz.is_finite() {
            return Err(Error::Degenerate);
        }
        Ok(logw)
    }

    /// `π_{Γ,Λ}(ω)` as a table over `Λ`. Only `ω` off `Λ` is read.
    pub fn local_kernel(&self, lambda: &[usize], omega: &[usize]) -> Result<ProbTable> {
        self.check_configuration(omega)?;
        let lam = self.normalized_lambda(lambda)?;
        let radices: Vec<usize> = lam.iter().map(|&v| self.radix(v)).collect();
        Self::check_budget("local kernel", &radices, DEFAULT_BUDGET)?;
        let layout = MixedRadix::new(radices);
        let terms = self.terms_meeting(&lam);
        let mut work = omega.to_vec();
        let probs = self.kernel_weights(&lam, &terms, &layout, &mut work)?;
        Ok(ProbTable::from_parts_normalized(lam, layout, probs))
    }

    /// `bp_{Γ,Λ}(μ)` for a table `μ` whose domain contains `Λ ∪ ∂Λ`.
    pub fn apply_kernel(&self, lambda: &[usize], mu: &ProbTable) -> Result<ProbTable> {
        let lam = self.normalized_lambda(lambda)?;
        if lam.is_empty() {
            return Ok(mu.clone());
        }
        for (&v, &r) in mu.domain().iter().zip(mu.radices()) {
            if v >= self.len() || r != self.radix(v) {
                return Err(Error::Domain(alloc::format!(
                    "table vertex {v} does not match the structure"
                )));
            }
        }
        let bd = self.boundary(&lam);
        for &v in lam.iter().chain(bd.iter()) {
            if mu.position(v).is_none() {
                return Err(Error::Domain(alloc::format!(
                    "table domain lacks vertex {v} of Λ ∪ ∂Λ"
                )));
            }
        }
        let lam_pos: Vec<usize> = lam.iter().map(|&v| mu.position(v).unwrap()).collect();
        let strides = mu.layout().strides();
        let lam_radices: Vec<usize> = lam.iter().map(|&v| self.radix(v)).collect();
        let lam_layout = MixedRadix::new(lam_radices);
        let mut lam_offsets = alloc::vec![0usize; lam_layout.len()];
        let mut digits = alloc::vec![0; lam.len()];
        for (i, off) in lam_offsets.iter_mut().enumerate() {
            lam_layout.decode(i, &mut digits);
            *off = digits.iter().zip(&lam_pos).map(|(d, &p)| d * strides[p]).sum();
        }

        // Collapse μ onto the off-Λ coordinates: base index has Λ digits zeroed.
        let mut mass = alloc::vec![0.0; mu.len()];
        let mut full = alloc::vec![0; mu.domain().len()];
        for (i, &p) in mu.probs().iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            mu.layout().decode(i, &mut full);
            let base = i - lam_pos.iter().map(|&q| full[q] * strides[q]).sum::<usize>();
            mass[base] += p;
        }

        let terms = self.terms_meeting(&lam);
        let mut work = alloc::vec![0usize; self.len()];
        let mut out = alloc::vec![0.0; mu.len()];
        for (base, &m) in mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            mu.layout().decode(base, &mut full);
            for (k, &v) in mu.domain().iter().enumerate() {
                work[v] = full[k];
            }
            let k = self.kernel_weights(&lam, &terms, &lam_layout, &mut work)?;
            for (j, &pj) in k.iter().enumerate() {
                if pj > 0.0 {
                    out[base + lam_offsets[j]] += m * pj;
                }
            }
        }
        Ok(ProbTable::from_parts_normalized(
            mu.domain().to_vec(),
            mu.layout().clone(),
            out,
        ))
    }

    /// Whether `μ` is within `tol` (total variation) of `bp_{Γ,Λ}(μ)`.
    pub fn is_admissible(&self, lambda: &[usize], mu: &ProbTable, tol: f64) -> Result<bool> {
        let next = self.apply_kernel(lambda, mu)?;
        Ok(next.total_variation(mu)? <= tol)
    }

    /// The unique Gibbs measure of this finite structure, with the default budget.
    pub fn exact_gibbs(&self) -> Result<ProbTable> {
        self.exact_gibbs_with_budget(DEFAULT_BUDGET)
    }

    pub fn exact_gibbs_with_budget(&self, budget: usize) -> Result<ProbTable> {
        self.exact_gibbs_at_scale(1.0, budget)
    }

    /// Gibbs table of `exp(−scale·U)`.
    pub fn exact_gibbs_at_scale(&self, scale: f64, budget: usize) -> Result<ProbTable> {
        let radices = self.radices();
        Self::check_budget("exact Gibbs table", &radices, budget)?;
        let layout = MixedRadix::new(radices);
        let n = self.len();
        let mut logw = alloc::vec![0.0; layout.len()];
        let mut omega = alloc::vec![0usize; n];
        let mut i = 0;
        loop {
            let ok = (0..n).all(|v| self.allows(v, omega[v]));
            logw[i] = if ok {
                -scale * self.energy(&omega)
            } else {
                f64::NEG_INFINITY
            };
            i += 1;
            if !layout.advance(&mut omega) {
                break;
            }
        }
        let lz = math::softmax_in_place(&mut logw);
        if !lz.is_finite() {
            return Err(Error::Degenerate);
        }
        Ok(ProbTable::from_parts_normalized((0..n).collect(), layout, logw))
    }

    /// Resamples `omega[v]` from the single-site kernel.
    pub fn glauber_step<R: Rng + ?Sized>(&self, v: usize, omega: &mut [usize], rng: &mut R) {
        let mut buf = Vec::new();
        self.glauber_step_at_scale(v, omega, 1.0, &mut buf, rng);
    }

    /// Heat-bath update for `exp(−scale·U)` with a caller-provided scratch buffer.
    pub fn glauber_step_at_scale<R: Rng + ?Sized>(
        &self,
        v: usize,
        omega: &mut [usize],
        scale: f64,
        buf: &mut Vec<f64>,
        rng: &mut R,
    ) {
        if self.pinned(v).is_some() {
            omega[v] = self.pinned(v).unwrap();
            return;
        }
        site_conditional(self, v, omega, scale, buf);
        omega[v] = sample_index(buf, rng);
    }

    /// One systematic-scan sweep over all vertices.
    pub fn glauber_sweep<R: Rng + ?Sized>(
        &self,
        omega: &mut [usize],
        scale: f64,
        buf: &mut Vec<f64>,
        rng: &mut R,
    ) {
        for v in 0..self.len() {
            self.glauber_step_at_scale(v, omega, scale, buf, rng);
        }
    }

    /// Uniformly random admissible configuration.
    pub fn random_configuration<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        (0..self.len())
            .map(|v| match self.pinned(v) {
                Some(a) => a,
                None => rng.gen_range(0..self.radix(v)),
            })
            .collect()
    }
}
