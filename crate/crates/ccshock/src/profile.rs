//! Piecewise-constant functions on the line.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `values[0]` on `(-inf, breaks[0])`, `values[i]` on `[breaks[i-1], breaks[i])`,
/// `values[n]` on `[breaks[n-1], inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl Profile {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(Error::Precondition(alloc::format!(
                "{} values for {} breaks",
                values.len(),
                breaks.len()
            )));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) || breaks.iter().any(|b| !b.is_finite()) {
            return Err(Error::Precondition("breaks must be finite and strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("non-finite profile value".into()));
        }
        Ok(Self { breaks, values })
    }

    pub fn constant(u: f64) -> Self {
        Self { breaks: Vec::new(), values: alloc::vec![u] }
    }

    /// Riemann datum with the jump at `x0`.
    pub fn riemann(u_l: f64, u_r: f64, x0: f64) -> Self {
        Self { breaks: alloc::vec![x0], values: alloc::vec![u_l, u_r] }
    }

    /// Cell averages on a uniform grid, extended by the edge values.
    pub fn from_cells(x_min: f64, dx: f64, cells: &[f64]) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Precondition("no cells".into()));
        }
        let breaks = (1..cells.len()).map(|i| x_min + dx * i as f64).collect();
        Self::new(breaks, cells.to_vec())
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.values[self.breaks.partition_point(|&b| b <= x)]
    }

    /// Value just left of `x`.
    pub fn eval_left(&self, x: f64) -> f64 {
        self.values[self.breaks.partition_point(|&b| b < x)]
    }

    pub fn tv(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    pub fn jumps(&self) -> usize {
        self.values.windows(2).filter(|w| w[0] != w[1]).count()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Drops breaks between equal values.
    pub fn simplify(&self) -> Self {
        let mut breaks = Vec::new();
        let mut values = alloc::vec![self.values[0]];
        for (b, &v) in self.breaks.iter().zip(&self.values[1..]) {
            if v != *values.last().unwrap() {
                breaks.push(*b);
                values.push(v);
            }
        }
        Self { breaks, values }
    }

    /// Integral of `g(self(x), other(x), x_mid)` over `[lo, hi]`, exact for
    /// piecewise-constant integrands.
    pub fn integrate_with<G>(&self, other: &Profile, lo: f64, hi: f64, g: G) -> f64
    where
        G: Fn(f64, f64) -> f64,
    {
        integrate_pieces(&[self, other], lo, hi, |v| g(v[0], v[1]))
    }

    pub fn l1_distance(&self, other: &Profile, lo: f64, hi: f64) -> f64 {
        self.integrate_with(other, lo, hi, |a, b| (a - b).abs())
    }

    pub fn l2_distance(&self, other: &Profile, lo: f64, hi: f64) -> f64 {
        libm::sqrt(self.integrate_with(other, lo, hi, |a, b| (a - b) * (a - b)))
    }
}

/// Integral over `[lo, hi]` of `g` applied to the values of several
/// profiles, summed over the common refinement of their breaks.
pub fn integrate_pieces<G>(profiles: &[&Profile], lo: f64, hi: f64, g: G) -> f64
where
    G: Fn(&[f64]) -> f64,
{
    if !(hi > lo) {
        return 0.0;
    }
    let mut cuts: Vec<f64> = profiles
        .iter()
        .flat_map(|p| p.breaks.iter().copied())
        .filter(|&b| b > lo && b < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut vals = alloc::vec![0.0; profiles.len()];
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        for (v, p) in vals.iter_mut().zip(profiles) {
            *v = p.eval(mid);
        }
        total += g(&vals) * (w[1] - w[0]);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn evaluation_is_right_continuous() {
        let p = Profile::new(vec![0.0, 1.0], vec![1.0, 2.0, 0.5]).unwrap();
        assert_eq!(p.eval(-1.0), 1.0);
        assert_eq!(p.eval(0.0), 2.0);
        assert_eq!(p.eval_left(0.0), 1.0);
        assert_eq!(p.eval(1.0), 0.5);
        assert_eq!(p.tv(), 2.5);
        assert_eq!(p.jumps(), 2);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Profile::new(vec![0.0], vec![1.0]).is_err());
        assert!(Profile::new(vec![1.0, 0.0], vec![1.0, 2.0, 3.0]).is_err());
        assert!(Profile::from_cells(0.0, 0.1, &[]).is_err());
    }

    #[test]
    fn distances() {
        let a = Profile::riemann(1.0, 0.0, 0.0);
        let b = Profile::riemann(1.0, 0.0, 0.25);
        assert!((a.l1_distance(&b, -1.0, 1.0) - 0.25).abs() < 1e-15);
        assert!((a.l2_distance(&b, -1.0, 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(a.l1_distance(&a, -1.0, 1.0), 0.0);
        let c = Profile::from_cells(-1.0, 0.5, &[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(a.l1_distance(&c, -1.0, 1.0).abs() < 1e-15);
        assert_eq!(c.simplify().breaks(), &[0.0]);
    }
}
