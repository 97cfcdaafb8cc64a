//! Flux and entropy models, relative quantities and shock speeds.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::quadrature;

/// Below this separation two states are treated as coincident.
pub const COINCIDENT: f64 = 1e-12;

const MAX_DEGREE: usize = 24;

/// Polynomial flux `f(u) = c_0 + c_1 u + ...` on the state interval `[-M, M]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxModel {
    coeffs: Vec<f64>,
    bound: f64,
    name: String,
}

impl FluxModel {
    /// `f(u) = u^3` on `[-bound, bound]`.
    pub fn cubic(bound: f64) -> Result<Self> {
        let mut flux = Self::polynomial(&[0.0, 0.0, 0.0, 1.0], bound)?;
        flux.name = String::from("cubic");
        Ok(flux)
    }

    /// Builds a polynomial flux and checks that it is concave-convex on
    /// `[-bound, bound]`: `u f''(u) > 0` away from zero, `f''(0) = 0` and
    /// `f'''(0) != 0`.
    pub fn polynomial(coeffs: &[f64], bound: f64) -> Result<Self> {
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::Model(format!("state bound must be positive, got {bound}")));
        }
        let mut coeffs: Vec<f64> = coeffs.to_vec();
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Model(String::from("non-finite flux coefficient")));
        }
        if coeffs.len() < 4 {
            return Err(Error::Model(String::from("a concave-convex flux needs degree >= 3")));
        }
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::Model(format!("flux degree above {MAX_DEGREE}")));
        }
        let flux = Self { coeffs, bound, name: String::from("poly") };
        let scale = (2..=3).map(|k| flux.eval(bound, k).abs()).fold(1.0, f64::max);
        if flux.eval(0.0, 2).abs() > 1e-12 * scale {
            return Err(Error::Model(String::from("f''(0) must vanish")));
        }
        if flux.eval(0.0, 3).abs() <= 1e-12 * scale {
            return Err(Error::Model(String::from("f'''(0) must not vanish")));
        }
        let n = 400;
        for i in 0..=n {
            let u = -bound + 2.0 * bound * i as f64 / n as f64;
            if u.abs() < 1e-9 * bound {
                continue;
            }
            if u * flux.eval(u, 2) <= 0.0 {
                return Err(Error::Model(format!("u f''(u) <= 0 at u = {u}")));
            }
        }
        Ok(flux)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Derivative of order `order` at `u` (order 0 is `f` itself).
    pub fn eval(&self, u: f64, order: usize) -> f64 {
        let deg = self.coeffs.len() - 1;
        if order > deg {
            return 0.0;
        }
        let mut acc = 0.0;
        for n in (order..=deg).rev() {
            let mut falling = 1.0;
            for j in 0..order {
                falling *= (n - j) as f64;
            }
            acc = acc * u + self.coeffs[n] * falling;
        }
        acc
    }

    pub fn f(&self, u: f64) -> f64 {
        self.eval(u, 0)
    }

    /// Characteristic speed `f'(u)`.
    pub fn lambda(&self, u: f64) -> f64 {
        self.eval(u, 1)
    }

    /// Divided difference `f[x_0, ..., x_k]`, exact for polynomials and
    /// valid for repeated nodes.
    pub fn divided_difference(&self, nodes: &[f64]) -> f64 {
        let k = nodes.len() - 1;
        let deg = self.coeffs.len() - 1;
        if k > deg {
            return 0.0;
        }
        let top = deg - k;
        // complete homogeneous symmetric polynomials h_0..h_top of the nodes
        let mut h = [0.0f64; MAX_DEGREE + 1];
        h[0] = 1.0;
        for j in 1..=top {
            h[j] = h[j - 1] * nodes[0];
        }
        for &x in &nodes[1..] {
            for j in 1..=top {
                h[j] += x * h[j - 1];
            }
        }
        (k..=deg).map(|n| self.coeffs[n] * h[n - k]).sum()
    }

    /// Chord speed `(f(u) - f(v)) / (u - v)`, equal to `f'(u)` for
    /// coincident states.
    pub fn chord(&self, u: f64, v: f64) -> f64 {
        if (u - v).abs() < COINCIDENT {
            self.lambda(u)
        } else {
            self.divided_difference(&[u, v])
        }
    }

    /// `max |f'|` over `[lo, hi]`. `f'` decreases left of zero and
    /// increases right of it, so only the endpoints and zero matter.
    pub fn max_speed(&self, lo: f64, hi: f64) -> f64 {
        let mut m = self.lambda(lo).abs().max(self.lambda(hi).abs());
        if lo < 0.0 && hi > 0.0 {
            m = m.max(self.lambda(0.0).abs());
        }
        m
    }

    /// `sup f'` over the whole state interval.
    pub fn lambda_sup(&self) -> f64 {
        self.lambda(-self.bound).max(self.lambda(self.bound))
    }

    pub fn check(&self, u: f64) -> Result<()> {
        if u.is_finite() && u.abs() <= self.bound * (1.0 + 1e-14) {
            Ok(())
        } else {
            Err(Error::Domain { value: u, bound: self.bound })
        }
    }
}

/// An entropy / entropy-flux pair.
pub trait Entropy {
    fn eta(&self, u: f64) -> f64;
    /// Entropy flux `q` with `q' = eta' f'`.
    fn entropy_flux(&self, flux: &FluxModel, u: f64) -> f64;
}

/// Strictly convex entropies with closed-form entropy fluxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyModel {
    /// `eta(u) = u^2`
    Quadratic,
    /// `eta(u) = u^2 + e^u`
    Exponential,
}

impl EntropyModel {
    pub fn name(&self) -> &'static str {
        match self {
            EntropyModel::Quadratic => "quadratic",
            EntropyModel::Exponential => "exp",
        }
    }

    /// Derivative of order `order` (0..=3) at `u`.
    pub fn eval(&self, u: f64, order: usize) -> f64 {
        let quad = match order {
            0 => u * u,
            1 => 2.0 * u,
            2 => 2.0,
            _ => 0.0,
        };
        match self {
            EntropyModel::Quadratic => quad,
            EntropyModel::Exponential => quad + libm::exp(u),
        }
    }

    pub fn d_eta(&self, u: f64) -> f64 {
        self.eval(u, 1)
    }

    pub fn d2_eta(&self, u: f64) -> f64 {
        self.eval(u, 2)
    }

    /// Closed-form entropy flux, normalized so that `q(0) = 0`.
    pub fn flux(&self, flux: &FluxModel, u: f64) -> f64 {
        let c = flux.coefficients();
        // integral of 2 s f'(s) from 0 to u
        let mut quad = 0.0;
        for (n, &cn) in c.iter().enumerate().skip(1) {
            quad += cn * 2.0 * n as f64 / (n + 1) as f64 * powi(u, n + 1);
        }
        match self {
            EntropyModel::Quadratic => quad,
            EntropyModel::Exponential => {
                // integral of e^s p(s) is e^s (p - p' + p'' - ...) with p = f'
                let deg = c.len() - 1;
                let alt = |x: f64| {
                    let mut s = 0.0;
                    let mut sign = 1.0;
                    for j in 0..deg {
                        s += sign * flux.eval(x, j + 1);
                        sign = -sign;
                    }
                    s
                };
                quad + libm::exp(u) * alt(u) - alt(0.0)
            }
        }
    }

    /// Entropy flux by adaptive Simpson quadrature of `eta' f'` from 0.
    pub fn flux_by_quadrature(&self, flux: &FluxModel, u: f64) -> f64 {
        quadrature::adaptive_simpson(|s| self.d_eta(s) * flux.lambda(s), 0.0, u, 1e-10)
    }

    /// `eta(u | v)`, written to avoid cancellation near `u = v`.
    pub fn rel_entropy(&self, u: f64, v: f64) -> f64 {
        let d = u - v;
        match self {
            EntropyModel::Quadratic => d * d,
            EntropyModel::Exponential => d * d + libm::exp(v) * (libm::expm1(d) - d),
        }
    }
}

impl Entropy for EntropyModel {
    fn eta(&self, u: f64) -> f64 {
        self.eval(u, 0)
    }

    fn entropy_flux(&self, flux: &FluxModel, u: f64) -> f64 {
        self.flux(flux, u)
    }
}

/// Kruzhkov entropy `|u - k|` with flux `sgn(u - k) (f(u) - f(k))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KruzhkovEntropy {
    pub k: f64,
}

impl Entropy for KruzhkovEntropy {
    fn eta(&self, u: f64) -> f64 {
        (u - self.k).abs()
    }

    fn entropy_flux(&self, flux: &FluxModel, u: f64) -> f64 {
        let d = flux.f(u) - flux.f(self.k);
        if u > self.k {
            d
        } else if u < self.k {
            -d
        } else {
            0.0
        }
    }
}

/// A flux together with the fixed strictly convex entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct Models {
    pub flux: FluxModel,
    pub entropy: EntropyModel,
}

impl Models {
    pub fn new(flux: FluxModel, entropy: EntropyModel) -> Self {
        Self { flux, entropy }
    }

    pub fn bound(&self) -> f64 {
        self.flux.bound()
    }

    pub fn lambda(&self, u: f64) -> f64 {
        self.flux.lambda(u)
    }

    pub fn sigma(&self, u: f64, v: f64) -> f64 {
        self.flux.chord(u, v)
    }

    pub fn eta(&self, u: f64) -> f64 {
        self.entropy.eval(u, 0)
    }

    pub fn q(&self, u: f64) -> f64 {
        self.entropy.flux(&self.flux, u)
    }

    pub fn rel_entropy(&self, u: f64, v: f64) -> f64 {
        self.entropy.rel_entropy(u, v)
    }

    /// `q(u; v) = q(u) - q(v) - eta'(v) (f(u) - f(v))`.
    pub fn rel_flux(&self, u: f64, v: f64) -> f64 {
        self.q(u) - self.q(v) - self.entropy.d_eta(v) * (self.flux.f(u) - self.flux.f(v))
    }

    /// `f(u | v) = f(u) - f(v) - f'(v) (u - v)`.
    pub fn rel_flux_f(&self, u: f64, v: f64) -> f64 {
        let d = u - v;
        d * d * self.flux.divided_difference(&[u, v, v])
    }

    /// Entropy dissipation `E_eta(u_-, u_+)` of the fixed entropy.
    pub fn dissipation(&self, u_minus: f64, u_plus: f64) -> f64 {
        dissipation_of(&self.flux, &self.entropy, u_minus, u_plus)
    }
}

fn dissipation_of<E: Entropy + ?Sized>(flux: &FluxModel, e: &E, u_minus: f64, u_plus: f64) -> f64 {
    if (u_minus - u_plus).abs() < COINCIDENT {
        return 0.0;
    }
    let s = flux.chord(u_minus, u_plus);
    -s * (e.eta(u_plus) - e.eta(u_minus)) + e.entropy_flux(flux, u_plus) - e.entropy_flux(flux, u_minus)
}

pub fn shock_speed(flux: &FluxModel, u: f64, v: f64) -> Result<f64> {
    flux.check(u)?;
    flux.check(v)?;
    Ok(flux.chord(u, v))
}

pub fn rel_entropy(models: &Models, u: f64, v: f64) -> Result<f64> {
    models.flux.check(u)?;
    models.flux.check(v)?;
    Ok(models.rel_entropy(u, v))
}

pub fn rel_flux(models: &Models, u: f64, v: f64) -> Result<f64> {
    models.flux.check(u)?;
    models.flux.check(v)?;
    Ok(models.rel_flux(u, v))
}

pub fn rel_flux_f(flux: &FluxModel, u: f64, v: f64) -> Result<f64> {
    flux.check(u)?;
    flux.check(v)?;
    let d = u - v;
    Ok(d * d * flux.divided_difference(&[u, v, v]))
}

/// `E_eta(u_-, u_+)`; the shock is eta-entropic iff this is `<= 0`.
pub fn entropy_dissipation<E: Entropy + ?Sized>(
    flux: &FluxModel,
    entropy: &E,
    u_minus: f64,
    u_plus: f64,
) -> Result<f64> {
    flux.check(u_minus)?;
    flux.check(u_plus)?;
    Ok(dissipation_of(flux, entropy, u_minus, u_plus))
}

pub(crate) fn powi(x: f64, n: usize) -> f64 {
    let mut r = 1.0;
    for _ in 0..n {
        r *= x;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cubic() -> FluxModel {
        FluxModel::cubic(2.0).unwrap()
    }

    fn quad() -> Models {
        Models::new(cubic(), EntropyModel::Quadratic)
    }

    fn expo() -> Models {
        Models::new(cubic(), EntropyModel::Exponential)
    }

    #[test]
    fn shock_speed_examples() {
        let f = cubic();
        assert_eq!(shock_speed(&f, 1.0, 0.0).unwrap(), 1.0);
        assert_eq!(shock_speed(&f, 1.0, 1.0).unwrap(), 3.0);
        assert!((shock_speed(&f, 1.0, -0.5).unwrap() - 0.75).abs() < 1e-15);
        assert!(matches!(shock_speed(&f, 2.5, 0.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn rel_entropy_examples() {
        let m = quad();
        assert_eq!(rel_entropy(&m, 2.0, 1.0).unwrap(), 1.0);
        assert_eq!(rel_entropy(&m, 0.7, 0.7).unwrap(), 0.0);
        let e = expo();
        // 1 + e - (0 + 1) - (0 + 1)(1 - 0) = e - 1
        let got = rel_entropy(&e, 1.0, 0.0).unwrap();
        assert!((got - 1.718_281_828_459_045).abs() < 1e-14);
    }

    #[test]
    fn rel_flux_examples() {
        let m = quad();
        assert_eq!(rel_flux(&m, 0.3, 0.3).unwrap(), 0.0);
        assert!((rel_flux(&m, 1.0, 0.0).unwrap() - 1.5).abs() < 1e-15);
        assert!((rel_flux(&m, 0.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rel_flux_f_examples() {
        let f = cubic();
        assert_eq!(rel_flux_f(&f, 0.4, 0.4).unwrap(), 0.0);
        assert!((rel_flux_f(&f, 2.0, 1.0).unwrap() - 4.0).abs() < 1e-14);
        assert!((rel_flux_f(&f, 0.0, 1.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn dissipation_examples() {
        let f = cubic();
        let q = EntropyModel::Quadratic;
        assert_eq!(entropy_dissipation(&f, &q, 0.5, 0.5).unwrap(), 0.0);
        assert!(entropy_dissipation(&f, &q, 1.0, -1.0).unwrap().abs() < 1e-14);
        let k = KruzhkovEntropy { k: -0.5 };
        let e = entropy_dissipation(&f, &k, 1.0, -0.6).unwrap();
        // sigma = 0.76, eta jump -1.4, q_k jump 0.091 - 1.125
        assert!((e - 0.03).abs() < 1e-12);
    }

    #[test]
    fn closed_form_fluxes() {
        let f = cubic();
        for &u in &[-2.0, -1.3, -0.2, 0.0, 0.4, 1.0, 1.9] {
            let q = EntropyModel::Quadratic.flux(&f, u);
            assert!((q - 1.5 * u * u * u * u).abs() < 1e-13);
            let e = EntropyModel::Exponential.flux(&f, u);
            let hand = 1.5 * u.powi(4) + 3.0 * libm::exp(u) * (u * u - 2.0 * u + 2.0) - 6.0;
            assert!((e - hand).abs() < 1e-12, "u={u}: {e} vs {hand}");
            for ent in [EntropyModel::Quadratic, EntropyModel::Exponential] {
                let a = ent.flux(&f, u);
                let b = ent.flux_by_quadrature(&f, u);
                assert!((a - b).abs() < 1e-9, "{ent:?} u={u}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn polynomial_flux_fluxes_match_quadrature() {
        let f = FluxModel::polynomial(&[0.0, 0.5, 0.0, 1.0, 0.0, 0.2], 1.5).unwrap();
        for &u in &[-1.5, -0.7, 0.3, 1.2] {
            for ent in [EntropyModel::Quadratic, EntropyModel::Exponential] {
                let a = ent.flux(&f, u);
                let b = ent.flux_by_quadrature(&f, u);
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rejects_non_concave_convex() {
        assert!(FluxModel::polynomial(&[0.0, 0.0, 1.0], 1.0).is_err());
        assert!(FluxModel::polynomial(&[0.0, 0.0, 0.1, 1.0], 1.0).is_err());
        assert!(FluxModel::polynomial(&[0.0, 0.0, 0.0, -1.0], 1.0).is_err());
        assert!(FluxModel::polynomial(&[0.0, 0.0, 0.0, 1.0], -1.0).is_err());
        assert!(FluxModel::polynomial(&[0.0, 0.0, 0.0, 1.0, 0.0, 0.3], 2.0).is_ok());
    }

    #[test]
    fn derivatives_match_central_differences() {
        let f = FluxModel::polynomial(&[0.1, -0.3, 0.0, 1.0, 0.0, 0.2], 2.0).unwrap();
        let dh = 1e-5;
        for i in 0..41 {
            let u = -1.9 + 3.8 * i as f64 / 40.0;
            for k in 1..=4 {
                let fd = (f.eval(u + dh, k - 1) - f.eval(u - dh, k - 1)) / (2.0 * dh);
                let ex = f.eval(u, k);
                assert!((fd - ex).abs() <= 1e-6 * ex.abs().max(1.0), "k={k} u={u}");
            }
            for ent in [EntropyModel::Quadratic, EntropyModel::Exponential] {
                for k in 1..=3 {
                    let fd = (ent.eval(u + dh, k - 1) - ent.eval(u - dh, k - 1)) / (2.0 * dh);
                    assert!((fd - ent.eval(u, k)).abs() <= 1e-6 * ent.eval(u, k).abs().max(1.0));
                }
                assert!(ent.d2_eta(u) > 0.0);
                let fd = (ent.flux(&f, u + dh) - ent.flux(&f, u - dh)) / (2.0 * dh);
                let ex = ent.d_eta(u) * f.lambda(u);
                assert!((fd - ex).abs() <= 1e-8 * ex.abs().max(1.0) + 1e-8);
            }
        }
    }

    #[test]
    fn divided_differences_match_direct_formulas() {
        let f = FluxModel::polynomial(&[0.0, 1.0, 0.0, 2.0, 0.0, 0.5], 2.0).unwrap();
        let (a, b, c) = (0.9, -0.4, 1.3);
        let d1 = (f.f(a) - f.f(b)) / (a - b);
        assert!((f.divided_difference(&[a, b]) - d1).abs() < 1e-13);
        let d2 = ((f.f(a) - f.f(b)) / (a - b) - (f.f(b) - f.f(c)) / (b - c)) / (a - c);
        assert!((f.divided_difference(&[a, b, c]) - d2).abs() < 1e-12);
        assert!((f.divided_difference(&[a, a]) - f.lambda(a)).abs() < 1e-13);
        assert!((f.divided_difference(&[a, a, a]) - f.eval(a, 2) / 2.0).abs() < 1e-13);
    }

    #[test]
    fn normalization_constant_cancels() {
        // shifting q by a constant leaves q(u; v) unchanged
        let m = expo();
        let shifted = |u: f64, v: f64| {
            (m.q(u) + 7.0) - (m.q(v) + 7.0) - m.entropy.d_eta(v) * (m.flux.f(u) - m.flux.f(v))
        };
        for &(u, v) in &[(1.0, 0.0), (-1.2, 0.4), (0.3, 1.7)] {
            assert!((shifted(u, v) - m.rel_flux(u, v)).abs() < 1e-12);
        }
    }

    #[test]
    fn kruzhkov_entropy_basics() {
        let k = KruzhkovEntropy { k: 0.3 };
        assert_eq!(k.eta(0.3), 0.0);
        assert!(k.eta(-1.0) > 0.0);
    }

    #[test]
    fn dissipation_sign_pattern() {
        // decreasing then increasing with minimum at the tangent point -u/2
        let m = quad();
        for &um in &[0.4, 1.0, 1.6] {
            let tan = -um / 2.0;
            let n = 400;
            let lo = -2.0;
            let mut prev = m.dissipation(um, lo);
            for i in 1..=n {
                let v = lo + (um - lo) * i as f64 / n as f64;
                let e = m.dissipation(um, v);
                if v < tan - 1e-2 {
                    assert!(e < prev, "not decreasing at {v}");
                } else if v > tan + 1e-2 {
                    assert!(e > prev - 1e-15, "not increasing at {v}");
                }
                prev = e;
            }
        }
    }

    proptest! {
        #[test]
        fn rel_entropy_quadratic_bounds(u in -2.0f64..2.0, v in -2.0f64..2.0) {
            // c* = min eta''/2 and c** = max eta''/2 on [-2, 2]
            let e = EntropyModel::Exponential;
            let r = e.rel_entropy(u, v);
            let d2 = (u - v) * (u - v);
            let lo = (2.0 + libm::exp(-2.0)) / 2.0;
            let hi = (2.0 + libm::exp(2.0)) / 2.0;
            prop_assert!(r >= lo * d2 * (1.0 - 1e-12) - 1e-300);
            prop_assert!(r <= hi * d2 * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn rel_flux_controlled_by_rel_entropy(u in -2.0f64..2.0, v in -2.0f64..2.0) {
            // |q(u;v)| <= C eta(u|v) with C = sup |f'| * sup eta'' / inf eta''
            for m in [quad(), expo()] {
                let c = 12.0 * (2.0 + libm::exp(2.0)) / (2.0 + libm::exp(-2.0));
                prop_assert!(m.rel_flux(u, v).abs() <= c * m.rel_entropy(u, v) + 1e-12);
            }
        }

        #[test]
        fn rel_entropy_matches_definition(u in -2.0f64..2.0, v in -2.0f64..2.0) {
            for e in [EntropyModel::Quadratic, EntropyModel::Exponential] {
                let direct = e.eval(u, 0) - e.eval(v, 0) - e.eval(v, 1) * (u - v);
                prop_assert!((direct - e.rel_entropy(u, v)).abs() < 1e-12);
            }
        }
    }
}
