//! Adaptive Simpson quadrature.

/// Integral of `g` over `[a, b]` to absolute tolerance `tol`
/// (`b < a` gives the negated integral).
pub fn adaptive_simpson<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = g(a);
    let fb = g(b);
    let m = 0.5 * (a + b);
    let fm = g(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(&g, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn step<G: Fn(f64) -> f64>(
    g: &G,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = g(lm);
    let frm = g(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    step(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + step(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Composite Gauss-Legendre (5 points) over `n` equal panels.
pub fn gauss_legendre<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, n: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_47,
        0.478_628_670_499_366_47,
        0.236_926_885_056_189_08,
        0.236_926_885_056_189_08,
    ];
    let h = (b - a) / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        let c = a + (i as f64 + 0.5) * h;
        let mut s = 0.0;
        for k in 0..5 {
            s += W[k] * g(c + 0.5 * h * X[k]);
        }
        total += 0.5 * h * s;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_and_exponentials() {
        let v = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 4.0).abs() < 1e-12);
        let v = adaptive_simpson(libm::exp, 0.0, 1.0, 1e-12);
        assert!((v - (core::f64::consts::E - 1.0)).abs() < 1e-11);
        let v = adaptive_simpson(|x| x, 1.0, 0.0, 1e-12);
        assert!((v + 0.5).abs() < 1e-14);
        let v = gauss_legendre(libm::sin, 0.0, core::f64::consts::PI, 8);
        assert!((v - 2.0).abs() < 1e-12);
    }
}
