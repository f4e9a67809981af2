//! Gauss-Legendre quadrature with power-law endpoint substitutions.
//!
//! The kernels integrated here behave like `(u - a)^{-lambda}` with
//! `lambda in (0, 1)` near an endpoint.  Substituting `u = a + w^{1/(1-lambda)}`
//! absorbs the singularity exactly:
//!
//! ```text
//! ∫_a^b (u-a)^{-λ} f(u) du = 1/(1-λ) ∫_0^{(b-a)^{1-λ}} f(a + w^{1/(1-λ)}) dw
//! ```
//!
//! so a fixed-order rule on the substituted variable converges fast even
//! though the original integrand blows up.

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let (mut p, mut dp) = legendre_with_derivative(n, x);
        for _ in 0..100 {
            let dx = -p / dp;
            x += dx;
            let v = legendre_with_derivative(n, x);
            p = v.0;
            dp = v.1;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Reusable rule with precomputed nodes.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Nodes `u_j` and weights `w_j` such that
    /// `∫_a^b (u-a)^{-λ} f(u) du ≈ Σ w_j (u_j - a)^{-λ} f(u_j)` is exact in the
    /// substituted variable.  The singular factor is *not* folded into the
    /// weights so callers can evaluate products with one singular factor per
    /// node explicitly.
    pub fn left_singular_nodes(&self, a: f64, b: f64, lambda: f64) -> Vec<(f64, f64)> {
        assert!(lambda > 0.0 && lambda < 1.0, "lambda must be in (0,1)");
        let p = 1.0 - lambda;
        let wmax = (b - a).powf(p);
        let half = 0.5 * wmax;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| {
                let wv = half * (x + 1.0);
                let u = a + wv.powf(1.0 / p);
                // dw-weight mapped back to du including the singular factor:
                // du = (1/p) w^{(1-p)/p} dw and (u-a)^{-λ} = w^{-(1-p)/p},
                // so (u-a)^{-λ} du = dw / p.
                let quad_w = w * half / p * (u - a).powf(lambda);
                (u, quad_w)
            })
            .collect()
    }

    /// `∫_a^b (u-a)^{-λ} f(u) du` with the substitution applied.
    pub fn integrate_left_singular<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        lambda: f64,
        mut f: F,
    ) -> f64 {
        let p = 1.0 - lambda;
        let wmax = (b - a).powf(p);
        let half = 0.5 * wmax;
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let wv = half * (x + 1.0);
            let u = a + wv.powf(1.0 / p);
            acc += w * f(u);
        }
        acc * half / p
    }

    /// `∫_a^b (b-u)^{-λ} f(u) du`, mirrored variant.
    pub fn integrate_right_singular<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        lambda: f64,
        mut f: F,
    ) -> f64 {
        self.integrate_left_singular(a, b, lambda, |u| f(a + b - u))
    }
}

/// Runs `eval` with doubling resolution until two successive values agree to
/// `rel_tol` in relative terms; returns the finer value.  `eval` receives the
/// node count, starting at `n0`.
pub fn refine_until<F: FnMut(usize) -> f64>(
    mut eval: F,
    n0: usize,
    rel_tol: f64,
    max_doublings: usize,
    what: &str,
) -> Result<f64> {
    let mut n = n0;
    let mut prev = eval(n);
    for _ in 0..max_doublings {
        n *= 2;
        let cur = eval(n);
        let scale = cur.abs().max(prev.abs()).max(f64::MIN_POSITIVE);
        if (cur - prev).abs() <= rel_tol * scale {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!(
        "{what} did not stabilize to {rel_tol:e} after {max_doublings} refinements; \
         the integrand may have an unhandled singularity, try splitting the domain"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussRule::new(8);
        // Degree 15 is within the exactness range of an 8-point rule.
        let val = rule.integrate(0.0, 1.0, |x| x.powi(15));
        assert_relative_eq!(val, 1.0 / 16.0, max_relative = 1e-13);
    }

    #[test]
    fn left_singular_substitution_matches_closed_form() {
        // ∫_0^1 u^{-0.8} du = 5.
        let rule = GaussRule::new(16);
        let val = rule.integrate_left_singular(0.0, 1.0, 0.8, |_| 1.0);
        assert_relative_eq!(val, 5.0, max_relative = 1e-12);

        // ∫_0^2 u^{-0.65} (1+u) du = 2^{0.35}/0.35 + 2^{1.35}/1.35.
        let expect = 2f64.powf(0.35) / 0.35 + 2f64.powf(1.35) / 1.35;
        let val = rule.integrate_left_singular(0.0, 2.0, 0.65, |u| 1.0 + u);
        assert_relative_eq!(val, expect, max_relative = 1e-10);
    }

    #[test]
    fn right_singular_mirrors_left() {
        // ∫_0^1 (1-u)^{-0.3} u du = B(2, 0.7) = 1/(0.7 · 1.7).  The smooth
        // factor composed with the substitution is only Hölder at the
        // endpoint, so convergence is polynomial; refine instead of pinning
        // one node count.
        let val = refine_until(
            |n| GaussRule::new(n).integrate_right_singular(0.0, 1.0, 0.3, |u| u),
            16,
            1e-9,
            8,
            "beta moment",
        )
        .unwrap();
        assert_relative_eq!(val, 1.0 / (0.7 * 1.7), max_relative = 1e-8);
    }

    #[test]
    fn singular_nodes_expose_weights() {
        let rule = GaussRule::new(16);
        let nodes = rule.left_singular_nodes(0.0, 1.0, 0.8);
        let val: f64 = nodes.iter().map(|(u, w)| w * u.powf(-0.8)).sum();
        assert_relative_eq!(val, 5.0, max_relative = 1e-12);
    }

    #[test]
    fn refine_until_detects_stabilization() {
        let val = refine_until(
            |n| GaussRule::new(n).integrate(0.0, 1.0, |x| (3.0 * x).sin()),
            8,
            1e-12,
            6,
            "sin integral",
        )
        .unwrap();
        assert_relative_eq!(val, (1.0 - (3.0f64).cos()) / 3.0, max_relative = 1e-12);
    }
}
