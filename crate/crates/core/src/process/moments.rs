//! Moment oracles from low-dimensional quadrature.
//!
//! The `2q`-dimensional moment integrals of the rescaled increment law reduce
//! to one- and two-dimensional integrals once the inner kernel-pair integrals
//! are evaluated in closed form.  These routines avoid the factor-term
//! projection entirely, so they make independent cross-checks for the sampler
//! and for the iid single-increment law.

use crate::error::{Error, Result};
use crate::process::kernel::normalizing_constant;
use crate::process::params::HermiteParams;
use crate::quadrature::{refine_until, GaussRule};
use statrs::function::beta::beta;

/// Tail of the kernel-pair integral beyond distance `k_width - 1` to the
/// left: `int_{k_width - 1}^inf (u + s)^{-alpha} (v + s)^{-alpha} ds` for
/// `u, v` in `[0, 1]`.  Requires `k_width > 1`.
fn pair_tail(u: f64, v: f64, k_width: f64, alpha: f64, rule: &GaussRule) -> f64 {
    let s0 = k_width - 1.0;
    // Substituting s = s0 / w maps the tail onto (0, 1] with an integrable
    // w^{2 alpha - 2} singularity at zero; the smooth remainder is analytic.
    rule.integrate_left_singular(0.0, 1.0, 2.0 - 2.0 * alpha, |w| {
        s0.powf(1.0 - 2.0 * alpha)
            * (u * w / s0 + 1.0).powf(-alpha)
            * (v * w / s0 + 1.0).powf(-alpha)
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Second moment of the rescaled single-increment law truncated to the domain
/// `(1 - k_width, 1]`, computed by two-dimensional quadrature.
///
/// Exact in the domain width; carries none of the cell-projection bias of the
/// factor construction, so the gap between this and a projected kernel's
/// second moment isolates the projection error.  Requires `k_width > 1`.
pub fn truncated_second_moment(params: HermiteParams, k_width: f64) -> Result<f64> {
    params.validate()?;
    if !(k_width > 1.0) {
        return Err(Error::InvalidParams(format!(
            "domain width must exceed 1, got {k_width}"
        )));
    }
    let alpha = params.alpha();
    let q = params.q;
    let b_pair = beta(1.0 - alpha, 2.0 * alpha - 1.0);
    let c = normalizing_constant(params)?;
    let q_fact: f64 = (1..=q).map(|k| k as f64).product();
    let eta = 2.0 * alpha - 1.0;

    let tail_rule = GaussRule::new(32);
    // E X^2 = q! c^2 int_0^1 int_0^1 G(u, v)^q du dv with
    // G(u, v) = B |u - v|^{-eta} - tail(u, v).  Fold onto the separation
    // d = u - v and expand the binomial so each term carries a pure
    // d^{-(q - k) eta} singularity with an analytic cofactor.
    let outer = refine_until(
        |n| {
            let rule = GaussRule::new(n);
            let inner_rule = GaussRule::new(48);
            let mut total = 0.0;
            for k in 0..=q {
                let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
                let coef = sign * binomial(q, k) * b_pair.powi((q - k) as i32);
                let lambda = (q - k) as f64 * eta;
                let smooth = |d: f64| {
                    inner_rule.integrate(d, 1.0, |u| {
                        pair_tail(u, u - d, k_width, alpha, &tail_rule).powi(k as i32)
                    })
                };
                let piece = if lambda > 0.0 {
                    rule.integrate_left_singular(0.0, 1.0, lambda, smooth)
                } else {
                    rule.integrate(0.0, 1.0, smooth)
                };
                total += coef * piece;
            }
            2.0 * total
        },
        24,
        1e-8,
        6,
        "truncated second moment",
    )?;
    Ok(q_fact * c * c * outer)
}

/// Symmetric double-kernel integral `int_0^1 |x - s|^{-eta} |s - z|^{-eta} ds`
/// for `eta` in `(0, 1/2)`, split at the two singular points.
fn chain_integral(x: f64, z: f64, eta: f64, rule: &GaussRule) -> f64 {
    let (lo, hi) = if x <= z { (x, z) } else { (z, x) };
    let mut total = 0.0;
    if hi > lo {
        if lo > 0.0 {
            total += rule.integrate_right_singular(0.0, lo, eta, |s| (hi - s).powf(-eta));
        }
        let mid = 0.5 * (lo + hi);
        total += rule.integrate_left_singular(lo, mid, eta, |s| (hi - s).powf(-eta));
        total += rule.integrate_right_singular(mid, hi, eta, |s| (s - lo).powf(-eta));
        if hi < 1.0 {
            total += rule.integrate_left_singular(hi, 1.0, eta, |s| (s - lo).powf(-eta));
        }
    } else {
        if lo > 0.0 {
            total += rule.integrate_right_singular(0.0, lo, 2.0 * eta, |_| 1.0);
        }
        if hi < 1.0 {
            total += rule.integrate_left_singular(hi, 1.0, 2.0 * eta, |_| 1.0);
        }
    }
    total
}

/// Fourth cumulant of the order-2 law at time 1, by trace quadrature.
///
/// For order 2 the fourth cumulant equals `48 tr(A^4)` where `A` is the
/// integral operator of the time-1 kernel.  Integrating out the four spatial
/// arguments leaves a four-dimensional time integral whose opposite pair of
/// coordinates collapses to the chain integral, giving a two-dimensional
/// reduction.
pub fn limit_fourth_cumulant_order2(params: HermiteParams) -> Result<f64> {
    params.validate()?;
    if params.q != 2 {
        return Err(Error::InvalidParams(format!(
            "trace quadrature applies to order 2, got {}",
            params.q
        )));
    }
    let alpha = params.alpha();
    let eta = 2.0 * alpha - 1.0;
    let b_pair = beta(1.0 - alpha, 2.0 * alpha - 1.0);
    let c = normalizing_constant(params)?;

    let inner_rule = GaussRule::new(48);
    // I4 = int int W(x, z)^2 dx dz over [0, 1]^2 with W the chain integral.
    // W is bounded for order 2 (eta < 1/2) but only Holder along the
    // diagonal, so the folded separation integral gets edge-clustered nodes.
    let i4 = refine_until(
        |n| {
            let rule = GaussRule::new(n);
            let u_rule = GaussRule::new(n.min(64));
            rule.left_singular_nodes(0.0, 1.0, 2.0 * eta)
                .iter()
                .map(|&(d, quad_w)| {
                    let inner = u_rule.integrate(d, 1.0, |x| {
                        let w = chain_integral(x, x - d, eta, &inner_rule);
                        w * w
                    });
                    quad_w * 2.0 * inner
                })
                .sum::<f64>()
        },
        24,
        1e-6,
        5,
        "fourth cumulant trace",
    )?;
    Ok(48.0 * c.powi(4) * b_pair.powi(4) * i4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tail_matches_brute_force_on_a_shifted_grid() {
        let alpha = 0.65;
        let rule = GaussRule::new(32);
        // Brute force: integrate far enough that the remainder is negligible.
        let brute = |u: f64, v: f64, s0: f64| {
            let body = refine_until(
                |n| {
                    GaussRule::new(n).integrate(s0, 1e6, |s| {
                        (u + s).powf(-alpha) * (v + s).powf(-alpha)
                    })
                },
                512,
                1e-7,
                4,
                "test",
            )
            .unwrap();
            // Closed-form remainder of int_R^inf s^{-2 alpha} ds at R = 1e6.
            body + (1e6f64 + 0.5 * (u + v)).powf(1.0 - 2.0 * alpha) / (2.0 * alpha - 1.0)
        };
        for &(u, v, k) in &[(0.3, 0.8, 9.0), (0.0, 1.0, 33.0), (0.5, 0.5, 2.0)] {
            assert_relative_eq!(
                pair_tail(u, v, k, alpha, &rule),
                brute(u, v, k - 1.0),
                max_relative = 1e-5
            );
        }
    }

    #[test]
    fn wide_domain_recovers_unit_variance() {
        // The leftover tail decays like k_width^{-(2 - 2H) / q}, so the
        // domain needed for a given accuracy grows quickly with the order.
        for &(q, h, width) in &[(1usize, 0.7, 1e7), (2, 0.7, 1e13)] {
            let params = HermiteParams::new(q, h).unwrap();
            let m2 = truncated_second_moment(params, width).unwrap();
            assert_relative_eq!(m2, 1.0, max_relative = 2e-4);
        }
    }

    #[test]
    fn truncation_deficit_follows_the_tail_power() {
        // The missing mass decays like k_width^{-(2 - 2H)} for order 1.
        let params = HermiteParams::new(1, 0.7).unwrap();
        let d1 = 1.0 - truncated_second_moment(params, 64.0).unwrap();
        let d2 = 1.0 - truncated_second_moment(params, 256.0).unwrap();
        let slope = (d1 / d2).ln() / 4f64.ln();
        assert_relative_eq!(slope, 0.6, max_relative = 0.05);
    }

    #[test]
    fn chain_integral_matches_brute_force() {
        let eta = 0.3;
        let rule = GaussRule::new(48);
        let brute = |x: f64, z: f64| {
            refine_until(
                |n| {
                    let r = GaussRule::new(n);
                    let mut cuts = vec![0.0, x.min(z), x.max(z), 1.0];
                    cuts.dedup();
                    let mut acc = 0.0;
                    for w in cuts.windows(2) {
                        if w[1] > w[0] + 1e-12 {
                            acc += r.integrate(w[0] + 1e-10, w[1] - 1e-10, |s| {
                                (s - x).abs().powf(-eta) * (s - z).abs().powf(-eta)
                            });
                        }
                    }
                    acc
                },
                1024,
                1e-4,
                3,
                "test",
            )
            .unwrap()
        };
        for &(x, z) in &[(0.2, 0.7), (0.0, 0.5), (0.9, 0.95)] {
            assert_relative_eq!(
                chain_integral(x, z, eta, &rule),
                brute(x, z),
                max_relative = 5e-3
            );
        }
    }

    #[test]
    fn fourth_cumulant_is_stable_and_positive() {
        let params = HermiteParams::new(2, 0.7).unwrap();
        let k4 = limit_fourth_cumulant_order2(params).unwrap();
        assert!(k4 > 6.0 && k4 < 9.0, "k4 = {k4}");
    }
}
