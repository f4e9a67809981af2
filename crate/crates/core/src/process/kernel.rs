//! Power-kernel evaluation and projection onto partitions.
//!
//! The process of order `q` is the `q`-fold integral of
//! `c * int_0^t prod_i (u - y_i)_+^{-alpha} du` with `alpha = 1/2 + (1-H)/q`.
//! This module computes the constant `c` from the unit-variance condition,
//! evaluates the kernel pointwise, and projects time-increment kernels onto
//! cell partitions as sums of rank-one factor terms, one per quadrature node
//! of the `u` integral (order 1 needs no `u` quadrature at all: the double
//! antiderivative is closed form).

use crate::chaos::{FactorKernel, FactorTerm};
use crate::error::{Error, Result};
use crate::grid::Partition;
use crate::process::params::HermiteParams;
use crate::quadrature::{refine_until, GaussRule};

/// Nodes per `u` cell when projecting increment kernels.  The substitution in
/// [`GaussRule::left_singular_nodes`] soaks up the leading edge behavior, so
/// this converges far below the cell-discretization bias it feeds into.
pub const DEFAULT_NODES_PER_CELL: usize = 24;

/// Unit-separation cross integral `int_0^1 s^{-alpha} (1-s)^{2 alpha - 2} ds`:
/// the `y`-integral of two kernel factors one time unit apart equals this
/// times `|u - v|^{1 - 2 alpha}`.
pub fn kernel_pair_integral(alpha: f64) -> Result<f64> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(Error::InvalidParams(format!(
            "pair integral needs alpha in (1/2, 1), got {alpha}"
        )));
    }
    refine_until(
        |n| {
            let rule = GaussRule::new(n);
            let left =
                rule.integrate_left_singular(0.0, 0.5, alpha, |s| (1.0 - s).powf(2.0 * alpha - 2.0));
            let right =
                rule.integrate_right_singular(0.5, 1.0, 2.0 - 2.0 * alpha, |s| s.powf(-alpha));
            left + right
        },
        24,
        1e-11,
        8,
        "kernel pair integral",
    )
}

/// Time-separation integral `int_0^1 (1 - d) d^{2H - 2} dd`; together with the
/// pair integral it reduces the `2q`-fold variance integral to one dimension.
pub fn time_correlation_integral(hurst: f64) -> Result<f64> {
    if !(hurst > 0.5 && hurst < 1.0) {
        return Err(Error::InvalidParams(format!(
            "time correlation integral needs H in (1/2, 1), got {hurst}"
        )));
    }
    refine_until(
        |n| GaussRule::new(n).integrate_left_singular(0.0, 1.0, 2.0 - 2.0 * hurst, |d| 1.0 - d),
        24,
        1e-11,
        8,
        "time correlation integral",
    )
}

/// Normalizing constant `c(H, q)` making the variance at `t = 1` equal 1.
///
/// Stationarity collapses the `2q`-fold variance integral to
/// `q! * c^2 * J^q * 2T` with the two one-dimensional integrals above, so `c`
/// follows from quadrature alone.  Both integrals are refined to stability,
/// which subsumes the doubling check.
pub fn normalizing_constant(params: HermiteParams) -> Result<f64> {
    params.validate()?;
    let alpha = params.alpha();
    let j = kernel_pair_integral(alpha)?;
    let t = time_correlation_integral(params.hurst)?;
    let q_fact: f64 = (1..=params.q).map(|k| k as f64).product();
    let unnormalized = q_fact * j.powi(params.q as i32) * 2.0 * t;
    if !(unnormalized > 0.0) {
        return Err(Error::Quadrature(format!(
            "un-normalized variance {unnormalized} is not positive"
        )));
    }
    Ok(1.0 / unnormalized.sqrt())
}

/// Pointwise kernel value `c * int_0^t prod_i (u - y_i)_+^{-alpha} du`.
///
/// The integrand is singular where `u` meets the largest `y_i`; coincident
/// arguments stack singularities, and the kernel is infinite once their
/// combined exponent reaches 1 (the kernel is square integrable, not
/// bounded).
pub fn kernel_l(t: f64, y: &[f64], params: HermiteParams) -> Result<f64> {
    params.validate()?;
    if y.len() != params.q {
        return Err(Error::InvalidParams(format!(
            "kernel takes {} arguments, got {}",
            params.q,
            y.len()
        )));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParams("time must be positive".into()));
    }
    let alpha = params.alpha();
    let c = normalizing_constant(params)?;
    let max_y = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max_y >= t {
        return Ok(0.0);
    }
    if max_y < 0.0 {
        let value = refine_until(
            |n| {
                GaussRule::new(n).integrate(0.0, t, |u| {
                    y.iter().map(|&v| (u - v).powf(-alpha)).product()
                })
            },
            16,
            1e-9,
            8,
            "kernel integral",
        )?;
        return Ok(c * value);
    }
    let ties = y.iter().filter(|&&v| v == max_y).count();
    let lambda = ties as f64 * alpha;
    if lambda >= 1.0 {
        return Err(Error::Quadrature(format!(
            "{ties} coincident arguments give a non-integrable edge exponent {lambda}; \
             the kernel is infinite at such points"
        )));
    }
    let lower = max_y.max(0.0);
    let value = refine_until(
        |n| {
            GaussRule::new(n).integrate_left_singular(lower, t, lambda, |u| {
                y.iter()
                    .filter(|&&v| v < max_y)
                    .map(|&v| (u - v).powf(-alpha))
                    .product()
            })
        },
        16,
        1e-9,
        8,
        "kernel integral near the singular edge",
    )?;
    Ok(c * value)
}

/// Cell averages of `y -> (u - y)_+^{-alpha}` over every partition cell.
fn averaged_row(partition: &Partition, u: f64, alpha: f64) -> Vec<f64> {
    let pow = |x: f64| if x > 0.0 { x.powf(1.0 - alpha) } else { 0.0 };
    (0..partition.cells())
        .map(|i| {
            let (a, b) = partition.cell_bounds(i);
            if u <= a {
                0.0
            } else {
                (pow(u - a) - pow(u - b)) / ((1.0 - alpha) * (b - a))
            }
        })
        .collect()
}

/// Projection of the increment kernel with `u` ranging over `(u_from, u_to]`
/// onto the partition, as a sum of rank-one terms.
///
/// Order 1 yields a single exact term from the closed-form double
/// antiderivative.  Higher orders place `nodes_per_cell` quadrature nodes in
/// every stretch of `(u_from, u_to]` between partition breakpoints; the node
/// weights already account for the Holder edge behavior of the averaged rows.
pub fn increment_kernel(
    params: HermiteParams,
    partition: &Partition,
    u_from: f64,
    u_to: f64,
    nodes_per_cell: usize,
) -> Result<FactorKernel> {
    params.validate()?;
    if !(u_from < u_to) {
        return Err(Error::InvalidParams(format!(
            "empty integration range ({u_from}, {u_to}]"
        )));
    }
    let right = partition.right();
    if u_to > right + 1e-12 * right.abs().max(1.0) {
        return Err(Error::GridMismatch(format!(
            "integration range reaches {u_to} but the partition ends at {right}"
        )));
    }
    let alpha = params.alpha();
    let c = normalizing_constant(params)?;

    if params.q == 1 {
        // Double antiderivative of x_+^{-alpha}: exact cell averages.
        let pow2 = |x: f64| {
            if x > 0.0 {
                x.powf(2.0 - alpha) / ((1.0 - alpha) * (2.0 - alpha))
            } else {
                0.0
            }
        };
        let row: Vec<f64> = (0..partition.cells())
            .map(|i| {
                let (a, b) = partition.cell_bounds(i);
                (pow2(u_to - a) - pow2(u_to - b) - pow2(u_from - a) + pow2(u_from - b)) / (b - a)
            })
            .collect();
        return FactorKernel::new(partition.clone(), 1, vec![FactorTerm { weight: c, row }]);
    }

    if nodes_per_cell == 0 {
        return Err(Error::InvalidParams("nodes_per_cell must be positive".into()));
    }
    let mut edges = vec![u_from];
    for &b in partition.breaks() {
        if b > u_from && b < u_to {
            edges.push(b);
        }
    }
    edges.push(u_to);

    let rule = GaussRule::new(nodes_per_cell);
    let mut terms = Vec::new();
    for pair in edges.windows(2) {
        for (u, quad_w) in rule.left_singular_nodes(pair[0], pair[1], alpha) {
            terms.push(FactorTerm {
                weight: c * quad_w,
                row: averaged_row(partition, u, alpha),
            });
        }
    }
    FactorKernel::new(partition.clone(), params.q, terms)
}

/// Partition of `(1 - k_width, 1]` for the rescaled single-increment law:
/// uniform cells of width `1/subdivisions` on `(-near_window, 1]`, then
/// geometrically growing cells out to the left truncation point.
pub fn rescaled_domain(
    k_width: f64,
    subdivisions: usize,
    near_window: f64,
    grading_ratio: f64,
) -> Result<Partition> {
    if !(k_width >= 1.0) {
        return Err(Error::InvalidParams(format!(
            "domain width must be at least 1, got {k_width}"
        )));
    }
    if subdivisions == 0 {
        return Err(Error::InvalidParams("subdivisions must be positive".into()));
    }
    let h = 1.0 / subdivisions as f64;
    let far_left = 1.0 - k_width;
    if k_width - 1.0 <= near_window {
        return Partition::uniform(far_left, 1.0, h);
    }
    Partition::graded(far_left, -near_window, 1.0, h, grading_ratio)
}

/// Kernel of the rescaled single-increment law on `(1 - k_width, 1]`: the
/// `u` integral runs over `(0, 1]`.
pub fn rescaled_increment_kernel(
    params: HermiteParams,
    partition: &Partition,
    nodes_per_cell: usize,
) -> Result<FactorKernel> {
    increment_kernel(params, partition, 0.0, 1.0, nodes_per_cell)
}
