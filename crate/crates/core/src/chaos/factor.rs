//! Separable step kernels and the fast evaluation paths they unlock.
//!
//! A kernel of the form `f = Σ_k w_k · a_k ⊗ … ⊗ a_k` (each term a rank-one
//! power of a single row over the cells of a partition) admits closed forms
//! that the dense representation cannot afford:
//!
//! * the off-diagonal sum over distinct cell tuples collapses to an
//!   elementary symmetric polynomial of the pointwise products `a_k(i)·ξ_i`,
//!   evaluated from power sums in `O(cells · order)`;
//! * second and cross moments reduce to the same polynomial applied to
//!   deterministic product rows, so they are exact rather than sampled;
//! * for order 2 the variable is a quadratic form in standard normals and its
//!   full law is carried by the spectrum of one symmetric matrix.
//!
//! All samplers in this crate produce their kernels in this shape.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::chaos::kernel::StepKernel;
use crate::chaos::wick::factorial;
use crate::chaos::MAX_ORDER;
use crate::error::{Error, Result};
use crate::grid::{Grid, Partition};

/// Largest matrix the order-2 spectral route will factorize.
pub const MAX_SPECTRUM_CELLS: usize = 4096;

/// One rank-one component `weight · row ⊗ … ⊗ row`.
#[derive(Debug, Clone)]
pub struct FactorTerm {
    pub weight: f64,
    pub row: Vec<f64>,
}

/// Sum of rank-one powers of rows over a common partition.
#[derive(Debug, Clone)]
pub struct FactorKernel {
    partition: Partition,
    order: usize,
    terms: Vec<FactorTerm>,
}

/// Independent centred Gaussian increments with `Var ξ_i = width(i)`.
#[derive(Debug, Clone)]
pub struct PartitionNoise {
    partition: Partition,
    increments: Vec<f64>,
}

impl PartitionNoise {
    pub fn generate<R: Rng + ?Sized>(partition: &Partition, rng: &mut R) -> Self {
        let increments = (0..partition.cells())
            .map(|i| {
                let z: f64 = StandardNormal.sample(rng);
                z * partition.width(i).sqrt()
            })
            .collect();
        Self {
            partition: partition.clone(),
            increments,
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }
}

impl FactorKernel {
    pub fn new(partition: Partition, order: usize, terms: Vec<FactorTerm>) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::OrderTooHigh {
                order,
                cap: MAX_ORDER,
            });
        }
        let cells = partition.cells();
        for term in &terms {
            if term.row.len() != cells {
                return Err(Error::InvalidKernel(format!(
                    "factor row has {} entries for a partition of {} cells",
                    term.row.len(),
                    cells
                )));
            }
            if !term.weight.is_finite() || term.row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidKernel(
                    "factor terms must be finite".into(),
                ));
            }
        }
        Ok(Self {
            partition,
            order,
            terms,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &[FactorTerm] {
        &self.terms
    }

    /// Off-diagonal multiple integral of the kernel against one noise path,
    /// via `Σ_{i_1 ≠ … ≠ i_q} Π_j a(i_j) ξ_{i_j} = q! · e_q(a ∘ ξ)`.
    pub fn integral(&self, noise: &PartitionNoise) -> Result<f64> {
        if noise.partition != self.partition {
            return Err(Error::GridMismatch(
                "noise partition differs from kernel partition".into(),
            ));
        }
        let q = self.order;
        let fact = factorial(q) as f64;
        let mut total = 0.0;
        let mut scaled = vec![0.0; self.partition.cells()];
        for term in &self.terms {
            for (s, (a, xi)) in scaled
                .iter_mut()
                .zip(term.row.iter().zip(noise.increments.iter()))
            {
                *s = a * xi;
            }
            total += term.weight * fact * elementary_symmetric(&scaled, q);
        }
        Ok(total)
    }

    /// Exact `E[I_q(self) · I_q(other)]`.  Orders may differ, in which case
    /// the expectation vanishes identically.
    pub fn cross_moment(&self, other: &FactorKernel) -> Result<f64> {
        if other.partition != self.partition {
            return Err(Error::GridMismatch(
                "cross moment needs a common partition".into(),
            ));
        }
        if other.order != self.order {
            return Ok(0.0);
        }
        let q = self.order;
        let fact = factorial(q) as f64;
        let widths: Vec<f64> = (0..self.partition.cells())
            .map(|i| self.partition.width(i))
            .collect();
        let mut total = 0.0;
        let mut v = vec![0.0; widths.len()];
        for tk in &self.terms {
            for tl in &other.terms {
                for i in 0..widths.len() {
                    v[i] = tk.row[i] * tl.row[i] * widths[i];
                }
                total += tk.weight * tl.weight * elementary_symmetric(&v, q);
            }
        }
        Ok(fact * fact * total)
    }

    /// Exact variance `E[I_q(self)²]`.
    pub fn second_moment(&self) -> f64 {
        self.cross_moment(self).expect("same partition")
    }

    /// Copy with every row zeroed outside `range`.  The result is supported
    /// on tuples drawn entirely from `range`, so its cross moment with the
    /// complementary difference kernel vanishes.
    pub fn masked(&self, range: std::ops::Range<usize>) -> FactorKernel {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let row = t
                    .row
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| if range.contains(&i) { v } else { 0.0 })
                    .collect();
                FactorTerm {
                    weight: t.weight,
                    row,
                }
            })
            .collect();
        FactorKernel {
            partition: self.partition.clone(),
            order: self.order,
            terms,
        }
    }

    /// Kernel representing `self − other`, staying in separable form by
    /// concatenating terms with flipped signs.
    pub fn difference(&self, other: &FactorKernel) -> Result<FactorKernel> {
        if other.partition != self.partition || other.order != self.order {
            return Err(Error::GridMismatch(
                "difference needs matching partition and order".into(),
            ));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|t| FactorTerm {
            weight: -t.weight,
            row: t.row.clone(),
        }));
        FactorKernel::new(self.partition.clone(), self.order, terms)
    }

    /// Pointwise row of the order-1 kernel, `f(i) = Σ_k w_k a_k(i)`.
    fn combined_row(&self) -> Vec<f64> {
        let mut row = vec![0.0; self.partition.cells()];
        for term in &self.terms {
            for (r, a) in row.iter_mut().zip(term.row.iter()) {
                *r += term.weight * a;
            }
        }
        row
    }

    /// Standard deviation of the order-1 integral, which is exactly Gaussian.
    pub fn gaussian_sd(&self) -> Result<f64> {
        if self.order != 1 {
            return Err(Error::Mode(format!(
                "gaussian_sd applies to order 1, kernel has order {}",
                self.order
            )));
        }
        let row = self.combined_row();
        let var: f64 = row
            .iter()
            .enumerate()
            .map(|(i, &v)| v * v * self.partition.width(i))
            .sum();
        Ok(var.sqrt())
    }

    /// Spectral representation of the order-2 integral.  With `ξ_i = √w_i z_i`
    /// the variable is `z' M z` for the symmetric matrix
    /// `M_ij = f(i,j) √(w_i w_j)` with zero diagonal; its eigenvalues sum to
    /// zero, so the law is exactly `Σ_k λ_k (z_k² − 1)`.
    pub fn spectrum(&self) -> Result<SecondChaosSpectrum> {
        self.spectrum_impl(false)
    }

    fn spectrum_impl(&self, keep_diagonal: bool) -> Result<SecondChaosSpectrum> {
        if self.order != 2 {
            return Err(Error::Mode(format!(
                "spectrum applies to order 2, kernel has order {}",
                self.order
            )));
        }
        let n = self.partition.cells();
        if n > MAX_SPECTRUM_CELLS {
            return Err(Error::Spectrum(format!(
                "{n} cells exceed the {MAX_SPECTRUM_CELLS}-cell factorization cap"
            )));
        }
        let sqrt_w: Vec<f64> = (0..n).map(|i| self.partition.width(i).sqrt()).collect();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for term in &self.terms {
            for i in 0..n {
                let ai = term.weight * term.row[i] * sqrt_w[i];
                if ai == 0.0 {
                    continue;
                }
                for j in 0..n {
                    m[(i, j)] += ai * term.row[j] * sqrt_w[j];
                }
            }
        }
        if !keep_diagonal {
            for i in 0..n {
                m[(i, i)] = 0.0;
            }
        }
        let eigen = SymmetricEigen::new(m);
        let eigenvalues: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
        Ok(SecondChaosSpectrum { eigenvalues })
    }

    /// Pathwise value of the centered full quadratic form
    /// `Σ_{i,j} f(i,j) ξ_i ξ_j − E[…] = Σ_k w_k ((a_k·ξ)² − ⟨a_k,a_k⟩)`,
    /// order 2 only.  Unlike [`Self::integral`] this keeps the diagonal cells
    /// (with their compensator), which converges much faster to the
    /// continuous law when the kernel blows up along the diagonal.
    pub fn centered_square_integral(&self, noise: &PartitionNoise) -> Result<f64> {
        if self.order != 2 {
            return Err(Error::Mode(format!(
                "centered square form applies to order 2, kernel has order {}",
                self.order
            )));
        }
        if noise.partition != self.partition {
            return Err(Error::GridMismatch(
                "noise partition differs from kernel partition".into(),
            ));
        }
        let widths: Vec<f64> = (0..self.partition.cells())
            .map(|i| self.partition.width(i))
            .collect();
        let mut total = 0.0;
        for term in &self.terms {
            let mut dot = 0.0;
            let mut norm2 = 0.0;
            for ((a, xi), w) in term.row.iter().zip(noise.increments.iter()).zip(&widths) {
                dot += a * xi;
                norm2 += a * a * w;
            }
            total += term.weight * (dot * dot - norm2);
        }
        Ok(total)
    }

    /// Exact covariance of two centered full quadratic forms, `2·tr(A·B)`
    /// with `A_ij = f(i,j)·√(w_i w_j)` (diagonal included).
    pub fn corrected_cross_moment(&self, other: &FactorKernel) -> Result<f64> {
        if other.partition != self.partition {
            return Err(Error::GridMismatch(
                "cross moment needs a common partition".into(),
            ));
        }
        if self.order != 2 || other.order != 2 {
            return Err(Error::Mode(
                "corrected moments apply to order-2 kernels".into(),
            ));
        }
        let g = gram(self, other);
        let mut tr = 0.0;
        for (k, tk) in self.terms.iter().enumerate() {
            for (l, tl) in other.terms.iter().enumerate() {
                tr += tk.weight * tl.weight * g[(k, l)] * g[(k, l)];
            }
        }
        Ok(2.0 * tr)
    }

    /// Exact variance of the centered full quadratic form.
    pub fn corrected_second_moment(&self) -> Result<f64> {
        self.corrected_cross_moment(self)
    }

    /// Spectral representation of the centered full quadratic form: the law
    /// is `Σ_k λ_k (z_k² − 1)` for the eigenvalues of the width-weighted
    /// matrix with its diagonal kept.
    pub fn spectrum_corrected(&self) -> Result<SecondChaosSpectrum> {
        self.spectrum_impl(true)
    }

    /// Dense step-kernel representation on a uniform partition.  Intended for
    /// small validation cases; the tuple table has `cells^order` entries.
    pub fn to_dense(&self) -> Result<StepKernel> {
        let n = self.partition.cells();
        let h = self.partition.width(0);
        for i in 1..n {
            if (self.partition.width(i) - h).abs() > 1e-9 * h {
                return Err(Error::GridMismatch(
                    "dense representation needs a uniform partition".into(),
                ));
            }
        }
        let grid = Grid::new(self.partition.left(), self.partition.right(), n)?;
        let terms = self.terms.clone();
        let q = self.order;
        StepKernel::from_fn(grid, q, move |tuple| {
            terms
                .iter()
                .map(|t| t.weight * tuple.iter().map(|&i| t.row[i]).product::<f64>())
                .sum()
        })
    }
}

/// Joint fourth cumulant of four centered full quadratic forms sharing a
/// partition, `16 (tr(ABCD) + tr(ABDC) + tr(ACBD))` where each matrix is the
/// width-weighted kernel with its diagonal kept.  Every trace reduces to
/// products of small term-by-term Gram matrices, so the cost is independent
/// of the cell count beyond the Gram assembly itself.
pub fn quartic_cumulant(
    a: &FactorKernel,
    b: &FactorKernel,
    c: &FactorKernel,
    d: &FactorKernel,
) -> Result<f64> {
    for k in [b, c, d] {
        if k.partition != a.partition {
            return Err(Error::GridMismatch(
                "quartic cumulant needs a common partition".into(),
            ));
        }
    }
    for k in [a, b, c, d] {
        if k.order != 2 {
            return Err(Error::Mode(
                "quartic cumulant applies to order-2 kernels".into(),
            ));
        }
    }
    let t1 = quartic_trace(a, b, c, d);
    let t2 = quartic_trace(a, b, d, c);
    let t3 = quartic_trace(a, c, b, d);
    Ok(16.0 * (t1 + t2 + t3))
}

/// `tr(ABCD)` through the factorization `A = V_A W_A V_Aᵀ`: the trace equals
/// `tr(H_AB H_BC H_CD H_DA)` with `H_XY = W_X (V_Xᵀ V_Y)`.
fn quartic_trace(
    a: &FactorKernel,
    b: &FactorKernel,
    c: &FactorKernel,
    d: &FactorKernel,
) -> f64 {
    let h = |x: &FactorKernel, y: &FactorKernel| {
        let mut g = gram(x, y);
        for (k, term) in x.terms.iter().enumerate() {
            for l in 0..y.terms.len() {
                g[(k, l)] *= term.weight;
            }
        }
        g
    };
    (h(a, b) * h(b, c) * h(c, d) * h(d, a)).trace()
}

/// Width-weighted Gram matrix of the factor rows, `G_kl = Σ_i a_k(i) b_l(i) w_i`.
fn gram(a: &FactorKernel, b: &FactorKernel) -> DMatrix<f64> {
    let n = a.partition.cells();
    let widths: Vec<f64> = (0..n).map(|i| a.partition.width(i)).collect();
    DMatrix::from_fn(a.terms.len(), b.terms.len(), |k, l| {
        a.terms[k]
            .row
            .iter()
            .zip(&b.terms[l].row)
            .zip(&widths)
            .map(|((x, y), w)| x * y * w)
            .sum()
    })
}

/// Eigenvalues carrying the exact law `Σ_k λ_k (z_k² − 1)` of an order-2
/// integral.  Cumulants of `z² − 1` are `2, 8, 48` at orders 2, 3, 4, and
/// cumulants add across the independent summands.
#[derive(Debug, Clone)]
pub struct SecondChaosSpectrum {
    eigenvalues: Vec<f64>,
}

impl SecondChaosSpectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.eigenvalues
            .iter()
            .map(|&l| {
                let z: f64 = StandardNormal.sample(rng);
                l * (z * z - 1.0)
            })
            .sum()
    }

    pub fn second_moment(&self) -> f64 {
        2.0 * self.eigenvalues.iter().map(|l| l * l).sum::<f64>()
    }

    pub fn third_cumulant(&self) -> f64 {
        8.0 * self.eigenvalues.iter().map(|l| l * l * l).sum::<f64>()
    }

    pub fn fourth_cumulant(&self) -> f64 {
        48.0 * self.eigenvalues.iter().map(|l| l.powi(4)).sum::<f64>()
    }

    pub fn fourth_moment(&self) -> f64 {
        let m2 = self.second_moment();
        3.0 * m2 * m2 + self.fourth_cumulant()
    }
}

/// Elementary symmetric polynomial `e_m(x)` via Newton's identities on power
/// sums, `m · e_m = Σ_{j=1}^{m} (−1)^{j−1} e_{m−j} p_j`.
fn elementary_symmetric(x: &[f64], m: usize) -> f64 {
    let mut p = vec![0.0; m + 1];
    for &v in x {
        let mut pw = v;
        for pj in p.iter_mut().skip(1) {
            *pj += pw;
            pw *= v;
        }
    }
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    for k in 1..=m {
        let mut acc = 0.0;
        let mut sign = 1.0;
        for j in 1..=k {
            acc += sign * e[k - j] * p[j];
            sign = -sign;
        }
        e[k] = acc / k as f64;
    }
    e[m]
}
