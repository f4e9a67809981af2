use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::chaos::MAX_ORDER;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Kernel that is constant on products of grid cells: a dense table of
/// `cells^order` values.  Order 0 is a plain scalar.
///
/// Values are stored row-major over cell tuples, first coordinate most
/// significant: the entry for `(i₁, …, i_q)` sits at
/// `((i₁·n + i₂)·n + …)·n + i_q` with `n = cells`.  The CSV import/export
/// uses exactly this order.
#[derive(Debug, Clone)]
pub struct StepKernel {
    grid: Grid,
    order: usize,
    values: Vec<f64>,
    symmetric: bool,
}

/// Caps dense tables at 2^26 entries; the dense representation is meant for
/// oracle-scale grids, not production sampling.
const MAX_DENSE_LEN: usize = 1 << 26;

impl StepKernel {
    pub fn new(grid: Grid, order: usize, values: Vec<f64>) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::OrderTooHigh { order, cap: MAX_ORDER });
        }
        let expect = dense_len(grid.cells(), order)?;
        if values.len() != expect {
            return Err(Error::InvalidKernel(format!(
                "order-{order} kernel on {} cells needs {expect} values, got {}",
                grid.cells(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidKernel("kernel entries must be finite".into()));
        }
        Ok(Self { grid, order, values, symmetric: order < 2 })
    }

    /// Order-0 kernel: a deterministic scalar.
    pub fn scalar(grid: Grid, value: f64) -> Result<Self> {
        Self::new(grid, 0, vec![value])
    }

    pub fn from_fn<F: FnMut(&[usize]) -> f64>(
        grid: Grid,
        order: usize,
        mut f: F,
    ) -> Result<Self> {
        let len = dense_len(grid.cells(), order)?;
        let mut values = Vec::with_capacity(len);
        let mut tuple = vec![0usize; order];
        for flat in 0..len {
            decode(flat, grid.cells(), &mut tuple);
            values.push(f(&tuple));
        }
        Self::new(grid, order, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Whether the table is known to be invariant under argument permutation.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn value(&self, tuple: &[usize]) -> f64 {
        debug_assert_eq!(tuple.len(), self.order);
        self.values[encode(tuple, self.grid.cells())]
    }

    /// Symmetrization `f̃ = (1/q!) Σ_σ f∘σ`.
    pub fn symmetrize(&self) -> StepKernel {
        if self.symmetric {
            return self.clone();
        }
        let n = self.grid.cells();
        let perms = permutations(self.order);
        let inv = 1.0 / perms.len() as f64;
        let mut out = vec![0.0; self.values.len()];
        let mut tuple = vec![0usize; self.order];
        let mut permuted = vec![0usize; self.order];
        for (flat, slot) in out.iter_mut().enumerate() {
            decode(flat, n, &mut tuple);
            let mut acc = 0.0;
            for perm in &perms {
                for (dst, &src) in permuted.iter_mut().zip(perm) {
                    *dst = tuple[src];
                }
                acc += self.values[encode(&permuted, n)];
            }
            *slot = acc * inv;
        }
        StepKernel {
            grid: self.grid.clone(),
            order: self.order,
            values: out,
            symmetric: true,
        }
    }

    /// Contraction `(f ⊗_r g)` over the last `r` arguments of each kernel,
    /// weighted by `h^r` per the discrete inner product:
    ///
    /// ```text
    /// (f ⊗_r g)(s, t) = h^r Σ_{u ∈ cells^r} f(s, u) g(t, u)
    /// ```
    ///
    /// The result has order `p + q − 2r` and is generally not symmetric.
    pub fn contract(&self, other: &StepKernel, r: usize) -> Result<StepKernel> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(
                "contraction requires kernels on the same grid".into(),
            ));
        }
        let (p, q) = (self.order, other.order);
        if r > p.min(q) {
            return Err(Error::ContractionOrder { r, p, q });
        }
        let n = self.grid.cells();
        let out_order = p + q - 2 * r;
        let hr = self.grid.h().powi(r as i32);
        let inner = dense_len(n, r)?;
        let mut u = vec![0usize; r];
        let mut f_tuple = vec![0usize; p];
        let mut g_tuple = vec![0usize; q];
        let kernel = StepKernel::from_fn(self.grid.clone(), out_order, |st| {
            f_tuple[..p - r].copy_from_slice(&st[..p - r]);
            g_tuple[..q - r].copy_from_slice(&st[p - r..]);
            let mut acc = 0.0;
            for flat in 0..inner {
                decode(flat, n, &mut u);
                f_tuple[p - r..].copy_from_slice(&u);
                g_tuple[q - r..].copy_from_slice(&u);
                acc += self.values[encode(&f_tuple, n)] * other.values[encode(&g_tuple, n)];
            }
            acc * hr
        })?;
        Ok(kernel)
    }

    /// Discrete inner product `h^q Σ f·g` over all cell tuples.
    pub fn inner_product_full(&self, other: &StepKernel) -> Result<f64> {
        self.check_compatible(other)?;
        let hq = self.grid.h().powi(self.order as i32);
        Ok(hq
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>())
    }

    /// Discrete inner product restricted to off-diagonal tuples.  This is the
    /// pairing induced by the diagonal-free chaos construction: values on
    /// repeated-index tuples carry no noise mass and do not contribute.
    pub fn inner_product_off_diagonal(&self, other: &StepKernel) -> Result<f64> {
        self.check_compatible(other)?;
        let n = self.grid.cells();
        let hq = self.grid.h().powi(self.order as i32);
        let mut tuple = vec![0usize; self.order];
        let mut acc = 0.0;
        for (flat, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            decode(flat, n, &mut tuple);
            if has_repeat(&tuple) {
                continue;
            }
            acc += a * b;
        }
        Ok(acc * hq)
    }

    fn check_compatible(&self, other: &StepKernel) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("kernels live on different grids".into()));
        }
        if self.order != other.order {
            return Err(Error::InvalidKernel(format!(
                "order mismatch: {} vs {}",
                self.order, other.order
            )));
        }
        Ok(())
    }

    /// Writes the value table as CSV: a `value` header followed by one entry
    /// per line in row-major tuple order.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut out = std::fs::File::create(path)?;
        writeln!(out, "value")?;
        for v in &self.values {
            writeln!(out, "{v}")?;
        }
        Ok(())
    }

    /// Reads a value table written by [`write_csv`](Self::write_csv).  The
    /// grid and order are not stored in the CSV and must be supplied.
    pub fn read_csv<P: AsRef<Path>>(path: P, grid: Grid, order: usize) -> Result<Self> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut lines = reader.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "value" => {}
            _ => return Err(Error::Format("expected a 'value' header line".into())),
        }
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let v: f64 = t
                .parse()
                .map_err(|e| Error::Format(format!("line {}: {e}", i + 2)))?;
            values.push(v);
        }
        Self::new(grid, order, values)
    }
}

pub(crate) fn dense_len(cells: usize, order: usize) -> Result<usize> {
    let len = cells
        .checked_pow(order as u32)
        .filter(|&l| l <= MAX_DENSE_LEN)
        .ok_or_else(|| Error::InvalidKernel(format!(
            "dense table with {cells}^{order} entries exceeds the {MAX_DENSE_LEN} cap"
        )))?;
    Ok(len.max(1))
}

pub(crate) fn encode(tuple: &[usize], cells: usize) -> usize {
    tuple.iter().fold(0, |acc, &i| acc * cells + i)
}

pub(crate) fn decode(mut flat: usize, cells: usize, tuple: &mut [usize]) {
    for slot in tuple.iter_mut().rev() {
        *slot = flat % cells;
        flat /= cells;
    }
}

pub(crate) fn has_repeat(tuple: &[usize]) -> bool {
    for (i, a) in tuple.iter().enumerate() {
        if tuple[i + 1..].contains(a) {
            return true;
        }
    }
    false
}

/// All permutations of `0..k` (Heap's algorithm); `k ≤ 4` in practice.
pub(crate) fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut base: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    heap_permute(&mut base, k, &mut out);
    out
}

fn heap_permute(arr: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(arr.clone());
        return;
    }
    for i in 0..k {
        heap_permute(arr, k - 1, out);
        if k % 2 == 0 {
            arr.swap(i, k - 1);
        } else {
            arr.swap(0, k - 1);
        }
    }
}
