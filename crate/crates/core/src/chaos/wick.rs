use crate::chaos::kernel::{decode, has_repeat, permutations, StepKernel};
use crate::chaos::{MAX_ORDER, WICK_BUDGET};
use crate::error::{Error, Result};

/// Exact expectation `E[I_p(f) I_q(g)]` by enumerating the Gaussian pair
/// partitions of the off-diagonal sums.
///
/// Within one off-diagonal tuple all cells differ, so a pairing can never
/// match two slots of the same integral (`E ξ_a ξ_b = 0` for `a ≠ b`), and
/// every surviving pairing matches the slots of `f` bijectively onto
/// equal-valued slots of `g`.  For `p = q` those pairings are exactly the
/// permutations `σ` of the tuple, each contributing `h^q`:
///
/// ```text
/// E[I_q(f) I_q(g)] = h^q Σ_{i₁ ≠ … ≠ i_q} f(i) Σ_σ g(i∘σ)
/// ```
///
/// For `p ≠ q` no pairing survives and the expectation vanishes identically;
/// both order-0 kernels multiply as plain constants.
///
/// Enumeration costs `cells^q · q!` kernel lookups and is refused beyond the
/// [`WICK_BUDGET`]; estimate large cases by averaging `multiple_integral`
/// products instead.
pub fn wick_expectation(f: &StepKernel, g: &StepKernel) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch(
            "expectation requires kernels on the same grid".into(),
        ));
    }
    let (p, q) = (f.order(), g.order());
    if p.max(q) > MAX_ORDER {
        return Err(Error::OrderTooHigh { order: p.max(q), cap: MAX_ORDER });
    }
    match (p, q) {
        (0, 0) => return Ok(f.values()[0] * g.values()[0]),
        (0, _) | (_, 0) => return Ok(0.0),
        _ if p != q => return Ok(0.0),
        _ => {}
    }
    let n = f.grid().cells();
    let work = (n as u128).pow(q as u32) * factorial(q) as u128;
    if work > WICK_BUDGET {
        return Err(Error::EnumerationBudget { required: work, budget: WICK_BUDGET });
    }
    let hq = f.grid().h().powi(q as i32);
    let perms = permutations(q);
    let mut tuple = vec![0usize; q];
    let mut permuted = vec![0usize; q];
    let mut acc = 0.0;
    for (flat, fv) in f.values().iter().enumerate() {
        decode(flat, n, &mut tuple);
        if has_repeat(&tuple) {
            continue;
        }
        let mut gsum = 0.0;
        for perm in &perms {
            for (dst, &src) in permuted.iter_mut().zip(perm) {
                *dst = tuple[src];
            }
            gsum += g.value(&permuted);
        }
        acc += fv * gsum;
    }
    Ok(acc * hq)
}

pub(crate) fn factorial(k: usize) -> u64 {
    (1..=k as u64).product::<u64>().max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::{multiple_integral, NoiseRealization};
    use crate::grid::Grid;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(cells: usize) -> Grid {
        Grid::new(0.0, 1.0, cells).unwrap()
    }

    #[test]
    fn order_one_indicator_has_unit_norm() {
        // f = g ≡ 1 on 4 cells: E = Σ_i h = 1.
        let g4 = grid(4);
        let f = StepKernel::from_fn(g4, 1, |_| 1.0).unwrap();
        assert_relative_eq!(wick_expectation(&f, &f).unwrap(), 1.0);
    }

    #[test]
    fn hand_enumerated_two_cell_case() {
        // Two cells, h = 1/2, f(i,j) = i, g(i,j) = j.  Off-diagonal tuples are
        // (0,1) and (1,0); the two pairings contribute
        // f(1,0)·(g(1,0) + g(0,1))·h² = 1·1·1/4.
        let g2 = grid(2);
        let f = StepKernel::from_fn(g2.clone(), 2, |t| t[0] as f64).unwrap();
        let g = StepKernel::from_fn(g2, 2, |t| t[1] as f64).unwrap();
        assert_relative_eq!(wick_expectation(&f, &g).unwrap(), 0.25);
    }

    #[test]
    fn matches_symmetrized_inner_product_route() {
        // Independent algebraic route: q!·⟨f̃, g̃⟩ over off-diagonal tuples.
        let g5 = grid(5);
        let mut c = 0.0f64;
        let f = StepKernel::from_fn(g5.clone(), 3, |_| {
            c += 1.0;
            (c * 0.37).sin()
        })
        .unwrap();
        let mut d = 0.0f64;
        let g = StepKernel::from_fn(g5, 3, |_| {
            d += 1.0;
            (d * 0.11).cos()
        })
        .unwrap();
        let direct = wick_expectation(&f, &g).unwrap();
        let via_sym = 6.0
            * f.symmetrize()
                .inner_product_off_diagonal(&g.symmetrize())
                .unwrap();
        assert_relative_eq!(direct, via_sym, max_relative = 1e-12);
    }

    #[test]
    fn mixed_orders_vanish_exactly() {
        let g4 = grid(4);
        let f = StepKernel::from_fn(g4.clone(), 1, |t| 1.0 + t[0] as f64).unwrap();
        let g = StepKernel::from_fn(g4.clone(), 3, |t| (t[0] + t[1] + t[2]) as f64).unwrap();
        assert_eq!(wick_expectation(&f, &g).unwrap(), 0.0);
        let c = StepKernel::scalar(g4, 3.0).unwrap();
        assert_eq!(wick_expectation(&c, &f).unwrap(), 0.0);
        assert_relative_eq!(wick_expectation(&c, &c).unwrap(), 9.0);
    }

    #[test]
    fn agrees_with_monte_carlo_average() {
        let g4 = grid(4);
        let f = StepKernel::from_fn(g4.clone(), 2, |t| (t[0] as f64 - 1.5) * 0.8).unwrap();
        let g = StepKernel::from_fn(g4.clone(), 2, |t| t[1] as f64 * 0.3 + 0.1).unwrap();
        let exact = wick_expectation(&f, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let m = 200_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..m {
            let noise = NoiseRealization::generate(&g4, &mut rng);
            let prod = multiple_integral(&f, &noise).unwrap()
                * multiple_integral(&g, &noise).unwrap();
            sum += prod;
            sum2 += prod * prod;
        }
        let mean = sum / m as f64;
        let se = ((sum2 / m as f64 - mean * mean) / m as f64).sqrt();
        assert!(
            (mean - exact).abs() < 4.0 * se,
            "MC mean {mean} vs exact {exact} (se {se})"
        );
    }

    #[test]
    fn budget_is_enforced() {
        let big = grid(64);
        let f = StepKernel::from_fn(big, 3, |_| 1.0).unwrap();
        match wick_expectation(&f, &f) {
            Err(Error::EnumerationBudget { .. }) => {}
            other => panic!("expected budget error, got {other:?}"),
        }
    }
}
