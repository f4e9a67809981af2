/// Hermite polynomial with the `1/q!` normalization,
///
/// ```text
/// H_q(x) = (-1)^q / q! · e^{x²/2} · dⁿ/dxⁿ e^{-x²/2},   n = q,
/// ```
///
/// so `H₀ = 1`, `H₁(x) = x`, `H₂(x) = (x² - 1)/2`, `H₃(x) = (x³ - 3x)/6`.
/// Note `H₂(0) = -1/2`, not `-1`: these differ from the probabilists'
/// polynomials `He_q` by the factor `q!`.
pub fn hermite_poly(q: usize, x: f64) -> f64 {
    match q {
        0 => 1.0,
        1 => x,
        _ => {
            // (k+1)·H_{k+1} = x·H_k − H_{k−1}, from He_{k+1} = x·He_k − k·He_{k−1}.
            let mut prev = 1.0;
            let mut cur = x;
            for k in 1..q {
                let next = (x * cur - prev) / (k as f64 + 1.0);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}
