use crate::chaos::kernel::{decode, has_repeat, StepKernel};
use crate::chaos::noise::NoiseRealization;
use crate::chaos::MAX_ORDER;
use crate::error::{Error, Result};

/// Work cap for one dense evaluation, in kernel lookups.
const EVAL_BUDGET: u128 = 100_000_000;

/// Realizes the multiple integral `I_q(f)` of a step kernel against one noise
/// realization as the off-diagonal sum over pairwise distinct cell tuples.
///
/// Order 0 returns the kernel's scalar unchanged.  The kernel and noise must
/// live on the identical grid.
pub fn multiple_integral(kernel: &StepKernel, noise: &NoiseRealization) -> Result<f64> {
    if kernel.grid() != noise.grid() {
        return Err(Error::GridMismatch(
            "kernel and noise are discretized on different grids".into(),
        ));
    }
    let q = kernel.order();
    if q > MAX_ORDER {
        return Err(Error::OrderTooHigh { order: q, cap: MAX_ORDER });
    }
    if q == 0 {
        return Ok(kernel.values()[0]);
    }
    let n = kernel.grid().cells();
    let work = (n as u128).pow(q as u32);
    if work > EVAL_BUDGET {
        return Err(Error::EnumerationBudget { required: work, budget: EVAL_BUDGET });
    }
    let xi = noise.increments();
    let mut tuple = vec![0usize; q];
    let mut acc = 0.0;
    for (flat, value) in kernel.values().iter().enumerate() {
        decode(flat, n, &mut tuple);
        if has_repeat(&tuple) {
            continue;
        }
        let mut prod = *value;
        for &i in &tuple {
            prod *= xi[i];
        }
        acc += prod;
    }
    Ok(acc)
}
