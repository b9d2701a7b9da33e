use crate::error::{Error, Result};
use crate::grid_function::GridFunction;

/// `W₁(f₊, f₋)` in one dimension as `∫ |F|` with `F(x) = ∫₀ˣ f`.
///
/// With all mass at cell centres, `F` is constant between consecutive
/// centres, so the sum below is the exact `W₁` of the two atomic measures.
pub fn w1_1d_oracle(f: &GridFunction) -> Result<f64> {
    if f.dim() != 1 {
        return Err(Error::WrongDimension {
            expected: 1,
            got: f.dim(),
        });
    }
    f.require_zero_mean()?;
    let h = f.h();
    let mut running = 0.0;
    let mut comp = 0.0;
    let mut total = 0.0;
    let values = f.values();
    for v in &values[..values.len() - 1] {
        // Neumaier-compensated running integral.
        let x = v * h;
        let t = running + x;
        if running.abs() >= x.abs() {
            comp += (running - t) + x;
        } else {
            comp += (x - t) + running;
        }
        running = t;
        total += (running + comp).abs() * h;
    }
    Ok(total)
}
