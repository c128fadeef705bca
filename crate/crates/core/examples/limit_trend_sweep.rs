//! Family bounds approach 1 as eta shrinks, for one sample point in any
//! sufficiently large dimension.
//!
//! Run with `cargo run --release --example limit_trend_sweep`.

use cubature_adversary::harness::{run_sweep, sweep_csv, DimSpec, PointKind, SweepSpec};
use cubature_adversary::numeric::rat;

fn main() -> cubature_adversary::Result<()> {
    let grid = vec![rat(9, 10), rat(7, 10), rat(1, 2), rat(3, 10)];
    let mut spec = SweepSpec::new(1, grid, vec![DimSpec::Concrete(1), DimSpec::Concrete(100), DimSpec::Symbolic], PointKind::MidpointProduct);
    spec.record_runtime = true;
    print!("{}", sweep_csv(&run_sweep(&spec)?));
    Ok(())
}
