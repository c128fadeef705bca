//! Certified range of a polynomial on an interval via Bernstein subdivision.
//!
//! Run with `cargo run --example range_enclosure`.

use cubature_adversary::numeric::{int, rat, to_f64};
use cubature_adversary::poly::{certify_bounds, range_enclosure, BernsteinForm, DEFAULT_DEPTH_LIMIT};
use cubature_adversary::Poly;

fn main() -> cubature_adversary::Result<()> {
    // Chebyshev T_4 on [-1, 1] oscillates between -1 and 1.
    let t4 = Poly::from_i64(&[1, 0, -8, 0, 8]);
    let hull = BernsteinForm::new(&t4, &int(-1), &int(1)).hull();
    println!("T_4 coarse Bernstein hull: [{:.4}, {:.4}]", to_f64(&hull.lo), to_f64(&hull.hi));

    let (min, max) = range_enclosure(&t4, &int(-1), &int(1), &rat(1, 1 << 20), DEFAULT_DEPTH_LIMIT)?;
    println!("min in [{:.9}, {:.9}]", to_f64(&min.lo), to_f64(&min.hi));
    println!("max in [{:.9}, {:.9}]", to_f64(&max.lo), to_f64(&max.hi));

    match certify_bounds(&t4, &int(-1), &int(1), &rat(-1, 1), &rat(99, 100), DEFAULT_DEPTH_LIMIT) {
        Ok(_) => println!("unexpected: bound 99/100 certified"),
        Err(fail) => println!("bound 99/100 refuted: {fail}"),
    }
    Ok(())
}
