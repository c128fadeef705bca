//! One univariate fooling polynomial: vanishes at the given points, stays in
//! [-1, 1] on [0, 1], and integrates to more than 1 - eta.
//!
//! Run with `cargo run --release --example fooling_witness -- 7/10 1/3 2/3`.

use cubature_adversary::fooling::{build_witness, verify_witness};
use cubature_adversary::numeric::{format_rational, parse_rational, to_f64};
use cubature_adversary::oracle::check_witness;

fn main() -> cubature_adversary::Result<()> {
    let mut args = std::env::args().skip(1);
    let eta = parse_rational(&args.next().unwrap_or_else(|| "7/10".into()))?;
    let mut points = args.map(|a| parse_rational(&a)).collect::<Result<Vec<_>, _>>()?;
    if points.is_empty() {
        points.push(parse_rational("1/2")?);
    }

    let w = build_witness(&points, &eta)?;
    println!("n = {}, eta = {}, delta = {}", w.n(), format_rational(&eta), format_rational(&w.delta));
    println!("degree {}, integral ~ {:.12}", w.degree(), to_f64(&w.integral));
    println!("sup |f| in [{:.9}, {:.9}]", to_f64(&w.sup.lo), to_f64(&w.sup.hi));
    println!("all derivatives bounded by 10^{} (tier {})", w.k.log10_string(), w.k.tier);
    if let Some(stage) = &w.stage {
        println!("root of the corrected approximation: {}", format_rational(&stage.root_hat));
    }

    print!("{}", verify_witness(&w));
    for r in check_witness(&w, 10_001, 5, 1) {
        println!("{r}");
    }
    Ok(())
}
