//! Generated point sets and the CSV point format.
//!
//! Run with `cargo run --example point_sets`.

use cubature_adversary::harness::{emit_points, generate_points, parse_points_csv, Format, PointKind, PointSetSpec};

fn main() -> cubature_adversary::Result<()> {
    for kind in PointKind::ALL {
        let rule = generate_points(&PointSetSpec { kind, n: 4, d: 2, seed: 3 })?;
        println!("{} (hash {}):", kind.as_str(), &rule.points_hash()[..12]);
        print!("{}", emit_points(&rule, Format::Csv));
    }

    let rule = parse_points_csv("# d=2\n0.5, 0.25 | 2/3\n1/3, 1 | 1/3\n")?;
    println!("parsed {} points in d = {}", rule.n(), rule.d);
    print!("{}", emit_points(&rule, Format::Json));
    Ok(())
}
