//! Error lower bound for the midpoint product rule in a few dimensions.
//!
//! Run with `cargo run --release --example certify_midpoint_rule`.

use cubature_adversary::certificate::{Certifier, Mode};
use cubature_adversary::harness::{generate_points, PointKind, PointSetSpec};
use cubature_adversary::numeric::{format_scientific, rat};

fn main() -> cubature_adversary::Result<()> {
    let mut certifier = Certifier::default();
    let grid = [rat(9, 10), rat(7, 10), rat(1, 2)];
    for d in [1, 2, 3, 10] {
        let rule = generate_points(&PointSetSpec {
            kind: PointKind::MidpointProduct,
            n: 1,
            d,
            seed: 0,
        })?;
        let (eta, cert) = certifier.best_bound(&rule, &grid)?;
        println!(
            "d = {d:>2}: error >= {} at eta {eta} ({}, K ~ 10^{})",
            format_scientific(&cert.bound, 8),
            cert.regime.as_str(),
            cert.k_max_log10()
        );
    }

    let rule = generate_points(&PointSetSpec {
        kind: PointKind::MidpointProduct,
        n: 1,
        d: 1,
        seed: 0,
    })?;
    let family = certifier.certify(&rule, &rat(1, 2), Mode::Family)?;
    println!(
        "every d >= d_min ({} digits): error >= {}",
        family.d_min.as_ref().map_or(0, |k| k.to_string().len()),
        format_scientific(&family.bound, 8)
    );
    Ok(())
}
