//! Writes a certificate to JSON, reads it back, replays it, then shows that a
//! moved sample point is caught.
//!
//! Run with `cargo run --release --example replay_certificate`.

use cubature_adversary::certificate::{certify_rule, replay, ErrorCertificate, Mode};
use cubature_adversary::harness::{generate_points, PointKind, PointSetSpec};
use cubature_adversary::numeric::rat;

fn main() -> cubature_adversary::Result<()> {
    let rule = generate_points(&PointSetSpec {
        kind: PointKind::UniformRandom,
        n: 2,
        d: 2,
        seed: 42,
    })?;
    let cert = certify_rule(&rule, &rat(9, 10), Mode::Concrete)?;
    let text = serde_json::to_string(&cert.to_json())?;
    println!("certificate: {} bytes, rule hash {}", text.len(), &cert.rule_hash[..16]);

    let loaded = ErrorCertificate::from_json(&serde_json::from_str(&text)?)?;
    println!("{}\n", replay(&loaded));

    let mut tampered = loaded.clone();
    if let Some(rule) = tampered.rule.as_mut() {
        rule.points[0][0] = rat(1, 2);
    }
    let report = replay(&tampered);
    println!("after moving one point: rejected checks {:?}", report.rejections());
    Ok(())
}
