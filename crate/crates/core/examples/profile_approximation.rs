//! Polynomial approximation of the dip profile with an exact error certificate.
//!
//! Run with `cargo run --release --example profile_approximation -- 1/10`.

use cubature_adversary::numeric::{format_rational, int, parse_rational, to_f64};
use cubature_adversary::profile::{build_profile, certify_sup_error, propose_approx};

fn main() -> cubature_adversary::Result<()> {
    let delta = parse_rational(&std::env::args().nth(1).unwrap_or_else(|| "1/10".into()))?;
    let g = build_profile(&delta)?;
    for s in &g.segments {
        println!(
            "g on [{}, {}] = {} x + {}",
            format_rational(&s.a),
            format_rational(&s.b),
            format_rational(&s.slope),
            format_rational(&s.intercept)
        );
    }

    let eps = &delta / int(2);
    let proposal = propose_approx(&g, &(&eps * int(4) / int(5)), 8192)?;
    println!("degree {} with float error {:.3e}", proposal.degree, proposal.float_error);

    let cert = certify_sup_error(&proposal.poly, &g, &eps)?;
    for (a, b, e) in &cert.segments {
        println!(
            "  P - g on [{:.4}, {:.4}] lies in [{:+.3e}, {:+.3e}]",
            to_f64(a),
            to_f64(b),
            to_f64(&e.lo),
            to_f64(&e.hi)
        );
    }
    println!("certified sup error <= {}", format_rational(&cert.eps));
    Ok(())
}
