//! Integrating the quartic correlation by parts n times on the torus.

use surface_nls::experiments::resonant_quadruples;
use surface_nls::locality::{an_identity_check, bn_terms};

fn main() -> surface_nls::Result<()> {
    for n in 1..=3 {
        let terms: Vec<String> = bn_terms(n)
            .iter()
            .map(|t| format!("{}*({},{},{})", t.coefficient, t.p23, t.p24, t.p34))
            .collect();
        println!("B_{n}: {}", terms.join(" + "));
    }
    for q in resonant_quadruples(5, 4.0, 9) {
        let rep = an_identity_check(q[0], q[1], q[2], q[3], 3, 1.0)?;
        println!(
            "xi={:?} D={:>4} A_0={:.6e} max rel err over n<=3: {:.1e}",
            rep.xi,
            rep.denominator,
            rep.a0[0],
            rep.max_relative_error()
        );
    }
    Ok(())
}
