//! Expands the resonant almost-conservation symbol on one block and reports
//! how well a few Fourier modes per axis reproduce it.

use surface_nls::tensorizer::{tensorize, symbol_estimate_check, Extension, ResonantBlock, TensorizeOptions};

fn main() -> surface_nls::Result<()> {
    let params = ResonantBlock { n_cut: 16.0, s: 0.7, l: 3, n2: 64.0, n3: 2.0, n4: 1.0, alpha: 10.0, beta: 0.0 };
    let block = params.block()?;
    println!("min denominator on extended block: {:.1}", params.min_denominator());
    for extension in [Extension::PeriodicBlend, Extension::Bump] {
        for mode_cap in [3, 5, 9] {
            let opts = TensorizeOptions { mode_cap, extension, ..Default::default() };
            let e = tensorize(&block, &opts)?;
            println!(
                "{:<22} modes/axis={mode_cap}  sup|m|={:.3e}  sup err={:.3e}  rel={:.3e}  l1={:.3e}  C2={:.3e}",
                e.window, e.symbol_sup, e.sup_error, e.relative_sup_error, e.l1_mass, e.c2_norm
            );
        }
    }
    for b in symbol_estimate_check(&block, 1, 5)? {
        println!("alpha={:?} max scaled derivative={:.3e}", b.alpha, b.max_scaled);
    }
    Ok(())
}
