//! Sharp Hardy constants and the Ψ-profile certificate for a few (d, s).

use hlt_core::hardy_constants::{hardy_constant, psi_profile, DimParams};

fn main() -> hlt_core::Result<()> {
    println!("{:>2} {:>5} {:>14} {:>10} {:>10} {:>5}", "d", "s", "C_{s,d}", "even_err", "mid_err", "ok");
    for (d, s) in [(1, 0.25), (2, 0.5), (3, 0.5), (3, 1.0), (3, 1.25)] {
        let p = DimParams::new(d, s)?;
        let prof = psi_profile(&p, 128)?;
        println!(
            "{d:>2} {s:>5} {:>14.10} {:>10.1e} {:>10.1e} {:>5}",
            hardy_constant(&p)?,
            prof.evenness_error,
            prof.midpoint_identity_error,
            prof.all_certified()
        );
    }
    Ok(())
}
