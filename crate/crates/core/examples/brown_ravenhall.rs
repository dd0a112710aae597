//! Pseudo-relativistic spin model: channel-form comparison and the HLT constant.

use hlt_core::brown_ravenhall::{
    br_hlt_constant, channel_forms, comp_band, tilde_hardy_constant, ProfileFamily, ProfileGrid,
    DEFAULT_C_TILDE_PRIME_FACTOR,
};
use hlt_core::lt_bounds::{L0Provider, DEFAULT_T_GRID};

fn main() -> hlt_core::Result<()> {
    let th = tilde_hardy_constant();
    let (lo, hi) = comp_band();
    println!("C~ = {:.10}, C = {:.10}, band [{lo:.4}, {hi:.4}]", th.c_tilde, th.c);
    for fam in ProfileFamily::standard_set() {
        let prof = fam.sample(&ProfileGrid::default(), 1.0)?;
        let f = channel_forms(&prof, 1e-4)?;
        println!("{:<28} tilde {:>10.6} reference {:>10.6} ratio {:.5}", f.label, f.tilde_form, f.reference_form, f.ratio);
    }
    let c_prime = DEFAULT_C_TILDE_PRIME_FACTOR * th.c_tilde;
    let provider = L0Provider::Semiclassical { multiplier: 1.0 };
    for gamma in [0.5, 1.0, 2.0] {
        let b = br_hlt_constant(gamma, &provider, c_prime, "default factor", DEFAULT_T_GRID)?;
        println!("gamma {gamma}: L~ = {:.5e} (t* = {:.4})", b.value, b.pipeline.t_star);
    }
    Ok(())
}
