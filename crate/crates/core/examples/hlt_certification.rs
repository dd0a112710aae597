//! Lattice check of the HLT inequality with the pipeline constant on seeded potentials.

use hlt_core::hardy_constants::DimParams;
use hlt_core::lt_bounds::{optimize_t, L0Provider, DEFAULT_T_GRID};
use hlt_core::spectral::checks::hlt_check;
use hlt_core::spectral::{gaussian_ensemble, EnsembleSpec, GridSpec, SolverSettings};

fn main() -> hlt_core::Result<()> {
    let grid = GridSpec::staggered(1, 128, 20.0)?;
    let p = DimParams::new(1, 0.3)?.with_gamma(1.0)?;
    let hlt = optimize_t(&p, &L0Provider::Semiclassical { multiplier: 1.0 }, DEFAULT_T_GRID)?;
    let pots = gaussian_ensemble(&EnsembleSpec::new(1, 20, 5));
    let rep = hlt_check(&grid, &p, &hlt, &pots, &SolverSettings::default())?;
    println!("L_HLT = {:.5e} at t* = {:.4}", hlt.value, hlt.t_star);
    for smp in &rep.samples {
        println!(
            "{:>3} moment {:>10.4e}  L*int V^p {:>10.4e}  ratio {:>8.2e}  bound states {}",
            smp.index, smp.moment, smp.rhs, smp.ratio, smp.negative_count
        );
    }
    println!("{:?}: max ratio {:.3e}", rep.verdict.status, rep.max_ratio);
    Ok(())
}
