//! Diamagnetic domination and the coupling-averaged count on a flux lattice.

use std::f64::consts::PI;

use hlt_core::spectral::magnetic::{coupling_average_with, domination_check, LatticeOperators, MagneticLattice};
use hlt_core::spectral::potential::ensemble_member;
use hlt_core::spectral::EnsembleSpec;

fn main() -> hlt_core::Result<()> {
    let spec = EnsembleSpec::new(2, 1, 3);
    println!("{:>6} {:>4} {:>12} {:>6} {:>24}", "flux", "s", "dom slack", "N", "bound at t = 0.5,1,2,4");
    for k in [0, 1, 2, 4, 8] {
        for s in [1.0, 0.5] {
            let lat = MagneticLattice::new(8, k as f64 * PI / 8.0, s)?;
            let dom = domination_check(&lat, &[0.1, 1.0, 5.0], 2, 1)?;
            let ops = LatticeOperators::new(&lat)?;
            let v = lat.sample(&ensemble_member(&spec, 0));
            let avg = coupling_average_with(&ops, &v, 0.05, &[0.5, 1.0, 2.0, 4.0])?;
            let rhs: Vec<String> = avg.rhs.iter().map(|r| format!("{r:.1}")).collect();
            println!("{:>6} {s:>4} {:>12.3e} {:>6} {:>24}", format!("{k}pi/8"), dom.min_slack, avg.lhs, rhs.join(" "));
        }
    }
    Ok(())
}
