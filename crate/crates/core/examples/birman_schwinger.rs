//! Birman-Schwinger counting against direct diagonalization on a 1-D grid.

use hlt_core::spectral::bs::{direct_count, BsSolver};
use hlt_core::spectral::potential::ensemble_member;
use hlt_core::spectral::{build_operator, EnsembleSpec, GridSpec};

fn main() -> hlt_core::Result<()> {
    let grid = GridSpec::staggered(1, 64, 8.0)?;
    let op0 = build_operator(grid, 0.75, 0.0, &vec![0.0; grid.dim()])?;
    let solver = BsSolver::new(&op0)?;
    let spec = EnsembleSpec::new(1, 10, 7);
    println!("{:>3} {:>6} {:>6} {:>8} {:>10}", "i", "tau", "BS", "direct", "top mu");
    for i in 0..spec.count {
        let v = ensemble_member(&spec, i).sample(&grid);
        for tau in [0.05, 0.5] {
            let bs = solver.count(&v, tau)?;
            let (direct, _) = direct_count(&op0.with_v(&v)?, tau)?;
            println!("{i:>3} {tau:>6} {:>6} {direct:>8} {:>10.4}", bs.count, bs.bs_eigenvalues[0]);
        }
    }
    Ok(())
}
