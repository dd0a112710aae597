//! Optimized Hardy-Lieb-Thirring constants as a function of γ.

use hlt_core::hardy_constants::DimParams;
use hlt_core::lt_bounds::{optimize_t, L0Provider, DEFAULT_T_GRID};

fn main() -> hlt_core::Result<()> {
    let provider = L0Provider::Semiclassical { multiplier: 1.0 };
    println!("{:>5} {:>5} {:>6} {:>8} {:>8} {:>12} {:>12}", "d", "s", "gamma", "t*", "sigma*", "L_HLT", "L_magnetic");
    for (d, s) in [(3, 0.5), (3, 1.0), (2, 0.5)] {
        for gamma in [0.5, 1.0, 2.0] {
            let p = DimParams::new(d, s)?.with_gamma(gamma)?;
            match optimize_t(&p, &provider, DEFAULT_T_GRID) {
                Ok(h) => println!(
                    "{d:>5} {s:>5} {gamma:>6} {:>8.5} {:>8.5} {:>12.5e} {:>12.5e}",
                    h.t_star, h.sigma_star, h.value, h.magnetic_value
                ),
                Err(e) => println!("{d:>5} {s:>5} {gamma:>6} not certified: {e}"),
            }
        }
    }
    Ok(())
}
