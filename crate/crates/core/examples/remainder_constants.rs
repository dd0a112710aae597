//! Remainder constants K and κ across the admissible t-window at d = 3, s = 1/2.

use hlt_core::hardy_constants::DimParams;
use hlt_core::remainder::{hardyrem_constants, t_window, tbound_check};

fn main() -> hlt_core::Result<()> {
    let (d, s) = (3, 0.5);
    let w = t_window(d, s);
    println!("t-window for (d, s) = ({d}, {s}): lower {:.4} (closed: {}), upper {s}", w.lower, w.lower_closed);
    println!("{:>6} {:>12} {:>12} {:>12} {:>14}", "t", "K", "kappa", "ln B", "min rel slack");
    for t in [1.0 / 3.0, 0.36, 0.4, 0.44, 0.48] {
        let p = DimParams::new(d, s)?.with_t(t)?;
        let cert = hardyrem_constants(&p)?;
        let chk = tbound_check(&p, 1e-3, 1e3, 51)?;
        println!(
            "{t:>6.4} {:>12.5e} {:>12.5e} {:>12.4} {:>14.3e}",
            cert.k, cert.kappa, cert.ln_b, chk.worst_relative_slack
        );
    }
    Ok(())
}
