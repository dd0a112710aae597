//! Run the `constants` and `remainder` commands in-process and print the verdicts.

use hlt_core::reports::{run_command, Command, RunConfig, RunContext};

fn main() -> hlt_core::Result<()> {
    let out = std::env::temp_dir().join("hlt-report-example");
    let ctx = RunContext { out: out.clone(), cache: None };
    let cfg = RunConfig::default();
    for cmd in [Command::Constants, Command::Remainder] {
        let rep = run_command(cmd, &cfg, &ctx)?;
        println!("{}: {} verdicts, exit code {}", rep.command, rep.verdicts.len(), rep.exit_code());
        for v in rep.verdicts.iter().take(4) {
            println!("  {:?} {} slack {:.3e} {}", v.status, v.check, v.slack, v.detail);
        }
    }
    println!("reports in {}", out.display());
    Ok(())
}
