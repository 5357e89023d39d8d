//! Runs every batch command on the config in `examples/data`, which reads
//! its N-function, bundle and operator from files.

use std::path::Path;

use orlicz_ergodic::cli::{run_command, Command};
use orlicz_ergodic::config::Config;

fn main() -> orlicz_ergodic::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let cfg = Config::read(&dir.join("experiment.cfg"))?;
    let out = std::env::temp_dir().join("orlicz-ergodic-example");
    for cmd in [Command::Conjugate, Command::Norms, Command::Verify, Command::Converge] {
        let outcome = run_command(cmd, &cfg, &dir, &out)?;
        println!("== {cmd}");
        for line in &outcome.report {
            println!("{line}");
        }
        for f in &outcome.files {
            let text = std::fs::read_to_string(f)?;
            println!("{} ({} rows)", f.display(), text.lines().count() - 1);
        }
    }
    Ok(())
}
