//! Regenerates the bundled fixture: a 20×20×5 tensor of tubal rank 2.
//!
//! cargo run -p tenscomp-cli --example make_fixture -- crates/cli/fixtures/lowrank_20x20x5.dtf

use std::path::PathBuf;

use tenscomp::synthetic::low_tubal_rank;

fn main() -> anyhow::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "crates/cli/fixtures/lowrank_20x20x5.dtf".into())
        .into();
    let t = low_tubal_rank(20, 20, 5, 2, 7)?;
    tenscomp_cli::io::save_tensor(&t, &out)?;
    println!("wrote {}", out.display());
    Ok(())
}
