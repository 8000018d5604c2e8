//! Drive the configuration-file workflow from code.
//!
//! Run with `cargo run --release --example run_config -- examples/configs/sweep.toml`.

use std::path::PathBuf;

use optobath::cli::{parse_config_file, run};

fn main() -> optobath::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/sweep.toml")
        });
    let config = parse_config_file(&path, None)?;
    let out = run(&config)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&out.summary["results"]).expect("json")
    );
    println!(
        "{} rows, columns: {}",
        out.table.rows.len(),
        out.table.columns.join(", ")
    );
    Ok(())
}
