//! Regenerate the bundled data files: reference tower, published gains,
//! design weights and a tabulated aero map.
//!
//! cargo run --example write_data -- <dir>

use std::path::PathBuf;

use tswind::aero::{AeroMap, TabularAeroMap};
use tswind::design::WeightSet;
use tswind::observer::ObserverGains;
use tswind::structural::TowerModel;

fn main() -> tswind::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir).expect("create output dir");
    let write = |name: &str, text: String| std::fs::write(dir.join(name), text).expect("write data file");

    write("tower_nrel5mw.csv", TowerModel::default().to_csv());
    write(
        "published_gains.txt",
        ObserverGains::published_preset().to_text("published observer gains, rounded; L1 and L2 coincide"),
    );
    write("weights.toml", toml::to_string(&WeightSet::default()).expect("weights serialize"));

    let lambdas: Vec<f64> = (0..=40).map(|k| 0.5 * k as f64).collect();
    let betas: Vec<f64> = (0..=45).map(|k| k as f64).collect();
    let table = TabularAeroMap::tabulate(&AeroMap::default(), lambdas, betas)?;
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    write("aero_analytic.csv", String::from_utf8(buf).expect("ascii"));
    Ok(())
}
