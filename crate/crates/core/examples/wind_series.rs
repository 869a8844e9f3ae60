//! Generate EOG and turbulent wind series and write them as `t,v` CSV,
//! ready for a `kind = "file"` scenario.
//!
//! cargo run --example wind_series -- <dir>

use tswind::wind::{WindKind, WindScenario, WindSignal};

fn main() -> tswind::Result<()> {
    let dir = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    for kind in [WindKind::Eog, WindKind::Turbulent] {
        let sc = WindScenario {
            kind,
            dt: 0.05,
            ..Default::default()
        };
        let w = WindSignal::from_scenario(&sc)?;
        let n = (sc.duration / sc.dt).round() as usize;
        let samples: Vec<(f64, f64)> = (0..=n).map(|k| (k as f64 * sc.dt, w.at(k as f64 * sc.dt))).collect();
        let (lo, hi) = samples.iter().fold((f64::MAX, f64::MIN), |(a, b), s| (a.min(s.1), b.max(s.1)));
        let path = dir.join(format!("{kind:?}.csv").to_lowercase());
        let mut text = String::from("t,v\n");
        for (t, v) in &samples {
            text.push_str(&format!("{t},{v}\n"));
        }
        std::fs::write(&path, text).expect("write wind csv");
        println!("{}: {} samples in [{lo:.3}, {hi:.3}] m/s", path.display(), samples.len());
    }
    Ok(())
}
