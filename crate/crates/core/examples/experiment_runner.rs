//! Drives the experiment runner from code: a spectrum run followed by a
//! report comparing it with the closed-form curve.

use std::collections::BTreeMap;

use nhlab::cli::{run, ExperimentConfig};

fn config(sub: &str, pairs: &[(&str, &str)]) -> nhlab::Result<ExperimentConfig> {
    let raw: BTreeMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    ExperimentConfig::resolve(sub, raw)
}

fn main() -> nhlab::Result<()> {
    let dir = std::env::temp_dir().join("nhlab-example");
    let spec_dir = dir.join("spectrum");
    let out = spec_dir.to_string_lossy().into_owned();
    let manifest = run(&config("spectrum", &[("V", "2"), ("m", "13"), ("out", &out)])?)?;
    for f in &manifest.files {
        println!("{:<14} {} bytes  sha256 {}", f.path, f.bytes, &f.sha256[..16]);
    }

    let inputs = format!("{out}/spectrum.csv,{out}/curve.csv");
    let report_dir = dir.join("report").to_string_lossy().into_owned();
    run(&config("report", &[("inputs", &inputs), ("out", &report_dir)])?)?;
    println!("{}", std::fs::read_to_string(format!("{report_dir}/report.json"))?);
    Ok(())
}
