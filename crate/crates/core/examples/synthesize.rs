//! Writes synthetic Noordin-style and ecosystem-style inputs for the
//! example configurations.
//!
//! cargo run -p netmod-core --example synthesize -- [DIR] [N] [SEED]

use std::fs::{self, File};
use std::path::PathBuf;

use netmod_core::netcore::io::write_incidence;
use netmod_core::netcore::save_network;
use netmod_core::synthetic::{ecosystem_style, noordin_style, NOORDIN_COVARIATES};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "data".into()));
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(79);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2024);

    let noordin = dir.join("noordin");
    fs::create_dir_all(&noordin)?;
    let data = noordin_style(n, seed)?;
    save_network(data.state.focal(), noordin.join("communication.csv"))?;
    for name in NOORDIN_COVARIATES {
        save_network(data.state.layer(name)?, noordin.join(format!("{name}.csv")))?;
    }
    save_network(&data.collaboration, noordin.join("collaboration.csv"))?;

    let eco = dir.join("ecosystem");
    fs::create_dir_all(&eco)?;
    let eco_data = ecosystem_style(60, seed);
    write_incidence(&eco_data.city, File::create(eco.join("city.csv"))?)?;
    write_incidence(&eco_data.target, File::create(eco.join("target.csv"))?)?;

    eprintln!(
        "n = {n}: {} communication ties, collaboration total {}",
        data.state.focal().total_weight(),
        data.collaboration.total_weight()
    );
    Ok(())
}
