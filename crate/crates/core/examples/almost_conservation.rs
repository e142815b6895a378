//! Modified-energy increments over one local interval for a sweep of N, on
//! a reduced basis so that it runs in a few seconds. The full sweep is the
//! `almost-conservation` subcommand.

use surface_nls::config::ConfigSource;
use surface_nls::experiments::{log_log_slope, run_almost_conservation, AlmostConservationSpec};

fn main() -> surface_nls::Result<()> {
    let src = ConfigSource::parse("n_list = [4, 8, 16]\ncutoff = 48.0\nsteps = 800\n", None)?;
    let spec = AlmostConservationSpec::resolve(&src)?;
    let out = run_almost_conservation(&spec)?;
    let (_, csv) = &out.tables[0];
    print!("{csv}");
    let mut points = Vec::new();
    for line in csv.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        points.push((f[0], f[7]));
    }
    println!("fitted slope {:.2}", log_log_slope(&points));
    Ok(())
}
