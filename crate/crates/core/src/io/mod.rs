//! Configuration, particle sources and snapshot output.

pub mod config;
pub mod lattice;
pub mod snapshot;

use std::path::Path;

use crate::error::Result;
use crate::timeloop::{setup, Progress, Simulation};
use config::SimConfig;
use snapshot::{Snapshot, SnapshotWriter};

pub use config::load_config;
pub use lattice::generate_lattice;

/// Set up and run a configuration, writing snapshots to `out_dir`.
///
/// `progress` receives one report per output interval.
pub fn run_config(
    config: &SimConfig,
    out_dir: &Path,
    steps: u64,
    mut progress: impl FnMut(&Progress),
) -> Result<Simulation> {
    let mut sim = setup(config)?;
    let mut writer = SnapshotWriter::new(out_dir, config.output.format)?;
    sim.run(steps, config.integrator.output_every, |s, p| {
        writer.write(&Snapshot::capture(&s.particles, s.step, s.time))?;
        progress(p);
        Ok(())
    })?;
    Ok(sim)
}
