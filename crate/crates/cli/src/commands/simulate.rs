use isrp_core::sim::simulate_replicate;

use crate::error::{CliError, CliResult};
use crate::output::Staging;
use crate::SimulateArgs;

use super::Ctx;

/// Writes `trajectories.csv` (wide layout) and `plan.json`.
pub fn run(ctx: &Ctx, a: SimulateArgs) -> CliResult<()> {
    let plan = ctx.plan(&a.plan)?;
    let data = simulate_replicate(&plan, a.replicate).map_err(CliError::from_compute)?;
    let mut csv = Vec::new();
    data.write_wide_csv(&mut csv).map_err(CliError::from_compute)?;
    let mut stage = Staging::new(&ctx.out_dir(&a.out))?;
    stage.write_bytes("trajectories.csv", &csv)?;
    stage.write_json("plan.json", &plan)?;
    stage.commit()?;
    Ok(())
}
