//! Configuration files, field files, CSV output and the command driver.

mod config;
mod csv_out;
mod fieldfile;
mod run;

pub use config::{
    default_c_grid, default_p_grid, parse_config, EvolveSpec, Experiment, InitSpec, InitialData, Mode, RegionsSpec, RunConfig, SolverSpec,
};
pub use csv_out::{dcurve_table, monitor_table, num, outcome_table, region_table, summary_table, write_table};
pub use fieldfile::{decode, encode, read_field, write_field, Expect, FieldFile, MAGIC, VERSION};
pub use run::{exit_code, run, run_text, RunOptions, RunReport};
