//! Run a figure preset at reduced size and print its CSV.

use pcmas::experiment::{run_experiment, write_csv, ExperimentId, ExperimentSpec};

fn main() -> pcmas::Result<()> {
    let mut spec = ExperimentSpec::preset(ExperimentId::Fig3Tft)?;
    spec.trials = 10;
    spec.iterations = vec![1000];
    let rows = run_experiment(&spec)?;
    write_csv(&rows, std::io::stdout().lock())
}
