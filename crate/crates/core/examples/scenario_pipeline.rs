//! Scenarios as JSON, run in parallel, written to disk and compared.

use ramcf::report::{compare, run_batch, write_outputs, EvalSpec, Scenario};
use ramcf::Result;

fn main() -> Result<()> {
    let eval = EvalSpec {
        max_n: 3000,
        ..EvalSpec::default()
    };
    let scenarios: Vec<Scenario> = vec![
        Scenario::constant("1").named("constant"),
        Scenario::gill("1", "2^-i").named("summable"),
        Scenario::rational(1, 3, "harmonic").named("rational"),
    ]
    .into_iter()
    .map(|s| s.with_eval(eval.clone()))
    .collect();
    println!("{}", scenarios[2].to_json()?);

    let root = std::env::temp_dir().join("ramcf-scenario-pipeline");
    let mut artifacts = Vec::new();
    for (s, outcome) in scenarios.iter().zip(run_batch(&scenarios)) {
        let outcome = outcome?;
        write_outputs(&outcome, &root.join(s.label()))?;
        artifacts.push(outcome.artifact);
    }
    compare(&artifacts)?.write_csv(std::io::stdout())?;
    println!("outputs in {}", root.display());
    Ok(())
}
