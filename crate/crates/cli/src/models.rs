use lindsim::model::{
    amplitude_damping, parse_model, scenario_collective_lowering, scenario_depolarizing, scenario_xy,
};
use lindsim::Lindbladian;

use crate::{CliError, CliResult, ModelArgs, ScenarioName};

pub fn load(args: &ModelArgs) -> CliResult<Lindbladian> {
    if let Some(path) = &args.model {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        return Ok(parse_model(&text)?);
    }
    let Some(name) = args.scenario else {
        return Err(CliError::Usage("one of --model or --scenario is required".into()));
    };
    Ok(scenario(name, args, args.n)?)
}

/// Scenario `name` at `n` qubits with the remaining parameters from `args`.
pub fn scenario(name: ScenarioName, args: &ModelArgs, n: usize) -> lindsim::Result<Lindbladian> {
    match name {
        ScenarioName::Depolarizing => scenario_depolarizing(n, None),
        ScenarioName::Xy => scenario_xy(n, args.coupling, None),
        ScenarioName::Collective => scenario_collective_lowering(n, &[((0..n).collect(), args.gamma)]),
        ScenarioName::AmplitudeDamping => {
            if n != 1 {
                return Err(lindsim::Error::InvalidModel(format!("amplitude damping is a 1-qubit model, got n = {n}")));
            }
            amplitude_damping(args.gamma, args.hz)
        }
    }
}
