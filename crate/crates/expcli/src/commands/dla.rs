use dqfim::ansatz::{generator_set, AnsatzCircuit};
use dqfim::dla::lie_closure;
use serde::Serialize;

use super::{CmdResult, CommandError};
use crate::config::{ensure_out_dir, ConfigError, Settings};
use crate::exit_codes;

#[derive(Serialize)]
struct DlaRecord {
    family: String,
    n: usize,
    dim: usize,
    truncated: bool,
}

pub fn run(settings: &Settings) -> CmdResult {
    let family = super::rank::parse_family(settings)?;
    let n: usize = settings.require("n")?;
    let default_cap = if 2 * n < usize::BITS as usize {
        (1usize << (2 * n)) - 1
    } else {
        1 << 20
    };
    let cap: usize = settings.parse_or("cap", default_cap)?;

    let circuit = AnsatzCircuit::new(family, n, 1).map_err(CommandError::Core)?;
    let span =
        lie_closure(&generator_set(&circuit), cap, 1e-10).map_err(CommandError::Core)?;
    let record = DlaRecord {
        family: family.as_str().into(),
        n,
        dim: span.dim(),
        truncated: span.truncated(),
    };
    let json = serde_json::to_string_pretty(&record)
        .map_err(|e| ConfigError(format!("dla json: {e}")))?;
    println!("{json}");
    if settings.get("out_dir").is_some() {
        let out = ensure_out_dir(settings)?;
        std::fs::write(out.join("dla.json"), &json)
            .map_err(|e| ConfigError(format!("cannot write dla.json: {e}")))?;
        settings.write_resolved(&out.join("dla_config.txt"))?;
    }
    Ok(if span.truncated() {
        exit_codes::TRUNCATED_CLOSURE
    } else {
        exit_codes::OK
    })
}
