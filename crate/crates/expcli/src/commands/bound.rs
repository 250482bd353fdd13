use dqfim::metric::unitary_bound;
use serde::Serialize;

use super::CmdResult;
use crate::config::{ConfigError, Settings};
use crate::exit_codes;

#[derive(Serialize)]
struct BoundTable {
    d: usize,
    rows: Vec<BoundRow>,
}

#[derive(Serialize)]
struct BoundRow {
    l: usize,
    bound: usize,
}

pub fn run(settings: &Settings) -> CmdResult {
    let d: usize = match settings.parse::<usize>("d")? {
        Some(d) => d,
        None => {
            let n: usize = settings.require("n")?;
            1usize << n
        }
    };
    if d < 2 {
        return Err(ConfigError("d must be at least 2".into()).into());
    }
    let lmax: usize = settings.parse_or("lmax", d + 2)?;
    let table = BoundTable {
        d,
        rows: (1..=lmax)
            .map(|l| BoundRow {
                l,
                bound: unitary_bound(d, l),
            })
            .collect(),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&table).map_err(|e| ConfigError(format!("json: {e}")))?
    );
    Ok(exit_codes::OK)
}
