//! Observable specs accepted by `f` / `g`.

use std::path::Path;

use num_complex::Complex64;
use skewlab::clt::coboundary;
use skewlab::mixing::trace_observable;
use skewlab::rng::stream;
use skewlab::shift::CylinderFunction;
use skewlab::{IrrepLabel, LocallyConstantObservable, SkewSystem, Word};

use crate::error::{CliError, CliResult};

pub fn load_observable(field: &str, spec: &str, sys: &SkewSystem) -> CliResult<LocallyConstantObservable> {
    let a = sys.alphabet();
    let j = sys.j_max();
    let Some(rest) = spec.strip_prefix("builtin:") else {
        let obs = LocallyConstantObservable::from_file(Path::new(spec))
            .map_err(|e| CliError::config(field, format!("{spec}: {e}")))?;
        if obs.alphabet() != a {
            return Err(CliError::config(
                field,
                format!("observable has {} symbols, extension has {a}", obs.alphabet()),
            ));
        }
        if obs.j_max() > j {
            return Err(CliError::config(
                field,
                format!("observable J_max {} exceeds configured j_max {j}", obs.j_max()),
            ));
        }
        return Ok(obs);
    };
    let parts: Vec<&str> = rest.split(':').collect();
    let bad = |msg: &str| CliError::config(field, format!("`{spec}`: {msg}"));
    let num = |s: &str| s.parse::<u64>().map_err(|_| bad("expected an integer"));
    match parts.as_slice() {
        ["trace"] => {
            if j < IrrepLabel::HALF {
                return Err(bad("needs j_max >= 1/2"));
            }
            Ok(trace_observable(a, j))
        }
        ["one"] => Ok(LocallyConstantObservable::constant(a, j, Complex64::new(1.0, 0.0))),
        ["indicator", w] => {
            let symbols = w
                .chars()
                .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(|| bad("word must be digits")))
                .collect::<CliResult<Vec<u8>>>()?;
            let word = Word::new(symbols, a).map_err(|e| bad(&e.to_string()))?;
            Ok(LocallyConstantObservable::from_cylinder_function(
                &CylinderFunction::indicator(a, &word),
                j,
            ))
        }
        [kind @ ("random" | "random-real" | "coboundary"), depth, seed] => {
            let depth = num(depth)? as usize;
            if depth > 6 {
                return Err(bad("depth must be at most 6"));
            }
            let mut rng = stream(num(seed)?, 0);
            let obs = LocallyConstantObservable::random(&mut rng, a, depth, j);
            match *kind {
                "random" => Ok(obs),
                "random-real" => Ok(obs.map_values(|v| v.real_part())),
                _ => Ok(coboundary(sys, &obs.map_values(|v| v.real_part()))?),
            }
        }
        _ => Err(bad("unknown builtin")),
    }
}
