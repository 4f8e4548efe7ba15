//! WebAssembly bindings for the browser demo in `www/`.
//!
//! The plain functions are what the tests exercise; the `#[wasm_bindgen]`
//! wrappers only convert errors into JavaScript exceptions.

use qchain::exactnum::parse_rational;
use qchain::format::{distribution_to_string, parse_f64};
use qchain::markov::{build_distribution, exact_setup, simulate, ChainConfig, MassPolicy};
use qchain::qcore::{al_salam_chihara, continuous_q_hermite, q_hermite};
use qchain::{Error, QParams, Result};
use wasm_bindgen::prelude::*;

/// Distribution JSON for `Lambda(m, y, q)`. Exact mode takes rational
/// strings and needs `q` to be a rational square.
pub fn distribution_json(m: usize, y: &str, q: &str, exact: bool) -> Result<String> {
    let text = if exact {
        let (params, y) = exact_setup(&parse_rational(q)?, &parse_rational(y)?)?;
        distribution_to_string(&build_distribution(m, &y, &params, MassPolicy::Strict)?)
    } else {
        let params = QParams::new(parse_f64(q)?)?;
        distribution_to_string(&build_distribution(m, &parse_f64(y)?, &params, MassPolicy::Strict)?)
    };
    Ok(text)
}

/// Float states of one seeded trajectory, initial state first.
pub fn trajectory_states(m: usize, y: f64, q: f64, steps: usize, seed: u64) -> Result<Vec<f64>> {
    let config = ChainConfig::new(q, m, y, steps).with_seed(seed);
    Ok(simulate(&config)?.states)
}

/// `samples` evenly spaced values of a polynomial on `[x_min, x_max]`:
/// `H` is `H_n(x|q)`, `h` is `h_n(x|q)`, `p` is `p_n(x|y, rho, q)`.
#[allow(clippy::too_many_arguments)]
pub fn curve_values(
    family: &str,
    n: usize,
    q: f64,
    y: f64,
    rho: f64,
    x_min: f64,
    x_max: f64,
    samples: usize,
) -> Result<Vec<f64>> {
    if samples < 2 || !(x_max > x_min) {
        return Err(Error::Domain("need at least two samples on a non-empty interval".into()));
    }
    let step = (x_max - x_min) / (samples - 1) as f64;
    (0..samples)
        .map(|i| {
            let x = x_min + step * i as f64;
            match family {
                "H" => q_hermite(n, &x, &q),
                "h" => continuous_q_hermite(n, &x, &q),
                "p" => al_salam_chihara(n, &x, &y, &rho, &q),
                other => Err(Error::Parse(format!("unknown family {other:?}"))),
            }
        })
        .collect()
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn distribution(m: usize, y: &str, q: &str, exact: bool) -> std::result::Result<String, JsError> {
    distribution_json(m, y, q, exact).map_err(js)
}

#[wasm_bindgen]
pub fn trajectory(m: usize, y: f64, q: f64, steps: usize, seed: u32) -> std::result::Result<Vec<f64>, JsError> {
    trajectory_states(m, y, q, steps, u64::from(seed)).map_err(js)
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn curve(
    family: &str,
    n: usize,
    q: f64,
    y: f64,
    rho: f64,
    x_min: f64,
    x_max: f64,
    samples: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    curve_values(family, n, q, y, rho, x_min, x_max, samples).map_err(js)
}
