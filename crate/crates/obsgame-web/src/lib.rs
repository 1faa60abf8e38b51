//! Browser bindings: the demo page feeds scenario JSON in and gets JSON
//! back — a game trace with its mode report, a V* summary, or a
//! synthesized sensor. All arithmetic stays exact; only the rendering is
//! JavaScript.

use obsgame::attack::{min_unobservable_dim, minimize_unobservable};
use obsgame::game::{classify_mode, run_game, Mode};
use obsgame::ratmat::Matrix;
use obsgame::scenario::Scenario;
use obsgame::subspace::{unobservable_dim, vstar};
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

fn err(msg: impl std::fmt::Display) -> String {
    json!({ "ok": false, "error": msg.to_string() }).to_string()
}

fn matrix_json(m: &Matrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|r| {
                Value::Array(
                    (0..m.cols())
                        .map(|c| Value::String(m[(r, c)].to_string()))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Runs the epoch game for a scenario and returns the trace, the emitted
/// strategies, and the mode report.
#[wasm_bindgen]
pub fn run_game_json(scenario_json: &str) -> String {
    let scenario = match Scenario::from_json(scenario_json) {
        Ok(s) => s,
        Err(e) => return err(e),
    };
    let cfg = match scenario.game_config() {
        Ok(c) => c,
        Err(e) => return err(e),
    };
    let trace = match run_game(&cfg) {
        Ok(t) => t,
        Err(e) => return err(e),
    };
    let report = classify_mode(&trace, &cfg.a, &cfg.b, cfg.m);
    let steps: Vec<Value> = trace
        .steps
        .iter()
        .map(|s| {
            json!({
                "epoch": s.epoch,
                "actor": s.actor.label(),
                "phi": s.phi,
                "dim_vstar": s.dim_vstar,
                "max_geo_mult": s.max_geo_mult,
                "strategy": matrix_json(&s.strategy),
            })
        })
        .collect();
    json!({
        "ok": true,
        "n": cfg.a.rows(),
        "steps": steps,
        "mode": match report.mode {
            Mode::Lock => "lock",
            Mode::Oscillation => "oscillation",
            Mode::Inconclusive => "inconclusive",
        },
        "onset_epoch": report.onset_epoch,
        "amplitude": report.amplitude,
        "loop_period": report.loop_period,
        "lock_certificate": report.lock_certificate,
        "zero_vstar_certificate": report.zero_vstar_certificate,
    })
    .to_string()
}

/// Computes the maximal (A,B)-invariant subspace inside Ker C for the
/// scenario's `a`, `b`, `c` matrices.
#[wasm_bindgen]
pub fn vstar_json(scenario_json: &str) -> String {
    let scenario = match Scenario::from_json(scenario_json) {
        Ok(s) => s,
        Err(e) => return err(e),
    };
    let (Some(a), Some(b), Some(c)) = (&scenario.a, &scenario.b, &scenario.c) else {
        return err("scenario needs matrices a, b and c");
    };
    if !a.is_square() || b.rows() != a.rows() || c.cols() != a.rows() {
        return err("matrix shapes are inconsistent");
    }
    let r = vstar(a, b, c);
    json!({
        "ok": true,
        "dim": r.vstar.dim(),
        "iterations": r.iterations,
        "iterate_dims": r.iterate_dims,
        "basis": matrix_json(r.vstar.basis()),
    })
    .to_string()
}

/// Synthesizes the attacker's sensor for the scenario's plant and
/// feedback, reporting the value it attains.
#[wasm_bindgen]
pub fn attack_json(scenario_json: &str) -> String {
    let scenario = match Scenario::from_json(scenario_json) {
        Ok(s) => s,
        Err(e) => return err(e),
    };
    let (Some(a), Some(b), Some(m)) = (&scenario.a, &scenario.b, scenario.m) else {
        return err("scenario needs matrices a, b and sensor count m");
    };
    let f = match &scenario.f0 {
        Some(f) => f.clone(),
        None => Matrix::zeros(b.cols(), a.rows()),
    };
    if !a.is_square() || b.rows() != a.rows() || f.rows() != b.cols() || f.cols() != a.rows() {
        return err("matrix shapes are inconsistent");
    }
    let c = match minimize_unobservable(a, b, &f, m) {
        Ok(c) => c,
        Err(e) => return err(e),
    };
    let closed = a + &(b * &f);
    let optimum = match min_unobservable_dim(&closed, m) {
        Ok(v) => v,
        Err(e) => return err(e),
    };
    json!({
        "ok": true,
        "sensor": matrix_json(&c),
        "phi": unobservable_dim(&c, &closed),
        "optimum": optimum,
    })
    .to_string()
}
