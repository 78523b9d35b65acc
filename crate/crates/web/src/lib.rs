//! WebAssembly bindings behind the static page in `www/`.
//!
//! Every export takes and returns JSON strings so the page needs no generated
//! type glue beyond the functions themselves.

use num_traits::ToPrimitive;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use tia::exactnum::{format_rational, parse_rational, Poly1};
use tia::fluid::{self, Augmentation, FluidFlow, Method};
use tia::lattice::GenJson;
use tia::oracle::{self, McOutcome};
use tia::{CellKind, Chain, Gen1D, Lattice1D};

/// Half-width of a wiggle on screen, in lattice units.
const WIGGLE: f64 = 0.4;

#[derive(Serialize)]
struct Curve {
    label: String,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

#[derive(Serialize)]
struct Term {
    coeff: String,
    value: f64,
    gen: String,
}

#[derive(Serialize)]
struct ProductView {
    a: Vec<Curve>,
    b: Vec<Curve>,
    product: Vec<Term>,
    product_curves: Vec<Curve>,
}

fn parse_gen(text: &str) -> Result<Gen1D, String> {
    let raw: GenJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let g = Gen1D::try_from(&raw).map_err(|e| e.to_string())?;
    Lattice1D::line().canonical(g).map_err(|e| e.to_string())
}

fn sample(anchor: i64, poly: &Poly1, weight: f64, resolution: usize, label: String) -> Curve {
    let steps = resolution.max(2);
    let zs = (0..=steps).map(|i| -1.0 + 2.0 * i as f64 / steps as f64);
    let (xs, ys) = zs.map(|z| (anchor as f64 + WIGGLE * z, weight * poly.eval_f64(z) / WIGGLE)).unzip();
    Curve { label, xs, ys }
}

fn curves(g: &Gen1D, weight: f64, resolution: usize) -> Vec<Curve> {
    let marginals = oracle::density_of(g).endpoint_marginals();
    let names: &[&str] = match g.kind {
        CellKind::Point => &["point"],
        _ => &["left end", "right end"],
    };
    marginals
        .iter()
        .zip(names)
        .map(|((anchor, p), name)| sample(*anchor, p, weight, resolution, format!("{g} {name}")))
        .collect()
}

fn terms(c: &Chain) -> Vec<Term> {
    c.terms()
        .map(|(g, r)| Term { coeff: format_rational(r), value: r.to_f64().unwrap_or(f64::NAN), gen: g.to_string() })
        .collect()
}

/// Endpoint densities of two generators and of their product on the line.
pub fn product_view(a: &str, b: &str, resolution: usize) -> Result<String, String> {
    let (g, h) = (parse_gen(a)?, parse_gen(b)?);
    let line = Lattice1D::line();
    let p = tia::tia1d::intersect_gen(&line, &g, &h);
    let product_curves = p
        .terms()
        .flat_map(|(t, c)| curves(t, c.to_f64().unwrap_or(0.0), resolution))
        .collect();
    let view = ProductView { a: curves(&g, 1.0, resolution), b: curves(&h, 1.0, resolution), product: terms(&p), product_curves };
    Ok(serde_json::to_string(&view).expect("view serializes"))
}

#[derive(Serialize)]
struct Estimate {
    outcome: String,
    exact: f64,
    exact_text: String,
    frequency: f64,
    standard_error: f64,
}

#[derive(Serialize)]
struct McView {
    samples: u64,
    estimates: Vec<Estimate>,
}

fn outcome_of(g: &Gen1D) -> McOutcome {
    match g.kind {
        CellKind::Point => McOutcome::Point { at: g.a },
        CellKind::Interval => McOutcome::Interval { a: g.a, b: g.b },
        CellKind::Infinitesimal => McOutcome::Infinitesimal { at: g.a },
    }
}

/// Sampled frequencies of each intersection type next to the exact masses.
pub fn monte_carlo_view(a: &str, b: &str, samples: u32, seed: u32) -> Result<String, String> {
    let (g, h) = (parse_gen(a)?, parse_gen(b)?);
    let exact = tia::tia1d::intersect_gen(&Lattice1D::line(), &g, &h);
    let est = oracle::mc_estimate(&g, &h, samples.max(1) as u64, seed as u64);
    let mut outcomes: Vec<McOutcome> = est.counts.keys().copied().collect();
    for (t, _) in exact.terms() {
        if !outcomes.contains(&outcome_of(t)) {
            outcomes.push(outcome_of(t));
        }
    }
    let estimates = outcomes
        .into_iter()
        .map(|o| {
            let mass = exact
                .terms()
                .filter(|(t, _)| outcome_of(t) == o)
                .map(|(_, c)| c.clone())
                .sum::<tia::Rational>();
            let p = est.frequency(&o);
            Estimate {
                outcome: format!("{o:?}"),
                exact: mass.to_f64().unwrap_or(f64::NAN),
                exact_text: format_rational(&mass),
                frequency: p,
                standard_error: est.standard_error(p),
            }
        })
        .collect();
    Ok(serde_json::to_string(&McView { samples: est.samples, estimates }).expect("view serializes"))
}

#[derive(Serialize)]
struct FluidView {
    n: u32,
    delta: String,
    dim: usize,
    definiteness: String,
    time: Vec<f64>,
    energy: Vec<f64>,
    helicity: Vec<f64>,
    energy_drift: f64,
    helicity_drift: f64,
}

/// Builds the fluid algebra and integrates a seeded unit-energy state.
pub fn fluid_view(n: u32, delta: &str, dt: f64, steps: usize, method: &str, seed: u32) -> Result<String, String> {
    let delta = parse_rational(delta).map_err(|e| e.to_string())?;
    let aug = Augmentation::new(delta).map_err(|e| e.to_string())?;
    let method = match method {
        "rk4" => Method::Rk4,
        "midpoint" => Method::ImplicitMidpoint,
        other => return Err(format!("unknown method {other}")),
    };
    let algebra = fluid::build_fluid_algebra(n, &aug).map_err(|e| e.to_string())?;
    let flow = FluidFlow::new(&algebra).map_err(|e| e.to_string())?;
    let run = fluid::integrate(&flow, &flow.random_state(seed as u64), dt, steps, method).map_err(|e| e.to_string())?;
    let view = FluidView {
        n,
        delta: format_rational(aug.delta()),
        dim: algebra.dim(),
        definiteness: algebra.definiteness.verdict().to_string(),
        time: run.samples.iter().map(|s| s.time).collect(),
        energy: run.samples.iter().map(|s| s.energy).collect(),
        helicity: run.samples.iter().map(|s| s.helicity).collect(),
        energy_drift: run.max_relative_energy_drift(),
        helicity_drift: run.max_relative_helicity_drift(),
    };
    Ok(serde_json::to_string(&view).expect("view serializes"))
}

#[wasm_bindgen]
pub fn product(a: &str, b: &str, resolution: usize) -> Result<String, JsError> {
    product_view(a, b, resolution).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn monte_carlo(a: &str, b: &str, samples: u32, seed: u32) -> Result<String, JsError> {
    monte_carlo_view(a, b, samples, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fluid_run(n: u32, delta: &str, dt: f64, steps: usize, method: &str, seed: u32) -> Result<String, JsError> {
    fluid_view(n, delta, dt, steps, method, seed).map_err(|e| JsError::new(&e))
}
