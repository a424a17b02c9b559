//! Completes a synthetic tubal-rank-2 tensor and prints the error curve.
//!
//! `cargo run --release --example recovery -- [bemcp|emcp|nmcp] [rate] [seed] [mu] [n1,n2,n3]`

use tenscomp::metrics::rel_error;
use tenscomp::solver::{generate_mask, Method, Solver, SolverConfig};
use tenscomp::synthetic::low_tubal_rank;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let method: Method = args.get(1).map_or(Ok(Method::Bemcp), |s| s.parse())?;
    let rate: f64 = args.get(2).map_or(Ok(0.5), |s| s.parse())?;
    let seed: u64 = args.get(3).map_or(Ok(7), |s| s.parse())?;
    let mut cfg = SolverConfig::with_method(method);
    if let Some(mu) = args.get(4) {
        cfg.mu = mu.parse()?;
    }

    let dims: Vec<usize> = match args.get(5) {
        Some(d) => d.split(',').map(|v| v.parse()).collect::<Result<_, _>>()?,
        None => vec![30, 30, 10],
    };
    let truth = low_tubal_rank(dims[0], dims[1], dims[2], 2, seed)?;
    let mask = generate_mask(truth.shape(), rate, seed)?;
    let z = truth.project(&mask)?;
    let mut solver = Solver::new(z, mask, cfg.clone())?;
    for _ in 0..cfg.max_iter {
        let rec = solver.step()?;
        let done = rec.inf_norm_diff <= cfg.eps;
        if rec.iter % 10 == 0 || done {
            println!(
                "{:4}  diff {:.3e}  rel_error {:.3e}  {:.2}s",
                rec.iter,
                rec.inf_norm_diff,
                rel_error(&solver.state().x, &truth)?,
                rec.elapsed_s
            );
        }
        if done {
            break;
        }
    }
    Ok(())
}
