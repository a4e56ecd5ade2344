use std::f64::consts::SQRT_2;

use anyhow::{bail, Result};
use oneway::instance::{Instance, InstanceFile};
use oneway::lsd::{
    angle_for_distance, generate_lsd, lsd_distance, lsd_optimal_proof, lsd_value, sampled_min_distance, LsdInstance,
};
use oneway::random::seeded_rng;
use oneway::Cell;

use crate::report::{fmt_opt, Outcome, Table};

pub struct LsdArgs {
    pub seed: u64,
    pub dim: usize,
    pub samples: usize,
}

/// Planted distances, as multiples of `sqrt 2`.
const PLANTED: [f64; 7] = [0.0, 0.05, 0.1, 0.5, 0.9, 0.95, 1.0];

const SAMPLING_TOL: f64 = 1e-3;
const EXACT_TOL: f64 = 1e-9;

pub fn run(file: Option<&InstanceFile>, args: &LsdArgs) -> Result<Outcome> {
    let mut rng = seeded_rng(args.seed);
    let cases: Vec<(Option<f64>, LsdInstance)> = match file {
        Some(f) => {
            let Instance::Lsd(inst) = &f.instance else {
                bail!("lsd needs an lsd instance, found {}", f.instance.kind());
            };
            vec![(None, inst.clone())]
        }
        None => PLANTED
            .iter()
            .map(|&m| {
                let d = m * SQRT_2;
                Ok((Some(d), generate_lsd(args.dim, angle_for_distance(d), &mut rng)?))
            })
            .collect::<Result<_>>()?,
    };

    let mut out = Outcome::new("lsd", Some(args.seed));
    let mut table = Table::new(
        "lsd",
        &["index", "dim", "planted_distance", "distance", "sampled_distance", "cosine", "optimal_acceptance", "value"],
    );
    for (i, (planted, inst)) in cases.iter().enumerate() {
        let replay = || {
            InstanceFile::new(Instance::Lsd(inst.clone()))
                .with_setting("command", "lsd")
                .with_setting("seed", args.seed)
                .with_setting("trials", args.samples)
        };
        let distance = lsd_distance(inst)?;
        let sampled = sampled_min_distance(inst, args.samples, &mut rng);
        let opt = lsd_optimal_proof(inst)?;
        let value = lsd_value(inst)?;
        if sampled < distance - EXACT_TOL {
            out.fail(format!("case {i}: sampled pair at distance {sampled} beats the formula {distance}"), replay);
        }
        if sampled - distance > SAMPLING_TOL {
            out.fail(format!("case {i}: sampling reached {sampled}, formula gives {distance}"), replay);
        }
        if (opt.acceptance - opt.cosine.powi(2)).abs() > EXACT_TOL {
            out.fail(format!("case {i}: optimal acceptance {} is not cos^2 = {}", opt.acceptance, opt.cosine.powi(2)), replay);
        }
        match value {
            Cell::One if opt.acceptance < 0.98 => {
                out.fail(format!("case {i}: close instance accepts only {}", opt.acceptance), replay);
            }
            Cell::Zero if opt.acceptance > 0.0361 + EXACT_TOL => {
                out.fail(format!("case {i}: far instance accepts {}", opt.acceptance), replay);
            }
            _ => {}
        }
        table.push(vec![
            i.to_string(),
            inst.dim().to_string(),
            fmt_opt(*planted),
            distance.to_string(),
            sampled.to_string(),
            opt.cosine.to_string(),
            opt.acceptance.to_string(),
            value.symbol().to_string(),
        ]);
    }
    out.summary.push(format!("lsd: {} instances, {} samples each", cases.len(), args.samples));
    out.tables.push(table);
    Ok(out)
}
