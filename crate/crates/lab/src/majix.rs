use anyhow::{bail, Result};
use oneway::instance::{Instance, InstanceFile};
use oneway::majix::{
    acceptance_closed_form, acceptance_simulated, bob_to_alice_monte_carlo, generate_instance, honest_proof,
    majix_value, optimal_cheat, repeated_soundness, zero_threshold, MajIxInstance, MajIxTarget, SOUNDNESS_BOUND,
};
use oneway::random::seeded_rng;
use oneway::Cell;

use crate::report::{fmt_opt, Outcome, Table};

pub struct MajIxArgs {
    pub seed: u64,
    pub n: usize,
    pub instances: usize,
    pub trials: u64,
    pub reps: u32,
}

const EXACT_TOL: f64 = 1e-9;

fn value_symbol(c: Cell) -> String {
    c.symbol().to_string()
}

/// With no file: `instances` 1-inputs, then one instance for every `k` from 0 to `sqrt(n) - 1`.
fn instances(file: Option<&InstanceFile>, args: &MajIxArgs) -> Result<Vec<MajIxInstance>> {
    if let Some(file) = file {
        let Instance::MajIx(inst) = &file.instance else {
            bail!("majix needs a majix instance, found {}", file.instance.kind());
        };
        return Ok(vec![inst.clone()]);
    }
    let mut rng = seeded_rng(args.seed);
    let root = (args.n as f64).sqrt().round() as usize;
    let mut out = Vec::new();
    for _ in 0..args.instances {
        out.push(generate_instance(args.n, MajIxTarget::One, &mut rng)?);
    }
    for k in 0..root {
        let target = if k <= zero_threshold(root) { MajIxTarget::Zero { ones: k } } else { MajIxTarget::Undefined { ones: k } };
        out.push(generate_instance(args.n, target, &mut rng)?);
    }
    Ok(out)
}

pub fn run(file: Option<&InstanceFile>, args: &MajIxArgs) -> Result<Outcome> {
    let all = instances(file, args)?;
    let mut out = Outcome::new("majix", Some(args.seed));
    let replay = |inst: &MajIxInstance| {
        let inst = inst.clone();
        let (seed, trials, reps) = (args.seed, args.trials, args.reps);
        move || {
            InstanceFile::new(Instance::MajIx(inst))
                .with_setting("command", "majix")
                .with_setting("seed", seed)
                .with_setting("trials", trials)
                .with_setting("reps", reps)
        }
    };

    let mut table = Table::new(
        "majix_instances",
        &["index", "n", "k", "value", "honest_simulated", "honest_closed_form", "cheat_optimum", "k_over_root", "soundness_bound"],
    );
    let mut undefined_ks = Vec::new();
    for (i, inst) in all.iter().enumerate() {
        let value = majix_value(inst);
        let (mut sim, mut closed) = (None, None);
        if value == Cell::One {
            let proof = honest_proof(inst)?;
            let (s, c) = (acceptance_simulated(inst, &proof)?, acceptance_closed_form(inst, &proof)?);
            if (s - 1.0).abs() > EXACT_TOL || (c - 1.0).abs() > EXACT_TOL {
                out.fail(format!("instance {i}: honest acceptance {s} (closed form {c}) is not 1"), replay(inst));
            }
            (sim, closed) = (Some(s), Some(c));
        }
        if value == Cell::Undefined {
            undefined_ks.push(inst.ones_in_index());
        }
        let cheat = optimal_cheat(inst)?;
        if (cheat.value - cheat.closed_form).abs() > EXACT_TOL {
            out.fail(format!("instance {i}: cheat optimum {} differs from k/sqrt(n) = {}", cheat.value, cheat.closed_form), replay(inst));
        }
        if value == Cell::Zero && cheat.value > SOUNDNESS_BOUND + EXACT_TOL {
            out.fail(format!("instance {i}: 0-input accepted with probability {}", cheat.value), replay(inst));
        }
        table.push(vec![
            i.to_string(),
            inst.n().to_string(),
            inst.ones_in_index().to_string(),
            value_symbol(value),
            fmt_opt(sim),
            fmt_opt(closed),
            cheat.value.to_string(),
            cheat.closed_form.to_string(),
            SOUNDNESS_BOUND.to_string(),
        ]);
    }

    let mut mc = Table::new("majix_monte_carlo", &["seed", "n", "k", "reps", "trials", "acceptance", "bound", "bound_plus_3se"]);
    let mut picks: Vec<&MajIxInstance> = Vec::new();
    if let Some(one) = all.iter().find(|i| majix_value(i) == Cell::One) {
        picks.push(one);
    }
    // The 0-input with the most ones is the boundary case.
    if let Some(zero) = all.iter().filter(|i| majix_value(i) == Cell::Zero).max_by_key(|i| i.ones_in_index()) {
        picks.push(zero);
    }
    if file.is_some() && picks.is_empty() {
        picks.push(&all[0]);
    }
    for (j, inst) in picks.into_iter().enumerate() {
        let seed = args.seed.wrapping_add(1 + j as u64);
        let row = bob_to_alice_monte_carlo(inst, args.reps, args.trials, seed)?;
        let value = majix_value(inst);
        let bound = if value == Cell::One { 1.0 } else { repeated_soundness(args.reps) };
        let limit = bound + 3.0 * row.standard_error(bound);
        match value {
            Cell::One if row.acceptance != 1.0 => {
                out.fail(format!("B->A completeness {} on a 1-input", row.acceptance), replay(inst));
            }
            Cell::Zero if row.acceptance > limit => {
                out.fail(format!("B->A acceptance {} exceeds {limit} on a 0-input", row.acceptance), replay(inst));
            }
            _ => {}
        }
        mc.push(vec![
            row.seed.to_string(),
            row.n.to_string(),
            row.k.to_string(),
            row.reps.to_string(),
            row.trials.to_string(),
            row.acceptance.to_string(),
            bound.to_string(),
            limit.to_string(),
        ]);
    }

    out.summary.push(format!(
        "majix: {} instances, undefined region at k = {:?}, soundness after {} repetitions {:.4}",
        all.len(),
        undefined_ks,
        args.reps,
        repeated_soundness(args.reps)
    ));
    out.tables = vec![table, mc];
    Ok(out)
}
