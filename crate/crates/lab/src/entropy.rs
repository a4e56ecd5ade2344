use anyhow::{bail, Result};
use oneway::inequalities::{check, sweep, Inequality};
use oneway::instance::{Instance, InstanceFile};
use oneway::random::seeded_rng;

use crate::report::{Outcome, Table};

/// Each suite draws from its own stream: `seed + index`.
pub fn run(seed: u64, trials: usize) -> Result<Outcome> {
    let mut out = Outcome::new("entropy-check", Some(seed));
    let mut table = Table::new("entropy_check", &["inequality", "seed", "trials", "failures", "infinite_cases", "passed"]);
    for (i, inequality) in Inequality::ALL.into_iter().enumerate() {
        let suite_seed = seed.wrapping_add(i as u64);
        let report = sweep(inequality, trials, &mut seeded_rng(suite_seed))?;
        if let Some((pair, c)) = &report.first_failure {
            out.fail(format!("{inequality}: lhs {} > rhs {}", c.lhs, c.rhs), || {
                InstanceFile::new(Instance::Pair(pair.clone()))
                    .with_setting("command", "entropy-check")
                    .with_setting("inequality", inequality)
            });
        }
        out.summary.push(format!("{inequality}: {}/{} failures", report.failures, report.trials));
        table.push(vec![
            inequality.to_string(),
            suite_seed.to_string(),
            report.trials.to_string(),
            report.failures.to_string(),
            report.infinite_cases.to_string(),
            report.passed().to_string(),
        ]);
    }
    out.tables.push(table);
    Ok(out)
}

/// Re-evaluates one stored case.
pub fn replay_pair(file: &InstanceFile) -> Result<Outcome> {
    let Instance::Pair(pair) = &file.instance else {
        bail!("entropy-check replay needs a pair instance, found {}", file.instance.kind());
    };
    let names: Vec<Inequality> = match file.run.get("inequality") {
        Some(name) => vec![Inequality::from_name(name).ok_or_else(|| anyhow::anyhow!("unknown inequality `{name}`"))?],
        None => Inequality::ALL.to_vec(),
    };
    let mut out = Outcome::new("entropy-check", None);
    let mut table = Table::new("entropy_replay", &["inequality", "lhs", "rhs", "holds"]);
    for inequality in names {
        let c = check(inequality, pair)?;
        if !c.holds() {
            out.fail(format!("{inequality}: lhs {} > rhs {}", c.lhs, c.rhs), || file.clone());
        }
        table.push(vec![inequality.to_string(), c.lhs.to_string(), c.rhs.to_string(), c.holds().to_string()]);
    }
    out.tables.push(table);
    Ok(out)
}
