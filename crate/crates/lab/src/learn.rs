use anyhow::{bail, Result};
use oneway::instance::{Instance, InstanceFile};
use oneway::learner::{audit_progress, compile_deterministic_protocol, update_bound, DeterministicOneWay, LearnerConfig};
use oneway::oracle::{exact_one_way_cost, validate_compiled};
use oneway::protocol::QuantumOneWayProtocol;
use oneway::{Error, PartialFunction};

use crate::report::{Outcome, Table};

pub struct LearnArgs {
    pub epsilon: Option<f64>,
    pub dim_cap: usize,
    pub exact_limit: usize,
}

pub fn run(file: &InstanceFile, args: &LearnArgs) -> Result<Outcome> {
    let Instance::Protocol { function, protocol } = &file.instance else {
        bail!("learn needs a protocol instance, found {}", file.instance.kind());
    };
    if protocol.dim() > args.dim_cap {
        bail!("protocol dimension {} exceeds --dim-cap {}", protocol.dim(), args.dim_cap);
    }
    let epsilon = args.epsilon.unwrap_or(protocol.epsilon());
    let cfg = LearnerConfig::new(epsilon)?;
    let mut out = Outcome::new("learn", None);
    let replay = || replay_file(function, protocol, epsilon);
    let compiled = match compile_deterministic_protocol(protocol, function, &cfg) {
        Ok(c) => c,
        Err(e @ Error::Consistency { .. }) => {
            out.fail(e.to_string(), replay);
            return Ok(out);
        }
        Err(e) => return Err(e.into()),
    };

    let mut runs = Table::new(
        "learn_runs",
        &["x", "updates", "update_bound", "transcript_bits", "initial_entropy", "final_entropy", "final_trace_distance", "audit_passed"],
    );
    let mut audit = Table::new("learn_audit", &["x", "update", "step", "passed", "detail"]);
    for run in compiled.runs() {
        let report = audit_progress(run);
        runs.push(vec![
            run.x.to_string(),
            run.updates().to_string(),
            update_bound(run.initial_entropy, epsilon).to_string(),
            compiled.message(run.x).len().to_string(),
            run.initial_entropy.to_string(),
            run.final_entropy.to_string(),
            run.final_trace_distance.to_string(),
            report.passed().to_string(),
        ]);
        for line in &report.lines {
            audit.push(vec![
                run.x.to_string(),
                line.update.map(|u| u.to_string()).unwrap_or_default(),
                format!("{:?}", line.step),
                line.passed.to_string(),
                line.detail.clone(),
            ]);
        }
        if let Some(line) = report.first_failure() {
            out.fail(format!("x = {}: audit step {:?} failed: {}", run.x, line.step, line.detail), replay);
        }
    }

    let oracle = exact_one_way_cost(function, args.exact_limit);
    let distinct = compiled.distinct_messages();
    if let Some(c) = validate_compiled(&compiled, function)? {
        out.fail(format!("compiled protocol outputs {} at (x={}, y={}), f = {}", c.got, c.x, c.y, c.expected), replay);
    }
    if oracle.exact && oracle.messages > distinct {
        out.fail(format!("oracle chromatic number {} exceeds {distinct} distinct messages", oracle.messages), replay);
    }

    let mut summary = Table::new("learn_summary", &["quantity", "value"]);
    let cost = compiled.cost_bits();
    for (k, v) in [
        ("qubits", protocol.qubits().to_string()),
        ("epsilon", epsilon.to_string()),
        ("x_count", protocol.x_count().to_string()),
        ("y_count", protocol.y_count().to_string()),
        ("compiled_cost_bits", cost.to_string()),
        ("cost_bound_bits", compiled.cost_bound().to_string()),
        ("distinct_messages", distinct.to_string()),
        ("oracle_messages", oracle.messages.to_string()),
        ("oracle_bits", oracle.bits.to_string()),
        ("oracle_exact", oracle.exact.to_string()),
    ] {
        summary.push(vec![k.to_string(), v]);
    }
    out.summary.push(format!(
        "learn: {} inputs, compiled cost {cost} bits (bound {:.1}), {distinct} distinct messages, oracle {} bits",
        protocol.x_count(),
        compiled.cost_bound(),
        oracle.bits
    ));
    out.tables = vec![runs, audit, summary];
    Ok(out)
}

fn replay_file(function: &PartialFunction, protocol: &QuantumOneWayProtocol, epsilon: f64) -> InstanceFile {
    InstanceFile::new(Instance::Protocol { function: function.clone(), protocol: protocol.clone() })
        .with_setting("command", "learn")
        .with_setting("epsilon", epsilon)
}
