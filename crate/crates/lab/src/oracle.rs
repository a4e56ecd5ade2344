use anyhow::{bail, Result};
use oneway::instance::{Instance, InstanceFile};
use oneway::oracle::{distinct_rows, exact_one_way_cost};

use crate::report::{Outcome, Table};

pub fn run(file: &InstanceFile, exact_limit: usize) -> Result<Outcome> {
    let function = match &file.instance {
        Instance::Function(f) | Instance::Protocol { function: f, .. } => f,
        other => bail!("oracle needs a function or protocol instance, found {}", other.kind()),
    };
    let graph = distinct_rows(function);
    let cost = exact_one_way_cost(function, exact_limit);
    let components = graph.components();
    let largest = components.iter().map(Vec::len).max().unwrap_or(0);

    let mut out = Outcome::new("oracle", None);
    let mut table = Table::new(
        "oracle",
        &["rows", "cols", "conflict_edges", "components", "largest_component", "messages", "bits", "exact"],
    );
    table.push(vec![
        function.x_count().to_string(),
        function.y_count().to_string(),
        graph.edges().len().to_string(),
        components.len().to_string(),
        largest.to_string(),
        cost.messages.to_string(),
        cost.bits.to_string(),
        cost.exact.to_string(),
    ]);
    out.summary.push(format!(
        "oracle: chi = {}{} -> {} bits",
        cost.messages,
        if cost.exact { "" } else { " (greedy upper bound)" },
        cost.bits
    ));
    out.tables.push(table);
    Ok(out)
}
