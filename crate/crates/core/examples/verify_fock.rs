//! Builds the truncated Fock family of a small graph and prints its relation report.

use ckbench::cli::render_report;
use ckbench::family::build_fock;
use ckbench::graph::Graph;
use ckbench::verify::check_relations;

fn main() -> ckbench::Result<()> {
    let g = Graph::new(&["u", "v"], &[("e", "u", "v"), ("f", "v", "v"), ("g", "v", "u")])?;
    let fam = build_fock(&g, 4)?;
    let report = check_relations(&fam);
    print!("{}", render_report(&report));
    Ok(())
}
