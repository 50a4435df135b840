//! Writes a family document next to its graph, reads it back and compares.

use ckbench::family::build_cycle_exact;
use ckbench::io::{read_family, to_json, write_family, write_graph, GraphDoc};
use ckbench::suite::cycle_graph;

fn main() -> ckbench::Result<()> {
    let g = cycle_graph(3);
    let dir = std::env::temp_dir().join("ckbench-example");
    std::fs::create_dir_all(&dir)?;
    write_graph(&dir.join("cycle.json"), &g)?;
    let fam = build_cycle_exact(&g)?;
    let path = dir.join("family.json");
    write_family(&path, &fam, None)?;
    let back = read_family(&path)?;
    let same = fam.edge_operators() == back.edge_operators() && fam.projections() == back.projections();
    println!("{}", to_json(&GraphDoc::from_graph(&g))?);
    println!("wrote {}; bit-exact round trip: {same}", path.display());
    Ok(())
}
