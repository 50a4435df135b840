//! Kills the defect at a singular vertex by adding a Fock summand.

use ckbench::dilate::{corner_norms, one_step_dilation, required_inflation};
use ckbench::family::build_fock;
use ckbench::graph::Graph;
use ckbench::verify::check_relations;

fn main() -> ckbench::Result<()> {
    let g = Graph::new(&["v"], &[("e", "v", "v")])?;
    let fam = build_fock(&g, 3)?;
    let v = g.vertex_id("v")?;
    let n = 3;
    let m = required_inflation(&fam, v, n)?;
    let (dil, cert) = one_step_dilation(&fam, v, m, n)?;
    println!("inflation {m}: dimension {} -> {}", fam.dim() * m, dil.dim());
    println!("defect at v before: {:.3}", check_relations(&fam).max_defect());
    println!("compression error {:.2e} over {} monomials", cert.compression_error, cert.monomials_checked);
    for (e, lower, upper) in corner_norms(&dil, &cert.embedding) {
        println!("corner of s_{}: lower {lower:.3}  upper {upper:.3}", g.edge_name(e));
    }
    Ok(())
}
