use std::sync::Arc;

use ckbench::graph::Graph;
use ckbench::staralg::{normal_form_expression, parse_expression};

fn main() -> ckbench::Result<()> {
    let g = Arc::new(Graph::new(&["u", "v"], &[("e", "u", "v"), ("f", "v", "v")])?);
    for text in [
        "s*(e) s(e)",
        "s*(f) s(e)",
        "s(f) s(e) s*(e)",
        "(2+1i) s*(f) s(f) + p(u)",
        "s(e) s(f)",
    ] {
        let expr = parse_expression(&g, text)?;
        println!("{text:<28} = {}", normal_form_expression(&g, &expr)?.render());
    }
    if let Err(e) = parse_expression(&g, "s(e) s(x)") {
        println!("{e}");
    }
    Ok(())
}
