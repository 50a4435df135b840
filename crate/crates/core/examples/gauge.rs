//! Gauge covariance of the backward-path family: `U_z S_e U_z* = z S_e`.

use ckbench::family::{gauge_unitary, rho_on_basis};
use ckbench::graph::{enumerate_backward_basis, select_tails, Graph};
use ckbench::linalg::op_norm;
use num_complex::Complex64;

fn main() -> ckbench::Result<()> {
    let g = Graph::new(&["u", "v"], &[("e", "u", "v"), ("f", "v", "u"), ("h", "v", "v")])?;
    let basis = enumerate_backward_basis(&g, &select_tails(&g), 4)?;
    let fam = rho_on_basis(&g, &basis)?;
    println!("{} backward symbols", basis.len());
    for k in 1..=4 {
        let z = Complex64::from_polar(1.0, 0.7 * k as f64);
        let u = gauge_unitary(&basis, z)?;
        let worst = g
            .edge_ids()
            .map(|e| op_norm(&(u.conjugate(fam.s(e)) - fam.s(e) * z)))
            .fold(0.0, f64::max);
        println!("z = {z:.3}: max residual {worst:.2e}");
    }
    Ok(())
}
