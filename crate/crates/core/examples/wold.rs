//! Hides two copies of π_v and an exact block behind a random unitary, then
//! recovers the multiplicities.

use ckbench::suite::random_planted;
use ckbench::wold::wold_decompose;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ckbench::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let planted = random_planted(&mut rng, 3, 4, 4, 2, 80);
    let fam = &planted.family;
    let w = wold_decompose(fam)?;
    println!("dimension {}", fam.dim());
    for ((v, found), (_, planted)) in w.multiplicities.iter().zip(&planted.alphas) {
        println!("{:<4} alpha {found}  (planted {planted})", fam.graph().vertex_name(*v));
    }
    println!(
        "complement {}  leakage {:.2e}  complement defect {:.2e}",
        w.complement.ncols(),
        w.diagnostics.leakage,
        w.diagnostics.complement_defect
    );
    Ok(())
}
