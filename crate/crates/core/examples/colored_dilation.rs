//! Two-colored loop: a truncated shift in one color, a unitary in the other.
//! Both colors are dilated to full CK at once.

use ckbench::dilate::colored_full_ck_dilation;
use ckbench::suite::shift_and_unitary_family;
use ckbench::verify::check_relations;
use ckbench::wold::max_full_ck_subspace;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ckbench::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let fam = shift_and_unitary_family(&mut rng, 3)?;
    let m = max_full_ck_subspace(&fam)?;
    println!("largest full-CK reducing subspace: {} of {}", m.subspace.ncols(), fam.dim());

    let (dil, cert) = colored_full_ck_dilation(&fam, 3)?;
    for c in &check_relations(&dil).colors {
        println!("color {}: {}", c.color, c.classification);
    }
    println!(
        "dimension {} -> {}, compression error {:.2e}, depth {}{}",
        fam.dim(),
        dil.dim(),
        cert.compression_error,
        cert.depth,
        if cert.complete { "" } else { " (partial)" }
    );
    Ok(())
}
