//! Dilates a planted family to a full Cuntz-Krieger family and checks the
//! compression certificate.

use ckbench::dilate::full_ck_dilation;
use ckbench::suite::random_planted;
use ckbench::verify::check_relations;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ckbench::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let fam = random_planted(&mut rng, 3, 4, 4, 1, 60).family;
    let (dil, cert) = full_ck_dilation(&fam, 5)?;
    println!("{} -> {}", check_relations(&fam).classification, check_relations(&dil).classification);
    println!("dimension {} -> {}", fam.dim(), dil.dim());
    println!(
        "compression error {:.2e} (degree <= {}, {} monomials), max defect {:.2e}",
        cert.compression_error, cert.max_degree, cert.monomials_checked, cert.max_defect
    );
    Ok(())
}
