//! Dense complex matrix helpers shared by the builders and checkers.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Dense complex matrix used for every operator in the crate.
pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::from_element(rows, cols, ZERO)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Diagonal 0/1 matrix selecting the given coordinates.
pub fn coordinate_projection(n: usize, keep: impl IntoIterator<Item = usize>) -> CMat {
    let mut m = zeros(n, n);
    for i in keep {
        m[(i, i)] = ONE;
    }
    m
}

/// Builds a dense matrix from `(row, col, value)` triplets. Builders assemble
/// their partial isometries this way; duplicate coordinates accumulate.
pub fn from_triplets(rows: usize, cols: usize, entries: &[(usize, usize, Complex64)]) -> CMat {
    let mut m = zeros(rows, cols);
    for &(r, c, v) in entries {
        m[(r, c)] += v;
    }
    m
}

pub fn adjoint(m: &CMat) -> CMat {
    m.adjoint()
}

/// Largest singular value. Empty matrices have norm zero.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.iter().all(|z| *z == ZERO) {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max)
}

/// Operator norm of a matrix known to be Hermitian, via its eigenvalues.
pub fn hermitian_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    if m.iter().all(|z| *z == ZERO) {
        return 0.0;
    }
    hermitian_eigenvalues(m)
        .iter()
        .fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Symmetrises `m` before decomposing so round-off asymmetry does not leak
/// into the spectrum.
fn hermitian_part(m: &CMat) -> CMat {
    let mut h = m + m.adjoint();
    h.scale_mut(0.5);
    h
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut vals: Vec<f64> = hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

/// Eigen-decomposition of a Hermitian matrix, eigenpairs sorted by descending
/// eigenvalue. Ties keep the solver's order, which is deterministic.
pub fn hermitian_eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    canonicalize_phases(&mut vecs);
    (vals, vecs)
}

/// Rotates each column so its largest-magnitude entry is real and positive.
/// Makes eigenvector output independent of the solver's phase choice.
pub fn canonicalize_phases(m: &mut CMat) {
    for j in 0..m.ncols() {
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for i in 0..m.nrows() {
            let a = m[(i, j)].norm();
            if a > best_abs + 1e-12 {
                best_abs = a;
                best = i;
            }
        }
        if best_abs > 0.0 {
            let phase = m[(best, j)].conj() / best_abs;
            for i in 0..m.nrows() {
                m[(i, j)] *= phase;
            }
        }
    }
}

/// Threshold for numerical rank decisions: `max(dim, 64) * eps * sigma_max`.
pub fn rank_threshold(dim: usize, sigma_max: f64) -> f64 {
    (dim.max(64) as f64) * f64::EPSILON * sigma_max
}

/// Columns `cols` of `m` as a new matrix.
pub fn select_columns(m: &CMat, cols: &[usize]) -> CMat {
    let mut out = zeros(m.nrows(), cols.len());
    for (k, &c) in cols.iter().enumerate() {
        out.set_column(k, &m.column(c));
    }
    out
}

/// Horizontal concatenation. All blocks must have `rows` rows.
pub fn hstack(rows: usize, blocks: &[&CMat]) -> CMat {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

/// Block-diagonal matrix of the given square or rectangular blocks.
pub fn block_diag(blocks: &[&CMat]) -> CMat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// `max |A*A - I|` entrywise: how far the columns are from orthonormal.
pub fn orthonormality_defect(cols: &CMat) -> f64 {
    let g = cols.adjoint() * cols;
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// Orthonormal basis for the orthogonal complement of the column span of
/// `cols` inside `C^n`.
pub fn orthogonal_complement(n: usize, cols: &CMat) -> CMat {
    if cols.ncols() == 0 {
        return identity(n);
    }
    let proj = cols * cols.adjoint();
    let comp = identity(n) - proj;
    let (vals, vecs) = hermitian_eigh(&comp);
    let keep: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.5).collect();
    select_columns(&vecs, &keep)
}

/// Orthonormal basis of the column span of `m`, dropping directions whose
/// singular value is below `tol`.
pub fn orthonormal_span(m: &CMat, tol: f64) -> CMat {
    let n = m.nrows();
    if m.ncols() == 0 || n == 0 {
        return zeros(n, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol)
        .collect();
    select_columns(&u, &keep)
}

/// Gram-Schmidt extension: appends to `basis` the components of `candidates`
/// orthogonal to it whose norm exceeds `tol`. Returns how many were added.
pub fn extend_orthonormal(basis: &mut Vec<nalgebra::DVector<Complex64>>, candidates: &CMat, tol: f64) -> usize {
    let mut added = 0;
    for j in 0..candidates.ncols() {
        let mut v = candidates.column(j).into_owned();
        // two passes keep the result orthogonal to working precision
        for _ in 0..2 {
            for b in basis.iter() {
                let c = b.dotc(&v);
                v -= b * c;
            }
        }
        let nrm = v.norm();
        if nrm > tol {
            v.unscale_mut(nrm);
            basis.push(v);
            added += 1;
        }
    }
    added
}

pub fn vectors_to_matrix(n: usize, vs: &[nalgebra::DVector<Complex64>]) -> CMat {
    let mut out = zeros(n, vs.len());
    for (k, v) in vs.iter().enumerate() {
        out.set_column(k, v);
    }
    out
}

/// Haar-distributed unitary via QR of a complex Gaussian matrix with the
/// phase of R's diagonal divided out.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    if n == 0 {
        return zeros(0, 0);
    }
    let g = CMat::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Hermitian matrix rounded to the nearest orthogonal projection: eigenvalues
/// above one half become one, the rest zero.
pub fn round_to_projection(m: &CMat) -> CMat {
    let n = m.nrows();
    if n == 0 {
        return zeros(0, 0);
    }
    if is_diagonal(m) {
        let keep: Vec<usize> = (0..n).filter(|&i| m[(i, i)].re > 0.5).collect();
        return coordinate_projection(n, keep);
    }
    let (vals, vecs) = hermitian_eigh(m);
    let keep: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.5).collect();
    let v = select_columns(&vecs, &keep);
    &v * v.adjoint()
}

pub fn is_diagonal(m: &CMat) -> bool {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j && m[(i, j)] != ZERO {
                return false;
            }
        }
    }
    true
}

/// If `m` is a diagonal 0/1 matrix, the kept coordinates.
pub fn as_coordinate_projection(m: &CMat) -> Option<Vec<usize>> {
    if !is_diagonal(m) {
        return None;
    }
    let mut keep = Vec::new();
    for i in 0..m.nrows() {
        let d = m[(i, i)];
        if d == ONE {
            keep.push(i);
        } else if d != ZERO {
            return None;
        }
    }
    Some(keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_unitary(12, &mut rng);
        assert!(orthonormality_defect(&u) < 1e-12);
    }

    #[test]
    fn complement_and_span_partition_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(6, &mut rng);
        let part = select_columns(&u, &[0, 2]);
        let comp = orthogonal_complement(6, &part);
        assert_eq!(comp.ncols(), 4);
        assert!(op_norm(&(part.adjoint() * &comp)) < 1e-12);
        let span = orthonormal_span(&(&part * CMat::from_element(2, 3, ONE)), 1e-10);
        assert_eq!(span.ncols(), 1);
    }

    #[test]
    fn norms_agree_on_hermitian_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_unitary(5, &mut rng);
        let h = &a + a.adjoint();
        assert!((op_norm(&h) - hermitian_norm(&h)).abs() < 1e-12);
    }

    #[test]
    fn shift_norm_is_one() {
        let mut s = zeros(4, 4);
        for i in 0..3 {
            s[(i + 1, i)] = ONE;
        }
        assert!((op_norm(&s) - 1.0).abs() < 1e-14);
        assert_eq!(op_norm(&zeros(3, 0)), 0.0);
    }
}
