//! Test pencils: Grcar, damped mass-spring chain, scaled Gaussian, and
//! rank truncation of the leading coefficient.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::manifold::gaussian_matrix;
use crate::pencil::{CMatrix, Field, Pencil};

fn require_positive(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidArgument("size must be at least 1".into()));
    }
    Ok(())
}

/// Banded Toeplitz Grcar matrix: ones on the main diagonal and three
/// superdiagonals, minus ones on the first subdiagonal.
pub fn grcar_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if j >= i && j <= i + 3 {
            1.0
        } else if i == j + 1 {
            -1.0
        } else {
            0.0
        }
    })
}

/// The real pencil `xI - M` with `M` the Grcar matrix.
pub fn gen_grcar(n: usize) -> Result<Pencil> {
    require_positive(n)?;
    Pencil::real(&(-grcar_matrix(n)), &DMatrix::identity(n, n))
}

/// Tridiagonal chain matrix with diagonal `w_i + w_{i+1}` (`w_{n+1} = 0`) and
/// off-diagonals `-w_{i+1}`.
pub fn chain_matrix(w: &[f64]) -> DMatrix<f64> {
    let n = w.len();
    let next = |i: usize| if i + 1 < n { w[i + 1] } else { 0.0 };
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            w[i] + next(i)
        } else if j == i + 1 {
            -w[j]
        } else if i == j + 1 {
            -w[i]
        } else {
            0.0
        }
    })
}

/// Mass, damping and stiffness matrices of the `n`-mass chain with
/// `m = c = k = [1, 2, ..., n]`.
pub fn oscillator_mck(n: usize) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let w: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let m = DMatrix::from_diagonal(&DVector::from_vec(w.clone()));
    (m, chain_matrix(&w), chain_matrix(&w))
}

/// Damped oscillator pencil of size `2n`: `B = diag(M, I)` and
/// `A = -(J - R) Q` with `J = [[0, -I], [I, 0]]`, `R = diag(C, -eps I)`,
/// `Q = diag(I, K)`, i.e. `A = [[C, K], [-I, -eps K]]`.
pub fn gen_oscillator(n: usize, eps: f64) -> Result<Pencil> {
    require_positive(n)?;
    let (m, c, k) = oscillator_mck(n);
    let id = DMatrix::<f64>::identity(n, n);
    let mut a = DMatrix::<f64>::zeros(2 * n, 2 * n);
    a.view_mut((0, 0), (n, n)).copy_from(&c);
    a.view_mut((0, n), (n, n)).copy_from(&k);
    a.view_mut((n, 0), (n, n)).copy_from(&(-&id));
    a.view_mut((n, n), (n, n)).copy_from(&(&k * -eps));
    let mut b = DMatrix::<f64>::zeros(2 * n, 2 * n);
    b.view_mut((0, 0), (n, n)).copy_from(&m);
    b.view_mut((n, n), (n, n)).copy_from(&id);
    Pencil::real(&a, &b)
}

/// Standard normal entries (real and imaginary parts for complex pencils),
/// scaled by `1 / (sqrt(2) n)`.
pub fn gen_gaussian<R: Rng + ?Sized>(n: usize, field: Field, rng: &mut R) -> Result<Pencil> {
    require_positive(n)?;
    let s = Complex64::new(1.0 / (2f64.sqrt() * n as f64), 0.0);
    let a = gaussian_matrix(n, field, rng) * s;
    let b = gaussian_matrix(n, field, rng) * s;
    Pencil::new(a, b, field)
}

/// Best rank-`r` approximation of a square matrix.
pub fn best_rank_approx(m: &CMatrix, r: usize) -> CMatrix {
    let svd = m.clone().svd(true, true);
    let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for &k in order.iter().take(r) {
        let s = Complex64::new(svd.singular_values[k], 0.0);
        out += u.column(k) * vt.row(k) * s;
    }
    out
}

/// Replace `B` by its best rank-`r` approximation.
pub fn truncate_rank(p: &Pencil, r: usize) -> Result<Pencil> {
    if r > p.n() {
        return Err(Error::InvalidArgument(format!("rank {r} exceeds size {}", p.n())));
    }
    let mut b = best_rank_approx(p.b(), r);
    if p.field() == Field::Real {
        b.iter_mut().for_each(|z| z.im = 0.0);
    }
    Pencil::new(p.a().clone(), b, p.field())
}
