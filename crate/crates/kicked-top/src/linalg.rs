//! Thin wrappers over the system LAPACK for the two eigenproblems the
//! crate needs: Hermitian eigendecomposition (`zheev`) and eigenvalues of a
//! general complex matrix (`zgeev`). Everything else stays in ndarray.
//!
//! Matrices are marshalled to column-major buffers before the calls, so the
//! ndarray side can stay in the default row-major layout.

use ndarray::prelude::*;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = Array2<Complex64>;
pub type CVec = Array1<Complex64>;

#[link(name = "lapack")]
extern "C" {
    fn zheev_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        w: *mut f64,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
    fn zgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        w: *mut Complex64,
        vl: *mut Complex64,
        ldvl: *const i32,
        vr: *mut Complex64,
        ldvr: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
}

fn to_col_major(a: &CMat) -> Vec<Complex64> {
    let n = a.nrows();
    let mut buf = Vec::with_capacity(n * n);
    for c in 0..n {
        for r in 0..n {
            buf.push(a[[r, c]]);
        }
    }
    buf
}

/// Eigendecomposition of a Hermitian matrix. Returns ascending real
/// eigenvalues and the corresponding orthonormal eigenvectors as columns.
///
/// The caller is responsible for Hermiticity; this function only drives the
/// solver and surfaces LAPACK failures as [`Error::Numerical`].
pub fn eigh(h: &CMat) -> Result<(Array1<f64>, CMat)> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::Domain("eigh: matrix must be square".into()));
    }
    let ni = n as i32;
    let mut a = to_col_major(h);
    let mut w = vec![0.0f64; n];
    let mut rwork = vec![0.0f64; (3 * n).saturating_sub(2).max(1)];
    let mut info = 0i32;

    // workspace query, then the real call
    let mut wkopt = [Complex64::new(0.0, 0.0)];
    let query = -1i32;
    unsafe {
        zheev_(
            b"V".as_ptr(),
            b"L".as_ptr(),
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            wkopt.as_mut_ptr(),
            &query,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical(format!("zheev workspace query failed (info = {info})")));
    }
    let lwork = (wkopt[0].re as i32).max(1);
    let mut work = vec![Complex64::new(0.0, 0.0); lwork as usize];
    unsafe {
        zheev_(
            b"V".as_ptr(),
            b"L".as_ptr(),
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical(format!("zheev failed to converge (info = {info})")));
    }

    let mut v = CMat::zeros((n, n));
    for c in 0..n {
        for r in 0..n {
            v[[r, c]] = a[c * n + r];
        }
    }
    Ok((Array1::from(w), v))
}

/// Eigenvalues of a general complex square matrix (no eigenvectors).
pub fn eigvals(m: &CMat) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Domain("eigvals: matrix must be square".into()));
    }
    let ni = n as i32;
    let mut a = to_col_major(m);
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut rwork = vec![0.0f64; 2 * n];
    let mut info = 0i32;
    let mut dummy = [Complex64::new(0.0, 0.0)];
    let one = 1i32;

    let mut wkopt = [Complex64::new(0.0, 0.0)];
    let query = -1i32;
    unsafe {
        zgeev_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            dummy.as_mut_ptr(),
            &one,
            dummy.as_mut_ptr(),
            &one,
            wkopt.as_mut_ptr(),
            &query,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical(format!("zgeev workspace query failed (info = {info})")));
    }
    let lwork = (wkopt[0].re as i32).max(1);
    let mut work = vec![Complex64::new(0.0, 0.0); lwork as usize];
    unsafe {
        zgeev_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            dummy.as_mut_ptr(),
            &one,
            dummy.as_mut_ptr(),
            &one,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical(format!("zgeev failed to converge (info = {info})")));
    }
    Ok(w)
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for (x, y) in a.iter().zip(b.iter()) {
        worst = worst.max((x - y).norm());
    }
    worst
}

/// Deviation of `h` from Hermiticity, max |h - h†|.
pub fn hermiticity_defect(h: &CMat) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            worst = worst.max((h[[r, c]] - h[[c, r]].conj()).norm());
        }
    }
    worst
}

/// Deviation of `u` from unitarity, max |u†u - I|.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let prod = u.t().mapv(|z| z.conj()).dot(u);
    let n = u.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let want = if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((prod[[r, c]] - want).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_two_by_two() {
        let h = array![
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, -0.5)],
            [Complex64::new(0.0, 0.5), Complex64::new(1.0, 0.0)]
        ];
        let (w, v) = eigh(&h).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-14);
        assert!((w[1] - 1.5).abs() < 1e-14);
        let hv = h.dot(&v);
        for c in 0..2 {
            for r in 0..2 {
                assert!((hv[[r, c]] - v[[r, c]] * w[c]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn eigvals_rotation() {
        let u = array![
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            [Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0)]
        ];
        let mut phases: Vec<f64> = eigvals(&u).unwrap().iter().map(|z| z.arg()).collect();
        phases.sort_by(f64::total_cmp);
        assert!((phases[0] + std::f64::consts::FRAC_PI_2).abs() < 1e-14);
        assert!((phases[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn defects_detect_structure() {
        let good = array![
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
            [Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)]
        ];
        assert!(hermiticity_defect(&good) == 0.0);
        let bad = array![
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)],
            [Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)]
        ];
        assert!(hermiticity_defect(&bad) > 1.9);
    }
}
