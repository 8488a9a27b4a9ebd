//! Small dense linear-algebra helpers shared across modules.

use crate::{C64, CMat};
use nalgebra::DVector;

/// Hermitian eigendecomposition: returns (eigenvalues, eigenvector columns),
/// eigenvalues ascending.
///
/// Implemented as cyclic Jacobi with complex plane rotations. nalgebra's
/// `symmetric_eigen` (both the real and complex paths) produced O(1)
/// reconstruction residuals on flux-pulse Hamiltonians with clustered
/// spectra, so the solver is hand-rolled; Jacobi is unconditionally stable
/// and the matrices here are small (≤ 64×64).
pub fn eigh(h: &CMat) -> (DVector<f64>, CMat) {
    let d = h.nrows();
    assert_eq!(d, h.ncols(), "eigh needs a square matrix");
    if h.iter().all(|z| z.im == 0.0) {
        // Flux Hamiltonians are real symmetric; the real rotation path is
        // about 4× cheaper than complex arithmetic.
        return eigh_real(h);
    }
    let mut a = h.clone();
    let mut v = CMat::identity(d, d);

    let scale = h.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1e-300);
    let tol = 1e-15 * scale;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in (p + 1)..d {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[(p, q)];
                let m = apq.norm();
                if m <= tol * 1e-2 {
                    continue;
                }
                // Unitary 2×2 rotation U = [[c, −s·w], [s·w̄, c]] with
                // w = a_pq/|a_pq| zeroes the (p,q) element; tan 2θ =
                // 2|a_pq|/(a_pp − a_qq).
                let w = apq / m;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = 0.5 * (2.0 * m).atan2(app - aqq);
                let (s, c) = theta.sin_cos();
                // Columns: A ← A·U, V ← V·U.
                for i in 0..d {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c + aiq * (w.conj() * s);
                    a[(i, q)] = aiq * c - aip * (w * s);
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c + viq * (w.conj() * s);
                    v[(i, q)] = viq * c - vip * (w * s);
                }
                // Rows: A ← U†·A.
                for i in 0..d {
                    let api = a[(p, i)];
                    let aqi = a[(q, i)];
                    a[(p, i)] = api * c + aqi * (w * s);
                    a[(q, i)] = aqi * c - api * (w.conj() * s);
                }
                // Clean the rotated pair against round-off drift.
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }

    // Sort ascending, carrying the eigenvector columns along.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let evals = DVector::from_iterator(d, order.iter().map(|&i| a[(i, i)].re));
    let mut evecs = CMat::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        evecs.column_mut(dst).copy_from(&v.column(src));
    }
    (evals, evecs)
}

/// Cyclic Jacobi for a real symmetric matrix (imaginary parts all zero),
/// operating on flat row-major storage for speed.
fn eigh_real(h: &CMat) -> (DVector<f64>, CMat) {
    let d = h.nrows();
    let mut a: Vec<f64> = (0..d * d).map(|k| h[(k / d, k % d)].re).collect();
    let mut v: Vec<f64> = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }

    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let tol = 1e-15 * scale;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in (p + 1)..d {
                off = off.max(a[p * d + q].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let theta = 0.5 * (2.0 * apq).atan2(a[p * d + p] - a[q * d + q]);
                let (s, c) = theta.sin_cos();
                for i in 0..d {
                    let aip = a[i * d + p];
                    let aiq = a[i * d + q];
                    a[i * d + p] = aip * c + aiq * s;
                    a[i * d + q] = aiq * c - aip * s;
                    let vip = v[i * d + p];
                    let viq = v[i * d + q];
                    v[i * d + p] = vip * c + viq * s;
                    v[i * d + q] = viq * c - vip * s;
                }
                for i in 0..d {
                    let api = a[p * d + i];
                    let aqi = a[q * d + i];
                    a[p * d + i] = api * c + aqi * s;
                    a[q * d + i] = aqi * c - api * s;
                }
                a[p * d + q] = 0.0;
                a[q * d + p] = 0.0;
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[i * d + i].total_cmp(&a[j * d + j]));
    let evals = DVector::from_iterator(d, order.iter().map(|&i| a[i * d + i]));
    let evecs = CMat::from_fn(d, d, |i, j| C64::new(v[i * d + order[j]], 0.0));
    (evals, evecs)
}

/// `exp(-i H t)` for Hermitian `H` via eigendecomposition (exact).
pub fn expm_i_h(h: &CMat, t: f64) -> CMat {
    let (evals, evecs) = eigh(h);
    expm_from_eigh(&evals, &evecs, t)
}

/// `exp(-i H t)` from a precomputed eigendecomposition of `H`.
pub fn expm_from_eigh(evals: &DVector<f64>, evecs: &CMat, t: f64) -> CMat {
    let mut scaled = evecs.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        let phase = C64::from_polar(1.0, -evals[j] * t);
        col *= phase;
    }
    scaled * evecs.adjoint()
}

/// Max-norm of `U†U − I` (deviation from unitarity).
pub fn unitarity_defect(u: &CMat) -> f64 {
    let p = u.adjoint() * u;
    let n = p.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((p[(i, j)] - expect).norm());
        }
    }
    worst
}

/// Reconstruction and orthonormality residuals of `eigh` on one matrix
/// (accuracy diagnostic used in tests).
#[cfg(test)]
pub fn eigh_residuals(h: &CMat) -> (f64, f64) {
    let d = h.nrows();
    let (evals, evecs) = eigh(h);
    let mut diag = CMat::zeros(d, d);
    for i in 0..d {
        diag[(i, i)] = C64::new(evals[i], 0.0);
    }
    let recon = (&evecs * diag * evecs.adjoint() - h).map(|z| z.norm()).max();
    (recon, unitarity_defect(&evecs))
}
