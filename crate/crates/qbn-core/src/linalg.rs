//! Dense linear-algebra helpers: matrix exponential, Hermitian eigenvalues,
//! spectral norm.

use nalgebra::DMatrix;
use num_complex::Complex64;

type CMat = DMatrix<Complex64>;

/// Matrix 1-norm (max absolute column sum).
pub fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|c| a.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with diagonal Padé
/// approximants (Higham 2005). Order is chosen from the 1-norm; order 13
/// with scaling is used beyond the last threshold.
pub fn expm(a: &CMat) -> CMat {
    assert_eq!(a.nrows(), a.ncols(), "expm needs a square matrix");
    let norm = one_norm(a);

    const THETA_3: f64 = 1.495585217958292e-2;
    const THETA_5: f64 = 2.539398330063230e-1;
    const THETA_7: f64 = 9.504178996162932e-1;
    const THETA_9: f64 = 2.097847961257068e0;
    const THETA_13: f64 = 5.371920351148152e0;

    if norm <= THETA_9 {
        let m = if norm <= THETA_3 {
            3
        } else if norm <= THETA_5 {
            5
        } else if norm <= THETA_7 {
            7
        } else {
            9
        };
        return pade(a, m);
    }

    let s = ((norm / THETA_13).log2().ceil()).max(0.0) as u32;
    let scaled = a.map(|z| z / 2f64.powi(s as i32));
    let mut f = pade(&scaled, 13);
    for _ in 0..s {
        f = &f * &f;
    }
    f
}

/// Diagonal Padé approximant `q_m(A)^{-1} p_m(A)` of `e^A`.
fn pade(a: &CMat, m: usize) -> CMat {
    let dim = a.nrows();
    let id = CMat::identity(dim, dim);
    let b: &[f64] = match m {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0],
        9 => &[
            17643225600.0,
            8821612800.0,
            2075673600.0,
            302702400.0,
            30270240.0,
            2162160.0,
            110880.0,
            3960.0,
            90.0,
            1.0,
        ],
        13 => &[
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ],
        _ => unreachable!("unsupported Padé order"),
    };

    let a2 = a * a;
    let (u, v) = if m <= 9 {
        // U = A (b_m A^{m−1} + … + b_1 I), V = b_{m−1} A^{m−1} + … + b_0 I
        // over even powers of A.
        let mut powers = vec![id.clone(), a2.clone()];
        while powers.len() < m.div_ceil(2) + 1 {
            let next = powers.last().unwrap() * &a2;
            powers.push(next);
        }
        let mut u_inner = CMat::zeros(dim, dim);
        let mut v = CMat::zeros(dim, dim);
        for (p, pow) in powers.iter().enumerate() {
            if 2 * p + 1 <= m {
                u_inner += pow.map(|z| z * b[2 * p + 1]);
            }
            if 2 * p <= m {
                v += pow.map(|z| z * b[2 * p]);
            }
        }
        (a * u_inner, v)
    } else {
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;
        let w1 = a6.map(|z| z * b[13]) + a4.map(|z| z * b[11]) + a2.map(|z| z * b[9]);
        let w2 = a6.map(|z| z * b[7])
            + a4.map(|z| z * b[5])
            + a2.map(|z| z * b[3])
            + id.map(|z| z * b[1]);
        let z1 = a6.map(|z| z * b[12]) + a4.map(|z| z * b[10]) + a2.map(|z| z * b[8]);
        let z2 = a6.map(|z| z * b[6])
            + a4.map(|z| z * b[4])
            + a2.map(|z| z * b[2])
            + id.map(|z| z * b[0]);
        let u = a * (&a6 * w1 + w2);
        let v = &a6 * z1 + z2;
        (u, v)
    };

    let num = &v + &u;
    let den = &v - &u;
    den.lu().solve(&num).expect("Padé denominator is singular")
}

/// Eigenvalues of a Hermitian matrix. The input is symmetrised first, so
/// small anti-Hermitian noise is tolerated.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    let herm = (a + a.adjoint()).map(|z| z * 0.5);
    herm.symmetric_eigen().eigenvalues.iter().copied().collect()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_hermitian_eigenvalue(a: &CMat) -> f64 {
    hermitian_eigenvalues(a).into_iter().fold(f64::INFINITY, f64::min)
}

/// Largest singular value, via the Hermitian eigenproblem for `A†A`.
pub fn spectral_norm(a: &CMat) -> f64 {
    let gram = a.adjoint() * a;
    let max = hermitian_eigenvalues(&gram).into_iter().fold(0.0, f64::max);
    max.max(0.0).sqrt()
}

/// Max-abs-entry distance between two complex matrices.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = CMat::zeros(4, 4);
        assert!(max_abs_diff(&expm(&z), &CMat::identity(4, 4)) < 1e-15);
    }

    #[test]
    fn expm_of_nilpotent() {
        // A = [[0,1],[0,0]] => e^A = I + A exactly
        let mut a = CMat::zeros(2, 2);
        a[(0, 1)] = Complex64::ONE;
        let e = expm(&a);
        let expected = CMat::identity(2, 2) + &a;
        assert!(max_abs_diff(&e, &expected) < 1e-15);
    }

    #[test]
    fn expm_of_diagonal() {
        let vals = [c(-0.3, 0.0), c(1.7, 0.0), c(0.0, 2.0), c(-4.0, -1.5)];
        let a = CMat::from_diagonal(&nalgebra::DVector::from_row_slice(&vals));
        let e = expm(&a);
        for (i, &v) in vals.iter().enumerate() {
            assert!((e[(i, i)] - v.exp()).norm() < 1e-13);
        }
        assert!(e[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn expm_rotation_generator() {
        // A = t·[[0,-1],[1,0]] => e^A = [[cos t, -sin t],[sin t, cos t]]
        let t = 0.7f64;
        let mut a = CMat::zeros(2, 2);
        a[(0, 1)] = c(-t, 0.0);
        a[(1, 0)] = c(t, 0.0);
        let e = expm(&a);
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-14);
        assert!((e[(0, 1)].re + t.sin()).abs() < 1e-14);
        assert!((e[(1, 0)].re - t.sin()).abs() < 1e-14);
    }

    #[test]
    fn expm_large_norm_uses_squaring() {
        // Diagonal with norm >> theta_13 still matches the scalar exponential.
        let vals = [c(-40.0, 0.0), c(-3.0, 25.0)];
        let a = CMat::from_diagonal(&nalgebra::DVector::from_row_slice(&vals));
        let e = expm(&a);
        for (i, &v) in vals.iter().enumerate() {
            assert!((e[(i, i)] - v.exp()).norm() < 1e-12 * v.exp().norm().max(1.0));
        }
    }

    #[test]
    fn expm_semigroup_property() {
        let a = CMat::from_fn(5, 5, |r, ch| c(((r * 7 + ch * 3) % 5) as f64 / 5.0 - 0.4, ((r + 2 * ch) % 3) as f64 / 10.0));
        let e1 = expm(&a);
        let half = a.map(|z| z * 0.5);
        let eh = expm(&half);
        assert!(max_abs_diff(&e1, &(&eh * &eh)) < 1e-13);
    }

    #[test]
    fn hermitian_eigenvalues_of_known_matrix() {
        // Pauli X has eigenvalues ±1
        let mut x = CMat::zeros(2, 2);
        x[(0, 1)] = Complex64::ONE;
        x[(1, 0)] = Complex64::ONE;
        let mut eigs = hermitian_eigenvalues(&x);
        eigs.sort_by(f64::total_cmp);
        assert!((eigs[0] + 1.0).abs() < 1e-14);
        assert!((eigs[1] - 1.0).abs() < 1e-14);
        assert!((min_hermitian_eigenvalue(&x) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn spectral_norm_of_rank_one() {
        // |u⟩⟨v| has spectral norm ‖u‖‖v‖
        let u = nalgebra::DVector::from_row_slice(&[c(1.0, 0.0), c(0.0, 2.0)]);
        let v = nalgebra::DVector::from_row_slice(&[c(3.0, 0.0), c(0.0, 0.0)]);
        let m = &u * v.adjoint();
        let expected = u.norm() * v.norm();
        assert!((spectral_norm(&m) - expected).abs() < 1e-12);
    }
}
