//! Symmetrical-component transform.
//!
//! Component ordering is always `[0, 1, 2]` (zero, positive, negative) and
//! phase ordering `[a, b, c]`, with `abc = A · s012`.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use num_complex::Complex64;

/// The rotation operator `a = 1∠120°`.
pub fn a() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI / 3.0)
}

/// `A = [[1,1,1],[1,a²,a],[1,a,a²]]`.
pub fn a_matrix() -> Matrix3<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let a = a();
    let a2 = a * a;
    Matrix3::new(one, one, one, one, a2, a, one, a, a2)
}

/// `A⁻¹ = ⅓·[[1,1,1],[1,a,a²],[1,a²,a]]`.
pub fn a_inv_matrix() -> Matrix3<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let a = a();
    let a2 = a * a;
    Matrix3::new(one, one, one, one, a, a2, one, a2, a) / Complex64::new(3.0, 0.0)
}

pub fn to_sequence(abc: [Complex64; 3]) -> [Complex64; 3] {
    let a = a();
    let a2 = a * a;
    let third = 1.0 / 3.0;
    [
        (abc[0] + abc[1] + abc[2]) * third,
        (abc[0] + a * abc[1] + a2 * abc[2]) * third,
        (abc[0] + a2 * abc[1] + a * abc[2]) * third,
    ]
}

pub fn to_phase(s: [Complex64; 3]) -> [Complex64; 3] {
    let a = a();
    let a2 = a * a;
    [
        s[0] + s[1] + s[2],
        s[0] + a2 * s[1] + a * s[2],
        s[0] + a * s[1] + a2 * s[2],
    ]
}

/// Phase-domain 3×3 matrix of a balanced element with sequence impedances
/// `z0` and `z1 = z2`: self `(z0 + 2 z1)/3`, mutual `(z0 − z1)/3`.
pub fn balanced_phase_matrix(z0: Complex64, z1: Complex64) -> Matrix3<Complex64> {
    let zs = (z0 + z1 * 2.0) / 3.0;
    let zm = (z0 - z1) / 3.0;
    Matrix3::new(zs, zm, zm, zm, zs, zm, zm, zm, zs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_pair_is_inverse() {
        let p = a_matrix() * a_inv_matrix();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((p[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn balanced_set_is_pure_positive() {
        let a = a();
        let s = to_sequence([Complex64::new(1.0, 0.0), a * a, a]);
        assert!(s[0].norm() < 1e-15 && s[2].norm() < 1e-15);
        assert!((s[1] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let back = to_phase(s);
        assert!((back[1] - a * a).norm() < 1e-15);
    }

    #[test]
    fn balanced_matrix_diagonalizes() {
        let z0 = Complex64::new(0.3, 1.2);
        let z1 = Complex64::new(0.1, 0.4);
        let s = a_inv_matrix() * balanced_phase_matrix(z0, z1) * a_matrix();
        assert!((s[(0, 0)] - z0).norm() < 1e-14);
        assert!((s[(1, 1)] - z1).norm() < 1e-14);
        assert!((s[(2, 2)] - z1).norm() < 1e-14);
        assert!(s[(0, 1)].norm() < 1e-14 && s[(1, 2)].norm() < 1e-14);
    }
}
