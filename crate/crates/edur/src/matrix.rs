//! Exact complex 2x2 linear algebra: Pauli basis, rotations, Hermitian
//! eigendecomposition, matrix square root and trace norm.
//!
//! Everything here is closed-form; no iterative solvers are involved at
//! this fixed size.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{EdurError, Result};

/// Absolute tolerance for Hermiticity checks (max-entry norm).
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Eigenvalues closer than this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-14;

/// Complex scalar used throughout.
pub type C = Complex64;

/// Shorthand constructor.
#[inline]
pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// One of the Pauli matrices or the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
    Identity,
}

/// Dense 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2 {
    pub entries: [[C; 2]; 2],
}

impl Matrix2 {
    pub fn new(a: C, b: C, c: C, d: C) -> Self {
        Self {
            entries: [[a, b], [c, d]],
        }
    }

    pub fn zero() -> Self {
        Self::new(C::ZERO, C::ZERO, C::ZERO, C::ZERO)
    }

    pub fn identity() -> Self {
        Self::new(C::ONE, C::ZERO, C::ZERO, C::ONE)
    }

    /// Standard Pauli matrix (or the identity).
    pub fn pauli(axis: PauliAxis) -> Self {
        match axis {
            PauliAxis::X => Self::new(C::ZERO, C::ONE, C::ONE, C::ZERO),
            PauliAxis::Y => Self::new(C::ZERO, c(0.0, -1.0), c(0.0, 1.0), C::ZERO),
            PauliAxis::Z => Self::new(C::ONE, C::ZERO, C::ZERO, -C::ONE),
            PauliAxis::Identity => Self::identity(),
        }
    }

    /// Spin rotation about the x axis: exp(-i angle sigma_x / 2).
    ///
    /// On the Bloch sphere this sends (y, z) to
    /// (y cos a - z sin a, y sin a + z cos a).
    pub fn rotation_about_x(angle: f64) -> Self {
        let h = 0.5 * angle;
        let (s, cs) = h.sin_cos();
        Self::new(c(cs, 0.0), c(0.0, -s), c(0.0, -s), c(cs, 0.0))
    }

    /// Outer product |u><v| of two 2-vectors.
    pub fn outer(u: [C; 2], v: [C; 2]) -> Self {
        Self::new(
            u[0] * v[0].conj(),
            u[0] * v[1].conj(),
            u[1] * v[0].conj(),
            u[1] * v[1].conj(),
        )
    }

    pub fn scale(&self, s: C) -> Self {
        let e = &self.entries;
        Self::new(e[0][0] * s, e[0][1] * s, e[1][0] * s, e[1][1] * s)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let e = &self.entries;
        Self::new(
            e[0][0].conj(),
            e[1][0].conj(),
            e[0][1].conj(),
            e[1][1].conj(),
        )
    }

    pub fn trace(&self) -> C {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn det(&self) -> C {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: [C; 2]) -> [C; 2] {
        let e = &self.entries;
        [
            e[0][0] * v[0] + e[0][1] * v[1],
            e[1][0] * v[0] + e[1][1] * v[1],
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Max-entry deviation from Hermiticity.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = *self - self.adjoint();
        d.entries
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Max-entry distance to another matrix.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let d = *self - *other;
        d.entries
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Decompose into the Pauli basis: M = c0 1 + cx sx + cy sy + cz sz.
    ///
    /// Coefficients are complex in general; real for Hermitian input.
    pub fn pauli_coefficients(&self) -> [C; 4] {
        let e = &self.entries;
        let half = c(0.5, 0.0);
        [
            (e[0][0] + e[1][1]) * half,
            (e[0][1] + e[1][0]) * half,
            (e[0][1] - e[1][0]) * half * c(0.0, 1.0),
            (e[0][0] - e[1][1]) * half,
        ]
    }

    /// Eigendecomposition of a Hermitian matrix.
    ///
    /// Returns eigenvalues in descending order with orthonormal
    /// eigenvectors; degenerate spectra get the canonical basis.
    pub fn hermitian_eig(&self) -> Result<([f64; 2], [[C; 2]; 2])> {
        if !self.is_finite() {
            return Err(EdurError::NonFinite {
                context: "hermitian_eig",
            });
        }
        let dev = self.hermiticity_deviation();
        if dev > HERMITICITY_TOL {
            return Err(EdurError::NotHermitian { deviation: dev });
        }
        let a = self.entries[0][0].re;
        let d = self.entries[1][1].re;
        // Symmetrize off-diagonal rounding before using it.
        let b = (self.entries[0][1] + self.entries[1][0].conj()).scale(0.5);
        let mean = 0.5 * (a + d);
        let disc = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        let hi = mean + disc;
        let lo = mean - disc;

        if disc < DEGENERACY_TOL {
            return Ok(([hi, lo], [[C::ONE, C::ZERO], [C::ZERO, C::ONE]]));
        }

        let v_hi = eigenvector(a, d, b, hi);
        // The second eigenvector is the orthogonal complement; this keeps
        // the pair orthonormal to machine precision.
        let v_lo = [-v_hi[1].conj(), v_hi[0].conj()];
        Ok(([hi, lo], [v_hi, v_lo]))
    }

    /// Square root of a Hermitian positive semidefinite matrix.
    ///
    /// Eigenvalues in (-1e-12, 0) are clamped to zero; anything below
    /// that is rejected.
    pub fn psd_sqrt(&self) -> Result<Matrix2> {
        let (vals, vecs) = self.hermitian_eig()?;
        let mut roots = [0.0; 2];
        for (r, &v) in roots.iter_mut().zip(vals.iter()) {
            if v < -1e-12 {
                return Err(EdurError::NotPositiveSemidefinite { eigenvalue: v });
            }
            *r = v.max(0.0).sqrt();
        }
        let mut out = Matrix2::zero();
        for i in 0..2 {
            out = out + Matrix2::outer(vecs[i], vecs[i]).scale(c(roots[i], 0.0));
        }
        Ok(out)
    }

    /// Trace norm Tr|M| = Tr sqrt(M^dag M), the sum of singular values.
    pub fn trace_abs(&self) -> Result<f64> {
        if !self.is_finite() {
            return Err(EdurError::NonFinite {
                context: "trace_abs",
            });
        }
        let gram = self.adjoint() * *self;
        let (vals, _) = gram.hermitian_eig()?;
        Ok(vals.iter().map(|v| v.max(0.0).sqrt()).sum())
    }
}

/// Eigenvector of [[a, b], [conj(b), d]] for eigenvalue lambda, normalized.
fn eigenvector(a: f64, d: f64, b: C, lambda: f64) -> [C; 2] {
    // Pick the numerically larger of the two defining rows.
    let r1 = ((a - lambda) * (a - lambda) + b.norm_sqr()).sqrt();
    let r2 = ((d - lambda) * (d - lambda) + b.norm_sqr()).sqrt();
    let v = if r1 >= r2 {
        // (a - lambda) v0 + b v1 = 0
        [b, c(lambda - a, 0.0)]
    } else {
        // conj(b) v0 + (d - lambda) v1 = 0
        [c(lambda - d, 0.0), b.conj()]
    };
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / norm, v[1] / norm]
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, rhs: Matrix2) -> Matrix2 {
        let (a, b) = (&self.entries, &rhs.entries);
        Matrix2::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, rhs: Matrix2) -> Matrix2 {
        let (a, b) = (&self.entries, &rhs.entries);
        Matrix2::new(
            a[0][0] - b[0][0],
            a[0][1] - b[0][1],
            a[1][0] - b[1][0],
            a[1][1] - b[1][1],
        )
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, rhs: Matrix2) -> Matrix2 {
        let (a, b) = (&self.entries, &rhs.entries);
        Matrix2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Neg for Matrix2 {
    type Output = Matrix2;
    fn neg(self) -> Matrix2 {
        self.scale(-C::ONE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn sx() -> Matrix2 {
        Matrix2::pauli(PauliAxis::X)
    }
    fn sy() -> Matrix2 {
        Matrix2::pauli(PauliAxis::Y)
    }
    fn sz() -> Matrix2 {
        Matrix2::pauli(PauliAxis::Z)
    }

    #[test]
    fn pauli_z_is_diag() {
        let m = sz();
        assert_eq!(m.entries[0][0], C::ONE);
        assert_eq!(m.entries[1][1], -C::ONE);
        assert_eq!(m.entries[0][1], C::ZERO);
    }

    #[test]
    fn pauli_squares_to_identity() {
        for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
            let m = Matrix2::pauli(axis);
            assert!((m * m).max_abs_diff(&Matrix2::identity()) < 1e-15);
        }
    }

    #[test]
    fn commutator_z_y() {
        // [sz, sy] = -2i sx, checked against direct multiplication.
        let lhs = sz().commutator(&sy());
        let rhs = sx().scale(c(0.0, -2.0));
        assert!(lhs.max_abs_diff(&rhs) < 1e-15);
    }

    #[test]
    fn rotation_zero_is_identity() {
        assert!(Matrix2::rotation_about_x(0.0).max_abs_diff(&Matrix2::identity()) < 1e-15);
    }

    #[test]
    fn rotation_is_unitary() {
        let u = Matrix2::rotation_about_x(0.7321);
        assert!((u * u.adjoint()).max_abs_diff(&Matrix2::identity()) < 1e-12);
    }

    #[test]
    fn rotation_pi_flips_z() {
        // Bloch (0,0,1) -> (0,0,-1)
        let u = Matrix2::rotation_about_x(std::f64::consts::PI);
        let rho = (Matrix2::identity() + sz()).scale(c(0.5, 0.0));
        let out = u * rho * u.adjoint();
        let expect = (Matrix2::identity() - sz()).scale(c(0.5, 0.0));
        assert!(out.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn rotation_half_pi_sends_z_to_minus_y() {
        let u = Matrix2::rotation_about_x(std::f64::consts::FRAC_PI_2);
        let rho = (Matrix2::identity() + sz()).scale(c(0.5, 0.0));
        let out = u * rho * u.adjoint();
        let expect = (Matrix2::identity() - sy()).scale(c(0.5, 0.0));
        assert!(out.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn eig_pauli_z() {
        let (vals, vecs) = sz().hermitian_eig().unwrap();
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], -1.0, epsilon = 1e-14);
        assert!(vecs[0][0].norm() > 0.999);
        assert!(vecs[1][1].norm() > 0.999);
    }

    #[test]
    fn eig_mixed_state() {
        // (1 + 0.5 sx)/2 has eigenvalues 0.75 and 0.25.
        let m = (Matrix2::identity() + sx().scale(c(0.5, 0.0))).scale(c(0.5, 0.0));
        let (vals, _) = m.hermitian_eig().unwrap();
        assert_abs_diff_eq!(vals[0], 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], 0.25, epsilon = 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = Matrix2::new(C::ONE, C::ONE, C::ZERO, C::ONE);
        assert!(matches!(
            m.hermitian_eig(),
            Err(EdurError::NotHermitian { .. })
        ));
    }

    #[test]
    fn psd_sqrt_identity() {
        let r = Matrix2::identity().psd_sqrt().unwrap();
        assert!(r.max_abs_diff(&Matrix2::identity()) < 1e-12);
    }

    #[test]
    fn psd_sqrt_projector_is_itself() {
        let p = (Matrix2::identity() + sx()).scale(c(0.5, 0.0));
        let r = p.psd_sqrt().unwrap();
        assert!(r.max_abs_diff(&p) < 1e-10);
    }

    #[test]
    fn psd_sqrt_eigenvalues() {
        let m = (Matrix2::identity() + sx().scale(c(0.5, 0.0))).scale(c(0.5, 0.0));
        let (vals, _) = m.psd_sqrt().unwrap().hermitian_eig().unwrap();
        assert_abs_diff_eq!(vals[0], 0.75f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 0.25f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn psd_sqrt_rejects_negative() {
        assert!(matches!(
            sz().psd_sqrt(),
            Err(EdurError::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn trace_abs_pauli_z() {
        assert_abs_diff_eq!(sz().trace_abs().unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_abs_zero() {
        assert_abs_diff_eq!(Matrix2::zero().trace_abs().unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn trace_abs_sx_times_rho_x() {
        // sx * (1 + alpha sx)/2 = (sx + alpha)/2, eigenvalues (alpha +- 1)/2.
        for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let rho = (Matrix2::identity() + sx().scale(c(alpha, 0.0))).scale(c(0.5, 0.0));
            let m = sx() * rho;
            assert_abs_diff_eq!(m.trace_abs().unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    prop_compose! {
        fn arb_hermitian()(
            a in -3.0f64..3.0,
            d in -3.0f64..3.0,
            br in -3.0f64..3.0,
            bi in -3.0f64..3.0,
        ) -> Matrix2 {
            Matrix2::new(c(a, 0.0), c(br, bi), c(br, -bi), c(d, 0.0))
        }
    }

    proptest! {
        #[test]
        fn eig_reconstructs_input(m in arb_hermitian()) {
            let (vals, vecs) = m.hermitian_eig().unwrap();
            let mut rec = Matrix2::zero();
            for i in 0..2 {
                rec = rec + Matrix2::outer(vecs[i], vecs[i]).scale(c(vals[i], 0.0));
            }
            prop_assert!(rec.max_abs_diff(&m) < 1e-10);
        }

        #[test]
        fn eig_vectors_orthonormal(m in arb_hermitian()) {
            let (_, v) = m.hermitian_eig().unwrap();
            let dot = v[0][0].conj() * v[1][0] + v[0][1].conj() * v[1][1];
            prop_assert!(dot.norm() < 1e-10);
            let n0 = (v[0][0].norm_sqr() + v[0][1].norm_sqr()).sqrt();
            prop_assert!((n0 - 1.0).abs() < 1e-10);
        }

        #[test]
        fn eig_sum_is_trace(m in arb_hermitian()) {
            let (vals, _) = m.hermitian_eig().unwrap();
            prop_assert!((vals[0] + vals[1] - m.trace().re).abs() < 1e-12);
        }

        #[test]
        fn sqrt_squares_back(m in arb_hermitian()) {
            // Make it PSD by squaring.
            let p = m * m;
            let r = p.psd_sqrt().unwrap();
            prop_assert!((r * r).max_abs_diff(&p) < 1e-10);
        }

        #[test]
        fn trace_abs_unitarily_invariant(m in arb_hermitian(), angle in 0.0f64..6.28) {
            let u = Matrix2::rotation_about_x(angle);
            let rotated = u * m * u.adjoint();
            prop_assert!(
                (rotated.trace_abs().unwrap() - m.trace_abs().unwrap()).abs() < 1e-10
            );
        }

        #[test]
        fn rotation_composes(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let lhs = Matrix2::rotation_about_x(a) * Matrix2::rotation_about_x(b);
            let rhs = Matrix2::rotation_about_x(a + b);
            // Equal up to global phase; at half-angle parametrization the
            // product is exactly equal, no phase fix needed.
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }
}
