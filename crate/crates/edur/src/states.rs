//! Density matrices, the x-axis mixture family, z-y-plane observables,
//! fidelity, polarization and variance.

use num_complex::Complex64;

use crate::error::{EdurError, Result};
use crate::matrix::{c, Matrix2, PauliAxis, HERMITICITY_TOL};

/// Tolerance on trace, positivity and Bloch length at state construction.
const STATE_TOL: f64 = 1e-12;

/// A qubit density matrix, validated at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    rho: Matrix2,
}

impl QubitState {
    /// Validate and wrap a density matrix.
    pub fn new(rho: Matrix2) -> Result<Self> {
        if !rho.is_finite() {
            return Err(EdurError::NonFinite {
                context: "QubitState",
            });
        }
        let dev = rho.hermiticity_deviation();
        if dev > HERMITICITY_TOL {
            return Err(EdurError::NotHermitian { deviation: dev });
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(EdurError::InvalidState {
                reason: format!("trace = {} + {}i, expected 1", tr.re, tr.im),
            });
        }
        let (vals, _) = rho.hermitian_eig()?;
        if vals[1] < -STATE_TOL {
            return Err(EdurError::InvalidState {
                reason: format!("negative eigenvalue {}", vals[1]),
            });
        }
        Ok(Self { rho })
    }

    /// Build from a Bloch vector with |r| <= 1.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if len > 1.0 + STATE_TOL {
            return Err(EdurError::OutOfRange {
                what: "bloch length",
                value: len,
                lo: 0.0,
                hi: 1.0,
            });
        }
        let rho = (Matrix2::identity()
            + Matrix2::pauli(PauliAxis::X).scale(c(r[0], 0.0))
            + Matrix2::pauli(PauliAxis::Y).scale(c(r[1], 0.0))
            + Matrix2::pauli(PauliAxis::Z).scale(c(r[2], 0.0)))
        .scale(c(0.5, 0.0));
        Self::new(rho)
    }

    /// Pure state from a (normalized) ket.
    pub fn from_ket(psi: [Complex64; 2]) -> Result<Self> {
        let n = (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt();
        if n < 1e-300 {
            return Err(EdurError::InvalidState {
                reason: "zero ket".into(),
            });
        }
        let v = [psi[0] / n, psi[1] / n];
        Self::new(Matrix2::outer(v, v))
    }

    /// The x-axis mixture family rho_x(alpha) = (1 + alpha sx)/2.
    pub fn rho_x(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(EdurError::OutOfRange {
                what: "alpha",
                value: alpha,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Self::from_bloch([alpha, 0.0, 0.0])
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.rho
    }

    /// The Bloch-vector view r with rho = (1 + r.sigma)/2.
    pub fn bloch(&self) -> [f64; 3] {
        let e = &self.rho.entries;
        [
            2.0 * e[1][0].re,
            2.0 * e[1][0].im,
            e[0][0].re - e[1][1].re,
        ]
    }

    pub fn bloch_length(&self) -> f64 {
        let r = self.bloch();
        (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
    }

    /// Tr rho^2 = (1 + |r|^2)/2.
    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }
}

/// A +-1-valued spin observable at polar angle theta in the z-y plane:
/// cos(theta) sz + sin(theta) sy.
///
/// Every observable in the sweep API lives in this plane; that keeps
/// <A> = <B> = 0 on the whole rho_x family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisObservable {
    theta: f64,
}

impl AxisObservable {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(EdurError::NonFinite {
                context: "AxisObservable",
            });
        }
        // Canonical representative in [0, 2pi).
        let tau = std::f64::consts::TAU;
        let theta = theta.rem_euclid(tau);
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn matrix(&self) -> Matrix2 {
        Matrix2::pauli(PauliAxis::Z).scale(c(self.theta.cos(), 0.0))
            + Matrix2::pauli(PauliAxis::Y).scale(c(self.theta.sin(), 0.0))
    }

    /// Eigenket for outcome +1: (cos(theta/2), i sin(theta/2)).
    pub fn plus_ket(&self) -> [Complex64; 2] {
        let h = 0.5 * self.theta;
        [c(h.cos(), 0.0), c(0.0, h.sin())]
    }

    /// Eigenket for outcome -1, orthogonal to `plus_ket`.
    pub fn minus_ket(&self) -> [Complex64; 2] {
        let h = 0.5 * self.theta;
        [c(-h.sin(), 0.0), c(0.0, h.cos())]
    }

    /// Rank-1 projector onto the +-1 eigenspace.
    pub fn projector(&self, outcome: i8) -> Matrix2 {
        let ket = if outcome >= 0 {
            self.plus_ket()
        } else {
            self.minus_ket()
        };
        Matrix2::outer(ket, ket)
    }
}

/// Expectation value Tr(obs rho) for a Hermitian observable.
pub fn expectation(obs: &Matrix2, state: &QubitState) -> Result<f64> {
    let dev = obs.hermiticity_deviation();
    if dev > HERMITICITY_TOL {
        return Err(EdurError::NotHermitian { deviation: dev });
    }
    Ok((*obs * *state.matrix()).trace().re)
}

/// Variance <obs^2> - <obs>^2; equals 1 - <obs>^2 for binary observables.
pub fn variance(obs: &AxisObservable, state: &QubitState) -> f64 {
    let m = obs.matrix();
    let mean = (m * *state.matrix()).trace().re;
    let mean_sq = (m * m * *state.matrix()).trace().re;
    mean_sq - mean * mean
}

/// Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)).
pub fn fidelity(rho: &QubitState, sigma: &QubitState) -> Result<f64> {
    let root = rho.matrix().psd_sqrt()?;
    let inner = root * *sigma.matrix() * root;
    // inner is PSD up to rounding; take sqrt via eigenvalues directly.
    let (vals, _) = inner.hermitian_eig()?;
    Ok(vals.iter().map(|v| v.max(0.0).sqrt()).sum())
}
