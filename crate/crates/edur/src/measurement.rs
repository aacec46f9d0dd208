//! Apparatus models: the projective detuned measurement, correction
//! unitaries represented by their target output states, measurement
//! operator families and output operators.

use num_complex::Complex64;

use crate::error::{EdurError, Result};
use crate::matrix::{c, Matrix2};
use crate::states::{AxisObservable, QubitState};

/// Max deviation allowed in the completeness sum of a family.
const COMPLETENESS_TOL: f64 = 1e-10;

/// Outcome-labeled measurement operators {M_m}, m in {+1, -1}.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFamily {
    outcomes: Vec<(i8, Matrix2)>,
}

impl MeasurementFamily {
    /// Validate completeness sum(M^dag M) = 1 and wrap.
    pub fn new(outcomes: Vec<(i8, Matrix2)>) -> Result<Self> {
        let mut sum = Matrix2::zero();
        for (_, m) in &outcomes {
            if !m.is_finite() {
                return Err(EdurError::NonFinite {
                    context: "MeasurementFamily",
                });
            }
            sum = sum + m.adjoint() * *m;
        }
        let dev = sum.max_abs_diff(&Matrix2::identity());
        if dev > COMPLETENESS_TOL {
            return Err(EdurError::IncompleteFamily { deviation: dev });
        }
        Ok(Self { outcomes })
    }

    pub fn outcomes(&self) -> &[(i8, Matrix2)] {
        &self.outcomes
    }

    /// POVM element M_m^dag M_m for outcome m.
    pub fn povm_element(&self, outcome: i8) -> Matrix2 {
        self.outcomes
            .iter()
            .filter(|(o, _)| *o == outcome)
            .fold(Matrix2::zero(), |acc, (_, m)| acc + m.adjoint() * *m)
    }

    /// Unconditional post-measurement state sum(M rho M^dag).
    pub fn channel(&self, state: &QubitState) -> Result<QubitState> {
        let mut out = Matrix2::zero();
        for (_, m) in &self.outcomes {
            out = out + *m * *state.matrix() * m.adjoint();
        }
        QubitState::new(out)
    }

    /// Output operator of the meter: O_A^(k) = sum(m^k M^dag M).
    pub fn output_operator_a(&self, power: u8) -> Matrix2 {
        self.outcomes
            .iter()
            .fold(Matrix2::zero(), |acc, (o, m)| {
                let w = (*o as f64).powi(power as i32);
                acc + (m.adjoint() * *m).scale(c(w, 0.0))
            })
    }

    /// Output operator of a downstream observable:
    /// O_B^(k) = sum(M^dag B^k M).
    pub fn output_operator_b(&self, b: &AxisObservable, power: u8) -> Matrix2 {
        let bm = b.matrix();
        let bk = if power % 2 == 0 {
            bm * bm // identity for binary B, kept generic
        } else {
            bm
        };
        self.outcomes
            .iter()
            .fold(Matrix2::zero(), |acc, (_, m)| acc + m.adjoint() * bk * *m)
    }
}

/// The pair of angles (vartheta, phi) naming the output state
/// |psi> = (cos(vartheta/2), e^{i phi} sin(vartheta/2)) that the
/// correction unitary assigns to the +1 outcome.  The -1 outcome goes to
/// the orthogonal state |psi(pi - vartheta, phi + pi)>.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionTarget {
    vartheta: f64,
    phi: f64,
}

impl CorrectionTarget {
    pub fn new(vartheta: f64, phi: f64) -> Result<Self> {
        if !vartheta.is_finite() || !phi.is_finite() {
            return Err(EdurError::NonFinite {
                context: "CorrectionTarget",
            });
        }
        let tau = std::f64::consts::TAU;
        // Fold into canonical ranges vartheta in [0, pi], phi in [0, 2pi).
        let mut vt = vartheta.rem_euclid(tau);
        let mut ph = phi.rem_euclid(tau);
        if vt > std::f64::consts::PI {
            vt = tau - vt;
            ph = (ph + std::f64::consts::PI).rem_euclid(tau);
        }
        Ok(Self {
            vartheta: vt,
            phi: ph,
        })
    }

    pub fn vartheta(&self) -> f64 {
        self.vartheta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Target that leaves the apparatus output in the eigenbasis of
    /// `oa` itself, i.e. no correction at all.
    pub fn identity_for(oa: &AxisObservable) -> Self {
        // plus_ket of a z-y observable is (cos(t/2), i sin(t/2)).
        Self::new(oa.theta(), std::f64::consts::FRAC_PI_2).unwrap()
    }

    /// Target sending the +1 output to the +1 eigenstate of `b`
    /// (minimizes the disturbance on b).
    pub fn optimal_for(b: &AxisObservable) -> Self {
        Self::new(b.theta(), std::f64::consts::FRAC_PI_2).unwrap()
    }

    /// Target sending the +1 output to the -1 eigenstate of `b`
    /// (maximizes the disturbance on b).
    pub fn anti_optimal_for(b: &AxisObservable) -> Self {
        Self::new(
            std::f64::consts::PI - b.theta(),
            1.5 * std::f64::consts::PI,
        )
        .unwrap()
    }

    /// The ket assigned to the +1 outcome.
    pub fn plus_ket(&self) -> [Complex64; 2] {
        let h = 0.5 * self.vartheta;
        [
            c(h.cos(), 0.0),
            c(self.phi.cos(), self.phi.sin()).scale(h.sin()),
        ]
    }

    /// The orthogonal ket assigned to the -1 outcome:
    /// psi(pi - vartheta, phi + pi).
    pub fn minus_ket(&self) -> [Complex64; 2] {
        let h = 0.5 * (std::f64::consts::PI - self.vartheta);
        let phase = c((self.phi + std::f64::consts::PI).cos(), (self.phi + std::f64::consts::PI).sin());
        [c(h.cos(), 0.0), phase.scale(h.sin())]
    }
}

/// Projective measurement of a z-y-plane observable:
/// {M_m} = {|m><m|} over its eigenbasis.
pub fn projective_apparatus(oa: &AxisObservable) -> MeasurementFamily {
    let plus = oa.plus_ket();
    let minus = oa.minus_ket();
    MeasurementFamily::new(vec![
        (1, Matrix2::outer(plus, plus)),
        (-1, Matrix2::outer(minus, minus)),
    ])
    .expect("projectors are complete by construction")
}

/// Projective measurement followed by the correction unitary:
/// M_{+1} = |psi><+_OA|, M_{-1} = |-psi><-_OA|.  The POVM is the same
/// as for the uncorrected apparatus.
pub fn corrected_apparatus(oa: &AxisObservable, target: &CorrectionTarget) -> MeasurementFamily {
    MeasurementFamily::new(vec![
        (1, Matrix2::outer(target.plus_ket(), oa.plus_ket())),
        (-1, Matrix2::outer(target.minus_ket(), oa.minus_ket())),
    ])
    .expect("rank-1 operators over orthonormal bases are complete")
}
