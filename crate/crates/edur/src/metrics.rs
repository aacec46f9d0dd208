//! Error and disturbance, the bound family, inequality evaluation and
//! the correction optimizer.

use crate::error::{EdurError, Result};
use crate::matrix::Matrix2;
use crate::measurement::{corrected_apparatus, CorrectionTarget, MeasurementFamily};
use crate::states::{variance, AxisObservable, QubitState};

/// Squared quantities in (-CLAMP, 0) are treated as exact zeros.
const SQ_CLAMP: f64 = 1e-10;

/// Max disagreement tolerated between the general and the binary
/// error/disturbance forms.
const CONSISTENCY_TOL: f64 = 1e-10;

/// One evaluated error-disturbance point with its sweep coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdurPoint {
    pub error: f64,
    pub disturbance: f64,
    pub error_sq: f64,
    pub disturbance_sq: f64,
    pub theta_oa: f64,
    pub theta_b: f64,
    pub alpha: f64,
}

/// The three lower bounds that appear in the inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSet {
    /// Robertson bound evaluated on the pure state with the same Bloch
    /// direction (coincides with `c_prime_ab` for pure input).
    pub c_ab: f64,
    /// Trace extension (1/2)|Tr([A,B] rho)|.
    pub c_prime_ab: f64,
    /// Mixed-state bound (1/2)Tr|sqrt(rho) [A,B] sqrt(rho)|.
    pub d_ab: f64,
}

impl BoundSet {
    pub fn compute(a: &AxisObservable, b: &AxisObservable, state: &QubitState) -> Result<Self> {
        let c_prime_ab = bound_c(a, b, state);
        let d_ab = bound_d(a, b, state)?;
        let r = state.bloch();
        let len = state.bloch_length();
        let c_ab = if len > 1e-12 {
            let pure =
                QubitState::from_bloch([r[0] / len, r[1] / len, r[2] / len])?;
            bound_c(a, b, &pure)
        } else {
            // No Bloch direction to purify along; D coincides with the
            // pure-state Robertson value for the z-y observable pairs.
            d_ab
        };
        Ok(Self {
            c_ab,
            c_prime_ab,
            d_ab,
        })
    }
}

pub(crate) fn clamp_sq(v: f64) -> f64 {
    if v < 0.0 && v > -SQ_CLAMP {
        0.0
    } else {
        v
    }
}

fn mean(op: &Matrix2, state: &QubitState) -> f64 {
    (*op * *state.matrix()).trace().re
}

/// Polar angle of a z-y-plane operator from its Pauli decomposition.
pub(crate) fn zy_angle(op: &Matrix2) -> f64 {
    let [_, _, cy, cz] = op.pauli_coefficients();
    cy.re.atan2(cz.re).rem_euclid(std::f64::consts::TAU)
}

/// Error and disturbance of an apparatus on a state.
///
/// Both the general second-moment form and the binary shortcut are
/// evaluated; a disagreement beyond tolerance signals a broken
/// apparatus model and is reported as an error.
pub fn error_disturbance(
    app: &MeasurementFamily,
    a: &AxisObservable,
    b: &AxisObservable,
    state: &QubitState,
) -> Result<EdurPoint> {
    let oa1 = app.output_operator_a(1);
    let oa2 = app.output_operator_a(2);
    let ob1 = app.output_operator_b(b, 1);
    let ob2 = app.output_operator_b(b, 2);
    let am = a.matrix();
    let bm = b.matrix();

    // General form: <(O - X)^2> + <O^(2) - O^2>.
    let da = oa1 - am;
    let eps_sq_general = mean(&(da * da), state) + mean(&(oa2 - oa1 * oa1), state);
    let db = ob1 - bm;
    let eta_sq_general = mean(&(db * db), state) + mean(&(ob2 - ob1 * ob1), state);

    // Binary shortcut: 2 - 2 Re<X O>.
    let eps_sq_binary = 2.0 - 2.0 * mean(&(am * oa1), state);
    let eta_sq_binary = 2.0 - 2.0 * mean(&(bm * ob1), state);

    let delta = (eps_sq_general - eps_sq_binary)
        .abs()
        .max((eta_sq_general - eta_sq_binary).abs());
    if delta > CONSISTENCY_TOL {
        return Err(EdurError::InternalConsistency { delta });
    }

    let error_sq = clamp_sq(eps_sq_binary);
    let disturbance_sq = clamp_sq(eta_sq_binary);
    Ok(EdurPoint {
        error: error_sq.max(0.0).sqrt(),
        disturbance: disturbance_sq.max(0.0).sqrt(),
        error_sq,
        disturbance_sq,
        theta_oa: zy_angle(&oa1),
        theta_b: b.theta(),
        alpha: state.bloch_length(),
    })
}

/// Closed form for the error of the detuned apparatus:
/// eps = 2 sin(theta_OA / 2).
pub fn error_closed_form(theta_oa: f64) -> f64 {
    2.0 * (0.5 * theta_oa).sin()
}

/// Closed form for the disturbance extremes over all corrections:
/// 2|sin((theta_OA - theta_B)/2)| <= eta <= 2 cos((theta_OA - theta_B)/2).
pub fn disturbance_bounds_closed_form(theta_oa: f64, theta_b: f64) -> (f64, f64) {
    let h = 0.5 * (theta_oa - theta_b);
    (2.0 * h.sin().abs(), 2.0 * h.cos().abs())
}

/// Result of the exhaustive correction search.
#[derive(Debug, Clone)]
pub struct CorrectionSearch {
    pub min_point: (CorrectionTarget, f64),
    pub max_point: (CorrectionTarget, f64),
    /// Full (vartheta, phi, eta) surface in grid order.
    pub surface: Vec<(f64, f64, f64)>,
}

/// Exhaustive grid search for the disturbance extremes over all
/// correction targets; vartheta in [0, pi] (endpoints included),
/// phi in [0, 2pi).
pub fn optimize_correction(
    theta_oa: f64,
    b: &AxisObservable,
    state: &QubitState,
    grid_step: f64,
) -> Result<CorrectionSearch> {
    if !(grid_step > 0.0) {
        return Err(EdurError::OutOfRange {
            what: "grid_step",
            value: grid_step,
            lo: f64::MIN_POSITIVE,
            hi: f64::INFINITY,
        });
    }
    let oa = AxisObservable::new(theta_oa)?;
    let a = AxisObservable::new(0.0)?;
    let n_vt = (std::f64::consts::PI / grid_step).round() as usize;
    let n_ph = (std::f64::consts::TAU / grid_step).round() as usize;

    let mut surface = Vec::with_capacity((n_vt + 1) * n_ph.max(1));
    let mut min_point: Option<(CorrectionTarget, f64)> = None;
    let mut max_point: Option<(CorrectionTarget, f64)> = None;
    for i in 0..=n_vt {
        let vt = (i as f64 * grid_step).min(std::f64::consts::PI);
        for j in 0..n_ph.max(1) {
            let ph = j as f64 * grid_step;
            let target = CorrectionTarget::new(vt, ph)?;
            let app = corrected_apparatus(&oa, &target);
            let point = error_disturbance(&app, &a, b, state)?;
            let eta = point.disturbance;
            surface.push((vt, ph, eta));
            if min_point.map_or(true, |(_, best)| eta < best) {
                min_point = Some((target, eta));
            }
            if max_point.map_or(true, |(_, best)| eta > best) {
                max_point = Some((target, eta));
            }
        }
    }
    Ok(CorrectionSearch {
        min_point: min_point.expect("non-empty grid"),
        max_point: max_point.expect("non-empty grid"),
        surface,
    })
}

/// C'_AB = (1/2)|Tr([A,B] rho)|; equals the Robertson bound on pure states.
pub fn bound_c(a: &AxisObservable, b: &AxisObservable, state: &QubitState) -> f64 {
    let comm = a.matrix().commutator(&b.matrix());
    0.5 * (comm * *state.matrix()).trace().norm()
}

/// D_AB = (1/2) Tr|sqrt(rho) [A,B] sqrt(rho)|.
pub fn bound_d(a: &AxisObservable, b: &AxisObservable, state: &QubitState) -> Result<f64> {
    let root = state.matrix().psd_sqrt()?;
    let comm = a.matrix().commutator(&b.matrix());
    Ok(0.5 * (root * comm * root).trace_abs()?)
}

/// Outcome of one inequality evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

impl InequalityCheck {
    pub fn slack(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// eps eta + eps dB + eta dA >= C'_AB.
pub fn check_ozawa(
    point: &EdurPoint,
    a: &AxisObservable,
    b: &AxisObservable,
    state: &QubitState,
) -> InequalityCheck {
    let da = variance(a, state).max(0.0).sqrt();
    let db = variance(b, state).max(0.0).sqrt();
    let lhs = point.error * point.disturbance + point.error * db + point.disturbance * da;
    let rhs = bound_c(a, b, state);
    InequalityCheck {
        lhs,
        rhs,
        satisfied: lhs >= rhs - 1e-10,
    }
}

/// eps^2 dB^2 + eta^2 dA^2 + 2 eps eta sqrt(dA^2 dB^2 - bound^2) >= bound^2.
///
/// `bound` is either the trace extension or the stronger mixed-state
/// bound.
pub fn check_branciard(
    point: &EdurPoint,
    a: &AxisObservable,
    b: &AxisObservable,
    state: &QubitState,
    bound: f64,
) -> Result<InequalityCheck> {
    let va = variance(a, state);
    let vb = variance(b, state);
    let radicand = va * vb - bound * bound;
    if radicand < -1e-12 {
        return Err(EdurError::NegativeRadicand { radicand });
    }
    let lhs = point.error_sq * vb
        + point.disturbance_sq * va
        + 2.0 * point.error * point.disturbance * radicand.max(0.0).sqrt();
    let rhs = bound * bound;
    Ok(InequalityCheck {
        lhs,
        rhs,
        satisfied: lhs >= rhs - 1e-10,
    })
}

/// Admissible-region test (eps^2 - 2)^2 + (eta^2 - 2)^2 <= 4, the tight
/// qubit relation for maximally incompatible observables.
pub fn check_tight_qubit(point: &EdurPoint) -> InequalityCheck {
    let lhs = (point.error_sq - 2.0).powi(2) + (point.disturbance_sq - 2.0).powi(2);
    InequalityCheck {
        lhs,
        rhs: 4.0,
        satisfied: lhs <= 4.0 + 1e-9,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::projective_apparatus;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn a_z() -> AxisObservable {
        AxisObservable::new(0.0).unwrap()
    }
    fn b_y() -> AxisObservable {
        AxisObservable::new(FRAC_PI_2).unwrap()
    }

    #[test]
    fn undetuned_apparatus_has_zero_error() {
        let app = projective_apparatus(&a_z());
        let p = error_disturbance(&app, &a_z(), &b_y(), &QubitState::rho_x(1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(p.error, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.disturbance, std::f64::consts::SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn antipodal_detuning_has_maximal_error() {
        let oa = AxisObservable::new(PI).unwrap();
        let app = projective_apparatus(&oa);
        let p = error_disturbance(&app, &a_z(), &b_y(), &QubitState::rho_x(0.5).unwrap()).unwrap();
        assert_abs_diff_eq!(p.error, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn fig2_setting_closed_forms() {
        let theta_oa = 5.0 * PI / 18.0;
        let oa = AxisObservable::new(theta_oa).unwrap();
        let app = corrected_apparatus(&oa, &CorrectionTarget::optimal_for(&b_y()));
        let p = error_disturbance(&app, &a_z(), &b_y(), &QubitState::rho_x(1.0).unwrap()).unwrap();
        // eps = 2 sin(25 deg), eta = 2 sin(20 deg)
        assert_abs_diff_eq!(p.error, 2.0 * (25.0f64.to_radians()).sin(), epsilon = 1e-10);
        assert_abs_diff_eq!(
            p.disturbance,
            2.0 * (20.0f64.to_radians()).sin(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn closed_form_error() {
        assert_abs_diff_eq!(error_closed_form(0.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            error_closed_form(FRAC_PI_2),
            std::f64::consts::SQRT_2,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(error_closed_form(PI), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_disturbance_bounds() {
        let (lo, hi) = disturbance_bounds_closed_form(FRAC_PI_2, FRAC_PI_2);
        assert_abs_diff_eq!(lo, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 2.0, epsilon = 1e-12);

        let (lo, hi) = disturbance_bounds_closed_form(0.0, FRAC_PI_2);
        assert_abs_diff_eq!(lo, std::f64::consts::SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, std::f64::consts::SQRT_2, epsilon = 1e-12);

        let (lo, hi) = disturbance_bounds_closed_form(5.0 * PI / 18.0, FRAC_PI_2);
        assert_abs_diff_eq!(lo, 2.0 * 20.0f64.to_radians().sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 2.0 * 20.0f64.to_radians().cos(), epsilon = 1e-12);
        // min^2 + max^2 = 4
        assert_abs_diff_eq!(lo * lo + hi * hi, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn bound_c_is_alpha() {
        for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let s = QubitState::rho_x(alpha).unwrap();
            assert_abs_diff_eq!(bound_c(&a_z(), &b_y(), &s), alpha, epsilon = 1e-12);
        }
    }

    #[test]
    fn bound_c_commuting_pair_vanishes() {
        let b = AxisObservable::new(0.0).unwrap();
        let s = QubitState::rho_x(0.7).unwrap();
        assert_abs_diff_eq!(bound_c(&a_z(), &b, &s), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn bound_d_is_constant_one() {
        for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let s = QubitState::rho_x(alpha).unwrap();
            assert_abs_diff_eq!(bound_d(&a_z(), &b_y(), &s).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bound_d_is_sine_of_theta_b() {
        for theta_b in [PI / 3.0, PI / 6.0] {
            let b = AxisObservable::new(theta_b).unwrap();
            for alpha in [0.0, 0.5, 1.0] {
                let s = QubitState::rho_x(alpha).unwrap();
                assert_abs_diff_eq!(
                    bound_d(&a_z(), &b, &s).unwrap(),
                    theta_b.sin(),
                    epsilon = 1e-12
                );
            }
        }
        let b = AxisObservable::new(PI / 3.0).unwrap();
        let s = QubitState::rho_x(1.0).unwrap();
        assert_abs_diff_eq!(
            bound_d(&a_z(), &b, &s).unwrap(),
            3.0f64.sqrt() / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn ozawa_examples() {
        // theta_OA = pi/2, pure, optimal: lhs = sqrt(2) >= 1.
        let oa = AxisObservable::new(FRAC_PI_2).unwrap();
        let app = corrected_apparatus(&oa, &CorrectionTarget::optimal_for(&b_y()));
        let s = QubitState::rho_x(1.0).unwrap();
        let p = error_disturbance(&app, &a_z(), &b_y(), &s).unwrap();
        let chk = check_ozawa(&p, &a_z(), &b_y(), &s);
        assert_abs_diff_eq!(chk.lhs, std::f64::consts::SQRT_2, epsilon = 1e-10);
        assert_abs_diff_eq!(chk.rhs, 1.0, epsilon = 1e-12);
        assert!(chk.satisfied);

        // Totally mixed: rhs = 0, always satisfied.
        let s = QubitState::rho_x(0.0).unwrap();
        let p = error_disturbance(&app, &a_z(), &b_y(), &s).unwrap();
        let chk = check_ozawa(&p, &a_z(), &b_y(), &s);
        assert_abs_diff_eq!(chk.rhs, 0.0, epsilon = 1e-14);
        assert!(chk.satisfied);
    }

    #[test]
    fn branciard_pure_reduces_to_circle_form() {
        // Pure rho_x(1), A=sz, B=sy: dA = dB = 1, C = 1, so the relation
        // reads eps^2 + eta^2 >= 1.
        let oa = AxisObservable::new(0.4).unwrap();
        let app = corrected_apparatus(&oa, &CorrectionTarget::optimal_for(&b_y()));
        let s = QubitState::rho_x(1.0).unwrap();
        let p = error_disturbance(&app, &a_z(), &b_y(), &s).unwrap();
        let chk = check_branciard(&p, &a_z(), &b_y(), &s, 1.0).unwrap();
        assert_abs_diff_eq!(chk.lhs, p.error_sq + p.disturbance_sq, epsilon = 1e-10);
        assert_abs_diff_eq!(chk.rhs, 1.0, epsilon = 1e-14);
        assert!(chk.satisfied);
    }

    #[test]
    fn branciard_rejects_oversized_bound() {
        let p = EdurPoint {
            error: 0.0,
            disturbance: 0.0,
            error_sq: 0.0,
            disturbance_sq: 0.0,
            theta_oa: 0.0,
            theta_b: FRAC_PI_2,
            alpha: 1.0,
        };
        let s = QubitState::rho_x(1.0).unwrap();
        assert!(matches!(
            check_branciard(&p, &a_z(), &b_y(), &s, 1.5),
            Err(EdurError::NegativeRadicand { .. })
        ));
    }

    #[test]
    fn tight_relation_examples() {
        let mk = |e: f64, h: f64| EdurPoint {
            error: e,
            disturbance: h,
            error_sq: e * e,
            disturbance_sq: h * h,
            theta_oa: 0.0,
            theta_b: FRAC_PI_2,
            alpha: 1.0,
        };
        let chk = check_tight_qubit(&mk(0.0, std::f64::consts::SQRT_2));
        assert_abs_diff_eq!(chk.lhs, 4.0, epsilon = 1e-12);
        assert!(chk.satisfied);

        // theta_OA = pi/3 optimal: eps^2 = 1, eta^2 = 2 - sqrt(3).
        let chk = check_tight_qubit(&mk(1.0, (2.0 - 3.0f64.sqrt()).sqrt()));
        assert_abs_diff_eq!(chk.lhs, 4.0, epsilon = 1e-12);

        let chk = check_tight_qubit(&mk(
            std::f64::consts::SQRT_2,
            std::f64::consts::SQRT_2,
        ));
        assert_abs_diff_eq!(chk.lhs, 0.0, epsilon = 1e-12);
        assert!(chk.satisfied);
    }

    #[test]
    fn optimizer_finds_closed_form_extremes() {
        let theta_oa = 5.0 * PI / 18.0;
        let search = optimize_correction(
            theta_oa,
            &b_y(),
            &QubitState::rho_x(1.0).unwrap(),
            PI / 36.0,
        )
        .unwrap();
        let (lo, hi) = disturbance_bounds_closed_form(theta_oa, FRAC_PI_2);
        let step = PI / 36.0;
        assert!((search.min_point.1 - lo).abs() < 2.0 * step);
        assert!((search.max_point.1 - hi).abs() < 2.0 * step);
        // argmin must be a sigma_y eigenbasis pairing: vartheta ~ pi/2,
        // phi ~ pi/2 or 3pi/2.
        let (t, _) = search.min_point;
        assert!((t.vartheta() - FRAC_PI_2).abs() < 2.0 * step);
        let d1 = (t.phi() - FRAC_PI_2).abs();
        let d2 = (t.phi() - 1.5 * PI).abs();
        assert!(d1.min(d2) < 2.0 * step);
    }

    #[test]
    fn optimizer_degenerate_at_zero_detuning() {
        // theta_OA = 0, B = sy: eta = sqrt(2) for every correction.
        let search = optimize_correction(
            0.0,
            &b_y(),
            &QubitState::rho_x(1.0).unwrap(),
            PI / 12.0,
        )
        .unwrap();
        assert_abs_diff_eq!(search.min_point.1, std::f64::consts::SQRT_2, epsilon = 1e-10);
        assert_abs_diff_eq!(search.max_point.1, std::f64::consts::SQRT_2, epsilon = 1e-10);
    }

    proptest! {
        #[test]
        fn saturation_identity(theta in 0.0f64..PI, alpha in 0.0f64..1.0) {
            let oa = AxisObservable::new(theta).unwrap();
            let s = QubitState::rho_x(alpha).unwrap();
            for target in [
                CorrectionTarget::optimal_for(&b_y()),
                CorrectionTarget::anti_optimal_for(&b_y()),
            ] {
                let app = corrected_apparatus(&oa, &target);
                let p = error_disturbance(&app, &a_z(), &b_y(), &s).unwrap();
                let lhs = (p.error_sq - 2.0).powi(2) + (p.disturbance_sq - 2.0).powi(2);
                prop_assert!((lhs - 4.0).abs() < 1e-9);
            }
        }

        #[test]
        fn mixture_independence(theta in 0.0f64..PI, alpha in 0.0f64..1.0) {
            let oa = AxisObservable::new(theta).unwrap();
            let app = corrected_apparatus(&oa, &CorrectionTarget::optimal_for(&b_y()));
            let p_pure =
                error_disturbance(&app, &a_z(), &b_y(), &QubitState::rho_x(1.0).unwrap()).unwrap();
            let p_mixed =
                error_disturbance(&app, &a_z(), &b_y(), &QubitState::rho_x(alpha).unwrap()).unwrap();
            prop_assert!((p_pure.error - p_mixed.error).abs() < 1e-10);
            prop_assert!((p_pure.disturbance - p_mixed.disturbance).abs() < 1e-10);
        }

        #[test]
        fn d_majorizes_c_prime(theta_b in 0.0f64..FRAC_PI_2, alpha in 0.0f64..1.0) {
            let b = AxisObservable::new(theta_b).unwrap();
            let s = QubitState::rho_x(alpha).unwrap();
            let c = bound_c(&a_z(), &b, &s);
            let d = bound_d(&a_z(), &b, &s).unwrap();
            prop_assert!(d >= c - 1e-12);
        }

        #[test]
        fn d_equals_c_on_pure_states(theta_b in 0.0f64..FRAC_PI_2) {
            let b = AxisObservable::new(theta_b).unwrap();
            let s = QubitState::rho_x(1.0).unwrap();
            let c = bound_c(&a_z(), &b, &s);
            let d = bound_d(&a_z(), &b, &s).unwrap();
            prop_assert!((d - c).abs() < 1e-10);
        }

        #[test]
        fn error_closed_form_monotone(a in 0.0f64..PI, b in 0.0f64..PI) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(error_closed_form(lo) <= error_closed_form(hi) + 1e-15);
        }
    }
}
