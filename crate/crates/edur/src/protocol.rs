//! End-to-end polarimeter simulation: mixed-state preparation through a
//! noisy rotation channel, successive-measurement intensities, and the
//! three-state reconstruction of error and disturbance from intensities
//! alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{EdurError, Result};
use crate::matrix::{c, Matrix2};
use crate::measurement::MeasurementFamily;
use crate::metrics::{clamp_sq, zy_angle, EdurPoint};
use crate::quadrature::{gauss_hermite, midpoint};
use crate::states::{expectation, AxisObservable, QubitState};

/// Quadrature refinement stops once the averaged Bloch vector moves
/// less than this between successive node doublings.
const QUAD_CONVERGENCE: f64 = 1e-10;

/// Residual above this after the node cap is reached is an error.
const QUAD_ACCURACY: f64 = 1e-8;

const GAUSS_NODE_CAP: usize = 4096;
const UNIFORM_NODE_CAP: usize = 1 << 18;

/// Statistics of the rotation-angle noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseDistribution {
    Gaussian,
    Uniform,
}

/// A noisy rotation about x: angle nominal + noise, noise drawn from a
/// zero-mean distribution with standard deviation `noise_sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyRotationSpec {
    pub nominal_angle: f64,
    pub noise_sigma: f64,
    pub distribution: NoiseDistribution,
    pub quadrature_points: usize,
}

impl NoisyRotationSpec {
    pub fn new(
        nominal_angle: f64,
        noise_sigma: f64,
        distribution: NoiseDistribution,
        quadrature_points: usize,
    ) -> Result<Self> {
        if !nominal_angle.is_finite() || !noise_sigma.is_finite() {
            return Err(EdurError::NonFinite {
                context: "NoisyRotationSpec",
            });
        }
        if noise_sigma < 0.0 {
            return Err(EdurError::OutOfRange {
                what: "noise_sigma",
                value: noise_sigma,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if quadrature_points < 3 {
            return Err(EdurError::OutOfRange {
                what: "quadrature_points",
                value: quadrature_points as f64,
                lo: 3.0,
                hi: f64::INFINITY,
            });
        }
        Ok(Self {
            nominal_angle,
            noise_sigma,
            distribution,
            quadrature_points,
        })
    }

    /// Conventional half-pi rotation with Gaussian noise.
    pub fn gaussian(noise_sigma: f64) -> Result<Self> {
        Self::new(
            std::f64::consts::FRAC_PI_2,
            noise_sigma,
            NoiseDistribution::Gaussian,
            20,
        )
    }
}

fn averaged_rotation(spec: &NoisyRotationSpec, input: &QubitState, n: usize) -> Matrix2 {
    let rule: Vec<(f64, f64)> = match spec.distribution {
        NoiseDistribution::Gaussian => {
            let scale = std::f64::consts::SQRT_2 * spec.noise_sigma;
            let norm = std::f64::consts::PI.sqrt();
            gauss_hermite(n)
                .into_iter()
                .map(|(x, w)| (scale * x, w / norm))
                .collect()
        }
        NoiseDistribution::Uniform => {
            let half_width = 3.0f64.sqrt() * spec.noise_sigma;
            midpoint(-half_width, half_width, n)
        }
    };
    let mut acc = Matrix2::zero();
    for (dxi, w) in rule {
        let u = Matrix2::rotation_about_x(spec.nominal_angle + dxi);
        acc = acc + (u * *input.matrix() * u.adjoint()).scale(c(w, 0.0));
    }
    acc
}

/// Average the rotation over the noise distribution:
/// rho_out = int p(dxi) R(nominal + dxi) rho R^dag d(dxi).
///
/// The node count is doubled until the result stops moving; failure to
/// settle below the accuracy threshold is reported.
pub fn mixing_channel(spec: &NoisyRotationSpec, input: &QubitState) -> Result<QubitState> {
    if spec.noise_sigma == 0.0 {
        let u = Matrix2::rotation_about_x(spec.nominal_angle);
        return QubitState::new(u * *input.matrix() * u.adjoint());
    }
    // A wide Gaussian is the k-fold convolution of narrower Gaussians,
    // and rotation-averaging channels about a fixed axis compose, so
    // split wide noise into steps instead of growing the rule.
    const GAUSS_SIGMA_STEP: f64 = 2.0;
    if matches!(spec.distribution, NoiseDistribution::Gaussian)
        && spec.noise_sigma > GAUSS_SIGMA_STEP
    {
        let k = ((spec.noise_sigma / GAUSS_SIGMA_STEP).powi(2)).ceil() as usize;
        let sigma_k = spec.noise_sigma / (k as f64).sqrt();
        let mut state = input.clone();
        for step in 0..k {
            let nominal = if step == 0 { spec.nominal_angle } else { 0.0 };
            let sub = NoisyRotationSpec::new(
                nominal,
                sigma_k,
                NoiseDistribution::Gaussian,
                spec.quadrature_points,
            )?;
            state = mixing_channel(&sub, &state)?;
        }
        return Ok(state);
    }
    let cap = match spec.distribution {
        NoiseDistribution::Gaussian => GAUSS_NODE_CAP,
        NoiseDistribution::Uniform => UNIFORM_NODE_CAP,
    };
    let mut n = spec.quadrature_points.max(3);
    let mut prev = averaged_rotation(spec, input, n);
    loop {
        n *= 2;
        let next = averaged_rotation(spec, input, n);
        let delta = next.max_abs_diff(&prev);
        if delta < QUAD_CONVERGENCE {
            return QubitState::new(next);
        }
        if n >= cap {
            if delta > QUAD_ACCURACY {
                return Err(EdurError::QuadratureAccuracy { residual: delta });
            }
            return QubitState::new(next);
        }
        prev = next;
    }
}

/// Find the noise width that shrinks the Bloch vector of |+z> to length
/// `alpha` under the half-pi noisy rotation.
pub fn solve_sigma_for_alpha(alpha: f64, distribution: NoiseDistribution) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(EdurError::OutOfRange {
            what: "alpha",
            value: alpha,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let plus_z = QubitState::from_bloch([0.0, 0.0, 1.0])?;
    let length = |sigma: f64| -> Result<f64> {
        let spec = NoisyRotationSpec::new(
            std::f64::consts::FRAC_PI_2,
            sigma,
            distribution,
            20,
        )?;
        Ok(mixing_channel(&spec, &plus_z)?.bloch_length())
    };
    // Bloch length decreases monotonically in sigma on these brackets:
    // exp(-sigma^2/2) for Gaussian, sinc for uniform up to its first zero.
    let hi = match distribution {
        NoiseDistribution::Gaussian => 8.0,
        NoiseDistribution::Uniform => std::f64::consts::PI / 3.0f64.sqrt(),
    };
    if length(hi)? >= alpha {
        // Even the widest bracket stays above the target; only
        // acceptable if it is already within tolerance (alpha ~ 0).
        let l = length(hi)?;
        if (l - alpha).abs() <= 1e-6 {
            return Ok(hi);
        }
        return Err(EdurError::OutOfRange {
            what: "alpha (unreachable by bracket)",
            value: alpha,
            lo: l,
            hi: 1.0,
        });
    }
    let (mut lo_s, mut hi_s) = (0.0f64, hi);
    for _ in 0..100 {
        let mid = 0.5 * (lo_s + hi_s);
        if length(mid)? >= alpha {
            lo_s = mid;
        } else {
            hi_s = mid;
        }
        if hi_s - lo_s < 1e-9 {
            break;
        }
    }
    Ok(0.5 * (lo_s + hi_s))
}

/// Whether a count table holds exact expected intensities or Poisson
/// draws around them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMode {
    ExactProbability,
    PoissonSampled,
}

/// How to generate intensities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Exact,
    Poisson { seed: u64 },
}

/// The four intensities I_{mb} of one successive-measurement setting,
/// indexed by the first-apparatus outcome m and the B outcome b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountTable {
    /// counts[i][j] with i = 0 for m = +1, 1 for m = -1; same for j / b.
    pub counts: [[f64; 2]; 2],
    pub mode: CountMode,
    pub mean_counts: f64,
}

const OUTCOMES: [i8; 2] = [1, -1];

fn outcome_index(o: i8) -> usize {
    if o >= 0 {
        0
    } else {
        1
    }
}

impl CountTable {
    pub fn total(&self) -> f64 {
        self.counts.iter().flatten().sum()
    }

    pub fn intensity(&self, m: i8, b: i8) -> f64 {
        self.counts[outcome_index(m)][outcome_index(b)]
    }

    /// CSV rows in the interchange schema `state,m,b,intensity`.
    pub fn to_csv(&self, label: &str) -> String {
        let mut out = String::from("state,m,b,intensity\n");
        self.append_csv_rows(label, &mut out);
        out
    }

    pub fn append_csv_rows(&self, label: &str, out: &mut String) {
        for m in OUTCOMES {
            for b in OUTCOMES {
                out.push_str(&format!(
                    "{},{:+},{:+},{}\n",
                    label,
                    m,
                    b,
                    format_sig17(self.intensity(m, b))
                ));
            }
        }
    }
}

/// Decimal with 17 significant digits; parses back to the identical f64.
pub fn format_sig17(v: f64) -> String {
    format!("{:.16e}", v)
}

/// Parse a CSV document in the `state,m,b,intensity` schema into
/// labeled count tables, in order of first appearance.
pub fn parse_count_tables_csv(text: &str) -> Result<Vec<(String, CountTable)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "state,m,b,intensity" => {}
        other => {
            return Err(EdurError::Parse(format!(
                "expected header 'state,m,b,intensity', got {:?}",
                other
            )))
        }
    }
    let mut order: Vec<String> = Vec::new();
    let mut tables: Vec<(CountTable, [[bool; 2]; 2])> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(EdurError::Parse(format!(
                "line {}: expected 4 fields",
                lineno + 2
            )));
        }
        let label = parts[0].to_string();
        let m: i8 = parts[1]
            .parse()
            .map_err(|_| EdurError::Parse(format!("line {}: bad m", lineno + 2)))?;
        let b: i8 = parts[2]
            .parse()
            .map_err(|_| EdurError::Parse(format!("line {}: bad b", lineno + 2)))?;
        let intensity: f64 = parts[3]
            .parse()
            .map_err(|_| EdurError::Parse(format!("line {}: bad intensity", lineno + 2)))?;
        if !(m == 1 || m == -1) || !(b == 1 || b == -1) {
            return Err(EdurError::Parse(format!(
                "line {}: outcomes must be +1 or -1",
                lineno + 2
            )));
        }
        if intensity < 0.0 || !intensity.is_finite() {
            return Err(EdurError::Parse(format!(
                "line {}: negative or non-finite intensity",
                lineno + 2
            )));
        }
        let idx = match order.iter().position(|l| *l == label) {
            Some(i) => i,
            None => {
                order.push(label);
                tables.push((
                    CountTable {
                        counts: [[0.0; 2]; 2],
                        mode: CountMode::ExactProbability,
                        mean_counts: 0.0,
                    },
                    [[false; 2]; 2],
                ));
                order.len() - 1
            }
        };
        let (table, seen) = &mut tables[idx];
        let (i, j) = (outcome_index(m), outcome_index(b));
        if seen[i][j] {
            return Err(EdurError::Parse(format!(
                "line {}: duplicate ({}, {}) entry",
                lineno + 2,
                m,
                b
            )));
        }
        seen[i][j] = true;
        table.counts[i][j] = intensity;
    }
    let mut out = Vec::with_capacity(order.len());
    for (label, (mut table, seen)) in order.into_iter().zip(tables) {
        if seen.iter().flatten().any(|s| !s) {
            return Err(EdurError::Parse(format!(
                "table '{}' is missing entries",
                label
            )));
        }
        table.mean_counts = table.total();
        out.push((label, table));
    }
    Ok(out)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for one count cell, independent of evaluation order.
fn cell_seed(seed: u64, state_index: u64, m: i8, b: i8) -> u64 {
    let tag = (outcome_index(m) as u64) << 1 | outcome_index(b) as u64;
    splitmix64(splitmix64(splitmix64(seed) ^ state_index) ^ tag)
}

/// Joint outcome probabilities p(m, b) = Tr(P_b^B M_m rho M_m^dag) and
/// the resulting intensities.
pub fn simulate_counts(
    app: &MeasurementFamily,
    b: &AxisObservable,
    state: &QubitState,
    mean_counts: f64,
    sampling: Sampling,
    state_index: u64,
) -> Result<CountTable> {
    if !(mean_counts > 0.0) {
        return Err(EdurError::OutOfRange {
            what: "mean_counts",
            value: mean_counts,
            lo: f64::MIN_POSITIVE,
            hi: f64::INFINITY,
        });
    }
    let mut counts = [[0.0f64; 2]; 2];
    for (m_label, m_op) in app.outcomes() {
        let post = *m_op * *state.matrix() * m_op.adjoint();
        for b_label in OUTCOMES {
            let p = (b.projector(b_label) * post).trace().re.max(0.0);
            counts[outcome_index(*m_label)][outcome_index(b_label)] += mean_counts * p;
        }
    }
    let mode = match sampling {
        Sampling::Exact => CountMode::ExactProbability,
        Sampling::Poisson { seed } => {
            for m in OUTCOMES {
                for bl in OUTCOMES {
                    let (i, j) = (outcome_index(m), outcome_index(bl));
                    let mean = counts[i][j];
                    counts[i][j] = if mean > 0.0 {
                        let mut rng =
                            ChaCha8Rng::seed_from_u64(cell_seed(seed, state_index, m, bl));
                        Poisson::new(mean)
                            .expect("positive mean")
                            .sample(&mut rng)
                    } else {
                        0.0
                    };
                }
            }
            CountMode::PoissonSampled
        }
    };
    Ok(CountTable {
        counts,
        mode,
        mean_counts,
    })
}

/// Apparatus-outcome and B means from one count table (the intensity
/// marginals of the label spectra).
pub fn expectations_from_counts(table: &CountTable) -> Result<(f64, f64)> {
    let total = table.total();
    if total <= 0.0 {
        return Err(EdurError::EmptyData);
    }
    let mut mean_oa = 0.0;
    let mut mean_ob = 0.0;
    for m in OUTCOMES {
        for b in OUTCOMES {
            let i = table.intensity(m, b);
            mean_oa += m as f64 * i;
            mean_ob += b as f64 * i;
        }
    }
    Ok((mean_oa / total, mean_ob / total))
}

/// Tr(P+ rho) with P+ = (1 + obs)/2.
pub fn prefactor(projector_observable: &AxisObservable, state: &QubitState) -> f64 {
    expectation(&projector_observable.projector(1), state)
        .expect("projector is Hermitian by construction")
}

/// Everything the three-state method needs: intensities for the error
/// set {rho, A rho A, rho|A} and the disturbance set
/// {rho, B rho B, rho|B}, plus the separately measured prefactors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThreeStateRun {
    pub rho: CountTable,
    pub a_rho_a: CountTable,
    pub rho_given_a: CountTable,
    pub b_rho_b: CountTable,
    pub rho_given_b: CountTable,
    pub prefactor_a: f64,
    pub prefactor_b: f64,
    pub seed: Option<u64>,
    pub theta_oa: f64,
    pub theta_b: f64,
    pub alpha: f64,
}

/// Reconstructed point plus linearly propagated Poisson one-sigma
/// uncertainties of the squared quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconstruction {
    pub point: EdurPoint,
    pub sigma_error_sq: f64,
    pub sigma_disturbance_sq: f64,
}

impl ThreeStateRun {
    /// Run all six settings of the protocol against one apparatus.
    pub fn simulate(
        app: &MeasurementFamily,
        a: &AxisObservable,
        b: &AxisObservable,
        state: &QubitState,
        mean_counts: f64,
        sampling: Sampling,
    ) -> Result<Self> {
        let conditioned = |obs: &AxisObservable| -> Result<QubitState> {
            let p = obs.projector(1);
            let prob = (p * *state.matrix()).trace().re;
            if prob <= 1e-12 {
                return Err(EdurError::ZeroConditioningProbability);
            }
            QubitState::new((p * *state.matrix() * p).scale(c(1.0 / prob, 0.0)))
        };
        let conjugated = |obs: &AxisObservable| -> Result<QubitState> {
            let o = obs.matrix();
            QubitState::new(o * *state.matrix() * o)
        };

        let rho_given_a = conditioned(a)?;
        let rho_given_b = conditioned(b)?;
        let a_rho_a = conjugated(a)?;
        let b_rho_b = conjugated(b)?;

        let sim = |st: &QubitState, idx: u64| {
            simulate_counts(app, b, st, mean_counts, sampling, idx)
        };
        Ok(Self {
            rho: sim(state, 0)?,
            a_rho_a: sim(&a_rho_a, 1)?,
            rho_given_a: sim(&rho_given_a, 2)?,
            b_rho_b: sim(&b_rho_b, 3)?,
            rho_given_b: sim(&rho_given_b, 4)?,
            prefactor_a: prefactor(a, state),
            prefactor_b: prefactor(b, state),
            seed: match sampling {
                Sampling::Exact => None,
                Sampling::Poisson { seed } => Some(seed),
            },
            theta_oa: zy_angle(&app.output_operator_a(1)),
            theta_b: b.theta(),
            alpha: state.bloch_length(),
        })
    }

    /// Error and disturbance from intensities alone.
    pub fn reconstruct(&self) -> Result<Reconstruction> {
        self.reconstruct_inner(false)
    }

    /// Sign-flipped variant of one reconstruction term, used only to
    /// verify that the audit catches a broken pipeline.
    #[doc(hidden)]
    pub fn reconstruct_with_sign_fault(&self) -> Result<Reconstruction> {
        self.reconstruct_inner(true)
    }

    fn reconstruct_inner(&self, fault: bool) -> Result<Reconstruction> {
        let (oa_rho, ob_rho) = expectations_from_counts(&self.rho)?;
        let (oa_conj, _) = expectations_from_counts(&self.a_rho_a)?;
        let (oa_cond, _) = expectations_from_counts(&self.rho_given_a)?;
        let (_, ob_conj) = expectations_from_counts(&self.b_rho_b)?;
        let (_, ob_cond) = expectations_from_counts(&self.rho_given_b)?;

        let cond_sign = if fault { -1.0 } else { 1.0 };
        let error_sq = clamp_sq(
            2.0 - cond_sign * 4.0 * self.prefactor_a * oa_cond + oa_conj + oa_rho,
        );
        let disturbance_sq = clamp_sq(
            2.0 - cond_sign * 4.0 * self.prefactor_b * ob_cond + ob_conj + ob_rho,
        );

        let var_oa = |t: &CountTable, mean: f64| variance_of_mean(t, mean, true);
        let var_ob = |t: &CountTable, mean: f64| variance_of_mean(t, mean, false);
        let sigma_error_sq = (16.0 * self.prefactor_a * self.prefactor_a
            * var_oa(&self.rho_given_a, oa_cond)
            + var_oa(&self.a_rho_a, oa_conj)
            + var_oa(&self.rho, oa_rho))
        .sqrt();
        let sigma_disturbance_sq = (16.0 * self.prefactor_b * self.prefactor_b
            * var_ob(&self.rho_given_b, ob_cond)
            + var_ob(&self.b_rho_b, ob_conj)
            + var_ob(&self.rho, ob_rho))
        .sqrt();

        Ok(Reconstruction {
            point: EdurPoint {
                error: error_sq.max(0.0).sqrt(),
                disturbance: disturbance_sq.max(0.0).sqrt(),
                error_sq,
                disturbance_sq,
                theta_oa: self.theta_oa,
                theta_b: self.theta_b,
                alpha: self.alpha,
            },
            sigma_error_sq,
            sigma_disturbance_sq,
        })
    }
}

/// Delta-method variance of an intensity-weighted label mean under
/// independent Poisson cells (Var I = I plug-in).
fn variance_of_mean(table: &CountTable, mean: f64, use_m_label: bool) -> f64 {
    let total = table.total();
    if total <= 0.0 {
        return 0.0;
    }
    let mut var = 0.0;
    for m in OUTCOMES {
        for b in OUTCOMES {
            let label = if use_m_label { m as f64 } else { b as f64 };
            let d = (label - mean) / total;
            var += d * d * table.intensity(m, b);
        }
    }
    var
}
