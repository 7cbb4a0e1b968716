//! Randomized numeric certification of the monotonicity, convexity and
//! sign properties of the ensemble spectrum, plus a counterexample search for
//! ensembles whose overlaps have unequal moduli.
//!
//! Each sample draws `p` uniformly from the simplex (every tenth sample lies
//! on a boundary edge with one `p_k = 0`) and `ϑ` uniformly from
//! `[0, theta_max]`, then scans `z_i = i/201`, `i = 1..=200`, keeping only
//! points with a valid spectrum. Monotonicity uses first differences with
//! slack `1e-10`, curvature uses second differences with slack `1e-8`.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};
use serde::{Deserialize, Serialize};

use crate::entropy::{h3_raw, hessian_h3};
use crate::error::{Error, Result};
use crate::spectrum::{cubic_eigenvalues, gram_spectrum_oracle, is_valid, DepressedCubic, EnsembleParams, GeneralOverlaps};

pub const Z_GRID_POINTS: usize = 200;
pub const FIRST_DIFF_SLACK: f64 = 1e-10;
pub const SECOND_DIFF_SLACK: f64 = 1e-8;
pub const BOUND_SLACK: f64 = 1e-12;
pub const ENTROPY_INCREASE_THRESHOLD: f64 = 1e-9;
const BOUNDARY_EVERY: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyId {
    GBounded,
    QShape,
    Nu4Nonneg,
    T0Increasing,
    T2Decreasing,
    T0PlusT1Increasing,
    T0Convex,
    T2Concave,
    HessianNegdef,
    EntropyMonotone,
    EntropyConcave,
}

impl PropertyId {
    pub const ALL: [PropertyId; 11] = [
        PropertyId::GBounded,
        PropertyId::QShape,
        PropertyId::Nu4Nonneg,
        PropertyId::T0Increasing,
        PropertyId::T2Decreasing,
        PropertyId::T0PlusT1Increasing,
        PropertyId::T0Convex,
        PropertyId::T2Concave,
        PropertyId::HessianNegdef,
        PropertyId::EntropyMonotone,
        PropertyId::EntropyConcave,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PropertyId::GBounded => "g_bounded",
            PropertyId::QShape => "q_shape",
            PropertyId::Nu4Nonneg => "nu4_nonneg",
            PropertyId::T0Increasing => "t0_increasing",
            PropertyId::T2Decreasing => "t2_decreasing",
            PropertyId::T0PlusT1Increasing => "t0_plus_t1_increasing",
            PropertyId::T0Convex => "t0_convex",
            PropertyId::T2Concave => "t2_concave",
            PropertyId::HessianNegdef => "hessian_negdef",
            PropertyId::EntropyMonotone => "entropy_monotone",
            PropertyId::EntropyConcave => "entropy_concave",
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PropertyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PropertyId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownProperty(s.to_string()))
    }
}

/// The sample point at which a violation margin was measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleWitness {
    pub sample: usize,
    pub probs: [f64; 3],
    pub theta: f64,
    pub z: f64,
}

/// `passed` iff `worst_violation ≤ slack`, where `slack` is the tolerance of
/// the check that came closest to failing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property_id: PropertyId,
    pub samples_tested: usize,
    pub worst_violation: f64,
    pub slack: f64,
    pub worst_witness: Option<SampleWitness>,
    pub passed: bool,
    pub outside_proof_region: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub theta_max: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { theta_max: FRAC_PI_2 }
    }
}

/// `ν₄(z) = β(4α³+27γ²) + z²(8α²β²+12αδ²+18βγδ) + 36z³αδε + z⁴(α(4β³+27ε²)+3βδ²)`.
pub fn nu4_eval(probs: [f64; 3], theta: f64, z: f64) -> Result<f64> {
    let e = EnsembleParams::new(probs, z, theta)?;
    Ok(nu4_from_cubic(&DepressedCubic::from_ensemble(&e), z))
}

fn nu4_from_cubic(c: &DepressedCubic, z: f64) -> f64 {
    let (a, b, g, d, e) = (c.alpha, c.beta, c.gamma, c.delta, c.epsilon);
    let z2 = z * z;
    b * (4.0 * a.powi(3) + 27.0 * g * g)
        + z2 * (8.0 * a * a * b * b + 12.0 * a * d * d + 18.0 * b * g * d)
        + 36.0 * z2 * z * a * d * e
        + z2 * z2 * (a * (4.0 * b.powi(3) + 27.0 * e * e) + 3.0 * b * d * d)
}

/// Everything a property needs at one grid point.
#[derive(Debug, Clone, Copy)]
struct Point {
    index: usize,
    z: f64,
    cubic: DepressedCubic,
    t: [f64; 3],
    x: [f64; 3],
    entropy: f64,
}

fn z_grid() -> impl Iterator<Item = (usize, f64)> {
    (1..=Z_GRID_POINTS).map(|i| (i, i as f64 / (Z_GRID_POINTS + 1) as f64))
}

fn profile(probs: [f64; 3], theta: f64) -> Result<Vec<Point>> {
    let mut points = Vec::with_capacity(Z_GRID_POINTS);
    for (index, z) in z_grid() {
        let e = EnsembleParams::new(probs, z, theta)?;
        if !is_valid(&e).valid {
            continue;
        }
        let cubic = DepressedCubic::from_ensemble(&e);
        let Ok(mut x) = cubic_eigenvalues(&cubic) else {
            continue;
        };
        x.sort_by(|a, b| b.total_cmp(a));
        let t = x.map(|v| v - 1.0 / 3.0);
        if x[2] < -crate::spectrum::EIGEN_CLAMP {
            continue;
        }
        let clamped = x.map(|v| v.max(0.0));
        points.push(Point {
            index,
            z,
            cubic,
            t,
            x: clamped,
            entropy: h3_raw(clamped),
        });
    }
    Ok(points)
}

struct Tracker {
    excess: f64,
    violation: f64,
    slack: f64,
    witness: Option<SampleWitness>,
}

impl Tracker {
    fn new() -> Self {
        Self {
            excess: f64::NEG_INFINITY,
            violation: f64::NEG_INFINITY,
            slack: 0.0,
            witness: None,
        }
    }

    fn update(&mut self, violation: f64, slack: f64, witness: SampleWitness) {
        let excess = violation - slack;
        if excess > self.excess {
            self.excess = excess;
            self.violation = violation;
            self.slack = slack;
            self.witness = Some(witness);
        }
    }
}

fn first_differences<'a>(
    pts: &'a [Point],
    f: impl Fn(&Point) -> f64 + 'a,
) -> impl Iterator<Item = (f64, &'a Point)> + 'a {
    pts.windows(2)
        .filter(|w| w[1].index == w[0].index + 1)
        .map(move |w| (f(&w[1]) - f(&w[0]), &w[1]))
}

fn second_differences<'a>(
    pts: &'a [Point],
    f: impl Fn(&Point) -> f64 + 'a,
) -> impl Iterator<Item = (f64, &'a Point)> + 'a {
    pts.windows(3)
        .filter(|w| w[1].index == w[0].index + 1 && w[2].index == w[1].index + 1)
        .map(move |w| (f(&w[2]) - 2.0 * f(&w[1]) + f(&w[0]), &w[1]))
}

fn check_sample(id: PropertyId, pts: &[Point], mut record: impl FnMut(f64, f64, &Point)) {
    let t0 = |p: &Point| p.t[0];
    let t2 = |p: &Point| p.t[2];
    match id {
        PropertyId::GBounded => {
            for p in pts {
                if let Some(g) = p.cubic.g() {
                    record(g.abs() - 1.0, BOUND_SLACK, p);
                }
            }
        }
        PropertyId::QShape => {
            for (d, p) in first_differences(pts, |p| p.cubic.q) {
                record(d, FIRST_DIFF_SLACK, p);
            }
            for (d, p) in second_differences(pts, |p| p.cubic.q) {
                record(d, SECOND_DIFF_SLACK, p);
            }
        }
        PropertyId::Nu4Nonneg => {
            for p in pts {
                record(-nu4_from_cubic(&p.cubic, p.z), BOUND_SLACK, p);
            }
        }
        PropertyId::T0Increasing => {
            for (d, p) in first_differences(pts, t0) {
                record(-d, FIRST_DIFF_SLACK, p);
            }
        }
        PropertyId::T2Decreasing => {
            for (d, p) in first_differences(pts, t2) {
                record(d, FIRST_DIFF_SLACK, p);
            }
        }
        PropertyId::T0PlusT1Increasing => {
            for (d, p) in first_differences(pts, |p| p.t[0] + p.t[1]) {
                record(-d, FIRST_DIFF_SLACK, p);
            }
        }
        PropertyId::T0Convex => {
            for (d, p) in second_differences(pts, t0) {
                record(-d, SECOND_DIFF_SLACK, p);
            }
        }
        PropertyId::T2Concave => {
            for (d, p) in second_differences(pts, t2) {
                record(d, SECOND_DIFF_SLACK, p);
            }
        }
        PropertyId::HessianNegdef => {
            for p in pts {
                let Ok(h) = hessian_h3(p.x[0], p.x[2]) else {
                    continue;
                };
                let mean = 0.5 * (h[0][0] + h[1][1]);
                let radius = (0.25 * (h[0][0] - h[1][1]).powi(2) + h[0][1] * h[1][0]).sqrt();
                record(mean + radius, BOUND_SLACK, p);
            }
        }
        PropertyId::EntropyMonotone => {
            for (d, p) in first_differences(pts, |p| p.entropy) {
                record(d, FIRST_DIFF_SLACK, p);
            }
        }
        PropertyId::EntropyConcave => {
            for (d, p) in second_differences(pts, |p| p.entropy) {
                record(d, SECOND_DIFF_SLACK, p);
            }
        }
    }
}

fn sample_probs(rng: &mut ChaCha8Rng, index: usize, dirichlet: &Dirichlet<f64, 3>) -> [f64; 3] {
    if index % BOUNDARY_EVERY == BOUNDARY_EVERY - 1 {
        let zero = rng.random_range(0..3);
        let u: f64 = rng.random();
        let mut p = [0.0; 3];
        p[(zero + 1) % 3] = u;
        p[(zero + 2) % 3] = 1.0 - u;
        p
    } else {
        let p = dirichlet.sample(rng);
        // Renormalize so the simplex check sees an exact unit sum.
        let total: f64 = p.iter().sum();
        p.map(|v| v / total)
    }
}

pub fn verify(id: PropertyId, samples: usize, seed: u64) -> Result<PropertyReport> {
    verify_with(id, samples, seed, &VerifyOptions::default())
}

/// Same as [`verify`], by property name.
pub fn verify_named(name: &str, samples: usize, seed: u64) -> Result<PropertyReport> {
    verify(name.parse()?, samples, seed)
}

pub fn verify_with(id: PropertyId, samples: usize, seed: u64, options: &VerifyOptions) -> Result<PropertyReport> {
    if samples == 0 {
        return Err(Error::Domain("sample count must be >= 1".into()));
    }
    if !(options.theta_max >= 0.0 && options.theta_max <= std::f64::consts::PI) {
        return Err(Error::Domain(format!("theta_max must lie in [0, pi], got {}", options.theta_max)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirichlet = Dirichlet::new([1.0; 3]).map_err(|e| Error::Domain(e.to_string()))?;
    let mut tracker = Tracker::new();
    for sample in 0..samples {
        let probs = sample_probs(&mut rng, sample, &dirichlet);
        let theta = rng.random::<f64>() * options.theta_max;
        let pts = profile(probs, theta)?;
        check_sample(id, &pts, |violation, slack, p| {
            tracker.update(
                violation,
                slack,
                SampleWitness {
                    sample,
                    probs,
                    theta,
                    z: p.z,
                },
            )
        });
    }
    Ok(PropertyReport {
        property_id: id,
        samples_tested: samples,
        worst_violation: tracker.violation,
        slack: tracker.slack,
        worst_witness: tracker.witness,
        passed: tracker.excess <= 0.0,
        outside_proof_region: options.theta_max > FRAC_PI_2,
    })
}

/// Largest eigenvalue disagreement between the cubic route and the Gram oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleDiff {
    pub samples_tested: usize,
    pub skipped_invalid: usize,
    pub max_abs_error: f64,
    pub worst_witness: Option<SampleWitness>,
}

/// Draws `samples` valid uniform-modulus ensembles (simplex weights,
/// `ϑ ~ U[0, theta_max]`, `z` on the verification grid) and compares
/// [`crate::spectrum::spectrum`] against [`gram_spectrum_oracle`].
pub fn oracle_diff(samples: usize, seed: u64, theta_max: f64) -> Result<OracleDiff> {
    if samples == 0 {
        return Err(Error::Domain("sample count must be >= 1".into()));
    }
    if !(0.0..=std::f64::consts::PI).contains(&theta_max) {
        return Err(Error::Domain(format!("theta_max must lie in [0, pi], got {theta_max}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirichlet = Dirichlet::new([1.0; 3]).map_err(|e| Error::Domain(e.to_string()))?;
    let mut out = OracleDiff {
        samples_tested: 0,
        skipped_invalid: 0,
        max_abs_error: 0.0,
        worst_witness: None,
    };
    let mut draw = 0;
    while out.samples_tested < samples {
        let probs = sample_probs(&mut rng, draw, &dirichlet);
        draw += 1;
        let theta = rng.random::<f64>() * theta_max;
        let z = rng.random_range(1..=Z_GRID_POINTS) as f64 / (Z_GRID_POINTS + 1) as f64;
        let e = EnsembleParams::new(probs, z, theta)?;
        let fast = match is_valid(&e).valid {
            true => crate::spectrum::spectrum(&e).ok(),
            false => None,
        };
        let Some(fast) = fast else {
            out.skipped_invalid += 1;
            continue;
        };
        let slow = gram_spectrum_oracle(&probs, &GeneralOverlaps::from_uniform(z, theta)?)?;
        let err = (0..3)
            .map(|k| (fast.as_array()[k] - slow.as_array()[k]).abs())
            .fold(0.0, f64::max);
        if out.worst_witness.is_none() || err > out.max_abs_error {
            out.max_abs_error = err;
            out.worst_witness = Some(SampleWitness {
                sample: out.samples_tested,
                probs,
                theta,
                z,
            });
        }
        out.samples_tested += 1;
    }
    Ok(out)
}

/// Whether the search may use distinct moduli for the three overlaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    #[default]
    Unequal,
    Equal,
}

/// Two overlap triples with `lower ≤ upper` componentwise in modulus, the
/// same phases, and strictly larger ensemble entropy at `upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityWitness {
    pub trial: usize,
    pub probs: [f64; 3],
    pub phases: [f64; 3],
    pub lower_moduli: [f64; 3],
    pub upper_moduli: [f64; 3],
    pub lower_entropy: f64,
    pub upper_entropy: f64,
}

impl MonotonicityWitness {
    pub fn lower(&self) -> Result<GeneralOverlaps> {
        GeneralOverlaps::from_polar(self.lower_moduli, self.phases)
    }

    pub fn upper(&self) -> Result<GeneralOverlaps> {
        GeneralOverlaps::from_polar(self.upper_moduli, self.phases)
    }
}

fn oracle_entropy(probs: &[f64; 3], moduli: [f64; 3], phases: [f64; 3]) -> Option<f64> {
    let ov = GeneralOverlaps::from_polar(moduli, phases).ok()?;
    let s = gram_spectrum_oracle(probs, &ov).ok()?;
    Some(h3_raw(s.as_array()))
}

/// Random search for an entropy increase along a componentwise increase of
/// the overlap moduli. The folded total phase is drawn from `[0, π/2]`.
/// Trials whose Gram matrix is not positive semidefinite are skipped but
/// still count against the budget.
pub fn find_monotonicity_counterexample(budget: usize, seed: u64, mode: SearchMode) -> Option<MonotonicityWitness> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirichlet = Dirichlet::new([1.0; 3]).ok()?;
    for trial in 1..=budget {
        let p = dirichlet.sample(&mut rng);
        let total: f64 = p.iter().sum();
        let probs = p.map(|v| v / total);
        let folded = rng.random::<f64>() * FRAC_PI_2;
        let (a, b): (f64, f64) = (rng.random::<f64>() * TAU, rng.random::<f64>() * TAU);
        let phases = [a, b, folded - a - b];
        let (lower, upper) = match mode {
            SearchMode::Unequal => {
                let u: [f64; 3] = [rng.random(), rng.random(), rng.random()];
                let step: [f64; 3] = [rng.random(), rng.random(), rng.random()];
                let v = [0, 1, 2].map(|i| u[i] + step[i] * (1.0 - u[i]));
                (u, v)
            }
            SearchMode::Equal => {
                let u: f64 = rng.random();
                let v = u + rng.random::<f64>() * (1.0 - u);
                ([u; 3], [v; 3])
            }
        };
        let (Some(h_lower), Some(h_upper)) = (
            oracle_entropy(&probs, lower, phases),
            oracle_entropy(&probs, upper, phases),
        ) else {
            continue;
        };
        if h_upper > h_lower + ENTROPY_INCREASE_THRESHOLD {
            return Some(MonotonicityWitness {
                trial,
                probs,
                phases,
                lower_moduli: lower,
                upper_moduli: upper,
                lower_entropy: h_lower,
                upper_entropy: h_upper,
            });
        }
    }
    None
}
