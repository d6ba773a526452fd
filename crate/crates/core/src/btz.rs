//! Numeric verification kernel for the BTZ model space geometry.
//!
//! The branched cover of the model space carries coordinates `(τ, r, θ)`
//! with `r ≥ 0` and unbounded `θ`, metric `ds² = −2 dτ dr + dr² + r² dθ²`.
//! The developing map sends it into Minkowski space `(t, x, y)` with form
//! `η = diag(−1, 1, 1)`; its image is the causal future of the lightlike
//! line Δ = {(s, s, 0)}, and the holonomy of a loop around the singular
//! axis is a parabolic isometry fixing Δ pointwise.  Everything here is
//! double-precision arithmetic plus explicit tolerances; nothing is
//! symbolic.

use std::ops::RangeInclusive;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Tolerance for identities that are exact polynomials in the inputs
/// (equivariance, form preservation, nilpotency), scaled by magnitude.
pub const TOL_EXACT: f64 = 1e-12;
/// Tolerance for roundtrips through the inverse map (one division and one
/// cancellation deep), relative to the point magnitude.
pub const TOL_ROUNDTRIP: f64 = 1e-9;
/// Tolerance for finite-difference comparisons of the metric pullback.
pub const TOL_FD: f64 = 1e-7;

/// A point of the branched cover: `r ≥ 0`, `θ` unbounded (the base space
/// would take `θ` mod 2π).  At `r = 0` the angle is quotiented away: two
/// points with `r = 0` and equal `τ` are the same point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylPoint {
    pub tau: f64,
    pub r: f64,
    pub theta: f64,
}

impl CylPoint {
    pub fn new(tau: f64, r: f64, theta: f64) -> Self {
        CylPoint { tau, r, theta }
    }

    /// Max-norm magnitude, used to scale tolerances.
    fn magnitude(&self) -> f64 {
        self.tau.abs().max(self.r.abs()).max(self.theta.abs())
    }

    /// Equality as branched-cover points: coordinates within `tol` scaled,
    /// with `θ` ignored when both radii vanish at that scale.
    pub fn same_point(&self, other: &CylPoint, tol: f64) -> bool {
        let scale = 1f64.max(self.magnitude()).max(other.magnitude());
        let close = |a: f64, b: f64| (a - b).abs() <= tol * scale;
        if !close(self.tau, other.tau) || !close(self.r, other.r) {
            return false;
        }
        let both_singular = self.r.abs() <= tol * scale && other.r.abs() <= tol * scale;
        both_singular || close(self.theta, other.theta)
    }
}

/// A point of Minkowski space with the form `η = diag(−1, 1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinkowskiPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl MinkowskiPoint {
    pub fn new(t: f64, x: f64, y: f64) -> Self {
        MinkowskiPoint { t, x, y }
    }

    fn magnitude(&self) -> f64 {
        self.t.abs().max(self.x.abs()).max(self.y.abs())
    }

    /// Max-norm distance.
    pub fn dist(&self, other: &MinkowskiPoint) -> f64 {
        (self.t - other.t)
            .abs()
            .max((self.x - other.x).abs())
            .max((self.y - other.y).abs())
    }

    /// On the line Δ = {(s, s, 0)} (exact comparison).
    pub fn on_delta(&self) -> bool {
        self.t == self.x && self.y == 0.0
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum BtzError {
    #[error("NEGATIVE_R: r = {r} but the cover has r ≥ 0")]
    NegativeR { r: f64 },
    #[error("NOT_IN_IMAGE: ({t}, {x}, {y}) has t−x < 0, or t−x = 0 with y ≠ 0")]
    NotInImage { t: f64, x: f64, y: f64 },
    #[error("SINGULAR_POINT: the metric degenerates at r = 0")]
    SingularPoint,
    #[error("VERTEX_OFF_DELTA: ({t}, {x}, {y}) is not on the line t = x, y = 0")]
    VertexOffDelta { t: f64, x: f64, y: f64 },
    #[error("matrix does not preserve the Minkowski form: scaled residual {residual:e}")]
    NotAnIsometry { residual: f64 },
}

// ---------------------------------------------------------------------------
// 3×3 linear algebra, enough for isometries of the form.

type Mat3 = [[f64; 3]; 3];
type Vec3 = [f64; 3];

const ETA: Mat3 = [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn mat_vec(a: &Mat3, v: &Vec3) -> Vec3 {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
        a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
        a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
    ]
}

fn transpose(a: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

fn mat_max_abs(a: &Mat3) -> f64 {
    a.iter()
        .flatten()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

fn mat_sub(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][j] - b[i][j];
        }
    }
    c
}

/// An affine isometry of the Minkowski form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    linear: Mat3,
    translation: Vec3,
}

impl Isometry {
    /// Validates `MᵀηM = η` with residual scaled by `max(1, ‖M‖∞²)` —
    /// the products condition the comparison, so an absolute residual
    /// would spuriously reject large parabolic powers.
    pub fn new(linear: Mat3, translation: Vec3) -> Result<Self, BtzError> {
        let residual = form_residual(&linear);
        if residual > TOL_EXACT {
            return Err(BtzError::NotAnIsometry { residual });
        }
        Ok(Isometry {
            linear,
            translation,
        })
    }

    pub fn identity() -> Self {
        Isometry {
            linear: IDENTITY,
            translation: [0.0; 3],
        }
    }

    pub fn linear(&self) -> &Mat3 {
        &self.linear
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn apply(&self, m: &MinkowskiPoint) -> MinkowskiPoint {
        let v = mat_vec(&self.linear, &[m.t, m.x, m.y]);
        MinkowskiPoint::new(
            v[0] + self.translation[0],
            v[1] + self.translation[1],
            v[2] + self.translation[2],
        )
    }

    /// `self` after `other` (apply `other` first).
    pub fn compose(&self, other: &Isometry) -> Isometry {
        let linear = mat_mul(&self.linear, &other.linear);
        let t = mat_vec(&self.linear, &other.translation);
        Isometry {
            linear,
            translation: [
                t[0] + self.translation[0],
                t[1] + self.translation[1],
                t[2] + self.translation[2],
            ],
        }
    }
}

/// Scaled residual of `MᵀηM − η`.
pub fn form_residual(linear: &Mat3) -> f64 {
    let product = mat_mul(&mat_mul(&transpose(linear), &ETA), linear);
    let scale = 1f64.max(mat_max_abs(linear).powi(2));
    mat_max_abs(&mat_sub(&product, &ETA)) / scale
}

// ---------------------------------------------------------------------------
// The developing map and its inverse.

/// The defining polynomial formula, with no domain check: used for the
/// public map and for finite-difference probes that may step across r = 0.
fn dev_map_raw(tau: f64, r: f64, theta: f64) -> MinkowskiPoint {
    let bulge = 0.5 * r * theta * theta;
    MinkowskiPoint::new(tau + bulge, tau + bulge - r, -r * theta)
}

/// The developing map `(τ, r, θ) ↦ (τ + ½rθ², τ + ½rθ² − r, −rθ)`.
/// Satisfies `t − x = r`: exactly in exact arithmetic, and up to one
/// rounding of the larger coordinate in doubles (the subtraction that
/// produces `x` is the only rounding between the two).
pub fn dev_map(p: &CylPoint) -> Result<MinkowskiPoint, BtzError> {
    if p.r < 0.0 {
        return Err(BtzError::NegativeR { r: p.r });
    }
    Ok(dev_map_raw(p.tau, p.r, p.theta))
}

/// Membership in the image: the open half-space `t − x > 0` together with
/// the line Δ itself.  Exact comparisons; callers with noisy data should
/// snap first.
pub fn in_image(m: &MinkowskiPoint) -> bool {
    let r = m.t - m.x;
    r > 0.0 || (r == 0.0 && m.y == 0.0)
}

/// Inverse of the developing map on its image:
/// `r = t − x`; for `r > 0`, `θ = −y/r` and `τ = t − y²/(2r)`; on Δ the
/// preimage is the singular axis point `(τ = t, r = 0)` (with `θ = 0`
/// chosen as the representative of the collapsed angle).
pub fn dev_map_inverse(m: &MinkowskiPoint) -> Result<CylPoint, BtzError> {
    if !in_image(m) {
        return Err(BtzError::NotInImage {
            t: m.t,
            x: m.x,
            y: m.y,
        });
    }
    let r = m.t - m.x;
    if r > 0.0 {
        Ok(CylPoint::new(m.t - m.y * m.y / (2.0 * r), r, -m.y / r))
    } else {
        Ok(CylPoint::new(m.t, 0.0, 0.0))
    }
}

// ---------------------------------------------------------------------------
// Holonomy.

/// The parabolic isometry matching a shift `θ ↦ θ + α` on the cover:
/// `t' = t + ½α²(t−x) − αy`, `x' = x + ½α²(t−x) − αy`, `y' = y − α(t−x)`.
/// These form a one-parameter group; the loop holonomy is `α = 2π`.
pub fn parabolic_shift(alpha: f64) -> Isometry {
    let a = 0.5 * alpha * alpha;
    Isometry::new(
        [
            [1.0 + a, -a, -alpha],
            [a, 1.0 - a, -alpha],
            [-alpha, alpha, 1.0],
        ],
        [0.0; 3],
    )
    .expect("parabolic shifts preserve the form")
}

/// Holonomy of the meridian loop around the singular axis.
pub fn holonomy_generator() -> Isometry {
    parabolic_shift(2.0 * std::f64::consts::PI)
}

/// `k`-th power of the holonomy, computed in closed form as the shift by
/// `2πk` rather than by repeated multiplication.
pub fn holonomy_power(k: i32) -> Isometry {
    parabolic_shift(2.0 * std::f64::consts::PI * k as f64)
}

/// Scaled residual of the equivariance identity
/// `dev(τ, r, θ + 2πk) = φᵏ(dev(τ, r, θ))`.
///
/// The identity is an exact polynomial one, but evaluating the right side
/// multiplies large matrix entries into large coordinates before heavy
/// cancellation, so the residual is scaled by the magnitudes entering the
/// product rather than by the (possibly small) result.
pub fn equivariance_error(p: &CylPoint, k: i32) -> f64 {
    let image = dev_map_raw(p.tau, p.r, p.theta);
    let iso = holonomy_power(k);
    let moved = iso.apply(&image);
    let shifted = dev_map_raw(p.tau, p.r, p.theta + 2.0 * std::f64::consts::PI * k as f64);
    let scale = 1f64
        .max(shifted.magnitude())
        .max(image.magnitude() * mat_max_abs(iso.linear()));
    shifted.dist(&moved) / scale
}

// ---------------------------------------------------------------------------
// Causal structure.

/// Closed causal order of the flat form: `q − p` future causal, i.e.
/// `t_q − t_p ≥ sqrt((x_q−x_p)² + (y_q−y_p)²)`.
pub fn causal_leq(p: &MinkowskiPoint, q: &MinkowskiPoint) -> bool {
    let dt = q.t - p.t;
    let dx = q.x - p.x;
    let dy = q.y - p.y;
    dt >= (dx * dx + dy * dy).sqrt()
}

/// Strict chronological order (`I⁺`): timelike separation only.
fn chronological_lt(p: &MinkowskiPoint, q: &MinkowskiPoint) -> bool {
    let dt = q.t - p.t;
    let dx = q.x - p.x;
    let dy = q.y - p.y;
    dt > (dx * dx + dy * dy).sqrt()
}

/// Membership in the basic open set at a vertex `p ∈ Δ`:
/// `I⁺(p) ∪ ]p, +∞[`, the chronological future together with the part of
/// Δ strictly after `p` (which is lightlike, hence outside `I⁺`).
pub fn btz_open_contains(vertex: &MinkowskiPoint, m: &MinkowskiPoint) -> Result<bool, BtzError> {
    if !vertex.on_delta() {
        return Err(BtzError::VertexOffDelta {
            t: vertex.t,
            x: vertex.x,
            y: vertex.y,
        });
    }
    Ok(chronological_lt(vertex, m) || (m.on_delta() && m.t > vertex.t))
}

// ---------------------------------------------------------------------------
// Metric pullback.

/// The singular metric in coordinates `(τ, r, θ)`:
/// `ds² = −2 dτ dr + dr² + r² dθ²`.
fn expected_pullback(r: f64) -> Mat3 {
    [[0.0, -1.0, 0.0], [-1.0, 1.0, 0.0], [0.0, 0.0, r * r]]
}

/// Compares the finite-difference pullback `Jᵀ η J` of the developing map
/// with the singular metric at a regular point; returns the max absolute
/// entry error.
///
/// Central differences are exact here — every coordinate of the map is a
/// polynomial of degree ≤ 2 in each variable — so the step `h` only
/// controls rounding (error ∝ 1/h); probes may cross `r = 0` since the
/// polynomial extends.
pub fn metric_pullback_check(p: &CylPoint, h: f64) -> Result<f64, BtzError> {
    if p.r == 0.0 {
        return Err(BtzError::SingularPoint);
    }
    if p.r < 0.0 {
        return Err(BtzError::NegativeR { r: p.r });
    }
    assert!(h > 0.0, "finite-difference step must be positive");
    let column = |dtau: f64, dr: f64, dth: f64| -> Vec3 {
        let plus = dev_map_raw(p.tau + h * dtau, p.r + h * dr, p.theta + h * dth);
        let minus = dev_map_raw(p.tau - h * dtau, p.r - h * dr, p.theta - h * dth);
        [
            (plus.t - minus.t) / (2.0 * h),
            (plus.x - minus.x) / (2.0 * h),
            (plus.y - minus.y) / (2.0 * h),
        ]
    };
    let cols = [
        column(1.0, 0.0, 0.0),
        column(0.0, 1.0, 0.0),
        column(0.0, 0.0, 1.0),
    ];
    // J has the probe results as columns.
    let mut jac = [[0.0; 3]; 3];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..3 {
            jac[i][j] = col[i];
        }
    }
    let pullback = mat_mul(&mat_mul(&transpose(&jac), &ETA), &jac);
    Ok(mat_max_abs(&mat_sub(&pullback, &expected_pullback(p.r))))
}

// ---------------------------------------------------------------------------
// Quotient chart and monotonicity.

/// Same point of the quotient chart, where `q` is taken θ-shifted by
/// `2πk`: equal `(τ, r)` and matching angle, with the angle ignored on the
/// singular axis.
fn same_quotient_point(p: &CylPoint, q: &CylPoint, k: i32, tol: f64) -> bool {
    let shifted = CylPoint::new(q.tau, q.r, q.theta + 2.0 * std::f64::consts::PI * k as f64);
    p.same_point(&shifted, tol)
}

/// Verifies on a sample that the developing map descends to an
/// identification of the quotient by the holonomy: whenever images agree
/// up to `φᵏ` (to [`TOL_ROUNDTRIP`], scaled), the points agree up to the
/// `θ ↦ θ + 2πk` shift (and conversely), including injectivity as the
/// `k = 0` case.
pub fn quotient_chart_check(
    pairs: &[(CylPoint, CylPoint)],
    k_range: RangeInclusive<i32>,
) -> bool {
    for (p, q) in pairs {
        let image_p = dev_map(p).expect("chart samples satisfy r ≥ 0");
        let image_q = dev_map(q).expect("chart samples satisfy r ≥ 0");
        for k in k_range.clone() {
            let moved = holonomy_power(k).apply(&image_q);
            let scale = 1f64.max(image_p.magnitude()).max(moved.magnitude());
            let images_close = image_p.dist(&moved) <= TOL_ROUNDTRIP * scale;
            if images_close != same_quotient_point(p, q, k, TOL_ROUNDTRIP) {
                return false;
            }
        }
    }
    true
}

/// Outcome of the image-monotonicity check along a coordinate curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonotonicityReport {
    /// Whether every step belongs to the verified causal family:
    /// fixed `θ`, `Δτ ≥ 0`, and `0 ≤ Δr ≤ 2Δτ` (from `ds² ≤ 0` at fixed
    /// `θ`; `Δr = 0` gives the lightlike τ-lines).
    pub in_family: bool,
    /// Images pairwise causally ordered; vacuously true for curves
    /// outside the family, per the precondition.
    pub monotone: bool,
    /// First image pair violating the order, if any.
    pub first_violation: Option<(usize, usize)>,
}

/// Checks that the developing map is order-preserving along a curve of the
/// coordinate-causal family, comparing all image pairs (not just
/// consecutive ones).
///
/// The comparison uses the exact closed order, so exactly-lightlike steps
/// (`Δr = 0` or `Δr = 2Δτ`) sit on its boundary: probe them with
/// exactly-representable coordinates, or keep steps interior.
pub fn monotonicity_check(curve: &[CylPoint]) -> MonotonicityReport {
    let in_family = curve.windows(2).all(|w| {
        let dtau = w[1].tau - w[0].tau;
        let dr = w[1].r - w[0].r;
        w[1].theta == w[0].theta && dtau >= 0.0 && dr >= 0.0 && dr <= 2.0 * dtau
    });
    if !in_family {
        return MonotonicityReport {
            in_family,
            monotone: true,
            first_violation: None,
        };
    }
    let images: Vec<MinkowskiPoint> = curve
        .iter()
        .map(|p| dev_map(p).expect("curve points satisfy r ≥ 0"))
        .collect();
    for i in 0..images.len() {
        for j in (i + 1)..images.len() {
            if !causal_leq(&images[i], &images[j]) {
                return MonotonicityReport {
                    in_family,
                    monotone: false,
                    first_violation: Some((i, j)),
                };
            }
        }
    }
    MonotonicityReport {
        in_family,
        monotone: true,
        first_violation: None,
    }
}

// ---------------------------------------------------------------------------
// The seeded verification suite.

/// Knobs for [`run_verification`]; sampling ranges follow the documented
/// envelope τ ∈ [−10,10], r ∈ [0,10], θ ∈ [−20,20].
#[derive(Debug, Clone, Copy)]
pub struct VerificationConfig {
    pub samples: usize,
    pub seed: u64,
    /// Regular points probed by the metric pullback check.
    pub pullback_points: usize,
    /// Point pairs fed to the quotient chart check.
    pub chart_pairs: usize,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        VerificationConfig {
            samples: 100_000,
            seed: 42,
            pullback_points: 1_000,
            chart_pairs: 10_000,
        }
    }
}

/// Aggregated results; every error is a scaled max-norm as documented on
/// the tolerance constants.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub samples: usize,
    pub seed: u64,
    pub roundtrip_max_err: f64,
    pub equivariance_max_err: f64,
    pub pullback_max_err: f64,
    pub injectivity_violations: usize,
    pub parabolic_check: bool,
    pub image_violations: usize,
    pub quotient_chart_ok: bool,
}

/// Finite-difference step for the suite's pullback probes.  Differences
/// are exact for this map, so a large step minimizes rounding at the outer
/// edges of the sampling envelope.
const SUITE_FD_STEP: f64 = 0.5;

fn sample_point(rng: &mut ChaCha8Rng, index: usize) -> CylPoint {
    let tau = rng.random_range(-10.0..=10.0);
    // Visit the singular axis regularly; random draws almost never do.
    let r = if index % 100 == 7 {
        0.0
    } else {
        rng.random_range(0.0..=10.0)
    };
    let theta = rng.random_range(-20.0..=20.0);
    CylPoint::new(tau, r, theta)
}

/// Runs the whole numeric suite with a seeded generator.
pub fn run_verification(config: &VerificationConfig) -> VerificationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let phi = holonomy_generator();

    let mut roundtrip_max_err = 0.0f64;
    let mut equivariance_max_err = 0.0f64;
    let mut image_violations = 0usize;
    let mut points = Vec::with_capacity(config.samples);
    let mut images = Vec::with_capacity(config.samples);
    for i in 0..config.samples {
        let p = sample_point(&mut rng, i);
        let image = dev_map(&p).expect("sampled r ≥ 0");

        // Image characterization, forward direction.
        if !in_image(&image) {
            image_violations += 1;
        }

        // Roundtrip through the inverse, with the r = 0 identification.
        let back = dev_map_inverse(&image).expect("images lie in the image set");
        let scale = 1f64.max(p.magnitude());
        if !p.same_point(&back, TOL_ROUNDTRIP) {
            roundtrip_max_err = f64::INFINITY;
        } else {
            let dtau = (back.tau - p.tau).abs();
            let dr = (back.r - p.r).abs();
            let dtheta = if p.r == 0.0 {
                0.0
            } else {
                (back.theta - p.theta).abs()
            };
            roundtrip_max_err = roundtrip_max_err.max(dtau.max(dr).max(dtheta) / scale);
        }

        // Equivariance: shifting θ by 2π matches applying the holonomy.
        equivariance_max_err = equivariance_max_err.max(equivariance_error(&p, 1));

        points.push(p);
        images.push(image);
    }

    // Image characterization, reverse direction: random image points are
    // hit by the inverse.
    for _ in 0..config.samples.min(10_000) {
        let x = rng.random_range(-10.0..=10.0);
        let r = rng.random_range(f64::MIN_POSITIVE..=20.0);
        let y = rng.random_range(-20.0..=20.0);
        let m = MinkowskiPoint::new(x + r, x, y);
        debug_assert!(in_image(&m));
        match dev_map_inverse(&m) {
            Ok(p) => {
                let again = dev_map(&p).expect("inverse lands in the cover");
                let scale = 1f64.max(m.magnitude());
                if again.dist(&m) > TOL_ROUNDTRIP * scale {
                    image_violations += 1;
                }
            }
            Err(_) => image_violations += 1,
        }
    }

    // Injectivity: distinct cover points (after the r = 0 identification)
    // never collide in the image.  Sort by t and compare within windows.
    let mut injectivity_violations = 0usize;
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| images[a].t.total_cmp(&images[b].t));
    for (rank, &a) in order.iter().enumerate() {
        for &b in order[rank + 1..].iter() {
            let scale = 1f64.max(images[a].magnitude()).max(images[b].magnitude());
            if images[b].t - images[a].t > TOL_EXACT * scale {
                break;
            }
            if images[a].dist(&images[b]) <= TOL_EXACT * scale
                && !points[a].same_point(&points[b], TOL_ROUNDTRIP)
            {
                injectivity_violations += 1;
            }
        }
    }

    // Metric pullback on regular points.
    let mut pullback_max_err = 0.0f64;
    for _ in 0..config.pullback_points {
        let p = CylPoint::new(
            rng.random_range(-10.0..=10.0),
            rng.random_range(0.01..=10.0),
            rng.random_range(-20.0..=20.0),
        );
        let err = metric_pullback_check(&p, SUITE_FD_STEP).expect("sampled r > 0");
        pullback_max_err = pullback_max_err.max(err);
    }

    // Parabolic holonomy: (φ−I)³ = 0 but (φ−I)² ≠ 0, and φ fixes Δ.
    let nilpotent = {
        let d = mat_sub(phi.linear(), &IDENTITY);
        let d2 = mat_mul(&d, &d);
        let d3 = mat_mul(&d2, &d);
        let scale = 1f64.max(mat_max_abs(&d).powi(3));
        mat_max_abs(&d3) / scale <= TOL_EXACT
            && mat_max_abs(&d2) > TOL_EXACT
            && mat_max_abs(&d) > TOL_EXACT
    };
    let fixes_delta = (0..100).all(|i| {
        let s = -50.0 + i as f64;
        let v = MinkowskiPoint::new(s, s, 0.0);
        phi.apply(&v).dist(&v) <= TOL_EXACT * 1f64.max(s.abs())
    });
    let parabolic_check = nilpotent && fixes_delta && form_residual(phi.linear()) <= TOL_EXACT;

    // Quotient chart: mostly random pairs (generically unrelated), plus a
    // slice of constructed φᵏ-related pairs so the implication is not
    // vacuous, plus singular-axis identifications.
    let mut pairs = Vec::with_capacity(config.chart_pairs);
    for i in 0..config.chart_pairs {
        let p = sample_point(&mut rng, i);
        let q = match i % 10 {
            0 => {
                // θ-shift partner: same quotient point, k = shift.
                let k = rng.random_range(-3i32..=3);
                CylPoint::new(p.tau, p.r, p.theta + 2.0 * std::f64::consts::PI * k as f64)
            }
            1 => CylPoint::new(p.tau, 0.0, rng.random_range(-20.0..=20.0)),
            _ => sample_point(&mut rng, i),
        };
        pairs.push((p, q));
    }
    let quotient_chart_ok = quotient_chart_check(&pairs, -3..=3);

    VerificationReport {
        samples: config.samples,
        seed: config.seed,
        roundtrip_max_err,
        equivariance_max_err,
        pullback_max_err,
        injectivity_violations,
        parabolic_check,
        image_violations,
        quotient_chart_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn dev_map_examples() {
        // Singular axis to the origin.
        let m = dev_map(&CylPoint::new(0.0, 0.0, 123.0)).unwrap();
        assert_eq!((m.t, m.x, m.y), (0.0, 0.0, 0.0));
        // Direct substitution in the displayed formula.
        let m = dev_map(&CylPoint::new(1.0, 2.0, 0.0)).unwrap();
        assert_eq!((m.t, m.x, m.y), (1.0, -1.0, 0.0));
        let m = dev_map(&CylPoint::new(0.0, 1.0, 2.0)).unwrap();
        assert_eq!((m.t, m.x, m.y), (2.0, 1.0, -2.0));
        assert_eq!(
            dev_map(&CylPoint::new(0.0, -1.0, 0.0)),
            Err(BtzError::NegativeR { r: -1.0 })
        );
    }

    #[test]
    fn t_minus_x_recovers_r_to_machine_rounding() {
        // Algebraic identity t − x = r; in doubles the only rounding is
        // the subtraction producing x, so recovery is within an ulp of t.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..10_000 {
            let p = sample_point(&mut rng, i);
            let m = dev_map(&p).unwrap();
            let scale = 1f64.max(m.t.abs());
            assert!((m.t - m.x - p.r).abs() <= TOL_EXACT * scale);
        }
    }

    #[test]
    fn inverse_examples() {
        let p = dev_map_inverse(&MinkowskiPoint::new(0.0, 0.0, 0.0)).unwrap();
        assert_eq!((p.tau, p.r), (0.0, 0.0));
        let p = dev_map_inverse(&MinkowskiPoint::new(2.0, 1.0, -2.0)).unwrap();
        assert_eq!((p.tau, p.r, p.theta), (0.0, 1.0, 2.0));
        assert_eq!(
            dev_map_inverse(&MinkowskiPoint::new(0.0, 1.0, 0.0)),
            Err(BtzError::NotInImage {
                t: 0.0,
                x: 1.0,
                y: 0.0
            })
        );
    }

    #[test]
    fn image_membership() {
        assert!(in_image(&MinkowskiPoint::new(1.0, 0.0, 0.0)));
        // A point of Δ itself.
        assert!(in_image(&MinkowskiPoint::new(5.0, 5.0, 0.0)));
        // Boundary plane but off the line.
        assert!(!in_image(&MinkowskiPoint::new(0.0, 0.0, 1.0)));
    }

    #[test]
    fn holonomy_fixes_delta_and_matches_theta_shift() {
        let phi = holonomy_generator();
        let s = 3.7;
        let v = MinkowskiPoint::new(s, s, 0.0);
        assert!(phi.apply(&v).dist(&v) <= TOL_EXACT * s);
        // The matrix is derived from 𝒟(τ, r, θ+2π) = φ·𝒟(τ, r, θ); check
        // that derivation at a concrete point.
        let lhs = dev_map(&CylPoint::new(0.0, 1.0, 2.0 * PI)).unwrap();
        let rhs = phi.apply(&dev_map(&CylPoint::new(0.0, 1.0, 0.0)).unwrap());
        assert!(lhs.dist(&rhs) <= TOL_EXACT * 1f64.max(lhs.magnitude()));
    }

    #[test]
    fn holonomy_preserves_the_form_on_random_vectors() {
        let phi = holonomy_generator();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let v = MinkowskiPoint::new(
                rng.random_range(-10.0..=10.0),
                rng.random_range(-10.0..=10.0),
                rng.random_range(-10.0..=10.0),
            );
            let w = phi.apply(&v);
            let q = |m: &MinkowskiPoint| -m.t * m.t + m.x * m.x + m.y * m.y;
            let scale = 1f64.max(q(&v).abs()).max((v.magnitude() * mat_max_abs(phi.linear())).powi(2));
            assert!((q(&w) - q(&v)).abs() / scale <= TOL_ROUNDTRIP);
        }
    }

    #[test]
    fn holonomy_powers_agree_with_iterated_composition() {
        // One-parameter-group identity: the closed form for φᵏ equals φ
        // composed k times.
        let phi = holonomy_generator();
        let mut acc = Isometry::identity();
        for k in 0..=4i32 {
            let closed = holonomy_power(k);
            let d = mat_sub(closed.linear(), acc.linear());
            let scale = 1f64.max(mat_max_abs(closed.linear()));
            assert!(mat_max_abs(&d) / scale <= TOL_EXACT, "k = {k}");
            acc = phi.compose(&acc);
        }
        // Inverse direction too.
        let inv = holonomy_power(-1);
        let round = inv.compose(&phi);
        let d = mat_sub(round.linear(), &IDENTITY);
        assert!(mat_max_abs(&d) <= TOL_EXACT);
    }

    #[test]
    fn parabolic_nilpotency() {
        let phi = holonomy_generator();
        let d = mat_sub(phi.linear(), &IDENTITY);
        let d2 = mat_mul(&d, &d);
        let d3 = mat_mul(&d2, &d);
        assert!(mat_max_abs(&d2) > TOL_EXACT);
        assert!(mat_max_abs(&d3) / 1f64.max(mat_max_abs(&d).powi(3)) <= TOL_EXACT);
    }

    #[test]
    fn isometry_validation_rejects_non_isometries() {
        let err = Isometry::new([[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], [0.0; 3])
            .unwrap_err();
        assert!(matches!(err, BtzError::NotAnIsometry { residual } if residual > 0.1));
    }

    #[test]
    fn causal_order_examples() {
        let o = MinkowskiPoint::new(0.0, 0.0, 0.0);
        assert!(causal_leq(&o, &o));
        assert!(causal_leq(&o, &MinkowskiPoint::new(1.0, 0.0, 0.0)));
        assert!(!causal_leq(&o, &MinkowskiPoint::new(1.0, 2.0, 0.0)));
        // Lightlike boundary is included (closed order).
        assert!(causal_leq(&o, &MinkowskiPoint::new(1.0, 1.0, 0.0)));
    }

    #[test]
    fn btz_opens_include_the_forward_ray_but_not_the_vertex() {
        let vertex = MinkowskiPoint::new(0.0, 0.0, 0.0);
        assert!(btz_open_contains(&vertex, &MinkowskiPoint::new(1.0, 0.0, 0.0)).unwrap());
        // The forward piece of Δ is in the open set even though it is
        // lightlike, hence outside I⁺.
        assert!(btz_open_contains(&vertex, &MinkowskiPoint::new(1.0, 1.0, 0.0)).unwrap());
        assert!(!btz_open_contains(&vertex, &vertex).unwrap());
        assert_eq!(
            btz_open_contains(&MinkowskiPoint::new(0.0, 1.0, 0.0), &vertex),
            Err(BtzError::VertexOffDelta {
                t: 0.0,
                x: 1.0,
                y: 0.0
            })
        );
    }

    #[test]
    fn pullback_matches_the_singular_metric() {
        let err = metric_pullback_check(&CylPoint::new(0.0, 1.0, 0.0), 1e-5).unwrap();
        assert!(err <= 1e-8, "err = {err:e}");
        let err = metric_pullback_check(&CylPoint::new(2.0, 3.0, 5.0), 1e-5).unwrap();
        assert!(err <= 1e-7, "err = {err:e}");
        assert_eq!(
            metric_pullback_check(&CylPoint::new(0.0, 0.0, 1.0), 1e-5),
            Err(BtzError::SingularPoint)
        );
    }

    #[test]
    fn quotient_chart_examples() {
        let p = CylPoint::new(1.0, 2.0, 0.5);
        let shifted = CylPoint::new(1.0, 2.0, 0.5 + 2.0 * PI);
        assert!(quotient_chart_check(&[(p, shifted)], -3..=3));
        // Both on the singular axis with equal τ: the same point, however
        // the angles differ.
        let a = CylPoint::new(0.0, 0.0, 0.0);
        let b = CylPoint::new(0.0, 0.0, 9.0);
        assert!(quotient_chart_check(&[(a, b)], -3..=3));
        // Unrelated points with distant images are fine too.
        let c = CylPoint::new(5.0, 1.0, 0.0);
        assert!(quotient_chart_check(&[(p, c)], -3..=3));
    }

    #[test]
    fn monotonicity_along_the_sampled_families() {
        // Constant curve.
        let p = CylPoint::new(0.0, 1.0, 0.0);
        let report = monotonicity_check(&[p, p, p]);
        assert!(report.in_family && report.monotone);
        // Lightlike τ-line at r = 1, θ = 0: images (τ, τ−1, 0).  Dyadic
        // steps keep τ − 1 exact, so the boundary of the closed order is
        // hit bitwise rather than flickering across it.
        let curve: Vec<CylPoint> = (0..=16)
            .map(|i| CylPoint::new(i as f64 / 16.0, 1.0, 0.0))
            .collect();
        let report = monotonicity_check(&curve);
        assert!(report.in_family && report.monotone);
        // r increasing at constant τ: image displacement is spacelike, and
        // the curve is excluded from the family rather than failed.
        let curve = [CylPoint::new(0.0, 1.0, 0.0), CylPoint::new(0.0, 2.0, 0.0)];
        let report = monotonicity_check(&curve);
        assert!(!report.in_family);
        assert!(report.monotone);
        // Interior causal steps: Δr < 2Δτ, θ fixed but nonzero.
        let curve: Vec<CylPoint> = (0..=20)
            .map(|i| CylPoint::new(i as f64, 0.2 + 1.5 * i as f64, 3.0))
            .collect();
        let report = monotonicity_check(&curve);
        assert!(report.in_family && report.monotone);
        assert_eq!(report.first_violation, None);
    }

    #[test]
    fn verification_suite_smoke() {
        let report = run_verification(&VerificationConfig {
            samples: 2_000,
            seed: 42,
            pullback_points: 100,
            chart_pairs: 500,
        });
        assert!(report.roundtrip_max_err <= TOL_ROUNDTRIP);
        assert!(report.equivariance_max_err <= TOL_EXACT);
        assert!(report.pullback_max_err <= TOL_FD);
        assert_eq!(report.injectivity_violations, 0);
        assert!(report.parabolic_check);
        assert_eq!(report.image_violations, 0);
        assert!(report.quotient_chart_ok);
    }

    #[test]
    fn suite_is_deterministic_for_a_fixed_seed() {
        let config = VerificationConfig {
            samples: 500,
            seed: 9,
            pullback_points: 50,
            chart_pairs: 100,
        };
        let a = run_verification(&config);
        let b = run_verification(&config);
        assert_eq!(a.roundtrip_max_err, b.roundtrip_max_err);
        assert_eq!(a.equivariance_max_err, b.equivariance_max_err);
        assert_eq!(a.pullback_max_err, b.pullback_max_err);
    }
}
