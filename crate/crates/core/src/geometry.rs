//! Trapping triangles of the planar reductions and the rotation of the
//! rescaled Case-2 field.
//!
//! Triangles are stored counter-clockwise, so the inward normal of an edge
//! from `a` to `b` is the left normal `(-(b_y - a_y), b_x - a_x)`.
//!
//! ```
//! use sisfront::geometry::trap_check_case2;
//! use sisfront::model::{ModelParams, Regime};
//!
//! let p = ModelParams::new(2.0, 1.0, 0.0, 1.0, 0.01, Regime::Case2SlowInfected)?;
//! assert!(trap_check_case2(&p, 100)?.passed());
//! # Ok::<(), sisfront::Error>(())
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::reductions::{case2_reduced_rhs, case2_rescaled_rhs, case3_min_speed, case3_reduced_rhs};

/// Normal flux below this is accepted as zero on invariant sides.
pub const INVARIANT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionId {
    /// `(S, I)` triangle with vertices `D`, `B~`, `A~`.
    Case2,
    /// `(I, V)` triangle with vertices `B-`, `M`, `A-`.
    Case3,
}

/// Three vertices (counter-clockwise) and, optionally, an invariant side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangleSpec {
    pub region: RegionId,
    pub vertices: [[f64; 2]; 3],
    /// Side names, side `k` running from vertex `k` to vertex `k + 1`.
    pub side_names: [&'static str; 3],
    pub invariant_side: Option<usize>,
    /// Slope of the lower side, for the Case-3 triangle.
    pub r: Option<f64>,
}

impl TriangleSpec {
    /// `D = (S_A, 0)`, `B~ = (1, 0)`, `A~ = (S_A, I_A)`; the side `I = 0` is invariant.
    pub fn case2(params: &ModelParams) -> Self {
        let (s_a, i_a) = (params.s_endemic(), params.i_endemic());
        Self {
            region: RegionId::Case2,
            vertices: [[s_a, 0.0], [1.0, 0.0], [s_a, i_a]],
            side_names: ["l3", "l2", "l1"],
            invariant_side: Some(0),
            r: None,
        }
    }

    /// `B- = (0, 0)`, `M = (I_A, -r I_A)`, `A- = (I_A, 0)`.
    pub fn case3(params: &ModelParams, r: f64) -> Self {
        let p = params.i_endemic();
        Self {
            region: RegionId::Case3,
            vertices: [[0.0, 0.0], [p, -r * p], [p, 0.0]],
            side_names: ["s3", "s2", "s1"],
            invariant_side: None,
            r: Some(r),
        }
    }

    /// Twice the signed area; positive for counter-clockwise vertices.
    pub fn orientation(&self) -> f64 {
        let [a, b, c] = self.vertices;
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    }

    /// Endpoints and unit inward normal of side `k`.
    pub fn side(&self, k: usize) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let a = self.vertices[k];
        let b = self.vertices[(k + 1) % 3];
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len = dx.hypot(dy);
        (a, b, [-dy / len, dx / len])
    }

    /// Signed distances from `p` to the three side lines, positive inside.
    pub fn signed_distances(&self, p: [f64; 2]) -> [f64; 3] {
        std::array::from_fn(|k| {
            let (a, _, n) = self.side(k);
            (p[0] - a[0]) * n[0] + (p[1] - a[1]) * n[1]
        })
    }

    /// Inside or within `tol` of the closed triangle.
    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        self.signed_distances(p).iter().all(|d| *d >= -tol)
    }

    pub fn contains_strictly(&self, p: [f64; 2]) -> bool {
        self.signed_distances(p).iter().all(|d| *d > 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentReport {
    pub name: &'static str,
    pub samples: usize,
    pub invariant: bool,
    /// Smallest inward normal component (unit normal). For an invariant
    /// side this is the negated largest absolute normal component.
    pub min_margin: f64,
    pub worst_point: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrapReport {
    pub region: RegionId,
    pub triangle: TriangleSpec,
    pub c: f64,
    pub segments: Vec<SegmentReport>,
    /// Sample with the smallest margin over all non-invariant sides.
    pub worst_point: [f64; 2],
    pub worst_margin: f64,
    pub verdict: Verdict,
}

impl TrapReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn segment(&self, name: &str) -> Option<&SegmentReport> {
        self.segments.iter().find(|s| s.name == name)
    }
}

/// Sample points `a + t (b - a)` at `t = k/(n+1)`, `k = 1..=n`.
pub fn side_samples(a: [f64; 2], b: [f64; 2], n: usize) -> impl Iterator<Item = [f64; 2]> {
    (1..=n).map(move |k| {
        let t = k as f64 / (n + 1) as f64;
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    })
}

fn check_triangle<F>(tri: TriangleSpec, c: f64, n: usize, field: F) -> Result<TrapReport>
where
    F: Fn([f64; 2]) -> Result<[f64; 2]>,
{
    if n < 10 {
        return Err(Error::InvalidInput(format!("need at least 10 samples per side, got {n}")));
    }
    let mut segments = Vec::with_capacity(3);
    let mut worst = (f64::INFINITY, [f64::NAN; 2]);
    let mut pass = true;
    for k in 0..3 {
        let (a, b, nrm) = tri.side(k);
        let invariant = tri.invariant_side == Some(k);
        let mut seg = (f64::INFINITY, [f64::NAN; 2]);
        for p in side_samples(a, b, n) {
            let f = field(p)?;
            let flux = f[0] * nrm[0] + f[1] * nrm[1];
            let m = if invariant { -flux.abs() } else { flux };
            if !(m >= seg.0) {
                seg = (m, p);
            }
        }
        if invariant {
            pass &= -seg.0 <= INVARIANT_TOL;
        } else {
            pass &= seg.0 > 0.0;
            if !(seg.0 >= worst.0) {
                worst = seg;
            }
        }
        segments.push(SegmentReport { name: tri.side_names[k], samples: n, invariant, min_margin: seg.0, worst_point: seg.1 });
    }
    Ok(TrapReport {
        region: tri.region,
        triangle: tri,
        c,
        segments,
        worst_point: worst.1,
        worst_margin: worst.0,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
    })
}

/// Sample the Case-2 triangle and check that the planar field points inward.
pub fn trap_check_case2(params: &ModelParams, n: usize) -> Result<TrapReport> {
    check_triangle(TriangleSpec::case2(params), params.c(), n, |p| Ok(case2_reduced_rhs(p[0], p[1], params)))
}

/// Sample the Case-3 triangle with lower slope `r` at speed `c`.
///
/// Slopes inside `(0, c]` but outside the admissible interval produce a
/// failing report rather than an error, so the failure can be inspected.
pub fn trap_check_case3(params: &ModelParams, c: f64, r: f64, n: usize) -> Result<TrapReport> {
    let c_min = case3_min_speed(params);
    if !(c >= c_min) {
        return Err(Error::SpeedBelowBound { c, c_min });
    }
    if !(r > 0.0 && r <= c) {
        return Err(Error::SlopeOutOfInterval { r, c });
    }
    let q = params.with_speed(c)?;
    check_triangle(TriangleSpec::case3(&q, r), c, n, |p| case3_reduced_rhs(p[0], p[1], &q))
}

/// `F ^ dF/d(delta)` for the rescaled Case-2 field, up to the positive factor `beta`.
///
/// Negative inside the Case-2 triangle and zero on the sides `S = 1 - I` and `I = 0`.
pub fn wedge_rotation(s: f64, i: f64, params: &ModelParams) -> Result<f64> {
    let tri = TriangleSpec::case2(params);
    if !tri.contains([s, i], 1e-14) {
        return Err(Error::OutsideTriangle { s, i });
    }
    Ok((i + s - 1.0) * i * (params.saturation(s) - params.gamma() / params.beta()))
}

/// `m x m` probes strictly inside the Case-2 triangle.
pub fn interior_probe_grid(params: &ModelParams, m: usize) -> Vec<[f64; 2]> {
    let s_a = params.s_endemic();
    let mut out = Vec::with_capacity(m * m);
    for a in 0..m {
        let u = (a as f64 + 0.5) / m as f64;
        let s = s_a + u * (1.0 - s_a);
        for b in 0..m {
            let v = (b as f64 + 0.5) / m as f64;
            out.push([s, v * (1.0 - s)]);
        }
    }
    out
}

/// `n` points from `10^a` to `10^b`, evenly spaced in the exponent.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![10f64.powf(a)],
        _ => (0..n).map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64)).collect(),
    }
}

/// Angles of the rescaled field at each probe, one row per probe.
#[derive(Debug, Clone, Serialize)]
pub struct RotationScan {
    pub probes: Vec<[f64; 2]>,
    pub deltas: Vec<f64>,
    /// Unwrapped angles against the `S` axis.
    pub angles: Vec<Vec<f64>>,
    pub wedges: Vec<f64>,
    /// Probes whose angle sequence is not strictly decreasing.
    pub failures: Vec<usize>,
}

impl RotationScan {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn unwrap_angles(raw: &mut [f64]) {
    use std::f64::consts::PI;
    for k in 1..raw.len() {
        let mut d = raw[k] - raw[k - 1];
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        raw[k] = raw[k - 1] + d;
    }
}

/// Track the direction of the rescaled field as `delta` increases.
pub fn rotation_monotonicity_scan(params: &ModelParams, probes: &[[f64; 2]], deltas: &[f64]) -> Result<RotationScan> {
    if deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) || deltas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("deltas must be positive and strictly increasing".into()));
    }
    let tri = TriangleSpec::case2(params);
    let mut angles = Vec::with_capacity(probes.len());
    let mut wedges = Vec::with_capacity(probes.len());
    let mut failures = Vec::new();
    for (k, p) in probes.iter().enumerate() {
        if !tri.contains_strictly(*p) {
            return Err(Error::OutsideTriangle { s: p[0], i: p[1] });
        }
        let mut row = deltas
            .iter()
            .map(|d| case2_rescaled_rhs(p[0], p[1], params, *d).map(|f| f[1].atan2(f[0])))
            .collect::<Result<Vec<_>>>()?;
        unwrap_angles(&mut row);
        if row.windows(2).any(|w| !(w[1] < w[0])) {
            failures.push(k);
        }
        angles.push(row);
        wedges.push(wedge_rotation(p[0], p[1], params)?);
    }
    Ok(RotationScan { probes: probes.to_vec(), deltas: deltas.to_vec(), angles, wedges, failures })
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0) };
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

/// Distance from `p` to a polyline.
pub fn point_polyline_distance(p: [f64; 2], poly: &[[f64; 2]]) -> f64 {
    match poly.len() {
        0 => f64::INFINITY,
        1 => (p[0] - poly[0][0]).hypot(p[1] - poly[0][1]),
        _ => poly.windows(2).map(|w| point_segment_distance(p, w[0], w[1])).fold(f64::INFINITY, f64::min),
    }
}

/// Subdivide each segment of a polyline into `k` pieces.
pub fn refine_polyline(poly: &[[f64; 2]], k: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(poly.len() * k + 1);
    for w in poly.windows(2) {
        for j in 0..k {
            let t = j as f64 / k as f64;
            out.push([w[0][0] + t * (w[1][0] - w[0][0]), w[0][1] + t * (w[1][1] - w[0][1])]);
        }
    }
    if let Some(last) = poly.last() {
        out.push(*last);
    }
    out
}

/// Hausdorff distance between two polylines, evaluated at their vertices
/// after subdividing every segment into `refine` pieces.
pub fn hausdorff_polylines(a: &[[f64; 2]], b: &[[f64; 2]], refine: usize) -> f64 {
    let (ra, rb) = (refine_polyline(a, refine.max(1)), refine_polyline(b, refine.max(1)));
    let one_way = |xs: &[[f64; 2]], ys: &[[f64; 2]]| xs.iter().map(|p| point_polyline_distance(*p, ys)).fold(0.0, f64::max);
    one_way(&ra, b).max(one_way(&rb, a))
}

/// Largest distance from the points to the line `S + I = 1`.
pub fn sup_distance_to_limit_line(points: &[[f64; 2]]) -> f64 {
    points.iter().map(|p| (p[0] + p[1] - 1.0).abs() / std::f64::consts::SQRT_2).fold(0.0, f64::max)
}

/// The corner path `A~ -> D -> B~` approached by Case-2 fronts at small speed.
pub fn case2_corner_path(params: &ModelParams) -> Vec<[f64; 2]> {
    let (s_a, i_a) = (params.s_endemic(), params.i_endemic());
    vec![[s_a, i_a], [s_a, 0.0], [1.0, 0.0]]
}
