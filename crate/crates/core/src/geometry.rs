//! Partitions of the unit circle anchored at the sensor boundary, and arcs
//! made of adjacent partition intervals.
//!
//! Arcs are stored by interval index (`start`, `span`), never by floating
//! endpoints, so two arcs are equal exactly when they cover the same
//! intervals. Interval indices are 0-based: interval `i` is
//! `[alpha[i], alpha[i + 1])`.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::linalg::{self, Mat2};
use crate::math;

/// Tolerance (radians) for classifying an angle as lying on a partition
/// boundary.
pub const ANGLE_TOL: f64 = 1e-12;

/// Binary sensor value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Neg,
    Pos,
}

impl Sign {
    pub const ALL: [Sign; 2] = [Sign::Neg, Sign::Pos];

    pub fn value(self) -> i8 {
        match self {
            Sign::Neg => -1,
            Sign::Pos => 1,
        }
    }

    pub fn from_value(v: i64) -> Option<Sign> {
        match v {
            -1 => Some(Sign::Neg),
            1 => Some(Sign::Pos),
            _ => None,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Pos => Sign::Neg,
        }
    }

    /// 0 for `Neg`, 1 for `Pos`.
    pub fn index(self) -> usize {
        match self {
            Sign::Neg => 0,
            Sign::Pos => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("sensor vector must be nonzero")]
    ZeroSensor,
    #[error("partition needs n >= 1")]
    EmptyPartition,
    #[error("expected {expected} partition angles, got {got}")]
    AngleCount { expected: usize, got: usize },
    #[error("partition angles must be strictly increasing (violated at index {0})")]
    NotIncreasing(usize),
    #[error("partition angle {index} must equal alpha_1 + {turns} pi")]
    BadAnchor { index: usize, turns: usize },
    #[error("first partition angle must lie in [0, pi)")]
    FirstAngleOutOfRange,
    #[error("interval {0} straddles the sensor boundary")]
    MixedSign(usize),
    #[error("map is singular")]
    SingularMap,
    #[error("non-finite angle")]
    NonFinite,
}

/// Direction of the sensor boundary `c' b(theta) = 0`, normalized to `[0, pi)`.
pub fn sensor_boundary(c: [f64; 2]) -> Result<f64, GeometryError> {
    if c[0] == 0.0 && c[1] == 0.0 {
        return Err(GeometryError::ZeroSensor);
    }
    if !c[0].is_finite() || !c[1].is_finite() {
        return Err(GeometryError::NonFinite);
    }
    if c[1] == 0.0 {
        return Ok(PI / 2.0);
    }
    let a = math::atan2(-c[0], c[1]);
    // atan2 of the direction (c2, -c1) lands in (-pi, pi]; fold onto [0, pi).
    Ok(math::rem_euclid(a, PI))
}

/// A partition of the unit circle into `2n` half-open intervals
/// `[alpha[i], alpha[i+1])`, with `alpha[n] = alpha[0] + pi` and
/// `alpha[2n] = alpha[0] + 2 pi`.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    n: usize,
    alpha: Vec<f64>,
    first_half_sign: Sign,
}

/// An arc of `span` adjacent partition intervals starting at interval
/// `start`, counted counterclockwise. `span == 2n` is the full circle, which
/// is always stored with `start == 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    pub start: usize,
    pub span: usize,
}

impl Arc {
    pub const fn new(start: usize, span: usize) -> Self {
        Arc { start, span }
    }
}

/// Result of intersecting an arc with a half circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Refined {
    Empty,
    /// The intersection is exactly this arc.
    Exact(Arc),
    /// The intersection had two components; this is the shorter minimal
    /// arc covering both.
    Split(Arc),
}

impl Refined {
    pub fn arc(self) -> Option<Arc> {
        match self {
            Refined::Empty => None,
            Refined::Exact(a) | Refined::Split(a) => Some(a),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
}

/// A connected set of directions traversed from `start` through `length`
/// radians. Counterclockwise intervals are `[start, start + length)`,
/// clockwise ones are `(start - length, start]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngularInterval {
    pub start: f64,
    pub length: f64,
    pub orientation: Orientation,
}

impl AngularInterval {
    pub fn ccw(start: f64, length: f64) -> Self {
        AngularInterval { start, length, orientation: Orientation::CounterClockwise }
    }

    /// Counterclockwise lower endpoint and whether it belongs to the set.
    fn lower(&self) -> (f64, bool) {
        match self.orientation {
            Orientation::CounterClockwise => (self.start, true),
            Orientation::Clockwise => (self.start - self.length, false),
        }
    }

    /// True if `theta` lies in the interval, allowing `tol` of slack.
    pub fn contains(&self, theta: f64, tol: f64) -> bool {
        if self.length >= TAU - tol {
            return true;
        }
        let (lo, _) = self.lower();
        let off = math::rem_euclid(theta - lo, TAU);
        off <= self.length + tol || off >= TAU - tol
    }
}

impl Partition {
    /// Builds the uniform partition when `custom` is `None`, otherwise
    /// validates the given `2n + 1` angles.
    pub fn build(c: [f64; 2], n: usize, custom: Option<&[f64]>) -> Result<Self, GeometryError> {
        match custom {
            None => Partition::uniform(c, n),
            Some(angles) => {
                if angles.len() != 2 * n + 1 {
                    return Err(GeometryError::AngleCount { expected: 2 * n + 1, got: angles.len() });
                }
                Partition::with_angles(c, angles)
            }
        }
    }

    /// `2n` intervals of width `pi / n` starting at the sensor boundary.
    pub fn uniform(c: [f64; 2], n: usize) -> Result<Self, GeometryError> {
        if n == 0 {
            return Err(GeometryError::EmptyPartition);
        }
        let a1 = sensor_boundary(c)?;
        let width = PI / n as f64;
        let mut alpha: Vec<f64> = (0..=2 * n).map(|i| a1 + i as f64 * width).collect();
        alpha[n] = a1 + PI;
        alpha[2 * n] = a1 + TAU;
        Ok(Partition { n, first_half_sign: half_sign(c, a1), alpha })
    }

    pub fn with_angles(c: [f64; 2], angles: &[f64]) -> Result<Self, GeometryError> {
        let a1 = sensor_boundary(c)?;
        if angles.len() < 3 || angles.len().is_multiple_of(2) {
            return Err(GeometryError::AngleCount { expected: 2 * (angles.len() / 2).max(1) + 1, got: angles.len() });
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let n = angles.len() / 2;
        let first = angles[0];
        if !(0.0..PI).contains(&first) {
            return Err(GeometryError::FirstAngleOutOfRange);
        }
        if let Some(i) = angles.windows(2).position(|w| w[1] <= w[0]) {
            return Err(GeometryError::NotIncreasing(i + 1));
        }
        for (index, turns) in [(n, 1), (2 * n, 2)] {
            if (angles[index] - first - turns as f64 * PI).abs() > ANGLE_TOL {
                return Err(GeometryError::BadAnchor { index, turns });
            }
        }
        // With both anchors in place, an interval has constant sensor sign
        // exactly when alpha_1 sits on the sensor boundary.
        for zero in [a1, a1 + PI] {
            let zero = first + math::rem_euclid(zero - first, TAU);
            let inside = angles.windows(2).position(|w| zero > w[0] + ANGLE_TOL && zero < w[1] - ANGLE_TOL);
            if let Some(i) = inside {
                return Err(GeometryError::MixedSign(i));
            }
        }
        let mut alpha = angles.to_vec();
        alpha[n] = first + PI;
        alpha[2 * n] = first + TAU;
        Ok(Partition { n, first_half_sign: half_sign(c, first), alpha })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of intervals, `2n`.
    pub fn interval_count(&self) -> usize {
        2 * self.n
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha[0]
    }

    /// Sensor sign on `[alpha_1, alpha_1 + pi)`.
    pub fn first_half_sign(&self) -> Sign {
        self.first_half_sign
    }

    pub fn interval_width(&self, i: usize) -> f64 {
        self.alpha[i + 1] - self.alpha[i]
    }

    /// `theta` folded into `[alpha_1, alpha_1 + 2 pi)`.
    pub fn canonical(&self, theta: f64) -> f64 {
        self.alpha[0] + math::rem_euclid(theta - self.alpha[0], TAU)
    }

    /// Offset of `theta` from `alpha_1`, in `[0, 2 pi)`.
    fn offset(&self, theta: f64) -> f64 {
        math::rem_euclid(theta - self.alpha[0], TAU)
    }

    /// Boundary offsets from `alpha_1`, unrolled over two turns:
    /// index `j` in `0..=4n`.
    fn unrolled_boundary(&self, j: usize) -> f64 {
        let m = self.interval_count();
        let turns = (j / m) as f64;
        self.alpha[j % m] - self.alpha[0] + turns * TAU
    }

    /// Index of the interval containing `theta` (half-open, no snapping).
    pub fn locate(&self, theta: f64) -> usize {
        let off = self.offset(theta);
        let m = self.interval_count();
        // Largest i with boundary(i) <= off.
        let i = self.alpha[..m].partition_point(|a| a - self.alpha[0] <= off);
        i.saturating_sub(1).min(m - 1)
    }

    /// Sensor sign of direction `theta`, resolving the boundary by the
    /// half-open halves.
    pub fn sensor_sign(&self, theta: f64) -> Sign {
        sign_of_offset(self.offset(theta), self.first_half_sign)
    }

    pub fn full(&self) -> Arc {
        Arc::new(0, self.interval_count())
    }

    pub fn is_full(&self, q: Arc) -> bool {
        q.span >= self.interval_count()
    }

    /// The half circle whose sensor sign is `y`.
    pub fn half(&self, y: Sign) -> Arc {
        if y == self.first_half_sign {
            Arc::new(0, self.n)
        } else {
            Arc::new(self.n, self.n)
        }
    }

    /// Validated, canonical arc.
    pub fn arc(&self, start: usize, span: usize) -> Option<Arc> {
        let m = self.interval_count();
        if start >= m || span == 0 || span > m {
            return None;
        }
        Some(if span == m { self.full() } else { Arc::new(start, span) })
    }

    /// All potential states: `2n (2n - 1) + 1` arcs.
    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        let m = self.interval_count();
        (1..m).flat_map(move |span| (0..m).map(move |start| Arc::new(start, span))).chain(core::iter::once(self.full()))
    }

    /// Partition intervals spanned by `q`, in counterclockwise order.
    pub fn intervals(&self, q: Arc) -> impl Iterator<Item = usize> {
        let m = self.interval_count();
        (0..q.span.min(m)).map(move |k| (q.start + k) % m)
    }

    /// True if interval `i` belongs to `q`.
    pub fn spans_interval(&self, q: Arc, i: usize) -> bool {
        let m = self.interval_count();
        (i + m - q.start) % m < q.span
    }

    pub fn start_angle(&self, q: Arc) -> f64 {
        self.alpha[q.start]
    }

    pub fn length(&self, q: Arc) -> f64 {
        if self.is_full(q) {
            return TAU;
        }
        self.intervals(q).map(|i| self.interval_width(i)).sum()
    }

    /// Angle range of `q` as a counterclockwise interval.
    pub fn range(&self, q: Arc) -> AngularInterval {
        AngularInterval::ccw(self.start_angle(q), self.length(q))
    }

    /// True if direction `theta` lies in `q` up to `tol` radians of slack
    /// at either end.
    pub fn contains(&self, q: Arc, theta: f64, tol: f64) -> bool {
        if self.is_full(q) {
            return true;
        }
        let off = math::rem_euclid(theta - self.start_angle(q), TAU);
        off < self.length(q) + tol || off > TAU - tol
    }

    /// Length of `q` inside the half with sensor sign `y`.
    pub fn length_in_half(&self, q: Arc, y: Sign) -> f64 {
        let h = self.half(y);
        self.intervals(q).filter(|&i| self.spans_interval(h, i)).map(|i| self.interval_width(i)).sum()
    }

    /// True if `q` lies inside a single half circle.
    pub fn is_one_sided(&self, q: Arc) -> bool {
        Sign::ALL.iter().any(|&y| {
            let h = self.half(y);
            self.intervals(q).all(|i| self.spans_interval(h, i))
        })
    }

    /// Minimal arc containing `q ∩ h`.
    ///
    /// Two arcs can meet in two components (only when `q` is longer than
    /// a half circle); the shorter of the two covering arcs is returned,
    /// with ties going to the smaller start index.
    pub fn refine(&self, q: Arc, h: Arc) -> Refined {
        let m = self.interval_count();
        if self.is_full(q) {
            return Refined::Exact(h);
        }
        if self.is_full(h) {
            return Refined::Exact(q);
        }
        // Runs of q-membership along h, as (offset along h, length).
        let mut runs: Vec<(usize, usize)> = Vec::new();
        let mut current: Option<(usize, usize)> = None;
        for k in 0..h.span {
            let i = (h.start + k) % m;
            if self.spans_interval(q, i) {
                current = Some(match current {
                    Some((s, l)) => (s, l + 1),
                    None => (k, 1),
                });
            } else if let Some(run) = current.take() {
                runs.push(run);
            }
        }
        runs.extend(current);
        match runs.as_slice() {
            [] => Refined::Empty,
            [(s, l)] => Refined::Exact(self.arc((h.start + s) % m, *l).unwrap_or(self.full())),
            [(s1, l1), .., (s2, l2)] => {
                let inner = self.arc((h.start + s1) % m, s2 + l2 - s1).unwrap_or(self.full());
                let outer_start = (h.start + s2) % m;
                let gap = s2 - (s1 + l1);
                let outer = self.arc(outer_start, m - gap).unwrap_or(self.full());
                let (li, lo) = (self.length(inner), self.length(outer));
                let pick = if li < lo || (li == lo && inner.start <= outer.start) { inner } else { outer };
                Refined::Split(pick)
            }
        }
    }

    /// Image of the directions in `q` under `a`, exact for any nonsingular
    /// linear map since it induces a homeomorphism of the circle.
    pub fn image_arc(&self, q: Arc, a: &Mat2) -> Result<AngularInterval, GeometryError> {
        let scale = a.max_abs();
        let det = a.det();
        if scale == 0.0 || det.abs() <= 1e-14 * scale * scale {
            return Err(GeometryError::SingularMap);
        }
        let orientation = if det > 0.0 { Orientation::CounterClockwise } else { Orientation::Clockwise };
        let theta0 = self.start_angle(q);
        let start = linalg::angle(a.apply(linalg::direction(theta0)));
        if self.is_full(q) {
            return Ok(AngularInterval { start, length: TAU, orientation });
        }
        let end = linalg::angle(a.apply(linalg::direction(theta0 + self.length(q))));
        let length = match orientation {
            Orientation::CounterClockwise => math::rem_euclid(end - start, TAU),
            Orientation::Clockwise => math::rem_euclid(start - end, TAU),
        };
        Ok(AngularInterval { start, length, orientation })
    }

    /// Smallest arc whose intervals cover `raw`. Endpoints within
    /// [`ANGLE_TOL`] of a boundary are treated as lying on it.
    pub fn cover(&self, raw: &AngularInterval) -> Arc {
        let m = self.interval_count();
        if raw.length >= TAU - ANGLE_TOL {
            return self.full();
        }
        let (lo, lo_closed) = raw.lower();
        let hi_closed = !lo_closed;
        let mut lo_off = self.offset(lo);
        if lo_off > TAU - ANGLE_TOL {
            lo_off -= TAU;
        }
        let first = self.first_interval(lo_off);
        let hi_off = lo_off + raw.length.max(0.0);
        let last = self.last_interval(hi_off, hi_closed).max(first);
        let span = last - first + 1;
        if span >= m {
            self.full()
        } else {
            Arc::new(first % m, span)
        }
    }

    /// Interval that starts the cover of a set whose lower end is at offset
    /// `off` (in `(-tol, 2 pi)`).
    fn first_interval(&self, off: f64) -> usize {
        let m = self.interval_count();
        let j = self.nearest_boundary(off);
        if (self.unrolled_boundary(j) - off).abs() <= ANGLE_TOL {
            return j % m;
        }
        let off = off.max(0.0);
        (0..m).rev().find(|&i| self.unrolled_boundary(i) <= off).unwrap_or(0)
    }

    /// Unrolled index of the interval that ends the cover of a set whose
    /// upper end is at offset `off` (in `(0, 4 pi)`).
    fn last_interval(&self, off: f64, closed: bool) -> usize {
        let m = self.interval_count();
        let j = self.nearest_boundary(off);
        if (self.unrolled_boundary(j) - off).abs() <= ANGLE_TOL {
            return if closed { j } else { j.saturating_sub(1) };
        }
        (0..2 * m).rev().find(|&i| self.unrolled_boundary(i) < off).unwrap_or(0)
    }

    fn nearest_boundary(&self, off: f64) -> usize {
        let m = self.interval_count();
        (0..=2 * m)
            .min_by(|&a, &b| {
                let da = (self.unrolled_boundary(a) - off).abs();
                let db = (self.unrolled_boundary(b) - off).abs();
                da.total_cmp(&db)
            })
            .unwrap_or(0)
    }
}

fn half_sign(c: [f64; 2], a1: f64) -> Sign {
    let probe = linalg::direction(a1 + PI / 2.0);
    if c[0] * probe[0] + c[1] * probe[1] > 0.0 {
        Sign::Pos
    } else {
        Sign::Neg
    }
}

fn sign_of_offset(off: f64, first_half: Sign) -> Sign {
    if off < PI {
        first_half
    } else {
        first_half.flip()
    }
}

/// Sensor sign of direction `theta` for sensor `c`, with the boundary
/// resolved by the same half-open halves as the partition.
pub fn sensor_sign(c: [f64; 2], theta: f64) -> Result<Sign, GeometryError> {
    let a1 = sensor_boundary(c)?;
    Ok(sign_of_offset(math::rem_euclid(theta - a1, TAU), half_sign(c, a1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    const EPS: f64 = 1e-12;

    fn p(c: [f64; 2], n: usize) -> Partition {
        Partition::uniform(c, n).unwrap()
    }

    #[test]
    fn uniform_partition_anchors() {
        let part = p([1.0, 0.0], 5);
        assert!((part.alpha1() - PI / 2.0).abs() < EPS);
        assert_eq!(part.interval_count(), 10);
        for i in 0..10 {
            assert!((part.interval_width(i) - PI / 5.0).abs() < 1e-12);
        }
        assert!((p([0.0, 1.0], 2).alpha1()).abs() < EPS);
        assert!((p([1.0, 1.0], 2).alpha1() - 3.0 * PI / 4.0).abs() < EPS);
    }

    #[test]
    fn zero_sensor_rejected() {
        assert_eq!(Partition::uniform([0.0, 0.0], 3), Err(GeometryError::ZeroSensor));
        assert_eq!(Partition::uniform([1.0, 0.0], 0), Err(GeometryError::EmptyPartition));
    }

    #[test]
    fn custom_angles_validated() {
        let a1 = PI / 2.0;
        let ok = [a1, a1 + 0.3, a1 + PI, a1 + PI + 1.0, a1 + TAU];
        let part = Partition::build([1.0, 0.0], 2, Some(&ok)).unwrap();
        assert!((part.interval_width(0) - 0.3).abs() < EPS);

        let unordered = [a1, a1 + 0.3, a1 + 0.2, a1 + PI, a1 + PI + 0.5, a1 + PI + 1.0, a1 + TAU];
        assert_eq!(Partition::build([1.0, 0.0], 3, Some(&unordered)), Err(GeometryError::NotIncreasing(2)));
        let bad_anchor = [a1, a1 + 0.3, a1 + PI - 0.1, a1 + PI + 1.0, a1 + TAU];
        assert!(matches!(Partition::build([1.0, 0.0], 2, Some(&bad_anchor)), Err(GeometryError::BadAnchor { index: 2, .. })));
        // A partition anchored off the sensor boundary mixes signs.
        let shifted: Vec<f64> = (0..=4).map(|i| 1.0 + i as f64 * PI / 2.0).collect();
        assert!(matches!(Partition::build([1.0, 0.0], 2, Some(&shifted)), Err(GeometryError::MixedSign(_))));
        assert!(matches!(Partition::build([1.0, 0.0], 3, Some(&ok)), Err(GeometryError::AngleCount { expected: 7, got: 5 })));
    }

    #[test]
    fn halves_follow_sensor_sign() {
        let part = p([1.0, 0.0], 5);
        assert_eq!(part.first_half_sign(), Sign::Neg);
        let neg = part.half(Sign::Neg);
        assert_eq!(neg, Arc::new(0, 5));
        assert!((part.start_angle(neg) - PI / 2.0).abs() < EPS);
        let pos = part.half(Sign::Pos);
        assert_eq!(pos, Arc::new(5, 5));
        assert!((part.start_angle(pos) - 3.0 * PI / 2.0).abs() < EPS);

        let part = p([0.0, 1.0], 2);
        assert_eq!(part.half(Sign::Pos), Arc::new(0, 2));
        assert!((part.length(part.half(Sign::Pos)) - PI).abs() < EPS);
    }

    #[test]
    fn boundary_sign_is_half_open() {
        let part = p([1.0, 0.0], 5);
        // theta = pi/2 starts the first half, which is the -1 half.
        assert_eq!(part.sensor_sign(PI / 2.0), Sign::Neg);
        assert_eq!(part.sensor_sign(3.0 * PI / 2.0), Sign::Pos);
        assert_eq!(sensor_sign([1.0, 0.0], 0.1).unwrap(), Sign::Pos);
        assert_eq!(sensor_sign([1.0, 0.0], PI).unwrap(), Sign::Neg);
    }

    #[test]
    fn refine_full_and_subset() {
        let part = p([1.0, 0.0], 5);
        let h = part.half(Sign::Neg);
        assert_eq!(part.refine(part.full(), h), Refined::Exact(h));
        let q = Arc::new(1, 3);
        assert_eq!(part.refine(q, h), Refined::Exact(q));
        assert_eq!(part.refine(q, part.half(Sign::Pos)), Refined::Empty);
        // Straddling: intervals 3..=6 against the first half 0..=4.
        assert_eq!(part.refine(Arc::new(3, 4), h), Refined::Exact(Arc::new(3, 2)));
    }

    #[test]
    fn refine_disconnected_takes_shorter_cover() {
        // 1-based Arc(2n, n+2) is 0-based Arc(2n-1, n+2).
        for n in 3..8 {
            let part = p([1.0, 0.0], n);
            let q = Arc::new(2 * n - 1, n + 2);
            let h = Arc::new(n, n);
            let got = part.refine(q, h);
            // Brute force: intersection intervals and the candidate covers.
            let inter: BTreeSet<usize> = part.intervals(q).filter(|&i| part.spans_interval(h, i)).collect();
            let covers: Vec<Arc> = part.arcs().filter(|&a| inter.iter().all(|&i| part.spans_interval(a, i))).collect();
            let best = covers.iter().map(|&a| a.span).min().unwrap();
            let want = covers.iter().filter(|a| a.span == best).min_by_key(|a| a.start).copied().unwrap();
            assert_eq!(got, Refined::Split(want), "n = {n}");
            assert_eq!(want, h);
        }
    }

    #[test]
    fn image_under_rotation_is_next_interval() {
        let part = p([1.0, 0.0], 5);
        let rot = Mat2::rotation(PI / 5.0);
        let img = part.image_arc(Arc::new(0, 1), &rot).unwrap();
        assert!((img.start - part.alpha()[1]).abs() < 1e-12);
        assert!((img.length - PI / 5.0).abs() < 1e-12);
        assert_eq!(part.cover(&img), Arc::new(1, 1));

        let img = part.image_arc(Arc::new(3, 2), &Mat2::IDENTITY).unwrap();
        assert_eq!(part.cover(&img), Arc::new(3, 2));
        assert_eq!(part.image_arc(Arc::new(3, 2), &Mat2::new(1.0, 2.0, 2.0, 4.0)), Err(GeometryError::SingularMap));
    }

    #[test]
    fn image_matches_dense_sampling() {
        // k0 = -3 aggressive mode at T = pi/10.
        let w = 3.0_f64.sqrt();
        let t = PI / 10.0;
        let a = Mat2::new(math::cos(w * t), math::sin(w * t) / w, -w * math::sin(w * t), math::cos(w * t));
        let part = p([1.0, 0.0], 10);
        let q = Arc::new(0, 1);
        let img = part.image_arc(q, &a).unwrap();
        // Oracle: sample 10^4 directions, unwrap the image angles, take hull.
        let th0 = part.start_angle(q);
        let len = part.length(q);
        let mut prev = linalg::angle(a.apply(linalg::direction(th0)));
        let (mut acc, mut lo, mut hi) = (0.0_f64, 0.0_f64, 0.0_f64);
        for k in 1..=10_000 {
            let th = th0 + len * k as f64 / 10_000.0;
            let cur = linalg::angle(a.apply(linalg::direction(th)));
            let mut d = cur - prev;
            if d > PI {
                d -= TAU;
            } else if d < -PI {
                d += TAU;
            }
            acc += d;
            lo = lo.min(acc);
            hi = hi.max(acc);
            prev = cur;
        }
        assert!(lo.abs() < 1e-12);
        assert!((hi - img.length).abs() < 1e-9, "{hi} vs {}", img.length);
    }

    #[test]
    fn cover_examples() {
        let part = p([1.0, 0.0], 5);
        let al = part.alpha().to_vec();
        let w = PI / 5.0;
        assert_eq!(part.cover(&AngularInterval::ccw(al[2], w)), Arc::new(2, 1));
        assert_eq!(part.cover(&AngularInterval::ccw(al[0] + w / 2.0, w)), Arc::new(0, 2));
        // A half circle starting strictly inside interval 1 (1-based I2).
        assert_eq!(part.cover(&AngularInterval::ccw(al[1] + w / 2.0, PI)), Arc::new(1, 6));
        assert_eq!(part.cover(&AngularInterval::ccw(al[4], TAU - 1e-13)), part.full());
        // Wrapping across alpha_1.
        assert_eq!(part.cover(&AngularInterval::ccw(al[9] + w / 2.0, w)), Arc::new(9, 2));
        // Snapping just below a boundary.
        assert_eq!(part.cover(&AngularInterval::ccw(al[3] - 1e-14, w)), Arc::new(3, 1));
    }

    #[test]
    fn cover_closed_upper_end_includes_boundary_interval() {
        let part = p([1.0, 0.0], 5);
        let al = part.alpha().to_vec();
        let cw = AngularInterval { start: al[3], length: PI / 5.0, orientation: Orientation::Clockwise };
        // (alpha[2], alpha[3]] touches interval 3 at its closed end.
        assert_eq!(part.cover(&cw), Arc::new(2, 2));
    }

    #[test]
    fn potential_state_count() {
        for n in 1..8 {
            let part = p([0.3, -1.0], n);
            let all: BTreeSet<Arc> = part.arcs().collect();
            assert_eq!(all.len(), 2 * n * (2 * n - 1) + 1);
        }
    }

    fn arb_matrix() -> impl Strategy<Value = Mat2> {
        proptest::array::uniform4(-3.0..3.0f64)
            .prop_filter("nonsingular", |v| (v[0] * v[3] - v[1] * v[2]).abs() > 0.05)
            .prop_map(|v| Mat2::new(v[0], v[1], v[2], v[3]))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn image_contains_mapped_directions(
            a in arb_matrix(),
            n in 1usize..8,
            start in 0usize..16,
            span in 1usize..16,
            frac in 0.0..1.0f64,
        ) {
            let part = p([1.0, 0.0], n);
            let m = part.interval_count();
            let q = part.arc(start % m, 1 + span % m).unwrap();
            let theta = part.start_angle(q) + frac * part.length(q);
            let img = part.image_arc(q, &a).unwrap();
            let mapped = linalg::angle(a.apply(linalg::direction(theta)));
            prop_assert!(img.contains(mapped, 1e-9));
            let cov = part.cover(&img);
            prop_assert!(part.contains(cov, mapped, 1e-9));
        }

        #[test]
        fn cover_is_monotone(
            start in 0.0..TAU,
            l1 in 0.01..6.2f64,
            extra in 0.0..1.0f64,
            shift in 0.0..1.0f64,
            n in 1usize..8,
        ) {
            let part = p([0.4, 1.0], n);
            let l2 = (l1 + extra).min(TAU);
            let s2 = start - shift * (l2 - l1);
            let c1 = part.cover(&AngularInterval::ccw(start, l1));
            let c2 = part.cover(&AngularInterval::ccw(s2, l2));
            for i in part.intervals(c1) {
                prop_assert!(part.spans_interval(c2, i));
            }
        }

        #[test]
        fn refine_is_sound(
            n in 1usize..8,
            start in 0usize..16,
            span in 1usize..16,
            frac in 0.0..1.0f64,
            pos in proptest::bool::ANY,
        ) {
            let part = p([1.0, 0.0], n);
            let m = part.interval_count();
            let q = part.arc(start % m, 1 + span % m).unwrap();
            let y = if pos { Sign::Pos } else { Sign::Neg };
            let h = part.half(y);
            let theta = part.start_angle(q) + frac * part.length(q);
            if part.contains(q, theta, 0.0) && part.contains(h, theta, 0.0) {
                let r = part.refine(q, h).arc();
                prop_assert!(r.is_some());
                prop_assert!(part.contains(r.unwrap(), theta, 1e-12));
            }
        }
    }
}
