//! Switched planar homogeneous plants with a binary sign sensor.

use alloc::boxed::Box;
use core::f64::consts::{PI, TAU};
use core::fmt;

use thiserror::Error;

use crate::geometry::{self, Sign};
use crate::linalg::{self, Mat2};
use crate::math;

/// Switching input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Input {
    #[default]
    Zero,
    One,
}

impl Input {
    pub const ALL: [Input; 2] = [Input::Zero, Input::One];

    pub fn index(self) -> usize {
        match self {
            Input::Zero => 0,
            Input::One => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Input> {
        match i {
            0 => Some(Input::Zero),
            1 => Some(Input::One),
            _ => None,
        }
    }
}

/// Base of the logarithm used for the performance output and every rate
/// derived from it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    E,
    Ten,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::E => math::ln(x),
            LogBase::Ten => math::log10(x),
        }
    }

    /// `base^x`.
    pub fn pow(self, x: f64) -> f64 {
        match self {
            LogBase::E => math::exp(x),
            LogBase::Ten => math::pow(10.0, x),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogBase::E => "e",
            LogBase::Ten => "10",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    #[error("sensor vector must be nonzero and finite")]
    BadSensor,
    #[error("mode {0} is singular")]
    SingularMode(usize),
    #[error("mode {0} is not degree-1 homogeneous")]
    NotHomogeneous(usize),
    #[error("mode {0} maps a nonzero state to zero")]
    Degenerate(usize),
    #[error("state must be nonzero")]
    ZeroState,
    #[error("k0 = -1 makes both modes the same rotation")]
    DegenerateHarmonic,
    #[error("sampling period must be positive and finite")]
    BadPeriod,
}

/// A continuous map of the plane with `f(a x) = a f(x)`.
pub trait HomogeneousMap: Send + Sync {
    fn apply(&self, x: [f64; 2]) -> [f64; 2];
}

impl<F> HomogeneousMap for F
where
    F: Fn([f64; 2]) -> [f64; 2] + Send + Sync,
{
    fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        self(x)
    }
}

pub enum ModeMap {
    Linear(Mat2),
    Generic(Box<dyn HomogeneousMap>),
}

impl ModeMap {
    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        match self {
            ModeMap::Linear(a) => a.apply(x),
            ModeMap::Generic(f) => f.apply(x),
        }
    }
}

impl fmt::Debug for ModeMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeMap::Linear(a) => f.debug_tuple("Linear").field(a).finish(),
            ModeMap::Generic(_) => f.write_str("Generic(..)"),
        }
    }
}

/// One plant transition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub next: [f64; 2],
    /// Sensor output at the current state.
    pub y: Sign,
    /// Log-gain `log(|x'| / |x|)`.
    pub v: f64,
}

/// `x(t+1) = f_u(x)`, `y = sign(c' x)`, `v = log(|x(t+1)| / |x(t)|)`.
#[derive(Debug)]
pub struct Plant {
    modes: [ModeMap; 2],
    sensor: [f64; 2],
    log_base: LogBase,
}

const GENERIC_SWEEP: usize = 4096;

impl Plant {
    pub fn linear(a0: Mat2, a1: Mat2, c: [f64; 2]) -> Result<Self, PlantError> {
        check_sensor(c)?;
        for (u, a) in [a0, a1].iter().enumerate() {
            let s = a.max_abs();
            if !(s.is_finite()) || s == 0.0 || a.det().abs() <= 1e-14 * s * s {
                return Err(PlantError::SingularMode(u));
            }
        }
        Ok(Plant { modes: [ModeMap::Linear(a0), ModeMap::Linear(a1)], sensor: c, log_base: LogBase::E })
    }

    /// Plant from two arbitrary homogeneous maps. Homogeneity and
    /// nondegeneracy are spot-checked on a fixed set of directions.
    pub fn generic(f0: Box<dyn HomogeneousMap>, f1: Box<dyn HomogeneousMap>, c: [f64; 2]) -> Result<Self, PlantError> {
        check_sensor(c)?;
        for (u, f) in [&f0, &f1].into_iter().enumerate() {
            for k in 0..16 {
                let x = linalg::direction(k as f64 * TAU / 16.0 + 0.1);
                let fx = f.apply(x);
                if linalg::norm(fx) <= 1e-300 || !linalg::norm(fx).is_finite() {
                    return Err(PlantError::Degenerate(u));
                }
                for scale in [-2.5, 0.5, 7.0] {
                    let fs = f.apply([scale * x[0], scale * x[1]]);
                    let err = linalg::norm([fs[0] - scale * fx[0], fs[1] - scale * fx[1]]);
                    if err > 1e-9 * linalg::norm(fx) * scale.abs() {
                        return Err(PlantError::NotHomogeneous(u));
                    }
                }
            }
        }
        Ok(Plant { modes: [ModeMap::Generic(f0), ModeMap::Generic(f1)], sensor: c, log_base: LogBase::E })
    }

    pub fn with_log_base(mut self, base: LogBase) -> Self {
        self.log_base = base;
        self
    }

    pub fn log_base(&self) -> LogBase {
        self.log_base
    }

    pub fn sensor(&self) -> [f64; 2] {
        self.sensor
    }

    pub fn mode(&self, u: Input) -> &ModeMap {
        &self.modes[u.index()]
    }

    /// The mode matrix, for linear plants.
    pub fn matrix(&self, u: Input) -> Option<&Mat2> {
        match &self.modes[u.index()] {
            ModeMap::Linear(a) => Some(a),
            ModeMap::Generic(_) => None,
        }
    }

    pub fn apply(&self, u: Input, x: [f64; 2]) -> [f64; 2] {
        self.modes[u.index()].apply(x)
    }

    /// Sensor sign with `c' x = 0` resolved by the half-open partition
    /// halves.
    pub fn sensor_sign(&self, x: [f64; 2]) -> Sign {
        let theta = linalg::angle(x);
        // The sensor was validated at construction.
        geometry::sensor_sign(self.sensor, theta).unwrap_or(Sign::Pos)
    }

    pub fn step(&self, x: [f64; 2], u: Input) -> Result<Step, PlantError> {
        let r = linalg::norm(x);
        if r == 0.0 || !r.is_finite() {
            return Err(PlantError::ZeroState);
        }
        let next = self.apply(u, x);
        let v = self.log_base.log(linalg::norm(next) / r);
        Ok(Step { next, y: self.sensor_sign(x), v })
    }

    /// Direction update; depends on `theta` only. The result is in
    /// `[alpha_1, alpha_1 + 2 pi)` where `alpha_1` is the sensor boundary.
    pub fn angle_step(&self, theta: f64, u: Input) -> f64 {
        let y = self.apply(u, linalg::direction(theta));
        let a1 = geometry::sensor_boundary(self.sensor).unwrap_or(PI / 2.0);
        a1 + math::rem_euclid(linalg::angle(y) - a1, TAU)
    }

    /// `log |f_u(b(theta))|`.
    pub fn log_gain(&self, theta: f64, u: Input) -> f64 {
        self.log_base.log(linalg::norm(self.apply(u, linalg::direction(theta))))
    }

    /// `M = max_u max_theta |f_u(b(theta))|`, so that `v <= log M`.
    pub fn norm_bound(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| match m {
                ModeMap::Linear(a) => a.spectral_norm(),
                ModeMap::Generic(f) => (0..GENERIC_SWEEP)
                    .map(|k| linalg::norm(f.apply(linalg::direction(k as f64 * TAU / GENERIC_SWEEP as f64))))
                    .fold(0.0, f64::max),
            })
            .fold(0.0, f64::max)
    }
}

fn check_sensor(c: [f64; 2]) -> Result<(), PlantError> {
    geometry::sensor_boundary(c).map(|_| ()).map_err(|_| PlantError::BadSensor)
}

/// `exp(a t)` in closed form. With `mu = tr(a)/2` and
/// `delta = ((a11 - a22)/2)^2 + a12 a21` (the discriminant),
///
/// ```text
/// exp(a t) = e^{mu t} (C I + S (a - mu I))
/// ```
///
/// where `(C, S)` is `(cosh wt, sinh(wt)/w)` for `delta = w^2 > 0`,
/// `(cos wt, sin(wt)/w)` for `delta = -w^2 < 0`, and `(1, t)` when the
/// eigenvalue is repeated.
pub fn expm_2x2(a: &Mat2, t: f64) -> Mat2 {
    let m = a.0;
    let mu = a.trace() / 2.0;
    let half_diff = (m[0][0] - m[1][1]) / 2.0;
    let delta = half_diff * half_diff + m[0][1] * m[1][0];
    let (c, s) = if delta > 0.0 {
        let w = math::sqrt(delta);
        (math::cosh(w * t), math::sinh(w * t) / w)
    } else if delta < 0.0 {
        let w = math::sqrt(-delta);
        (math::cos(w * t), math::sin(w * t) / w)
    } else {
        (1.0, t)
    };
    let g = math::exp(mu * t);
    Mat2::new(g * (c + s * (m[0][0] - mu)), g * s * m[0][1], g * s * m[1][0], g * (c + s * (m[1][1] - mu)))
}

/// Sampled harmonic-oscillator pair: mode 0 is `x'' = -x`, mode 1 is
/// `x'' = k0 x`, both held for `period` seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonicPair {
    pub k0: f64,
    pub period: f64,
}

impl HarmonicPair {
    pub fn new(k0: f64, period: f64) -> Result<Self, PlantError> {
        if !k0.is_finite() || k0 == -1.0 {
            return Err(PlantError::DegenerateHarmonic);
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(PlantError::BadPeriod);
        }
        Ok(HarmonicPair { k0, period })
    }

    /// Sampling matched to a uniform partition of `2n` intervals,
    /// `T = pi / n`.
    pub fn matched(k0: f64, n: usize) -> Result<Self, PlantError> {
        HarmonicPair::new(k0, PI / n.max(1) as f64)
    }

    pub fn generators(&self) -> [Mat2; 2] {
        [Mat2::new(0.0, 1.0, -1.0, 0.0), Mat2::new(0.0, 1.0, self.k0, 0.0)]
    }

    pub fn matrices(&self) -> [Mat2; 2] {
        let [g0, g1] = self.generators();
        [expm_2x2(&g0, self.period), expm_2x2(&g1, self.period)]
    }

    pub fn plant(&self, c: [f64; 2]) -> Result<Plant, PlantError> {
        let [a0, a1] = self.matrices();
        Plant::linear(a0, a1, c)
    }
}
