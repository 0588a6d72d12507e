//! Observer plus policy against the true plant.

use alloc::vec::Vec;

use crate::abstraction::AbstractMachine;
use crate::gain::GainCertificate;
use crate::geometry::{Arc, Sign};
use crate::linalg;
use crate::plant::{Input, LogBase, Plant, PlantError};

const RENORM_FLOOR: f64 = 1e-300;
const CONTAIN_TOL: f64 = 1e-9;

/// One step of the interconnection, recorded before the plant moves.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    /// State as held in memory; rescaled when it underflows, see
    /// [`Trace::log_norm`] for the true size.
    pub x: [f64; 2],
    pub theta: f64,
    pub r: f64,
    pub q_index: usize,
    pub q: Arc,
    pub u: Input,
    pub y: Sign,
    pub yhat: Sign,
    pub w: bool,
    pub v: f64,
    pub hhat: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub records: Vec<StepRecord>,
    /// `log ||x(t)||` for `t = 0..=T`, unaffected by rescaling.
    pub log_norm: Vec<f64>,
    pub base: LogBase,
}

impl Trace {
    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    pub fn mismatches(&self) -> usize {
        self.records.iter().filter(|r| r.w).count()
    }

    /// Steps where the direction leaves its arc.
    pub fn containment_violations(&self, machine: &AbstractMachine) -> usize {
        self.records.iter().filter(|r| !machine.partition.contains(r.q, r.theta, CONTAIN_TOL)).count()
    }

    /// Steps where the realized log-gain exceeds the machine's bound.
    pub fn gain_violations(&self) -> usize {
        self.records.iter().filter(|r| r.v > r.hhat + 1e-12).count()
    }
}

/// Drives the plant from `x0` for `horizon` steps. The controller sees the
/// step index and the observer state index.
pub fn simulate(
    plant: &Plant,
    machine: &AbstractMachine,
    mut controller: impl FnMut(usize, usize) -> Input,
    x0: [f64; 2],
    horizon: usize,
) -> Result<Trace, PlantError> {
    let r0 = linalg::norm(x0);
    if r0 == 0.0 || !r0.is_finite() {
        return Err(PlantError::ZeroState);
    }
    let base = plant.log_base();
    let p = &machine.partition;
    let table = &machine.table;
    let mut records = Vec::with_capacity(horizon);
    let mut log_norm = Vec::with_capacity(horizon + 1);
    let mut x = x0;
    let mut ln = base.log(r0);
    let mut q = 0;
    log_norm.push(ln);
    for t in 0..horizon {
        let u = controller(t, q);
        let step = plant.step(x, u)?;
        let yhat = table.g(q);
        records.push(StepRecord {
            t,
            x,
            theta: p.canonical(linalg::angle(x)),
            r: linalg::norm(x),
            q_index: q,
            q: machine.states[q],
            u,
            y: step.y,
            yhat,
            w: step.y != yhat,
            v: step.v,
            hhat: table.h(q, u),
        });
        q = table.next(q, u, step.y);
        ln += step.v;
        log_norm.push(ln);
        x = step.next;
        let r = linalg::norm(x);
        if r < RENORM_FLOOR {
            x = [x[0] / r, x[1] / r];
        }
    }
    Ok(Trace { records, log_norm, base })
}

/// Convenience wrapper for a stationary policy.
pub fn simulate_policy(
    plant: &Plant,
    machine: &AbstractMachine,
    phi: &[Input],
    x0: [f64; 2],
    horizon: usize,
) -> Result<Trace, PlantError> {
    simulate(plant, machine, |_, q| phi[q], x0, horizon)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    /// `sup_T sum_{t<T} (v(t) + R)`, the empty sum included.
    pub s: f64,
    /// `base^s`, so that `||x(t)|| <= k base^{-R t} ||x(0)||`.
    pub k: f64,
    /// Negative least-squares slope of `log ||x(t)||` against `t`.
    pub empirical_rate: f64,
    /// Whether the bound held at every recorded `t`.
    pub bound_holds: bool,
    /// Largest `log ||x(t)/x(0)|| - (s - R t)`; nonpositive when it holds.
    pub worst_margin: f64,
    /// The supremum was still growing in the last quarter of the horizon.
    pub unbounded_prefix: bool,
}

pub fn rate_report(trace: &Trace, r: f64) -> RateReport {
    let n = trace.horizon();
    let mut prefix = 0.0;
    let mut s: f64 = 0.0;
    let mut s_early: f64 = 0.0;
    let cut = n - n / 4;
    for (t, rec) in trace.records.iter().enumerate() {
        prefix += rec.v + r;
        s = s.max(prefix);
        if t < cut {
            s_early = s;
        }
    }
    let l0 = trace.log_norm[0];
    let worst_margin =
        trace.log_norm.iter().enumerate().map(|(t, &l)| (l - l0) - (s - r * t as f64)).fold(f64::NEG_INFINITY, f64::max);
    RateReport {
        s,
        k: trace.base.pow(s),
        empirical_rate: -slope(&trace.log_norm),
        bound_holds: worst_margin <= 1e-9,
        worst_margin,
        unbounded_prefix: n >= 4 && s > s_early + 1e-9,
    }
}

fn slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    if ys.len() < 2 {
        return 0.0;
    }
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &y) in ys.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// Checks `sum_{t<=T} (gamma - w(t)) >= min V difference` on every prefix
/// and `w(t) <= d(q(t))` at every step.
pub fn certificate_monitor(trace: &Trace, machine: &AbstractMachine, cert: &GainCertificate) -> bool {
    let floor = cert.min_v_difference() - 1e-9;
    let mut sum = 0.0;
    for rec in &trace.records {
        if rec.w && !machine.table.d_flag[rec.q_index] {
            return false;
        }
        sum += cert.gamma - if rec.w { 1.0 } else { 0.0 };
        if sum < floor {
            return false;
        }
    }
    true
}
