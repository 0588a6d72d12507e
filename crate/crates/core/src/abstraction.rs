//! The finite state observer: arcs of the partition driven by the plant's
//! input and the (possibly corrupted) sensor output.
//!
//! A transition refines the current arc by the half circle of the reported
//! sign, pushes it through the selected mode and covers the image by
//! partition intervals. Starting from the full circle, the arc always
//! contains the plant's true direction when the true sensor output is fed
//! back.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::geometry::{AngularInterval, Arc, GeometryError, Partition, Refined, Sign};
use crate::linalg::{self, Mat2};
use crate::math;
use crate::plant::{Input, ModeMap, Plant};

const IMAGE_SAMPLES: usize = 2048;
const GAIN_GRID: usize = 4096;

/// Index into a transition row: `2 * u + y`, with `y` as [`Sign::index`].
pub fn edge_slot(u: Input, y: Sign) -> usize {
    2 * u.index() + y.index()
}

/// The purely finite part of a machine: transitions and outputs over state
/// indices. Gain certification and synthesis only need this.
#[derive(Clone, Debug, PartialEq)]
pub struct MachineTable {
    /// `trans[q][edge_slot(u, y)]`.
    pub trans: Vec<[usize; 4]>,
    /// Predicted sensor output per state.
    pub g_out: Vec<Sign>,
    /// Worst-case log-gain per state and input.
    pub h_out: Vec<[f64; 2]>,
    /// `true` when the state's arc meets both sensor halves.
    pub d_flag: Vec<bool>,
}

impl MachineTable {
    pub fn len(&self) -> usize {
        self.trans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trans.is_empty()
    }

    pub fn next(&self, q: usize, u: Input, y: Sign) -> usize {
        self.trans[q][edge_slot(u, y)]
    }

    /// Successor when the disturbance is `w`: the reported sign is the
    /// prediction, flipped when `w` is set.
    pub fn next_w(&self, q: usize, u: Input, w: bool) -> usize {
        let y = if w { self.g_out[q].flip() } else { self.g_out[q] };
        self.next(q, u, y)
    }

    pub fn g(&self, q: usize) -> Sign {
        self.g_out[q]
    }

    pub fn h(&self, q: usize, u: Input) -> f64 {
        self.h_out[q][u.index()]
    }

    pub fn d(&self, q: usize) -> f64 {
        if self.d_flag[q] {
            1.0
        } else {
            0.0
        }
    }

    /// All `(source, target)` edges, four per state.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.trans.iter().enumerate().flat_map(|(q, row)| row.iter().map(move |&t| (q, t)))
    }

    /// Checks that every transition lands on a state.
    pub fn is_total(&self) -> bool {
        let n = self.len();
        self.g_out.len() == n && self.h_out.len() == n && self.d_flag.len() == n && self.trans.iter().flatten().all(|&t| t < n)
    }
}

/// Reachable observer machine with its arcs. State 0 is the full circle.
#[derive(Clone, Debug, PartialEq)]
pub struct AbstractMachine {
    pub partition: Partition,
    pub states: Vec<Arc>,
    pub table: MachineTable,
    /// Number of refinements (over all explored transitions) whose exact
    /// intersection was disconnected.
    pub diag_disconnected: usize,
}

impl AbstractMachine {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, q: Arc) -> Option<usize> {
        self.states.iter().position(|&s| s == q)
    }

    pub fn arc(&self, q: usize) -> Arc {
        self.states[q]
    }
}

/// Transition of the observer on arcs. The boolean reports a disconnected
/// refinement.
///
/// An empty refinement (the reported sign contradicts a one-sided arc)
/// maps the unrefined arc instead.
pub fn hat_f(q: Arc, u: Input, y: Sign, plant: &Plant, p: &Partition) -> Result<(Arc, bool), GeometryError> {
    let refined = p.refine(q, p.half(y));
    let split = matches!(refined, Refined::Split(_));
    let src = refined.arc().unwrap_or(q);
    let next = match plant.mode(u) {
        ModeMap::Linear(a) => p.cover(&p.image_arc(src, a)?),
        ModeMap::Generic(f) => sampled_image(src, |x| f.apply(x), p),
    };
    Ok((next, split))
}

/// Sampled hull of the image, inflated by one interval at each end since
/// sampling alone cannot certify it.
fn sampled_image(q: Arc, f: impl Fn([f64; 2]) -> [f64; 2], p: &Partition) -> Arc {
    let m = p.interval_count();
    if p.is_full(q) {
        return p.full();
    }
    let th0 = p.start_angle(q);
    let len = p.length(q);
    let first = linalg::angle(f(linalg::direction(th0)));
    let mut prev = first;
    let (mut acc, mut lo, mut hi) = (0.0_f64, 0.0_f64, 0.0_f64);
    for k in 1..=IMAGE_SAMPLES {
        let th = th0 + len * k as f64 / IMAGE_SAMPLES as f64;
        let cur = linalg::angle(f(linalg::direction(th)));
        let mut d = cur - prev;
        if d > core::f64::consts::PI {
            d -= TAU;
        } else if d < -core::f64::consts::PI {
            d += TAU;
        }
        acc += d;
        lo = lo.min(acc);
        hi = hi.max(acc);
        prev = cur;
    }
    if hi - lo >= TAU {
        return p.full();
    }
    let core = p.cover(&AngularInterval::ccw(first + lo, hi - lo));
    if core.span + 2 >= m {
        p.full()
    } else {
        Arc::new((core.start + m - 1) % m, core.span + 2)
    }
}

/// Predicted sensor sign: the half holding the larger share of `q`, ties
/// going to `+1`.
pub fn hat_g(q: Arc, p: &Partition) -> Sign {
    let pos = p.length_in_half(q, Sign::Pos);
    let neg = p.length_in_half(q, Sign::Neg);
    if pos >= neg {
        Sign::Pos
    } else {
        Sign::Neg
    }
}

/// Supremum of `log |f_u(b(theta))|` over the closure of `q`.
pub fn hat_h(q: Arc, u: Input, plant: &Plant, p: &Partition) -> f64 {
    let base = plant.log_base();
    let a = p.start_angle(q);
    let b = a + p.length(q);
    match plant.mode(u) {
        ModeMap::Linear(m) => base.log(math::sqrt(max_sq_gain(m, a, b))),
        ModeMap::Generic(f) => {
            let sup = (0..=GAIN_GRID)
                .map(|k| a + (b - a) * k as f64 / GAIN_GRID as f64)
                .map(|th| linalg::norm(f.apply(linalg::direction(th))))
                .fold(0.0, f64::max);
            base.log(sup)
        }
    }
}

/// `max |A b(theta)|^2` over `theta` in `[a, b]`. The squared gain is
/// `m + rho cos(2 theta - phi)`, so the interior maxima sit at
/// `theta = phi/2 + k pi`.
fn max_sq_gain(mat: &Mat2, a: f64, b: f64) -> f64 {
    let (m, p, s) = mat.gain_profile();
    let rho = math::sqrt(p * p + s * s);
    let at = |th: f64| m + p * math::cos(2.0 * th) + s * math::sin(2.0 * th);
    let mut best = at(a).max(at(b));
    if rho > 0.0 {
        let peak = math::atan2(s, p) / 2.0;
        let pi = core::f64::consts::PI;
        let k = math::floor((a - peak) / pi);
        for j in 0..4 {
            let th = peak + (k + j as f64) * pi;
            if th >= a && th <= b {
                best = best.max(m + rho);
            }
        }
    }
    best
}

/// Breadth-first exploration from the full circle over all four
/// `(u, y)` inputs. States are numbered in discovery order.
pub fn build_machine(plant: &Plant, p: &Partition) -> Result<AbstractMachine, GeometryError> {
    let q0 = p.full();
    let mut index: BTreeMap<Arc, usize> = BTreeMap::new();
    let mut states = Vec::new();
    let mut trans: Vec<[usize; 4]> = Vec::new();
    let mut queue = VecDeque::new();
    let mut splits = 0;

    index.insert(q0, 0);
    states.push(q0);
    trans.push([0; 4]);
    queue.push_back(q0);

    while let Some(q) = queue.pop_front() {
        let qi = index[&q];
        for u in Input::ALL {
            for y in Sign::ALL {
                let (next, split) = hat_f(q, u, y, plant, p)?;
                splits += split as usize;
                let ni = *index.entry(next).or_insert_with(|| {
                    states.push(next);
                    trans.push([0; 4]);
                    queue.push_back(next);
                    states.len() - 1
                });
                trans[qi][edge_slot(u, y)] = ni;
            }
        }
    }

    let g_out = states.iter().map(|&q| hat_g(q, p)).collect();
    let h_out = states.iter().map(|&q| [hat_h(q, Input::Zero, plant, p), hat_h(q, Input::One, plant, p)]).collect();
    let d_flag = states.iter().map(|&q| !p.is_one_sided(q)).collect();

    Ok(AbstractMachine {
        partition: p.clone(),
        states,
        table: MachineTable { trans, g_out, h_out, d_flag },
        diag_disconnected: splits,
    })
}
