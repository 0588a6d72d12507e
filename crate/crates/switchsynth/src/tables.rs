//! Side-by-side reproduction of the two published example tables.

use crate::config::{Base, JobConfig, PlantSpec, Sampling, SearchSpec, SimSpec, Sweep};
use crate::pipeline::run_entry;
use crate::Error;

/// Published values for one row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaperRow {
    pub n: usize,
    pub states: usize,
    pub gamma: f64,
    pub r: f64,
}

pub struct PaperTable {
    pub name: &'static str,
    pub k0: f64,
    pub rows: &'static [PaperRow],
}

pub const TABLE_II: PaperTable = PaperTable {
    name: "Table II",
    k0: -3.0,
    rows: &[
        PaperRow { n: 5, states: 39, gamma: 0.75, r: 0.0160 },
        PaperRow { n: 10, states: 107, gamma: 0.625, r: 0.0267 },
        PaperRow { n: 15, states: 207, gamma: 0.5833, r: 0.0195 },
        PaperRow { n: 20, states: 331, gamma: 0.5625, r: 0.0152 },
    ],
};

pub const TABLE_III: PaperTable = PaperTable {
    name: "Table III",
    k0: 2.0,
    rows: &[
        PaperRow { n: 6, states: 39, gamma: 1.0, r: 0.0141 },
        PaperRow { n: 7, states: 55, gamma: 1.0, r: 0.0387 },
        PaperRow { n: 8, states: 69, gamma: 1.0, r: 0.0279 },
    ],
};

pub const GAMMA_TOL: f64 = 5e-5;
pub const R_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct RowCheck {
    pub table: &'static str,
    pub paper: PaperRow,
    pub states: usize,
    pub gamma: f64,
    pub r: Option<f64>,
    pub tau: Option<f64>,
    pub iterations: Option<usize>,
    pub verified: bool,
}

impl RowCheck {
    pub fn states_ok(&self) -> bool {
        self.states == self.paper.states
    }

    pub fn gamma_ok(&self) -> bool {
        (self.gamma - self.paper.gamma).abs() <= GAMMA_TOL
    }

    pub fn r_ok(&self) -> bool {
        self.r.is_some_and(|r| r >= R_FRACTION * self.paper.r)
    }

    pub fn passed(&self) -> bool {
        self.states_ok() && self.gamma_ok() && self.r_ok()
    }
}

/// Pipeline config for one table with default search settings and no
/// simulation.
pub fn table_config(t: &PaperTable) -> JobConfig {
    JobConfig {
        plant: PlantSpec::Harmonic { k0: t.k0, sampling: Sampling::PiOverN },
        c: [1.0, 0.0],
        n: Sweep::Many(t.rows.iter().map(|r| r.n).collect()),
        gamma0: None,
        log_base: Base::E,
        search: SearchSpec::default(),
        simulation: SimSpec { x0: Vec::new(), random_x0: 0, seed: 0, horizon: 1 },
        output_dir: None,
    }
}

pub fn check_table(t: &PaperTable) -> Result<Vec<RowCheck>, Error> {
    let cfg = table_config(t);
    t.rows
        .iter()
        .map(|row| {
            let o = run_entry(&cfg, row.n, None)?;
            Ok(RowCheck {
                table: t.name,
                paper: *row,
                states: o.row.states,
                gamma: o.row.gamma,
                r: o.row.r,
                tau: o.row.tau,
                iterations: o.row.iterations,
                verified: o.row.verified,
            })
        })
        .collect()
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

pub fn render(checks: &[RowCheck]) -> String {
    let mut out = String::new();
    let mut current = "";
    for c in checks {
        if c.table != current {
            current = c.table;
            out.push_str(&format!(
                "{current}\n{:>4} | {:>5} {:>5} {:>4} | {:>8} {:>8} {:>4} | {:>8} {:>8} {:>4} | {:>9} {:>7}\n",
                "n", "N", "pub.", "", "gamma", "pub.", "", "R", "pub.", "", "tau", "p"
            ));
        }
        out.push_str(&format!(
            "{:>4} | {:>5} {:>5} {:>4} | {:>8.4} {:>8.4} {:>4} | {:>8} {:>8.4} {:>4} | {:>9} {:>7}\n",
            c.paper.n,
            c.states,
            c.paper.states,
            mark(c.states_ok()),
            c.gamma,
            c.paper.gamma,
            mark(c.gamma_ok()),
            c.r.map(|r| format!("{r:.4}")).unwrap_or_else(|| "-".into()),
            c.paper.r,
            mark(c.r_ok()),
            c.tau.map(|t| format!("{t:.2e}")).unwrap_or_else(|| "-".into()),
            c.iterations.map(|p| p.to_string()).unwrap_or_else(|| "-".into()),
        ));
    }
    out.push_str(&format!("N exact, gamma within {GAMMA_TOL:e}, R >= {R_FRACTION} x published (natural log).\n"));
    out
}
