//! abstract -> gain -> synthesize -> simulate, per partition size.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use switchsynth_core::abstraction::MachineTable;
use switchsynth_core::closed_loop::simulate_policy;
use switchsynth_core::gain::{self, GainCertificate};
use switchsynth_core::synthesis::{evaluate_tau, select_best, storage_slack};
use switchsynth_core::{
    build_machine, certificate_monitor, rate_report, verify_policy, AbstractMachine, SearchParams, SynthesisResult,
};

use crate::artifacts::{self, Artifact, CertificateDoc, MachineDoc, ResultDoc, SimDoc, Summary, SummaryRow, TauEntry};
use crate::config::JobConfig;
use crate::Error;

/// Everything computed for one partition size.
pub struct EntryOutcome {
    pub machine: AbstractMachine,
    pub certificate: GainCertificate,
    pub lp_gamma: Option<f64>,
    pub synthesis: Option<SynthesisResult>,
    pub result: ResultDoc,
    pub row: SummaryRow,
}

pub struct PipelineReport {
    pub summary: Summary,
    pub all_feasible: bool,
}

/// Scans the grid in parallel; the pick is the same as the sequential
/// search.
pub fn search_parallel(table: &MachineTable, gamma0: f64, params: &SearchParams) -> (Option<SynthesisResult>, Vec<TauEntry>) {
    let found: Vec<(f64, Option<SynthesisResult>)> =
        params.tau_grid().into_par_iter().map(|tau| (tau, evaluate_tau(table, gamma0, tau, params))).collect();
    let scan = found.iter().map(|(tau, r)| TauEntry { tau: *tau, feasible: r.is_some(), r: r.as_ref().map(|r| r.r) }).collect();
    (select_best(found.into_iter().filter_map(|(_, r)| r)), scan)
}

/// Initial states: the explicit list followed by seeded random unit vectors.
pub fn initial_states(cfg: &JobConfig) -> Vec<[f64; 2]> {
    let sim = &cfg.simulation;
    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    let mut xs = sim.x0.clone();
    xs.extend((0..sim.random_x0).map(|_| {
        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        [th.cos(), th.sin()]
    }));
    xs
}

pub fn run_entry(cfg: &JobConfig, n: usize, out: Option<&Path>) -> Result<EntryOutcome, Error> {
    let plant = cfg.plant(n)?;
    let partition = cfg.partition(n)?;
    let machine = build_machine(&plant, &partition)?;
    let table = &machine.table;

    let gamma = gain::max_cycle_mean(table)?;
    let lp_gamma = gain::lp_cross_check(table).ok();
    let certificate = gain::certificate(table, gamma)?;
    let gamma0 = cfg.gamma0.unwrap_or(gamma);

    let params = cfg.search.params();
    let (synthesis, scan) = search_parallel(table, gamma0, &params);
    let verified = synthesis.as_ref().is_some_and(|r| verify_policy(r, table));
    let slack = synthesis.as_ref().map(|r| storage_slack(r, table));
    let mut result = ResultDoc::from_result(n, gamma0, synthesis.as_ref(), verified, slack);
    result.tau_scan = scan;

    if let Some(res) = synthesis.as_ref() {
        for (i, x0) in initial_states(cfg).into_iter().enumerate() {
            let trace = simulate_policy(&plant, &machine, &res.phi, x0, cfg.simulation.horizon)?;
            let report = rate_report(&trace, res.r);
            let file = format!("trace_n{n}_{i}.csv");
            if let Some(dir) = out {
                let path = dir.join(&file);
                let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
                artifacts::write_trace_csv(&mut BufWriter::new(f), &trace).map_err(|e| Error::io(&path, e))?;
            }
            let contained = trace.containment_violations(&machine);
            let cert_ok = certificate_monitor(&trace, &machine, &certificate);
            result.simulations.push(SimDoc::new(x0, &trace, &report, file, contained, cert_ok));
        }
    }

    let row = SummaryRow {
        n,
        states: machine.len(),
        period: cfg.period(n),
        gamma,
        gamma0,
        gamma_is_one: gamma >= 1.0,
        feasible: result.feasible,
        verified,
        tau: result.tau,
        r: result.r,
        iterations: result.iterations,
        min_empirical_rate: result.simulations.iter().map(|s| s.empirical_rate).reduce(f64::min),
        diag_disconnected: machine.diag_disconnected,
    };

    if let Some(dir) = out {
        let base = plant.log_base().name();
        artifacts::write_json(&dir.join(format!("machine_n{n}.json")), &Artifact::Machine(MachineDoc::new(&machine, base)))?;
        artifacts::write_json(
            &dir.join(format!("certificate_n{n}.json")),
            &Artifact::Certificate(CertificateDoc::new(n, &certificate, lp_gamma)),
        )?;
        artifacts::write_json(&dir.join(format!("result_n{n}.json")), &Artifact::Result(result.clone()))?;
    }

    Ok(EntryOutcome { machine, certificate, lp_gamma, synthesis, result, row })
}

/// Runs the sweep and writes per-entry artifacts plus `summary.json` and
/// `summary.csv` to `out`.
pub fn run_pipeline(cfg: &JobConfig, out: &Path) -> Result<PipelineReport, Error> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let outcomes: Vec<Result<EntryOutcome, Error>> =
        cfg.n.values().into_par_iter().map(|n| run_entry(cfg, n, Some(out))).collect();
    let mut rows = Vec::new();
    for o in outcomes {
        rows.push(o?.row);
    }
    let summary = Summary { log_base: switchsynth_core::LogBase::from(cfg.log_base).name().to_string(), rows };
    artifacts::write_json(&out.join("summary.json"), &Artifact::Summary(summary.clone()))?;
    let csv = summary_csv(&summary);
    let path = out.join("summary.csv");
    std::fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    let all_feasible = summary.rows.iter().all(|r| r.feasible);
    Ok(PipelineReport { summary, all_feasible })
}

fn opt(v: Option<f64>) -> String {
    v.map(artifacts::fmt_f64).unwrap_or_default()
}

pub fn summary_csv(s: &Summary) -> String {
    let mut out = String::from("n,N,T_S,gamma,gamma0,feasible,verified,tau,R,p,min_empirical_rate,diag_disconnected\n");
    for r in &s.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.states,
            opt(r.period),
            artifacts::fmt_f64(r.gamma),
            artifacts::fmt_f64(r.gamma0),
            r.feasible,
            r.verified,
            opt(r.tau),
            opt(r.r),
            r.iterations.map(|p| p.to_string()).unwrap_or_default(),
            opt(r.min_empirical_rate),
            r.diag_disconnected,
        ));
    }
    out
}

/// Human-readable table for the terminal.
pub fn render_summary(s: &Summary) -> String {
    let mut out =
        format!("{:>4} {:>6} {:>9} {:>8} {:>10} {:>10} {:>8} {:>9}\n", "n", "N", "T_S", "gamma", "tau", "R", "p", "verified");
    for r in &s.rows {
        let f = |v: Option<f64>, p: usize| v.map(|v| format!("{v:.p$}")).unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{:>4} {:>6} {:>9} {:>8.4} {:>10} {:>10} {:>8} {:>9}{}\n",
            r.n,
            r.states,
            f(r.period, 5),
            r.gamma,
            r.tau.map(|t| format!("{t:.3e}")).unwrap_or_else(|| "-".into()),
            f(r.r, 5),
            r.iterations.map(|p| p.to_string()).unwrap_or_else(|| "-".into()),
            r.verified,
            if r.gamma_is_one { "  (gamma = 1)" } else { "" },
        ));
    }
    out
}
