//! Human-readable dumps of artifacts.

use std::fmt::Write as _;
use std::path::Path;

use crate::artifacts::{Artifact, CertificateDoc, MachineDoc, ResultDoc, Summary};
use crate::pipeline::render_summary;
use crate::Error;

pub fn load(path: &Path) -> Result<Artifact, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Artifact(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Artifact(format!("{}: {e}", path.display())))
}

pub fn render(a: &Artifact) -> Result<String, Error> {
    Ok(match a {
        Artifact::Machine(m) => machine(m)?,
        Artifact::Certificate(c) => certificate(c),
        Artifact::Result(r) => result(r),
        Artifact::Summary(s) => summary(s),
    })
}

fn machine(m: &MachineDoc) -> Result<String, Error> {
    m.table()?;
    let width = std::f64::consts::PI / m.n as f64;
    let mut out = format!("machine: n = {}, {} states, log base {}\n", m.n, m.states.len(), m.log_base);
    let _ = writeln!(
        out,
        "{:>5} {:>22} {:>6} {:>3} {:>11} {:>11}  next (0,-) (0,+) (1,-) (1,+)",
        "q", "arc [deg]", "span", "d", "h(u=0)", "h(u=1)"
    );
    for (i, [start, span]) in m.states.iter().enumerate() {
        let lo = m.alpha.get(*start).copied().unwrap_or(f64::NAN);
        let hi = lo + *span as f64 * width;
        let t = m.trans[i];
        let _ = writeln!(
            out,
            "{i:>5} [{:>8.2}, {:>8.2}) {span:>6} {:>3} {:>11.6} {:>11.6}  {:>5} {:>5} {:>5} {:>5}  g={:+}",
            lo.to_degrees(),
            hi.to_degrees(),
            m.d_flag[i],
            m.h_out[i][0],
            m.h_out[i][1],
            t[0],
            t[1],
            t[2],
            t[3],
            m.g_out[i],
        );
    }
    let _ = writeln!(out, "disconnected refinements: {}", m.diag_disconnected);
    Ok(out)
}

fn certificate(c: &CertificateDoc) -> String {
    let mut out = format!("certificate: n = {}\n  gamma     = {:.10}\n", c.n, c.gamma);
    if let Some(lp) = c.lp_gamma {
        let _ = writeln!(out, "  LP gamma  = {lp:.10}");
    }
    let _ = writeln!(out, "  slack_min = {:.3e} ({})", c.slack_min, if c.slack_min >= -1e-9 { "ok" } else { "VIOLATED" });
    let _ = writeln!(out, "  min V(q1) - V(q2) = {:.6}", c.min_v_difference);
    for (i, v) in c.v.iter().enumerate() {
        let _ = writeln!(out, "  V[{i}] = {v:.6}");
    }
    out
}

fn result(r: &ResultDoc) -> String {
    let f = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into());
    let mut out = format!(
        "result: n = {}, feasible = {}, verified = {}\n  tau = {}, R = {}, gamma0 = {:.6}, p = {}\n",
        r.n,
        r.feasible,
        r.verified,
        f(r.tau),
        f(r.r),
        r.gamma0,
        r.iterations.map(|p| p.to_string()).unwrap_or_else(|| "-".into()),
    );
    for (i, (j, u)) in r.j.iter().zip(&r.phi).enumerate() {
        let _ = writeln!(out, "  q = {i:>4}  phi = {u}  J = {j:.6}");
    }
    for s in &r.simulations {
        let _ = writeln!(
            out,
            "  sim x0 = [{:.4}, {:.4}], T = {}: S = {:.4}, empirical rate = {:.5}, bound {}, mismatches {}, certificate {}",
            s.x0[0],
            s.x0[1],
            s.horizon,
            s.s,
            s.empirical_rate,
            if s.bound_holds { "holds" } else { "VIOLATED" },
            s.mismatches,
            if s.certificate_ok { "ok" } else { "VIOLATED" },
        );
    }
    out
}

fn summary(s: &Summary) -> String {
    format!("summary (log base {}):\n{}", s.log_base, render_summary(s))
}
