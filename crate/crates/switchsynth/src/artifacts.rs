//! JSON artifacts and CSV traces.
//!
//! Every float is written with 17 significant digits so files reload to
//! bit-identical values.

use std::io::{self, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use switchsynth_core::abstraction::MachineTable;
use switchsynth_core::gain::GainCertificate;
use switchsynth_core::{AbstractMachine, Input, RateReport, Sign, SynthesisResult, Trace};

use crate::Error;

/// Pretty printing with `{:.16e}` floats.
struct Exact<'a>(PrettyFormatter<'a>);

impl Formatter for Exact<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, Error> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Exact(PrettyFormatter::with_indent(b"  ")));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    std::fs::write(path, to_json(value)?).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineDoc {
    pub n: usize,
    pub log_base: String,
    /// Partition boundaries `alpha_1 .. alpha_{2n+1}`.
    pub alpha: Vec<f64>,
    pub first_half_sign: i8,
    /// `[start, span]` per state; state 0 is the full circle.
    pub states: Vec<[usize; 2]>,
    /// Successors in the order `(u,y) = (0,-1), (0,+1), (1,-1), (1,+1)`.
    pub trans: Vec<[usize; 4]>,
    pub g_out: Vec<i8>,
    pub h_out: Vec<[f64; 2]>,
    pub d_flag: Vec<u8>,
    pub diag_disconnected: usize,
}

impl MachineDoc {
    pub fn new(m: &AbstractMachine, log_base: &str) -> Self {
        let p = &m.partition;
        MachineDoc {
            n: p.n(),
            log_base: log_base.to_string(),
            alpha: p.alpha().to_vec(),
            first_half_sign: p.first_half_sign().value(),
            states: m.states.iter().map(|a| [a.start, a.span]).collect(),
            trans: m.table.trans.clone(),
            g_out: m.table.g_out.iter().map(|s| s.value()).collect(),
            h_out: m.table.h_out.clone(),
            d_flag: m.table.d_flag.iter().map(|&d| d as u8).collect(),
            diag_disconnected: m.diag_disconnected,
        }
    }

    pub fn table(&self) -> Result<MachineTable, Error> {
        let g_out = self
            .g_out
            .iter()
            .map(|&v| Sign::from_value(v as i64).ok_or_else(|| Error::Artifact(format!("bad sign {v}"))))
            .collect::<Result<_, _>>()?;
        let table = MachineTable {
            trans: self.trans.clone(),
            g_out,
            h_out: self.h_out.clone(),
            d_flag: self.d_flag.iter().map(|&d| d != 0).collect(),
        };
        if !table.is_total() || table.len() != self.states.len() {
            return Err(Error::Artifact("machine tables are inconsistent".into()));
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDoc {
    pub n: usize,
    pub gamma: f64,
    /// The same bound from the linear program.
    pub lp_gamma: Option<f64>,
    pub v: Vec<f64>,
    pub slack_min: f64,
    pub min_v_difference: f64,
}

impl CertificateDoc {
    pub fn new(n: usize, cert: &GainCertificate, lp_gamma: Option<f64>) -> Self {
        CertificateDoc {
            n,
            gamma: cert.gamma,
            lp_gamma,
            v: cert.v.clone(),
            slack_min: cert.slack_min,
            min_v_difference: cert.min_v_difference(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauEntry {
    pub tau: f64,
    pub feasible: bool,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimDoc {
    pub x0: [f64; 2],
    pub horizon: usize,
    pub trace_file: String,
    pub s: f64,
    pub k: f64,
    pub empirical_rate: f64,
    pub bound_holds: bool,
    pub worst_margin: f64,
    pub unbounded_prefix: bool,
    pub mismatches: usize,
    pub final_log_norm: f64,
    pub containment_violations: usize,
    pub gain_violations: usize,
    pub certificate_ok: bool,
}

impl SimDoc {
    pub fn new(
        x0: [f64; 2],
        trace: &Trace,
        report: &RateReport,
        trace_file: String,
        containment: usize,
        certificate_ok: bool,
    ) -> Self {
        SimDoc {
            x0,
            horizon: trace.horizon(),
            trace_file,
            s: report.s,
            k: report.k,
            empirical_rate: report.empirical_rate,
            bound_holds: report.bound_holds,
            worst_margin: report.worst_margin,
            unbounded_prefix: report.unbounded_prefix,
            mismatches: trace.mismatches(),
            final_log_norm: *trace.log_norm.last().expect("log_norm holds x(0)"),
            containment_violations: containment,
            gain_violations: trace.gain_violations(),
            certificate_ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDoc {
    pub n: usize,
    pub feasible: bool,
    pub verified: bool,
    pub tau: Option<f64>,
    pub r: Option<f64>,
    pub gamma0: f64,
    pub iterations: Option<usize>,
    pub storage_slack: Option<f64>,
    pub j: Vec<f64>,
    pub phi: Vec<u8>,
    pub tau_scan: Vec<TauEntry>,
    pub simulations: Vec<SimDoc>,
}

impl ResultDoc {
    pub fn policy(&self) -> Vec<Input> {
        self.phi.iter().map(|&u| if u == 0 { Input::Zero } else { Input::One }).collect()
    }

    pub fn from_result(n: usize, gamma0: f64, res: Option<&SynthesisResult>, verified: bool, storage_slack: Option<f64>) -> Self {
        ResultDoc {
            n,
            feasible: res.is_some_and(|r| r.feasible),
            verified,
            tau: res.map(|r| r.tau),
            r: res.map(|r| r.r),
            gamma0,
            iterations: res.map(|r| r.iterations),
            storage_slack,
            j: res.map(|r| r.j.clone()).unwrap_or_default(),
            phi: res.map(|r| r.phi.iter().map(|u| u.index() as u8).collect()).unwrap_or_default(),
            tau_scan: Vec::new(),
            simulations: Vec::new(),
        }
    }
}

/// One row of the sweep summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryRow {
    pub n: usize,
    pub states: usize,
    pub period: Option<f64>,
    pub gamma: f64,
    pub gamma0: f64,
    /// Set when `gamma = 1`, outside the open interval the small-gain
    /// argument asks for.
    pub gamma_is_one: bool,
    pub feasible: bool,
    pub verified: bool,
    pub tau: Option<f64>,
    pub r: Option<f64>,
    pub iterations: Option<usize>,
    pub min_empirical_rate: Option<f64>,
    pub diag_disconnected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub log_base: String,
    pub rows: Vec<SummaryRow>,
}

/// Any artifact, recognized by its `kind` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Artifact {
    Machine(MachineDoc),
    Certificate(CertificateDoc),
    Result(ResultDoc),
    Summary(Summary),
}

pub const TRACE_HEADER: &str = "t,x1,x2,theta,r,q_start,q_span,u,y,yhat,w,v,hhat";

pub fn write_trace_csv(out: &mut impl Write, trace: &Trace) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in &trace.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            fmt_f64(r.x[0]),
            fmt_f64(r.x[1]),
            fmt_f64(r.theta),
            fmt_f64(r.r),
            r.q.start,
            r.q.span,
            r.u.index(),
            r.y.value(),
            r.yhat.value(),
            r.w as u8,
            fmt_f64(r.v),
            fmt_f64(r.hhat),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_17_significant_digits_and_round_trip() {
        let doc = CertificateDoc {
            n: 3,
            gamma: 0.1 + 0.2,
            lp_gamma: None,
            v: vec![1.0 / 3.0, -0.0, 1e-300],
            slack_min: 0.0,
            min_v_difference: -2.0,
        };
        let text = to_json(&Artifact::Certificate(doc.clone())).unwrap();
        assert!(text.contains("3.0000000000000004e-1"));
        assert!(text.contains("\"kind\": \"certificate\""));
        let back: Artifact = serde_json::from_str(&text).unwrap();
        assert_eq!(back, Artifact::Certificate(doc));
    }

    #[test]
    fn random_floats_reload_bit_identically() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let v: Vec<f64> = (0..20_000)
            .map(|_| f64::from_bits(rng.gen::<u64>() & !(0x7ff << 52) | (rng.gen_range(900u64..1150) << 52)))
            .collect();
        let text = to_json(&v).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert!(v.iter().zip(&back).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}
