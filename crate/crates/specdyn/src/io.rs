//! JSON and CSV file formats.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use specdyn_core::linalg::CMatrix;
use specdyn_core::polarization::{InvarianceResidual, QuantumState, UlReport};
use specdyn_core::polyalg::{AlgebraRep, SectorLabel};
use specdyn_core::quasiclassics::{FlowState, StationaryPoint};
use specdyn_core::spectral::SectorEntry;
use specdyn_core::{Complex64, Rational};

/// `[re, im]` pair.
pub type Pair = [f64; 2];

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn unpair(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn ratio(q: Rational) -> [i64; 2] {
    [*q.numer(), *q.denom()]
}

pub fn matrix_rows(m: &CMatrix) -> Vec<Vec<Pair>> {
    (0..m.rows()).map(|r| m.row(r).iter().copied().map(pair).collect()).collect()
}

/// State vector (and optionally a density matrix) in Fock basis order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub mode_count: usize,
    pub n_max: u32,
    #[serde(default)]
    pub amplitudes: Vec<Pair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<Vec<Pair>>>,
}

impl StateFile {
    pub fn pure(mode_count: usize, n_max: u32, psi: &[Complex64]) -> Self {
        Self { mode_count, n_max, amplitudes: psi.iter().copied().map(pair).collect(), rho: None }
    }

    /// The density matrix when present, the pure state otherwise.
    pub fn quantum_state(&self) -> Result<QuantumState, String> {
        match &self.rho {
            Some(rows) => {
                let dim = rows.len();
                if rows.iter().any(|r| r.len() != dim) {
                    return Err("rho must be a square matrix".into());
                }
                let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().map(unpair).collect()).collect();
                Ok(QuantumState::Mixed(CMatrix::from_rows(&rows)))
            }
            None => Ok(QuantumState::Pure(self.amplitudes.iter().map(unpair).collect())),
        }
    }

    pub fn read(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid state file {}: {e}", path.display()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorJson {
    pub n: u32,
    pub kappa: u32,
    pub s: u32,
    pub l0: [i64; 2],
    pub l1: [i64; 2],
}

impl From<SectorLabel> for SectorJson {
    fn from(s: SectorLabel) -> Self {
        Self { n: s.n(), kappa: s.kappa(), s: s.s(), l0: ratio(s.l0()), l1: ratio(s.l1()) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorEntryJson {
    #[serde(flatten)]
    pub sector: SectorJson,
    pub dim: usize,
    pub fitted_dim: usize,
    pub complete: bool,
}

impl From<&SectorEntry> for SectorEntryJson {
    fn from(e: &SectorEntry) -> Self {
        Self { sector: e.label.into(), dim: e.label.dim(), fitted_dim: e.fitted_dim, complete: e.complete }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RepJson {
    pub n: u32,
    pub kappa: u32,
    pub s: u32,
    pub l0: [i64; 2],
    pub l1: [i64; 2],
    #[serde(rename = "Y0")]
    pub y0: Vec<Vec<Pair>>,
    #[serde(rename = "Yplus")]
    pub y_plus: Vec<Vec<Pair>>,
}

impl RepJson {
    pub fn new(sector: SectorLabel, rep: &AlgebraRep) -> Self {
        Self {
            n: sector.n(),
            kappa: sector.kappa(),
            s: sector.s(),
            l0: ratio(sector.l0()),
            l1: ratio(sector.l1()),
            y0: matrix_rows(rep.y0.matrix()),
            y_plus: matrix_rows(rep.y_plus.matrix()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Expectations {
    pub t: Vec<f64>,
    #[serde(rename = "Y0")]
    pub y0: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumJson {
    pub sector: SectorJson,
    pub eigenvalues: Vec<f64>,
    pub expectations: Expectations,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationalJson {
    pub sector: SectorJson,
    pub v: u32,
    pub r: f64,
    pub theta: f64,
    pub energy: f64,
    pub residual: f64,
    pub variance: f64,
    pub kind: &'static str,
}

impl VariationalJson {
    pub fn new(sector: SectorLabel, p: &StationaryPoint) -> Self {
        let kind = match p.kind {
            specdyn_core::quasiclassics::StationaryKind::Minimum => "min",
            specdyn_core::quasiclassics::StationaryKind::Maximum => "max",
            specdyn_core::quasiclassics::StationaryKind::Flat => "flat",
        };
        Self {
            sector: sector.into(),
            v: p.v,
            r: p.r,
            theta: p.theta,
            energy: p.energy,
            residual: p.residual.max(p.theta_residual),
            variance: p.variance,
            kind,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationalReport {
    pub best: Option<VariationalJson>,
    pub stationary_points: Vec<VariationalJson>,
    pub exact_energies: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolutionJson {
    pub t: Vec<f64>,
    pub norm: Vec<f64>,
    #[serde(rename = "N0")]
    pub n0: Vec<f64>,
    #[serde(rename = "N1")]
    pub n1: Vec<f64>,
    pub population_drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentJson {
    pub order: usize,
    #[serde(rename = "P0")]
    pub p0: Vec<f64>,
    #[serde(rename = "P1")]
    pub p1: Vec<f64>,
    #[serde(rename = "P2")]
    pub p2: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualJson {
    pub group: &'static str,
    pub angle: f64,
    pub axis: [f64; 3],
    pub state_residual: f64,
    pub first_moment: f64,
}

impl From<&InvarianceResidual> for ResidualJson {
    fn from(r: &InvarianceResidual) -> Self {
        Self {
            group: r.family.as_str(),
            angle: r.angle,
            axis: r.axis,
            state_residual: r.state_residual,
            first_moment: r.first_moment,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UlReportJson {
    pub verdict: &'static str,
    pub polarization_degree: f64,
    /// Normalization of the polarization degree.
    pub degree_normalization: &'static str,
    pub moments: MomentJson,
    pub residuals: Vec<ResidualJson>,
    pub seed: u64,
    pub tol: f64,
}

impl From<&UlReport> for UlReportJson {
    fn from(r: &UlReport) -> Self {
        Self {
            verdict: r.verdict.as_str(),
            polarization_degree: r.polarization_degree,
            degree_normalization: "<N>/2",
            moments: MomentJson {
                order: r.moments.s_max,
                p0: r.moments.values[0].clone(),
                p1: r.moments.values[1].clone(),
                p2: r.moments.values[2].clone(),
            },
            residuals: r.invariance.iter().map(ResidualJson::from).collect(),
            seed: r.seed,
            tol: r.tol,
        }
    }
}

/// Machine-readable error record written to stderr.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub error: ErrorBody,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    pub kind: &'static str,
    pub message: String,
    pub exit_code: i32,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

/// Fixed 17-significant-digit float formatting for CSV cells.
pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text from a header and rows of preformatted cells.
pub fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

pub fn flow_csv(traj: &[FlowState]) -> String {
    to_csv(
        &["t", "q", "p", "energy"],
        traj.iter().map(|s| vec![csv_float(s.t), csv_float(s.q), csv_float(s.p), csv_float(s.energy)]),
    )
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| format!("stdout: {e}"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_file_round_trip() {
        let psi = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let f = StateFile::pure(1, 1, &psi);
        let text = to_json(&f);
        assert!(!text.contains("rho"));
        let back: StateFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.quantum_state().unwrap(), QuantumState::Pure(psi.to_vec()));
    }

    #[test]
    fn rejects_unknown_state_keys() {
        let bad = r#"{"mode_count":1,"n_max":0,"amplitudes":[[1,0]],"extra":1}"#;
        assert!(serde_json::from_str::<StateFile>(bad).is_err());
    }

    #[test]
    fn csv_keeps_seventeen_digits() {
        let x = 0.1f64 + 0.2;
        assert_eq!(csv_float(x).parse::<f64>().unwrap(), x);
        let text = to_csv(&["a", "b"], [vec!["1".into(), "2".into()]]);
        assert_eq!(text, "a,b\n1,2\n");
    }

    #[test]
    fn sector_json_fields() {
        let s = SectorLabel::new(2, 1, 3).unwrap();
        let v = serde_json::to_value(SectorJson::from(s)).unwrap();
        assert_eq!(v["l0"], serde_json::json!([-2, 3]));
        assert_eq!(v["l1"], serde_json::json!([7, 3]));
    }
}
