//! Command-line driver: flag parsing, config merging and subcommand dispatch.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use specdyn_core::linalg;
use specdyn_core::polarization::{self as pol, PolarizedBasis, QuantumState};
use specdyn_core::polyalg::{self, SectorLabel};
use specdyn_core::quasiclassics::{self as qc, CoherentFamily, FlowOptions};
use specdyn_core::spectral::{self, ModelParams, MultiphotonModel};
use specdyn_core::{fock, Complex64, Error};

use crate::io::{self, StateFile};
use crate::verify::{self, Suite, VerifyOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "specdyn", version, about = "Symmetry sectors, polynomial algebras and quasispin analysis of bosonic models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the sectors of a truncated two-mode space, or dump one sector's algebra.
    Sectors,
    /// Exact spectrum of the harmonic-generation Hamiltonian per sector.
    Spectrum,
    /// Coherent-state stationary points and the selected variational solution.
    Variational,
    /// Unitary evolution on the full two-mode space.
    Evolve,
    /// Classical trajectory on the coherent-state sphere (CSV: t,q,p,energy).
    Flow,
    /// Polarization quasispin tools.
    Polarization {
        #[command(subcommand)]
        command: PolarizationCommand,
    },
    /// Run the invariant suite and print a residual table.
    Verify,
}

#[derive(Debug, Subcommand)]
pub enum PolarizationCommand {
    /// Classify a state file into the unpolarized-light taxonomy.
    Classify,
    /// Write a two-mode squeezed vacuum state file.
    Tmsv,
    /// Write a singlet-power state (X+(1,2))^k|0> file.
    Singlet,
}

/// Every flag, also accepted as a key of the `--config` JSON file.
/// Flags given on the command line win over the file.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// JSON config file mirroring these flags.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Cluster order n >= 2.
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Spatial mode count for polarization states.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omega1: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omega0: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub g_re: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub g_im: Option<f64>,
    #[arg(long, global = true)]
    pub kappa: Option<u32>,
    #[arg(long, global = true)]
    pub s: Option<u32>,
    /// Total-quanta truncation.
    #[arg(long, global = true)]
    pub n_max: Option<u32>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Coherent-state excitation index v.
    #[arg(long, global = true)]
    pub v: Option<u32>,
    #[arg(long, global = true)]
    pub t_end: Option<f64>,
    /// Number of time-grid points.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub record_every: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q0: Option<f64>,
    /// Initial p; defaults to the middle of [l0, l0 + s].
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub p0: Option<f64>,
    /// Input state file.
    #[arg(long, global = true)]
    pub state: Option<PathBuf>,
    /// Moment order S.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// SU(2)_p samples for invariance tests.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta_re: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta_im: Option<f64>,
    /// Singlet power k.
    #[arg(long, global = true)]
    pub k: Option<u32>,
    #[arg(long, global = true, value_enum)]
    pub suite: Option<Suite>,
    /// Largest pump count in verify sweeps.
    #[arg(long, global = true)]
    pub s_max: Option<u32>,
}

macro_rules! merge_fields {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f; } )*
    };
}

impl Options {
    /// Fills unset flags from `file`.
    pub fn merge(mut self, file: Options) -> Options {
        merge_fields!(self, file; n, m, omega1, omega0, g_re, g_im, kappa, s, n_max, tol, seed, output, format,
            v, t_end, points, dt, record_every, q0, p0, state, order, samples, beta_re, beta_im, k, suite, s_max);
        self
    }
}

impl<'de> Deserialize<'de> for Suite {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        Suite::from_str(&name, true).map_err(serde::de::Error::custom)
    }
}

/// Failure classes mapped to exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags, values or input files: exit 2.
    Usage { kind: &'static str, message: String },
    /// A computation or check failed: exit 1.
    Check { kind: &'static str, message: String },
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError::Usage { kind: "usage", message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => 2,
            CliError::Check { .. } => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage { message, .. } | CliError::Check { message, .. } => message,
        }
    }

    pub fn record(&self) -> io::ErrorRecord {
        let (CliError::Usage { kind, .. } | CliError::Check { kind, .. }) = self;
        io::ErrorRecord {
            error: io::ErrorBody { kind, message: self.message().to_string(), exit_code: self.exit_code() },
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::DimensionCap { .. } => "dimension_cap",
            Error::InvalidMode { .. } => "invalid_mode",
            Error::BasisMismatch => "basis_mismatch",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotNormalized { .. } => "not_normalized",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::StructureSingularity { .. } => "structure_singularity",
            Error::NoStationaryPoint => "no_stationary_point",
            Error::FlowOutOfRange { .. } => "flow_out_of_range",
            Error::Leakage { .. } => "leakage",
            Error::EmptyGrid => "empty_grid",
        };
        let message = e.to_string();
        match e {
            // the inputs were valid; the computation itself broke down
            Error::NoStationaryPoint
            | Error::StructureSingularity { .. }
            | Error::BasisMismatch
            | Error::FlowOutOfRange { .. } => CliError::Check { kind, message },
            _ => CliError::Usage { kind, message },
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::usage(msg))
}

fn need<T: Copy>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::usage(format!("missing required flag --{flag}")))
}

fn finite(value: f64, flag: &str) -> CliResult<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        usage(format!("--{flag} must be finite"))
    }
}

/// Checked option set handed to the subcommands.
struct Run {
    o: Options,
    format: Format,
    seed: u64,
}

impl Run {
    fn new(o: Options) -> CliResult<Self> {
        for (v, name) in [
            (o.omega1, "omega1"),
            (o.omega0, "omega0"),
            (o.g_re, "g-re"),
            (o.g_im, "g-im"),
            (o.t_end, "t-end"),
            (o.dt, "dt"),
            (o.q0, "q0"),
            (o.p0, "p0"),
            (o.beta_re, "beta-re"),
            (o.beta_im, "beta-im"),
        ] {
            if let Some(x) = v {
                finite(x, name)?;
            }
        }
        if let Some(n) = o.n {
            if n < 2 {
                return usage("--n must be at least 2");
            }
        }
        if let Some(tol) = o.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return usage("--tol must be positive");
            }
        }
        if o.t_end.is_some_and(|t| t < 0.0) {
            return usage("--t-end must be non-negative");
        }
        if o.dt.is_some_and(|d| d <= 0.0) {
            return usage("--dt must be positive");
        }
        if matches!(o.points, Some(0)) || matches!(o.record_every, Some(0)) || matches!(o.order, Some(0)) {
            return usage("--points, --record-every and --order must be at least 1");
        }
        if matches!(o.samples, Some(0)) || matches!(o.m, Some(0)) {
            return usage("--samples and --m must be at least 1");
        }
        let format = o.format.unwrap_or_default();
        let seed = o.seed.unwrap_or(0);
        Ok(Self { o, format, seed })
    }

    fn n(&self) -> CliResult<u32> {
        need(self.o.n, "n")
    }

    fn sector(&self) -> CliResult<SectorLabel> {
        let n = self.n()?;
        let kappa = need(self.o.kappa, "kappa")?;
        let s = need(self.o.s, "s")?;
        if kappa >= n {
            return usage("--kappa must be below --n");
        }
        Ok(SectorLabel::new(n, kappa, s)?)
    }

    fn params(&self) -> CliResult<ModelParams> {
        let n = self.n()?;
        let omega1 = self.o.omega1.unwrap_or(1.0);
        let g = Complex64::new(self.o.g_re.unwrap_or(0.0), self.o.g_im.unwrap_or(0.0));
        let omega0 = self.o.omega0.unwrap_or(f64::from(n) * omega1);
        Ok(ModelParams::new(n, omega1, omega0, g)?)
    }

    fn output(&self) -> Option<&Path> {
        self.o.output.as_deref()
    }

    fn emit(&self, text: &str) -> CliResult<()> {
        io::emit(text, self.output()).map_err(CliError::usage)
    }

    fn csv_unsupported(&self, what: &str) -> CliResult<()> {
        if self.format == Format::Csv {
            return usage(format!("{what} has no CSV form; use --format json"));
        }
        Ok(())
    }
}

fn cmd_sectors(run: &Run) -> CliResult<i32> {
    if run.o.kappa.is_some() || run.o.s.is_some() {
        run.csv_unsupported("an algebra dump")?;
        let sector = run.sector()?;
        let rep = polyalg::build_supd2_rep(sector);
        run.emit(&io::to_json(&io::RepJson::new(sector, &rep)))?;
        return Ok(0);
    }
    let entries = spectral::decompose_sectors(run.n()?, need(run.o.n_max, "n-max")?)?;
    let text = match run.format {
        Format::Json => io::to_json(&entries.iter().map(io::SectorEntryJson::from).collect::<Vec<_>>()),
        Format::Csv => io::to_csv(
            &["kappa", "s", "dim", "fitted_dim", "complete"],
            entries.iter().map(|e| {
                vec![
                    e.label.kappa().to_string(),
                    e.label.s().to_string(),
                    e.label.dim().to_string(),
                    e.fitted_dim.to_string(),
                    e.complete.to_string(),
                ]
            }),
        ),
    };
    run.emit(&text)?;
    Ok(0)
}

fn sector_spectrum(run: &Run, params: &ModelParams, sector: SectorLabel) -> CliResult<io::SpectrumJson> {
    let h = spectral::build_hhg(params, sector)?;
    let spec = spectral::diagonalize(&h)?;
    let times = spectral::time_grid(run.o.t_end.unwrap_or(10.0), run.o.points.unwrap_or(101))?;
    let rep = polyalg::build_supd2_rep(sector);
    let mut start = vec![Complex64::new(0.0, 0.0); sector.dim()];
    start[0] = Complex64::new(1.0, 0.0);
    let evo = spectral::evolve(&h, &start, &times)?;
    Ok(io::SpectrumJson {
        sector: sector.into(),
        eigenvalues: spec.eigenvalues,
        expectations: io::Expectations { t: times, y0: evo.expectations(&rep.y0)? },
    })
}

fn cmd_spectrum(run: &Run) -> CliResult<i32> {
    let params = run.params()?;
    let sectors: Vec<SectorLabel> = if run.o.kappa.is_some() || run.o.s.is_some() {
        vec![run.sector()?]
    } else {
        let n_max = need(run.o.n_max, "n-max (or --kappa and --s)")?;
        spectral::decompose_sectors(params.n, n_max)?.into_iter().filter(|e| e.complete).map(|e| e.label).collect()
    };
    let results = sectors.iter().map(|&s| sector_spectrum(run, &params, s)).collect::<CliResult<Vec<_>>>()?;
    let text = match run.format {
        Format::Json if results.len() == 1 => io::to_json(&results[0]),
        Format::Json => io::to_json(&results),
        Format::Csv => io::to_csv(
            &["kappa", "s", "level_index", "energy"],
            results.iter().flat_map(|r| {
                r.eigenvalues.iter().enumerate().map(move |(i, e)| {
                    vec![r.sector.kappa.to_string(), r.sector.s.to_string(), i.to_string(), io::csv_float(*e)]
                })
            }),
        ),
    };
    run.emit(&text)?;
    Ok(0)
}

fn cmd_variational(run: &Run) -> CliResult<i32> {
    run.csv_unsupported("variational")?;
    let sector = run.sector()?;
    let params = run.params()?;
    let h = spectral::build_hhg(&params, sector)?;
    let family = CoherentFamily::new(polyalg::hp_map(&polyalg::build_supd2_rep(sector))?);
    let points = qc::stationary_points(&family, &h, run.o.v.unwrap_or(0))?;
    let report = io::VariationalReport {
        best: qc::select_best(&points).map(|p| io::VariationalJson::new(sector, &p)),
        stationary_points: points.iter().map(|p| io::VariationalJson::new(sector, p)).collect(),
        exact_energies: spectral::diagonalize(&h)?.eigenvalues,
    };
    run.emit(&io::to_json(&report))?;
    Ok(0)
}

fn cmd_evolve(run: &Run) -> CliResult<i32> {
    let params = run.params()?;
    let model = MultiphotonModel {
        n: params.n,
        frequencies: vec![params.omega0, params.omega1],
        couplings: vec![(vec![1; params.n as usize], params.g)],
    };
    let (psi0, n_max) = match &run.o.state {
        Some(path) => {
            let file = StateFile::read(path).map_err(CliError::usage)?;
            if file.mode_count != 2 || file.rho.is_some() {
                return usage("evolve needs a pure two-mode state (mode_count 2, no rho)");
            }
            let QuantumState::Pure(psi) = file.quantum_state().map_err(CliError::usage)? else {
                unreachable!("pure file");
            };
            (psi, file.n_max)
        }
        None => {
            // pseudovacuum |n0 = s, n1 = kappa> of the selected sector
            let sector = run.sector()?;
            let n_max = run.o.n_max.unwrap_or(sector.max_total());
            let basis = fock::build_basis(2, n_max)?;
            let occ = fock::OccupationState(vec![sector.s(), sector.kappa()]);
            let psi = basis.ket(&occ).ok_or_else(|| CliError::usage("--n-max too small for the sector"))?;
            (psi, n_max)
        }
    };
    let (basis, h) = spectral::build_hmp_general(&model, n_max)?;
    let times = spectral::time_grid(run.o.t_end.unwrap_or(20.0), run.o.points.unwrap_or(201))?;
    let evo = spectral::evolve(&h, &psi0, &times)?;
    let blocks: Vec<Vec<usize>> = spectral::sector_blocks(&basis, params.n)?.into_values().collect();
    let norm: Vec<f64> = evo.states.iter().map(|p| linalg::norm(p)).collect();
    let n0 = evo.expectations(&fock::number_op(&basis, 0)?)?;
    let n1 = evo.expectations(&fock::number_op(&basis, 1)?)?;
    let text = match run.format {
        Format::Json => io::to_json(&io::EvolutionJson {
            t: times.clone(),
            norm,
            n0,
            n1,
            population_drift: evo.population_drift(&blocks),
        }),
        Format::Csv => io::to_csv(
            &["t", "norm", "N0", "N1"],
            (0..times.len()).map(|i| vec![io::csv_float(times[i]), io::csv_float(norm[i]), io::csv_float(n0[i]), io::csv_float(n1[i])]),
        ),
    };
    run.emit(&text)?;
    Ok(0)
}

fn cmd_flow(run: &Run) -> CliResult<i32> {
    let sector = run.sector()?;
    let params = run.params()?;
    let h = spectral::build_hhg(&params, sector)?;
    let family = CoherentFamily::new(polyalg::hp_map(&polyalg::build_supd2_rep(sector))?);
    let (lo, hi) = family.p_range();
    let options = FlowOptions {
        t_end: run.o.t_end.unwrap_or(50.0),
        dt: run.o.dt.unwrap_or(1e-3),
        record_every: run.o.record_every.unwrap_or(100),
    };
    let traj = qc::classical_flow(&family, &h, run.o.q0.unwrap_or(0.0), run.o.p0.unwrap_or(0.5 * (lo + hi)), &options)?;
    #[derive(serde::Serialize)]
    struct FlowJson {
        t: Vec<f64>,
        q: Vec<f64>,
        p: Vec<f64>,
        energy: Vec<f64>,
        relative_energy_drift: f64,
    }
    // flow defaults to CSV unless JSON is asked for explicitly
    let text = match run.o.format {
        Some(Format::Json) => io::to_json(&FlowJson {
            t: traj.iter().map(|s| s.t).collect(),
            q: traj.iter().map(|s| s.q).collect(),
            p: traj.iter().map(|s| s.p).collect(),
            energy: traj.iter().map(|s| s.energy).collect(),
            relative_energy_drift: qc::relative_energy_drift(&traj),
        }),
        _ => io::flow_csv(&traj),
    };
    run.emit(&text)?;
    Ok(0)
}

fn cmd_classify(run: &Run) -> CliResult<i32> {
    run.csv_unsupported("a UL report")?;
    let path = run.o.state.as_deref().ok_or_else(|| CliError::usage("missing required flag --state"))?;
    let file = StateFile::read(path).map_err(CliError::usage)?;
    if file.mode_count % 2 != 0 || file.mode_count == 0 {
        return usage("polarization states need an even, nonzero mode_count (+/- per spatial mode)");
    }
    let basis = PolarizedBasis::new(file.mode_count / 2, file.n_max)?;
    let state = file.quantum_state().map_err(CliError::usage)?;
    let default_tol = if file.rho.is_some() { pol::MIXED_TOL } else { pol::PURE_TOL };
    state.validate(basis.dim())?;
    let q = pol::build_quasispin(&basis)?;
    let report = pol::classify_ul(
        &state,
        &q,
        run.o.order.unwrap_or(6),
        run.o.tol.unwrap_or(default_tol),
        run.o.samples.unwrap_or(32),
        run.seed,
    )?;
    run.emit(&io::to_json(&io::UlReportJson::from(&report)))?;
    Ok(0)
}

fn cmd_tmsv(run: &Run) -> CliResult<i32> {
    run.csv_unsupported("a state file")?;
    let m = run.o.m.unwrap_or(1);
    let basis = PolarizedBasis::new(m, need(run.o.n_max, "n-max")?)?;
    let beta = Complex64::new(run.o.beta_re.unwrap_or(0.5), run.o.beta_im.unwrap_or(0.0));
    let psi = pol::tmsv_state(beta, &basis)?;
    run.emit(&io::to_json(&StateFile::pure(2 * m, basis.n_max(), &psi)))?;
    Ok(0)
}

fn cmd_singlet(run: &Run) -> CliResult<i32> {
    run.csv_unsupported("a state file")?;
    let m = run.o.m.unwrap_or(2);
    if m < 2 {
        return usage("singlet pairs need --m >= 2");
    }
    let k = run.o.k.unwrap_or(1);
    let basis = PolarizedBasis::new(m, run.o.n_max.unwrap_or(2 * k))?;
    if 2 * k > basis.n_max() {
        return usage("--n-max must be at least 2k");
    }
    let x = pol::x_plus(&basis, 1, 2)?;
    let mut psi = basis.vacuum();
    for _ in 0..k {
        psi = x.matrix().matvec(&psi);
    }
    run.emit(&io::to_json(&StateFile::pure(2 * m, basis.n_max(), &linalg::normalized(&psi))))?;
    Ok(0)
}

fn cmd_verify(run: &Run) -> CliResult<i32> {
    let opts = VerifyOptions { seed: run.seed, s_max: run.o.s_max.unwrap_or(20) };
    if opts.s_max == 0 {
        return usage("--s-max must be at least 1");
    }
    let report = verify::run(run.o.suite.unwrap_or(Suite::All), &opts)?;
    let text = match run.format {
        Format::Json => io::to_json(&report),
        Format::Csv => io::to_csv(
            &["suite", "check", "value", "relation", "bound", "pass"],
            report.rows.iter().map(|r| {
                let rel = serde_json::to_value(r.relation).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
                vec![r.suite.to_string(), r.check.clone(), io::csv_float(r.value), rel, io::csv_float(r.bound), r.pass.to_string()]
            }),
        ),
    };
    // the table always goes to stdout; --output/--format choose the saved artifact
    let table = verify::render_table(&report);
    match run.output() {
        Some(_) => {
            io::emit(&table, None).map_err(CliError::usage)?;
            run.emit(&text)?;
        }
        None if run.o.format.is_some() => run.emit(&text)?,
        None => io::emit(&table, None).map_err(CliError::usage)?,
    }
    Ok(if report.passed { 0 } else { 1 })
}

fn read_config(path: &Path) -> CliResult<Options> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
}

/// Runs a parsed command line; returns the exit status.
pub fn execute(cli: Cli) -> CliResult<i32> {
    let opts = match &cli.opts.config {
        Some(path) => {
            let file = read_config(path)?;
            cli.opts.clone().merge(file)
        }
        None => cli.opts.clone(),
    };
    let run = Run::new(opts)?;
    match cli.command {
        Command::Sectors => cmd_sectors(&run),
        Command::Spectrum => cmd_spectrum(&run),
        Command::Variational => cmd_variational(&run),
        Command::Evolve => cmd_evolve(&run),
        Command::Flow => cmd_flow(&run),
        Command::Polarization { command } => match command {
            PolarizationCommand::Classify => cmd_classify(&run),
            PolarizationCommand::Tmsv => cmd_tmsv(&run),
            PolarizationCommand::Singlet => cmd_singlet(&run),
        },
        Command::Verify => cmd_verify(&run),
    }
}

/// Parses `args`, runs, reports errors on stderr; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 };
            }
            let err = CliError::usage(e.to_string().trim_end());
            report(&err);
            return err.exit_code();
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            report(&err);
            err.exit_code()
        }
    }
}

fn report(err: &CliError) {
    eprintln!("specdyn: {}", err.message());
    eprintln!("{}", serde_json::to_string(&err.record()).expect("serializable error"));
}
