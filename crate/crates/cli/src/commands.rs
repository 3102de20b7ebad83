use std::collections::HashSet;
use std::path::{Path, PathBuf};

use clap::{Args, FromArgMatches};
use entrate::acf::{autocorrelation, white_noise_band};
use entrate::discretize::{discretize, rank_plot_data, RealSeries, SymbolSeries};
use entrate::ingest::ingest_path;
use entrate::shuffle::{independence_test_symbols, select_lag, serial_dependence_curve_symbols};
use entrate::synth::{ChainSpec, Family, Garch11, Generated, GeneratorSpec, GARCH_BURN_IN};
use entrate::{
    calibrate_overhead, cr_from_entropy_rate, entropy, markov_entropy_rate, CalibrationTable,
    Error, MarkovModel, Pmf, Result, TestParams,
};
use serde::{Deserialize, Serialize};

use crate::args::{CalibrationArgs, CodecArgs, FamilyArg, InputArgs};
use crate::output::{num, write_csv, write_json, Provenance};
use crate::{Cli, Command};

pub fn run(cmd: Command) -> Result<()> {
    check_paths(&cmd, &HashSet::new())?;
    execute(cmd)
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Calibrate(c) => c.execute(),
        Command::Discretize(c) => c.execute(),
        Command::Rankplot(c) => c.execute(),
        Command::Generate(c) => c.execute(),
        Command::Test(c) => c.execute(),
        Command::Sdf(c) => c.execute(),
        Command::Acf(c) => c.execute(),
        Command::Entropy(c) => c.execute(),
        Command::Pipeline(c) => c.execute(),
    }
}

/// Input files must exist (or be produced by an earlier pipeline step) and
/// output directories must exist. Returns the outputs the command writes.
fn check_paths(cmd: &Command, produced: &HashSet<PathBuf>) -> Result<Vec<PathBuf>> {
    let (inputs, outputs): (Vec<&Path>, Vec<&Path>) = match cmd {
        Command::Calibrate(c) => (vec![], vec![&c.out]),
        Command::Discretize(c) => (vec![&c.input.input], vec![&c.out]),
        Command::Rankplot(c) => (vec![&c.input.input], vec![&c.out]),
        Command::Generate(c) => {
            let mut ins: Vec<&Path> = Vec::new();
            ins.extend(c.spec.as_deref());
            ins.extend(c.pmf.as_deref());
            ins.extend(c.transition.as_deref());
            (ins, vec![&c.out])
        }
        Command::Test(c) => {
            let mut ins = vec![c.input.input.as_path()];
            ins.extend(c.calibration.calibration.as_deref());
            (ins, c.json.as_deref().into_iter().collect())
        }
        Command::Sdf(c) => {
            let mut ins = vec![c.input.input.as_path()];
            ins.extend(c.calibration.calibration.as_deref());
            let mut outs: Vec<&Path> = c.csv.as_deref().into_iter().collect();
            outs.extend(c.json.as_deref());
            (ins, outs)
        }
        Command::Acf(c) => (vec![&c.input.input], c.out.as_deref().into_iter().collect()),
        Command::Entropy(c) => {
            let mut ins: Vec<&Path> = Vec::new();
            ins.extend(c.pmf.as_deref());
            ins.extend(c.markov.as_deref());
            (ins, c.json.as_deref().into_iter().collect())
        }
        Command::Pipeline(c) => (vec![&c.config], vec![]),
    };
    for p in inputs {
        if !p.is_file() && !produced.contains(p) {
            return Err(Error::InvalidInput(format!(
                "input file {} does not exist",
                p.display()
            )));
        }
    }
    for p in &outputs {
        let parent = p.parent().filter(|d| !d.as_os_str().is_empty());
        if let Some(dir) = parent {
            if !dir.is_dir() {
                return Err(Error::InvalidInput(format!(
                    "output directory {} does not exist",
                    dir.display()
                )));
            }
        }
    }
    Ok(outputs.into_iter().map(Path::to_path_buf).collect())
}

fn load_series(input: &InputArgs) -> Result<RealSeries> {
    ingest_path(&input.input, &input.ingest_options())
}

/// Discretized series, or the raw integers when `--symbols` is set.
fn load_symbols(input: &InputArgs, bits: u8) -> Result<SymbolSeries> {
    let s = load_series(input)?;
    if !input.symbols {
        return discretize(&s, bits);
    }
    let limit = f64::from(1u32 << bits);
    let symbols = s
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v.fract() == 0.0 && (0.0..limit).contains(&v) {
                Ok(v as u16)
            } else {
                Err(Error::InvalidInput(format!(
                    "observation {} ({v}) is not a {bits}-bit symbol",
                    i + 1
                )))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    SymbolSeries::new(symbols, bits)
}

fn load_table(args: &CalibrationArgs) -> Result<CalibrationTable> {
    let codec = args.codec.config();
    let path = match (&args.calibration, &args.calibration_dir) {
        (Some(p), _) => p.clone(),
        (None, Some(dir)) => dir.join(format!("{}.json", codec.key())),
        (None, None) => {
            return Err(Error::InvalidInput(
                "no calibration table: pass --calibration or set ENTRATE_CALIBRATION_DIR \
                 (create one with `entrate calibrate`)"
                    .into(),
            ))
        }
    };
    if !path.is_file() {
        return Err(Error::InvalidInput(format!(
            "calibration table {} not found; run `entrate calibrate`",
            path.display()
        )));
    }
    let table = CalibrationTable::load(&path)?;
    table.ensure_matches(&codec)?;
    Ok(table)
}

fn resolve_seed(seed: &mut Option<u64>) -> u64 {
    *seed.get_or_insert_with(|| {
        let s = rand::random();
        log::info!("no --seed given; drew {s}");
        s
    })
}

#[derive(Debug, Args, Serialize)]
pub struct CalibrateCmd {
    /// Input lengths in bytes.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "100,1000,10000,100000,1000000"
    )]
    pub lengths: Vec<u64>,
    #[arg(long, default_value_t = 20)]
    pub reps: u32,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub codec: CodecArgs,
}

impl CalibrateCmd {
    fn execute(mut self) -> Result<()> {
        let seed = resolve_seed(&mut self.seed);
        let table = calibrate_overhead(&self.lengths, self.reps, &self.codec.config(), seed)?;
        table.save(&self.out)?;
        for e in &table.entries {
            println!(
                "length={} mean_overhead={:.2} sd={:.2} fraction={:.6}",
                e.length,
                e.mean_overhead,
                e.sd,
                e.mean_overhead / e.length as f64
            );
        }
        Ok(())
    }
}

#[derive(Debug, Args, Serialize)]
pub struct DiscretizeCmd {
    #[command(flatten)]
    pub input: InputArgs,
    /// Resolution in bits (1-16).
    #[arg(long, default_value_t = 8)]
    pub bits: u8,
    /// Raw symbol file: one byte per symbol, or two little-endian bytes above 8 bits.
    #[arg(long)]
    pub out: PathBuf,
}

impl DiscretizeCmd {
    fn execute(self) -> Result<()> {
        let sym = load_symbols(&self.input, self.bits)?;
        std::fs::write(&self.out, sym.to_bytes())?;
        println!("symbols={} bits={}", sym.len(), sym.bits());
        Ok(())
    }
}

#[derive(Debug, Args, Serialize)]
pub struct RankplotCmd {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 8)]
    pub bits: u8,
    /// CSV with columns index,state.
    #[arg(long)]
    pub out: PathBuf,
}

impl RankplotCmd {
    fn execute(self) -> Result<()> {
        let sym = load_symbols(&self.input, self.bits)?;
        let rows: Vec<String> = rank_plot_data(&sym)
            .into_iter()
            .map(|(i, s)| format!("{i},{s}"))
            .collect();
        let prov = Provenance::new("rankplot", None, &self);
        write_csv(&self.out, &prov, "index,state", &rows)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateCmd {
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Series length.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON generator spec ({"family": ..., "n": ..., "seed": ..., params}); replaces the flags.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Output CSV, one observation per line.
    #[arg(long)]
    pub out: PathBuf,
    /// Standard deviation for iid-gaussian and random-walk-returns.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Sign-flip threshold for hidden-dependence.
    #[arg(long, default_value_t = entrate::synth::HIDDEN_DEPENDENCE_THRESHOLD)]
    pub threshold: f64,
    /// Pmf file for iid-categorical (default: the seeded 256-point preset).
    #[arg(long)]
    pub pmf: Option<PathBuf>,
    /// Transition matrix file for markov (default: sticky chain).
    #[arg(long)]
    pub transition: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    pub states: usize,
    #[arg(long, default_value_t = 0.9)]
    pub stay: f64,
    #[arg(long, default_value_t = 0.05)]
    pub omega: f64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.85)]
    pub beta: f64,
    #[arg(long, default_value_t = GARCH_BURN_IN)]
    pub burn_in: usize,
    /// For garch11: write return,sigma,residual columns.
    #[arg(long)]
    pub with_volatility: bool,
}

impl GenerateCmd {
    fn spec(&mut self) -> Result<GeneratorSpec> {
        if let Some(path) = &self.spec {
            let spec: GeneratorSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            self.seed = Some(spec.seed);
            return Ok(spec);
        }
        let family = self
            .family
            .ok_or_else(|| Error::InvalidInput("--family or --spec is required".into()))?;
        let n = self
            .n
            .ok_or_else(|| Error::InvalidInput("--n is required".into()))?;
        let seed = resolve_seed(&mut self.seed);
        let read = |p: &Path| std::fs::read_to_string(p).map_err(Error::from);
        let family = match family {
            FamilyArg::IidCategorical => Family::IidCategorical {
                pmf: match &self.pmf {
                    Some(p) => Some(Pmf::parse(&read(p)?)?.probs().to_vec()),
                    None => None,
                },
            },
            FamilyArg::IidUniformBytes => Family::IidUniformBytes,
            FamilyArg::IidGaussian => Family::IidGaussian { sigma: self.sigma },
            FamilyArg::Markov => Family::Markov {
                chain: match &self.transition {
                    Some(p) => ChainSpec::Matrix {
                        transition: MarkovModel::parse(&read(p)?)?.transition().to_vec(),
                    },
                    None => ChainSpec::Sticky {
                        states: self.states,
                        stay: self.stay,
                    },
                },
            },
            FamilyArg::HiddenDependence => Family::HiddenDependence {
                threshold: self.threshold,
            },
            FamilyArg::RandomWalkReturns => Family::RandomWalkReturns { sigma: self.sigma },
            FamilyArg::Garch11 => Family::Garch11(Garch11 {
                omega: self.omega,
                alpha: self.alpha,
                beta: self.beta,
                burn_in: self.burn_in,
            }),
        };
        Ok(GeneratorSpec { family, n, seed })
    }

    fn execute(mut self) -> Result<()> {
        let spec = self.spec()?;
        let (header, rows): (&str, Vec<String>) = match (&spec.family, self.with_volatility) {
            (Family::Garch11(g), true) => {
                let path = entrate::synth::gen_garch11(g, spec.n, spec.seed)?;
                let z = path.standardized_residuals();
                let rows = path
                    .returns
                    .values()
                    .iter()
                    .zip(&path.sigma)
                    .zip(z.values())
                    .map(|((r, s), z)| format!("{},{},{}", num(*r), num(*s), num(*z)))
                    .collect();
                ("# columns: return,sigma,residual", rows)
            }
            _ => match spec.generate()? {
                Generated::Symbols(s) => (
                    "# columns: symbol",
                    s.symbols().iter().map(u16::to_string).collect(),
                ),
                Generated::Reals(r) => (
                    "# columns: value",
                    r.values().iter().map(|v| num(*v)).collect(),
                ),
            },
        };
        let prov = Provenance::new("generate", Some(spec.seed), &spec);
        write_csv(&self.out, &prov, header, &rows)?;
        if let Some(q) = spec.optimal_cr()? {
            println!(
                "n={} seed={} entropy_rate={} optimal_cr={}",
                spec.n, spec.seed, q.entropy_rate, q.optimal_cr
            );
        } else {
            println!("n={} seed={}", spec.n, spec.seed);
        }
        Ok(())
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TestCmd {
    #[command(flatten)]
    pub input: InputArgs,
    /// Block size k: tests joint independence of k consecutive observations.
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 8)]
    pub bits: u8,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Offset of the first block.
    #[arg(long, default_value_t = 0)]
    pub phase: usize,
    #[command(flatten)]
    pub calibration: CalibrationArgs,
    /// Full result including every per-repetition ratio.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

impl TestCmd {
    fn execute(mut self) -> Result<()> {
        let seed = resolve_seed(&mut self.seed);
        let table = load_table(&self.calibration)?;
        let sym = load_symbols(&self.input, self.bits)?;
        let params = TestParams {
            block_size: self.k,
            repetitions: self.reps,
            alpha: self.alpha,
            bits: self.bits,
            seed,
            phase: self.phase,
        };
        let r = independence_test_symbols(&sym, &params, &table)?;
        println!(
            "observed_cr={} q_alpha={} decision={} p_value={}",
            r.observed.corrected_cr,
            r.q_alpha,
            if r.rejects() {
                "reject"
            } else {
                "fail_to_reject"
            },
            r.p_value
        );
        if let Some(path) = &self.json {
            let prov = Provenance::new("test", Some(seed), &self);
            write_json(path, &prov, &r)?;
        }
        Ok(())
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SdfCmd {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,10,50,100,500")]
    pub block_sizes: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 8)]
    pub bits: u8,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub phase: usize,
    /// Gap tolerance for lag selection.
    #[arg(long, default_value_t = 0.01)]
    pub tolerance: f64,
    #[command(flatten)]
    pub calibration: CalibrationArgs,
    /// Rows: block_size,mean_cr,q00,q25,q75,q100,sdf_increment,gap.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Full curve with per-repetition ratios.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Serialize)]
struct SdfReport<'a> {
    curve: &'a entrate::SerialDependenceCurve,
    tolerance: f64,
    selected_lag: Option<usize>,
}

impl SdfCmd {
    fn execute(mut self) -> Result<()> {
        let seed = resolve_seed(&mut self.seed);
        if self.tolerance < 0.0 {
            return Err(Error::Precondition("tolerance must be non-negative".into()));
        }
        let table = load_table(&self.calibration)?;
        let sym = load_symbols(&self.input, self.bits)?;
        let curve = serial_dependence_curve_symbols(
            &sym,
            &self.block_sizes,
            self.reps,
            seed,
            self.phase,
            &table,
        )?;
        let selected_lag = select_lag(&curve, self.tolerance);
        let prov = Provenance::new("sdf", Some(seed), &self);
        let rows: Vec<String> = curve
            .rows()
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{},{},{}",
                    r.block_size,
                    num(r.mean_cr),
                    num(r.q00),
                    num(r.q25),
                    num(r.q75),
                    num(r.q100),
                    r.sdf_increment.map(num).unwrap_or_default(),
                    num(r.gap)
                )
            })
            .collect();
        for row in &rows {
            println!("{row}");
        }
        println!(
            "observed_cr={} selected_lag={}",
            curve.observed.corrected_cr,
            selected_lag.map_or("none".to_string(), |k| k.to_string())
        );
        if let Some(path) = &self.csv {
            write_csv(
                path,
                &prov,
                "block_size,mean_cr,q00,q25,q75,q100,sdf_increment,gap",
                &rows,
            )?;
        }
        if let Some(path) = &self.json {
            let report = SdfReport {
                curve: &curve,
                tolerance: self.tolerance,
                selected_lag,
            };
            write_json(path, &prov, &report)?;
        }
        Ok(())
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AcfCmd {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 50)]
    pub max_lag: usize,
    /// CSV with columns lag,acf.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl AcfCmd {
    fn execute(self) -> Result<()> {
        let s = load_series(&self.input)?;
        let r = autocorrelation(&s, self.max_lag)?;
        let rows: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(lag, c)| format!("{lag},{}", num(*c)))
            .collect();
        println!("band95={}", white_noise_band(s.len()));
        match &self.out {
            Some(path) => write_csv(path, &Provenance::new("acf", None, &self), "lag,acf", &rows),
            None => {
                rows.iter().for_each(|r| println!("{r}"));
                Ok(())
            }
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EntropyCmd {
    /// Pmf file (whitespace-separated probabilities): prints its entropy in bits.
    #[arg(long, conflicts_with_all = ["markov", "rate"])]
    pub pmf: Option<PathBuf>,
    /// Transition matrix file (one row per line): prints the entropy rate in bits/symbol.
    #[arg(long, conflicts_with = "rate")]
    pub markov: Option<PathBuf>,
    /// Entropy rate in bits/symbol to convert to an optimal compression ratio.
    #[arg(long, requires = "alphabet")]
    pub rate: Option<f64>,
    #[arg(long)]
    pub alphabet: Option<usize>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

impl EntropyCmd {
    fn execute(self) -> Result<()> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(Error::from);
        let value = if let Some(p) = &self.pmf {
            serde_json::json!({ "entropy_bits": entropy(&Pmf::parse(&read(p)?)?) })
        } else if let Some(p) = &self.markov {
            let m = MarkovModel::parse(&read(p)?)?;
            serde_json::json!({
                "entropy_rate_bits": markov_entropy_rate(&m),
                "stationary": m.stationary().probs(),
            })
        } else if let (Some(h), Some(n)) = (self.rate, self.alphabet) {
            serde_json::to_value(cr_from_entropy_rate(h, n)?)?
        } else {
            return Err(Error::InvalidInput(
                "one of --pmf, --markov or --rate/--alphabet is required".into(),
            ));
        };
        let headline = ["entropy_bits", "entropy_rate_bits", "optimal_cr"]
            .iter()
            .find_map(|k| value.get(*k))
            .cloned()
            .unwrap_or_default();
        println!("{headline}");
        if let Some(path) = &self.json {
            write_json(path, &Provenance::new("entropy", None, &self), &value)?;
        }
        Ok(())
    }
}

#[derive(Debug, Args, Serialize)]
pub struct PipelineCmd {
    /// JSON file: {"steps": [["generate", "--family", ...], ["test", ...], ...]}.
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Deserialize)]
struct PipelineFile {
    steps: Vec<Vec<String>>,
}

impl PipelineCmd {
    fn execute(self) -> Result<()> {
        let file: PipelineFile = serde_json::from_str(&std::fs::read_to_string(&self.config)?)?;
        // parse and validate every step before running any of them
        let mut commands = Vec::with_capacity(file.steps.len());
        let mut produced = HashSet::new();
        for (i, step) in file.steps.iter().enumerate() {
            let argv = std::iter::once("entrate".to_string()).chain(step.iter().cloned());
            let cli = crate::command()
                .try_get_matches_from(argv)
                .and_then(|m| Cli::from_arg_matches(&m))
                .map_err(|e| Error::InvalidInput(format!("pipeline step {}: {e}", i + 1)))?;
            if matches!(cli.command, Command::Pipeline(_)) {
                return Err(Error::InvalidInput("pipelines cannot nest".into()));
            }
            produced.extend(check_paths(&cli.command, &produced)?);
            commands.push(cli.command);
        }
        for cmd in commands {
            execute(cmd)?;
        }
        Ok(())
    }
}
