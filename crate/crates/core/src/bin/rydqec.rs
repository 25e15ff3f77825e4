use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rydqec::bench::{self, ExperimentConfig, ReportFormat};
use rydqec::dem_decode::{build_dem, count_failures, decode_batch, decompose_graphlike};
use rydqec::frame_sim::{sample_circuit, SampleBatch};
use rydqec::pulse::{self, GateKind, Parametrization, SynthConfig};
use rydqec::surface::{
    analyze_ordering, build_memory_circuit, noiseless_channels, BoundaryMode, ChannelSet, Circuit,
    CodeLayout, GateOrdering, MemoryBasis, MemorySpec, Pairing,
};
use rydqec::twirl::{
    validate_channel, ChannelCache, ExtractOptions, PauliChannelTable, PulseSet, ReadoutVariant,
    VariantId,
};

type Error = Box<dyn std::error::Error>;

#[derive(Parser)]
#[command(name = "rydqec", version, about = "Rydberg CZ2 pulses, leakage channels and surface-code memory runs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pulse synthesis.
    #[command(subcommand)]
    Pulse(PulseCmd),
    /// Pauli channel extraction.
    #[command(subcommand)]
    Twirl(TwirlCmd),
    /// Memory circuit construction.
    #[command(subcommand)]
    Surface(SurfaceCmd),
    /// Frame sampling.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Decode a sampled batch with matching.
    Decode(DecodeArgs),
    /// Memory experiments from a config file.
    #[command(subcommand)]
    Bench(BenchCmd),
}

#[derive(Subcommand)]
enum PulseCmd {
    /// Shortest pulse reaching the fidelity goal.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Cz2,
    Cz,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Phase,
    Detuning,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "cz2")]
    gate: Kind,
    #[arg(long, value_enum, default_value = "phase")]
    mode: Mode,
    /// Detuning bound in detuning mode.
    #[arg(long, default_value_t = 10.0)]
    cutoff: f64,
    #[arg(long, default_value_t = 500)]
    segments: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum TwirlCmd {
    /// Extract one variant's channel table.
    Extract(ExtractArgs),
}

#[derive(Args)]
struct ExtractArgs {
    /// CZ2 pulse file.
    #[arg(long)]
    pulse: PathBuf,
    /// CZ pulse file, for variants that play a CZ.
    #[arg(long)]
    cz_pulse: Option<PathBuf>,
    #[arg(long)]
    variant: VariantId,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    out: PathBuf,
    /// Reuse tables stored here.
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SurfaceCmd {
    /// Build a memory circuit.
    Build(BuildArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Boundary {
    Global,
    Local,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Cz2,
    #[value(name = "4cz")]
    FourCz,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairingArg {
    Ft,
    Nonft,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long = "d", default_value_t = 3)]
    distance: usize,
    #[arg(long, value_enum, default_value = "cz2")]
    scheme: SchemeArg,
    /// Pairing of the CZ2 scheme.
    #[arg(long, value_enum, default_value = "ft")]
    ordering: PairingArg,
    #[arg(long, default_value = "z")]
    basis: MemoryBasis,
    /// Defaults to the distance.
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long, value_enum, default_value = "local")]
    boundary: Boundary,
    /// Directory holding one `<variant>.json` table per needed variant.
    #[arg(long, required_unless_present = "noiseless")]
    channels: Option<PathBuf>,
    /// Use identity channels everywhere.
    #[arg(long, conflicts_with = "channels")]
    noiseless: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum SimCmd {
    /// Sample detector and observable flips.
    Sample(SampleArgs),
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long)]
    batch: PathBuf,
    /// Predicted observable masks, one line per shot.
    #[arg(long)]
    out: PathBuf,
    /// Also write the detector error model here.
    #[arg(long)]
    dem: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BenchCmd {
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
}

fn synth(a: SynthArgs) -> Result<(), Error> {
    let kind = match a.gate {
        Kind::Cz2 => GateKind::Cz2,
        Kind::Cz => GateKind::Cz,
    };
    let param = match a.mode {
        Mode::Detuning => Parametrization::DetuningCutoff { cutoff: a.cutoff },
        Mode::Phase => Parametrization::Phase,
    };
    let mut cfg = SynthConfig::new(kind, param);
    cfg.segments = a.segments;
    cfg.seed = a.seed;
    cfg.restarts = a.restarts;
    let out = pulse::synthesize_time_optimal(&cfg)?;
    let p = &out.pulse;
    println!("T Omega_max = {:.4}", p.waveform.total_duration);
    println!("1 - F       = {:.3e}", p.infidelity);
    println!("T_R measurement = {:.3}, data (sum) = {:.3}", p.rydberg_time_m, p.rydberg_time_d);
    pulse::io::save(p, &a.out)?;
    Ok(())
}

fn extract(a: ExtractArgs) -> Result<(), Error> {
    let pulses = PulseSet {
        cz2: pulse::io::load(&a.pulse)?,
        cz: a.cz_pulse.as_ref().map(pulse::io::load).transpose()?,
    };
    let v = ReadoutVariant::build(a.variant, &pulses)?;
    let opts = ExtractOptions::default();
    let table = match &a.cache {
        Some(dir) => ChannelCache::new(dir)?.get_or_extract(&v, a.gamma, &opts)?,
        None => rydqec::twirl::extract_pauli_channel(&v, a.gamma, &opts)?,
    };
    print!("{}", validate_channel(&table, 8));
    table.save(&a.out)?;
    Ok(())
}

fn build(a: BuildArgs) -> Result<(), Error> {
    let layout = CodeLayout::new(a.distance)?;
    let ordering = match (a.scheme, a.ordering) {
        (SchemeArg::FourCz, _) => GateOrdering::four_cz(),
        (SchemeArg::Cz2, PairingArg::Ft) => GateOrdering::two_cz2(Pairing::Ft),
        (SchemeArg::Cz2, PairingArg::Nonft) => GateOrdering::two_cz2(Pairing::NonFt),
    };
    let spec = MemorySpec {
        ordering,
        basis: a.basis,
        rounds: a.rounds.unwrap_or(a.distance),
        boundary: match a.boundary {
            Boundary::Global => BoundaryMode::GlobalPulse,
            Boundary::Local => BoundaryMode::LocalTimeOptimal,
        },
    };
    let channels = match &a.channels {
        Some(dir) if !a.noiseless => {
            let mut set = ChannelSet::new();
            for s in &layout.stabilizers {
                let v = spec.ordering.variant(s, spec.boundary);
                if !set.contains_key(&v) {
                    set.insert(v, PauliChannelTable::load(dir.join(format!("{v}.json")))?);
                }
            }
            set
        }
        _ => noiseless_channels(),
    };
    let report = analyze_ordering(&layout, &spec.ordering);
    println!(
        "{}: fault tolerant = {} ({} single faults checked, {} aligned)",
        spec.ordering.label(),
        report.fault_tolerant,
        report.faults.len(),
        report.offending.len()
    );
    let c = build_memory_circuit(&layout, &spec, &channels)?;
    println!(
        "{} qubits, {} measurements, {} detectors",
        c.num_qubits,
        c.num_measurements(),
        c.num_detectors()
    );
    c.save(&a.out)?;
    Ok(())
}

fn sample(a: SampleArgs) -> Result<(), Error> {
    let c = Circuit::load(&a.circuit)?;
    let batch = sample_circuit(&c, a.shots, a.seed)?;
    let flips = (0..batch.shots).filter(|&s| batch.observables(s) != 0).count();
    println!("{} shots, {} with raw observable flips", batch.shots, flips);
    batch.save(&a.out)?;
    Ok(())
}

fn decode(a: DecodeArgs) -> Result<(), Error> {
    let c = Circuit::load(&a.circuit)?;
    let batch = SampleBatch::load(&a.batch)?;
    let dem = build_dem(&c)?;
    if let Some(p) = &a.dem {
        dem.save(p)?;
    }
    let graph = decompose_graphlike(&dem)?;
    let pred = decode_batch(&graph, &batch)?;
    let failures = count_failures(&batch, &pred);
    let mut text = String::with_capacity(pred.len() * 2);
    for p in &pred {
        text.push_str(&p.to_string());
        text.push('\n');
    }
    std::fs::write(&a.out, text)?;
    println!(
        "{failures}/{} logical failures ({} undecomposable hyperedges)",
        batch.shots,
        graph.undecomposable().count()
    );
    Ok(())
}

fn bench_run(a: RunArgs) -> ExitCode {
    let cfg = match ExperimentConfig::load(&a.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let report = match bench::run_bench(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    for f in &report.fits {
        println!(
            "{} {:?} D={} {}: nu = {:.2} +- {:.2}",
            f.ordering, f.boundary, f.distance, f.basis, f.fit.nu, f.fit.sigma_nu
        );
    }
    println!("{}", report.round_time);
    let outputs = [
        (cfg.output.csv.as_ref(), ReportFormat::Csv),
        (cfg.output.json.as_ref(), ReportFormat::Json),
    ];
    for (path, format) in outputs {
        if let Some(path) = path {
            if let Err(e) = bench::emit_report(&report, format, path) {
                eprintln!("error: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
        }
    }
    if report.low_confidence() {
        for f in &report.fit_failures {
            eprintln!("low confidence: {f}");
        }
        return ExitCode::from(bench::EXIT_LOW_CONFIDENCE as u8);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Pulse(PulseCmd::Synth(a)) => synth(a),
        Cmd::Twirl(TwirlCmd::Extract(a)) => extract(a),
        Cmd::Surface(SurfaceCmd::Build(a)) => build(a),
        Cmd::Sim(SimCmd::Sample(a)) => sample(a),
        Cmd::Decode(a) => decode(a),
        Cmd::Bench(BenchCmd::Run(a)) => return bench_run(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
