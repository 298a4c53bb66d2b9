//! `mfk`: generate dusts, estimate and classify multifractal spectra.
//!
//! Exit codes: 0 success, 1 I/O or parse error, 2 bad spec or arguments,
//! 3 sizing refusal.

mod output;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mfk_core::io::{parse_dust, parse_events, parse_spectrum_csv, write_dust, write_spectrum_csv};
use mfk_core::{
    auto_size, classify, compare_sweep, default_bins, estimate, features, gen_farey,
    gen_selfsimilar, gen_superposed, gen_uniform, normalize_signal, sweep_boxes, CantorDust,
    ClassifyConfig, Placement, SelfSimilarSpec, SizingPolicy, SizingStatus, SpectrumFeatures,
    SuperposedSpec, UniformMode,
};
use serde::Serialize;

use output::{emit, read_text, write_atomic};

#[derive(Parser)]
#[command(
    name = "mfk",
    version,
    about = "Multifractal spectra of point sets on [0, 1]"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dust file.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
        /// Output file; stdout when omitted.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Estimate the spectrum of a dust (or event) file as CSV.
    Analyze {
        input: PathBuf,
        #[command(flatten)]
        sizing: SizingArgs,
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a spectrum CSV; writes a JSON report.
    Classify {
        input: PathBuf,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate at several box counts and compare the spectra.
    Sweep {
        input: PathBuf,
        /// Comma-separated box counts.
        #[arg(long, value_delimiter = ',', required = true)]
        boxes: Vec<usize>,
        /// Bins shared by every entry; defaults to the rule for the smallest B.
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        source: SourceArgs,
        /// Output directory for the per-B CSVs and sweep.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Plot spectrum CSVs as SVG.
    Plot {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Alpha gap that separates fragments; per-spectrum default when omitted.
        #[arg(long)]
        gap_threshold: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SizingArgs {
    /// Number of boxes B.
    #[arg(long, conflicts_with = "auto_size")]
    boxes: Option<usize>,
    /// Number of alpha bins A.
    #[arg(long, conflicts_with = "auto_size")]
    bins: Option<usize>,
    /// Pick B and A from the sample size (the default without --boxes).
    #[arg(long)]
    auto_size: bool,
    /// Estimate even when the sizing rule is violated.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct SourceArgs {
    /// Input holds event times, normalized onto [0, 1] before estimation.
    #[arg(long)]
    events: bool,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long)]
    gap_threshold: Option<f64>,
    /// Max residual of a straight segment.
    #[arg(long)]
    segment_tol: Option<f64>,
    #[arg(long)]
    min_run: Option<usize>,
    /// Slack allowed on monotone sides of a cap.
    #[arg(long)]
    cap_tol: Option<f64>,
}

#[derive(Subcommand)]
enum GenerateKind {
    /// All reduced fractions p/q in [0, 1] with q <= Q.
    Farey {
        #[arg(long = "Q")]
        q: u64,
    },
    Uniform {
        #[arg(long = "S")]
        sample_size: usize,
        #[arg(long, value_enum, default_value = "equispaced")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Two-branch self-similar cascade.
    Selfsimilar {
        /// JSON spec file; replaces the parameter flags.
        #[arg(long, conflicts_with_all = ["p", "r", "p2", "r2", "depth", "sample_size", "seed"])]
        spec: Option<PathBuf>,
        #[arg(long, required_unless_present = "spec")]
        p: Option<f64>,
        #[arg(long, required_unless_present = "spec")]
        r: Option<f64>,
        /// Second branch weight; 1 - p when omitted.
        #[arg(long)]
        p2: Option<f64>,
        /// Second branch ratio; r when omitted.
        #[arg(long)]
        r2: Option<f64>,
        #[arg(long, required_unless_present = "spec")]
        depth: Option<u32>,
        #[arg(long = "S", required_unless_present = "spec")]
        sample_size: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Mixture of two cascades given as JSON spec files.
    Superposed {
        #[arg(long)]
        spec_a: PathBuf,
        #[arg(long)]
        spec_b: PathBuf,
        /// Fraction of samples drawn from the first cascade.
        #[arg(long, default_value_t = 0.5)]
        mix: f64,
        #[arg(long = "S")]
        sample_size: usize,
        /// Place the components on disjoint halves of the segment.
        #[arg(long)]
        disjoint: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Equispaced,
    Random,
}

/// Bad arguments detected after parsing; exits with code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use mfk_core::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::SizingViolation(_) => 3,
                E::Spec(_)
                | E::DepthTooLarge { .. }
                | E::GridTooCoarse(_)
                | E::BadBoxCount(_)
                | E::BadBinCount(_)
                | E::TooFewSamples(_) => 2,
                _ => 1,
            };
        }
        if cause.is::<UsageError>() || cause.is::<serde_json::Error>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            output::error(&format!("{err:#}"));
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate { kind, out } => cmd_generate(kind, out.as_deref()),
        Command::Analyze {
            input,
            sizing,
            source,
            out,
        } => cmd_analyze(&input, &sizing, &source, out.as_deref()),
        Command::Classify {
            input,
            thresholds,
            out,
        } => cmd_classify(&input, &thresholds, out.as_deref()),
        Command::Sweep {
            input,
            boxes,
            bins,
            force,
            source,
            out,
        } => cmd_sweep(&input, boxes, bins, force, &source, &out),
        Command::Plot {
            inputs,
            gap_threshold,
            out,
        } => cmd_plot(&inputs, gap_threshold, &out),
    }
}

fn spec_line(spec: &SelfSimilarSpec) -> String {
    format!(
        "p={},{} r={},{} depth={} S={} seed={}",
        spec.probabilities[0],
        spec.probabilities[1],
        spec.ratios[0],
        spec.ratios[1],
        spec.depth,
        spec.sample_size,
        spec.seed
    )
}

fn read_spec(path: &Path) -> Result<SelfSimilarSpec> {
    let text = read_text(path)?;
    serde_json::from_str(&text)
        .with_context(|| format!("invalid cascade spec in {}", path.display()))
}

fn cmd_generate(kind: GenerateKind, out: Option<&Path>) -> Result<()> {
    let (dust, header) = match kind {
        GenerateKind::Farey { q } => (gen_farey(q)?, vec![format!("kind=farey Q={q}")]),
        GenerateKind::Uniform {
            sample_size,
            mode,
            seed,
        } => {
            let (mode, name) = match mode {
                ModeArg::Equispaced => (UniformMode::Equispaced, "equispaced"),
                ModeArg::Random => (UniformMode::Random, "random"),
            };
            let mut header = format!("kind=uniform mode={name} S={sample_size}");
            if matches!(mode, UniformMode::Random) {
                header += &format!(" seed={seed}");
            }
            (gen_uniform(sample_size, mode, seed)?, vec![header])
        }
        GenerateKind::Selfsimilar {
            spec,
            p,
            r,
            p2,
            r2,
            depth,
            sample_size,
            seed,
        } => {
            let spec = match spec {
                Some(path) => read_spec(&path)?,
                None => {
                    let (p, r) = (p.unwrap_or_default(), r.unwrap_or_default());
                    SelfSimilarSpec {
                        probabilities: [p, p2.unwrap_or(1.0 - p)],
                        ratios: [r, r2.unwrap_or(r)],
                        depth: depth.unwrap_or_default(),
                        sample_size: sample_size.unwrap_or_default(),
                        seed: seed.unwrap_or_default(),
                    }
                }
            };
            let header = vec![format!("kind=selfsimilar {}", spec_line(&spec))];
            (gen_selfsimilar(&spec)?, header)
        }
        GenerateKind::Superposed {
            spec_a,
            spec_b,
            mix,
            sample_size,
            disjoint,
        } => {
            let spec = SuperposedSpec {
                a: read_spec(&spec_a)?,
                b: read_spec(&spec_b)?,
                mix,
                sample_size,
                placement: if disjoint {
                    Placement::Disjoint
                } else {
                    Placement::Overlapping
                },
            };
            let placement = if disjoint { "disjoint" } else { "overlapping" };
            let header = vec![
                format!("kind=superposed mix={mix} S={sample_size} placement={placement}"),
                format!("a: {}", spec_line(&spec.a)),
                format!("b: {}", spec_line(&spec.b)),
            ];
            (gen_superposed(&spec)?, header)
        }
    };
    emit(out, &write_dust(&dust, &header))
}

fn load_dust(path: &Path, source: &SourceArgs) -> Result<CantorDust> {
    let text = read_text(path)?;
    let dust = if source.events {
        normalize_signal(&parse_events(&text)?)
    } else {
        parse_dust(&text)
    };
    dust.with_context(|| format!("cannot load {}", path.display()))
}

fn policy(force: bool) -> SizingPolicy {
    if force {
        SizingPolicy::Override
    } else {
        SizingPolicy::Enforce
    }
}

fn cmd_analyze(
    input: &Path,
    sizing: &SizingArgs,
    source: &SourceArgs,
    out: Option<&Path>,
) -> Result<()> {
    let dust = load_dust(input, source)?;
    let (boxes, bins) = match (sizing.boxes, sizing.bins) {
        (Some(b), Some(a)) => (b, a),
        (Some(b), None) => (b, default_bins(b)),
        (None, Some(_)) => return Err(usage("--bins requires --boxes")),
        (None, None) => auto_size(dust.sample_size())?,
    };
    let spectrum = estimate(&dust, boxes, bins, policy(sizing.force))?;
    if let Some(p) = spectrum.params() {
        match p.sizing.status {
            SizingStatus::Ok => {}
            SizingStatus::Warning => output::warn(&format!(
                "sizing Warning for S={} B={boxes} A={bins}: {}",
                p.sample_size,
                p.sizing.messages.join("; ")
            )),
            SizingStatus::Violation => output::warn(&format!(
                "sizing Violation overridden by --force for S={} B={boxes} A={bins}: {}",
                p.sample_size,
                p.sizing.messages.join("; ")
            )),
        }
    }
    emit(out, &write_spectrum_csv(&spectrum))
}

fn classify_config(args: &ThresholdArgs) -> Result<ClassifyConfig> {
    let mut config = ClassifyConfig::default();
    if let Some(tol) = args.segment_tol {
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(usage(format!(
                "--segment-tol must be a finite non-negative number, got {tol}"
            )));
        }
        config.residual_tol = tol;
    }
    if let Some(tol) = args.cap_tol {
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(usage(format!(
                "--cap-tol must be a finite non-negative number, got {tol}"
            )));
        }
        config.cap_tol = tol;
    }
    if let Some(gap) = args.gap_threshold {
        if gap.is_nan() || gap <= 0.0 {
            return Err(usage(format!(
                "--gap-threshold must be positive, got {gap}"
            )));
        }
        config.gap_threshold = Some(gap);
    }
    config.min_run = args.min_run;
    Ok(config)
}

fn cmd_classify(input: &Path, thresholds: &ThresholdArgs, out: Option<&Path>) -> Result<()> {
    let config = classify_config(thresholds)?;
    let spectrum = parse_spectrum_csv(&read_text(input)?)
        .with_context(|| format!("cannot load spectrum {}", input.display()))?;
    let report = classify(&spectrum, &config);
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    emit(out, &json)
}

#[derive(Serialize)]
struct SweepEntry {
    boxes: usize,
    bins: usize,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sizing: Option<SizingStatus>,
    #[serde(skip_serializing_if = "Option::is_none")]
    features: Option<SpectrumFeatures>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepReport {
    input: String,
    sample_size: usize,
    entries: Vec<SweepEntry>,
    /// Trend over the successful entries, or the string "NeedsSweep".
    trends: serde_json::Value,
}

fn cmd_sweep(
    input: &Path,
    mut boxes: Vec<usize>,
    bins: Option<usize>,
    force: bool,
    source: &SourceArgs,
    out: &Path,
) -> Result<()> {
    boxes.sort_unstable();
    boxes.dedup();
    let bins = bins.unwrap_or_else(|| default_bins(boxes[0]));
    let dust = load_dust(input, source)?;
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;

    let results = sweep_boxes(&dust, &boxes, bins, policy(force));
    let mut entries = Vec::with_capacity(boxes.len());
    let mut succeeded = Vec::new();
    let mut first_error = None;
    for (&b, result) in boxes.iter().zip(results) {
        match result {
            Ok(spectrum) => {
                let name = format!("spectrum_B{b}.csv");
                write_atomic(&out.join(&name), write_spectrum_csv(&spectrum).as_bytes())?;
                let feat = features(&spectrum);
                succeeded.push(feat);
                entries.push(SweepEntry {
                    boxes: b,
                    bins,
                    status: "ok",
                    file: Some(name),
                    sizing: spectrum.params().map(|p| p.sizing.status),
                    features: Some(feat),
                    error: None,
                });
            }
            Err(e) => {
                output::warn(&format!("B={b} failed: {e}"));
                entries.push(SweepEntry {
                    boxes: b,
                    bins,
                    status: "failed",
                    file: None,
                    sizing: None,
                    features: None,
                    error: Some(e.to_string()),
                });
                first_error.get_or_insert(e);
            }
        }
    }
    let trends = match compare_sweep(&succeeded) {
        Ok(trend) => serde_json::to_value(trend)?,
        Err(_) => serde_json::Value::String("NeedsSweep".into()),
    };
    let report = SweepReport {
        input: input.display().to_string(),
        sample_size: dust.sample_size(),
        entries,
        trends,
    };
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    write_atomic(&out.join("sweep.json"), json.as_bytes())?;
    match first_error {
        Some(e) if succeeded.is_empty() => Err(e).context("every sweep entry failed"),
        _ => Ok(()),
    }
}

fn cmd_plot(inputs: &[PathBuf], gap_threshold: Option<f64>, out: &Path) -> Result<()> {
    if let Some(gap) = gap_threshold {
        if gap.is_nan() || gap <= 0.0 {
            return Err(usage(format!(
                "--gap-threshold must be positive, got {gap}"
            )));
        }
    }
    let mut series = Vec::with_capacity(inputs.len());
    for path in inputs {
        let spectrum = parse_spectrum_csv(&read_text(path)?)
            .with_context(|| format!("cannot load spectrum {}", path.display()))?;
        let label = match spectrum.params() {
            Some(p) => format!("B={}", p.boxes),
            None => path.file_stem().map_or_else(
                || path.display().to_string(),
                |s| s.to_string_lossy().into_owned(),
            ),
        };
        series.push(plot::Series { label, spectrum });
    }
    write_atomic(out, plot::render(&series, gap_threshold).as_bytes())
}
