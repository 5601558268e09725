//! `dcerad`: phantom generation, feature extraction and cross-validated
//! classification of DCE-MRI lesions.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use dce_radiomics::evaluation::{cross_validate, EvalReport};
use dce_radiomics::io::{load_manifest, read_feature_table, write_feature_table, write_json};
use dce_radiomics::phantom::{generate_corpus, PhantomSpec, MANIFEST_NAME};
use dce_radiomics::pipeline::extract_manifest;
use dce_radiomics::{FeatureMatrix, FeatureSet};

use config::{ConfigOverrides, RunConfig};

#[derive(Parser)]
#[command(name = "dcerad", version, about = "DCE-MRI kinetic and radiomic lesion classification")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic corpus (raw volumes + manifest.tsv).
    Phantom(PhantomArgs),
    /// Extract the feature table for every lesion of a manifest.
    Extract(ExtractArgs),
    /// Cross-validate LASSO selection + LDA on a feature table.
    Crossval(CrossvalArgs),
    /// Extract, then cross-validate all three feature sets.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct PhantomArgs {
    #[arg(long)]
    cases: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Fraction of malignant cases.
    #[arg(long, default_value_t = 0.5)]
    balance: f64,
    #[arg(long)]
    noise_std: Option<f64>,
    #[arg(long)]
    heterogeneity: Option<f64>,
}

#[derive(Args)]
struct ConfigArgs {
    /// `key = value` run configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    bin_count: Option<usize>,
    /// Comma-separated LoG scales in mm.
    #[arg(long, value_delimiter = ',')]
    log_sigmas: Option<Vec<f64>>,
    #[arg(long)]
    ftv_threshold: Option<f64>,
    #[arg(long)]
    lasso_grid_size: Option<usize>,
    #[arg(long)]
    lasso_cv_folds: Option<usize>,
    #[arg(long)]
    lda_ridge: Option<f64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_feature_set)]
    feature_set: Option<FeatureSet>,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct CrossvalArgs {
    #[arg(long)]
    features: PathBuf,
    /// Report path; the ROC table is written next to it as `<stem>_roc.csv`.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

fn parse_feature_set(s: &str) -> Result<FeatureSet, String> {
    FeatureSet::parse(s).ok_or_else(|| format!("expected dynamic, radiomic or combined, got {s:?}"))
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<dce_radiomics::Error> for Failure {
    fn from(e: dce_radiomics::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type CmdResult = Result<(), Failure>;

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig, Failure> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply(&ConfigOverrides::load(path).map_err(Failure::Usage)?);
        }
        cfg.apply(&ConfigOverrides {
            bin_count: self.bin_count,
            log_sigmas_mm: self.log_sigmas.clone(),
            ftv_threshold_pct: self.ftv_threshold,
            lasso_grid_size: self.lasso_grid_size,
            lasso_cv_folds: self.lasso_cv_folds,
            lda_ridge: self.lda_ridge,
            cv_folds: self.folds,
            seed: self.seed,
            feature_set: self.feature_set,
        });
        cfg.validate().map_err(Failure::Usage)?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Phantom(a) => cmd_phantom(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Crossval(a) => cmd_crossval(a),
        Command::Pipeline(a) => cmd_pipeline(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn cmd_phantom(a: &PhantomArgs) -> CmdResult {
    if !(0.0..=1.0).contains(&a.balance) {
        return Err(Failure::Usage(format!("--balance must lie in [0, 1], got {}", a.balance)));
    }
    let mut spec = PhantomSpec {
        seed: a.seed,
        ..PhantomSpec::default()
    };
    if let Some(n) = a.noise_std {
        spec.noise_std = n;
    }
    if let Some(h) = a.heterogeneity {
        spec.heterogeneity = h;
    }
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let records = generate_corpus(&spec, a.cases, a.balance, &a.out)?;
    eprintln!("wrote {} lesions to {}", records.len(), a.out.join(MANIFEST_NAME).display());
    Ok(())
}

fn extract(manifest: &Path, cfg: &RunConfig) -> anyhow::Result<FeatureMatrix> {
    let records = load_manifest(manifest)?;
    let total = records.len();
    let done = AtomicUsize::new(0);
    let m = extract_manifest(&records, &cfg.extraction(), |r| {
        let k = done.fetch_add(1, Ordering::Relaxed) + 1;
        eprintln!("[{k}/{total}] extracted {}/{}", r.patient_id, r.lesion_id);
    })?;
    Ok(m)
}

fn cmd_extract(a: &ExtractArgs) -> CmdResult {
    let cfg = a.config.resolve()?;
    let m = extract(&a.manifest, &cfg)?;
    write_feature_table(&a.out, &m)?;
    eprintln!("wrote {} × {} table to {}", m.n_rows(), m.n_cols(), a.out.display());
    Ok(())
}

fn roc_csv(report: &EvalReport) -> String {
    let mut out = String::from("threshold,fpr,tpr\n");
    for p in &report.roc {
        let t = p.threshold.map_or_else(|| "inf".to_string(), |t| t.to_string());
        let _ = writeln!(out, "{t},{},{}", p.fpr, p.tpr);
    }
    out
}

fn run_crossval(m: &FeatureMatrix, cfg: &RunConfig, set: FeatureSet, report: &Path, roc: &Path) -> anyhow::Result<EvalReport> {
    let mut r = cross_validate(m, &cfg.crossval(set)).with_context(|| format!("cross-validating {set} features"))?;
    r.run_config = serde_json::to_value(cfg)?;
    write_json(report, &r)?;
    std::fs::write(roc, roc_csv(&r)).with_context(|| roc.display().to_string())?;
    Ok(r)
}

fn headline(r: &EvalReport) -> String {
    let v = &r.pooled.values;
    format!(
        "accuracy {:.4}  recall {:.4}  precision {:.4}  f1 {:.4}  auc {:.4}",
        v.accuracy, v.recall, v.precision, v.f1, v.auc
    )
}

fn cmd_crossval(a: &CrossvalArgs) -> CmdResult {
    let cfg = a.config.resolve()?;
    let m = read_feature_table(&a.features, None)?;
    let stem = a.out.file_stem().map_or_else(|| "report".into(), |s| s.to_string_lossy().into_owned());
    let roc = a.out.with_file_name(format!("{stem}_roc.csv"));
    let r = run_crossval(&m, &cfg, cfg.feature_set, &a.out, &roc)?;
    println!("{}: {}", cfg.feature_set, headline(&r));
    Ok(())
}

fn cmd_pipeline(a: &PipelineArgs) -> CmdResult {
    let cfg = a.config.resolve()?;
    std::fs::create_dir_all(&a.out).with_context(|| a.out.display().to_string())?;
    let m = extract(&a.manifest, &cfg)?;
    if m.n_rows() == 0 {
        return Err(Failure::Runtime(anyhow::anyhow!("{}: manifest lists no lesions", a.manifest.display())));
    }
    write_feature_table(a.out.join("features.csv"), &m)?;
    let mut summary = String::from("feature_set,accuracy,recall,precision,f1,auc\n");
    println!("{:<10} {:>9} {:>9} {:>9} {:>9} {:>9}", "features", "accuracy", "recall", "precision", "f1", "auc");
    for set in FeatureSet::ALL {
        let r = run_crossval(
            &m,
            &cfg,
            set,
            &a.out.join(format!("report_{set}.json")),
            &a.out.join(format!("roc_{set}.csv")),
        )?;
        let v = &r.pooled.values;
        println!(
            "{:<10} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            set.as_str(),
            v.accuracy,
            v.recall,
            v.precision,
            v.f1,
            v.auc
        );
        let _ = writeln!(summary, "{set},{},{},{},{},{}", v.accuracy, v.recall, v.precision, v.f1, v.auc);
    }
    let path = a.out.join("summary.csv");
    std::fs::write(&path, summary).with_context(|| path.display().to_string())?;
    Ok(())
}
