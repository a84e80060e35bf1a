use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use scribtext_cli::commands::{self, SynthOptions};
use scribtext_cli::{service, ProjectLayout};
use scribtext_core::pipeline::PipelineConfig;
use scribtext_core::reconstruction::ReconstructionConfig;
use scribtext_core::synth::{NoiseConfig, SceneConfig};
use scribtext_core::weak_supervision::ClassMode;

#[derive(Parser)]
#[command(name = "scribtext", version, about = "Scribble-line annotation tools for scene text")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ProjectArgs {
    /// Project root directory.
    project: PathBuf,
    /// Use the annotation set of this annotator.
    #[arg(long)]
    annotator: Option<String>,
}

impl ProjectArgs {
    fn layout(&self) -> Result<ProjectLayout> {
        ProjectLayout::new(&self.project, self.annotator.clone())
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Transcripts {
    Bf,
    All,
    AllBf,
}

#[derive(Args)]
struct PipelineArgs {
    /// Minimum score for a detection to become a pseudo label.
    #[arg(long, default_value_t = 0.9, value_parser = unit_interval)]
    t_pseudo: f64,
    /// Minimum overlap ratio for a character to join a text line.
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    t_infer: f64,
    /// Text-line map binarization threshold.
    #[arg(long, default_value_t = 0.2, value_parser = unit_interval)]
    bin_threshold: f64,
    /// Multiplier on the boundary expansion distance.
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    expansion_factor: f64,
    /// IoU needed to match a detection to ground truth.
    #[arg(long, default_value_t = 0.5, value_parser = open_unit_interval)]
    match_iou: f64,
    /// Attach left-to-right transcripts read under this class taxonomy.
    #[arg(long, value_enum)]
    transcripts: Option<Transcripts>,
}

#[derive(Subcommand)]
enum Command {
    /// Check every annotation file against the labeling rules.
    Validate(ProjectArgs),
    /// Pseudo labels, reconstruction and evaluation over a project.
    Pipeline {
        #[command(flatten)]
        project: ProjectArgs,
        #[command(flatten)]
        config: PipelineArgs,
    },
    /// Write a displaced copy of the annotations to annotations-perturbed/.
    Perturb {
        #[command(flatten)]
        project: ProjectArgs,
        /// Maximum displacement as a fraction of instance height.
        #[arg(long, value_parser = non_negative)]
        offset: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Annotation cost: points and labeling time per instance.
    Cost(ProjectArgs),
    /// Generate a synthetic project.
    Synth {
        /// Output project root.
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        images: usize,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
        instances: u64,
        /// Probability of missing each character.
        #[arg(long, default_value_t = 0.0, value_parser = unit_interval)]
        drop: f64,
        /// Corner jitter as a fraction of box size.
        #[arg(long, default_value_t = 0.0, value_parser = non_negative)]
        jitter: f64,
        /// Expected spurious boxes per image.
        #[arg(long, default_value_t = 0.0, value_parser = non_negative)]
        spurious: f64,
        /// Detection scores are drawn from [score-floor, 1].
        #[arg(long, default_value_t = 1.0, value_parser = unit_interval)]
        score_floor: f64,
        /// Box-blur radius for the text-line map.
        #[arg(long, default_value_t = 0)]
        blur: usize,
    },
    /// Score a results directory against ground truth.
    Eval {
        results: PathBuf,
        gts: PathBuf,
        #[arg(long, default_value_t = 0.5, value_parser = open_unit_interval)]
        match_iou: f64,
    },
    /// Run the annotation HTTP service.
    Serve {
        #[command(flatten)]
        project: ProjectArgs,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|e| e.to_string())
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    (0.0..=1.0)
        .contains(&v)
        .then_some(v)
        .ok_or_else(|| format!("{v} is outside [0, 1]"))
}

fn open_unit_interval(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    (v > 0.0 && v < 1.0)
        .then_some(v)
        .ok_or_else(|| format!("{v} is outside (0, 1)"))
}

fn positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    (v > 0.0 && v.is_finite())
        .then_some(v)
        .ok_or_else(|| format!("{v} must be positive"))
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    (v >= 0.0 && v.is_finite())
        .then_some(v)
        .ok_or_else(|| format!("{v} must be non-negative"))
}

impl From<&PipelineArgs> for PipelineConfig {
    fn from(a: &PipelineArgs) -> Self {
        PipelineConfig {
            t_pseudo: a.t_pseudo,
            match_iou: a.match_iou,
            reconstruction: ReconstructionConfig {
                t_infer: a.t_infer,
                bin_threshold: a.bin_threshold,
                expansion_factor: a.expansion_factor,
                transcript_mode: a.transcripts.map(|t| match t {
                    Transcripts::Bf => ClassMode::Bf,
                    Transcripts::All => ClassMode::All,
                    Transcripts::AllBf => ClassMode::AllBf,
                }),
            },
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate(project) => {
            let out = commands::validate_project(&project.layout()?)?;
            for line in out.errors.iter().chain(&out.violations) {
                println!("{line}");
            }
            println!(
                "{} file(s), {} violation(s), {} unreadable",
                out.files,
                out.violations.len(),
                out.errors.len()
            );
            Ok(if out.is_clean() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Pipeline { project, config } => {
            let out = commands::run_pipeline(&project.layout()?, &PipelineConfig::from(&config))?;
            for (id, err) in &out.errors {
                eprintln!("{id}: {err}");
            }
            println!("{}", serde_json::to_string_pretty(&out.report)?);
            let all_failed = out.images > 0 && out.errors.len() == out.images;
            Ok(if all_failed {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Perturb { project, offset, seed } => {
            let layout = project.layout()?;
            let n = commands::perturb_project(&layout, offset, seed)?;
            println!("wrote {n} annotation(s) to {}", layout.perturbed_dir().display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Cost(project) => {
            let report = commands::cost_project(&project.layout()?)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth {
            out,
            seed,
            images,
            instances,
            drop,
            jitter,
            spurious,
            score_floor,
            blur,
        } => {
            let opts = SynthOptions {
                seed,
                images,
                scene: SceneConfig {
                    n_instances: instances as usize,
                    ..SceneConfig::default()
                },
                noise: NoiseConfig {
                    drop_prob: drop,
                    jitter_frac: jitter,
                    spurious_per_image: spurious,
                    score_floor,
                    map_blur_radius: blur,
                    seed,
                },
            };
            commands::synth_project(&out, &opts)?;
            println!("wrote {images} synthetic image(s) to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval {
            results,
            gts,
            match_iou,
        } => {
            let report = commands::eval_dirs(&results, &gts, match_iou)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve { project, port, host } => {
            let layout = project.layout()?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(service::serve(layout, &host, port))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
