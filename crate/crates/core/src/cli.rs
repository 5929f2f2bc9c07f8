//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on runtime errors, 2 on usage errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::entropy::{entropy, nu, nu_hat};
use crate::error::RingError;
use crate::imageio::{self, ImageFormat, ImageIoError};
use crate::meanshift::{
    mean_shift_filter_pass, segment, CriterionConfig, CriterionKind, MeanShiftParams,
    SegmentationResult,
};
use crate::ring::RingImage;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] ImageIoError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Parser)]
#[command(
    name = "ringshift",
    version,
    about = "Mean-shift gray-level segmentation with entropy-based stopping rules"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the gray-level entropy of an image in bits.
    Entropy {
        image: PathBuf,
        #[command(flatten)]
        modulus: ModulusArg,
    },
    /// Print the distance between two images.
    Distance {
        a: PathBuf,
        b: PathBuf,
        /// nu: |E(A) - E(B)|; nu-hat: E(A + (-B)) in Z_n.
        #[arg(long, value_enum, default_value_t = DistanceKind::NuHat)]
        kind: DistanceKind,
        #[command(flatten)]
        modulus: ModulusArg,
    },
    /// Run a single mean-shift filtering pass.
    Filter {
        image: PathBuf,
        /// Output image (.png for PNG, anything else PGM).
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        filter: FilterArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        modulus: ModulusArg,
    },
    /// Iterate mean-shift filtering until the stopping criterion is met.
    Segment {
        image: PathBuf,
        /// Output image (.png for PNG, anything else PGM).
        #[arg(long)]
        out: PathBuf,
        /// Trace CSV [default: <out>.trace.csv]
        #[arg(long)]
        trace: Option<PathBuf>,
        /// old: entropy difference; new: ring entropy distance.
        #[arg(long, value_enum, default_value_t = CriterionArg::New)]
        criterion: CriterionArg,
        /// Stopping threshold [default: 0.9 for new, 0.0175 for old; the
        /// reference experimental settings]
        #[arg(long)]
        epsilon: Option<f64>,
        /// Cap on outer filtering passes.
        #[arg(long, default_value_t = CriterionConfig::DEFAULT_MAX_OUTER_ITERS)]
        max_iters: usize,
        #[command(flatten)]
        filter: FilterArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        modulus: ModulusArg,
    },
    /// Segment with both criteria from the same input and summarize.
    Compare {
        image: PathBuf,
        /// Directory receiving old/new images and traces.
        #[arg(long)]
        out_dir: PathBuf,
        /// Threshold for the entropy-difference criterion (reference setting).
        #[arg(long, default_value_t = CriterionKind::EntropyDiff.default_epsilon())]
        epsilon_old: f64,
        /// Threshold for the ring entropy distance criterion (reference setting).
        #[arg(long, default_value_t = CriterionKind::RingEntropyDistance.default_epsilon())]
        epsilon_new: f64,
        /// Cap on outer filtering passes.
        #[arg(long, default_value_t = CriterionConfig::DEFAULT_MAX_OUTER_ITERS)]
        max_iters: usize,
        /// Image format for the segmented outputs.
        #[arg(long, value_enum, default_value_t = FormatArg::Pgm)]
        format: FormatArg,
        #[command(flatten)]
        filter: FilterArgs,
        #[command(flatten)]
        modulus: ModulusArg,
    },
    /// Write the intensity profile along a line as "t,value" CSV.
    Profile {
        image: PathBuf,
        /// Start point "x,y".
        #[arg(long, value_parser = parse_point)]
        from: (usize, usize),
        /// End point "x,y".
        #[arg(long, value_parser = parse_point)]
        to: (usize, usize),
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        modulus: ModulusArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceKind {
    Nu,
    NuHat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Old,
    New,
}

impl From<CriterionArg> for CriterionKind {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Old => CriterionKind::EntropyDiff,
            CriterionArg::New => CriterionKind::RingEntropyDistance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Pgm,
    PgmAscii,
    Png,
}

impl FormatArg {
    fn format(self) -> ImageFormat {
        match self {
            FormatArg::Pgm => ImageFormat::PgmBinary,
            FormatArg::PgmAscii => ImageFormat::PgmAscii,
            FormatArg::Png => ImageFormat::Png,
        }
    }

    fn extension(self) -> &'static str {
        match self {
            FormatArg::Png => "png",
            _ => "pgm",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FilterArgs {
    /// Spatial bandwidth in pixels (reference setting 15).
    #[arg(long, default_value_t = MeanShiftParams::DEFAULT_HS)]
    pub hs: f64,
    /// Range bandwidth in gray levels (reference setting 12).
    #[arg(long, default_value_t = MeanShiftParams::DEFAULT_HR)]
    pub hr: f64,
    /// Per-pixel convergence threshold on the joint shift.
    #[arg(long, default_value_t = MeanShiftParams::DEFAULT_PIXEL_TOL)]
    pub pixel_tol: f64,
    /// Cap on per-pixel mean-shift steps.
    #[arg(long, default_value_t = MeanShiftParams::DEFAULT_PIXEL_MAX_ITERS)]
    pub pixel_max_iters: usize,
}

impl FilterArgs {
    fn params(&self) -> MeanShiftParams {
        MeanShiftParams {
            hs: self.hs,
            hr: self.hr,
            pixel_tol: self.pixel_tol,
            pixel_max_iters: self.pixel_max_iters,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write plain-text P2 instead of binary P5 for PGM outputs.
    #[arg(long)]
    pub ascii: bool,
}

impl OutputArgs {
    fn format_for(&self, path: &Path) -> ImageFormat {
        match ImageFormat::from_path(path) {
            ImageFormat::PgmBinary if self.ascii => ImageFormat::PgmAscii,
            f => f,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModulusArg {
    /// Expected modulus; must agree with the file's declared depth.
    #[arg(long)]
    pub modulus: Option<u32>,
}

impl ModulusArg {
    fn load(&self, path: &Path) -> Result<RingImage, CliError> {
        let image = imageio::load_image(path)?;
        match self.modulus {
            Some(m) if m != image.modulus() => Err(CliError::Invalid(format!(
                "{}: --modulus {m} conflicts with the file's modulus {}",
                path.display(),
                image.modulus()
            ))),
            _ => Ok(image),
        }
    }
}

fn parse_point(s: &str) -> Result<(usize, usize), String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected \"x,y\", got {s:?}"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad coordinate {v:?}: {e}"))
    };
    Ok((parse(x)?, parse(y)?))
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{rendered}")
            } else {
                write!(stdout, "{rendered}")
            };
            return code;
        }
    };
    match run(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

pub fn run(cli: Cli, out: &mut impl Write) -> Result<(), CliError> {
    match cli.command {
        Command::Entropy { image, modulus } => {
            let a = modulus.load(&image)?;
            writeln!(out, "{:.6}", entropy(&a).bits)?;
        }
        Command::Distance {
            a,
            b,
            kind,
            modulus,
        } => {
            let a = modulus.load(&a)?;
            let b = modulus.load(&b)?;
            let value = match kind {
                DistanceKind::Nu => nu(&a, &b)?,
                DistanceKind::NuHat => nu_hat(&a, &b)?,
            };
            writeln!(out, "{value:.6}")?;
        }
        Command::Filter {
            image,
            out: out_path,
            filter,
            output,
            modulus,
        } => {
            let a = modulus.load(&image)?;
            let filtered = mean_shift_filter_pass(&a, &filter.params())?;
            imageio::save_image(&filtered, &out_path, output.format_for(&out_path))?;
            writeln!(out, "distinct levels: {}", filtered.distinct_levels())?;
        }
        Command::Segment {
            image,
            out: out_path,
            trace,
            criterion,
            epsilon,
            max_iters,
            filter,
            output,
            modulus,
        } => {
            let a = modulus.load(&image)?;
            let kind = CriterionKind::from(criterion);
            let config = CriterionConfig {
                kind,
                epsilon: epsilon.unwrap_or(kind.default_epsilon()),
                max_outer_iters: max_iters,
            };
            let format = output.format_for(&out_path);
            // Fail before the expensive run if the output format cannot hold the image.
            imageio::encode_image(&a, format)?;
            let result = segment(&a, &filter.params(), &config)?;
            let trace_path = trace.unwrap_or_else(|| out_path.with_extension("trace.csv"));
            imageio::save_image(&result.final_image, &out_path, format)?;
            imageio::write_trace_csv(&result.trace, &trace_path)?;
            writeln!(
                out,
                "stopped: {} after {} iteration(s)",
                result.trace.stopped_reason,
                result.trace.iterations()
            )?;
        }
        Command::Compare {
            image,
            out_dir,
            epsilon_old,
            epsilon_new,
            max_iters,
            format,
            filter,
            modulus,
        } => {
            let a = modulus.load(&image)?;
            imageio::encode_image(&a, format.format())?;
            std::fs::create_dir_all(&out_dir).map_err(|source| ImageIoError::Io {
                path: out_dir.clone(),
                source,
            })?;
            let params = filter.params();
            for (label, kind, epsilon) in [
                ("old", CriterionKind::EntropyDiff, epsilon_old),
                ("new", CriterionKind::RingEntropyDistance, epsilon_new),
            ] {
                let config = CriterionConfig {
                    kind,
                    epsilon,
                    max_outer_iters: max_iters,
                };
                let result = segment(&a, &params, &config)?;
                imageio::save_image(
                    &result.final_image,
                    out_dir.join(format!("{label}.{}", format.extension())),
                    format.format(),
                )?;
                imageio::write_trace_csv(
                    &result.trace,
                    out_dir.join(format!("{label}_trace.csv")),
                )?;
                writeln!(out, "{}", summary_line(label, &result))?;
            }
        }
        Command::Profile {
            image,
            from,
            to,
            out: out_path,
            modulus,
        } => {
            let a = modulus.load(&image)?;
            let profile = imageio::extract_profile(&a, from, to)?;
            imageio::write_profile_csv(&profile, &out_path)?;
            writeln!(out, "samples: {}", profile.samples.len())?;
        }
    }
    Ok(())
}

fn summary_line(label: &str, result: &SegmentationResult) -> String {
    format!(
        "{label}: criterion={} iterations={} final_value={:.6} distinct_levels={} stopped={}",
        result.criterion.kind,
        result.trace.iterations(),
        result.trace.last().criterion_value,
        result.final_image.distinct_levels(),
        result.trace.stopped_reason
    )
}
