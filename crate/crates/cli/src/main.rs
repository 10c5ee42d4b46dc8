use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hiermerge::{
    approximation, asi_improve_with, curve_to_csv, dump_to_string, greedy_segment, is_dump,
    optimal_connected_partition, optimal_partition, parse_dump, segment_restructured_traced,
    ward_cluster_image, Error, Hierarchy, ImageRaster, MergeMode,
};

#[derive(Parser)]
#[command(name = "hiermerge", version, about = "Hierarchical piecewise-constant image approximation")]
struct Cli {
    /// Input image (P2/P3/P5/P6) or hierarchy dump.
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Tolerance relative to the total error of the whole image.
    #[arg(long, global = true, default_value_t = 1e-9)]
    epsilon: f64,

    /// How to build a hierarchy when the input is an image.
    #[arg(long, global = true, value_enum, default_value_t = Method::Convert)]
    method: Method,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ward clustering of the pixels, written as a hierarchy dump.
    Cluster,
    /// Greedy merging of adjacent segments, written as a hierarchy dump.
    Segment,
    /// Segmentation with restructuring into a convex clustering.
    Convert,
    /// Improves the partition with `g` clusters.
    Asi {
        #[arg(long)]
        g: usize,
        #[arg(long, value_enum, default_value_t = Mode::Clustering)]
        mode: Mode,
    },
    /// Error curve as `g,E,sigma` CSV.
    Curve {
        #[arg(long, default_value_t = 1000)]
        gmax: usize,
    },
    /// Paints the approximation with `g` clusters.
    Render {
        #[arg(long)]
        g: usize,
        /// Source image when the input is a dump.
        #[arg(long)]
        image: Option<PathBuf>,
    },
    /// Exhaustive optimal partition of a tiny image (at most 12 pixels).
    Oracle {
        #[arg(long)]
        g: usize,
        /// Only partitions into 4-connected regions.
        #[arg(long)]
        connected: bool,
    },
    /// Validates a hierarchy and writes it back as a dump.
    Dump,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Cluster,
    Segment,
    Convert,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Clustering,
    Segmentation,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

enum Input {
    Image(ImageRaster),
    Dump(Hierarchy),
}

fn read_input(path: Option<&Path>) -> Result<Input, Failure> {
    let path = path.ok_or_else(|| Failure::Usage("--input is required".into()))?;
    let bytes = fs::read(path).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })?;
    if is_dump(&bytes) {
        let text = String::from_utf8(bytes).map_err(|_| Error::Parse {
            line: 0,
            message: "dump is not valid UTF-8".into(),
        })?;
        Ok(Input::Dump(parse_dump(&text)?))
    } else {
        Ok(Input::Image(ImageRaster::parse(&bytes)?))
    }
}

fn read_image(path: Option<&Path>) -> Result<ImageRaster, Failure> {
    match read_input(path)? {
        Input::Image(img) => Ok(img),
        Input::Dump(_) => Err(Failure::Usage("this command needs an image input".into())),
    }
}

fn build(image: &ImageRaster, method: Method, epsilon: f64) -> Result<Hierarchy, Error> {
    match method {
        Method::Cluster => ward_cluster_image(image),
        Method::Segment => greedy_segment(image),
        Method::Convert => segment_restructured_traced(image, epsilon).map(|(h, _)| h),
    }
}

fn hierarchy(cli: &Cli) -> Result<Hierarchy, Failure> {
    match read_input(cli.input.as_deref())? {
        Input::Dump(h) => Ok(h),
        Input::Image(img) => Ok(build(&img, cli.method, cli.epsilon)?),
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| Error::Io {
            path: p.into(),
            source: e,
        })?,
        None => io::stdout().write_all(bytes).map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        })?,
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if !(cli.epsilon >= 0.0 && cli.epsilon.is_finite()) {
        return Err(Failure::Usage(format!("invalid --epsilon {}", cli.epsilon)));
    }
    let output = cli.output.as_deref();
    match &cli.command {
        Command::Cluster | Command::Segment | Command::Convert => {
            let method = match cli.command {
                Command::Cluster => Method::Cluster,
                Command::Segment => Method::Segment,
                _ => Method::Convert,
            };
            let image = read_image(cli.input.as_deref())?;
            let h = build(&image, method, cli.epsilon)?;
            write_output(output, dump_to_string(&h).as_bytes())
        }
        Command::Dump => {
            let h = hierarchy(cli)?;
            write_output(output, dump_to_string(&h).as_bytes())
        }
        Command::Asi { g, mode } => {
            let h = hierarchy(cli)?;
            let mode = match mode {
                Mode::Clustering => MergeMode::Clustering,
                Mode::Segmentation => MergeMode::Segmentation(h.grid().ok_or(Error::MissingGrid)?),
            };
            let out = asi_improve_with(&h, *g, mode, cli.epsilon)?;
            eprintln!(
                "rounds {}, error {} -> {}, stable {}",
                out.rounds(),
                out.errors[0],
                out.partition.total_error(),
                out.criterion_met
            );
            write_output(output, dump_to_string(&out.hierarchy).as_bytes())
        }
        Command::Curve { gmax } => {
            if *gmax == 0 {
                return Err(Failure::Usage("--gmax must be positive".into()));
            }
            let h = hierarchy(cli)?;
            let curve = h.error_curve((*gmax).min(h.len()))?;
            write_output(output, curve_to_csv(&curve).as_bytes())
        }
        Command::Render { g, image } => {
            let (h, img) = match read_input(cli.input.as_deref())? {
                Input::Image(img) => (build(&img, cli.method, cli.epsilon)?, img),
                Input::Dump(h) => {
                    let path = image
                        .as_deref()
                        .ok_or_else(|| Failure::Usage("--image is required for a dump input".into()))?;
                    (h, ImageRaster::load(path)?)
                }
            };
            let p = h.cut_at(*g)?;
            write_output(output, &approximation(&img, &p)?.to_bytes())
        }
        Command::Oracle { g, connected } => {
            let img = read_image(cli.input.as_deref())?;
            let best = if *connected {
                optimal_connected_partition(&img, *g)?
            } else {
                optimal_partition(&img.pixel_stats(), *g)?
            };
            let mut text = format!("E {}\n", best.error);
            for row in best.assignment.chunks(img.width()) {
                let labels: Vec<String> = row.iter().map(usize::to_string).collect();
                text.push_str(&labels.join(" "));
                text.push('\n');
            }
            write_output(output, text.as_bytes())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
