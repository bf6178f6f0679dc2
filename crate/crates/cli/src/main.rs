mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use foliage::distances::DEFAULT_EPSILON;
use foliage::evalharness::{run_experiment, ExperimentConfig};
use foliage::imgproc::RasterImage;
use foliage::retrieval::{build_index, extract_features, rank, FeatureGroup};
use foliage::synth::{default_styles, write_dataset, Jitter};
use foliage::texture::IdmForm;
use foliage::{Error, ErrorKind, FeatureIndex, FeatureParams, Measure, Metric, Result, Weights};

use config::{parse_epsilon, parse_idm_form, Settings};

/// Leaf image retrieval: index a dataset, query it, and benchmark distance measures.
#[derive(Parser)]
#[command(name = "foliage", version)]
struct Cli {
    /// Flat `key = value` settings file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Featurize `<DATASET>/<species>/<images>` into an index file.
    Build {
        dataset: PathBuf,
        /// Index file to write.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Rank the species of an index against a query image (TSV on stdout).
    Query {
        index: PathBuf,
        image: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Run the accuracy / precision-recall / timing protocol and write CSV reports.
    Evaluate {
        dataset: PathBuf,
        /// Directory for report.csv and rpp_<measure>.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Print the 56 raw features of an image as JSON.
    Features {
        image: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Distances between vectors in two files (one comma-separated vector per line).
    Dist {
        first: PathBuf,
        second: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Render a synthetic labelled dataset.
    Synth {
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        classes: usize,
        #[arg(long, default_value_t = 5)]
        per_class: usize,
        #[arg(long, default_value_t = 128)]
        size: usize,
        #[arg(long, value_enum, default_value_t = JitterLevel::Mild)]
        jitter: JitterLevel,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum JitterLevel {
    None,
    Mild,
}

#[derive(Args, Default)]
struct Opts {
    /// Distance measure(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    measure: Option<Vec<Measure>>,
    /// Fusion weights `ks,kc,kt,kv`.
    #[arg(long)]
    weights: Option<Weights>,
    #[arg(long)]
    top_k: Option<usize>,
    /// Reference counts per class, comma separated.
    #[arg(long, value_delimiter = ',')]
    refs_per_class: Option<Vec<usize>>,
    #[arg(long)]
    queries_per_class: Option<usize>,
    #[arg(long)]
    gray_levels: Option<usize>,
    #[arg(long)]
    radial_bins: Option<usize>,
    #[arg(long)]
    angular_bins: Option<usize>,
    /// `literal` or `conventional`.
    #[arg(long, value_parser = parse_idm_form)]
    idm_form: Option<IdmForm>,
    /// Zero guard for the divergence measures.
    #[arg(long, value_parser = parse_epsilon)]
    epsilon: Option<f64>,
    /// Deepest retrieval depth of the precision-recall curves.
    #[arg(long)]
    rpp_depth: Option<usize>,
}

impl Opts {
    fn resolve(self, config: Option<&Path>) -> Result<Settings> {
        let flags = Settings {
            measures: self.measure,
            weights: self.weights,
            top_k: self.top_k,
            gray_levels: self.gray_levels,
            radial_bins: self.radial_bins,
            angular_bins: self.angular_bins,
            idm_form: self.idm_form,
            epsilon: self.epsilon,
            refs_per_class: self.refs_per_class,
            queries_per_class: self.queries_per_class,
            rpp_depth: self.rpp_depth,
        };
        for v in [flags.top_k, flags.gray_levels, flags.radial_bins, flags.angular_bins, flags.queries_per_class, flags.rpp_depth]
            .into_iter()
            .flatten()
        {
            if v == 0 {
                return Err(Error::InvalidInput("counts must be positive".into()));
            }
        }
        if flags.refs_per_class.as_ref().is_some_and(|r| r.contains(&0)) {
            return Err(Error::InvalidInput("reference counts must be positive".into()));
        }
        let file = match config {
            Some(p) => Settings::load(p)?,
            None => Settings::default(),
        };
        Ok(flags.over(file))
    }
}

fn params(s: &Settings) -> FeatureParams {
    let d = FeatureParams::default();
    FeatureParams {
        gray_levels: s.gray_levels.unwrap_or(d.gray_levels),
        radial_bins: s.radial_bins.unwrap_or(d.radial_bins),
        angular_bins: s.angular_bins.unwrap_or(d.angular_bins),
        idm_form: s.idm_form.unwrap_or(d.idm_form),
        vein_threshold: d.vein_threshold,
    }
}

fn single_metric(s: &Settings) -> Result<Metric<f64>> {
    let measure = match s.measures.as_deref() {
        None => Measure::CityBlock,
        Some([m]) => *m,
        Some(_) => return Err(Error::InvalidInput("this command takes a single --measure".into())),
    };
    Metric::with_epsilon(measure, s.epsilon.unwrap_or(DEFAULT_EPSILON))
}

fn load_image(path: &Path) -> Result<RasterImage> {
    if !path.is_file() {
        return Err(Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
        });
    }
    RasterImage::load(path)
}

fn cmd_build(dataset: &Path, out: &Path, s: &Settings) -> Result<()> {
    eprintln!("featurizing {}", dataset.display());
    let outcome = build_index(dataset, &params(s))?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let mut index = outcome.index;
    if let Some(w) = s.weights {
        index.set_weights(w)?;
    }
    index.save(out)?;
    eprintln!(
        "indexed {} leaves of {} species into {}",
        index.len(),
        index.species().len(),
        out.display()
    );
    Ok(())
}

fn cmd_query(index_path: &Path, image: &Path, s: &Settings) -> Result<()> {
    let mut index = FeatureIndex::load(index_path)?;
    if let Some(w) = s.weights {
        index.set_weights(w)?;
    }
    let metric = single_metric(s)?;
    let query = extract_features(&load_image(image)?, index.params())?;
    let result = rank(&query, &index, metric)?;
    let mut out = std::io::stdout().lock();
    let io = |e| Error::Io {
        path: "<stdout>".into(),
        source: e,
    };
    writeln!(out, "rank\tspecies\tscore\td_s\td_c\td_t\td_v").map_err(io)?;
    for (i, e) in result.entries.iter().take(s.top_k.unwrap_or(5)).enumerate() {
        let d = e.distances;
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            i + 1,
            e.species,
            e.score,
            d.shape,
            d.color,
            d.texture,
            d.vein
        )
        .map_err(io)?;
    }
    Ok(())
}

fn cmd_evaluate(dataset: &Path, out: &Path, s: &Settings) -> Result<()> {
    let d = ExperimentConfig::default();
    let config = ExperimentConfig {
        measures: s.measures.clone().unwrap_or(d.measures),
        weights: s.weights.unwrap_or(d.weights),
        refs_per_class: s.refs_per_class.clone().unwrap_or(d.refs_per_class),
        queries_per_class: s.queries_per_class.unwrap_or(d.queries_per_class),
        params: params(s),
        epsilon: s.epsilon.unwrap_or(d.epsilon),
        rpp_depth: s.rpp_depth,
    };
    eprintln!("evaluating {}", dataset.display());
    let report = run_experiment(dataset, &config)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    report.write_csv(out)?;
    println!("measure\trefs_per_class\ttop1\ttop3\ttop5\tseconds");
    for r in &report.rows {
        println!(
            "{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.6}",
            r.measure, r.refs_per_class, r.top1, r.top3, r.top5, r.seconds
        );
    }
    eprintln!("wrote reports to {}", out.display());
    Ok(())
}

fn cmd_features(image: &Path, s: &Settings) -> Result<()> {
    let v = extract_features(&load_image(image)?, &params(s))?;
    let features: Vec<serde_json::Value> = FeatureGroup::ALL
        .iter()
        .flat_map(|&g| {
            g.labels()
                .into_iter()
                .zip(v.group(g).to_vec())
                .map(move |(name, value)| serde_json::json!({ "group": g.name(), "name": name, "value": value }))
        })
        .collect();
    let doc = serde_json::json!({ "image": image.display().to_string(), "features": features });
    println!("{}", serde_json::to_string_pretty(&doc).expect("JSON values serialize"));
    Ok(())
}

fn read_vectors(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            l.split(',')
                .map(|x| {
                    x.trim().parse::<f64>().map_err(|_| {
                        Error::InvalidInput(format!("{}:{}: `{}` is not a number", path.display(), n + 1, x.trim()))
                    })
                })
                .collect()
        })
        .collect()
}

/// Line `i` of the first file against line `i` of the second; a single-line file is broadcast.
fn cmd_dist(first: &Path, second: &Path, s: &Settings) -> Result<()> {
    let metric = single_metric(s)?;
    let a = read_vectors(first)?;
    let b = read_vectors(second)?;
    let n = match (a.len(), b.len()) {
        (0, _) | (_, 0) => return Err(Error::InvalidInput("vector file is empty".into())),
        (x, y) if x == y || y == 1 => x,
        (1, y) => y,
        (x, y) => return Err(Error::InvalidInput(format!("files hold {x} and {y} vectors"))),
    };
    for i in 0..n {
        let q = &a[if a.len() == 1 { 0 } else { i }];
        let r = &b[if b.len() == 1 { 0 } else { i }];
        println!("{}", metric.distance(q, r)?);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Build { dataset, out, opts } => cmd_build(&dataset, &out, &opts.resolve(config)?),
        Command::Query { index, image, opts } => cmd_query(&index, &image, &opts.resolve(config)?),
        Command::Evaluate { dataset, out, opts } => cmd_evaluate(&dataset, &out, &opts.resolve(config)?),
        Command::Features { image, opts } => cmd_features(&image, &opts.resolve(config)?),
        Command::Dist { first, second, opts } => cmd_dist(&first, &second, &opts.resolve(config)?),
        Command::Synth {
            out,
            classes,
            per_class,
            size,
            jitter,
            seed,
        } => {
            if classes == 0 || per_class == 0 || size < 32 {
                return Err(Error::InvalidInput("need at least one class, one image and size >= 32".into()));
            }
            let jitter = match jitter {
                JitterLevel::None => Jitter::NONE,
                JitterLevel::Mild => Jitter::MILD,
            };
            write_dataset(&out, &default_styles(classes), per_class, size, jitter, seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Input => 2,
                ErrorKind::ImageProcessing => 3,
                ErrorKind::Evaluation => 4,
            })
        }
    }
}
