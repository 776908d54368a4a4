//! `autogmm` command-line front end.
//!
//! Exit codes: 0 on success, 1 on input or I/O errors, 2 when every candidate
//! of a model search failed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use autogmm::gmm::{CovarianceConstraint, Criterion, EmSettings};
use autogmm::hgmm::{cut_at_depth, hgmm_fit, HgmmConfig};
use autogmm::init::{parse_affinity, InitMethod, Linkage};
use autogmm::io::synthetic::{generate, SyntheticKind, SyntheticSpec};
use autogmm::io::{self, DendrogramRecord, ModelRecord};
use autogmm::metrics::{adjusted_rand_index, subsample_benchmark, BenchmarkConfig};
use autogmm::search::{autogmm_search, SearchConfig};
use autogmm::{Error, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "autogmm",
    version,
    about = "Automatic Gaussian mixture model selection"
)]
struct Cli {
    /// Worker threads (0 uses every available core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search the model grid and write labels, model and grid.
    Fit {
        data: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Build a cluster dendrogram by recursive search.
    Hfit {
        data: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Largest number of children per node.
        #[arg(long, default_value_t = HgmmConfig::default().max_components)]
        max_components: usize,
        /// Nodes with fewer points become leaves [default: 2 × max-components].
        #[arg(long)]
        min_split: Option<usize>,
        /// Nodes at this depth become leaves [default: unbounded].
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Write a seeded synthetic dataset and its truth labels.
    Synth {
        /// three_component, double_cigar or hierarchy.
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Total sample count [default: depends on the kind].
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Truth labels path [default: <out stem>_truth.csv].
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Compare search configurations on shared random subsamples.
    Bench {
        data: PathBuf,
        /// Truth labels, one per row of the data.
        #[arg(long)]
        truth: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Extra configuration `NAME=key:value;...` overriding affinities,
        /// linkages, constraints, criterion or kmeans-reps of the base search.
        #[arg(long = "variant")]
        variants: Vec<String>,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 0.8)]
        frac: f64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Print the adjusted Rand index of two label files.
    Ari { first: PathBuf, second: PathBuf },
}

#[derive(Debug, Args)]
struct InputArgs {
    /// The data file starts with a header row.
    #[arg(long)]
    header: bool,
}

#[derive(Debug, Clone, Args)]
struct SearchArgs {
    #[arg(long, default_value_t = SearchConfig::default().kmin)]
    kmin: usize,
    #[arg(long, default_value_t = SearchConfig::default().kmax)]
    kmax: usize,
    /// Comma-separated subset of l2, l1, cosine, none [default: all].
    #[arg(long, value_delimiter = ',')]
    affinities: Vec<String>,
    /// Comma-separated subset of ward, complete, average, single [default: all].
    #[arg(long, value_delimiter = ',')]
    linkages: Vec<String>,
    /// Comma-separated subset of spherical, diag, tied, full [default: all].
    #[arg(long, value_delimiter = ',')]
    constraints: Vec<String>,
    /// bic or aic.
    #[arg(long, default_value_t = SearchConfig::default().criterion.to_string())]
    criterion: String,
    #[arg(long, default_value_t = SearchConfig::default().subset_cap)]
    subset_cap: usize,
    #[arg(long, default_value_t = SearchConfig::default().kmeans_reps)]
    kmeans_reps: usize,
    #[arg(long, default_value_t = EmSettings::default().max_iter)]
    max_iter: usize,
    #[arg(long, default_value_t = EmSettings::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = SearchConfig::default().seed)]
    seed: u64,
}

fn parse_list<T>(values: &[String], parse: impl Fn(&str) -> Result<T>, all: &[T]) -> Result<Vec<T>>
where
    T: Clone + PartialEq,
{
    if values.is_empty() {
        return Ok(all.to_vec());
    }
    let mut out = Vec::new();
    for v in values {
        let item = parse(v)?;
        if !out.contains(&item) {
            out.push(item);
        }
    }
    Ok(out)
}

impl SearchArgs {
    fn to_config(&self) -> Result<SearchConfig> {
        let affinities = parse_list(
            &self.affinities,
            parse_affinity,
            &[
                Some(autogmm::init::Affinity::L2),
                Some(autogmm::init::Affinity::L1),
                Some(autogmm::init::Affinity::Cosine),
                None,
            ],
        )?;
        let linkages = parse_list(&self.linkages, |s| s.parse::<Linkage>(), &Linkage::ALL)?;
        let methods = InitMethod::from_sets(&affinities, &linkages);
        if methods.is_empty() {
            return Err(Error::Input(
                "the affinity and linkage sets admit no initialization method".into(),
            ));
        }
        let config = SearchConfig {
            kmin: self.kmin,
            kmax: self.kmax,
            methods,
            constraints: parse_list(
                &self.constraints,
                |s| s.parse::<CovarianceConstraint>(),
                &CovarianceConstraint::ALL,
            )?,
            criterion: self.criterion.parse::<Criterion>()?,
            subset_cap: self.subset_cap,
            kmeans_reps: self.kmeans_reps,
            em: EmSettings {
                max_iter: self.max_iter,
                tol: self.tol,
                ..EmSettings::default()
            },
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }

    /// Applies `key:value;...` overrides.
    fn with_overrides(&self, spec: &str) -> Result<SearchArgs> {
        let mut args = self.clone();
        let list = |v: &str| v.split(',').map(str::to_string).collect::<Vec<_>>();
        for part in spec.split(';').filter(|p| !p.trim().is_empty()) {
            let (key, value) = part.split_once(':').ok_or_else(|| {
                Error::Input(format!("variant override `{part}` is not key:value"))
            })?;
            match key.trim() {
                "affinities" => args.affinities = list(value),
                "linkages" => args.linkages = list(value),
                "constraints" => args.constraints = list(value),
                "criterion" => args.criterion = value.to_string(),
                "kmeans-reps" => {
                    args.kmeans_reps = value.parse().map_err(|_| {
                        Error::Input(format!("kmeans-reps `{value}` is not an integer"))
                    })?
                }
                other => return Err(Error::Input(format!("unknown variant key `{other}`"))),
            }
        }
        Ok(args)
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn fmt_value(v: f64) -> String {
    format!("{v:.6}")
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit {
            data,
            input,
            search,
            out_dir,
        } => {
            let config = search.to_config()?;
            let matrix = io::read_matrix(&data, input.header)?;
            let result = autogmm_search(&matrix, &config)?;
            create_dir(&out_dir)?;
            io::write_labels(out_dir.join("labels.csv"), result.labels())?;
            io::write_json(
                out_dir.join("model.json"),
                &ModelRecord::from_search(&result, config.seed),
            )?;
            io::write_grid(out_dir.join("grid.csv"), &result)?;
            let best = &result.best;
            println!(
                "k={} constraint={} init={} {}={} reg_covar={}",
                best.k,
                best.constraint,
                best.method,
                result.criterion,
                fmt_value(best.criterion_value.expect("best candidate has a value")),
                best.reg_covar
            );
        }
        Command::Hfit {
            data,
            input,
            search,
            max_components,
            min_split,
            max_depth,
            out_dir,
        } => {
            let config = HgmmConfig {
                search: search.to_config()?,
                max_components,
                min_split,
                max_depth,
            };
            let matrix = io::read_matrix(&data, input.header)?;
            let root = hgmm_fit(&matrix, &config)?;
            create_dir(&out_dir)?;
            io::write_json(
                out_dir.join("dendrogram.json"),
                &DendrogramRecord::new(&root, config.search.criterion),
            )?;
            let depth = root.max_depth();
            for d in 1..=depth {
                io::write_labels(
                    out_dir.join(format!("labels_depth{d}.csv")),
                    &cut_at_depth(&root, d),
                )?;
            }
            io::write_labels(
                out_dir.join("labels_leaves.csv"),
                &cut_at_depth(&root, depth),
            )?;
            let root_k = root.model.as_ref().map_or(0, |m| m.model.k());
            println!(
                "depth={depth} leaves={} root_k={root_k} root_leaf_reason={}",
                root.leaves().len(),
                root.leaf_reason.map_or("none", |r| r.name())
            );
        }
        Command::Synth {
            kind,
            seed,
            n,
            out,
            truth,
        } => {
            let kind: SyntheticKind = kind.parse()?;
            let mut spec = SyntheticSpec::new(kind, seed);
            if let Some(n) = n {
                spec = spec.with_n(n);
            }
            let generated = generate(&spec)?;
            let truth = truth.unwrap_or_else(|| sibling(&out, "truth"));
            io::write_matrix(&out, &generated.data)?;
            io::write_labels(&truth, &generated.labels)?;
            if generated.levels.len() > 1 {
                for (i, level) in generated.levels.iter().enumerate() {
                    io::write_labels(sibling(&out, &format!("truth_level{}", i + 1)), level)?;
                }
            }
            println!(
                "kind={kind} n={} d={} components={} seed={seed}",
                generated.data.nrows(),
                generated.data.ncols(),
                generated.labels.iter().max().map_or(0, |m| m + 1)
            );
        }
        Command::Bench {
            data,
            truth,
            input,
            search,
            variants,
            reps,
            frac,
            out_dir,
        } => {
            let mut configs = vec![BenchmarkConfig {
                name: "autogmm".into(),
                config: search.to_config()?,
            }];
            for v in &variants {
                let (name, spec) = v
                    .split_once('=')
                    .ok_or_else(|| Error::Input(format!("variant `{v}` is not NAME=overrides")))?;
                if configs.iter().any(|c| c.name == name) {
                    return Err(Error::Input(format!("duplicate variant name `{name}`")));
                }
                configs.push(BenchmarkConfig {
                    name: name.to_string(),
                    config: search.with_overrides(spec)?.to_config()?,
                });
            }
            let matrix = io::read_matrix(&data, input.header)?;
            let labels = io::read_labels(&truth)?;
            let report = subsample_benchmark(&matrix, &labels, &configs, reps, frac, search.seed)?;
            create_dir(&out_dir)?;
            io::write_benchmark_tables(
                out_dir.join("bench.csv"),
                out_dir.join("bench_timing.csv"),
                &report,
            )?;
            io::write_benchmark_summary(out_dir.join("bench_summary.json"), &report)?;
            io::write_timing_summary(out_dir.join("bench_timing.json"), &report)?;
            for c in &configs {
                let aris: Vec<f64> = report
                    .records
                    .iter()
                    .filter(|r| r.config == c.name)
                    .filter_map(|r| r.ari)
                    .collect();
                let mean = aris.iter().sum::<f64>() / aris.len().max(1) as f64;
                println!(
                    "config={} runs={} mean_ari={}",
                    c.name,
                    aris.len(),
                    fmt_value(mean)
                );
            }
        }
        Command::Ari { first, second } => {
            let a = io::read_labels(&first)?;
            let b = io::read_labels(&second)?;
            println!("{}", adjusted_rand_index(&a, &b)?);
        }
    }
    Ok(())
}

/// `<dir>/<stem>_<suffix>.csv` next to `path`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map_or("data".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: cannot start {} threads: {e}", cli.threads);
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::SearchFailure { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("autogmm").chain(args.iter().copied())).unwrap()
    }

    fn search_args(cli: Cli) -> SearchArgs {
        match cli.command {
            Command::Fit { search, .. } => search,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn flag_defaults_equal_library_defaults() {
        let config = search_args(parse(&["fit", "x.csv"])).to_config().unwrap();
        assert_eq!(config, SearchConfig::default());
        match parse(&["hfit", "x.csv"]).command {
            Command::Hfit {
                max_components,
                min_split,
                max_depth,
                ..
            } => {
                let d = HgmmConfig::default();
                assert_eq!(
                    (max_components, min_split, max_depth),
                    (d.max_components, d.min_split, d.max_depth)
                );
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn set_flags_narrow_the_grid() {
        let config = search_args(parse(&[
            "fit",
            "x.csv",
            "--affinities",
            "l1,none",
            "--linkages",
            "ward,single",
            "--constraints",
            "diag",
            "--criterion",
            "aic",
        ]))
        .to_config()
        .unwrap();
        assert_eq!(config.methods.len(), 2);
        assert_eq!(config.methods[1], InitMethod::KMeans);
        assert_eq!(config.constraints, vec![CovarianceConstraint::Diag]);
        assert_eq!(config.criterion, Criterion::Aic);
    }

    #[test]
    fn bad_values_are_input_errors() {
        for args in [
            &["fit", "x.csv", "--affinities", "l3"][..],
            &["fit", "x.csv", "--affinities", "l1", "--linkages", "ward"],
            &["fit", "x.csv", "--kmin", "5", "--kmax", "3"],
            &["fit", "x.csv", "--criterion", "icl"],
        ] {
            assert!(
                matches!(search_args(parse(args)).to_config(), Err(Error::Input(_))),
                "{args:?}"
            );
        }
        assert!(Cli::try_parse_from(["autogmm", "fit", "x.csv", "--bogus"]).is_err());
    }

    #[test]
    fn variant_overrides() {
        let base = search_args(parse(&["fit", "x.csv"]));
        let v = base
            .with_overrides("affinities:none;kmeans-reps:10;constraints:tied,full")
            .unwrap();
        let config = v.to_config().unwrap();
        assert_eq!(config.methods, vec![InitMethod::KMeans]);
        assert_eq!(config.kmeans_reps, 10);
        assert_eq!(config.constraints.len(), 2);
        assert!(base.with_overrides("seed:4").is_err());
    }
}
