use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qap_lon::community::{
    greedy_modularity, spinglass_communities, write_partition_csv, SpinglassConfig, WeightedGraph,
};
use qap_lon::experiment::{self, ExperimentConfig};
use qap_lon::generate::{self, GeneratorConfig};
use qap_lon::landscape::{self, EnumerationMode};
use qap_lon::lon::{self, GraphFormat};
use qap_lon::{ClassTag, Error};

#[derive(Parser)]
#[command(name = "qap-lon", version, about = "Local optima networks of small QAP instances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Uniform,
    #[value(name = "real-like", alias = "real_like")]
    RealLike,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Graphml,
    Dot,
    #[value(name = "edge_csv")]
    EdgeCsv,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Greedy,
    Spinglass,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance in QAPLIB layout.
    Generate {
        #[arg(long, value_enum)]
        class: ClassArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Instance file; a `.meta` sidecar is written next to it. Prints to
        /// stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        uniform_max: i64,
        #[arg(long, default_value_t = 100.0)]
        rl_grid: f64,
        #[arg(long, default_value_t = 2.0)]
        rl_exponent: f64,
        #[arg(long, default_value_t = 0.0)]
        rl_sparsity: f64,
    },
    /// Enumerate basins, build the LON, filter it and export.
    Lon {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "edge_csv")]
        export: FormatArg,
        #[arg(long)]
        workers: Option<usize>,
        /// Reuse endpoints of already climbed configurations.
        #[arg(long)]
        fast: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Detect communities on an exported edge CSV.
    Communities {
        #[arg(long)]
        graph: PathBuf,
        /// Node CSV fixing the node count (isolated nodes included).
        #[arg(long)]
        nodes: Option<PathBuf>,
        #[arg(long, value_enum)]
        algorithm: AlgorithmArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 25)]
        q_max: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a batch study from a key=value config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a records CSV.
    Summarize {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn workers_or_default(w: Option<usize>) -> usize {
    w.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1)
}

fn create_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Generate {
            class,
            n,
            seed,
            out,
            uniform_max,
            rl_grid,
            rl_exponent,
            rl_sparsity,
        } => {
            let class = match class {
                ClassArg::Uniform => ClassTag::Uniform,
                ClassArg::RealLike => ClassTag::RealLike,
            };
            let cfg = GeneratorConfig {
                uniform_max,
                rl_grid,
                rl_exponent,
                rl_sparsity,
                ..GeneratorConfig::new(class, n, seed)
            };
            let inst = generate::generate(&cfg)?;
            match out {
                Some(path) => {
                    generate::save_instance(&inst, &path)?;
                    generate::save_meta(&cfg, &path)?;
                }
                None => print!("{}", generate::format_instance(&inst)),
            }
        }
        Command::Lon {
            instance,
            alpha,
            export,
            workers,
            fast,
            out,
        } => {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::Config(format!("alpha must lie in [0, 1], got {alpha}")));
            }
            let workers = workers_or_default(workers);
            let inst = generate::load_instance(&instance)?;
            let mode = if fast { EnumerationMode::Memoized } else { EnumerationMode::Reference };
            let bm = landscape::enumerate_basins_with(&inst, workers, mode)?;
            let lon = lon::build_lon(&inst, &bm, workers);
            let filtered = lon::filter_lon(&lon, alpha);

            create_dir(&out)?;
            let format = match export {
                FormatArg::Graphml => GraphFormat::GraphMl,
                FormatArg::Dot => GraphFormat::Dot,
                FormatArg::EdgeCsv => GraphFormat::EdgeCsv,
            };
            landscape::write_basin_binary(&bm, &out.join("basins.bin"))?;
            landscape::write_optima_csv(&bm, &out.join("optima.csv"))?;
            lon::write_node_csv(&lon.nodes, &out.join("nodes.csv"))?;
            lon::export_lon(&lon, format, &out.join(format!("lon.{}", format.extension())))?;
            lon::export_filtered(&filtered, format, &out.join(format!("lon_filtered.{}", format.extension())))?;
            println!(
                "optima={} directed_edges={} filtered_edges={} threshold={}",
                lon.num_nodes(),
                lon.counts.len(),
                filtered.num_edges(),
                lon::format_weight(filtered.threshold)
            );
        }
        Command::Communities {
            graph,
            nodes,
            algorithm,
            seed,
            gamma,
            q_max,
            out,
        } => {
            let edges = lon::read_edge_csv(&graph)?;
            let max_id = edges.iter().map(|&(i, j, _)| i.max(j) as usize + 1).max().unwrap_or(0);
            let n = match nodes {
                Some(path) => lon::read_node_count(&path)?,
                None => max_id,
            };
            if max_id > n {
                return Err(Error::Config(format!("edge endpoint {} exceeds node count {n}", max_id - 1)));
            }
            if let Some(&(i, _, _)) = edges.iter().find(|&&(i, j, _)| i == j) {
                return Err(Error::Config(format!("self-loop on node {i}")));
            }
            let g = WeightedGraph::from_edges(n, edges.iter().map(|&(i, j, w)| (i as usize, j as usize, w)));
            let (part, gamma) = match algorithm {
                AlgorithmArg::Greedy => (greedy_modularity(&g)?, None),
                AlgorithmArg::Spinglass => {
                    let cfg = SpinglassConfig {
                        gamma,
                        q_max,
                        ..SpinglassConfig::default()
                    };
                    (spinglass_communities(&g, seed, &cfg)?, Some(gamma))
                }
            };
            write_partition_csv(&part, gamma, &out)?;
            println!("communities={} q={}", part.num_communities(), part.q);
        }
        Command::Experiment { config, out } => {
            let text = fs::read_to_string(&config).map_err(|e| Error::Io {
                path: config.clone(),
                source: e,
            })?;
            let mut cfg = ExperimentConfig::parse(&text)?;
            cfg.out_dir = Some(out.clone());
            let records = experiment::run_experiment(&cfg)?;
            let failed = records.iter().filter(|r| r.error.is_some()).count();
            println!("records={} failed={} out={}", records.len(), failed, out.display());
            print!("{}", experiment::format_summary(&experiment::summarize(&records)));
        }
        Command::Summarize { records, out } => {
            let recs = experiment::read_records(&records)?;
            let summary = experiment::summarize(&recs);
            experiment::write_summary(&summary, &out)?;
            print!("{}", experiment::format_summary(&summary));
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::TooLarge { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
