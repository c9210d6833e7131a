use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use simsearch::{run, ExperimentConfig};
use simsearch_core::DistType;

/// Benchmarks a search method against exact answers.
#[derive(Parser, Debug)]
#[command(name = "experiment", version)]
struct Args {
    /// Space mnemonic, e.g. `l2` or `lp:p=0.5`.
    #[arg(short = 's', long = "spaceType")]
    space_type: String,
    #[arg(long = "distType", default_value = "float")]
    dist_type: DistType,
    #[arg(short = 'i', long = "dataFile")]
    data_file: PathBuf,
    /// Read at most this many data points (0 = all).
    #[arg(short = 'D', long = "maxNumData", default_value_t = 0)]
    max_num_data: usize,
    /// Queries; without it, queries are sampled from the data.
    #[arg(short = 'q', long = "queryFile")]
    query_file: Option<PathBuf>,
    #[arg(short = 'Q', long = "maxNumQuery", default_value_t = 0)]
    max_num_query: usize,
    /// Number of bootstrap splits.
    #[arg(short = 'b', long = "testSetQty", default_value_t = 0)]
    test_set_qty: usize,
    #[arg(long = "threadTestQty", default_value_t = 1)]
    thread_test_qty: usize,
    /// Comma-separated k values.
    #[arg(short = 'k', long = "knn", value_delimiter = ',')]
    knn: Vec<usize>,
    /// Comma-separated radii.
    #[arg(short = 'r', long = "range", value_delimiter = ',')]
    range: Vec<f64>,
    #[arg(short = 'm', long = "method")]
    method: String,
    /// Index-time parameters, `name=value,...`.
    #[arg(short = 'c', long = "createIndex", default_value = "")]
    create_index: String,
    /// Query-time parameter set; repeat to test several.
    #[arg(short = 't', long = "queryTimeParams")]
    query_time_params: Vec<String>,
    #[arg(short = 'L', long = "loadIndex")]
    load_index: Option<PathBuf>,
    #[arg(short = 'S', long = "saveIndex")]
    save_index: Option<PathBuf>,
    /// Prefix of the exact-answer cache files.
    #[arg(short = 'g', long = "cachePrefixGS")]
    cache_prefix_gs: Option<String>,
    #[arg(long = "maxCacheGSRelativeQty", default_value_t = 10)]
    max_cache_gs_relative_qty: usize,
    #[arg(short = 'o', long = "outFilePrefix")]
    out_file_prefix: Option<String>,
    /// Append to existing result files instead of replacing them.
    #[arg(short = 'a', long = "appendToResFile")]
    append_to_res_file: bool,
    #[arg(short = 'l', long = "logFile")]
    log_file: Option<PathBuf>,
}

fn init_logging(path: Option<&PathBuf>) -> Result<(), String> {
    let mut b = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"));
    if let Some(p) = path {
        let f = File::create(p).map_err(|e| format!("cannot open log file {}: {e}", p.display()))?;
        b.target(env_logger::Target::Pipe(Box::new(f)));
    }
    b.init();
    Ok(())
}

fn main() -> ExitCode {
    let a = Args::parse();
    if let Err(e) = init_logging(a.log_file.as_ref()) {
        eprintln!("{e}");
        return ExitCode::FAILURE;
    }
    let cfg = ExperimentConfig {
        space_type: a.space_type,
        dist_type: a.dist_type,
        data_file: a.data_file,
        max_num_data: a.max_num_data,
        query_file: a.query_file,
        max_num_query: a.max_num_query,
        test_set_qty: a.test_set_qty,
        knn: a.knn,
        range: a.range,
        method: a.method,
        create_index: a.create_index,
        query_time_params: a.query_time_params,
        thread_test_qty: a.thread_test_qty,
        cache_prefix_gs: a.cache_prefix_gs,
        max_cache_gs_relative_qty: a.max_cache_gs_relative_qty,
        out_file_prefix: a.out_file_prefix,
        append_to_res_file: a.append_to_res_file,
        load_index: a.load_index,
        save_index: a.save_index,
        seed: 0,
    };
    match run(&cfg) {
        Ok(out) => {
            for (qt, rows) in &out.per_type {
                for r in rows {
                    println!(
                        "{qt} [{}]: recall {:.4}, query time {:.4} ms, impr. dist. comp. {:.2}",
                        r.query_params, r.recall.mean, r.query_time.mean, r.impr_dist_comp.mean
                    );
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
