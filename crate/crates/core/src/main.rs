use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use textreuse::api::{self, AppState, ServerConfig};
use textreuse::consolidate::{self, DefragParams};
use textreuse::edge::{read_edges, write_edges};
use textreuse::edgestore::EdgeStore;
use textreuse::synthbench::{self, GenSpec, GroundTruth};
use textreuse::{detector, metasearch, AlignParams, Corpus};

#[derive(Parser)]
#[command(name = "textreuse", version, about = "Detect and explore text reuse in OCR corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Align every document pair and write the edge file.
    Detect {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 120)]
        min_len: u32,
        #[arg(long, default_value_t = 70.0)]
        min_positives: f64,
        /// Worker threads; all cores when omitted.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Merge fragments, group passages and reduce cliques to stars.
    Consolidate {
        #[arg(long)]
        edges: PathBuf,
        /// Corpus supplying document years for source selection.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out_passages: PathBuf,
        #[arg(long)]
        out_clusters: PathBuf,
        /// Where to write the defragmented edges, if wanted.
        #[arg(long)]
        out_edges: Option<PathBuf>,
        #[arg(long, default_value_t = 180)]
        gap: i64,
        #[arg(long, default_value_t = 0.5)]
        overlap: f64,
        #[arg(long, default_value_t = 80)]
        diag: i64,
    },
    /// Serve the JSON API.
    Serve {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        edges: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        clusters: Option<PathBuf>,
        /// Allowed CORS origin; repeatable. Any origin when omitted.
        #[arg(long = "cors-origin")]
        cors_origins: Vec<String>,
        /// Document link template containing `{doc_id}`.
        #[arg(long)]
        external_url_template: Option<String>,
        /// Static web client directory served under `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
    /// Search author and title metadata; prints TSV.
    Search {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        q: String,
    },
    /// Generate a synthetic corpus with planted reuse.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score an edge file against a synthetic ground truth.
    Eval {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value_t = synthbench::DEFAULT_IOU)]
        iou: f64,
        /// Per-plant TSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn load_corpus(path: &Path) -> Result<Corpus> {
    Corpus::ingest(path).with_context(|| format!("loading corpus {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Detect {
            corpus,
            out,
            k,
            min_len,
            min_positives,
            threads,
        } => {
            if k == 0 {
                bail!("--k must be positive");
            }
            let params = AlignParams {
                k,
                min_align_length: min_len,
                min_positives,
                ..AlignParams::default()
            };
            let corpus = load_corpus(&corpus)?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .context("building thread pool")?;
            let edges = pool.install(|| detector::detect_corpus(&corpus, &params));
            let mut w = create(&out)?;
            write_edges(&mut w, &edges)?;
            w.flush()?;
            eprintln!("{} documents, {} edges", corpus.len(), edges.len());
        }
        Command::Consolidate {
            edges,
            corpus,
            out_passages,
            out_clusters,
            out_edges,
            gap,
            overlap,
            diag,
        } => {
            let corpus = load_corpus(&corpus)?;
            let raw = read_edges(&edges).with_context(|| format!("reading {}", edges.display()))?;
            let params = DefragParams {
                gap_limit: gap,
                diag_limit: diag,
                ..DefragParams::default()
            };
            let merged = consolidate::defragment(&raw, &params);
            let graph = consolidate::build_passages(&merged, overlap);
            let clusters = consolidate::first_source(&graph, |id| corpus.get(id).ok().map(|d| d.meta.year))?;
            let mut w = create(&out_passages)?;
            consolidate::write_passages(&mut w, &graph.passages)?;
            w.flush()?;
            let mut w = create(&out_clusters)?;
            consolidate::write_clusters(&mut w, &clusters)?;
            w.flush()?;
            if let Some(path) = out_edges {
                let mut w = create(&path)?;
                write_edges(&mut w, &merged)?;
                w.flush()?;
            }
            eprintln!(
                "{} edges -> {} defragmented, {} passages, {} clusters",
                raw.len(),
                merged.len(),
                graph.passages.len(),
                clusters.len()
            );
        }
        Command::Serve {
            corpus,
            edges,
            port,
            host,
            clusters,
            cors_origins,
            external_url_template,
            static_dir,
        } => {
            let corpus = load_corpus(&corpus)?;
            let store = EdgeStore::load(&edges, &corpus).with_context(|| format!("loading {}", edges.display()))?;
            let clusters = match clusters {
                Some(p) => {
                    let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    consolidate::parse_clusters(&text)?
                }
                None => Vec::new(),
            };
            let addr: SocketAddr = format!("{host}:{port}").parse().context("listen address")?;
            let state = Arc::new(AppState::new(
                corpus,
                store,
                clusters,
                ServerConfig {
                    cors_origins,
                    external_url_template,
                    static_dir,
                },
            ));
            tokio::runtime::Runtime::new()?.block_on(api::serve(state, addr))?;
        }
        Command::Search { corpus, q } => {
            let corpus = load_corpus(&corpus)?;
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            writeln!(w, "doc_id\tyear\tauthor\ttitle\tscore")?;
            for r in metasearch::search(&corpus, &q) {
                writeln!(w, "{}\t{}\t{}\t{}\t{}", r.doc_id, r.year, r.author, r.title, r.score)?;
            }
            w.flush()?;
        }
        Command::Synth { spec, out } => {
            let spec = GenSpec::load(&spec)?;
            let generated = synthbench::generate(&spec)?;
            generated.write_to(&out)?;
            eprintln!(
                "{} documents, {} characters, {} plants",
                generated.corpus.len(),
                generated.corpus.total_chars(),
                generated.truth.plants.len()
            );
        }
        Command::Eval { edges, truth, iou, out } => {
            let edges = read_edges(&edges).with_context(|| format!("reading {}", edges.display()))?;
            let truth = GroundTruth::read(&truth)?;
            let report = synthbench::evaluate(&edges, &truth, iou)?;
            match out {
                Some(p) => {
                    let mut w = create(&p)?;
                    w.write_all(report.to_tsv().as_bytes())?;
                    w.flush()?;
                }
                None => print!("{}", report.to_tsv()),
            }
            eprint!("{}", report.summary());
        }
    }
    Ok(())
}

fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(io::stderr)
        .init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
