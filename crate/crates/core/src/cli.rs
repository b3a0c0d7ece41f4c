//! Command-line driver: `ingest`, `query`, `run`, `bench` and `stats`.
//!
//! Exit codes: 0 ok, 1 unexpected failure, 2 input error, 3 query error,
//! 4 program error, 5 codec error.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::algorithms::{self, AlgorithmError, PageRankConfig, SsspConfig, VertexPredicate};
use crate::codec::bench::{bench_codecs, default_specs, parse_column, render_table, synthetic_column, BenchSpec, SyntheticKind};
use crate::codec::{ColumnType, GeneralCodec};
use crate::engine::{self, Direction, EngineError, RunStats, TraverseOptions};
use crate::model::{Edge, GraphSchema, TimeRange, Timestamp, VertexId, VertexUpdate};
use crate::partition::PartitionLayout;
use crate::store::{
    CodecConfig, EdgeFilter, Graph, GraphView, GraphWriter, IndexKind, LocalFs, ScanOptions, StorageBackend, StoreError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_QUERY: i32 = 3;
pub const EXIT_PROGRAM: i32 = 4;
pub const EXIT_CODEC: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "tsgraph", version, about = "Time-series graph store and BSP engine")]
pub struct Cli {
    /// Directory holding graphs.
    #[arg(long, global = true, default_value = ".")]
    pub root: PathBuf,
    /// Graph id; `ingest` defaults to the schema's graph id.
    #[arg(long, global = true)]
    pub graph: Option<String>,
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Snapshot timestamp in epoch milliseconds; the latest state if omitted.
    #[arg(long, global = true)]
    pub at: Option<Timestamp>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Load TSV edge files into a new graph.
    Ingest(IngestArgs),
    /// Neighborhood and attribute queries on a snapshot.
    #[command(subcommand)]
    Query(QueryCommand),
    /// Run an algorithm and print `vertex<TAB>value` rows.
    #[command(subcommand)]
    Run(RunCommand),
    /// Compare column codecs on a column file or a synthetic column.
    Bench(BenchArgs),
    /// Summarize a graph.
    Stats,
}

/// Layout, codec and input settings for `ingest`.
#[derive(Args, Debug, Clone)]
pub struct IngestArgs {
    /// JSON schema document.
    #[arg(long)]
    pub schema: PathBuf,
    /// Edge files: `src<TAB>dst<TAB>type<TAB>timestamp_ms<TAB>attrs...`.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Vertex attribute updates: `vertex<TAB>attr<TAB>timestamp_ms<TAB>value`.
    #[arg(long)]
    pub vertex_attrs: Option<PathBuf>,
    /// Grid side; the graph gets n*n edge partitions.
    #[arg(long, default_value_t = 4)]
    pub n: u32,
    #[arg(long, default_value_t = 4)]
    pub vertex_partitions: u32,
    #[arg(long)]
    pub row_seed: Option<u64>,
    #[arg(long)]
    pub col_seed: Option<u64>,
    #[arg(long, default_value = "zstd")]
    pub general: GeneralCodec,
    /// Struct block index: none, range or bloom.
    #[arg(long, default_value = "range")]
    pub index: IndexKind,
    #[arg(long, default_value_t = 64 * 1024)]
    pub block_bytes: usize,
    #[arg(long, default_value_t = 0.01)]
    pub bloom_fp: f64,
}

#[derive(Subcommand, Debug)]
pub enum QueryCommand {
    /// Vertices within k hops of the seeds (seeds included).
    Khop {
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<VertexId>,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "out")]
        direction: String,
        /// Only vertices exactly k hops away.
        #[arg(long)]
        exact: bool,
    },
    /// Distinct neighbor counts of the seeds passing a predicate such as `age>16`.
    NeighborsFiltered {
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<VertexId>,
        #[arg(long)]
        predicate: String,
        #[arg(long, default_value = "out")]
        direction: String,
    },
    /// Value of a vertex attribute at `--at`.
    AttributeAt {
        #[arg(long)]
        vertex: VertexId,
        #[arg(long)]
        attr: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum RunCommand {
    /// PageRank with uniform redistribution of dangling mass.
    Pagerank {
        #[arg(long, default_value_t = 0.85)]
        damping: f64,
        #[arg(long, default_value_t = 100)]
        max_iterations: u64,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        /// Weigh repeated edges between a pair by their count.
        #[arg(long)]
        multiplicity: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Shortest distances from one source; `inf` when unreachable.
    Sssp {
        #[arg(long)]
        source: VertexId,
        /// Numeric edge column to use as weight; unit weights if omitted.
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// One value per line.
    #[arg(long, conflicts_with = "synthetic")]
    pub input: Option<PathBuf>,
    /// Value type of `--input`: int, long, double, string or u64.
    #[arg(long, default_value = "u64")]
    pub r#type: String,
    /// timestamps, doubles, longs or categories.
    #[arg(long)]
    pub synthetic: Option<String>,
    #[arg(long, default_value_t = 1_000_000)]
    pub count: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Comma-separated `column[+general]` specs; every supported pair if omitted.
    #[arg(long, value_delimiter = ',')]
    pub codecs: Vec<String>,
    /// Values per encoded block.
    #[arg(long, default_value_t = 8192)]
    pub block_values: usize,
    #[arg(long)]
    pub json: bool,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(EXIT_FAILURE, e.to_string())
    }
}

fn store_error(e: StoreError) -> CliError {
    let code = match e {
        StoreError::GraphNotFound(_) | StoreError::UnknownAttribute(_) | StoreError::UnknownColumn { .. } => EXIT_QUERY,
        StoreError::Codec(_) => EXIT_CODEC,
        _ => EXIT_FAILURE,
    };
    CliError::new(code, e.to_string())
}

fn engine_error(e: EngineError) -> CliError {
    match e {
        EngineError::Store(s) => store_error(s),
        EngineError::Program { .. } => CliError::new(EXIT_PROGRAM, e.to_string()),
        EngineError::UnknownDirection(_) | EngineError::UnknownVertex { .. } => CliError::new(EXIT_QUERY, e.to_string()),
        EngineError::Config(_) => CliError::new(EXIT_INPUT, e.to_string()),
    }
}

fn algorithm_error(e: AlgorithmError) -> CliError {
    match e {
        AlgorithmError::Engine(e) => engine_error(e),
        AlgorithmError::NegativeWeight { .. } | AlgorithmError::EmptyGraph => CliError::new(EXIT_PROGRAM, e.to_string()),
        AlgorithmError::InvalidParameter(_) => CliError::new(EXIT_INPUT, e.to_string()),
        AlgorithmError::UnknownSource(_)
        | AlgorithmError::UnknownAttribute(_)
        | AlgorithmError::UnknownWeightColumn(_)
        | AlgorithmError::BadPredicate(_) => CliError::new(EXIT_QUERY, e.to_string()),
    }
}

/// Parses `args` (program name first) and runs the command, writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_INPUT;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Ingest(args) => ingest(cli, args, out),
        Command::Query(q) => query(cli, q, out),
        Command::Run(r) => run_algorithm(cli, r, out, err),
        Command::Bench(b) => bench(b, out),
        Command::Stats => stats(cli, out),
    }
}

fn open_graph(cli: &Cli) -> Result<Graph, CliError> {
    let id = cli.graph.as_deref().ok_or_else(|| CliError::new(EXIT_INPUT, "--graph is required"))?;
    Graph::open_local(&cli.root, id).map_err(store_error)
}

fn view<'g>(cli: &Cli, graph: &'g Graph) -> GraphView<'g> {
    match cli.at {
        Some(t) => graph.at(t),
        None => graph.view(TimeRange::ALL),
    }
}

fn read_lines(path: &Path) -> Result<impl Iterator<Item = (usize, std::io::Result<String>)>, CliError> {
    let file = File::open(path).map_err(|e| CliError::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    Ok(BufReader::new(file).lines().enumerate().map(|(i, l)| (i + 1, l)))
}

fn is_skipped(line: &str) -> bool {
    line.trim().is_empty() || line.starts_with('#')
}

/// Parses one edge line against the schema.
pub fn parse_edge_line(line: &str, schema: &GraphSchema) -> Result<Edge, String> {
    let fields: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
    if fields.len() < 4 {
        return Err(format!("expected at least 4 tab-separated fields, found {}", fields.len()));
    }
    let src = fields[0].parse::<VertexId>().map_err(|e| format!("src {:?}: {e}", fields[0]))?;
    let dst = fields[1].parse::<VertexId>().map_err(|e| format!("dst {:?}: {e}", fields[1]))?;
    let edge_type = fields[2];
    let ts = fields[3].parse::<Timestamp>().map_err(|e| format!("timestamp {:?}: {e}", fields[3]))?;
    let columns = schema.edge_columns(edge_type).ok_or_else(|| format!("unknown edge type {edge_type:?}"))?;
    let cells = &fields[4..];
    if cells.len() != columns.len() {
        return Err(format!("edge type {edge_type:?} takes {} attributes, found {}", columns.len(), cells.len()));
    }
    let attributes = columns
        .iter()
        .zip(cells)
        .map(|(c, cell)| c.ty.parse_value(cell).ok_or_else(|| format!("column {}: {cell:?} is not a {}", c.col, c.ty)))
        .collect::<Result<_, _>>()?;
    Ok(Edge::new(src, dst, edge_type, ts, attributes))
}

/// Parses one `vertex<TAB>attr<TAB>timestamp<TAB>value` line.
pub fn parse_vertex_line(line: &str, schema: &GraphSchema) -> Result<VertexUpdate, String> {
    let fields: Vec<&str> = line.trim_end_matches('\r').splitn(4, '\t').collect();
    let [vertex, attr, ts, value] = fields[..] else {
        return Err(format!("expected 4 tab-separated fields, found {}", fields.len()));
    };
    let vertex = vertex.parse::<VertexId>().map_err(|e| format!("vertex {vertex:?}: {e}"))?;
    let def = schema.vertex_attr(attr).ok_or_else(|| format!("unknown vertex attribute {attr:?}"))?;
    let timestamp = ts.parse::<Timestamp>().map_err(|e| format!("timestamp {ts:?}: {e}"))?;
    let value = def.ty.parse_value(value).ok_or_else(|| format!("{value:?} is not a {}", def.ty))?;
    Ok(VertexUpdate { vertex, attr: attr.to_owned(), timestamp, value })
}

fn ingest(cli: &Cli, args: &IngestArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let input = |m: String| CliError::new(EXIT_INPUT, m);
    let text = std::fs::read_to_string(&args.schema).map_err(|e| input(format!("{}: {e}", args.schema.display())))?;
    let mut schema: GraphSchema =
        serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", args.schema.display())))?;
    if let Some(id) = &cli.graph {
        schema.graph_id = id.clone();
    }
    let defaults = PartitionLayout::new(args.n, args.vertex_partitions).map_err(|e| input(e.to_string()))?;
    let layout = PartitionLayout::with_seeds(
        args.n,
        args.vertex_partitions,
        args.row_seed.unwrap_or(defaults.row_seed),
        args.col_seed.unwrap_or(defaults.col_seed),
    )
    .map_err(|e| input(e.to_string()))?;
    let codecs = CodecConfig {
        general: args.general,
        block_target_bytes: args.block_bytes,
        struct_index: args.index,
        bloom_fp: args.bloom_fp,
    };
    std::fs::create_dir_all(&cli.root)?;
    let backend: Arc<dyn StorageBackend> = Arc::new(LocalFs::new(&cli.root));
    let mut writer = GraphWriter::create(backend, schema, layout, codecs).map_err(|e| match e {
        StoreError::Io(e) => CliError::from(e),
        other => input(other.to_string()),
    })?;

    let mut input_bytes = 0u64;
    for path in &args.inputs {
        for (n, line) in read_lines(path)? {
            let line = line.map_err(|e| input(format!("{}:{n}: {e}", path.display())))?;
            input_bytes += line.len() as u64 + 1;
            if is_skipped(&line) {
                continue;
            }
            let edge = parse_edge_line(&line, writer.schema()).map_err(|m| input(format!("{}:{n}: {m}", path.display())))?;
            writer.add_edge(edge).map_err(|v| input(format!("{}:{n}: {v}", path.display())))?;
        }
    }
    if let Some(path) = &args.vertex_attrs {
        for (n, line) in read_lines(path)? {
            let line = line.map_err(|e| input(format!("{}:{n}: {e}", path.display())))?;
            input_bytes += line.len() as u64 + 1;
            if is_skipped(&line) {
                continue;
            }
            let update =
                parse_vertex_line(&line, writer.schema()).map_err(|m| input(format!("{}:{n}: {m}", path.display())))?;
            writer.add_vertex_update(update).map_err(|v| input(format!("{}:{n}: {v}", path.display())))?;
        }
    }
    let summary = writer.finish().map_err(store_error)?;
    writeln!(out, "edges={} vertices={}", summary.edges, summary.vertices)?;
    for p in &summary.edge_partitions {
        writeln!(out, "partition\tdt={}\ttype={}\tpid={}\tedges={}\tbytes={}", p.date, p.edge_type, p.pid, p.edges, p.file_bytes)?;
    }
    for (vpid, bytes) in summary.vertex_partitions.iter().enumerate() {
        writeln!(out, "vertex_partition\tvpid={vpid}\tbytes={bytes}")?;
    }
    writeln!(
        out,
        "input_bytes={input_bytes} raw_bytes={} encoded_bytes={} stored_bytes={}",
        summary.raw_bytes(),
        summary.encoded_bytes(),
        summary.file_bytes()
    )?;
    Ok(())
}

fn direction(s: &str) -> Result<Direction, CliError> {
    s.parse().map_err(engine_error)
}

fn check_known(graph: &Graph, ids: &[VertexId]) -> Result<(), CliError> {
    let known = graph.known_vertices(ids).map_err(store_error)?;
    match ids.iter().find(|id| !known.contains(id)) {
        Some(id) => Err(CliError::new(EXIT_QUERY, format!("unknown vertex {id}"))),
        None => Ok(()),
    }
}

fn query(cli: &Cli, q: &QueryCommand, out: &mut dyn Write) -> Result<(), CliError> {
    let graph = open_graph(cli)?;
    let view = view(cli, &graph);
    match q {
        QueryCommand::Khop { seeds, k, direction: dir, exact } => {
            let opts = TraverseOptions { direction: direction(dir)?, workers: cli.workers, ..Default::default() };
            check_known(&graph, seeds)?;
            let ids: Vec<VertexId> = if *exact {
                engine::traverse(view, seeds, *k, opts).map_err(engine_error)?.into_iter().collect()
            } else {
                algorithms::k_degree_query(view, seeds, *k, opts).map_err(algorithm_error)?
            };
            for id in ids {
                writeln!(out, "{id}")?;
            }
        }
        QueryCommand::NeighborsFiltered { seeds, predicate, direction: dir } => {
            let opts = TraverseOptions { direction: direction(dir)?, workers: cli.workers, ..Default::default() };
            let predicate: VertexPredicate = predicate.parse().map_err(algorithm_error)?;
            check_known(&graph, seeds)?;
            let counts = algorithms::filtered_neighbor_count(view, seeds, &predicate, opts).map_err(algorithm_error)?;
            for (seed, count) in counts {
                writeln!(out, "{seed}\t{count}")?;
            }
        }
        QueryCommand::AttributeAt { vertex, attr } => {
            if graph.schema().vertex_attr(attr).is_none() {
                return Err(CliError::new(EXIT_QUERY, format!("unknown vertex attribute {attr:?}")));
            }
            check_known(&graph, &[*vertex])?;
            match view.attribute_at(*vertex, attr).map_err(store_error)? {
                Some(v) => writeln!(out, "{v}")?,
                None => writeln!(out, "absent")?,
            }
        }
    }
    Ok(())
}

fn write_rows(path: Option<&Path>, out: &mut dyn Write, rows: impl Iterator<Item = String>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut f = std::io::BufWriter::new(File::create(p)?);
            for r in rows {
                writeln!(f, "{r}")?;
            }
            f.flush()?;
        }
        None => {
            for r in rows {
                writeln!(out, "{r}")?;
            }
        }
    }
    Ok(())
}

fn write_stats(stats: &RunStats, to: &mut dyn Write) -> Result<(), CliError> {
    writeln!(
        to,
        "supersteps={} messages={} vertices={} blocks_read={} blocks_skipped={} bytes_read={}",
        stats.supersteps,
        stats.messages_sent,
        stats.vertices,
        stats.blocks.blocks_read,
        stats.blocks.blocks_skipped,
        stats.blocks.bytes_read
    )?;
    Ok(())
}

fn run_algorithm(cli: &Cli, r: &RunCommand, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let graph = open_graph(cli)?;
    let view = view(cli, &graph);
    // Stats go next to the rows when rows go to a file, else to stderr.
    let (stats, output) = match r {
        RunCommand::Pagerank { damping, max_iterations, tolerance, multiplicity, output } => {
            let config = PageRankConfig {
                damping: *damping,
                max_iterations: *max_iterations,
                tolerance: *tolerance,
                workers: cli.workers,
                multiplicity: *multiplicity,
            };
            let result = algorithms::pagerank(view, config).map_err(algorithm_error)?;
            write_rows(output.as_deref(), out, result.ranks.iter().map(|(v, r)| format!("{v}\t{r}")))?;
            (result.stats, output)
        }
        RunCommand::Sssp { source, weight, output } => {
            let config = SsspConfig { weight: weight.clone(), workers: cli.workers, max_supersteps: None };
            let result = algorithms::sssp(view, *source, &config).map_err(algorithm_error)?;
            let rows = result.distances.iter().map(|(v, d)| {
                if d.is_finite() {
                    format!("{v}\t{d}")
                } else {
                    format!("{v}\tinf")
                }
            });
            write_rows(output.as_deref(), out, rows)?;
            (result.stats, output)
        }
    };
    write_stats(&stats, if output.is_some() { out } else { err })
}

fn bench(b: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let codec = |m: String| CliError::new(EXIT_CODEC, m);
    let data = match (&b.input, &b.synthetic) {
        (Some(path), _) => {
            let ty = match b.r#type.as_str() {
                "int" => ColumnType::Int,
                "long" => ColumnType::Long,
                "double" => ColumnType::Double,
                "string" => ColumnType::Str,
                "u64" => ColumnType::U64,
                other => return Err(CliError::new(EXIT_INPUT, format!("unknown column type {other:?}"))),
            };
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
            parse_column(&text, ty).map_err(|m| CliError::new(EXIT_INPUT, format!("{}: {m}", path.display())))?
        }
        (None, Some(kind)) => {
            let kind: SyntheticKind = kind.parse().map_err(|m: String| CliError::new(EXIT_INPUT, m))?;
            synthetic_column(kind, b.count, b.seed)
        }
        (None, None) => return Err(CliError::new(EXIT_INPUT, "bench needs --input or --synthetic")),
    };
    let specs: Vec<BenchSpec> = if b.codecs.is_empty() {
        default_specs(data.column_type())
    } else {
        b.codecs.iter().map(|s| s.parse::<BenchSpec>().map_err(codec)).collect::<Result<_, _>>()?
    };
    let rows = bench_codecs(&data, &specs, b.block_values).map_err(|e| codec(e.to_string()))?;
    if b.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&rows).map_err(|e| CliError::new(EXIT_FAILURE, e.to_string()))?)?;
    } else {
        write!(out, "{}", render_table(&rows))?;
    }
    Ok(())
}

fn stats(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let graph = open_graph(cli)?;
    let view = view(cli, &graph);
    let m = graph.manifest();
    writeln!(out, "graph\t{}", m.graph_id)?;
    writeln!(out, "format_version\t{}", m.format_version)?;
    writeln!(out, "grid\t{}x{}", m.layout.n, m.layout.n)?;
    writeln!(out, "vertex_partitions\t{}", m.layout.vertex_partitions)?;
    writeln!(out, "general_codec\t{}", m.codecs.general.name())?;
    writeln!(out, "struct_index\t{:?}", m.codecs.struct_index)?;
    writeln!(out, "edge_types\t{}", m.schema.edge_types.keys().cloned().collect::<Vec<_>>().join(","))?;
    writeln!(out, "vertex_attrs\t{}", m.schema.vertex_attrs.iter().map(|c| c.col.as_str()).collect::<Vec<_>>().join(","))?;
    let mut dates: Vec<&str> = m.edge_dirs.iter().map(|d| d.date.as_str()).collect();
    dates.dedup();
    writeln!(out, "days\t{}", dates.len())?;
    if let (Some(first), Some(last)) = (dates.first(), dates.last()) {
        writeln!(out, "date_range\t{first}..{last}")?;
    }
    let pids = graph.edge_partitions();
    writeln!(out, "edge_partitions\t{}", pids.len())?;
    let mut edges = 0u64;
    for &pid in &pids {
        view.scan_partition(pid, &EdgeFilter::All, &ScanOptions::structure_only(), |b| {
            edges += b.len() as u64
        })
        .map_err(store_error)?;
    }
    writeln!(out, "edges\t{edges}")?;
    writeln!(out, "vertices\t{}", view.vertices().map_err(store_error)?.len())?;
    Ok(())
}
