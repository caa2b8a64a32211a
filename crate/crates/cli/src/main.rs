//! `trimtree` command-line front end.
//!
//! Exit codes: 0 success, 1 verification or validation failure, 2 usage or
//! parse error, 3 I/O error. Results go to stdout, diagnostics to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use trimtree_bench::{
    compare_variants, emit_report, run_benchmark, BenchConfig, BenchError, ReportFormat,
};
use trimtree_core::chain::{
    assemble_blocks, ingest_transactions, validate_chain, ChainError, ChainStore, Clock,
    FixedClock, SystemClock,
};
use trimtree_core::{
    detect_tamper, generate_proof, verify_proof, Digest, Error, HashMode, MerkleTree, ProofFile,
    TreeDump, TreeVariant,
};

#[derive(Parser)]
#[command(
    name = "trimtree",
    version,
    about = "Traditional and trim Merkle trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct TreeOpts {
    #[arg(long, default_value = "trim", value_parser = parse_variant)]
    variant: TreeVariant,
    /// plain reproduces bare concatenation; domsep prefixes leaves and nodes
    #[arg(long, default_value = "domsep", value_parser = parse_mode)]
    mode: HashMode,
}

#[derive(Subcommand)]
enum Command {
    /// Build a tree over a mempool file and write its dump
    Build {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        tree: TreeOpts,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write an inclusion proof for one leaf of a dumped tree
    Prove {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        index: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a proof file against a root
    Verify {
        #[arg(long)]
        proof: PathBuf,
        #[arg(long)]
        root: String,
        /// Reject the proof unless it was made under this mode
        #[arg(long, value_parser = parse_mode)]
        mode: Option<HashMode>,
        /// Reject the proof unless it was made for this variant
        #[arg(long, value_parser = parse_variant)]
        variant: Option<TreeVariant>,
    },
    /// Find leaves of a mempool that disagree with a dumped tree
    Tamper {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Assemble or validate a directory of block files
    Chain {
        #[command(subcommand)]
        action: ChainAction,
    },
    /// Structural node and hash counts for both variants over a range of n
    Compare {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long, default_value = "domsep", value_parser = parse_mode)]
        mode: HashMode,
    },
    /// Time and count both variants, writing a CSV or JSON report
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value = "csv")]
        format: ReportFormat,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "traditional,trim", value_parser = parse_variant)]
        variants: Vec<TreeVariant>,
        #[arg(long, default_value = "domsep", value_parser = parse_mode)]
        mode: HashMode,
        #[arg(long, default_value_t = 256)]
        payload_bytes: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        /// Run independent cells concurrently
        #[arg(long)]
        parallel: bool,
    },
}

#[derive(Subcommand)]
enum ChainAction {
    /// Pack a mempool into blocks appended to the store
    Assemble {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        tree: TreeOpts,
        /// Fixed header timestamp (seconds); defaults to the system clock
        #[arg(long)]
        timestamp: Option<u64>,
    },
    /// Recheck every block's Merkle root and header linkage
    Validate {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn parse_variant(s: &str) -> Result<TreeVariant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<HashMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<ChainError> for Failure {
    fn from(e: ChainError) -> Self {
        match e {
            ChainError::Io { .. } | ChainError::StoreCorrupt { .. } => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_tree(path: &Path) -> Result<MerkleTree, Failure> {
    let dump = TreeDump::from_json(&read(path)?)?;
    Ok(MerkleTree::from_dump(&dump)?)
}

fn mempool_leaves(path: &Path, mode: HashMode) -> Result<Vec<Digest>, Failure> {
    Ok(ingest_transactions(path)?
        .iter()
        .map(|tx| tx.leaf_digest(mode))
        .collect())
}

fn cmd_build(input: &Path, opts: TreeOpts, out: &Path) -> CmdResult {
    let leaves = mempool_leaves(input, opts.mode)?;
    let tree = MerkleTree::build(opts.variant, &leaves, opts.mode)?;
    write(out, &(tree.to_dump().to_json() + "\n"))?;
    let s = tree.stats();
    println!("root={}", tree.root());
    println!(
        "variant={} mode={} n={} nodes={} internal_hashes={} duplicated_pairings={} levels={}",
        opts.variant,
        opts.mode,
        s.n,
        s.total_nodes,
        s.internal_hashes,
        s.duplicated_pairings,
        s.levels
    );
    Ok(0)
}

fn cmd_prove(tree: &Path, index: usize, out: &Path) -> CmdResult {
    let tree = load_tree(tree)?;
    let proof = generate_proof(&tree, index)?;
    write(out, &(proof.to_file(tree.root()).to_json() + "\n"))?;
    println!("depth={}", proof.depth());
    Ok(0)
}

fn cmd_verify(
    proof: &Path,
    root: &str,
    mode: Option<HashMode>,
    variant: Option<TreeVariant>,
) -> CmdResult {
    let root = Digest::from_hex(root)?;
    let file = ProofFile::from_json(&read(proof)?)?;
    if let Some(mode) = mode.filter(|m| *m != file.mode) {
        return Err(Failure::Usage(format!(
            "mode mismatch: proof was made with {} but {mode} was requested",
            file.mode
        )));
    }
    if let Some(variant) = variant.filter(|v| *v != file.variant) {
        return Err(Failure::Usage(format!(
            "variant mismatch: proof is for a {} tree but {variant} was requested",
            file.variant
        )));
    }
    let outcome = verify_proof(&file.proof(), &root);
    if outcome.valid {
        println!("VALID");
        Ok(0)
    } else {
        println!("INVALID");
        eprintln!("computed root {}", outcome.computed_root);
        Ok(1)
    }
}

fn cmd_tamper(tree: &Path, input: &Path) -> CmdResult {
    let tree = load_tree(tree)?;
    let leaves = mempool_leaves(input, tree.mode())?;
    let suspects = detect_tamper(&tree, &leaves)?;
    if suspects.is_empty() {
        println!("INTACT");
        Ok(0)
    } else {
        let list: Vec<String> = suspects.iter().map(usize::to_string).collect();
        println!("TAMPERED leaves={}", list.join(","));
        Ok(1)
    }
}

fn cmd_chain_assemble(
    dir: &Path,
    input: &Path,
    opts: TreeOpts,
    timestamp: Option<u64>,
) -> CmdResult {
    let txs = ingest_transactions(input)?;
    let store = ChainStore::open(dir);
    let prev = if dir.exists() { store.tip()? } else { None };
    let clock: Box<dyn Clock> = match timestamp {
        Some(t) => Box::new(FixedClock(t)),
        None => Box::new(SystemClock),
    };
    let blocks = assemble_blocks(&txs, opts.variant, opts.mode, prev, clock.as_ref())?;
    let paths = store.append(&blocks)?;
    for (block, path) in blocks.iter().zip(&paths) {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default();
        println!(
            "{name} root={} txs={} bytes={}",
            block.header.merkle_root,
            block.transactions.len(),
            block.payload_bytes()
        );
    }
    Ok(0)
}

fn cmd_chain_validate(dir: &Path) -> CmdResult {
    let report = validate_chain(&ChainStore::open(dir))?;
    for b in &report.blocks {
        let name = b
            .path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default();
        match b.first_failure() {
            None => println!("{name} PASS"),
            Some(check) => println!("{name} FAIL {}", check.name()),
        }
    }
    Ok(if report.is_valid() { 0 } else { 1 })
}

fn cmd_compare(from: usize, to: usize, mode: HashMode) -> CmdResult {
    let table = compare_variants(from, to, mode)?;
    print!("{}", table.render());
    Ok(0)
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Build { input, tree, out } => cmd_build(&input, tree, &out),
        Command::Prove { tree, index, out } => cmd_prove(&tree, index, &out),
        Command::Verify {
            proof,
            root,
            mode,
            variant,
        } => cmd_verify(&proof, &root, mode, variant),
        Command::Tamper { tree, input } => cmd_tamper(&tree, &input),
        Command::Chain { action } => match action {
            ChainAction::Assemble {
                dir,
                input,
                tree,
                timestamp,
            } => cmd_chain_assemble(&dir, &input, tree, timestamp),
            ChainAction::Validate { dir } => cmd_chain_validate(&dir),
        },
        Command::Compare { from, to, mode } => cmd_compare(from, to, mode),
        Command::Bench {
            sizes,
            reps,
            format,
            out,
            variants,
            mode,
            payload_bytes,
            seed,
            parallel,
        } => {
            let config = BenchConfig {
                sizes,
                variants,
                mode,
                repetitions: reps,
                payload_bytes,
                seed,
                parallel,
            };
            let report = run_benchmark(&config)?;
            emit_report(&report, format, &out)?;
            println!("wrote {} rows to {}", report.samples.len(), out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
