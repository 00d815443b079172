use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use swclab_core::config::DEFAULT_CLIQUE_CAP;
use swclab_core::{AmbientNorm, DeriveMode};

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "swclab",
    version,
    about = "Finite-scale experiments on slices, James certificates, uniform convexity and tree embeddings"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Global {
    /// Worker threads; defaults to all cores. Results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Also write the result as a `path,value` CSV table.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Search-node cap for exact slice enumeration.
    #[arg(long, global = true, env = "SWCLAB_CLIQUE_CAP", default_value_t = DEFAULT_CLIQUE_CAP)]
    pub clique_cap: u64,
    /// Indent the JSON output.
    #[arg(long, global = true)]
    pub pretty: bool,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Iterate the slice derivation until the set is exhausted.
    Dz(DzArgs),
    /// Derivation by oscillation of a function instead of diameter.
    DeriveFn(DeriveFnArgs),
    /// James separation certificates.
    James {
        #[command(subcommand)]
        action: JamesCmd,
    },
    /// Modulus of convexity of a body.
    Modulus(ModulusArgs),
    /// Checks built on the modulus of convexity.
    UcCheck {
        #[command(subcommand)]
        action: UcCmd,
    },
    /// Generate a metric graph.
    Graph {
        #[command(subcommand)]
        action: GraphCmd,
    },
    /// Tree embeddings and their distortion.
    Embed {
        #[command(subcommand)]
        action: EmbedCmd,
    },
    /// Set families in c_0.
    Family {
        #[command(subcommand)]
        action: FamilyCmd,
    },
    /// Write canonical fixtures, e.g. `sb(3)`, `blocks(4)`, `schreier(12)`, `l2ball-net(2,64,7)`.
    Fixtures {
        #[arg(required = true)]
        names: Vec<String>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct DeriveCommon {
    /// Point set JSON.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value = "exact", value_parser = parse_mode)]
    pub mode: DeriveMode,
    #[arg(long, default_value_t = 64)]
    pub max_steps: usize,
    /// JSON array of sweep directions.
    #[arg(long)]
    pub directions: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DzArgs {
    #[command(flatten)]
    pub common: DeriveCommon,
}

#[derive(Debug, Args, Serialize)]
pub struct DeriveFnArgs {
    #[command(flatten)]
    pub common: DeriveCommon,
    /// JSON array with one value per point.
    #[arg(
        long,
        conflicts_with = "distance_to",
        required_unless_present = "distance_to"
    )]
    pub values: Option<PathBuf>,
    /// Use `f = dist(., T)` for the point set `T` in this file.
    #[arg(long)]
    pub distance_to: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JamesCmd {
    /// Check the pattern `x*_n(x_k) = theta [n <= k]` and the dual norms.
    Verify {
        /// James system JSON.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Solve for functionals realizing the pattern.
    Search {
        /// Point set JSON.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        theta: f64,
        /// Write the James system here when the search succeeds.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Prefix/suffix hull distances of an ordered point set.
    Separate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Cube certificate for `2^n` points in cube order.
    Cube {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        theta: f64,
    },
    /// Restrict to the annihilator of some functionals and separate.
    Subspace {
        #[arg(long)]
        input: PathBuf,
        /// JSON array of functionals.
        #[arg(long)]
        constraints: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct BodyArgs {
    /// Convex body JSON.
    #[arg(long, conflicts_with = "ball", required_unless_present = "ball")]
    pub body: Option<PathBuf>,
    /// Unit ball of a norm instead of a body file.
    #[arg(long, value_parser = parse_norm)]
    pub ball: Option<AmbientNorm>,
    /// Dimension; required with `--ball`.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Ambient norm; defaults to the body's own.
    #[arg(long, value_parser = parse_norm)]
    pub ambient: Option<AmbientNorm>,
    /// Sample count for sampled moduli.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Closed,
    Sampled,
}

#[derive(Debug, Args, Serialize)]
pub struct ModulusArgs {
    #[command(flatten)]
    pub body: BodyArgs,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Closed)]
    pub method: MethodArg,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UcCmd {
    /// `|(x+y)/2|_K <= 1 - delta(||x-y||)` on given or seeded random pairs.
    Midpoint {
        #[command(flatten)]
        body: BodyArgs,
        /// JSON array of `[x, y]` pairs; random pairs when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// The sign-sum bound for a finite sequence.
    Signsum {
        #[command(flatten)]
        body: BodyArgs,
        /// JSON array of vectors.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// One derivation step on a net, against `1 - delta(eps) + mesh`.
    Shrink {
        #[command(flatten)]
        body: BodyArgs,
        /// Point set JSON.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value = "exact", value_parser = parse_mode)]
        mode: DeriveMode,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct GraphArgs {
    /// Height or level.
    #[arg(long, visible_alias = "k")]
    pub n: usize,
    /// Include vertices and edges in the output.
    #[arg(long)]
    pub full: bool,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphCmd {
    Tree {
        #[command(flatten)]
        graph: GraphArgs,
        /// Compare BFS distances with the prefix formula.
        #[arg(long)]
        check_formula: bool,
    },
    Diamond {
        #[command(flatten)]
        graph: GraphArgs,
    },
    Laakso {
        #[command(flatten)]
        graph: GraphArgs,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct EmbedOut {
    /// Write the embedding JSON here.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbedCmd {
    /// Bourgain's map of `T_n` from a James system.
    Bourgain {
        /// James system JSON.
        #[arg(long, conflicts_with = "sb", required_unless_present = "sb")]
        input: Option<PathBuf>,
        /// Use `SB(2^{n+1}-1)` with coordinate functionals.
        #[arg(long)]
        sb: bool,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: EmbedOut,
    },
    /// Barycentric gluing of Bourgain maps over disjoint blocks.
    Baudier {
        /// JSON array of James systems; built-in SB blocks when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        depth: usize,
        #[command(flatten)]
        out: EmbedOut,
    },
    /// Fork pruning of a tree embedding.
    Prune {
        /// Embedding JSON.
        #[arg(long)]
        input: PathBuf,
        /// Separation constant; defaults to the measured one.
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        /// Sample count when the body has no closed-form modulus.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[command(flatten)]
        out: EmbedOut,
    },
    /// Distortion report of an embedding.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyCmd {
    /// Schreier family on `[1..n]`.
    Schreier {
        #[arg(long)]
        n: usize,
        #[command(subcommand)]
        then: Option<FamilyAction>,
    },
    /// Block family up to `n_max`.
    Blocks {
        #[arg(long)]
        n_max: usize,
        #[command(subcommand)]
        then: Option<FamilyAction>,
    },
    /// All subsets of `[1..n]` with at most `p` elements.
    Bounded {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[command(subcommand)]
        then: Option<FamilyAction>,
    },
    /// Trace count of a family file on `A`.
    Trace {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        a: SubsetArg,
    },
    /// Polynomial trace-growth test of a family file.
    Vctest {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        test: VcTestArgs,
    },
    /// Largest shattered subset of `A` for a family file.
    Vcextract {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        extract: VcExtractArgs,
    },
    /// Functional slicing off one block point.
    Slice {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n_max: u32,
    },
    /// Characteristic vectors of a family file.
    Points {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "linf", value_parser = parse_norm)]
        norm: AmbientNorm,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct SubsetArg {
    /// Comma-separated subset of the universe.
    #[arg(long = "A", value_delimiter = ',', required = true)]
    pub a: Vec<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct VcTestArgs {
    #[arg(long)]
    pub p: u32,
    #[arg(long = "C", default_value_t = 1.0)]
    pub c: f64,
    /// Test all subsets of the universe with at most this many elements.
    #[arg(long, default_value_t = 8)]
    pub max_size: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct VcExtractArgs {
    #[command(flatten)]
    pub a: SubsetArg,
    /// Cap on subset checks.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: u64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyAction {
    Trace(SubsetArg),
    Vctest(VcTestArgs),
    Vcextract(VcExtractArgs),
    Points {
        #[arg(long, default_value = "linf", value_parser = parse_norm)]
        norm: AmbientNorm,
    },
}

fn parse_norm(s: &str) -> Result<AmbientNorm, String> {
    s.parse().map_err(|e: swclab_core::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<DeriveMode, String> {
    s.parse().map_err(|e: swclab_core::Error| e.to_string())
}
