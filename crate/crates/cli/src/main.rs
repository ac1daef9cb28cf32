//! Command-line front end. Every verb prints one JSON document on stdout
//! and exits 0 (affirmative), 1 (negative), 2 (unknown or out of budget)
//! or 3 (bad input).

mod commands;
mod io;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "deltametric", version, about = "Exact tools for distance value sets and ordered metric spaces")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args, Clone, Copy)]
pub struct Budget {
    /// Largest space a construction may produce.
    #[arg(long, default_value_t = 64)]
    pub max_points: usize,
    /// Largest number of (substructure, extension) pairs examined.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_pairs: u128,
}

#[derive(Subcommand)]
pub enum Verb {
    /// Fragment of {p*alpha + q} with rational p, q of bounded height.
    GenDvs {
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 3)]
        height: u64,
        #[arg(long)]
        bound: String,
    },
    /// Close a set under truncated sums, or with --check report the first
    /// missing sum.
    Close {
        #[arg(long)]
        delta: String,
        /// Cap for bounded sets, horizon for unbounded ones (default: cap or max).
        #[arg(long)]
        bound: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        limit: usize,
        #[arg(long)]
        check: bool,
    },
    /// Whether x,y,z form a triangle of the set.
    CheckTriangle {
        #[arg(long)]
        delta: String,
        #[arg(long)]
        triple: String,
    },
    /// Scaling witness between two sets, or with --map a triangle-pattern
    /// comparison of the given value bijection.
    CheckEquiv {
        #[arg(long)]
        d1: String,
        #[arg(long)]
        d2: String,
        #[arg(long)]
        map: Option<String>,
    },
    /// GL2(Q) orbit test for two quadratic surds, or with --matrix apply a
    /// matrix "a,b,c,d" to alpha.
    Gl2 {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: Option<String>,
        #[arg(long)]
        matrix: Option<String>,
        #[arg(long, default_value_t = 10)]
        search_height: u64,
    },
    /// Free amalgam of two spaces over "b=c,..." label pairs.
    Amalgamate {
        #[arg(long)]
        b: String,
        #[arg(long)]
        c: String,
        #[arg(long, default_value = "")]
        overlap: String,
        #[arg(long)]
        cap: Option<String>,
    },
    /// One round of one-point extensions over substructures of size <= k.
    Saturate {
        #[arg(long)]
        space: String,
        #[arg(long)]
        delta: String,
        #[arg(short, long)]
        k: usize,
        #[command(flatten)]
        budget: Budget,
    },
    /// Report the one-point extensions a space fails to realize.
    CheckExtension {
        #[arg(long)]
        space: String,
        #[arg(long)]
        delta: String,
        #[arg(short, long)]
        k: usize,
        /// Restrict substructures to these labels.
        #[arg(long)]
        within: Option<String>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Add points y' close to the images of a partial isometry.
    Perturb {
        #[arg(long)]
        space: String,
        #[arg(long)]
        delta: String,
        #[arg(long)]
        map: String,
        #[arg(long)]
        eps: String,
    },
    /// One forth (or --back) step of back-and-forth.
    ExtendIsometry {
        #[arg(long)]
        space: String,
        #[arg(long, default_value = "")]
        map: String,
        #[arg(long)]
        point: String,
        #[arg(long)]
        back: bool,
    },
    /// Erdős–Rado arrow C -> (B)^A_k.
    CheckArrow {
        #[arg(long)]
        c: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        a: String,
        #[arg(short, long)]
        k: usize,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u128,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    CheckRigid {
        #[arg(long)]
        space: String,
    },
    EncodeCode {
        #[arg(long)]
        delta: String,
    },
    CheckCode {
        #[arg(long)]
        code: String,
    },
    CheckSim {
        #[arg(long)]
        c: String,
        #[arg(long)]
        d: String,
    },
    CheckApprox {
        #[arg(long)]
        c: String,
        #[arg(long)]
        d: String,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u128,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// The ternary triangle relation of a set; with --other, an isomorphism
    /// to another set's relation.
    TriangleStructure {
        #[arg(long)]
        delta: String,
        #[arg(long)]
        other: Option<String>,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u128,
    },
    EncodeModel {
        #[arg(long)]
        delta: String,
        /// Comma-separated positive rationals (default: built-in sample).
        #[arg(long)]
        sample: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        limit: usize,
    },
    CheckTheory {
        #[arg(long)]
        model: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Yes = 0,
    No = 1,
    Unknown = 2,
    BadInput = 3,
}

pub struct Output {
    pub exit: Exit,
    pub body: Value,
}

impl Output {
    pub fn new(exit: Exit, body: Value) -> Self {
        Output { exit, body }
    }

    pub fn yes(body: Value) -> Self {
        Self::new(Exit::Yes, body)
    }

    pub fn verdict(ok: bool, body: Value) -> Self {
        Self::new(if ok { Exit::Yes } else { Exit::No }, body)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Exit::BadInput } else { Exit::Yes };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let out = match commands::run(cli.verb) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            let exit = match e {
                deltametric::Error::BudgetExceeded { .. } => Exit::Unknown,
                _ => Exit::BadInput,
            };
            let status = if exit == Exit::Unknown { "Unknown" } else { "Error" };
            Output::new(exit, json!({"status": status, "error": e.to_string()}))
        }
    };
    println!("{}", serde_json::to_string(&out.body).expect("serializable"));
    ExitCode::from(out.exit as u8)
}
