use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use blom_core::bench::{demo_worked_example, rows_to_csv, run_key_agreement_exchange, BenchPlan};
use blom_core::modified::{
    build_modified_adjacency, select_public_matrix, setup_modified_scheme, NetworkTopology,
};
use blom_core::original::setup_original_scheme;
use blom_core::security::{check_lambda_secure, collude};
use blom_core::{Field, KeyMaterial, Params, Public, SecretSource};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "blom", version, about = "Blom key pre-distribution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Vandermonde,
    Adjacency,
}

#[derive(Subcommand)]
enum Command {
    /// Run the six-node worked example and check every golden value.
    Demo,
    /// Provision every node of a topology and write node_<id>.json files.
    Keygen {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        lambda: usize,
        #[arg(long)]
        q: u64,
        #[arg(long, value_enum)]
        scheme: Scheme,
        /// Seed for the secret matrix.
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate the column exchange between two nodes and report both keys.
    Agree {
        #[arg(long)]
        material: PathBuf,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
    },
    /// Run an experiment plan and write the comparison CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check that every lambda+1 columns of the adjacency public matrix are independent.
    VerifySecurity {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        lambda: usize,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 100_000)]
        subset_limit: u64,
    },
    /// Pool the private rows of the listed nodes and try to recover the secret matrix.
    Attack {
        #[arg(long)]
        material: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        compromise: Vec<usize>,
    },
}

/// Whether the checked property held.
enum Verdict {
    Holds,
    Fails,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Verdict::Holds) => ExitCode::SUCCESS,
        Ok(Verdict::Fails) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> anyhow::Result<Verdict> {
    match command {
        Command::Demo => {
            let report = demo_worked_example()?;
            print!("{report}");
            Ok(verdict(report.passed()))
        }
        Command::Keygen {
            topology,
            lambda,
            q,
            scheme,
            seed,
            out,
        } => {
            let topo = read_topology(&topology)?;
            let field = Field::new(q)?;
            let secret = SecretSource::Seeded(seed);
            let inst = match scheme {
                Scheme::Vandermonde => {
                    setup_original_scheme(Params::new(field, topo.node_count(), lambda)?, secret)?
                }
                Scheme::Adjacency => setup_modified_scheme(&topo, lambda, &field, secret)?,
            };
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            for m in &inst.nodes {
                let path = out.join(format!("node_{}.json", m.node_id));
                fs::write(&path, m.to_json() + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
            println!("wrote {} nodes to {}", inst.nodes.len(), out.display());
            Ok(Verdict::Holds)
        }
        Command::Agree { material, i, j } => {
            let nodes = read_material(&material)?;
            let outcome = run_key_agreement_exchange(&nodes, i, j)?;
            println!("K({i},{j}) = {}", outcome.key_i);
            println!("K({j},{i}) = {}", outcome.key_j);
            println!("agreed: {}", outcome.agreed);
            Ok(verdict(outcome.agreed))
        }
        Command::Bench { config, out } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let plan: BenchPlan =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", config.display()))?;
            for e in &plan.experiments {
                e.validate()?;
            }
            let rows = plan.run()?;
            fs::write(&out, rows_to_csv(&rows)?).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {} rows to {}", rows.len(), out.display());
            Ok(Verdict::Holds)
        }
        Command::VerifySecurity {
            topology,
            lambda,
            q,
            subset_limit,
        } => {
            let topo = read_topology(&topology)?;
            let field = Field::new(q)?;
            let public = adjacency_public(&topo, lambda, &field)?;
            let report = check_lambda_secure(&public, lambda, &field, subset_limit);
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(verdict(report.independent))
        }
        Command::Attack { material, compromise } => {
            let nodes = read_material(&material)?;
            let result = collude(&nodes, &compromise)?;
            println!("{}", serde_json::to_string_pretty(&result)?);
            Ok(Verdict::Holds)
        }
    }
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Holds
    } else {
        Verdict::Fails
    }
}

fn adjacency_public(topo: &NetworkTopology, lambda: usize, field: &Field) -> anyhow::Result<Public> {
    Ok(select_public_matrix(&build_modified_adjacency(topo, field), lambda)?)
}

fn read_topology(path: &Path) -> anyhow::Result<NetworkTopology> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    NetworkTopology::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_material(dir: &Path) -> anyhow::Result<Vec<KeyMaterial>> {
    let mut nodes = Vec::new();
    let entries = fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
    for entry in entries {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            let text = fs::read_to_string(&path)?;
            let m = KeyMaterial::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
            nodes.push(m);
        }
    }
    if nodes.is_empty() {
        bail!("no key material in {}", dir.display());
    }
    nodes.sort_by_key(|m| m.node_id);
    Ok(nodes)
}
