// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

//! `tangleshare`: one binary over the whole stack — ledger, masked
//! channels, object store, feature contracts, micropayments, key release,
//! location proofs and the latency benchmark.
//!
//! Exit codes: 0 success, 1 domain error (denied, unknown, invalid), 2
//! usage error.

mod commands;
mod error;
mod workspace;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tangleshare::ledger::NetworkConfig;

use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "tangleshare", version, about = "Tangle-backed data sharing with paid access control")]
struct Cli {
    /// Workspace directory (created by `init`).
    #[arg(long, global = true, env = workspace::WORKSPACE_ENV, default_value = ".tangleshare")]
    workspace: PathBuf,
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NetworkArg {
    /// Trivial proof-of-work, for local experiments.
    Desk,
    /// Development-network difficulty.
    Devnet,
    /// Production difficulty.
    Mainnet,
}

impl NetworkArg {
    fn config(self) -> NetworkConfig {
        match self {
            NetworkArg::Desk => NetworkConfig::desk(),
            NetworkArg::Devnet => NetworkConfig::devnet(),
            NetworkArg::Mainnet => NetworkConfig::mainnet(),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PartyArg {
    Payer,
    Payee,
}

#[derive(Subcommand)]
enum Command {
    /// Create a workspace: token treasury, empty ledger, object store.
    Init {
        /// Deterministic seed: 64 hex digits used verbatim, any other
        /// string hashed. Omit for a random seed.
        #[arg(long)]
        seed: Option<String>,
        /// Proof-of-work difficulty preset.
        #[arg(long, value_enum, default_value_t = NetworkArg::Desk)]
        network: NetworkArg,
    },
    /// Create and inspect local users.
    User {
        #[command(subcommand)]
        cmd: UserCmd,
    },
    /// Publish a datum (or file) on one of a user's feature channels.
    Publish(PublishArgs),
    /// Browse catalogs and purchase bundle access.
    Market {
        #[command(subcommand)]
        cmd: MarketCmd,
    },
    /// Fetch purchased data, requesting decryption keys per message.
    Fetch(FetchArgs),
    /// Deterministic publish-latency simulations.
    Bench {
        #[command(subcommand)]
        cmd: BenchCmd,
    },
    /// Location certificates and zero-knowledge area proofs.
    Pol {
        #[command(subcommand)]
        cmd: PolCmd,
    },
    /// Off-chain micropayment channels settled on the token ledger.
    Paychan {
        #[command(subcommand)]
        cmd: PaychanCmd,
    },
    /// Key-release service over TCP.
    Authsvc {
        #[command(subcommand)]
        cmd: AuthsvcCmd,
    },
    /// Workspace maintenance.
    Workspace {
        #[command(subcommand)]
        cmd: WorkspaceCmd,
    },
}

#[derive(Subcommand)]
enum UserCmd {
    /// Derive keys, fund the address and deploy an empty feature contract.
    New {
        name: String,
        /// Tokens granted from the treasury.
        #[arg(long, default_value_t = workspace::DEFAULT_GRANT)]
        grant: u64,
    },
    /// Show a user's address, balance, contract and channels.
    Show {
        name: String,
        /// Also print the signing seed and master key.
        #[arg(long)]
        reveal: bool,
    },
}

#[derive(Args)]
struct PublishArgs {
    /// Publishing user.
    user: String,
    /// Feature name; first publish creates the channel and catalog bundle.
    feature: String,
    /// Datum to publish (UTF-8). Mutually exclusive with --file.
    datum: Option<String>,
    /// Read the payload from a file instead.
    #[arg(long, conflicts_with = "datum")]
    file: Option<PathBuf>,
    /// Price of the catalog bundle created on first publish.
    #[arg(long, default_value_t = workspace::DEFAULT_PRICE)]
    price: u64,
    /// Attach a location certificate (binary file) as a second message.
    #[arg(long)]
    cert: Option<PathBuf>,
}

#[derive(Subcommand)]
enum MarketCmd {
    /// List the catalog of a provider (user name or hex address).
    List { owner: String },
    /// Purchase bundle access; the price moves buyer → provider.
    Buy {
        buyer: String,
        owner: String,
        bundle: u64,
    },
}

#[derive(Args)]
struct FetchArgs {
    /// Buying user (must hold a grant for the bundle).
    buyer: String,
    /// Provider (user name or hex address).
    owner: String,
    /// Bundle id within the provider's catalog.
    bundle: u64,
    /// Write each decrypted message to <out>/msg-<n>.bin.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Request keys from a remote service (host:port) instead of in-process.
    #[arg(long)]
    remote: Option<String>,
}

#[derive(Subcommand)]
enum BenchCmd {
    /// List the built-in scenario presets.
    List,
    /// Run a built-in preset.
    Preset {
        name: String,
        /// Override the RNG seed of every scenario in the preset.
        #[arg(long)]
        seed: Option<u64>,
        /// Write per-message and histogram CSV files into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run scenarios from a JSON file (one scenario or an array).
    File {
        path: PathBuf,
        /// Write per-message and histogram CSV files into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PolCmd {
    /// Register an on-road-device key in the workspace PKI.
    RegisterOrd { name: String },
    /// Issue a signed location certificate to a file.
    Issue {
        /// Registered device that vouches for the position.
        device: String,
        #[arg(long)]
        lat: f64,
        #[arg(long)]
        lon: f64,
        /// Claimed communication range in metres.
        #[arg(long, default_value_t = 50)]
        range: u32,
        /// Certified party (user name or hex address); default: treasury.
        #[arg(long)]
        prover: Option<String>,
        /// Logical timestamp embedded in the certificate.
        #[arg(long, default_value_t = 0)]
        time: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Commit to a disc-shaped area as a Merkle root over grid cells.
    Area {
        #[arg(long)]
        lat: f64,
        #[arg(long)]
        lon: f64,
        /// Area radius in metres.
        #[arg(long)]
        radius: u32,
        /// Grid cell size in metres.
        #[arg(long, default_value_t = 100)]
        cell: u32,
        /// Epoch salt (32 hex digits); derived from the workspace seed if omitted.
        #[arg(long)]
        salt: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Prove a position lies inside a committed area.
    Prove {
        /// Area commitment JSON written by `pol area`.
        #[arg(long)]
        area: PathBuf,
        #[arg(long)]
        lat: f64,
        #[arg(long)]
        lon: f64,
        /// Blinding nonce (64 hex digits); derived if omitted.
        #[arg(long)]
        nonce: Option<String>,
        #[arg(long)]
        proof_out: PathBuf,
        #[arg(long)]
        opening_out: PathBuf,
    },
    /// Verify a certificate, or an area proof (path-only without opening).
    Verify {
        /// Location certificate file.
        #[arg(long, conflicts_with_all = ["area", "proof", "opening"])]
        cert: Option<PathBuf>,
        #[arg(long, requires = "proof")]
        area: Option<PathBuf>,
        #[arg(long, requires = "area")]
        proof: Option<PathBuf>,
        /// Opening for designated-verifier checks; omit to verify the
        /// Merkle path only.
        #[arg(long, requires = "proof")]
        opening: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PaychanCmd {
    /// Escrow a deposit from payer to a new channel.
    Open {
        payer: String,
        /// Payee (user name or hex address).
        payee: String,
        deposit: u64,
    },
    /// Pay off-chain: sign and store a new cumulative balance proof.
    Pay { channel: u64, amount: u64 },
    /// Close on-chain with the newest proof and settle after the
    /// challenge period.
    Close {
        channel: u64,
        /// Which party submits the close.
        #[arg(long, value_enum, default_value_t = PartyArg::Payee)]
        by: PartyArg,
    },
}

#[derive(Subcommand)]
enum AuthsvcCmd {
    /// Serve key-release requests for this workspace's users over TCP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7450")]
        addr: String,
    },
}

#[derive(Subcommand)]
enum WorkspaceCmd {
    /// Print a digest over the complete persisted workspace state.
    Hash,
}

fn run(cli: Cli) -> CliResult {
    let ws = cli.workspace.as_path();
    let json = cli.json;
    match cli.command {
        Command::Init { seed, network } => {
            commands::init::run(ws, seed.as_deref(), network.config(), json)
        }
        Command::User { cmd } => match cmd {
            UserCmd::New { name, grant } => commands::user::new(ws, &name, grant, json),
            UserCmd::Show { name, reveal } => commands::user::show(ws, &name, reveal, json),
        },
        Command::Publish(args) => commands::publish::run(ws, &args, json),
        Command::Market { cmd } => match cmd {
            MarketCmd::List { owner } => commands::market::list(ws, &owner, json),
            MarketCmd::Buy { buyer, owner, bundle } => {
                commands::market::buy(ws, &buyer, &owner, bundle, json)
            }
        },
        Command::Fetch(args) => commands::fetch::run(ws, &args, json),
        Command::Bench { cmd } => match cmd {
            BenchCmd::List => commands::bench::list(json),
            BenchCmd::Preset { name, seed, out } => {
                commands::bench::preset(&name, seed, out.as_deref(), json)
            }
            BenchCmd::File { path, out } => commands::bench::file(&path, out.as_deref(), json),
        },
        Command::Pol { cmd } => commands::pol::run(ws, cmd, json),
        Command::Paychan { cmd } => match cmd {
            PaychanCmd::Open { payer, payee, deposit } => {
                commands::paychan::open(ws, &payer, &payee, deposit, json)
            }
            PaychanCmd::Pay { channel, amount } => {
                commands::paychan::pay(ws, channel, amount, json)
            }
            PaychanCmd::Close { channel, by } => {
                commands::paychan::close(ws, channel, matches!(by, PartyArg::Payer), json)
            }
        },
        Command::Authsvc { cmd } => match cmd {
            AuthsvcCmd::Serve { addr } => commands::serve::run(ws, &addr),
        },
        Command::Workspace { cmd } => match cmd {
            WorkspaceCmd::Hash => commands::init::hash(ws, json),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // clap exits 0 for --help/--version and 2 for usage errors.
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
