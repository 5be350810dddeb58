//! `mcpkp`: key generation, signing, verification and the parameter tools.
//!
//! Exit codes: 0 success or accept, 1 reject (or failed check), 2 malformed
//! input, 3 configuration error.

mod files;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::{OsRng, StdRng};
use rand::{RngCore, SeedableRng};

use mcpkp::attacks::{self, EstimatorConfig};
use mcpkp::mcpkp::{
    brute_force_mcpkp, brute_force_mse, keygen, reduce_to_mse, validation_report, verify_witness, McpkpError,
    McpkpInstance, ParamSet, Witness,
};
use mcpkp::mpc::measure_false_positive;
use mcpkp::sign::{self, minimal_tau, SigParams, SignError, Signature};
use mcpkp::sizes::{self, Framework, SizeInputs, Statement};
use mcpkp::xof::{Hasher, TAG_EXPAND};

#[derive(Parser)]
#[command(name = "mcpkp", version, about = "MCPKP signatures and parameter tools")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair for a preset.
    Keygen {
        #[arg(long)]
        paramset: String,
        /// Hex master seed; random when omitted.
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        out_pk: PathBuf,
        #[arg(long)]
        out_sk: PathBuf,
    },
    /// Sign a message file.
    Sign {
        #[arg(long)]
        sk: PathBuf,
        /// Optional public key; must match the one derived from the secret key.
        #[arg(long)]
        pk: Option<PathBuf>,
        #[arg(long)]
        msg: PathBuf,
        #[arg(long)]
        sig: PathBuf,
        #[command(flatten)]
        profile: Profile,
        /// Hex seed for randomized signing; deterministic when omitted.
        #[arg(long)]
        seed: Option<String>,
    },
    /// Verify a detached signature.
    Verify {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        msg: PathBuf,
        #[arg(long)]
        sig: PathBuf,
        #[command(flatten)]
        profile: Profile,
    },
    /// Public-key and signature size tables with reference deltas.
    Sizes {
        /// Print the full table (the default when no row is requested).
        #[arg(long)]
        table: bool,
        /// Tab-separated output.
        #[arg(long)]
        machine: bool,
        #[arg(long)]
        paramset: Option<String>,
        #[arg(long, value_enum, default_value = "tcith")]
        framework: FrameworkArg,
        #[arg(long = "N")]
        parties: Option<u64>,
        #[arg(long)]
        tau: Option<usize>,
        #[arg(long)]
        t_open: Option<usize>,
        /// Size of the subcode-equivalence variant.
        #[arg(long)]
        mse: bool,
    },
    /// Attack-cost estimates.
    Estimate {
        /// Attack name or `all`.
        #[arg(long, default_value = "all")]
        attack: String,
        #[arg(long)]
        paramset: String,
        #[arg(long, default_value_t = 2.81)]
        omega: f64,
        #[arg(long, default_value_t = 31.0)]
        solve_log2: f64,
        /// log2 cost of the code-equivalence solver used by mce-guess.
        #[arg(long, default_value_t = 0.0)]
        c_mce: f64,
        #[arg(long)]
        machine: bool,
    },
    /// Check a parameter set against its structural and counting constraints.
    Validate {
        #[arg(long)]
        paramset: String,
    },
    /// Exhaustive search over GL_m × GL_n for a toy instance.
    Bruteforce {
        #[arg(long)]
        instance: PathBuf,
        /// Planted witness to look for among the solutions.
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Also search the reduced subcode-equivalence instance.
        #[arg(long)]
        mse: bool,
    },
    /// Empirical false-positive rate of the MPC check with a cheating witness.
    MpcStats {
        #[arg(long)]
        q: u32,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        checks: usize,
        #[arg(long)]
        seed: Option<String>,
    },
    /// Generate a toy instance and its planted witness.
    ToyInstance {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        kp: usize,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        out_witness: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Profile {
    #[arg(long = "N")]
    parties: Option<usize>,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    rho: Option<usize>,
    /// Allow parameters below the target security level; output is watermarked.
    #[arg(long)]
    insecure_profile: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FrameworkArg {
    Tcith,
    Voleith,
}

enum Failure {
    Reject(String),
    Malformed(String),
    Config(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Reject(_) => 1,
            Failure::Malformed(_) => 2,
            Failure::Config(_) => 3,
        }
    }
}

type Outcome = Result<(), Failure>;

fn config<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

fn malformed<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Malformed(e.to_string())
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn write(path: &Path, data: &[u8]) -> Outcome {
    fs::write(path, data).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn paramset(name: &str) -> Result<ParamSet, Failure> {
    ParamSet::by_name(name).ok_or_else(|| Failure::Config(format!("unknown parameter set {name:?}")))
}

/// 32-byte RNG seed from a hex string, or from the OS when absent.
fn rng_from(seed: Option<&str>, label: &[u8]) -> Result<StdRng, Failure> {
    match seed {
        None => Ok(StdRng::from_rng(OsRng).map_err(config)?),
        Some(hex_seed) => {
            let bytes = hex::decode(hex_seed).map_err(|e| Failure::Config(format!("seed: {e}")))?;
            let digest = Hasher::new(TAG_EXPAND).absorb(b"cli").absorb(label).absorb(&bytes).clone().digest(32);
            Ok(StdRng::from_seed(digest.try_into().expect("32 bytes")))
        }
    }
}

fn sig_params(base: &ParamSet, profile: &Profile) -> Result<SigParams, Failure> {
    let parties = profile.parties.unwrap_or(256);
    let tau = match profile.tau {
        Some(t) => t,
        None if parties == 256 => SigParams::fast(base).map_err(config)?.tau,
        None => minimal_tau(base, parties, profile.rho).map_err(config)?,
    };
    let sp = if profile.insecure_profile {
        SigParams::insecure(base, parties, tau, profile.rho)
    } else {
        SigParams::new(base, parties, tau, profile.rho)
    };
    sp.map_err(config)
}

fn load_pk(path: &Path) -> Result<McpkpInstance, Failure> {
    McpkpInstance::from_bytes(&read(path)?).map_err(malformed)
}

fn cmd_keygen(paramset_name: &str, seed: Option<&str>, out_pk: &Path, out_sk: &Path) -> Outcome {
    let params = paramset(paramset_name)?;
    let master = match seed {
        Some(s) => hex::decode(s).map_err(|e| Failure::Config(format!("seed: {e}")))?,
        None => {
            let mut b = vec![0u8; params.seed_bytes()];
            OsRng.fill_bytes(&mut b);
            b
        }
    };
    let (pk, sk) = keygen(&params, &master).map_err(config)?;
    let pk_bytes = pk.to_bytes();
    write(out_pk, &pk_bytes)?;
    write(out_sk, &sk.to_bytes(&params))?;
    println!("{}: public key {} bytes, secret key {} bytes", params.name, pk_bytes.len(), params.seed_bytes() + 1);
    Ok(())
}

fn cmd_sign(
    sk_path: &Path,
    pk_path: Option<&Path>,
    msg_path: &Path,
    sig_path: &Path,
    profile: &Profile,
    seed: Option<&str>,
) -> Outcome {
    let (pk, sk) = Witness::from_bytes(&read(sk_path)?).map_err(malformed)?;
    if let Some(p) = pk_path {
        if load_pk(p)? != pk {
            return Err(Failure::Config("public key does not belong to the secret key".into()));
        }
    }
    let msg = read(msg_path)?;
    let sp = sig_params(&pk.params, profile)?;
    let sig = match seed {
        None => sign::sign_deterministic(&sk, &pk, &msg, &sp),
        Some(_) => sign::sign(&sk, &pk, &msg, &sp, &mut rng_from(seed, b"sign")?),
    }
    .map_err(config)?;
    let body = sig.to_bytes(&sp);
    let file = files::wrap_signature(sp.insecure, pk.params.id, &body);
    write(sig_path, &file)?;
    if sp.insecure {
        eprintln!("warning: insecure profile, signature watermarked");
    }
    println!(
        "{} N={} tau={} rho={}: signature {} bytes (predicted {}), file {} bytes",
        pk.params.name,
        sp.parties,
        sp.tau,
        sp.rho,
        body.len(),
        sp.signature_bytes(),
        file.len()
    );
    Ok(())
}

fn cmd_verify(pk_path: &Path, msg_path: &Path, sig_path: &Path, profile: &Profile) -> Outcome {
    let pk = load_pk(pk_path)?;
    let msg = read(msg_path)?;
    let raw = read(sig_path)?;
    let file = files::unwrap_signature(&raw).map_err(Failure::Malformed)?;
    if file.insecure && !profile.insecure_profile {
        return Err(Failure::Config("signature made under the insecure profile; pass --insecure-profile".into()));
    }
    if file.id != pk.params.id {
        return Err(Failure::Reject(format!("signature is for parameter set id {}", file.id)));
    }
    let sp = sig_params(&pk.params, profile)?;
    let sig = Signature::from_bytes(file.body, &sp).map_err(malformed)?;
    match sign::verify(&pk, &msg, &sig, &sp) {
        Ok(true) => {
            println!("accept");
            Ok(())
        }
        Ok(false) => Err(Failure::Reject("reject".into())),
        Err(e @ SignError::Malformed(_)) => Err(malformed(e)),
        Err(e) => Err(config(e)),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_sizes(
    machine: bool,
    paramset_name: Option<&str>,
    framework: FrameworkArg,
    parties: Option<u64>,
    tau: Option<usize>,
    t_open: Option<usize>,
    mse: bool,
) -> Outcome {
    let Some(name) = paramset_name else {
        print!("{}", sizes::table_report(machine));
        return Ok(());
    };
    let params = paramset(name)?;
    let fw = match framework {
        FrameworkArg::Tcith => Framework::TCitH,
        FrameworkArg::Voleith => Framework::VOLEitH,
    };
    let (Some(n), Some(tau)) = (parties, tau) else {
        return Err(Failure::Config("--N and --tau are required with --paramset".into()));
    };
    // Plain GGM opening when no optimized T_open is given.
    let t_open = t_open.unwrap_or(tau * n.trailing_zeros() as usize);
    let mut si = SizeInputs::new(&params, fw, n, tau, t_open);
    if mse {
        si = si.with_statement(Statement::Mse);
    }
    let bytes = sizes::signature_size(&si).map_err(config)?;
    println!(
        "{} {} N={} tau={} T_open={} w={}: pk {} B, signature {} B",
        params.name,
        fw,
        n,
        tau,
        t_open,
        si.w,
        sizes::pk_size(&params, sizes::PkMode::Compact),
        bytes
    );
    Ok(())
}

fn cmd_estimate(attack: &str, paramset_name: &str, cfg: &EstimatorConfig, c_mce: f64, machine: bool) -> Outcome {
    let params = paramset(paramset_name)?;
    let names: Vec<&str> = if attack == "all" { attacks::ATTACKS.to_vec() } else { vec![attack] };
    for name in names {
        let mut report = match name {
            "mce-guess" => attacks::mce_guess_cost(&params, c_mce),
            _ => attacks::estimate(&params, name, cfg).map_err(config)?.ok_or_else(|| {
                Failure::Config(format!("unknown attack {name:?}; known: {}", attacks::ATTACKS.join(", ")))
            })?,
        };
        report.attack = format!("{} [{}]", report.attack, params.name);
        if machine {
            println!("{}\t{:.6}\t{}", report.attack, report.log2_cost, report.applicable);
        } else {
            print!("{}", report.render());
        }
    }
    Ok(())
}

fn cmd_validate(paramset_name: &str) -> Outcome {
    let params = paramset(paramset_name)?;
    let checks = validation_report(&params);
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(Failure::Reject(format!("{} failed", params.name)))
    }
}

fn bruteforce_error(e: McpkpError) -> Failure {
    config(e)
}

fn cmd_bruteforce(instance: &Path, witness: Option<&Path>, mse: bool) -> Outcome {
    let inst = files::read_instance(&read(instance)?).map_err(Failure::Malformed)?;
    let planted = match witness {
        Some(p) => Some(files::read_witness(&inst.params, &read(p)?).map_err(Failure::Malformed)?),
        None => None,
    };
    let sols = brute_force_mcpkp(&inst).map_err(bruteforce_error)?;
    println!("{}: {} MCPKP solutions", inst.params.name, sols.len());
    let mut ok = true;
    if let Some(w) = &planted {
        let valid = verify_witness(&inst, w).map_err(malformed)?;
        let found = sols.iter().any(|(a, b)| *a == w.a && *b == w.b);
        println!("planted witness valid: {valid}, found: {found}");
        ok &= found;
    }
    if mse {
        let reduced = reduce_to_mse(&inst).map_err(config)?;
        let mse_sols = brute_force_mse(&reduced).map_err(bruteforce_error)?;
        let contained = sols.iter().all(|s| mse_sols.contains(s));
        println!("reduced MSE: {} solutions, contains every MCPKP solution: {contained}", mse_sols.len());
        ok &= contained;
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Reject("planted witness or containment check failed".into()))
    }
}

fn cmd_mpc_stats(q: u32, trials: u64, checks: usize, seed: Option<&str>) -> Outcome {
    if trials == 0 {
        return Err(Failure::Config("--trials must be positive".into()));
    }
    let mut rng = rng_from(seed, b"mpc-stats")?;
    let stats = measure_false_positive(q, checks, trials, &mut rng).map_err(config)?;
    println!(
        "q={} checks={} trials={} accepted={} rate={:.6} expected={:.6} deviation={:.2} sigma",
        stats.q,
        stats.checks,
        stats.trials,
        stats.accepted,
        stats.rate(),
        stats.expected_rate,
        stats.deviation()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_toy_instance(
    q: u32,
    m: usize,
    n: usize,
    k: usize,
    kp: usize,
    seed: Option<&str>,
    out: &Path,
    out_witness: Option<&Path>,
) -> Outcome {
    let params = ParamSet::toy(q, m, n, k, kp).map_err(config)?;
    let mut master = [0u8; 32];
    rng_from(seed, b"toy")?.fill_bytes(&mut master);
    let (inst, w) = keygen(&params, &master).map_err(config)?;
    write(out, &files::write_instance(&inst))?;
    if let Some(p) = out_witness {
        write(p, &files::write_witness(&w))?;
    }
    println!("{}", params.name);
    Ok(())
}

fn init_threads() -> Outcome {
    if let Ok(v) = std::env::var("MCPKP_THREADS") {
        let n: usize = v.parse().map_err(|_| Failure::Config(format!("MCPKP_THREADS={v:?} is not a number")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(config)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    init_threads()?;
    match cli.cmd {
        Command::Keygen { paramset, seed, out_pk, out_sk } => cmd_keygen(&paramset, seed.as_deref(), &out_pk, &out_sk),
        Command::Sign { sk, pk, msg, sig, profile, seed } => {
            cmd_sign(&sk, pk.as_deref(), &msg, &sig, &profile, seed.as_deref())
        }
        Command::Verify { pk, msg, sig, profile } => cmd_verify(&pk, &msg, &sig, &profile),
        Command::Sizes { table: _, machine, paramset, framework, parties, tau, t_open, mse } => {
            cmd_sizes(machine, paramset.as_deref(), framework, parties, tau, t_open, mse)
        }
        Command::Estimate { attack, paramset, omega, solve_log2, c_mce, machine } => {
            let cfg = EstimatorConfig { omega, solve_log2, ..EstimatorConfig::default() };
            cmd_estimate(&attack, &paramset, &cfg, c_mce, machine)
        }
        Command::Validate { paramset } => cmd_validate(&paramset),
        Command::Bruteforce { instance, witness, mse } => cmd_bruteforce(&instance, witness.as_deref(), mse),
        Command::MpcStats { q, trials, checks, seed } => cmd_mpc_stats(q, trials, checks, seed.as_deref()),
        Command::ToyInstance { q, m, n, k, kp, seed, out, out_witness } => {
            cmd_toy_instance(q, m, n, k, kp, seed.as_deref(), &out, out_witness.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Reject(msg) => println!("{msg}"),
                Failure::Malformed(msg) => eprintln!("malformed input: {msg}"),
                Failure::Config(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}
