//! Command-line interface: algebra invariants, forgetful-map degrees,
//! Eichler embeddings, a batch discriminant table, and Neron-Severi
//! reports for principal data.
//!
//! Exit codes: 0 success, 1 usage/parse error, 2 witness not found
//! within the search bound, 3 internal invariant violation.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use quatforget::arith::{QuadOrder, Rat};
use quatforget::atkin_lehner::{degree_forgetful_f, degree_forgetful_hilbert, stable_suborder};
use quatforget::eichler::{contains_twist, embeddable_maximal, find_embedding, EichlerPair};
use quatforget::error::Error;
use quatforget::json::{parse_rat, quaternion_coords, DatumJson, LatticeJson, RatJson};
use quatforget::lattice::{maximal_order, LeftIdeal};
use quatforget::polarization::{
    make_principal_datum, ns_lattice, polarization_degree, positivity_check, riemann_determinant,
    ComplexPoint, PrincipalDatum,
};
use quatforget::quaternion::{
    find_presentation, is_division, is_totally_indefinite, ramification, twisting_divisors,
    QuaternionAlgebra,
};

const DEFAULT_BOUND: i64 = 50;
const DISC_SEARCH_BOUND: i64 = 1000;

#[derive(Parser)]
#[command(name = "quatforget", version, about = "Arithmetic invariants of forgetful maps between Shimura varieties over Q")]
struct Cli {
    /// Search bound for witness searches (overrides QUATFORGET_BOUND).
    #[arg(long, global = true)]
    bound: Option<i64>,

    /// Output format.
    #[arg(long, global = true, default_value = "json", value_parser = ["json", "tsv", "text"])]
    output: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct AlgebraArgs {
    /// First presentation parameter a (rational, i^2 = a).
    #[arg(short = 'a', long, allow_hyphen_values = true)]
    a: Option<String>,

    /// Second presentation parameter b (rational, j^2 = b).
    #[arg(short = 'b', long, allow_hyphen_values = true)]
    b: Option<String>,

    /// Search for a presentation with this reduced discriminant instead.
    #[arg(long, conflicts_with_all = ["a", "b"])]
    disc: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Ramification, discriminant, indefinite/division flags, twisting divisors.
    Alg(AlgebraArgs),

    /// Degree of the forgetful map pi_F for a principal datum, as JSON.
    Degree {
        #[command(flatten)]
        algebra: AlgebraArgs,

        /// JSON file with a left-ideal lattice (defaults to the order itself).
        #[arg(long)]
        ideal: Option<String>,
    },

    /// Decide embeddability of the order of conductor f in Q(sqrt(d)) and search a witness.
    Embed {
        #[command(flatten)]
        algebra: AlgebraArgs,

        /// Squarefree field parameter d of Q(sqrt(d)).
        #[arg(short = 'd', long, allow_hyphen_values = true)]
        d: i64,

        /// Conductor of the quadratic order.
        #[arg(short = 'f', long, default_value_t = 1)]
        f: u64,
    },

    /// Degree (1 or 2) of the forgetful map attached to an Eichler pair.
    HilbertDegree {
        #[command(flatten)]
        algebra: AlgebraArgs,

        /// Squarefree field parameter d of Q(sqrt(d)).
        #[arg(short = 'd', long, allow_hyphen_values = true)]
        d: i64,

        /// Conductor of the quadratic order.
        #[arg(short = 'f', long, default_value_t = 1)]
        f: u64,
    },

    /// TSV table of degrees over all squarefree discriminants up to dmax.
    Table {
        /// Largest discriminant to include (at most 10000).
        #[arg(long)]
        dmax: u64,

        /// Number of prime factors of each listed discriminant.
        #[arg(long, default_value_t = 2)]
        prime_count: usize,
    },

    /// Neron-Severi lattice, normalized Chern class, degree oracle, positivity.
    Ns {
        /// JSON file holding a principal datum (alg, order, ideal, mu).
        #[arg(long)]
        datum: String,

        /// Real part of the period point tau.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        tau_re: f64,

        /// Imaginary part of the period point tau (must be positive).
        #[arg(long, default_value_t = 1.0)]
        tau_im: f64,

        /// Numerical tolerance for the positivity minors.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Map every argument problem to exit 1; clap reserves 2, which
            // this tool uses for bound exhaustion.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let bound = cli.bound.or_else(env_bound).unwrap_or(DEFAULT_BOUND);
    if bound < 1 {
        eprintln!("error: search bound must be >= 1");
        return ExitCode::from(1);
    }
    let result = match &cli.command {
        Command::Alg(algebra) => cmd_alg(algebra, &cli.output),
        Command::Degree { algebra, ideal } => cmd_degree(algebra, ideal.as_deref(), bound),
        Command::Embed { algebra, d, f } => cmd_embed(algebra, *d, *f, bound, &cli.output),
        Command::HilbertDegree { algebra, d, f } => {
            cmd_hilbert_degree(algebra, *d, *f, bound, &cli.output)
        }
        Command::Table { dmax, prime_count } => cmd_table(*dmax, *prime_count, bound),
        Command::Ns {
            datum,
            tau_re,
            tau_im,
            tolerance,
        } => cmd_ns(datum, *tau_re, *tau_im, *tolerance),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn env_bound() -> Option<i64> {
    std::env::var("QUATFORGET_BOUND").ok()?.parse().ok()
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Domain(_) | Error::Parse(_) => 1,
        Error::NotWithinBound(_) | Error::Indeterminate(_) => 2,
        Error::InvariantViolation(_) | Error::SaturationFailed(_) | Error::Overflow(_) => 3,
    }
}

/// Resolve -a/-b or --disc into an algebra presentation.
fn resolve_algebra(args: &AlgebraArgs) -> Result<QuaternionAlgebra, Error> {
    if let Some(d) = args.disc {
        return find_presentation(&BigInt::from(d), DISC_SEARCH_BOUND);
    }
    match (&args.a, &args.b) {
        (Some(a), Some(b)) => QuaternionAlgebra::new(parse_rat(a)?, parse_rat(b)?),
        _ => Err(Error::Parse(
            "either both -a and -b, or --disc, must be given".into(),
        )),
    }
}

#[derive(Serialize)]
struct AlgReport {
    a: RatJson,
    b: RatJson,
    ramified_primes: Vec<u64>,
    infinite_ramified: bool,
    #[serde(rename = "D")]
    d: u64,
    totally_indefinite: bool,
    division: bool,
    twisting: bool,
    twisting_divisors: Vec<u64>,
}

fn cmd_alg(args: &AlgebraArgs, output: &str) -> Result<u8, Error> {
    let alg = resolve_algebra(args)?;
    let ram = ramification(&alg)?;
    let indefinite = !ram.infinite_ramified;
    let division = indefinite && !ram.ramified_primes.is_empty() || ram.infinite_ramified;
    let divisors = if indefinite && division {
        twisting_divisors(&alg)?
    } else {
        Vec::new()
    };
    let report = AlgReport {
        a: RatJson(alg.a().clone()),
        b: RatJson(alg.b().clone()),
        ramified_primes: to_u64s(&ram.ramified_primes)?,
        infinite_ramified: ram.infinite_ramified,
        d: ram
            .discriminant
            .to_u64()
            .ok_or_else(|| Error::Overflow("discriminant exceeds u64".into()))?,
        totally_indefinite: indefinite,
        division,
        twisting: !divisors.is_empty(),
        twisting_divisors: to_u64s(&divisors)?,
    };
    if output == "text" {
        println!("algebra ({}, {} / Q)", report.a.0, report.b.0);
        println!("ramified primes: {:?}", report.ramified_primes);
        println!("infinite place ramified: {}", report.infinite_ramified);
        println!("D = {}", report.d);
        println!("totally indefinite: {}", report.totally_indefinite);
        println!("division: {}", report.division);
        println!("twisting divisors: {:?}", report.twisting_divisors);
    } else {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    }
    Ok(0)
}

fn datum_for(args: &AlgebraArgs, ideal_file: Option<&str>, bound: i64) -> Result<PrincipalDatum, Error> {
    let alg = resolve_algebra(args)?;
    if !is_totally_indefinite(&alg)? || !is_division(&alg)? {
        return Err(Error::Domain(
            "a principal datum requires a totally indefinite division algebra".into(),
        ));
    }
    let order = maximal_order(&alg)?;
    let ideal = match ideal_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("cannot read {path}: {e}")))?;
            let lj: LatticeJson =
                serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            LeftIdeal::new(lj.to_lattice()?, order.clone())?
        }
        None => LeftIdeal::from_order(&order)?,
    };
    make_principal_datum(&order, &ideal, bound)
}

fn cmd_degree(args: &AlgebraArgs, ideal_file: Option<&str>, bound: i64) -> Result<u8, Error> {
    let datum = datum_for(args, ideal_file, bound)?;
    let report = degree_forgetful_f(&datum, bound)?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    if !report.consistent() {
        return Err(Error::InvariantViolation(
            "degree formula disagrees with |W0|".into(),
        ));
    }
    if !report.complete {
        return Ok(2);
    }
    Ok(0)
}

#[derive(Serialize)]
struct EmbedReport {
    #[serde(rename = "D")]
    d: u64,
    field_d: i64,
    conductor: u64,
    embeddable: bool,
    witness: Option<[RatJson; 4]>,
    witness_trace: Option<RatJson>,
    witness_norm: Option<RatJson>,
}

fn embedding_for(
    args: &AlgebraArgs,
    d: i64,
    f: u64,
    bound: i64,
) -> Result<(PrincipalDatum, Option<EichlerPair>, EmbedReport), Error> {
    let datum = datum_for(args, None, bound)?;
    let quad = QuadOrder::new(BigInt::from(d), BigInt::from(f))?;
    // For conductor 1 the local criterion decides nonexistence exactly, so
    // the (expensive) witness search runs only when an embedding exists.
    let (embeddable, pair) = if f == 1 {
        if embeddable_maximal(datum.algebra(), &BigInt::from(d))? {
            (true, find_embedding(datum.order(), &quad, bound)?)
        } else {
            (false, None)
        }
    } else {
        let pair = find_embedding(datum.order(), &quad, bound)?;
        (pair.is_some(), pair)
    };
    let disc = datum
        .disc()
        .to_u64()
        .ok_or_else(|| Error::Overflow("discriminant exceeds u64".into()))?;
    let report = EmbedReport {
        d: disc,
        field_d: d,
        conductor: f,
        embeddable,
        witness: pair.as_ref().map(|p| quaternion_coords(&p.g)),
        witness_trace: pair.as_ref().map(|p| RatJson(p.g.trace())),
        witness_norm: pair.as_ref().map(|p| RatJson(p.g.norm())),
    };
    Ok((datum, pair, report))
}

fn cmd_embed(args: &AlgebraArgs, d: i64, f: u64, bound: i64, output: &str) -> Result<u8, Error> {
    let (_, _, report) = embedding_for(args, d, f, bound)?;
    if output == "text" {
        println!(
            "D = {}, Q(sqrt({})) conductor {}: embeddable = {}",
            report.d, report.field_d, report.conductor, report.embeddable
        );
        match &report.witness {
            Some(w) => println!(
                "witness g = [{}, {}, {}, {}]",
                w[0].0, w[1].0, w[2].0, w[3].0
            ),
            None => println!("witness: none within bound"),
        }
    } else {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    }
    if report.embeddable && report.witness.is_none() {
        return Ok(2);
    }
    Ok(0)
}

fn cmd_hilbert_degree(
    args: &AlgebraArgs,
    d: i64,
    f: u64,
    bound: i64,
    output: &str,
) -> Result<u8, Error> {
    let (datum, pair, report) = embedding_for(args, d, f, bound)?;
    let pair = match pair {
        Some(p) => p,
        None => {
            if report.embeddable {
                return Err(Error::NotWithinBound(bound));
            }
            return Err(Error::Domain(
                "the quadratic order does not embed in the maximal order".into(),
            ));
        }
    };
    let degree = degree_forgetful_hilbert(&datum, &pair.phi_image)?;
    let twisted = contains_twist(&pair, &datum)?;
    if output == "text" {
        println!("degree = {degree} (twist in image: {twisted})");
    } else {
        println!(
            "{}",
            serde_json::json!({ "degree": degree, "contains_twist": twisted })
        );
    }
    Ok(0)
}

fn squarefree_with_prime_count(dmax: u64, prime_count: usize) -> Vec<u64> {
    let mut out = Vec::new();
    for n in 2..=dmax {
        let mut m = n;
        let mut primes = 0usize;
        let mut squarefree = true;
        let mut p = 2u64;
        while p * p <= m {
            if m % p == 0 {
                m /= p;
                primes += 1;
                if m % p == 0 {
                    squarefree = false;
                    break;
                }
            }
            p += 1;
        }
        if m > 1 {
            primes += 1;
        }
        if squarefree && primes == prime_count {
            out.push(n);
        }
    }
    out
}

fn cmd_table(dmax: u64, prime_count: usize, bound: i64) -> Result<u8, Error> {
    if dmax > 10_000 {
        return Err(Error::Domain("dmax must be at most 10000".into()));
    }
    println!("D\ttwisting\ttwisting_divisors\tomega_odd\tdegree_piF\tW0_order\tconsistent");
    for d in squarefree_with_prime_count(dmax, prime_count) {
        let row = table_row(d, bound);
        match row {
            Ok(Some(r)) => println!("{r}"),
            Ok(None) => println!("{d}\t-\t-\t-\t-\t-\tbound-exhausted"),
            Err(e) => return Err(e),
        }
    }
    Ok(0)
}

/// One table row; Ok(None) marks bound exhaustion for this discriminant.
fn table_row(d: u64, bound: i64) -> Result<Option<String>, Error> {
    let alg = find_presentation(&BigInt::from(d), DISC_SEARCH_BOUND)?;
    let order = maximal_order(&alg)?;
    let ideal = LeftIdeal::from_order(&order)?;
    let datum = match make_principal_datum(&order, &ideal, bound) {
        Ok(datum) => datum,
        Err(Error::NotWithinBound(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let report = match degree_forgetful_f(&datum, bound) {
        Ok(r) => r,
        Err(Error::NotWithinBound(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if !report.complete {
        return Ok(None);
    }
    let divisors: Vec<String> = report
        .twisting_divisors
        .iter()
        .map(|m| m.to_string())
        .collect();
    let divisors = if divisors.is_empty() {
        "-".to_string()
    } else {
        divisors.join(",")
    };
    Ok(Some(format!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}",
        report.d,
        report.twisting,
        divisors,
        report.omega_odd,
        report.degree_pi_f,
        report.w0.len(),
        report.consistent()
    )))
}

#[derive(Serialize)]
struct NsReport {
    #[serde(rename = "D")]
    d: u64,
    ns_lattice: LatticeJson,
    c1: [RatJson; 4],
    delta: RatJson,
    degree: RatJson,
    determinant_oracle: RatJson,
    stable_field_d: i64,
    positive: bool,
    negative_positive: bool,
}

fn cmd_ns(datum_file: &str, tau_re: f64, tau_im: f64, tolerance: f64) -> Result<u8, Error> {
    if tau_im <= 0.0 {
        return Err(Error::Domain("tau must lie in the upper half-plane".into()));
    }
    if tolerance <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let text = std::fs::read_to_string(datum_file)
        .map_err(|e| Error::Parse(format!("cannot read {datum_file}: {e}")))?;
    let dj: DatumJson = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    let (order, ideal, mu) = dj.to_parts()?;
    let datum = PrincipalDatum::new(order, ideal, mu)?;
    let ns = ns_lattice(&datum)?;
    let c1 = datum.principal_chern().mu_pol;
    let delta = c1.norm();
    let degree = polarization_degree(&datum, &c1)?;
    let oracle = riemann_determinant(&datum, &c1)?;
    let (_, quad) = stable_suborder(&datum)?;
    let point = ComplexPoint::new(datum.algebra(), tau_re, tau_im)?;
    let positive = positivity_check(&datum, &c1, &point, tolerance)?;
    let neg = c1.scale(&Rat::from_integer(BigInt::from(-1)));
    let negative_positive = positivity_check(&datum, &neg, &point, tolerance)?;
    let report = NsReport {
        d: datum
            .disc()
            .to_u64()
            .ok_or_else(|| Error::Overflow("discriminant exceeds u64".into()))?,
        ns_lattice: LatticeJson::from_lattice(&ns),
        c1: quaternion_coords(&c1),
        delta: RatJson(delta),
        degree: RatJson(degree.clone()),
        determinant_oracle: RatJson(oracle.clone()),
        stable_field_d: quad
            .d
            .to_i64()
            .ok_or_else(|| Error::Overflow("stable field parameter exceeds i64".into()))?,
        positive,
        negative_positive,
    };
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(0)
}

fn to_u64s(v: &[BigInt]) -> Result<Vec<u64>, Error> {
    v.iter()
        .map(|x| {
            x.to_u64()
                .ok_or_else(|| Error::Overflow(format!("{x} exceeds u64")))
        })
        .collect()
}
