//! One subcommand per experiment; every run is deterministic given its
//! parameters (fixed seed, sequential evaluation) and emits a CSV or JSON
//! table with the configuration echoed as metadata.

mod num_arg;
mod table;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use num_arg::{parse_count, parse_offsets, parse_real, parse_system, OffsetList, SystemSpec};
use primelab::bilinear::{full_dyadic_intervals, type_i_sum, type_ii_sum, vaughan_split};
use primelab::dickson::{
    complexity, dickson_prediction, gallagher_mean, tuple_singular_series, weighted_count,
    LatticeBox, LinearFormSystem,
};
use primelab::digits::{digit_sign, prime_digit_correlation, spectrum, SpectrumMethod};
use primelab::gowers::{heisenberg_orbit, u2_inverse, u_norm, w_tricked_lambda, FiniteFunction};
use primelab::gpy::{
    bv_discrepancy, gpy_densities, main_term_sum, rho_predicted, rho_predicted_finite,
    GpyConfig, PrimeTuple,
};
use primelab::sieve::FactorSieve;
use primelab::{Cplx, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use table::{Table, Value};

#[derive(Parser)]
#[command(
    name = "primelab",
    version,
    about = "Numerical experiments around sieve weights, digit sums and uniformity norms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format for the emitted table
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Write the table to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TestFunction {
    /// f ≡ 1
    Constant,
    /// f(n) = (−1)^{s(n)}, the binary digit-sum sign
    DigitSign,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GowersFunction {
    Constant,
    /// e(n²/N)
    Quadratic,
    /// e(rn/N)
    Phase,
    /// seeded values in the unit disk
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// doubling recursion on the transform
    Product,
    /// fast Fourier transform of the sign vector
    Direct,
}

#[derive(Subcommand)]
enum Command {
    /// Sieve-weighted prime densities ρ⁽ⁱ⁾ for an admissible tuple
    Gaps {
        #[arg(long = "N", value_parser = parse_count, default_value = "1e6")]
        n: u64,
        #[arg(long, default_value_t = 3)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        l: u32,
        #[arg(long, value_parser = parse_real, default_value = "0.25")]
        gamma: Real,
        #[arg(long, value_parser = parse_offsets, default_value = "0,2,6")]
        tuple: OffsetList,
    },
    /// Truncated-divisor main-term sum and its asymptotic ratio
    #[command(name = "eq333")]
    Eq333 {
        #[arg(long = "R", value_parser = parse_real, default_value = "1e3")]
        r: Real,
    },
    /// Maximal prime-counting discrepancy over moduli q ≤ Q
    Bv {
        #[arg(long = "N", value_parser = parse_count, default_value = "1e6")]
        n: u64,
        #[arg(long = "Q", value_parser = parse_count, default_value = "100")]
        q: u64,
    },
    /// Predicted vs weighted pattern count for a tuple over an interval
    Dickson {
        #[arg(long, value_parser = parse_offsets, default_value = "0,2")]
        tuple: OffsetList,
        #[arg(long, value_parser = parse_count, default_value = "1")]
        lo: u64,
        #[arg(long, value_parser = parse_count, default_value = "1e6")]
        hi: u64,
        #[arg(long, value_parser = parse_count, default_value = "1e5")]
        pmax: u64,
    },
    /// Singular series of a prime tuple
    #[command(name = "tuple-series")]
    TupleSeries {
        #[arg(long, value_parser = parse_offsets, default_value = "0,2")]
        tuple: OffsetList,
        #[arg(long, value_parser = parse_count, default_value = "1e5")]
        pmax: u64,
    },
    /// Average of the singular series over k-subsets of [1, H]
    Gallagher {
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long = "H", value_parser = parse_count, default_value = "1000")]
        h: u64,
        #[arg(long, value_parser = parse_count, default_value = "1e5")]
        pmax: u64,
    },
    /// Complexity of a system of affine-linear forms (prints the value)
    Complexity {
        /// Rows separated by `;`, last integer of each row the constant term
        #[arg(long, value_parser = parse_system)]
        system: SystemSpec,
    },
    /// Correlation of the digit-sum sign with primes along dyadic X
    #[command(name = "digits-corr")]
    DigitsCorr {
        #[arg(long = "Xmax", value_parser = parse_count, default_value = "2^24")]
        xmax: u64,
        #[arg(long, default_value_t = 5)]
        steps: u32,
    },
    /// Fourier spectrum of the digit-sum sign on Z/2^k
    Spectrum {
        #[arg(long, default_value_t = 10)]
        k: u32,
        #[arg(long, value_enum, default_value_t = MethodArg::Product)]
        method: MethodArg,
    },
    /// Four-piece split of Σ Λ(n)f(n) with its direct evaluation
    Vaughan {
        #[arg(long = "X", value_parser = parse_count, default_value = "2^16")]
        x: u64,
        /// Cutoff U (defaults to X^{1/3})
        #[arg(long = "U", value_parser = parse_real)]
        u: Option<Real>,
        #[arg(long, value_enum, default_value_t = TestFunction::Constant)]
        f: TestFunction,
    },
    /// Type I and Type II sums over dyadic ranges m ~ 2^μ, n ~ 2^ν
    #[command(name = "type-sums")]
    TypeSums {
        #[arg(long, default_value_t = 10)]
        mu: u32,
        #[arg(long, default_value_t = 10)]
        nu: u32,
        #[arg(long, value_enum, default_value_t = TestFunction::DigitSign)]
        f: TestFunction,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Gowers norm and best Fourier correlation of a test function
    Gowers {
        #[arg(long = "N", value_parser = parse_count, default_value = "128")]
        n: u64,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, value_enum, default_value_t = GowersFunction::Quadratic)]
        f: GowersFunction,
        /// Frequency for the phase function
        #[arg(long, default_value_t = 1)]
        r: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rescaled von Mangoldt values (φ(W)/W)Λ(Wn+b)
    Wtrick {
        #[arg(long = "W", value_parser = parse_count, default_value = "6")]
        w: u64,
        #[arg(long, value_parser = parse_count, default_value = "5")]
        b: u64,
        #[arg(long = "M", value_parser = parse_count, default_value = "1e5")]
        m: u64,
    },
    /// Heisenberg orbit g^n with fundamental-domain reduction
    Heisenberg {
        #[arg(long, value_parser = parse_real, default_value = "1.4142135623730951")]
        alpha: Real,
        #[arg(long, value_parser = parse_real, default_value = "0")]
        beta: Real,
        #[arg(long, value_parser = parse_real, default_value = "1")]
        gamma: Real,
        #[arg(long, default_value_t = 50)]
        n: u64,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        let code = match err.downcast_ref::<primelab::Error>() {
            Some(primelab::Error::Budget(_)) => 3,
            _ => 2,
        };
        std::process::exit(code);
    }
}

fn run(cli: Cli) -> Result<()> {
    let Cli {
        command,
        format,
        out,
    } = cli;
    let table = match command {
        Command::Complexity { system } => {
            let sys = LinearFormSystem::new(system.coefficients, system.offsets)?;
            let value = complexity(&sys)?;
            return write_text(out.as_ref(), &format!("{value}\n"));
        }
        Command::Gaps {
            n,
            k,
            l,
            gamma,
            tuple,
        } => run_gaps(n, k, l, gamma, tuple)?,
        Command::Eq333 { r } => run_eq333(r)?,
        Command::Bv { n, q } => run_bv(n, q)?,
        Command::Dickson {
            tuple,
            lo,
            hi,
            pmax,
        } => run_dickson(tuple, lo, hi, pmax)?,
        Command::TupleSeries { tuple, pmax } => run_tuple_series(tuple, pmax)?,
        Command::Gallagher { k, h, pmax } => run_gallagher(k, h, pmax)?,
        Command::DigitsCorr { xmax, steps } => run_digits_corr(xmax, steps)?,
        Command::Spectrum { k, method } => run_spectrum(k, method)?,
        Command::Vaughan { x, u, f } => run_vaughan(x, u, f)?,
        Command::TypeSums { mu, nu, f, seed } => run_type_sums(mu, nu, f, seed)?,
        Command::Gowers { n, k, f, r, seed } => run_gowers(n, k, f, r, seed)?,
        Command::Wtrick { w, b, m } => run_wtrick(w, b, m)?,
        Command::Heisenberg {
            alpha,
            beta,
            gamma,
            n,
        } => run_heisenberg(alpha, beta, gamma, n)?,
    };
    let text = match format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json(),
    };
    write_text(out.as_ref(), &text)
}

fn write_text(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Requested thread override; all kernels currently run sequentially so the
/// value is echoed for provenance only.
fn thread_note(table: &mut Table) {
    if let Ok(v) = std::env::var("PRIMELAB_THREADS") {
        table.meta("threads_requested", v);
    }
}

fn join(values: &[u64]) -> String {
    values
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn test_function(f: TestFunction) -> impl Fn(u64) -> Cplx + Copy {
    move |n: u64| match f {
        TestFunction::Constant => Cplx::new(1.0, 0.0),
        TestFunction::DigitSign => Cplx::new(digit_sign(n) as Real, 0.0),
    }
}

fn function_name(f: TestFunction) -> &'static str {
    match f {
        TestFunction::Constant => "constant",
        TestFunction::DigitSign => "digit-sign",
    }
}

fn run_gaps(n: u64, k: u32, l: u32, gamma: Real, tuple: OffsetList) -> Result<Table> {
    let tuple = PrimeTuple::new(tuple.0)?;
    let config = GpyConfig::new(n, k, l, gamma)?;
    let sieve = FactorSieve::build(2 * n + tuple.max_offset() + 1)?;
    let densities = gpy_densities(&sieve, &config, &tuple)?;
    let predicted = rho_predicted(&config);
    let mut t = Table::new(&["i", "rho_empirical", "rho_predicted"]);
    t.meta("subcommand", "gaps")
        .meta("N", n)
        .meta("k", k)
        .meta("l", l)
        .meta("gamma", gamma)
        .meta("tuple", join(tuple.offsets()))
        .meta("r_cutoff", config.r_cutoff())
        .meta("q1", densities.q1)
        .meta("rho_predicted_finite", rho_predicted_finite(&config));
    thread_note(&mut t);
    for (i, &rho) in densities.rho.iter().enumerate() {
        t.row(vec![
            Value::UInt(i as u64),
            Value::Real(rho),
            Value::Real(predicted),
        ]);
    }
    Ok(t)
}

fn run_eq333(r: Real) -> Result<Table> {
    let sieve = FactorSieve::build(100_000)?;
    let sum = main_term_sum(&sieve, r)?;
    let mut t = Table::new(&["R", "sum", "asymptotic_ratio"]);
    t.meta("subcommand", "eq333")
        .meta("R", r)
        .meta("p_max", sum.p_max);
    thread_note(&mut t);
    t.row(vec![
        Value::Real(r),
        Value::Real(sum.sum),
        Value::Real(sum.asymptotic_ratio),
    ]);
    Ok(t)
}

fn run_bv(n: u64, q: u64) -> Result<Table> {
    let sieve = FactorSieve::build(n)?;
    let disc = bv_discrepancy(&sieve, n, q)?;
    let mut t = Table::new(&["N", "Q", "discrepancy", "trivial_bound"]);
    t.meta("subcommand", "bv").meta("N", n).meta("Q", q);
    thread_note(&mut t);
    t.row(vec![
        Value::UInt(n),
        Value::UInt(q),
        Value::Real(disc.value),
        Value::Real(disc.trivial_bound),
    ]);
    Ok(t)
}

fn run_dickson(tuple: OffsetList, lo: u64, hi: u64, pmax: u64) -> Result<Table> {
    let pt = PrimeTuple::new(tuple.0)?;
    let system = LinearFormSystem::from_tuple(&pt)?;
    if lo > i64::MAX as u64 || hi > i64::MAX as u64 {
        bail!("interval endpoints exceed the supported range");
    }
    let bx = LatticeBox::new(vec![(lo as i64, hi as i64)])?;
    let sieve = FactorSieve::build(hi + pt.max_offset() + 1)?;
    let prediction = dickson_prediction(&system, &bx, pmax)?;
    let counted = weighted_count(&sieve, &system, &bx)?;
    let mut t = Table::new(&[
        "beta_inf",
        "local_product",
        "prediction",
        "weighted_count",
        "ratio",
    ]);
    t.meta("subcommand", "dickson")
        .meta("tuple", join(pt.offsets()))
        .meta("lo", lo)
        .meta("hi", hi)
        .meta("pmax", pmax);
    thread_note(&mut t);
    t.row(vec![
        Value::Real(prediction.beta_inf),
        Value::Real(prediction.product),
        Value::Real(prediction.prediction),
        Value::Real(counted),
        Value::Real(counted / prediction.prediction),
    ]);
    Ok(t)
}

fn run_tuple_series(tuple: OffsetList, pmax: u64) -> Result<Table> {
    let pt = PrimeTuple::new(tuple.0)?;
    let series = tuple_singular_series(&pt, pmax)?;
    let mut t = Table::new(&["singular_series"]);
    t.meta("subcommand", "tuple-series")
        .meta("tuple", join(pt.offsets()))
        .meta("pmax", pmax);
    thread_note(&mut t);
    t.row(vec![Value::Real(series)]);
    Ok(t)
}

fn run_gallagher(k: u32, h: u64, pmax: u64) -> Result<Table> {
    let mean = gallagher_mean(k, h, pmax)?;
    let mut t = Table::new(&["k", "H", "mean"]);
    t.meta("subcommand", "gallagher")
        .meta("k", k)
        .meta("H", h)
        .meta("pmax", pmax);
    thread_note(&mut t);
    t.row(vec![
        Value::UInt(k as u64),
        Value::UInt(h),
        Value::Real(mean),
    ]);
    Ok(t)
}

fn run_digits_corr(xmax: u64, steps: u32) -> Result<Table> {
    if steps == 0 {
        bail!("need at least one step");
    }
    let shift = 2 * (steps - 1);
    if shift >= 64 || xmax >> shift < 2 {
        bail!("smallest scale X = Xmax/4^(steps-1) must be at least 2");
    }
    let sieve = FactorSieve::build(xmax)?;
    let mut t = Table::new(&["X", "correlation", "log2_abs"]);
    t.meta("subcommand", "digits-corr")
        .meta("Xmax", xmax)
        .meta("steps", steps);
    thread_note(&mut t);
    for j in 0..steps {
        let x = xmax >> (2 * (steps - 1 - j));
        let corr = prime_digit_correlation(&sieve, x)?;
        t.row(vec![
            Value::UInt(x),
            Value::Real(corr),
            Value::Real(corr.abs().log2()),
        ]);
    }
    Ok(t)
}

fn run_spectrum(k: u32, method: MethodArg) -> Result<Table> {
    let method_lib = match method {
        MethodArg::Product => SpectrumMethod::ProductFormula,
        MethodArg::Direct => SpectrumMethod::DirectTransform,
    };
    let sp = spectrum::<Real>(k, method_lib)?;
    let mut t = Table::new(&["r", "re", "im", "abs"]);
    t.meta("subcommand", "spectrum")
        .meta("k", k)
        .meta(
            "method",
            match method {
                MethodArg::Product => "product",
                MethodArg::Direct => "direct",
            },
        )
        .meta("max_abs", sp.max_abs())
        .meta("l1", sp.l1())
        .meta("parseval", sp.parseval());
    thread_note(&mut t);
    for (r, v) in sp.values().iter().enumerate() {
        t.row(vec![
            Value::UInt(r as u64),
            Value::Real(v.re),
            Value::Real(v.im),
            Value::Real(v.norm()),
        ]);
    }
    Ok(t)
}

fn run_vaughan(x: u64, u: Option<Real>, f: TestFunction) -> Result<Table> {
    let sieve = FactorSieve::build(x.max(3))?;
    let split = vaughan_split(&sieve, test_function(f), x, u)?;
    let total = split.s1 + split.s2 + split.s3 + split.s4;
    let mut t = Table::new(&["piece", "re", "im", "abs"]);
    t.meta("subcommand", "vaughan")
        .meta("X", x)
        .meta("U", split.u)
        .meta("f", function_name(f));
    thread_note(&mut t);
    for (name, v) in [
        ("s1", split.s1),
        ("s2", split.s2),
        ("s3", split.s3),
        ("s4", split.s4),
        ("total", total),
        ("direct", split.direct),
    ] {
        t.row(vec![
            Value::Text(name.into()),
            Value::Real(v.re),
            Value::Real(v.im),
            Value::Real(v.norm()),
        ]);
    }
    Ok(t)
}

fn run_type_sums(mu: u32, nu: u32, f: TestFunction, seed: u64) -> Result<Table> {
    let func = test_function(f);
    let intervals = full_dyadic_intervals(mu, nu)?;
    let type_i = type_i_sum(func, mu, &intervals)?;
    let type_i_trivial: Real = intervals.iter().map(|&(lo, hi)| (hi - lo) as Real).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut signs = |len: usize| -> Vec<Cplx> {
        (0..len)
            .map(|_| Cplx::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0))
            .collect()
    };
    let a = signs(1usize << (mu - 1));
    let b = signs(1usize << (nu - 1));
    let type_ii = type_ii_sum(func, &a, &b, mu, nu)?;
    let type_ii_trivial = (a.len() * b.len()) as Real;
    let mut t = Table::new(&["kind", "value", "trivial_bound", "ratio"]);
    t.meta("subcommand", "type-sums")
        .meta("mu", mu)
        .meta("nu", nu)
        .meta("f", function_name(f))
        .meta("seed", seed);
    thread_note(&mut t);
    t.row(vec![
        Value::Text("type_i".into()),
        Value::Real(type_i),
        Value::Real(type_i_trivial),
        Value::Real(type_i / type_i_trivial),
    ]);
    t.row(vec![
        Value::Text("type_ii".into()),
        Value::Real(type_ii.norm()),
        Value::Real(type_ii_trivial),
        Value::Real(type_ii.norm() / type_ii_trivial),
    ]);
    Ok(t)
}

fn run_gowers(n: u64, k: u32, f: GowersFunction, r: u64, seed: u64) -> Result<Table> {
    if n == 0 {
        bail!("need N ≥ 1");
    }
    let len = usize::try_from(n).context("N exceeds the addressable range")?;
    let fun: FiniteFunction = match f {
        GowersFunction::Constant => FiniteFunction::constant(len, Cplx::new(1.0, 0.0))?,
        GowersFunction::Quadratic => FiniteFunction::quadratic_phase(len)?,
        GowersFunction::Phase => FiniteFunction::phase(len, r)?,
        GowersFunction::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values = (0..len)
                .map(|_| {
                    let m: Real = rng.gen();
                    primelab::e(rng.gen::<Real>()) * m
                })
                .collect();
            FiniteFunction::bounded(values)?
        }
    };
    let norm = u_norm(&fun, k)?;
    let (argmax, coeff) = u2_inverse(&fun)?;
    let name = match f {
        GowersFunction::Constant => "constant",
        GowersFunction::Quadratic => "quadratic",
        GowersFunction::Phase => "phase",
        GowersFunction::Random => "random",
    };
    let mut t = Table::new(&["N", "k", "u_norm", "u2_argmax", "u2_coeff"]);
    t.meta("subcommand", "gowers")
        .meta("N", n)
        .meta("k", k)
        .meta("f", name)
        .meta("r", r)
        .meta("seed", seed);
    thread_note(&mut t);
    t.row(vec![
        Value::UInt(n),
        Value::UInt(k as u64),
        Value::Real(norm),
        Value::UInt(argmax),
        Value::Real(coeff),
    ]);
    Ok(t)
}

fn run_wtrick(w: u64, b: u64, m: u64) -> Result<Table> {
    let top = w
        .checked_mul(m)
        .and_then(|v| v.checked_add(b))
        .context("W·M + b overflows")?;
    let sieve = FactorSieve::build(top.max(3))?;
    let out = w_tricked_lambda(&sieve, b, w, m)?;
    let mut t = Table::new(&["W", "b", "M", "mean"]);
    t.meta("subcommand", "wtrick")
        .meta("W", w)
        .meta("b", b)
        .meta("M", m);
    thread_note(&mut t);
    t.row(vec![
        Value::UInt(w),
        Value::UInt(b),
        Value::UInt(m),
        Value::Real(out.mean),
    ]);
    Ok(t)
}

fn run_heisenberg(alpha: Real, beta: Real, gamma: Real, n: u64) -> Result<Table> {
    let mut t = Table::new(&["n", "raw_a", "raw_b", "raw_c", "red_a", "red_b", "red_c"]);
    t.meta("subcommand", "heisenberg")
        .meta("alpha", alpha)
        .meta("beta", beta)
        .meta("gamma", gamma)
        .meta("n", n);
    thread_note(&mut t);
    for j in 0..=n {
        let orbit = heisenberg_orbit(alpha, beta, gamma, j)?;
        t.row(vec![
            Value::UInt(j),
            Value::Real(orbit.raw[0]),
            Value::Real(orbit.raw[1]),
            Value::Real(orbit.raw[2]),
            Value::Real(orbit.reduced[0]),
            Value::Real(orbit.reduced[1]),
            Value::Real(orbit.reduced[2]),
        ]);
    }
    Ok(t)
}
