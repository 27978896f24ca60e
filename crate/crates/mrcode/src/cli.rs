//! Command-line front end: construction, verification, distance and
//! bound calculators, encode/decode, a parameter sweep, and an embedded
//! regression self-test.
//!
//! Exit codes: 0 success/verified, 1 counterexample found, 2 usage or
//! parameter error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::codec::{self, Codeword, CodewordJson};
use crate::gf::Element;
use crate::mrcons::{build_code_with, CodeJson, MrCode, MrParams};
use crate::verify::{
    self, count_maximal_patterns, field_size_lower_bound, min_distance_bruteforce,
    singleton_lrc_bound, Method,
};

/// A reference 5x9 parity-check matrix over GF(16), bundled as the
/// regression target for `selftest`.
pub const EXAMPLE1_JSON: &str = include_str!("../fixtures/example1.json");

#[derive(Parser)]
#[command(name = "mrcode", version, about = "Maximally recoverable codes from linearized Reed-Solomon blocks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a code instance and emit its JSON description
    Construct {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check maximal recoverability over every maximal erasure pattern
    Verify {
        #[command(flatten)]
        source: CodeSource,
        /// direct | reduction | definition
        #[arg(long, value_enum, default_value_t = MethodArg::Direct)]
        method: MethodArg,
        /// cap on parallel workers
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force minimum distance next to the closed-form prediction
    Mindist {
        #[command(flatten)]
        source: CodeSource,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Encode a k-symbol message
    Encode {
        /// code description JSON
        #[arg(long = "in")]
        input: PathBuf,
        /// comma-separated message symbols, e.g. "a^3,0,1,a"
        #[arg(long)]
        message: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fill in the erased (null) symbols of a received word
    Decode {
        /// code description JSON
        #[arg(long = "in")]
        input: PathBuf,
        /// codeword JSON with null marking erasures
        #[arg(long)]
        word: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance and field-size bound calculators
    Bound {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        delta: u32,
        /// also evaluate the field-size lower bound for these h, m
        #[arg(long)]
        h: Option<u32>,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Verify every valid parameter tuple within the given caps
    Sweep {
        #[arg(long, default_value_t = 4)]
        min_q: u64,
        #[arg(long, default_value_t = 9)]
        max_q: u64,
        #[arg(long, default_value_t = 4)]
        max_r: u32,
        #[arg(long, default_value_t = 3)]
        max_delta: u32,
        #[arg(long, default_value_t = 3)]
        max_h: u32,
        #[arg(long, default_value_t = 4)]
        max_m: u32,
        /// skip tuples with more maximal patterns than this
        #[arg(long, default_value_t = 1_000_000)]
        pattern_cap: u128,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run the embedded regression against the bundled example
    Selftest,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    e: u32,
    #[arg(long)]
    r: u32,
    #[arg(long)]
    delta: u32,
    #[arg(long)]
    h: u32,
    #[arg(long)]
    m: u32,
    /// comma-separated evaluation points, e.g. "a^0,a^5,a^10"
    #[arg(long)]
    alphas: Option<String>,
    /// comma-separated GF(q)-basis of GF(Q), h elements
    #[arg(long)]
    gamma_basis: Option<String>,
}

/// Either a code JSON file or construction parameters.
#[derive(Args)]
struct CodeSource {
    /// code description JSON; alternative to the parameter flags
    #[arg(long = "in", conflicts_with_all = ["p", "e", "r", "delta", "h", "m"])]
    input: Option<PathBuf>,
    #[arg(long, requires_all = ["e", "r", "delta", "h", "m"])]
    p: Option<u64>,
    #[arg(long)]
    e: Option<u32>,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long)]
    delta: Option<u32>,
    #[arg(long)]
    h: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long)]
    gamma_basis: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// canonical JSON with integer-coded elements
    Json,
    /// human-readable table
    Table,
    /// JSON with power-notation elements ("a^6")
    Pow,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Direct,
    Reduction,
    Definition,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Direct => Method::Direct,
            MethodArg::Reduction => Method::Reduction,
            MethodArg::Definition => Method::Definition,
        }
    }
}

/// Parses argv and runs the selected subcommand, returning the process
/// exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version with success exits
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32, String> {
    match cmd {
        Command::Construct {
            params,
            format,
            out,
        } => construct_cmd(params, format, out),
        Command::Verify {
            source,
            method,
            jobs,
            out,
        } => verify_cmd(source, method.into(), jobs, out),
        Command::Mindist { source, format } => mindist_cmd(source, format),
        Command::Encode {
            input,
            message,
            format,
            out,
        } => encode_cmd(input, &message, format, out),
        Command::Decode {
            input,
            word,
            format,
            out,
        } => decode_cmd(input, word, format, out),
        Command::Bound {
            n,
            k,
            r,
            delta,
            h,
            m,
            format,
        } => bound_cmd(n, k, r, delta, h, m, format),
        Command::Sweep {
            min_q,
            max_q,
            max_r,
            max_delta,
            max_h,
            max_m,
            pattern_cap,
            jobs,
        } => sweep_cmd(min_q, max_q, max_r, max_delta, max_h, max_m, pattern_cap, jobs),
        Command::Selftest => selftest_cmd(),
    }
}

fn parse_elements(code: &MrCode, text: &str) -> Result<Vec<Element>, String> {
    text.split(',')
        .map(|s| code.tower().parse_element(s.trim()).map_err(|e| e.to_string()))
        .collect()
}

fn build_from_params(args: &ParamArgs) -> Result<MrCode, String> {
    let params = MrParams {
        p: args.p,
        e: args.e,
        r: args.r,
        delta: args.delta,
        h: args.h,
        m: args.m,
    };
    build_with_overrides(&params, args.alphas.as_deref(), args.gamma_basis.as_deref())
}

fn build_with_overrides(
    params: &MrParams,
    alphas: Option<&str>,
    basis: Option<&str>,
) -> Result<MrCode, String> {
    // element parsing needs the tower, so build once without overrides
    let plain = build_code_with(params, None, None).map_err(|e| e.to_string())?;
    if alphas.is_none() && basis.is_none() {
        return Ok(plain);
    }
    let alphas = alphas
        .map(|s| parse_elements(&plain, s))
        .transpose()?;
    let basis = basis.map(|s| parse_elements(&plain, s)).transpose()?;
    build_code_with(params, alphas, basis).map_err(|e| e.to_string())
}

fn load_code(source: &CodeSource) -> Result<MrCode, String> {
    match (&source.input, source.p) {
        (Some(path), _) => read_code(path),
        (None, Some(p)) => {
            let params = MrParams {
                p,
                e: source.e.unwrap(),
                r: source.r.unwrap(),
                delta: source.delta.unwrap(),
                h: source.h.unwrap(),
                m: source.m.unwrap(),
            };
            build_with_overrides(
                &params,
                source.alphas.as_deref(),
                source.gamma_basis.as_deref(),
            )
        }
        (None, None) => Err("either --in or the parameter flags are required".into()),
    }
}

fn read_code(path: &PathBuf) -> Result<MrCode, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let json: CodeJson = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    MrCode::from_json(&json).map_err(|e| e.to_string())
}

fn emit(text: String, out: Option<PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            let mut stdout = std::io::stdout();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.write_all(b"\n"))
                .map_err(|e| e.to_string())
        }
    }
}

fn construct_cmd(args: ParamArgs, format: Format, out: Option<PathBuf>) -> Result<i32, String> {
    let code = build_from_params(&args)?;
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&code.to_json(false)).unwrap(),
        Format::Pow => serde_json::to_string_pretty(&code.to_json(true)).unwrap(),
        Format::Table => matrix_table(&code),
    };
    emit(text, out)?;
    Ok(0)
}

fn matrix_table(code: &MrCode) -> String {
    let h = code.parity_check();
    let t = code.tower();
    let cells: Vec<Vec<String>> = (0..h.rows())
        .map(|i| (0..h.cols()).map(|j| t.format_element(h.get(i, j), true)).collect())
        .collect();
    let width = cells
        .iter()
        .flatten()
        .map(|s| s.len())
        .max()
        .unwrap_or(1);
    let p = code.params();
    let mut out = format!(
        "H for (n={}, r={}, h={}, delta={}) over GF({}), {} rows x {} cols\n",
        p.n(),
        p.r,
        p.h,
        p.delta,
        t.order(),
        h.rows(),
        h.cols()
    );
    for row in &cells {
        let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out.pop();
    out
}

fn verify_cmd(
    source: CodeSource,
    method: Method,
    jobs: Option<usize>,
    out: Option<PathBuf>,
) -> Result<i32, String> {
    let code = load_code(&source)?;
    let report = verify::verify_mr(&code, method, jobs).map_err(|e| e.to_string())?;
    let verified = report.is_mr();
    let text = serde_json::to_string_pretty(&report.to_json()).unwrap();
    emit(text, out)?;
    Ok(if verified { 0 } else { 1 })
}

fn mindist_cmd(source: CodeSource, format: Format) -> Result<i32, String> {
    let code = load_code(&source)?;
    let p = code.params();
    let measured = min_distance_bruteforce(&code).map_err(|e| e.to_string())?;
    let predicted = p.predicted_distance();
    let bound = singleton_lrc_bound(p.n(), p.k(), p.r as usize, p.delta as usize);
    let text = match format {
        Format::Table => format!(
            "brute-force distance: {measured}\npredicted distance:   {predicted}\nSingleton-type bound: {bound}"
        ),
        _ => serde_json::to_string_pretty(&serde_json::json!({
            "min_distance": measured,
            "predicted_distance": predicted,
            "singleton_lrc_bound": bound,
        }))
        .unwrap(),
    };
    emit(text, None)?;
    Ok(if measured == predicted { 0 } else { 1 })
}

fn encode_cmd(
    input: PathBuf,
    message: &str,
    format: Format,
    out: Option<PathBuf>,
) -> Result<i32, String> {
    let code = read_code(&input)?;
    let msg = parse_elements(&code, message)?;
    let g = codec::generator(&code);
    let word = codec::encode(&code, &g, &msg).map_err(|e| e.to_string())?;
    let cw = Codeword::from_full(&word);
    let text =
        serde_json::to_string_pretty(&cw.to_json(code.tower(), format == Format::Pow)).unwrap();
    emit(text, out)?;
    Ok(0)
}

fn decode_cmd(
    input: PathBuf,
    word: PathBuf,
    format: Format,
    out: Option<PathBuf>,
) -> Result<i32, String> {
    let code = read_code(&input)?;
    let text = fs::read_to_string(&word).map_err(|e| format!("{}: {e}", word.display()))?;
    let json: CodewordJson = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let received = Codeword::from_json(&json, code.tower()).map_err(|e| e.to_string())?;
    match codec::decode_erasures(&code, &received) {
        Ok(symbols) => {
            let cw = Codeword::from_full(&symbols);
            let text = serde_json::to_string_pretty(&cw.to_json(code.tower(), format == Format::Pow))
                .unwrap();
            emit(text, out)?;
            Ok(0)
        }
        Err(e @ codec::CodecError::UnrecoverablePattern { .. }) => {
            eprintln!("error: {e}");
            Ok(1)
        }
        Err(e) => Err(e.to_string()),
    }
}

#[allow(clippy::too_many_arguments)]
fn bound_cmd(
    n: usize,
    k: usize,
    r: u32,
    delta: u32,
    h: Option<u32>,
    m: Option<u32>,
    format: Format,
) -> Result<i32, String> {
    if k == 0 || r == 0 || delta < 2 {
        return Err("need k >= 1, r >= 1, delta >= 2".into());
    }
    let d = singleton_lrc_bound(n, k, r as usize, delta as usize);
    let field_bound = match (h, m) {
        (Some(h), Some(m)) => Some(field_size_lower_bound(n, r, delta, h, m).map_err(|e| e.to_string())?),
        (None, None) => None,
        _ => return Err("--h and --m must be given together".into()),
    };
    let text = match format {
        Format::Table => {
            let mut t = format!("distance bound: d <= {d}");
            if let Some(b) = &field_bound {
                t.push_str(&format!(
                    "\nfield-size bound: q = Omega({}) ~ {} (case {}, epsilon = {})",
                    b.expression,
                    b.value,
                    b.case_id.map_or("general".to_string(), |c| c.to_string()),
                    b.epsilon
                ));
            }
            t
        }
        _ => serde_json::to_string_pretty(&serde_json::json!({
            "distance_bound": d,
            "field_size_bound": field_bound,
        }))
        .unwrap(),
    };
    emit(text, None)?;
    Ok(0)
}

fn prime_powers(min_q: u64, max_q: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for p in 2..=max_q {
        if !(2..p).any(|d| p % d == 0) {
            let mut q = p;
            let mut e = 1;
            while q <= max_q {
                if q >= min_q {
                    out.push((p, e));
                }
                q *= p;
                e += 1;
            }
        }
    }
    out.sort_by_key(|&(p, e)| (0..e).fold(1u64, |acc, _| acc * p));
    out
}

#[allow(clippy::too_many_arguments)]
fn sweep_cmd(
    min_q: u64,
    max_q: u64,
    max_r: u32,
    max_delta: u32,
    max_h: u32,
    max_m: u32,
    pattern_cap: u128,
    jobs: Option<usize>,
) -> Result<i32, String> {
    let mut failures = 0usize;
    let mut rows = 0usize;
    println!(
        "{:>3} {:>2} {:>2} {:>6} {:>2} {:>2} {:>4} {:>4} {:>9} {:>4} {:>6} {:>6}",
        "q", "e", "r", "delta", "h", "m", "n", "k", "patterns", "MR", "d", "d_pred"
    );
    for (p, e) in prime_powers(min_q, max_q) {
        for delta in 2..=max_delta {
            for h in 1..=max_h {
                for r in 1..=max_r {
                    for m in 1..=max_m {
                        let params = MrParams { p, e, r, delta, h, m };
                        if params.validate().is_err() {
                            continue;
                        }
                        let count = count_maximal_patterns(&params);
                        if count > pattern_cap {
                            continue;
                        }
                        rows += 1;
                        let code = build_code_with(&params, None, None)
                            .map_err(|err| err.to_string())?;
                        let report = verify::verify_mr(&code, Method::Direct, jobs)
                            .map_err(|err| err.to_string())?;
                        let mr_ok = report.is_mr();
                        let words = (code.tower().order() as u128).pow(params.k() as u32);
                        let (d_text, d_ok) = if words <= 1_000_000 {
                            let d = min_distance_bruteforce(&code).map_err(|err| err.to_string())?;
                            (d.to_string(), d == params.predicted_distance())
                        } else {
                            ("-".to_string(), true)
                        };
                        if !mr_ok || !d_ok {
                            failures += 1;
                        }
                        println!(
                            "{:>3} {:>2} {:>2} {:>6} {:>2} {:>2} {:>4} {:>4} {:>9} {:>4} {:>6} {:>6}",
                            params.q(),
                            e,
                            r,
                            delta,
                            h,
                            m,
                            params.n(),
                            params.k(),
                            count,
                            if mr_ok { "yes" } else { "NO" },
                            d_text,
                            params.predicted_distance()
                        );
                    }
                }
            }
        }
    }
    println!("{rows} instances, {failures} failures");
    Ok(if failures == 0 { 0 } else { 1 })
}

fn selftest_cmd() -> Result<i32, String> {
    let json: CodeJson = serde_json::from_str(EXAMPLE1_JSON).unwrap();
    let code = MrCode::from_json(&json).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut check = |name: &str, pass: bool| {
        println!("{name}: {}", if pass { "ok" } else { "FAILED" });
        ok &= pass;
    };
    let h = code.parity_check();
    check("matrix shape 5x9", h.rows() == 5 && h.cols() == 9);
    check("matrix rank 5", h.rank() == 5);
    let report = verify::verify_mr(&code, Method::Direct, None).map_err(|e| e.to_string())?;
    check("108 maximal patterns", report.total_patterns == 108);
    check("all patterns recoverable", report.is_mr());
    let d = min_distance_bruteforce(&code).map_err(|e| e.to_string())?;
    check("minimum distance 5", d == 5);
    check(
        "distance meets the Singleton-type bound",
        d == singleton_lrc_bound(9, 4, 2, 2),
    );
    Ok(if ok { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_example_loads_and_verifies() {
        let json: CodeJson = serde_json::from_str(EXAMPLE1_JSON).unwrap();
        let code = MrCode::from_json(&json).unwrap();
        assert_eq!(code.parity_check().rows(), 5);
        assert_eq!(code.parity_check().cols(), 9);
        assert_eq!(code.parity_check().rank(), 5);
        let report = verify::verify_mr(&code, Method::Direct, None).unwrap();
        assert_eq!(report.total_patterns, 108);
        assert!(report.is_mr());
    }

    #[test]
    fn prime_power_listing() {
        assert_eq!(
            prime_powers(4, 9),
            vec![(2, 2), (5, 1), (7, 1), (2, 3), (3, 2)]
        );
    }

    #[test]
    fn selftest_passes() {
        assert_eq!(selftest_cmd().unwrap(), 0);
    }
}
