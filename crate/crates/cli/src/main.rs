use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use splinegabor::bspline::{bspline_centered, partly_pou_samples, verify_partly_pou};
use splinegabor::framesets::{
    certify_row_dependence, certify_zero_row, classify_point, painless_dual, verify_duality,
};
use splinegabor::numerics::{format_rational, int, parse_rational, to_f64, Rational};
use splinegabor::scan::{RationalRange, ScanMode, ScanRow, ScanSpec};
use splinegabor::zz::{
    frame_bounds_estimate, GaborParams, GridSpec, Variant, DEFAULT_REFINE_STEPS,
};
use splinegabor::Error;

const EXIT_NOT_CERTIFIED: u8 = 1;
const EXIT_BAD_PARAMETER: u8 = 3;
const EXIT_IO: u8 = 4;

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn range(s: &str) -> Result<RationalRange, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Parser)]
#[command(
    name = "splinegabor",
    version,
    about = "Gabor frame bounds and non-frame certificates for B-spline windows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Phi,
    Psi,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Phi => Variant::Phi,
            VariantArg::Psi => Variant::Psi,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Hyperbola,
    HorizontalLine,
    Plane,
}

#[derive(clap::Args)]
struct Estimation {
    /// Sampling grid, e.g. 128x128.
    #[arg(long, default_value = "128x128")]
    grid: GridSpec,
    /// Local refinement steps around the extrema.
    #[arg(long, default_value_t = DEFAULT_REFINE_STEPS)]
    refine: u32,
    #[arg(long, value_enum, default_value = "phi")]
    variant: VariantArg,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Estimate the frame bounds of G(B_n, a, b).
    Bounds {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = rational)]
        a: Rational,
        #[arg(long, value_parser = rational)]
        b: Rational,
        #[command(flatten)]
        est: Estimation,
    },
    /// Produce an exact non-frame certificate.
    Certify {
        #[command(subcommand)]
        kind: CertifyKind,
    },
    /// Scan a line, hyperbola or rectangle of the (a, b) plane into CSV.
    Scan {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, default_value_t = 2)]
        n: u32,
        /// ab for hyperbola mode.
        #[arg(long, value_parser = rational)]
        ratio: Option<Rational>,
        /// Fixed b for horizontal-line mode.
        #[arg(long, value_parser = rational)]
        b: Option<Rational>,
        /// Free variable as lo:hi:step (b for hyperbola, a for horizontal-line).
        #[arg(long, value_parser = range)]
        range: Option<RationalRange>,
        /// a-range for plane mode, lo:hi:step.
        #[arg(long, value_parser = range)]
        a_range: Option<RationalRange>,
        /// b-range for plane mode, lo:hi:step.
        #[arg(long, value_parser = range)]
        b_range: Option<RationalRange>,
        /// Attach a grid estimate of sqrtA to Unknown points in plane mode.
        #[arg(long)]
        estimate: bool,
        #[command(flatten)]
        est: Estimation,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the painless dual window and verify the duality equations exactly.
    Dual {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = rational)]
        a: Rational,
        #[arg(long, value_parser = rational)]
        b: Rational,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Check that translates of N_n along (1/c)Z sum to a constant on their region.
    Pou {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = rational)]
        c: Rational,
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
    /// Label (a, b) by the known frame and non-frame regions.
    Classify {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = rational)]
        a: Rational,
        #[arg(long, value_parser = rational)]
        b: Rational,
        #[arg(long)]
        estimate: bool,
    },
}

#[derive(Subcommand)]
enum CertifyKind {
    /// Zero row of the Zibulski-Zeevi matrix of N_n, a = p/(qb).
    #[command(name = "thm34", alias = "zero-row")]
    ZeroRow {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long, value_parser = rational)]
        b: Rational,
    },
    /// Row dependence of Psi(0, 0) for B_2 on ab = 5/6.
    #[command(name = "thm35", alias = "row-dependence")]
    RowDependence {
        #[arg(long, value_parser = rational)]
        a: Rational,
    },
}

enum Failure {
    NotCertified(String),
    BadParameter(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotCertified(m) => Failure::NotCertified(m),
            other => Failure::BadParameter(other.to_string()),
        }
    }
}

fn print_json<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

/// Decimal with 12 significant digits.
fn sig12(x: &Rational) -> String {
    let v = to_f64(x);
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs().log10().floor() as i32;
    if (-4..12).contains(&mag) {
        format!("{:.*}", (11 - mag).max(0) as usize, v)
    } else {
        format!("{v:.11e}")
    }
}

fn float_cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn open_csv(path: &Path) -> Result<csv::Writer<std::fs::File>, Failure> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_csv(
    mut w: csv::Writer<std::fs::File>,
    path: &Path,
    rows: &[ScanRow],
    plane: bool,
) -> Result<(), Failure> {
    let io = |e: csv::Error| Failure::Io(format!("{}: {e}", path.display()));
    let header: &[&str] = if plane {
        &["a", "b", "a_exact", "b_exact", "label", "sqrtA"]
    } else {
        &["a", "b", "a_exact", "b_exact", "sqrtA", "sqrtB"]
    };
    w.write_record(header).map_err(io)?;
    for r in rows {
        let mut rec = vec![
            sig12(&r.a),
            sig12(&r.b),
            format_rational(&r.a),
            format_rational(&r.b),
        ];
        if plane {
            rec.push(r.label.map(|l| l.to_string()).unwrap_or_default());
            rec.push(float_cell(r.sqrt_a));
        } else {
            rec.push(float_cell(r.sqrt_a));
            rec.push(float_cell(r.sqrt_b));
        }
        w.write_record(&rec).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn require<T>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::BadParameter(format!("--{flag} is required for this mode")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Bounds { n, a, b, est } => {
            if &a * &b >= int(1) {
                eprintln!(
                    "warning: ab = {} is not below 1; G(g, a, b) cannot be a frame",
                    format_rational(&(&a * &b))
                );
            }
            let params = GaborParams::new(a, b)?;
            let report = frame_bounds_estimate(
                &bspline_centered(n)?,
                &params,
                est.variant.into(),
                est.grid,
                est.refine,
            )?;
            print_json(&report);
        }
        Command::Certify { kind } => {
            let cert = match kind {
                CertifyKind::ZeroRow { n, p, q, b } => certify_zero_row(n, p, q, &b),
                CertifyKind::RowDependence { a } => certify_row_dependence(&a),
            };
            match cert {
                Ok(c) => print_json(&c),
                Err(Error::NotCertified(reason)) => {
                    print_json(&json!({ "certified": false, "reason": reason }));
                    return Err(Failure::NotCertified(reason));
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Scan {
            mode,
            n,
            ratio,
            b,
            range,
            a_range,
            b_range,
            estimate,
            est,
            workers,
            out,
        } => {
            let mode = match mode {
                ModeArg::Hyperbola => ScanMode::Hyperbola {
                    ratio: require(ratio, "ratio")?,
                    b: require(range, "range")?,
                },
                ModeArg::HorizontalLine => ScanMode::HorizontalLine {
                    b: require(b, "b")?,
                    a: require(range, "range")?,
                },
                ModeArg::Plane => ScanMode::Plane {
                    a: require(a_range, "a-range")?,
                    b: require(b_range, "b-range")?,
                    estimate_unknown: estimate,
                },
            };
            let plane = matches!(mode, ScanMode::Plane { .. });
            let spec = ScanSpec {
                mode,
                n,
                grid: est.grid,
                refine_steps: est.refine,
                variant: est.variant.into(),
                workers,
            };
            // Fail on an unwritable path before doing any work.
            let writer = open_csv(&out)?;
            let rows = spec.run()?;
            write_csv(writer, &out, &rows, plane)?;
            print_json(&json!({
                "out": out.display().to_string(),
                "rows": rows.len(),
                "n": n,
                "grid": [spec.grid.nx, spec.grid.nnu],
                "refine_steps": spec.refine_steps,
                "variant": spec.variant,
                "workers": workers,
            }));
        }
        Command::Dual { n, a, b, samples } => {
            let g = bspline_centered(n)?;
            let h = painless_dual(&g, n, &a, &b)?;
            let steps = samples.max(1) as i64;
            let xs: Vec<Rational> = (0..steps)
                .map(|j| -&a / int(2) + &a * Rational::new(j.into(), steps.into()))
                .collect();
            let report = verify_duality(&g, &h, &a, &b, &xs);
            print_json(&json!({
                "pass": report.pass,
                "max_violation_m": report.max_violation_m,
                "c": format_rational(&h.c),
                "lower_bound_c2_over_b": format_rational(&h.lower_bound),
                "samples": xs.len(),
            }));
        }
        Command::Pou { n, c, samples } => {
            let xs = partly_pou_samples(n, &c, samples);
            let report = verify_partly_pou(n, &c, &xs)?;
            print_json(&json!({
                "is_constant": report.is_constant,
                "constant": report.constant.as_ref().map(format_rational),
                "samples": xs.len(),
            }));
        }
        Command::Classify { n, a, b, estimate } => {
            let c = classify_point(n, &a, &b, estimate)?;
            print_json(&c);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::NotCertified(reason)) => {
            eprintln!("no certificate: {reason}");
            ExitCode::from(EXIT_NOT_CERTIFIED)
        }
        Err(Failure::BadParameter(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_BAD_PARAMETER)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}
