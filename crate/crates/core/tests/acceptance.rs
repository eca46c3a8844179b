//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use splinegabor::bspline::{bspline_centered, cardinal, PiecewisePolynomial};
use splinegabor::framesets::{
    certify_row_dependence, certify_zero_row, conjectured_curve_scan, painless_dual,
    sigma_membership, verify_duality,
};
use splinegabor::numerics::{format_rational, int, rat, round_nearest, to_f64, Rational};
use splinegabor::scan::{RationalRange, ScanMode, ScanRow, ScanSpec};
use splinegabor::zak::{quasi_periodicity_residual, residue_decomposition, zak_transform};
use splinegabor::zz::{
    frame_bounds_estimate, painless_bounds_closed_form, psi_matrix_exact_unscaled, GaborParams,
    GridSpec, Variant,
};

type Criterion = (&'static str, fn() -> Outcome);

const TWO_MINUTES: Duration = Duration::from_secs(120);

struct Outcome {
    pass: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, msg: impl Into<String>) {
        if !ok {
            self.pass = false;
            self.details.push(format!("FAILED {}", msg.into()));
        }
    }

    fn note(&mut self, msg: impl Into<String>) {
        self.details.push(msg.into());
    }
}

fn scan(mode: ScanMode, grid: GridSpec) -> Vec<ScanRow> {
    ScanSpec {
        mode,
        n: 2,
        grid,
        refine_steps: 20,
        variant: Variant::Phi,
        workers: 0,
    }
    .run()
    .expect("scan runs")
}

fn range(lo: Rational, hi: Rational, step: Rational) -> RationalRange {
    RationalRange::new(lo, hi, step).unwrap()
}

fn hyperbola_scan() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let rows = scan(
        ScanMode::Hyperbola {
            ratio: rat(5, 6),
            b: range(rat(11, 5), rat(14, 5), rat(1, 100)),
        },
        GridSpec { nx: 64, nnu: 64 },
    );
    let elapsed = start.elapsed();
    let plotted = [
        (rat(22, 10), 0.02048),
        (rat(225, 100), 0.008507),
        (rat(23, 10), 0.004508),
        (rat(27, 10), 0.003845),
        (rat(275, 100), 0.006351),
        (rat(28, 10), 0.005074),
    ];
    for (b, expected) in plotted {
        let row = rows
            .iter()
            .find(|r| r.b == b)
            .expect("b is on the scan grid");
        let got = row.sqrt_a.unwrap();
        let scaled = got * to_f64(&b).sqrt();
        o.check(
            (got - expected).abs() <= 0.005,
            format!(
                "b = {}: sqrtA = {got:.6} vs plotted {expected} (±0.005)",
                format_rational(&b)
            ),
        );
        o.note(format!(
            "b = {}: sqrtA = {got:.6}, sqrt(b)*sqrtA = {scaled:.6}, plotted {expected}",
            format_rational(&b)
        ));
    }
    let (lo, hi) = (rat(234, 100), rat(266, 100));
    let mut worst: f64 = 0.0;
    for r in rows.iter().filter(|r| r.b >= lo && r.b <= hi) {
        let v = r.sqrt_a.unwrap();
        worst = worst.max(v);
        o.check(
            v <= 1e-8,
            format!("b = {}: sqrtA = {v:e} > 1e-8", format_rational(&r.b)),
        );
    }
    o.note(format!("max sqrtA on [2.34, 2.66]: {worst:e}"));
    o.check(elapsed < TWO_MINUTES, format!("runtime {elapsed:?}"));
    o.note(format!("{} points in {elapsed:.2?}", rows.len()));
    o
}

fn horizontal_line_scan() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let b = rat(5, 2);
    let grid = GridSpec { nx: 64, nnu: 64 };
    let mut rows = scan(
        ScanMode::HorizontalLine {
            b: b.clone(),
            a: range(rat(1, 50), rat(2, 5), rat(1, 50)),
        },
        grid,
    );
    rows.extend(scan(
        ScanMode::HorizontalLine {
            b: b.clone(),
            a: range(rat(1, 3), rat(1, 3), rat(1, 3)),
        },
        grid,
    ));
    let elapsed = start.elapsed();
    let at = |a: Rational| rows.iter().find(|r| r.a == a).unwrap().sqrt_a.unwrap();
    for (a, expected) in [(rat(1, 5), 0.1046), (rat(3, 10), 0.0987)] {
        let got = at(a.clone());
        o.check(
            (got - expected).abs() <= 0.01,
            format!(
                "a = {}: sqrtA = {got:.6} vs plotted {expected} (±0.01)",
                format_rational(&a)
            ),
        );
        o.note(format!(
            "a = {}: sqrtA = {got:.6}, sqrt(b)*sqrtA = {:.6}, plotted {expected}",
            format_rational(&a),
            got * to_f64(&b).sqrt()
        ));
    }
    let zero = at(rat(1, 3));
    o.check(zero <= 1e-8, format!("a = 1/3: sqrtA = {zero:e}"));
    o.note(format!("a = 1/3: sqrtA = {zero:e}"));
    o.check(elapsed < TWO_MINUTES, format!("runtime {elapsed:?}"));
    o.note(format!("{} points in {elapsed:.2?}", rows.len()));
    o
}

fn row_dependence_certificates() -> Outcome {
    let mut o = Outcome::new();
    let b2 = bspline_centered(2).unwrap();
    let v = [0, -1, -1, 0, 1, 1];
    for a in [rat(5, 16), rat(1, 3), rat(5, 14)] {
        let tag = format_rational(&a);
        let cert = certify_row_dependence(&a);
        o.check(
            cert.is_ok(),
            format!("a = {tag}: no certificate ({:?})", cert.as_ref().err()),
        );
        if let Ok(c) = &cert {
            let s = c.witness_sigma_min().unwrap();
            o.check(s < 1e-10, format!("a = {tag}: witness sigma_min = {s:e}"));
            o.note(format!("a = {tag}: certificate, witness sigma_min = {s:e}"));
        }
        // Rows without the common factor b^{-1/2}.
        let params = GaborParams::new(a.clone(), rat(5, 6) / &a).unwrap();
        let rows = psi_matrix_exact_unscaled(&b2, &params, &Rational::zero()).unwrap();
        let diff = |i: usize, j: usize| -> Vec<Rational> {
            rows[i].iter().zip(&rows[j]).map(|(x, y)| x - y).collect()
        };
        let times = |s: &Rational| -> Vec<Rational> { v.iter().map(|&c| s * int(c)).collect() };
        let d25 = diff(1, 4);
        let d34 = diff(2, 3);
        o.check(
            d25 == times(&(&a * int(2))),
            format!("a = {tag}: R2 - R5 != 2a[0,-1,-1,0,1,1]"),
        );
        let half: Vec<Rational> = d25.iter().map(|x| x / int(2)).collect();
        let ratio = d34
            .iter()
            .zip(&d25)
            .find(|(_, y)| !y.is_zero())
            .map(|(x, y)| x / y)
            .unwrap();
        o.check(
            d34 == half,
            format!(
                "a = {tag}: R3 - R4 is {} x (R2 - R5), not half of it",
                format_rational(&ratio)
            ),
        );
    }
    o
}

fn zero_row_certificates() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let n = 2i64;
    let (mut found, mut refused) = (0, 0);
    for (p, q) in [(1u64, 2u64), (1, 3), (2, 3), (1, 4), (3, 4), (1, 5)] {
        let nq = n * q as i64;
        for r in [2i64, 3] {
            for s in [rat(1, 2 * nq), rat(-1, 2 * nq), rat(1, nq), rat(-1, nq)] {
                let b = int(r) + s;
                match certify_zero_row(n as u32, p, q, &b) {
                    Ok(c) => {
                        found += 1;
                        let sigma = c.witness_sigma_min().unwrap();
                        o.check(
                            sigma < 1e-10,
                            format!(
                                "p/q = {p}/{q}, b = {}: sigma_min {sigma:e}",
                                format_rational(&b)
                            ),
                        );
                    }
                    Err(e) => o.check(
                        false,
                        format!("p/q = {p}/{q}, b = {}: {e}", format_rational(&b)),
                    ),
                }
            }
            if p == 1 {
                for s in [rat(2, nq), rat(-2, nq)] {
                    let b = int(r) + s;
                    let res = certify_zero_row(n as u32, p, q, &b);
                    o.check(
                        res.is_err(),
                        format!(
                            "p/q = 1/{q}, b = {}: unexpected certificate",
                            format_rational(&b)
                        ),
                    );
                    refused += 1;
                }
            }
        }
    }
    o.note(format!(
        "{found} certificates, {refused} refusals in {:.2?}",
        start.elapsed()
    ));
    o
}

fn painless_agreement() -> Outcome {
    let mut o = Outcome::new();
    for (n, a, b) in [
        (2, int(1), rat(1, 2)),
        (2, rat(1, 2), rat(1, 2)),
        (3, int(1), rat(1, 3)),
    ] {
        let g = bspline_centered(n).unwrap();
        let closed = painless_bounds_closed_form(&g, &a, &b).unwrap();
        let params = GaborParams::new(a.clone(), b.clone()).unwrap();
        let est = frame_bounds_estimate(&g, &params, Variant::Phi, GridSpec::DEFAULT, 20).unwrap();
        let (da, db) = (
            (est.sqrt_a - closed.sqrt_a).abs(),
            (est.sqrt_b - closed.sqrt_b).abs(),
        );
        let tag = format!(
            "(n, a, b) = ({n}, {}, {})",
            format_rational(&a),
            format_rational(&b)
        );
        o.check(
            da <= 1e-6 && db <= 1e-6,
            format!("{tag}: |dA| = {da:e}, |dB| = {db:e}"),
        );
        o.note(format!(
            "{tag}: closed ({:.9}, {:.9}), estimate ({:.9}, {:.9})",
            closed.sqrt_a, closed.sqrt_b, est.sqrt_a, est.sqrt_b
        ));
        if n == 2 && a == int(1) {
            o.check(
                closed.sqrt_a == 1.0 && closed.sqrt_b == 2f64.sqrt(),
                format!(
                    "closed form ({}, {}) is not (1, sqrt 2)",
                    closed.sqrt_a, closed.sqrt_b
                ),
            );
        }
    }
    o
}

fn random_rational(rng: &mut StdRng, max_num: i64, max_den: i64) -> Rational {
    rat(rng.gen_range(1..=max_num), rng.gen_range(1..=max_den))
}

fn duality() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = StdRng::seed_from_u64(0x5eed_0002);
    let g = bspline_centered(2).unwrap();
    let grid = GridSpec { nx: 16, nnu: 16 };
    let mut points = 0;
    let mut min_slack = f64::INFINITY;
    while points < 25 {
        let a = random_rational(&mut rng, 12, 6);
        let b = random_rational(&mut rng, 6, 8);
        if !sigma_membership(2, &a, &b) {
            continue;
        }
        points += 1;
        let tag = format!(
            "(a, b) = ({}, {})",
            format_rational(&a),
            format_rational(&b)
        );
        let h = painless_dual(&g, 2, &a, &b).unwrap();
        let half = &a / int(2);
        let xs: Vec<Rational> = (0..20)
            .map(|_| {
                let den = rng.gen_range(1..=60i64);
                let t = rat(rng.gen_range(0..den), den);
                -&half + &a * t
            })
            .collect();
        let report = verify_duality(&g, &h, &a, &b, &xs);
        o.check(
            report.pass,
            format!(
                "{tag}: duality violated at m = {:?}",
                report.max_violation_m
            ),
        );
        let params = GaborParams::new(a.clone(), b.clone()).unwrap();
        let est = frame_bounds_estimate(&g, &params, Variant::Phi, grid, 10).unwrap();
        let slack = est.sqrt_a * est.sqrt_a - to_f64(&h.lower_bound);
        min_slack = min_slack.min(slack);
        o.check(
            slack >= -1e-6,
            format!("{tag}: sqrtA^2 - c^2/b = {slack:e}"),
        );
    }
    o.note(format!(
        "{points} points, min sqrtA^2 - c^2/b = {min_slack:e}"
    ));
    o
}

fn unit_sum(g: &PiecewisePolynomial, x: &Rational) -> Rational {
    let (lo, hi) = g.support();
    let k0 = (x - hi).floor().to_integer();
    let k1 = (x - lo).ceil().to_integer();
    let mut s = Rational::zero();
    let mut k = k0;
    while k <= k1 {
        s += g.eval_exact(&(x - Rational::from_integer(k.clone())));
        k += 1;
    }
    s
}

fn property_suites() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = StdRng::seed_from_u64(0x5eed_0007);
    for n in 1..=6u32 {
        let g = bspline_centered(n).unwrap();
        for _ in 0..50 {
            let x = rat(rng.gen_range(-500..500), rng.gen_range(1..=97));
            let s = unit_sum(&g, &x);
            o.check(
                s == int(1),
                format!(
                    "n = {n}, x = {}: sum = {}",
                    format_rational(&x),
                    format_rational(&s)
                ),
            );
        }
    }
    let mut worst_qp: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=6u32);
        let lambda = rat(rng.gen_range(1..=20), rng.gen_range(1..=20));
        let (x, nu) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let r = quasi_periodicity_residual(&bspline_centered(n).unwrap(), &lambda, x, nu).unwrap();
        worst_qp = worst_qp.max(r);
    }
    o.check(
        worst_qp < 1e-12,
        format!("quasi-periodicity residual {worst_qp:e}"),
    );
    let mut worst_rec: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=5u32);
        let f = cardinal(n).unwrap();
        let b = rat(rng.gen_range(31..=120), 20);
        let x = rat(rng.gen_range(-40..40), rng.gen_range(1..=30));
        let modulus = round_nearest(&b).try_into().unwrap();
        let dec = residue_decomposition(&f, &b, &x, modulus).unwrap();
        for s in 0..modulus as i64 {
            let z = zak_transform(&f, &b.recip(), to_f64(&x), s as f64 / modulus as f64).unwrap();
            worst_rec = worst_rec.max((dec.reconstruct(s) - z).norm());
        }
    }
    o.check(
        worst_rec < 1e-12,
        format!("residue reconstruction error {worst_rec:e}"),
    );
    o.note(format!(
        "quasi-periodicity {worst_qp:e}, reconstruction {worst_rec:e}"
    ));
    let g = bspline_centered(2).unwrap();
    for (a, b) in [
        (int(1), rat(1, 2)),
        (rat(1, 3), rat(5, 2)),
        (rat(5, 21), rat(21, 10)),
    ] {
        let params = GaborParams::new(a.clone(), b.clone()).unwrap();
        let phi = frame_bounds_estimate(&g, &params, Variant::Phi, GridSpec::DEFAULT, 20).unwrap();
        let psi = frame_bounds_estimate(&g, &params, Variant::Psi, GridSpec::DEFAULT, 20).unwrap();
        let d = (phi.sqrt_a - psi.sqrt_a).abs();
        let tag = format!(
            "(a, b) = ({}, {})",
            format_rational(&a),
            format_rational(&b)
        );
        o.check(
            d <= 1e-6,
            format!("{tag}: Phi {} vs Psi {}", phi.sqrt_a, psi.sqrt_a),
        );
        o.note(format!("{tag}: Phi {:e}, Psi {:e}", phi.sqrt_a, psi.sqrt_a));
    }
    o
}

fn conjecture_scan() -> Outcome {
    let mut o = Outcome::new();
    let report = conjectured_curve_scan(1, 2, 20, GridSpec { nx: 64, nnu: 64 }, 20).unwrap();
    o.check(report.samples.len() == 20, "expected 20 samples");
    o.check(
        report.samples.first().map(|s| &s.b) == Some(&rat(7, 3)),
        "first sample is not b = 7/3",
    );
    o.check(
        report.samples.last().map(|s| &s.b) == Some(&rat(8, 3)),
        "last sample is not b = 8/3",
    );
    let worst = report.samples.iter().map(|s| s.sqrt_a).fold(0.0, f64::max);
    for s in &report.samples {
        o.check(
            s.sqrt_a <= 1e-8,
            format!("b = {}: sqrtA = {:e}", format_rational(&s.b), s.sqrt_a),
        );
    }
    o.note(format!(
        "max sqrtA over {} samples: {worst:e}",
        report.samples.len()
    ));
    o
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 hyperbola ab = 5/6 scan", hyperbola_scan),
        ("2 horizontal line b = 5/2 scan", horizontal_line_scan),
        ("3 row-dependence certificates", row_dependence_certificates),
        ("4 zero-row certificates", zero_row_certificates),
        ("5 painless closed form agreement", painless_agreement),
        ("6 painless dual and lower bound", duality),
        ("7 property suites", property_suites),
        ("8 conjectured hyperbola (m, k) = (1, 2)", conjecture_scan),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {name}: {status} ({:.2?})", start.elapsed());
        for d in &outcome.details {
            println!("    {d}");
        }
        if !outcome.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
