//! Zak transform of compactly supported piecewise polynomials.
//!
//! `Z_λ f(x, ν) = √λ Σ_k f(λ(x - k)) e^{2πikν}`. For a compactly supported
//! `f` only the indices with `λ(x - k) ∈ supp f` contribute, so every sum here
//! is finite and no truncation is involved.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::bspline::{cardinal, PiecewisePolynomial};
use crate::error::{invalid, Result};
use crate::numerics::{
    format_rational, index_range, int, rat, root_of_unity, round_nearest, serde_rational,
    signed_frac, to_f64, Complex64, Rational,
};

/// `e^{2πitν}` with the argument reduced modulo one first.
pub(crate) fn phase(t: f64) -> Complex64 {
    let r = t - t.round();
    let theta = 2.0 * PI * r;
    Complex64::new(theta.cos(), theta.sin())
}

/// Nonzero samples `(k, f(λ(x - k)))` in increasing `k`.
pub(crate) fn zak_terms(f: &PiecewisePolynomial, lambda: f64, x: f64) -> Vec<(i64, f64)> {
    let (lo, hi) = f.support_f64();
    let k0 = (x - hi / lambda).ceil() as i64;
    let k1 = (x - lo / lambda).floor() as i64;
    (k0..=k1)
        .filter_map(|k| {
            let v = f.eval_float(lambda * (x - k as f64));
            (v != 0.0).then_some((k, v))
        })
        .collect()
}

pub(crate) fn sum_terms(terms: &[(i64, f64)], nu: f64) -> Complex64 {
    terms.iter().map(|&(k, v)| phase(k as f64 * nu) * v).sum()
}

fn check_lambda(lambda: &Rational) -> Result<()> {
    if !lambda.is_positive() {
        return invalid(format!(
            "Zak scale must be positive, got {}",
            format_rational(lambda)
        ));
    }
    Ok(())
}

/// `Z_λ f(x, ν)` in double precision.
pub fn zak_transform(
    f: &PiecewisePolynomial,
    lambda: &Rational,
    x: f64,
    nu: f64,
) -> Result<Complex64> {
    check_lambda(lambda)?;
    let l = to_f64(lambda);
    Ok(sum_terms(&zak_terms(f, l, x), nu) * l.sqrt())
}

/// `max(|Z(x+1, ν) - e^{2πiν} Z(x, ν)|, |Z(x, ν+1) - Z(x, ν)|)`.
pub fn quasi_periodicity_residual(
    f: &PiecewisePolynomial,
    lambda: &Rational,
    x: f64,
    nu: f64,
) -> Result<f64> {
    let z = zak_transform(f, lambda, x, nu)?;
    let shifted_x = zak_transform(f, lambda, x + 1.0, nu)?;
    let shifted_nu = zak_transform(f, lambda, x, nu + 1.0)?;
    Ok((shifted_x - phase(nu) * z)
        .norm()
        .max((shifted_nu - z).norm()))
}

/// Regrouping of `Z_{1/b} f(x, s/R)` by the residue of the summation index
/// modulo `R`: `c_ℓ = Σ_r f((x + R r + ℓ)/b)`, so that
/// `Z_{1/b} f(x, s/R) = √(1/b) Σ_ℓ c_ℓ e^{-2πiℓs/R}` for every integer `s`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidueDecomposition {
    pub modulus: u64,
    #[serde(with = "serde_rational::vec")]
    pub coeffs: Vec<Rational>,
    #[serde(with = "serde_rational")]
    pub lambda: Rational,
    #[serde(with = "serde_rational")]
    pub x: Rational,
}

impl ResidueDecomposition {
    /// `√λ Σ_ℓ c_ℓ e^{-2πiℓs/R}`, which equals `Z_λ f(x, s/R)`.
    pub fn reconstruct(&self, s: i64) -> Complex64 {
        let r = self.modulus;
        let sum: Complex64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(l, c)| {
                let w = root_of_unity((l as i64 * s).rem_euclid(r as i64), r)
                    .expect("modulus is positive");
                w * to_f64(c)
            })
            .sum();
        sum * to_f64(&self.lambda).sqrt()
    }

    /// All residue sums are equal, hence `Z_λ f(x, s/R) = 0` for `s ∉ RZ`.
    pub fn is_constant(&self) -> bool {
        self.coeffs.windows(2).all(|w| w[0] == w[1])
    }
}

pub fn residue_decomposition(
    f: &PiecewisePolynomial,
    b: &Rational,
    x: &Rational,
    modulus: u64,
) -> Result<ResidueDecomposition> {
    if !b.is_positive() {
        return invalid(format!("b must be positive, got {}", format_rational(b)));
    }
    if modulus == 0 {
        return invalid("residue modulus must be positive");
    }
    let (lo, hi) = f.support();
    let (blo, bhi) = (b * lo, b * hi);
    let step = int(modulus as i64);
    let coeffs = (0..modulus)
        .map(|l| {
            let start = x + int(l as i64);
            let (r0, r1) = index_range(&blo, &bhi, &start, &step);
            (r0..=r1)
                .map(|r| f.eval_exact(&((&start + &step * int(r)) / b)))
                .sum()
        })
        .collect();
    Ok(ResidueDecomposition {
        modulus,
        coeffs,
        lambda: b.recip(),
        x: x.clone(),
    })
}

pub(crate) fn check_zero_line_params(n: u32, b: &Rational) -> Result<u64> {
    if n == 0 {
        return invalid("B-spline order must be at least 1");
    }
    if b <= &rat(3, 2) {
        return invalid(format!("need b > 3/2, got {}", format_rational(b)));
    }
    let fb = signed_frac(b);
    if fb.abs() > rat(1, n as i64) {
        return invalid(format!(
            "|{{b}}| = {} exceeds 1/n = 1/{n}",
            format_rational(&fb.abs())
        ));
    }
    modulus_of(b)
}

pub(crate) fn modulus_of(b: &Rational) -> Result<u64> {
    let r: BigInt = round_nearest(b);
    match r.to_u64() {
        Some(r) if r >= 1 => Ok(r),
        _ => invalid(format!(
            "round(b) out of range for b = {}",
            format_rational(b)
        )),
    }
}

/// Exact test that `Z_{1/b} N_n(x, k/R) = 0` for all `k ∉ RZ`, `R = round(b)`:
/// true iff the residue sums of `N_n` at `x` modulo `R` coincide.
pub fn zak_zero_certificate(n: u32, b: &Rational, x: &Rational) -> Result<bool> {
    let r = check_zero_line_params(n, b)?;
    let nn = cardinal(n)?;
    Ok(residue_decomposition(&nn, b, x, r)?.is_constant())
}
