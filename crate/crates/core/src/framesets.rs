//! Frame and non-frame regions for B-spline Gabor systems.
//!
//! The positive side is the painless alternate dual on the region
//! `Σ_n = {0 < a < n, ab < 1, n + a ≤ 2/b}`, checked exactly through the
//! duality equations. The negative side consists of exact certificates:
//! a vanishing row of `Φ` (zero lines of the Zak transform of `N_n`) and a
//! linear dependence among the rows of `Ψ^{B_2}(0, 0)` on `ab = 5/6`.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::bspline::{bspline_centered, cardinal, PiecewisePolynomial};
use crate::error::{invalid, Error, Result};
use crate::numerics::{
    format_rational, gcd_u64, index_range, int, rat, round_nearest, serde_rational, signed_frac,
    to_f64, Rational,
};
use crate::painless::poly_extreme_values;
use crate::zak::residue_decomposition;
use crate::zz::{
    frame_bounds_estimate, phi_matrix, psi_matrix, psi_matrix_exact_unscaled, GaborParams,
    GridSpec, Variant,
};

/// `(a, b) ∈ Σ_n`, boundary `n + a = 2/b` included.
pub fn sigma_membership(n: u32, a: &Rational, b: &Rational) -> bool {
    let n = int(n as i64);
    a.is_positive() && b.is_positive() && a < &n && a * b < int(1) && (&n + a) * b <= int(2)
}

/// The painless alternate dual `h = b/g` on `[-a/2, a/2)`, zero elsewhere.
///
/// `numerator` is `b` for the genuine dual; it is a separate field so a
/// deliberately wrong window can be built for negative tests.
#[derive(Clone, Debug)]
pub struct DualWindow {
    pub a: Rational,
    pub b: Rational,
    pub g: PiecewisePolynomial,
    pub numerator: Rational,
    /// `inf |g|` over `[-a/2, a/2]`.
    pub c: Rational,
    /// Guaranteed lower frame bound `c²/b`.
    pub lower_bound: Rational,
}

impl DualWindow {
    /// Half-open support `[-a/2, a/2)`, so that translates by `a` tile the line.
    pub fn support(&self) -> (Rational, Rational) {
        let half = &self.a / int(2);
        (-&half, half)
    }

    pub fn eval_exact(&self, x: &Rational) -> Rational {
        let (lo, hi) = self.support();
        if x < &lo || x >= &hi {
            return Rational::zero();
        }
        &self.numerator / self.g.eval_exact(x)
    }
}

/// Exact minimum of `|g|` on `[lo, hi]` when it is attained at an endpoint or
/// a breakpoint; `None` if some interior critical point dips lower.
fn min_abs_on(g: &PiecewisePolynomial, lo: &Rational, hi: &Rational) -> Option<Rational> {
    let mut best = g.eval_exact(lo).abs().min(g.eval_exact(hi).abs());
    let bps = g.breakpoints();
    for (i, piece) in g.pieces().iter().enumerate() {
        let (l, r) = (&bps[i], &bps[i + 1]);
        let (s, e) = (l.max(lo), r.min(hi));
        if s >= e {
            continue;
        }
        // One-sided values at the ends of the overlap.
        for t in [s - l, e - l] {
            best = best.min(piece.eval(&t).abs());
        }
        let local = piece.shift(&(s - l));
        let floor = to_f64(&best);
        if poly_extreme_values(&local, &(e - s))
            .into_iter()
            .any(|v| v.abs() < floor * (1.0 - 1e-12))
        {
            return None;
        }
    }
    Some(best)
}

pub fn painless_dual(
    g: &PiecewisePolynomial,
    n: u32,
    a: &Rational,
    b: &Rational,
) -> Result<DualWindow> {
    if !sigma_membership(n, a, b) {
        return invalid(format!(
            "(a, b) = ({}, {}) is not in the painless-dual region for n = {n}",
            format_rational(a),
            format_rational(b)
        ));
    }
    let half = a / int(2);
    let c = match min_abs_on(g, &-&half, &half) {
        Some(c) => c,
        None => return invalid("inf |g| on [-a/2, a/2] is not attained at a breakpoint"),
    };
    if c.is_zero() {
        return invalid("g vanishes somewhere on [-a/2, a/2]");
    }
    let lower_bound = &c * &c / b;
    Ok(DualWindow {
        a: a.clone(),
        b: b.clone(),
        g: g.clone(),
        numerator: b.clone(),
        c,
        lower_bound,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualityReport {
    pub pass: bool,
    /// The `m` with the largest violation, if any equation failed.
    pub max_violation_m: Option<i64>,
}

/// Checks `Σ_k g(x - m/b - ka) h(x - ka) = b δ_{m,0}` exactly at every sample
/// and every `m` for which some term can be nonzero.
pub fn verify_duality(
    g: &PiecewisePolynomial,
    h: &DualWindow,
    a: &Rational,
    b: &Rational,
    sample_xs: &[Rational],
) -> DualityReport {
    let (glo, ghi) = g.support();
    let (hlo, hhi) = h.support();
    let inv_b = b.recip();
    let mut worst: Option<(Rational, i64)> = None;
    for x in sample_xs {
        // h(x - ka) ≠ 0 needs hlo ≤ x - ka ≤ hhi.
        let (k0, k1) = index_range(&(x - &hhi), &(x - &hlo), &Rational::zero(), a);
        // g(y - m/b) ≠ 0 needs glo ≤ y - m/b ≤ ghi, with y = x - ka.
        let (m0, m1) = index_range(
            &(x - a * int(k1) - ghi),
            &(x - a * int(k0) - glo),
            &Rational::zero(),
            &inv_b,
        );
        for m in m0.min(0)..=m1.max(0) {
            let shift = &inv_b * int(m);
            let lhs: Rational = (k0..=k1)
                .map(|k| {
                    let y = x - a * int(k);
                    let hv = h.eval_exact(&y);
                    if hv.is_zero() {
                        hv
                    } else {
                        g.eval_exact(&(&y - &shift)) * hv
                    }
                })
                .sum();
            let rhs = if m == 0 { b.clone() } else { Rational::zero() };
            let err = (lhs - rhs).abs();
            if !err.is_zero() && worst.as_ref().is_none_or(|(w, _)| &err > w) {
                worst = Some((err, m));
            }
        }
    }
    DualityReport {
        pass: worst.is_none(),
        max_violation_m: worst.map(|(_, m)| m),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CertificateKind {
    ZeroRow,
    RowDependence,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    #[serde(with = "serde_rational")]
    pub x0: Rational,
    #[serde(with = "serde_rational")]
    pub nu0: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CertificateData {
    /// Residue coefficients `c_0, …, c_{R-1}` at each column point of the zero row.
    Residues(#[serde(with = "serde_rational::nested")] Vec<Vec<Rational>>),
    /// Row coefficients whose combination of `Ψ` rows vanishes.
    Dependence(#[serde(with = "serde_rational::vec")] Vec<Rational>),
}

/// An exact proof that `G(g, a, b)` is not a frame. For `ZeroRow` the
/// window is `N_n`, for `RowDependence` it is `B_2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub n: u32,
    #[serde(with = "serde_rational")]
    pub a: Rational,
    #[serde(with = "serde_rational")]
    pub b: Rational,
    pub p: u64,
    pub q: u64,
    pub witness: Witness,
    pub data: CertificateData,
}

impl Certificate {
    /// Smallest singular value of the numerically assembled witness matrix.
    pub fn witness_sigma_min(&self) -> Result<f64> {
        let params = GaborParams::new(self.a.clone(), self.b.clone())?;
        let (x, nu) = (to_f64(&self.witness.x0), to_f64(&self.witness.nu0));
        let m = match self.kind {
            CertificateKind::ZeroRow => phi_matrix(&cardinal(self.n)?, &params, x, nu)?,
            CertificateKind::RowDependence => {
                psi_matrix(&bspline_centered(self.n)?, &params, x, nu)?
            }
        };
        Ok(m.singular_extrema().0)
    }
}

fn not_certified<T>(msg: String) -> Result<T> {
    Err(Error::NotCertified(msg))
}

/// Looks for a zero first row of `Φ^{N_n}(1/q, 1/R)`, `R = round(b)`, with
/// `a = p/(qb)`. The row vanishes when the residue sums of the Zak transform
/// are constant at every column point `1/q - ℓp/q`; this is guaranteed when
/// `|{b}| ≤ 1/(nq)`, but the check itself is exact and is run regardless.
pub fn certify_zero_row(n: u32, p: u64, q: u64, b: &Rational) -> Result<Certificate> {
    if n == 0 || p == 0 || q == 0 {
        return invalid("n, p and q must be positive");
    }
    if gcd_u64(p, q) != 1 {
        return invalid(format!("p = {p} and q = {q} are not coprime"));
    }
    if b <= &rat(3, 2) {
        return invalid(format!("need b > 3/2, got {}", format_rational(b)));
    }
    let big_r = round_nearest(b)
        .to_u64()
        .ok_or_else(|| Error::InvalidParameter("b is too large".into()))?;
    let (pr, qr) = (int(p as i64), int(q as i64));
    let a = &pr / (&qr * b);
    let x0 = qr.recip();
    let nu0 = rat(1, big_r as i64);
    let mut residues = Vec::with_capacity(q as usize);
    for l in 0..q {
        let x = &x0 - int(l as i64) * &pr / &qr;
        let dec = residue_decomposition(&cardinal(n)?, b, &x, big_r)?;
        if !dec.is_constant() {
            return not_certified(format!(
                "residue sums at x = {} are not constant ({}); |{{b}}| = {} vs 1/(nq) = 1/{}",
                format_rational(&x),
                dec.coeffs
                    .iter()
                    .map(format_rational)
                    .collect::<Vec<_>>()
                    .join(", "),
                format_rational(&signed_frac(b).abs()),
                n as u64 * q
            ));
        }
        residues.push(dec.coeffs);
    }
    Ok(Certificate {
        kind: CertificateKind::ZeroRow,
        n,
        a,
        b: b.clone(),
        p,
        q,
        witness: Witness { x0, nu0 },
        data: CertificateData::Residues(residues),
    })
}

/// Rank deficiency of `Ψ^{B_2}(0, 0)` for `ab = 5/6`, `a ∈ [5/16, 5/14]`:
/// with `R_i` the rows (common factor `b^{-1/2}` dropped) and
/// `v = [0,-1,-1,0,1,1]`, `R_2 - R_5 = 2a v` and `R_3 - R_4 = (6a/5) v`,
/// so `3R_2 - 5R_3 + 5R_4 - 3R_5 = 0`.
pub fn certify_row_dependence(a: &Rational) -> Result<Certificate> {
    if a < &rat(5, 16) || a > &rat(5, 14) {
        return invalid(format!(
            "a = {} is outside [5/16, 5/14]",
            format_rational(a)
        ));
    }
    let b = rat(5, 6) / a;
    let params = GaborParams::new(a.clone(), b.clone())?;
    debug_assert_eq!((params.p, params.q), (5, 6));
    let rows = psi_matrix_exact_unscaled(&bspline_centered(2)?, &params, &Rational::zero())?;
    let diff = |i: usize, j: usize| -> Vec<Rational> {
        rows[i].iter().zip(&rows[j]).map(|(u, v)| u - v).collect()
    };
    let pattern = |s: Rational| -> Vec<Rational> {
        [0, -1, -1, 0, 1, 1].iter().map(|&c| &s * int(c)).collect()
    };
    if diff(1, 4) != pattern(a * int(2)) || diff(2, 3) != pattern(a * rat(6, 5)) {
        return not_certified(
            "row differences of Psi(0, 0) do not match the expected pattern".into(),
        );
    }
    let coeffs: Vec<Rational> = [0, 3, -5, 5, -3].iter().map(|&c| int(c)).collect();
    let combo_is_zero = (0..params.q as usize).all(|col| {
        coeffs
            .iter()
            .zip(&rows)
            .map(|(c, row)| c * &row[col])
            .sum::<Rational>()
            .is_zero()
    });
    if !combo_is_zero {
        return not_certified("row combination of Psi(0, 0) is not zero".into());
    }
    Ok(Certificate {
        kind: CertificateKind::RowDependence,
        n: 2,
        a: a.clone(),
        b,
        p: params.p,
        q: params.q,
        witness: Witness {
            x0: Rational::zero(),
            nu0: Rational::zero(),
        },
        data: CertificateData::Dependence(coeffs),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjectureSample {
    #[serde(with = "serde_rational")]
    pub a: Rational,
    #[serde(with = "serde_rational")]
    pub b: Rational,
    #[serde(rename = "sqrtA")]
    pub sqrt_a: f64,
}

/// Numerical evidence (not proof) along one conjectured non-frame hyperbola.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjectureScan {
    pub m: u64,
    pub k: u64,
    #[serde(with = "serde_rational")]
    pub a0: Rational,
    #[serde(with = "serde_rational")]
    pub b0: Rational,
    #[serde(with = "serde_rational")]
    pub ratio: Rational,
    pub samples: Vec<ConjectureSample>,
    pub note: &'static str,
}

fn conjecture_center(m: u64, k: u64) -> Result<(Rational, Rational, Rational, Rational)> {
    if m < 1 || k <= m {
        return invalid(format!("need k > m >= 1, got m = {m}, k = {k}"));
    }
    let a0 = rat(1, 2 * m as i64 + 1);
    let b0 = rat(2 * k as i64 + 1, 2);
    if &a0 * &b0 >= int(1) {
        return invalid(format!(
            "a0 * b0 = {} is not below 1",
            format_rational(&(&a0 * &b0))
        ));
    }
    let half_width = &a0 * int((k - m) as i64) / int(2);
    let ratio = &a0 * &b0;
    Ok((a0, b0, ratio, half_width))
}

pub fn conjectured_curve_scan(
    m: u64,
    k: u64,
    num_b_samples: usize,
    grid: GridSpec,
    refine_steps: u32,
) -> Result<ConjectureScan> {
    let (a0, b0, ratio, w) = conjecture_center(m, k)?;
    if num_b_samples == 0 {
        return invalid("need at least one b sample");
    }
    let bs: Vec<Rational> = if num_b_samples == 1 {
        vec![b0.clone()]
    } else {
        let step = &w * int(2) / int(num_b_samples as i64 - 1);
        (0..num_b_samples)
            .map(|i| &b0 - &w + &step * int(i as i64))
            .collect()
    };
    let g = bspline_centered(2)?;
    let samples = bs
        .into_par_iter()
        .map(|b| {
            let a = &ratio / &b;
            let params = GaborParams::new(a.clone(), b.clone())?;
            let r = frame_bounds_estimate(&g, &params, Variant::Phi, grid, refine_steps)?;
            Ok(ConjectureSample {
                a,
                b,
                sqrt_a: r.sqrt_a,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConjectureScan {
        m,
        k,
        a0,
        b0,
        ratio,
        samples,
        note: "numerical estimate only; not a proof of the non-frame property",
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RegionLabel {
    PainlessFrame,
    SigmaFrame,
    #[serde(rename = "NonFrame_ab_ge_1")]
    NonFrameAbGe1,
    #[serde(rename = "NonFrame_a_ge_n")]
    NonFrameAGeN,
    #[serde(rename = "NonFrame_b_integer")]
    NonFrameBInteger,
    #[serde(rename = "NonFrame_Thm34")]
    NonFrameZeroRow,
    #[serde(rename = "NonFrame_Thm35")]
    NonFrameRowDependence,
    #[serde(rename = "Conjectured_NonFrame")]
    ConjecturedNonFrame,
    Unknown,
}

impl RegionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::PainlessFrame => "PainlessFrame",
            RegionLabel::SigmaFrame => "SigmaFrame",
            RegionLabel::NonFrameAbGe1 => "NonFrame_ab_ge_1",
            RegionLabel::NonFrameAGeN => "NonFrame_a_ge_n",
            RegionLabel::NonFrameBInteger => "NonFrame_b_integer",
            RegionLabel::NonFrameZeroRow => "NonFrame_Thm34",
            RegionLabel::NonFrameRowDependence => "NonFrame_Thm35",
            RegionLabel::ConjecturedNonFrame => "Conjectured_NonFrame",
            RegionLabel::Unknown => "Unknown",
        }
    }

    pub fn is_frame(self) -> bool {
        matches!(self, RegionLabel::PainlessFrame | RegionLabel::SigmaFrame)
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub label: RegionLabel,
    /// Advisory grid estimate of `√A`, only for `Unknown` points.
    #[serde(rename = "sqrtA", skip_serializing_if = "Option::is_none")]
    pub sqrt_a: Option<f64>,
}

/// Grid used for the advisory estimate on `Unknown` points.
pub const CLASSIFY_GRID: GridSpec = GridSpec { nx: 32, nnu: 32 };
pub const CLASSIFY_REFINE_STEPS: u32 = 10;

fn on_conjectured_curve(a: &Rational, b: &Rational) -> bool {
    let ab = a * b;
    let fb = b.floor().to_integer().to_i64().unwrap_or(0);
    // a0 b0 < 1 forces k ≤ 2m, so the half-width is below 1/4 and b0 is
    // within one unit of b.
    for k in (fb - 1).max(2)..=(fb + 1) {
        let k = k as u64;
        for m in k.div_ceil(2).max(1)..k {
            if let Ok((_, b0, ratio, w)) = conjecture_center(m, k) {
                if ratio == ab && (b - &b0).abs() <= w {
                    return true;
                }
            }
        }
    }
    false
}

/// Labels `(a, b)` for `G(B_n, a, b)` with this fixed precedence:
///
/// 1. `ab ≥ 1`
/// 2. `a ≥ n`
/// 3. `b ∈ {2, 3, …}`
/// 4. zero-row certificate (`b > 3/2`, `|{b}| ≤ 1/(nq)`)
/// 5. row-dependence certificate (`n = 2`, `ab = 5/6`, `a ∈ [5/16, 5/14]`)
/// 6. painless (`b ≤ 1/n`, `a < n`)
/// 7. `Σ_n`
/// 8. conjectured non-frame hyperbola pieces (`n = 2`)
/// 9. unknown
///
/// Frame labels come only from the two sufficient conditions; a numeric
/// estimate is attached to `Unknown` points as annotation when requested.
pub fn classify_point(
    n: u32,
    a: &Rational,
    b: &Rational,
    estimate_fallback: bool,
) -> Result<Classification> {
    if n == 0 {
        return invalid("B-spline order must be at least 1");
    }
    if !a.is_positive() || !b.is_positive() {
        return invalid("a and b must be positive");
    }
    let label = |label| {
        Ok(Classification {
            label,
            sqrt_a: None,
        })
    };
    let nr = int(n as i64);
    let ab = a * b;
    if ab >= int(1) {
        return label(RegionLabel::NonFrameAbGe1);
    }
    if a >= &nr {
        return label(RegionLabel::NonFrameAGeN);
    }
    if b.is_integer() && b >= &int(2) {
        return label(RegionLabel::NonFrameBInteger);
    }
    let (p, q) = (ab.numer().clone(), ab.denom().clone());
    if b > &rat(3, 2) && signed_frac(b).abs() * &nr * Rational::from_integer(q.clone()) <= int(1) {
        if let (Some(p), Some(q)) = (p.to_u64(), q.to_u64()) {
            debug_assert!(p.gcd(&q).is_one());
            if certify_zero_row(n, p, q, b).is_ok() {
                return label(RegionLabel::NonFrameZeroRow);
            }
        }
    }
    if n == 2 && ab == rat(5, 6) && certify_row_dependence(a).is_ok() {
        return label(RegionLabel::NonFrameRowDependence);
    }
    if b * &nr <= int(1) {
        return label(RegionLabel::PainlessFrame);
    }
    if sigma_membership(n, a, b) {
        return label(RegionLabel::SigmaFrame);
    }
    if n == 2 && on_conjectured_curve(a, b) {
        return label(RegionLabel::ConjecturedNonFrame);
    }
    let sqrt_a = if estimate_fallback {
        GaborParams::new(a.clone(), b.clone())
            .and_then(|params| {
                frame_bounds_estimate(
                    &bspline_centered(n)?,
                    &params,
                    Variant::Phi,
                    CLASSIFY_GRID,
                    CLASSIFY_REFINE_STEPS,
                )
            })
            .ok()
            .map(|r| r.sqrt_a)
    } else {
        None
    };
    Ok(Classification {
        label: RegionLabel::Unknown,
        sqrt_a,
    })
}
