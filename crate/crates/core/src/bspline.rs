//! Exact B-splines as piecewise polynomials with rational coefficients.
//!
//! `B_1` is the indicator of `[-1/2, 1/2)`; `B_{n+1} = B_n * B_1` is built as
//! `F(x + 1/2) - F(x - 1/2)` where `F` is the exact antiderivative of `B_n`.
//! The cardinal spline `N_n(x) = B_n(x - n/2)` is supported on `[0, n]`.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{
    format_rational, index_range, int, rat, serde_rational, signed_frac, to_f64, Rational,
};
use crate::poly::Poly;

/// Piecewise polynomial on `[breakpoints[0], breakpoints[last]]`, zero outside.
///
/// Piece `i` lives on `[breakpoints[i], breakpoints[i+1])` and stores its
/// coefficients in powers of `x - breakpoints[i]`. Evaluation is
/// right-continuous, so the value at the last breakpoint is 0; for `B_1` this
/// means the indicator of `[-1/2, 1/2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewiseRepr", into = "PiecewiseRepr")]
pub struct PiecewisePolynomial {
    breakpoints: Vec<Rational>,
    pieces: Vec<Poly>,
    float: FloatCache,
}

/// Double-precision copy used by [`PiecewisePolynomial::eval_float`]. Each
/// piece is expanded around whichever of its endpoints has the smaller
/// magnitude so that the tails near the support boundary keep full relative
/// accuracy.
#[derive(Clone, Debug, PartialEq, Default)]
struct FloatCache {
    breakpoints: Vec<f64>,
    anchors: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct PiecewiseRepr {
    #[serde(with = "serde_rational::vec")]
    breakpoints: Vec<Rational>,
    #[serde(with = "serde_rational::nested")]
    pieces: Vec<Vec<Rational>>,
}

impl TryFrom<PiecewiseRepr> for PiecewisePolynomial {
    type Error = Error;
    fn try_from(r: PiecewiseRepr) -> Result<Self> {
        PiecewisePolynomial::new(r.breakpoints, r.pieces.into_iter().map(Poly).collect())
    }
}

impl From<PiecewisePolynomial> for PiecewiseRepr {
    fn from(f: PiecewisePolynomial) -> Self {
        PiecewiseRepr {
            breakpoints: f.breakpoints,
            pieces: f.pieces.into_iter().map(|p| p.0).collect(),
        }
    }
}

impl PiecewisePolynomial {
    pub fn new(breakpoints: Vec<Rational>, pieces: Vec<Poly>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return invalid("need at least two breakpoints");
        }
        if pieces.len() + 1 != breakpoints.len() {
            return invalid(format!(
                "{} breakpoints require {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                pieces.len()
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("breakpoints must be strictly increasing");
        }
        let mut f = PiecewisePolynomial {
            breakpoints,
            pieces,
            float: FloatCache::default(),
        };
        f.float = f.build_float_cache();
        Ok(f)
    }

    fn build_float_cache(&self) -> FloatCache {
        let mut anchors = Vec::with_capacity(self.pieces.len());
        let mut coeffs = Vec::with_capacity(self.pieces.len());
        for (i, p) in self.pieces.iter().enumerate() {
            let len = &self.breakpoints[i + 1] - &self.breakpoints[i];
            let at_left = p.eval(&Rational::zero()).abs();
            let at_right = p.eval(&len).abs();
            let (anchor, local) = if at_right < at_left {
                (&self.breakpoints[i + 1], p.shift(&len))
            } else {
                (&self.breakpoints[i], p.clone())
            };
            anchors.push(to_f64(anchor));
            coeffs.push(local.0.iter().map(to_f64).collect());
        }
        FloatCache {
            breakpoints: self.breakpoints.iter().map(to_f64).collect(),
            anchors,
            coeffs,
        }
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Poly] {
        &self.pieces
    }

    /// Closed support interval `[first breakpoint, last breakpoint]`.
    pub fn support(&self) -> (&Rational, &Rational) {
        (&self.breakpoints[0], self.breakpoints.last().unwrap())
    }

    pub fn support_f64(&self) -> (f64, f64) {
        (
            self.float.breakpoints[0],
            *self.float.breakpoints.last().unwrap(),
        )
    }

    pub fn support_length(&self) -> Rational {
        let (lo, hi) = self.support();
        hi - lo
    }

    fn piece_index(&self, x: &Rational) -> Option<usize> {
        let (lo, hi) = self.support();
        if x < lo || x >= hi {
            return None;
        }
        Some(self.breakpoints.partition_point(|b| b <= x) - 1)
    }

    pub fn eval_exact(&self, x: &Rational) -> Rational {
        match self.piece_index(x) {
            Some(i) => self.pieces[i].eval(&(x - &self.breakpoints[i])),
            None => Rational::zero(),
        }
    }

    pub fn eval_float(&self, x: f64) -> f64 {
        let bp = &self.float.breakpoints;
        if !(x >= bp[0] && x < bp[bp.len() - 1]) {
            return 0.0;
        }
        let i = bp.partition_point(|&b| b <= x) - 1;
        let t = x - self.float.anchors[i];
        self.float.coeffs[i]
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * t + c)
    }

    /// `x ↦ f(x - h)`.
    pub fn shifted(&self, h: &Rational) -> PiecewisePolynomial {
        let bps = self.breakpoints.iter().map(|b| b + h).collect();
        PiecewisePolynomial::new(bps, self.pieces.clone()).expect("shift preserves validity")
    }

    /// `x ↦ t·f(x)`.
    pub fn scaled(&self, t: &Rational) -> PiecewisePolynomial {
        let c = Poly::constant(t.clone());
        let pieces = self.pieces.iter().map(|p| p * &c).collect();
        PiecewisePolynomial::new(self.breakpoints.clone(), pieces)
            .expect("scaling preserves validity")
    }

    /// Exact integral over the support.
    pub fn integral(&self) -> Rational {
        self.pieces
            .iter()
            .enumerate()
            .map(|(i, p)| {
                p.integral()
                    .eval(&(&self.breakpoints[i + 1] - &self.breakpoints[i]))
            })
            .sum()
    }

    /// `(f * B_1)(x) = ∫_{x-1/2}^{x+1/2} f(t) dt`.
    pub fn convolve_unit_box(&self) -> PiecewisePolynomial {
        // Antiderivative pieces F_i(t) = ∫_0^t P_i + C_i, continuous across breakpoints.
        let mut anti = Vec::with_capacity(self.pieces.len());
        let mut acc = Rational::zero();
        for (i, p) in self.pieces.iter().enumerate() {
            let q = &p.integral() + &Poly::constant(acc.clone());
            acc = q.eval(&(&self.breakpoints[i + 1] - &self.breakpoints[i]));
            anti.push(q);
        }
        let total = acc;
        let half = rat(1, 2);

        let mut bps: Vec<Rational> = self
            .breakpoints
            .iter()
            .flat_map(|b| [b - &half, b + &half])
            .collect();
        bps.sort();
        bps.dedup();

        // F(u + h + t) as a polynomial in t, for u + h + t within one piece.
        let anti_at = |u: &Rational, h: &Rational, mid: &Rational| -> Poly {
            let y = mid + h;
            let (lo, hi) = self.support();
            if &y <= lo {
                Poly::zero()
            } else if &y >= hi {
                Poly::constant(total.clone())
            } else {
                let i = self.breakpoints.partition_point(|b| b <= &y) - 1;
                anti[i].shift(&(u + h - &self.breakpoints[i]))
            }
        };

        let pieces = bps
            .windows(2)
            .map(|w| {
                let mid = (&w[0] + &w[1]) / int(2);
                &anti_at(&w[0], &half, &mid) - &anti_at(&w[0], &(-&half), &mid)
            })
            .collect();
        PiecewisePolynomial::new(bps, pieces).expect("convolution keeps breakpoints ordered")
    }

    /// `Σ_{k∈Z} f(t + period·k)`, summed exactly over the finitely many
    /// translates meeting the support.
    pub fn periodize_exact(&self, period: &Rational, t: &Rational) -> Result<Rational> {
        if !period.is_positive() {
            return invalid(format!(
                "period must be positive, got {}",
                format_rational(period)
            ));
        }
        let (lo, hi) = self.support();
        let (k0, k1) = index_range(lo, hi, t, period);
        Ok((k0..=k1)
            .map(|k| self.eval_exact(&(t + period * int(k))))
            .sum())
    }
}

/// Centered B-spline `B_n`, supported on `[-n/2, n/2]`.
pub fn bspline_centered(n: u32) -> Result<PiecewisePolynomial> {
    if n == 0 {
        return invalid("B-spline order must be at least 1");
    }
    let mut b = PiecewisePolynomial::new(
        vec![rat(-1, 2), rat(1, 2)],
        vec![Poly::constant(Rational::one())],
    )?;
    for _ in 1..n {
        b = b.convolve_unit_box();
    }
    Ok(b)
}

/// Cardinal B-spline `N_n(x) = B_n(x - n/2)`, supported on `[0, n]`.
pub fn cardinal(n: u32) -> Result<PiecewisePolynomial> {
    Ok(bspline_centered(n)?.shifted(&rat(n as i64, 2)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PouReport {
    pub is_constant: bool,
    #[serde(with = "opt_rational")]
    pub constant: Option<Rational>,
    #[serde(with = "serde_rational::vec")]
    pub values: Vec<Rational>,
}

mod opt_rational {
    use super::*;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(
        x: &Option<Rational>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_some(&format_rational(x)),
            None => s.serialize_none(),
        }
    }
}

/// Whether `x` lies in the region where translates of `N_n` along `c⁻¹Z`
/// sum to a constant: `⋃_m [m + n{c}, m + 1]` when `{c} >= 0`, and
/// `⋃_m [m, m + 1 + n{c}]` when `{c} <= 0`.
pub fn in_partly_pou_region(n: u32, c: &Rational, x: &Rational) -> bool {
    let fc = signed_frac(c);
    let xf = x - x.floor();
    if xf.is_zero() {
        return true;
    }
    let nf = int(n as i64) * &fc;
    if fc.is_negative() {
        xf <= int(1) + nf
    } else {
        xf >= nf
    }
}

/// `per_period + 1` evenly spaced points of the region in each of
/// `[0, 1]`, `[1, 2]` and `[2, 3]`.
pub fn partly_pou_samples(n: u32, c: &Rational, per_period: usize) -> Vec<Rational> {
    let nf = int(n as i64) * signed_frac(c);
    let (lo, hi) = if nf.is_negative() {
        (Rational::zero(), int(1) + nf)
    } else {
        (nf, int(1))
    };
    let steps = per_period.max(1) as i64;
    (0..3)
        .flat_map(|m| {
            let (lo, hi) = (&lo + int(m), &hi + int(m));
            (0..=steps).map(move |j| &lo + (&hi - &lo) * rat(j, steps))
        })
        .collect()
}

/// Exact check that `Σ_k N_n((x + k)/c)` takes one value across the samples.
pub fn verify_partly_pou(n: u32, c: &Rational, sample_xs: &[Rational]) -> Result<PouReport> {
    if !c.is_positive() {
        return invalid(format!("c must be positive, got {}", format_rational(c)));
    }
    let fc = signed_frac(c);
    if fc.abs() > rat(1, n.max(1) as i64) {
        return invalid(format!(
            "|{{c}}| = {} exceeds 1/n = 1/{n}",
            format_rational(&fc.abs())
        ));
    }
    let nn = cardinal(n)?;
    let mut values = Vec::with_capacity(sample_xs.len());
    for x in sample_xs {
        if !in_partly_pou_region(n, c, x) {
            return invalid(format!(
                "sample {} lies outside the partly-partition-of-unity region",
                format_rational(x)
            ));
        }
        // (x + k)/c ∈ [0, n]  ⇔  k ∈ [-x, n c - x]
        let (k0, k1) = index_range(
            &(-x),
            &(int(n as i64) * c - x),
            &Rational::zero(),
            &Rational::one(),
        );
        let v: Rational = (k0..=k1).map(|k| nn.eval_exact(&((x + int(k)) / c))).sum();
        values.push(v);
    }
    let is_constant = values.windows(2).all(|w| w[0] == w[1]);
    let constant = if is_constant {
        values.first().cloned()
    } else {
        None
    };
    Ok(PouReport {
        is_constant,
        constant,
        values,
    })
}
