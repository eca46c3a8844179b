//! Exact periodized squares and piecewise extremization for the painless regime.

use num_traits::Zero;

use crate::bspline::PiecewisePolynomial;
use crate::numerics::{index_range, int, to_f64, Rational};
use crate::poly::Poly;

/// Piecewise polynomial on `[start, end]` with local coordinates per piece.
pub(crate) struct Pieces {
    pub breakpoints: Vec<Rational>,
    pub pieces: Vec<Poly>,
}

impl Pieces {
    /// Closure of the range of the function: extrema of every piece over its
    /// closed interval (one-sided limits included), in double precision.
    pub fn float_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, p) in self.pieces.iter().enumerate() {
            let len = &self.breakpoints[i + 1] - &self.breakpoints[i];
            for v in poly_extreme_values(p, &len) {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }
}

fn eval_f64(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &x| acc * t + x)
}

/// Values of `p` at the ends of `[0, len]` and at its interior critical points.
pub(crate) fn poly_extreme_values(p: &Poly, len: &Rational) -> Vec<f64> {
    let mut out = vec![to_f64(&p.eval(&Rational::zero())), to_f64(&p.eval(len))];
    let d = p.derivative();
    if d.degree().unwrap_or(0) == 0 {
        return out;
    }
    let pc: Vec<f64> = p.0.iter().map(to_f64).collect();
    let dc: Vec<f64> = d.0.iter().map(to_f64).collect();
    let l = to_f64(len);
    const SPLITS: usize = 512;
    let mut prev_t = 0.0;
    let mut prev = eval_f64(&dc, 0.0);
    for s in 1..=SPLITS {
        let t = l * s as f64 / SPLITS as f64;
        let cur = eval_f64(&dc, t);
        if cur == 0.0 {
            out.push(eval_f64(&pc, t));
        } else if prev != 0.0 && (prev < 0.0) != (cur < 0.0) {
            let (mut a, mut b, fa) = (prev_t, t, prev);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = eval_f64(&dc, m);
                if (fm < 0.0) == (fa < 0.0) {
                    a = m;
                } else {
                    b = m;
                }
            }
            out.push(eval_f64(&pc, 0.5 * (a + b)));
        }
        prev_t = t;
        prev = cur;
    }
    out
}

/// `Σ_k g(x - ak)²` restricted to one period `[0, a]`, exactly.
pub(crate) fn periodized_square(g: &PiecewisePolynomial, a: &Rational) -> Pieces {
    let (lo, hi) = g.support();
    let mut bps = vec![Rational::zero(), a.clone()];
    for b in g.breakpoints() {
        // b + a k ∈ (0, a)
        let (k0, k1) = index_range(&Rational::zero(), a, b, a);
        for k in k0..=k1 {
            let v = b + a * int(k);
            if v > Rational::zero() && &v < a {
                bps.push(v);
            }
        }
    }
    bps.sort();
    bps.dedup();
    let pieces = bps
        .windows(2)
        .map(|w| {
            let u = &w[0];
            let mid = (&w[0] + &w[1]) / int(2);
            // mid - a k ∈ [lo, hi]  ⇔  k ∈ [(mid - hi)/a, (mid - lo)/a]
            let (k0, k1) = index_range(&(&mid - hi), &(&mid - lo), &Rational::zero(), a);
            let mut acc = Poly::zero();
            for k in k0..=k1 {
                let y = &mid - a * int(k);
                if &y < lo || &y >= hi {
                    continue;
                }
                let j = g.breakpoints().partition_point(|b| b <= &y) - 1;
                let piece = g.pieces()[j].shift(&(u - a * int(k) - &g.breakpoints()[j]));
                acc = &acc + &(&piece * &piece);
            }
            acc
        })
        .collect();
    Pieces {
        breakpoints: bps,
        pieces,
    }
}
