//! Zibulski–Zeevi matrices and grid estimates of Gabor frame bounds.
//!
//! For `ab = p/q` in lowest terms, `G(g, a, b)` is a frame with bounds
//! `A ≤ B` exactly when, for a.e. `(x, ν)`, the columns of the `p × q`
//! matrix `Φ^g(x, ν)` (or `Ψ^g(x, ν)`) form a frame for `C^p` with the same
//! bounds. So `√A` is the essential infimum of the smallest singular value
//! and `√B` the essential supremum of the largest.
//!
//! Entry `(k, ℓ)` of the two matrices:
//!
//! * `Φ`: `p^{-1/2} Z_{1/b} g(x - ℓp/q, ν + k/p)`
//! * `Ψ`: `b^{-1/2} Σ_n g(x + aqn + aℓ + k/b) e^{-2πi aqn ν}`

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::bspline::PiecewisePolynomial;
use crate::error::{invalid, Result};
use crate::linalg::{singular_extrema, CMatrix};
use crate::numerics::{
    format_rational, gcd_u64, int, rat, reduce_ratio, round_nearest, serde_rational, to_f64,
    Complex64, Rational,
};
use crate::zak::{phase, sum_terms, zak_terms};

/// Lattice parameters with the reduced oversampling ratio `ab = p/q`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaborParams {
    #[serde(with = "serde_rational")]
    pub a: Rational,
    #[serde(with = "serde_rational")]
    pub b: Rational,
    pub p: u64,
    pub q: u64,
}

impl GaborParams {
    pub fn new(a: Rational, b: Rational) -> Result<Self> {
        let (p, q) = reduce_ratio(&a, &b)?;
        debug_assert_eq!(gcd_u64(p, q), 1);
        Ok(GaborParams { a, b, p, q })
    }

    pub fn ratio(&self) -> Rational {
        &self.a * &self.b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Phi,
    Psi,
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "phi" => Ok(Variant::Phi),
            "psi" => Ok(Variant::Psi),
            _ => Err(format!("unknown variant {s:?} (expected phi or psi)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZZMatrix {
    pub variant: Variant,
    pub x: f64,
    pub nu: f64,
    pub matrix: CMatrix,
}

impl ZZMatrix {
    pub fn rows(&self) -> usize {
        self.matrix.rows
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols
    }

    pub fn singular_extrema(&self) -> (f64, f64) {
        singular_extrema(&self.matrix)
    }
}

/// Precomputed float data for repeated matrix assembly at one `(g, a, b)`.
struct Assembler<'a> {
    g: &'a PiecewisePolynomial,
    variant: Variant,
    p: usize,
    q: usize,
    inv_b: f64,
    /// Ψ: step `aq` of the inner sum. Φ: unused.
    period: f64,
    /// Φ: column shifts `ℓp/q`. Ψ: offsets `aℓ + k/b`, row-major.
    offsets: Vec<f64>,
    scale: f64,
}

impl<'a> Assembler<'a> {
    fn new(g: &'a PiecewisePolynomial, params: &GaborParams, variant: Variant) -> Result<Self> {
        let (p, q) = (params.p as usize, params.q as usize);
        if p > 4096 || q > 4096 {
            return invalid(format!(
                "oversampling ratio {}/{} too large for matrix assembly",
                p, q
            ));
        }
        let b = &params.b;
        let offsets = match variant {
            Variant::Phi => (0..q)
                .map(|l| to_f64(&rat((l as u64 * params.p) as i64, params.q as i64)))
                .collect(),
            Variant::Psi => (0..p)
                .flat_map(|k| {
                    (0..q).map(move |l| to_f64(&(&params.a * int(l as i64) + int(k as i64) / b)))
                })
                .collect(),
        };
        let scale = match variant {
            Variant::Phi => (to_f64(&b.recip()) / p as f64).sqrt(),
            Variant::Psi => 1.0 / to_f64(b).sqrt(),
        };
        Ok(Assembler {
            g,
            variant,
            p,
            q,
            inv_b: to_f64(&b.recip()),
            period: to_f64(&(&params.a * int(params.q as i64))),
            offsets,
            scale,
        })
    }

    fn matrix(&self, x: f64, nu: f64) -> CMatrix {
        let mut m = CMatrix::zeros(self.p, self.q);
        match self.variant {
            Variant::Phi => {
                for l in 0..self.q {
                    let terms = zak_terms(self.g, self.inv_b, x - self.offsets[l]);
                    for k in 0..self.p {
                        let z = sum_terms(&terms, nu + k as f64 / self.p as f64);
                        m.set(k, l, z * self.scale);
                    }
                }
            }
            Variant::Psi => {
                let (lo, hi) = self.g.support_f64();
                for k in 0..self.p {
                    for l in 0..self.q {
                        let t = x + self.offsets[k * self.q + l];
                        let n0 = ((lo - t) / self.period).ceil() as i64;
                        let n1 = ((hi - t) / self.period).floor() as i64;
                        let mut s = Complex64::new(0.0, 0.0);
                        for n in n0..=n1 {
                            let v = self.g.eval_float(t + self.period * n as f64);
                            if v != 0.0 {
                                s += phase(-self.period * n as f64 * nu) * v;
                            }
                        }
                        m.set(k, l, s * self.scale);
                    }
                }
            }
        }
        m
    }

    fn extrema(&self, x: f64, nu: f64) -> (f64, f64) {
        singular_extrema(&self.matrix(x, nu))
    }
}

pub fn phi_matrix(
    g: &PiecewisePolynomial,
    params: &GaborParams,
    x: f64,
    nu: f64,
) -> Result<ZZMatrix> {
    let asm = Assembler::new(g, params, Variant::Phi)?;
    Ok(ZZMatrix {
        variant: Variant::Phi,
        x,
        nu,
        matrix: asm.matrix(x, nu),
    })
}

pub fn psi_matrix(
    g: &PiecewisePolynomial,
    params: &GaborParams,
    x: f64,
    nu: f64,
) -> Result<ZZMatrix> {
    let asm = Assembler::new(g, params, Variant::Psi)?;
    Ok(ZZMatrix {
        variant: Variant::Psi,
        x,
        nu,
        matrix: asm.matrix(x, nu),
    })
}

/// Exact `Ψ` entries at a rational point with `ν = 0`, without the common
/// factor `b^{-1/2}`: `Σ_n g(x + aqn + aℓ + k/b)`.
pub fn psi_matrix_exact_unscaled(
    g: &PiecewisePolynomial,
    params: &GaborParams,
    x: &Rational,
) -> Result<Vec<Vec<Rational>>> {
    let period = &params.a * int(params.q as i64);
    (0..params.p)
        .map(|k| {
            (0..params.q)
                .map(|l| {
                    let t = x + &params.a * int(l as i64) + int(k as i64) / &params.b;
                    g.periodize_exact(&period, &t)
                })
                .collect()
        })
        .collect()
}

/// Options for [`frame_bounds_estimate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    pub nx: usize,
    pub nnu: usize,
}

impl GridSpec {
    pub const DEFAULT: GridSpec = GridSpec { nx: 128, nnu: 128 };
}

impl std::str::FromStr for GridSpec {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("grid must look like NxM, got {s:?}"))?;
        let nx = a
            .trim()
            .parse()
            .map_err(|_| format!("bad grid size {a:?}"))?;
        let nnu = b
            .trim()
            .parse()
            .map_err(|_| format!("bad grid size {b:?}"))?;
        Ok(GridSpec { nx, nnu })
    }
}

pub const DEFAULT_REFINE_STEPS: u32 = 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameBoundReport {
    #[serde(rename = "sqrtA")]
    pub sqrt_a: f64,
    #[serde(rename = "sqrtB")]
    pub sqrt_b: f64,
    pub grid: [usize; 2],
    pub refined: bool,
    pub refine_steps: u32,
    pub argmin: [f64; 2],
    pub argmax: [f64; 2],
    pub variant: Variant,
    /// Periods `(X, V)` of the sampled cell `[0, X) × [0, V)`.
    pub cell: [f64; 2],
}

/// One period cell of `(x, ν) ↦ singular values`. The singular values of
/// `Φ` are invariant (up to unitary factors) under `x ↦ x + 1`,
/// `x ↦ x - p/q` and `ν ↦ ν + 1/p`, hence periodic on `[0, 1/q) × [0, 1/p)`;
/// likewise `Ψ` under `x ↦ x + a`, `x ↦ x + 1/b` and `ν ↦ ν + 1/(aq)`,
/// giving `[0, 1/(qb)) × [0, b/p)`.
pub fn sampling_cell(params: &GaborParams, variant: Variant) -> (Rational, Rational) {
    let (p, q) = (int(params.p as i64), int(params.q as i64));
    match variant {
        Variant::Phi => (q.recip(), p.recip()),
        Variant::Psi => ((&q * &params.b).recip(), &params.b / &p),
    }
}

/// Points where non-frame certificates live, reduced into the sampling cell:
/// the origin and, for `b > 3/2`, `(ℓ/q, k/round(b))` (with the matching
/// `Ψ` coordinates, both orientations).
fn hot_spots(params: &GaborParams, variant: Variant) -> Vec<(f64, f64)> {
    let (_, cv) = sampling_cell(params, variant);
    let reduce = |v: Rational, period: &Rational| -> f64 {
        let r = &v / period;
        to_f64(&((&r - r.floor()) * period))
    };
    let mut pts = vec![(0.0, 0.0)];
    if params.b > rat(3, 2) {
        let big_r = round_nearest(&params.b);
        let rr = Rational::from_integer(big_r.clone());
        let r_usize: usize = big_r.try_into().unwrap_or(0);
        for k in 0..r_usize.min(64) {
            let nu = rat(k as i64, 1) / &rr;
            match variant {
                Variant::Phi => pts.push((0.0, reduce(nu, &cv))),
                Variant::Psi => {
                    let s = &nu * &params.b;
                    pts.push((0.0, reduce(s.clone(), &cv)));
                    pts.push((0.0, reduce(-s, &cv)));
                }
            }
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

fn is_continuous(g: &PiecewisePolynomial) -> bool {
    let bps = g.breakpoints();
    let pieces = g.pieces();
    let last = pieces.len() - 1;
    pieces[0].eval(&Rational::zero()).is_zero()
        && pieces[last].eval(&(&bps[last + 1] - &bps[last])).is_zero()
        && (1..pieces.len()).all(|i| {
            pieces[i - 1].eval(&(&bps[i] - &bps[i - 1])) == pieces[i].eval(&Rational::zero())
        })
}

#[derive(Clone, Copy)]
struct Sample {
    x: f64,
    nu: f64,
    lo: f64,
    hi: f64,
}

/// Estimates `√A` and `√B` by sampling one period cell on a uniform grid
/// (plus certificate hot spots), then refining around the best candidates
/// for the minimum and maximum with `refine_steps` halvings of a local
/// 3×3 pattern search. Grid sampling cannot certify a positive lower bound,
/// so the result is an estimate.
pub fn frame_bounds_estimate(
    g: &PiecewisePolynomial,
    params: &GaborParams,
    variant: Variant,
    grid: GridSpec,
    refine_steps: u32,
) -> Result<FrameBoundReport> {
    if grid.nx < 2 || grid.nnu < 2 {
        return invalid(format!(
            "grid must be at least 2x2, got {}x{}",
            grid.nx, grid.nnu
        ));
    }
    if !params.a.is_positive() || !params.b.is_positive() {
        return invalid(format!(
            "a and b must be positive, got a={}, b={}",
            format_rational(&params.a),
            format_rational(&params.b)
        ));
    }
    let asm = Assembler::new(g, params, variant)?;
    let (cx, cv) = sampling_cell(params, variant);
    let (cx, cv) = (to_f64(&cx), to_f64(&cv));
    // Discontinuous windows: keep samples off the jump lines of the Zak transform.
    let off = if is_continuous(g) { 0.0 } else { 0.5 };
    let hx = cx / grid.nx as f64;
    let hv = cv / grid.nnu as f64;

    let mut grid_samples: Vec<Sample> = (0..grid.nx)
        .into_par_iter()
        .flat_map_iter(|i| {
            let x = (i as f64 + off) * hx;
            let asm = &asm;
            (0..grid.nnu).map(move |j| {
                let nu = (j as f64 + off) * hv;
                let (lo, hi) = asm.extrema(x, nu);
                Sample { x, nu, lo, hi }
            })
        })
        .collect();
    let spots: Vec<Sample> = if off == 0.0 {
        hot_spots(params, variant)
            .into_iter()
            .map(|(x, nu)| {
                let (lo, hi) = asm.extrema(x, nu);
                Sample { x, nu, lo, hi }
            })
            .collect()
    } else {
        Vec::new()
    };

    let wrap = |v: f64, period: f64| v.rem_euclid(period);
    let mut best_lo = spots
        .iter()
        .chain(grid_samples.iter())
        .copied()
        .min_by(|a, b| a.lo.total_cmp(&b.lo))
        .unwrap();
    let mut best_hi = spots
        .iter()
        .chain(grid_samples.iter())
        .copied()
        .max_by(|a, b| a.hi.total_cmp(&b.hi))
        .unwrap();

    if refine_steps > 0 {
        let nx = grid.nx;
        let nv = grid.nnu;
        let at = |s: &[Sample], i: usize, j: usize| s[(i % nx) * nv + (j % nv)];
        // Local extrema of the grid, best first.
        let mut min_idx: Vec<usize> = Vec::new();
        let mut max_idx: Vec<usize> = Vec::new();
        for i in 0..nx {
            for j in 0..nv {
                let c = at(&grid_samples, i, j);
                let nbrs = [
                    at(&grid_samples, i + nx - 1, j),
                    at(&grid_samples, i + 1, j),
                    at(&grid_samples, i, j + nv - 1),
                    at(&grid_samples, i, j + 1),
                ];
                if nbrs.iter().all(|n| c.lo <= n.lo) {
                    min_idx.push(i * nv + j);
                }
                if nbrs.iter().all(|n| c.hi >= n.hi) {
                    max_idx.push(i * nv + j);
                }
            }
        }
        min_idx.sort_by(|&a, &b| grid_samples[a].lo.total_cmp(&grid_samples[b].lo));
        max_idx.sort_by(|&a, &b| grid_samples[b].hi.total_cmp(&grid_samples[a].hi));
        let mut starts_lo: Vec<Sample> = min_idx.iter().take(4).map(|&i| grid_samples[i]).collect();
        starts_lo.push(best_lo);
        let mut starts_hi: Vec<Sample> = max_idx.iter().take(4).map(|&i| grid_samples[i]).collect();
        starts_hi.push(best_hi);

        let search = |start: Sample, minimize: bool| -> Sample {
            let key = |s: &Sample| if minimize { s.lo } else { -s.hi };
            let mut cur = start;
            let (mut sx, mut sv) = (hx / 2.0, hv / 2.0);
            for _ in 0..refine_steps {
                let mut best = cur;
                for dx in [-1.0, 0.0, 1.0] {
                    for dv in [-1.0, 0.0, 1.0] {
                        if dx == 0.0 && dv == 0.0 {
                            continue;
                        }
                        let x = wrap(cur.x + dx * sx, cx);
                        let nu = wrap(cur.nu + dv * sv, cv);
                        let (lo, hi) = asm.extrema(x, nu);
                        let s = Sample { x, nu, lo, hi };
                        if key(&s) < key(&best) {
                            best = s;
                        }
                    }
                }
                cur = best;
                sx /= 2.0;
                sv /= 2.0;
            }
            cur
        };
        let refined_lo: Vec<Sample> = starts_lo.into_par_iter().map(|s| search(s, true)).collect();
        let refined_hi: Vec<Sample> = starts_hi
            .into_par_iter()
            .map(|s| search(s, false))
            .collect();
        for s in refined_lo {
            if s.lo < best_lo.lo {
                best_lo = s;
            }
        }
        for s in refined_hi {
            if s.hi > best_hi.hi {
                best_hi = s;
            }
        }
        grid_samples.clear();
    }

    Ok(FrameBoundReport {
        sqrt_a: best_lo.lo,
        sqrt_b: best_hi.hi,
        grid: [grid.nx, grid.nnu],
        refined: refine_steps > 0,
        refine_steps,
        argmin: [best_lo.x, best_lo.nu],
        argmax: [best_hi.x, best_hi.nu],
        variant,
        cell: [cx, cv],
    })
}

/// Painless-regime bounds `(√A, √B)` with `A, B = b^{-1}·(ess inf, ess sup)`
/// of `Σ_k |g(x - ak)|²` over one period, valid when `b ≤ 1/|supp g|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PainlessBounds {
    #[serde(rename = "sqrtA")]
    pub sqrt_a: f64,
    #[serde(rename = "sqrtB")]
    pub sqrt_b: f64,
}

pub fn painless_bounds_closed_form(
    g: &PiecewisePolynomial,
    a: &Rational,
    b: &Rational,
) -> Result<PainlessBounds> {
    if !a.is_positive() || !b.is_positive() {
        return invalid("a and b must be positive");
    }
    if b * g.support_length() > int(1) {
        return invalid(format!(
            "painless regime needs b <= 1/|supp g| = {}, got b = {}",
            format_rational(&g.support_length().recip()),
            format_rational(b)
        ));
    }
    let sum_sq = crate::painless::periodized_square(g, a);
    let (lo, hi) = sum_sq.float_range();
    let inv_b = to_f64(&b.recip());
    Ok(PainlessBounds {
        sqrt_a: (lo * inv_b).max(0.0).sqrt(),
        sqrt_b: (hi * inv_b).max(0.0).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bspline::{bspline_centered, cardinal};

    fn params(a: Rational, b: Rational) -> GaborParams {
        GaborParams::new(a, b).unwrap()
    }

    #[test]
    fn phi_examples() {
        let b2 = bspline_centered(2).unwrap();
        let pr = params(int(1), rat(1, 2));
        let m = phi_matrix(&b2, &pr, 0.0, 0.0).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 2));
        let z0 = crate::zak::zak_transform(&b2, &int(2), 0.0, 0.0).unwrap();
        let z1 = crate::zak::zak_transform(&b2, &int(2), -0.5, 0.0).unwrap();
        assert!((m.matrix.get(0, 0) - z0).norm() < 1e-14);
        assert!((m.matrix.get(0, 1) - z1).norm() < 1e-14);

        let m = phi_matrix(&b2, &params(rat(1, 3), rat(5, 2)), 0.3, 0.1).unwrap();
        assert_eq!((m.rows(), m.cols()), (5, 6));

        let n2 = cardinal(2).unwrap();
        let m = phi_matrix(&n2, &params(rat(5, 21), rat(21, 10)), 0.5, 0.5).unwrap();
        assert!(m.matrix.get(0, 0).norm() < 1e-12 && m.matrix.get(0, 1).norm() < 1e-12);
    }

    #[test]
    fn psi_examples() {
        let b2 = bspline_centered(2).unwrap();
        let a = rat(1, 3);
        let pr = params(a.clone(), rat(5, 2));
        let m = psi_matrix(&b2, &pr, 0.0, 0.0).unwrap();
        assert_eq!((m.rows(), m.cols()), (5, 6));
        let s = 1.0 / 2.5f64.sqrt();
        let af = 1.0 / 3.0;
        let expect = [0.0, -2.0 * af, -2.0 * af, 0.0, 2.0 * af, 2.0 * af];
        for (l, e) in expect.iter().enumerate() {
            let d = m.matrix.get(1, l) - m.matrix.get(4, l);
            assert!((d - Complex64::new(s * e, 0.0)).norm() < 1e-14, "col {l}");
        }
        let exact = psi_matrix_exact_unscaled(&b2, &pr, &int(0)).unwrap();
        for l in 0..6 {
            assert_eq!(
                &exact[1][l] - &exact[4][l],
                &a * int([0, -2, -2, 0, 2, 2][l])
            );
        }

        let m = psi_matrix(&b2, &params(int(1), rat(1, 2)), 0.0, 0.0).unwrap();
        assert!((m.matrix.get(0, 0) - Complex64::new(2f64.sqrt(), 0.0)).norm() < 1e-14);
        assert!(m.matrix.get(0, 1).norm() < 1e-14);

        // Single-term sums reduce to b^{-1/2} g(x + aℓ + k/b).
        let pr = params(rat(1, 10), rat(1, 3));
        let m = psi_matrix(&b2, &pr, 0.05, 0.0).unwrap();
        // For ℓ <= 9 the sample 0.05 + ℓ/10 is the only translate by aq = 3 in [-1, 1].
        for l in 0..10 {
            let v = b2.eval_float(0.05 + 0.1 * l as f64) * 3f64.sqrt();
            assert!((m.matrix.get(0, l).re - v).abs() < 1e-13);
        }
    }

    #[test]
    fn psi_and_phi_are_unitarily_related_for_symmetric_windows() {
        // σ(Ψ(-x/b, -bν)) = σ(Φ(x, ν)) for even g.
        let b3 = bspline_centered(3).unwrap();
        let pr = params(rat(2, 7), rat(7, 3));
        let b = 7.0 / 3.0;
        for &(x, nu) in &[(0.01, 0.02), (0.1, 0.3), (0.27, 0.91)] {
            let phi = phi_matrix(&b3, &pr, x, nu).unwrap();
            let psi = psi_matrix(&b3, &pr, -x / b, -b * nu).unwrap();
            let s1 = crate::linalg::singular_values(&phi.matrix);
            let s2 = crate::linalg::singular_values(&psi.matrix);
            for (u, v) in s1.iter().zip(&s2) {
                assert!((u - v).abs() < 1e-12, "{s1:?} vs {s2:?}");
            }
        }
    }

    #[test]
    fn hot_spots_include_origin() {
        let pr = params(rat(1, 3), rat(5, 2));
        assert!(hot_spots(&pr, Variant::Phi).contains(&(0.0, 0.0)));
        assert!(hot_spots(&pr, Variant::Psi).len() > 1);
    }

    #[test]
    fn grid_spec_parsing() {
        assert_eq!(
            "64x32".parse::<GridSpec>().unwrap(),
            GridSpec { nx: 64, nnu: 32 }
        );
        assert!("64".parse::<GridSpec>().is_err());
        assert!(frame_bounds_estimate(
            &bspline_centered(2).unwrap(),
            &params(int(1), rat(1, 2)),
            Variant::Phi,
            GridSpec { nx: 1, nnu: 4 },
            0
        )
        .is_err());
    }
}
