//! Parameter scans along lines, hyperbolas and over the `(a, b)` plane.

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::bspline::bspline_centered;
use crate::error::{invalid, Error, Result};
use crate::framesets::{classify_point, RegionLabel};
use crate::numerics::{format_rational, int, parse_rational, serde_rational, Rational};
use crate::zz::{frame_bounds_estimate, GaborParams, GridSpec, Variant};

/// Inclusive arithmetic progression `lo, lo + step, …` up to `hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalRange {
    pub lo: Rational,
    pub hi: Rational,
    pub step: Rational,
}

impl RationalRange {
    pub fn new(lo: Rational, hi: Rational, step: Rational) -> Result<Self> {
        if !step.is_positive() {
            return invalid(format!(
                "step must be positive, got {}",
                format_rational(&step)
            ));
        }
        if lo > hi {
            return invalid(format!(
                "empty range {}..{}",
                format_rational(&lo),
                format_rational(&hi)
            ));
        }
        Ok(RationalRange { lo, hi, step })
    }

    pub fn points(&self) -> Vec<Rational> {
        let count = ((&self.hi - &self.lo) / &self.step).floor().to_integer();
        let count: i64 = count.try_into().unwrap_or(i64::MAX);
        (0..=count)
            .map(|i| &self.lo + &self.step * int(i))
            .collect()
    }
}

impl std::str::FromStr for RationalRange {
    type Err = Error;
    /// `lo:hi:step`, each an exact rational.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected lo:hi:step, got {s:?}")));
        }
        RationalRange::new(
            parse_rational(parts[0])?,
            parse_rational(parts[1])?,
            parse_rational(parts[2])?,
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScanMode {
    /// `ab = ratio`, `b` free.
    Hyperbola { ratio: Rational, b: RationalRange },
    /// `b` fixed, `a` free.
    HorizontalLine { b: Rational, a: RationalRange },
    /// Region labels on a rectangular grid of `(a, b)`.
    Plane {
        a: RationalRange,
        b: RationalRange,
        estimate_unknown: bool,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanSpec {
    pub mode: ScanMode,
    pub n: u32,
    pub grid: GridSpec,
    pub refine_steps: u32,
    pub variant: Variant,
    /// Worker threads; `0` uses the global pool.
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    #[serde(with = "serde_rational")]
    pub a: Rational,
    #[serde(with = "serde_rational")]
    pub b: Rational,
    #[serde(rename = "sqrtA")]
    pub sqrt_a: Option<f64>,
    #[serde(rename = "sqrtB")]
    pub sqrt_b: Option<f64>,
    pub label: Option<RegionLabel>,
}

impl ScanSpec {
    /// Sample points in output order.
    pub fn points(&self) -> Vec<(Rational, Rational)> {
        match &self.mode {
            ScanMode::Hyperbola { ratio, b } => {
                b.points().into_iter().map(|b| (ratio / &b, b)).collect()
            }
            ScanMode::HorizontalLine { b, a } => {
                a.points().into_iter().map(|a| (a, b.clone())).collect()
            }
            ScanMode::Plane { a, b, .. } => {
                let bs = b.points();
                a.points()
                    .into_iter()
                    .flat_map(|a| bs.iter().map(move |b| (a.clone(), b.clone())))
                    .collect()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return invalid("B-spline order must be at least 1");
        }
        let positive = |x: &Rational, what: &str| -> Result<()> {
            if x.is_positive() {
                Ok(())
            } else {
                invalid(format!(
                    "{what} must be positive, got {}",
                    format_rational(x)
                ))
            }
        };
        match &self.mode {
            ScanMode::Hyperbola { ratio, b } => {
                positive(ratio, "ratio")?;
                positive(&b.lo, "b")
            }
            ScanMode::HorizontalLine { b, a } => {
                positive(b, "b")?;
                positive(&a.lo, "a")
            }
            ScanMode::Plane { a, b, .. } => {
                positive(&a.lo, "a")?;
                positive(&b.lo, "b")
            }
        }
    }

    fn row(&self, a: Rational, b: Rational) -> Result<ScanRow> {
        if let ScanMode::Plane {
            estimate_unknown, ..
        } = self.mode
        {
            let c = classify_point(self.n, &a, &b, estimate_unknown)?;
            return Ok(ScanRow {
                a,
                b,
                sqrt_a: c.sqrt_a,
                sqrt_b: None,
                label: Some(c.label),
            });
        }
        let g = bspline_centered(self.n)?;
        let params = GaborParams::new(a.clone(), b.clone())?;
        let r = frame_bounds_estimate(&g, &params, self.variant, self.grid, self.refine_steps)?;
        Ok(ScanRow {
            a,
            b,
            sqrt_a: Some(r.sqrt_a),
            sqrt_b: Some(r.sqrt_b),
            label: None,
        })
    }

    /// Runs the scan; rows come back in input order whatever the worker count.
    pub fn run(&self) -> Result<Vec<ScanRow>> {
        self.validate()?;
        let pts = self.points();
        if pts.is_empty() || pts.iter().any(|(a, b)| a.is_zero() || b.is_zero()) {
            return invalid("scan has no valid points");
        }
        let work = || {
            pts.into_par_iter()
                .map(|(a, b)| self.row(a, b))
                .collect::<Result<Vec<_>>>()
        };
        if self.workers == 0 {
            return work();
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?
            .install(work)
    }
}
