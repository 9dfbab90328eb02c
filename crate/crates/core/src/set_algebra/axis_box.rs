use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{dyadic_step, qi, Q};

/// Product of half-open rational intervals `[lo_k, hi_k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AxisBox {
    lo: Vec<Q>,
    hi: Vec<Q>,
}

impl AxisBox {
    pub fn new(intervals: Vec<(Q, Q)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::Invalid("box must have at least one axis".into()));
        }
        let mut lo = Vec::with_capacity(intervals.len());
        let mut hi = Vec::with_capacity(intervals.len());
        for (k, (a, b)) in intervals.into_iter().enumerate() {
            if a > b {
                return Err(Error::Invalid(format!(
                    "interval on axis {k} has lower end {a} above upper end {b}"
                )));
            }
            lo.push(a);
            hi.push(b);
        }
        Ok(AxisBox { lo, hi })
    }

    /// `[0,1)^dim`.
    pub fn unit(dim: usize) -> Self {
        AxisBox { lo: vec![Q::zero(); dim], hi: vec![Q::one(); dim] }
    }

    /// `[-r, r)^dim`.
    pub fn centered(dim: usize, r: u32) -> Self {
        AxisBox { lo: vec![-qi(r as i64); dim], hi: vec![qi(r as i64); dim] }
    }

    pub(crate) fn from_bounds_unchecked(lo: Vec<Q>, hi: Vec<Q>) -> Self {
        debug_assert_eq!(lo.len(), hi.len());
        AxisBox { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[Q] {
        &self.lo
    }

    pub fn hi(&self) -> &[Q] {
        &self.hi
    }

    pub fn intervals(&self) -> impl Iterator<Item = (&Q, &Q)> {
        self.lo.iter().zip(self.hi.iter())
    }

    pub fn measure(&self) -> Q {
        self.intervals().map(|(a, b)| b - a).fold(Q::one(), |acc, len| acc * len)
    }

    /// True when some side has zero length.
    pub fn is_null(&self) -> bool {
        self.intervals().any(|(a, b)| a >= b)
    }

    /// The (possibly null) intersection; `None` when dimensions differ.
    pub fn intersect(&self, other: &AxisBox) -> Option<AxisBox> {
        if self.dim() != other.dim() {
            return None;
        }
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            let a = std::cmp::max(&self.lo[k], &other.lo[k]).clone();
            let b = std::cmp::min(&self.hi[k], &other.hi[k]).clone();
            let b = if b < a { a.clone() } else { b };
            lo.push(a);
            hi.push(b);
        }
        Some(AxisBox { lo, hi })
    }

    /// Positive-measure overlap test.
    pub fn overlaps(&self, other: &AxisBox) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|k| self.lo[k] < other.hi[k] && other.lo[k] < self.hi[k])
    }

    pub fn contains_box(&self, other: &AxisBox) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|k| self.lo[k] <= other.lo[k] && other.hi[k] <= self.hi[k])
    }

    /// `self \ hole` as at most `2 * dim` disjoint boxes (null pieces dropped).
    pub fn subtract(&self, hole: &AxisBox) -> Vec<AxisBox> {
        let Some(cut) = self.intersect(hole) else {
            return vec![self.clone()];
        };
        if cut.is_null() {
            return vec![self.clone()];
        }
        let mut pieces = Vec::new();
        let mut rest = self.clone();
        for k in 0..self.dim() {
            if rest.lo[k] < cut.lo[k] {
                let mut below = rest.clone();
                below.hi[k] = cut.lo[k].clone();
                pieces.push(below);
                rest.lo[k] = cut.lo[k].clone();
            }
            if cut.hi[k] < rest.hi[k] {
                let mut above = rest.clone();
                above.lo[k] = cut.hi[k].clone();
                pieces.push(above);
                rest.hi[k] = cut.hi[k].clone();
            }
        }
        pieces
    }
}

/// The dyadic cube `prod_k [i_k / 2^level, (i_k + 1) / 2^level)`.
pub fn make_dyadic_cube(level: u32, index: &[i64], dim: usize) -> Result<AxisBox> {
    if index.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: index.len() });
    }
    if dim == 0 {
        return Err(Error::Invalid("dimension must be positive".into()));
    }
    let h = dyadic_step(level);
    let lo: Vec<Q> = index.iter().map(|&i| qi(i) * &h).collect();
    let hi: Vec<Q> = index.iter().map(|&i| qi(i + 1) * &h).collect();
    Ok(AxisBox { lo, hi })
}
