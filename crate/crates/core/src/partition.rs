//! Cubic partitions of the unit cube `[0,1]^d`.
//!
//! A partition with `n` cells per axis splits the cube into `n^d` closed
//! cells of side `1/n`. Cells are addressed by 1-based [`MultiIndex`]
//! values; the cell of `j` is the product of `[(j_l - 1)/n, j_l/n]`.
//! Neighbouring cells share their faces, so a point may lie in up to `2^d`
//! closed cells. Where a single cell must be chosen, the lexicographically
//! smallest one wins.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// A 1-based cell address, one coordinate per axis.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(coords: Vec<usize>) -> Self {
        MultiIndex(coords)
    }

    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The `n`-per-axis cubic partition of `[0,1]^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CubicPartition {
    n: usize,
    d: usize,
}

/// Builds the `n`-per-axis partition of `[0,1]^d`.
pub fn make_partition(n: usize, d: usize) -> Result<CubicPartition> {
    CubicPartition::new(n, d)
}

impl CubicPartition {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 {
            return invalid("cells per axis must be positive");
        }
        if d == 0 {
            return invalid("dimension must be positive");
        }
        let d32 = u32::try_from(d).map_err(|_| Error::InvalidArgument("dimension too large".into()))?;
        if n.checked_pow(d32).is_none() {
            return invalid(format!("{n}^{d} cells overflow usize"));
        }
        Ok(Self { n, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Total number of cells, `n^d`.
    pub fn cell_count(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn side<F: Scalar>(&self) -> F {
        F::one() / F::of_usize(self.n)
    }

    /// Grid coordinate `k/n`; cell `j` on an axis spans `[grid(j-1), grid(j)]`.
    ///
    /// Every boundary value in the crate goes through this function so that
    /// cell membership and localizer gating agree bit for bit.
    #[inline]
    pub fn grid<F: Scalar>(&self, k: usize) -> F {
        F::of_usize(k) / F::of_usize(self.n)
    }

    pub fn is_valid_index(&self, j: &MultiIndex) -> bool {
        j.dim() == self.d && j.coords().iter().all(|&c| (1..=self.n).contains(&c))
    }

    pub fn check_index(&self, j: &MultiIndex) -> Result<()> {
        if self.is_valid_index(j) {
            Ok(())
        } else {
            invalid(format!(
                "index {j} is not a cell of the {}-per-axis partition in dimension {}",
                self.n, self.d
            ))
        }
    }

    /// Center `(2 j_l - 1) / (2n)` of cell `j`.
    pub fn center<F: Scalar>(&self, j: &MultiIndex) -> Vec<F> {
        let two_n = F::of_usize(2 * self.n);
        j.coords()
            .iter()
            .map(|&c| F::of_usize(2 * c - 1) / two_n)
            .collect()
    }

    /// Lower and upper corner of the closed cell `j`.
    pub fn bounds<F: Scalar>(&self, j: &MultiIndex) -> (Vec<F>, Vec<F>) {
        let lo = j.coords().iter().map(|&c| self.grid(c - 1)).collect();
        let hi = j.coords().iter().map(|&c| self.grid(c)).collect();
        (lo, hi)
    }

    /// Closed-cell membership.
    pub fn cell_contains<F: Scalar>(&self, j: &MultiIndex, x: &[F]) -> bool {
        j.coords()
            .iter()
            .zip(x)
            .all(|(&c, &v)| v >= self.grid(c - 1) && v <= self.grid(c))
    }

    pub fn check_point<F: Scalar>(&self, x: &[F]) -> Result<()> {
        check_unit_point(x, self.d)
    }

    /// Row-major linear position of `j` (last axis fastest), 0-based.
    pub fn linear_index(&self, j: &MultiIndex) -> usize {
        j.coords().iter().fold(0, |acc, &c| acc * self.n + (c - 1))
    }

    pub fn multi_index(&self, mut linear: usize) -> MultiIndex {
        let mut coords = vec![0; self.d];
        for slot in coords.iter_mut().rev() {
            *slot = linear % self.n + 1;
            linear /= self.n;
        }
        MultiIndex(coords)
    }

    /// All cell indices in lexicographic order.
    pub fn indices(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.cell_count()).map(move |l| self.multi_index(l))
    }

    /// Smallest axis index whose closed interval contains `v`.
    fn locate_axis<F: Scalar>(&self, v: F) -> usize {
        let guess = (v * F::of_usize(self.n)).ceil().to_usize().unwrap_or(1);
        let mut j = guess.clamp(1, self.n);
        while j > 1 && v <= self.grid(j - 1) {
            j -= 1;
        }
        while j < self.n && v > self.grid(j) {
            j += 1;
        }
        j
    }

    /// Every axis index whose closed interval contains `v` (one or two).
    fn axis_cells<F: Scalar>(&self, v: F) -> Vec<usize> {
        let j = self.locate_axis(v);
        let mut out = vec![j];
        if j < self.n && v >= self.grid(j) {
            out.push(j + 1);
        }
        out
    }

    /// The lexicographically smallest cell whose closed cube contains `x`.
    pub fn locate<F: Scalar>(&self, x: &[F]) -> Result<MultiIndex> {
        self.check_point(x)?;
        Ok(MultiIndex(x.iter().map(|&v| self.locate_axis(v)).collect()))
    }

    /// All closed cells containing `x`, in lexicographic order (at most `2^d`).
    pub fn containing_cells<F: Scalar>(&self, x: &[F]) -> Result<Vec<MultiIndex>> {
        self.check_point(x)?;
        let per_axis: Vec<Vec<usize>> = x.iter().map(|&v| self.axis_cells(v)).collect();
        Ok(cartesian(&per_axis).into_iter().map(MultiIndex).collect())
    }

    /// Cells of `self` whose closed cube meets the closed coarse cell `k`.
    ///
    /// Intersection is decided in exact integer arithmetic: on each axis
    /// `[(j-1)/n, j/n]` meets `[(k-1)/N, k/N]` iff `(j-1) N <= k n` and
    /// `j N >= (k-1) n`.
    pub fn overlap_indices(&self, coarse: &CubicPartition, k: &MultiIndex) -> Result<BTreeSet<MultiIndex>> {
        if coarse.d != self.d {
            return invalid(format!(
                "dimension mismatch: fine partition has d={}, coarse has d={}",
                self.d, coarse.d
            ));
        }
        coarse.check_index(k)?;
        let (n, big_n) = (self.n, coarse.n);
        let per_axis: Vec<Vec<usize>> = k
            .coords()
            .iter()
            .map(|&kc| {
                (1..=n)
                    .filter(|&j| (j - 1) * big_n <= kc * n && j * big_n >= (kc - 1) * n)
                    .collect()
            })
            .collect();
        Ok(cartesian(&per_axis).into_iter().map(MultiIndex).collect())
    }
}

pub(crate) fn check_unit_point<F: Scalar>(x: &[F], d: usize) -> Result<()> {
    if x.len() != d {
        return Err(Error::InvalidArgument(format!(
            "point has {} coordinates, expected {d}",
            x.len()
        )));
    }
    for (l, &v) in x.iter().enumerate() {
        if !(v >= F::zero() && v <= F::one()) {
            return Err(Error::OutOfDomain(format!("coordinate {l} = {v} is outside [0,1]")));
        }
    }
    Ok(())
}

fn cartesian(axes: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::with_capacity(axes.len())];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&c| {
                    let mut p = prefix.clone();
                    p.push(c);
                    p
                })
            })
            .collect();
    }
    out
}

/// A union of coarse cells: the support set `S` of a sparse function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportSet {
    coarse: CubicPartition,
    indices: BTreeSet<MultiIndex>,
}

/// Builds the support set from distinct coarse-cell indices.
pub fn make_support(coarse: CubicPartition, indices: &[MultiIndex]) -> Result<SupportSet> {
    if indices.is_empty() {
        return invalid("support needs at least one cell");
    }
    let mut set = BTreeSet::new();
    for k in indices {
        coarse.check_index(k)?;
        if !set.insert(k.clone()) {
            return invalid(format!("duplicate support index {k}"));
        }
    }
    Ok(SupportSet { coarse, indices: set })
}

impl SupportSet {
    pub fn coarse(&self) -> &CubicPartition {
        &self.coarse
    }

    pub fn indices(&self) -> &BTreeSet<MultiIndex> {
        &self.indices
    }

    /// Sparsity `s`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.indices.len() == self.coarse.cell_count()
    }

    /// Closed membership in `S`.
    pub fn contains<F: Scalar>(&self, x: &[F]) -> bool {
        self.indices.iter().any(|k| self.coarse.cell_contains(k, x))
    }

    /// Union of the fine cells that touch any support cell.
    pub fn fine_cover(&self, fine: &CubicPartition) -> Result<BTreeSet<MultiIndex>> {
        let mut out = BTreeSet::new();
        for k in &self.indices {
            out.extend(fine.overlap_indices(&self.coarse, k)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn centers_and_counts() {
        let p = make_partition(4, 2).unwrap();
        assert_eq!(p.center::<f64>(&mi(&[1, 4])), vec![0.125, 0.875]);
        assert_eq!(p.cell_count(), 16);
        let one = make_partition(1, 3).unwrap();
        assert_eq!(one.center::<f64>(&mi(&[1, 1, 1])), vec![0.5; 3]);
    }

    #[test]
    fn zero_sizes_rejected() {
        assert!(matches!(make_partition(0, 2), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_partition(3, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn locate_examples() {
        let p = make_partition(4, 2).unwrap();
        assert_eq!(p.locate(&[0.1, 0.9]).unwrap(), mi(&[1, 4]));
        let line = make_partition(4, 1).unwrap();
        assert_eq!(line.locate(&[0.25]).unwrap(), mi(&[1]));
        let sq = make_partition(2, 2).unwrap();
        assert_eq!(sq.locate(&[1.0, 1.0]).unwrap(), mi(&[2, 2]));
        assert_eq!(sq.locate(&[0.0, 0.0]).unwrap(), mi(&[1, 1]));
    }

    #[test]
    fn locate_rejects_outside_points() {
        let p = make_partition(4, 2).unwrap();
        assert!(matches!(p.locate(&[1.01, 0.5]), Err(Error::OutOfDomain(_))));
        assert!(matches!(p.locate(&[-0.0001, 0.5]), Err(Error::OutOfDomain(_))));
        assert!(matches!(p.locate(&[f64::NAN, 0.5]), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn overlap_examples() {
        let fine = make_partition(8, 1).unwrap();
        let coarse = make_partition(2, 1).unwrap();
        let got: Vec<_> = fine.overlap_indices(&coarse, &mi(&[1])).unwrap().into_iter().collect();
        assert_eq!(got, (1..=5).map(|j| mi(&[j])).collect::<Vec<_>>());

        let fine2 = make_partition(8, 2).unwrap();
        let coarse2 = make_partition(2, 2).unwrap();
        let got2 = fine2.overlap_indices(&coarse2, &mi(&[1, 1])).unwrap();
        assert_eq!(got2.len(), 25);
        assert!(got2.len() as f64 <= (8.0f64 / 2.0 + 2.0).powi(2));

        let same = make_partition(2, 1).unwrap();
        let got3: Vec<_> = same.overlap_indices(&same, &mi(&[1])).unwrap().into_iter().collect();
        assert_eq!(got3, vec![mi(&[1]), mi(&[2])]);
    }

    #[test]
    fn overlap_dimension_mismatch() {
        let fine = make_partition(8, 2).unwrap();
        let coarse = make_partition(2, 1).unwrap();
        assert!(matches!(
            fine.overlap_indices(&coarse, &mi(&[1])),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn support_examples() {
        let coarse = make_partition(4, 2).unwrap();
        let idx = [mi(&[1, 1]), mi(&[2, 3]), mi(&[4, 4]), mi(&[3, 1])];
        let s = make_support(coarse, &idx).unwrap();
        assert_eq!(s.len(), 4);

        let line = make_partition(2, 1).unwrap();
        let full = make_support(line, &[mi(&[1]), mi(&[2])]).unwrap();
        for i in 0..=100 {
            assert!(full.contains(&[i as f64 / 100.0]));
        }
        let half = make_support(line, &[mi(&[1])]).unwrap();
        assert!(!half.contains(&[0.75]));
        assert!(half.contains(&[0.5]));
    }

    #[test]
    fn support_rejects_bad_indices() {
        let line = make_partition(2, 1).unwrap();
        assert!(make_support(line, &[mi(&[1]), mi(&[1])]).is_err());
        assert!(make_support(line, &[mi(&[3])]).is_err());
        assert!(make_support(line, &[mi(&[1, 1])]).is_err());
        assert!(make_support(line, &[]).is_err());
    }

    #[test]
    fn linear_index_roundtrip() {
        let p = make_partition(3, 3).unwrap();
        for (l, j) in p.indices().enumerate() {
            assert_eq!(p.linear_index(&j), l);
        }
    }

    proptest! {
        #[test]
        fn located_cell_contains_point(n in 1usize..9, xs in proptest::collection::vec(0.0f64..=1.0, 1..4)) {
            let p = make_partition(n, xs.len()).unwrap();
            let j = p.locate(&xs).unwrap();
            prop_assert!(p.cell_contains(&j, &xs));
            let all = p.containing_cells(&xs).unwrap();
            prop_assert!(all.len() <= 1 << xs.len());
            prop_assert_eq!(&all[0], &j);
            // brute force: the containing set is exactly the cells that contain x
            let brute: Vec<_> = p.indices().filter(|c| p.cell_contains(c, &xs)).collect();
            prop_assert_eq!(all, brute);
        }

        #[test]
        fn grid_points_hit_at_most_2d_cells(n in 1usize..7, d in 1usize..4, seed in 0usize..1000) {
            let p = make_partition(n, d).unwrap();
            // points on the grid of boundaries k/n
            let x: Vec<f64> = (0..d).map(|l| p.grid::<f64>((seed / (l + 1)) % (n + 1))).collect();
            prop_assert!(p.containing_cells(&x).unwrap().len() <= 1 << d);
        }

        #[test]
        fn overlap_cardinality_bound(big_n in 1usize..4, mult in 4usize..7, extra in 0usize..4, d in 1usize..4, pick in 0usize..1000) {
            let n = big_n * mult + extra;
            let fine = make_partition(n, d).unwrap();
            let coarse = make_partition(big_n, d).unwrap();
            let k = coarse.multi_index(pick % coarse.cell_count());
            let ov = fine.overlap_indices(&coarse, &k).unwrap();
            let bound = (n as f64 / big_n as f64 + 2.0).powi(d as i32);
            prop_assert!(ov.len() as f64 <= bound);
            // brute force with closed-interval arithmetic on exact rationals
            let brute = fine.indices().filter(|j| {
                j.coords().iter().zip(k.coords()).all(|(&jc, &kc)| {
                    let (a0, a1) = ((jc - 1) as f64 / n as f64, jc as f64 / n as f64);
                    let (b0, b1) = ((kc - 1) as f64 / big_n as f64, kc as f64 / big_n as f64);
                    a0.max(b0) <= a1.min(b1) + 1e-12
                })
            }).count();
            prop_assert_eq!(ov.len(), brute);
        }

        #[test]
        fn support_membership_matches_brute_force(big_n in 1usize..5, d in 1usize..3, mask in 1u32..65535) {
            let coarse = make_partition(big_n, d).unwrap();
            let idx: Vec<_> = coarse.indices().enumerate()
                .filter(|(l, _)| mask & (1 << (l % 16)) != 0).map(|(_, k)| k).collect();
            prop_assume!(!idx.is_empty());
            let s = make_support(coarse, &idx).unwrap();
            let g = 17usize;
            let total = g.pow(d as u32);
            for lin in 0..total {
                let mut rem = lin;
                let x: Vec<f64> = (0..d).map(|_| { let v = (rem % g) as f64 / (g - 1) as f64; rem /= g; v }).collect();
                let brute = idx.iter().any(|k| k.coords().iter().zip(&x).all(|(&kc, &v)| {
                    v * big_n as f64 >= (kc - 1) as f64 - 1e-12 && v * big_n as f64 <= kc as f64 + 1e-12
                }));
                prop_assert_eq!(s.contains(&x), brute, "x = {:?}", x);
            }
        }
    }
}
