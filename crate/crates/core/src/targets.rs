//! Lipschitz and sparse-Lipschitz target functions with exact evaluators.
//!
//! Dense targets are `c0 · min_i ‖x - a_i‖^r` over seeded anchors. Sparse
//! targets are `c0 · dist(x, R^d \ S)^r` where `S` is a seeded union of
//! coarse cells; they vanish exactly off `S`. Both belong to the
//! `(r, c0)`-Lipschitz class for `0 < r <= 1`.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::partition::{make_partition, make_support, CubicPartition, MultiIndex, SupportSet};
use crate::scalar::Scalar;

/// Number of anchors used by [`make_lipschitz_target`].
pub const LIPSCHITZ_ANCHORS: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub enum TargetShape<F> {
    Zero,
    NearestAnchor { anchors: Vec<Vec<F>> },
    SupportDistance { support: SupportSet },
}

/// A target in `Lip(r, c0)`, possibly `s`-sparse in `N^d` partitions.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseTarget<F> {
    d: usize,
    r: F,
    c0: F,
    seed: u64,
    shape: TargetShape<F>,
}

fn check_smoothness<F: Scalar>(r: F, c0: F) -> Result<()> {
    if !(r > F::zero() && r <= F::one()) {
        return invalid(format!("smoothness r must lie in (0, 1], got {r}"));
    }
    if !(c0 > F::zero() && c0.is_finite()) {
        return invalid(format!("c0 must be positive and finite, got {c0}"));
    }
    Ok(())
}

fn euclid<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(&u, &v)| (u - v) * (u - v)).sum::<F>().sqrt()
}

/// Euclidean distance from `x` to the closed box `[lo, hi]`.
fn box_distance<F: Scalar>(x: &[F], lo: &[F], hi: &[F]) -> F {
    x.iter()
        .zip(lo.iter().zip(hi))
        .map(|(&v, (&a, &b))| {
            let gap = (a - v).max(v - b).max(F::zero());
            gap * gap
        })
        .sum::<F>()
        .sqrt()
}

/// Full-support target `c0 · min_i ‖x - a_i‖^r` with seeded anchors.
pub fn make_lipschitz_target<F: Scalar>(seed: u64, r: F, c0: F, d: usize) -> Result<SparseTarget<F>> {
    check_smoothness(r, c0)?;
    if d == 0 {
        return invalid("dimension must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchors = (0..LIPSCHITZ_ANCHORS)
        .map(|_| (0..d).map(|_| F::of(rng.gen::<f64>())).collect())
        .collect();
    Ok(SparseTarget {
        d,
        r,
        c0,
        seed,
        shape: TargetShape::NearestAnchor { anchors },
    })
}

/// `c0 · dist(x, R^d \ S)^r` on a seeded `s`-subset of the `N^d` coarse cells.
pub fn make_sparse_target<F: Scalar>(
    seed: u64,
    coarse_n: usize,
    s: usize,
    r: F,
    c0: F,
    d: usize,
) -> Result<SparseTarget<F>> {
    check_smoothness(r, c0)?;
    let coarse = make_partition(coarse_n, d)?;
    let cells = coarse.cell_count();
    if s == 0 || s > cells {
        return invalid(format!("sparsity must lie in 1..={cells}, got {s}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = sample(&mut rng, cells, s).into_vec();
    picked.sort_unstable();
    let indices: Vec<MultiIndex> = picked.into_iter().map(|l| coarse.multi_index(l)).collect();
    let support = make_support(coarse, &indices)?;
    Ok(SparseTarget {
        d,
        r,
        c0,
        seed,
        shape: TargetShape::SupportDistance { support },
    })
}

impl<F: Scalar> SparseTarget<F> {
    pub fn zero(d: usize) -> Self {
        Self {
            d,
            r: F::one(),
            c0: F::zero(),
            seed: 0,
            shape: TargetShape::Zero,
        }
    }

    pub fn with_anchors(anchors: Vec<Vec<F>>, r: F, c0: F) -> Result<Self> {
        check_smoothness(r, c0)?;
        let d = anchors.first().map(Vec::len).unwrap_or(0);
        if d == 0 || anchors.iter().any(|a| a.len() != d) {
            return invalid("anchors must be nonempty points of a common positive dimension");
        }
        Ok(Self {
            d,
            r,
            c0,
            seed: 0,
            shape: TargetShape::NearestAnchor { anchors },
        })
    }

    pub fn with_support(support: SupportSet, r: F, c0: F) -> Result<Self> {
        check_smoothness(r, c0)?;
        Ok(Self {
            d: support.coarse().dim(),
            r,
            c0,
            seed: 0,
            shape: TargetShape::SupportDistance { support },
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> F {
        self.r
    }

    pub fn c0(&self) -> F {
        self.c0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn shape(&self) -> &TargetShape<F> {
        &self.shape
    }

    pub fn support(&self) -> Option<&SupportSet> {
        match &self.shape {
            TargetShape::SupportDistance { support } => Some(support),
            _ => None,
        }
    }

    /// A priori bound `c0 (√d)^r` on `‖f‖_∞` (0 for the zero target).
    pub fn sup_bound(&self) -> F {
        match self.shape {
            TargetShape::Zero => F::zero(),
            _ => self.c0 * F::of_usize(self.d).sqrt().powf(self.r),
        }
    }

    pub fn eval(&self, x: &[F]) -> F {
        match &self.shape {
            TargetShape::Zero => F::zero(),
            TargetShape::NearestAnchor { anchors } => {
                let dist = anchors
                    .iter()
                    .map(|a| euclid(x, a))
                    .fold(F::infinity(), F::min);
                self.c0 * dist.powf(self.r)
            }
            TargetShape::SupportDistance { support } => {
                let dist = complement_distance(support, x);
                if dist == F::zero() {
                    F::zero()
                } else {
                    self.c0 * dist.powf(self.r)
                }
            }
        }
    }

    pub fn spec(&self) -> TargetSpec {
        let (kind, big_n, s) = match &self.shape {
            TargetShape::Zero => (TargetKind::Zero, None, None),
            TargetShape::NearestAnchor { .. } => (TargetKind::Lipschitz, None, None),
            TargetShape::SupportDistance { support } => {
                (TargetKind::Sparse, Some(support.coarse().n()), Some(support.len()))
            }
        };
        TargetSpec {
            kind,
            seed: self.seed,
            big_n,
            s,
            r: self.r.to_f64_lossy(),
            c0: self.c0.to_f64_lossy(),
            d: self.d,
        }
    }
}

/// Distance from `x` to `R^d \ S`.
///
/// The complement is the outside of the unit cube together with every
/// non-support coarse cell, so the distance is the minimum of the
/// distances to the cube faces and to each non-support box.
fn complement_distance<F: Scalar>(support: &SupportSet, x: &[F]) -> F {
    if !support.contains(x) {
        return F::zero();
    }
    let mut best = x
        .iter()
        .map(|&v| v.min(F::one() - v))
        .fold(F::infinity(), F::min);
    let coarse: &CubicPartition = support.coarse();
    for k in coarse.indices() {
        if support.indices().contains(&k) {
            continue;
        }
        let (lo, hi) = coarse.bounds::<F>(&k);
        best = best.min(box_distance(x, &lo, &hi));
    }
    best.max(F::zero())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Zero,
    Lipschitz,
    Sparse,
}

/// Serializable recipe `{kind, seed, N, s, r, c0, d}` for a target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub kind: TargetKind,
    pub seed: u64,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub big_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    pub r: f64,
    pub c0: f64,
    pub d: usize,
}

impl TargetSpec {
    pub fn build<F: Scalar>(&self) -> Result<SparseTarget<F>> {
        match self.kind {
            TargetKind::Zero => Ok(SparseTarget::zero(self.d)),
            TargetKind::Lipschitz => make_lipschitz_target(self.seed, F::of(self.r), F::of(self.c0), self.d),
            TargetKind::Sparse => {
                let (Some(big_n), Some(s)) = (self.big_n, self.s) else {
                    return invalid("sparse target spec needs N and s");
                };
                make_sparse_target(self.seed, big_n, s, F::of(self.r), F::of(self.c0), self.d)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LipschitzReport<F> {
    pub max_ratio: F,
    pub pass: bool,
}

/// Samples pairs and checks `|f(x) - f(x')| <= c0 ‖x - x'‖^r`.
///
/// Half the pairs are independent uniform points, half are local
/// perturbations of scale up to `0.05`, which probe the small-distance
/// regime where Hölder ratios peak.
pub fn verify_lipschitz<F: Scalar>(
    f: impl Fn(&[F]) -> F,
    d: usize,
    r: F,
    c0: F,
    pairs: usize,
    seed: u64,
) -> LipschitzReport<F> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio = F::zero();
    for i in 0..pairs.max(1) {
        let x: Vec<F> = (0..d).map(|_| F::of(rng.gen::<f64>())).collect();
        let y: Vec<F> = if i % 2 == 0 {
            (0..d).map(|_| F::of(rng.gen::<f64>())).collect()
        } else {
            x.iter()
                .map(|&v| (v + F::of(rng.gen_range(-0.05..0.05))).max(F::zero()).min(F::one()))
                .collect()
        };
        let dist = euclid(&x, &y);
        if dist == F::zero() {
            continue;
        }
        let ratio = (f(&x) - f(&y)).abs() / dist.powf(r);
        if ratio > max_ratio {
            max_ratio = ratio;
        }
    }
    LipschitzReport {
        max_ratio,
        pass: max_ratio <= c0 * F::of(1.0 + 1e-9),
    }
}
