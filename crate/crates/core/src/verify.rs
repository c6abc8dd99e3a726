//! Dense-grid checks of the localization and sparse-approximation bounds.
//!
//! Sup norms are estimated on the closed grid `{i/(g-1)}^d`. Cell
//! membership is always closed, so grid points on shared faces count as
//! inside every cell they touch.

use rayon::prelude::*;
use serde::Serialize;

use crate::activation::{threshold_for, SigmoidSpec};
use crate::error::{invalid, Result};
use crate::netcore::{LocalizerNet, SparseApproximant};
use crate::partition::{CubicPartition, MultiIndex};
use crate::scalar::Scalar;
use crate::targets::SparseTarget;

/// Default grid density per axis.
pub const DEFAULT_GRID: usize = 41;

/// The closed grid with `pts` points per axis, last axis fastest.
pub fn unit_grid<F: Scalar>(d: usize, pts: usize) -> Vec<Vec<F>> {
    let total = pts.pow(d as u32);
    let denom = F::of_usize(pts.saturating_sub(1).max(1));
    (0..total)
        .map(|mut lin| {
            let mut x = vec![F::zero(); d];
            for slot in x.iter_mut().rev() {
                *slot = F::of_usize(lin % pts) / denom;
                lin /= pts;
            }
            x
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridReport<F> {
    pub grid_points_per_axis: usize,
    /// max of `1 - N*` over grid points in the closed cell
    pub max_inside_deficit: F,
    /// max of `N*` over grid points outside the closed cell
    pub max_outside_value: F,
    pub bound_eps: F,
    pub gain: F,
    pub inside_points: usize,
    pub outside_points: usize,
    pub pass: bool,
}

/// Checks both localization claims with `K = threshold_for(σ, ε)`.
pub fn check_localization<F: Scalar>(
    p: &CubicPartition,
    j: &MultiIndex,
    eps: F,
    sigma: SigmoidSpec,
    grid_pts: usize,
) -> Result<GridReport<F>> {
    let gain = threshold_for(sigma, eps)?;
    check_localization_with_gain(p, j, eps, gain, sigma, grid_pts)
}

/// Same as [`check_localization`] with an explicit gate gain.
pub fn check_localization_with_gain<F: Scalar>(
    p: &CubicPartition,
    j: &MultiIndex,
    eps: F,
    gain: F,
    sigma: SigmoidSpec,
    grid_pts: usize,
) -> Result<GridReport<F>> {
    if grid_pts < 3 {
        return invalid(format!("grid needs at least 3 points per axis, got {grid_pts}"));
    }
    let net = LocalizerNet::new(*p, j.clone(), gain, sigma)?;
    let grid = unit_grid::<F>(p.dim(), grid_pts);
    let fold = grid
        .par_iter()
        .map(|x| {
            let v = net.eval_unchecked(x);
            if p.cell_contains(j, x) {
                (F::one() - v, F::neg_infinity(), 1usize, 0usize)
            } else {
                (F::neg_infinity(), v, 0, 1)
            }
        })
        .reduce(
            || (F::neg_infinity(), F::neg_infinity(), 0, 0),
            |a, b| (a.0.max(b.0), a.1.max(b.1), a.2 + b.2, a.3 + b.3),
        );
    let (deficit, outside, n_in, n_out) = fold;
    let max_inside_deficit = if n_in > 0 { deficit } else { F::zero() };
    let max_outside_value = if n_out > 0 { outside } else { F::zero() };
    Ok(GridReport {
        grid_points_per_axis: grid_pts,
        max_inside_deficit,
        max_outside_value,
        bound_eps: eps,
        gain,
        inside_points: n_in,
        outside_points: n_out,
        pass: max_inside_deficit <= eps && (n_out == 0 || max_outside_value < eps),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparseBoundReport<F> {
    pub grid_points_per_axis: usize,
    pub eps: F,
    /// grid estimate of `‖f‖_∞` (max over grid points and anchors)
    pub f_sup: F,
    /// max `|f - net|` over the grid
    pub sup_error: F,
    /// max `|f - net|` over grid points lying in exactly one closed fine cell
    pub sup_error_single_cell: F,
    /// number of grid points on a face shared by two or more fine cells
    pub shared_face_points: usize,
    /// `2^{r/2} c0 n^{-r} + ‖f‖_∞ n^d ε`
    pub bound1: F,
    /// max `|net|` over grid points outside every fine cell touching `S`
    pub sup_off_support: Option<F>,
    /// `‖f‖_∞ n^d ε`
    pub bound2: Option<F>,
    pub off_support_points: usize,
    pub pass_approximation: bool,
    pub pass_off_support: Option<bool>,
    pub pass: bool,
}

/// Checks the uniform approximation bound and, when requested, the
/// off-support bound for an approximant built from `f`.
///
/// The off-support region is the set of grid points outside every fine
/// cell that meets a support cell; it needs `n >= 4N`.
pub fn check_sparse_bound<F: Scalar>(
    f: &SparseTarget<F>,
    net: &SparseApproximant<F>,
    eps: F,
    grid_pts: usize,
    off_support: bool,
) -> Result<SparseBoundReport<F>> {
    if grid_pts < 2 {
        return invalid(format!("grid needs at least 2 points per axis, got {grid_pts}"));
    }
    let fine = *net.partition();
    if fine.dim() != f.dim() {
        return invalid(format!(
            "target has d = {}, approximant has d = {}",
            f.dim(),
            fine.dim()
        ));
    }
    let n = fine.n();
    let touched = match (off_support, f.support()) {
        (false, _) => None,
        (true, Some(support)) => {
            let big_n = support.coarse().n();
            if n < 4 * big_n {
                return invalid(format!("off-support bound needs n >= 4N, got n = {n}, N = {big_n}"));
            }
            Some(support.fine_cover(&fine)?)
        }
        (true, None) => return invalid("off-support bound needs a sparse target"),
    };

    let grid = unit_grid::<F>(fine.dim(), grid_pts);
    struct Acc<F> {
        f_sup: F,
        err: F,
        err_single: F,
        shared: usize,
        off: F,
        off_pts: usize,
    }
    let acc = grid
        .par_iter()
        .map(|x| {
            let fx = f.eval(x);
            let nx = net.eval_unchecked(x);
            let err = (fx - nx).abs();
            let cells = fine.containing_cells(x).expect("grid point lies in the cube");
            let single = cells.len() == 1;
            let outside = touched
                .as_ref()
                .map(|t| cells.iter().all(|j| !t.contains(j)))
                .unwrap_or(false);
            Acc {
                f_sup: fx.abs(),
                err,
                err_single: if single { err } else { F::zero() },
                shared: usize::from(!single),
                off: if outside { nx.abs() } else { F::zero() },
                off_pts: usize::from(outside),
            }
        })
        .reduce(
            || Acc {
                f_sup: F::zero(),
                err: F::zero(),
                err_single: F::zero(),
                shared: 0,
                off: F::zero(),
                off_pts: 0,
            },
            |a, b| Acc {
                f_sup: a.f_sup.max(b.f_sup),
                err: a.err.max(b.err),
                err_single: a.err_single.max(b.err_single),
                shared: a.shared + b.shared,
                off: a.off.max(b.off),
                off_pts: a.off_pts + b.off_pts,
            },
        );
    let f_sup = net
        .anchors()
        .iter()
        .map(|a| f.eval(a).abs())
        .fold(acc.f_sup, F::max);

    let r = f.r();
    let nf = F::of_usize(n);
    let cells = F::of_usize(fine.cell_count());
    let leak = f_sup * cells * eps;
    let bound1 = F::two().powf(r / F::two()) * f.c0() * nf.powf(-r) + leak;
    let pass_approximation = acc.err <= bound1;
    let (sup_off_support, bound2, pass_off_support) = if touched.is_some() {
        (Some(acc.off), Some(leak), Some(acc.off <= leak))
    } else {
        (None, None, None)
    };
    Ok(SparseBoundReport {
        grid_points_per_axis: grid_pts,
        eps,
        f_sup,
        sup_error: acc.err,
        sup_error_single_cell: acc.err_single,
        shared_face_points: acc.shared,
        bound1,
        sup_off_support,
        bound2,
        off_support_points: acc.off_pts,
        pass_approximation,
        pass_off_support,
        pass: pass_approximation && pass_off_support.unwrap_or(true),
    })
}
