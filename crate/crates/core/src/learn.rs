//! Synthetic regression data, the least-squares fit over the localizer
//! dictionary, Monte Carlo generalization error, and the three-term error
//! decomposition diagnostic.
//!
//! The fit fixes the first two layers to the localizers of the `n`-per-axis
//! partition (gain `K = Ξ_n/2`) and minimizes the empirical squared loss
//! over outer weights with `|c_j| <= C_n`. Every candidate is a member of
//! the bounded two-hidden-layer class, and the family contains the
//! constructive comparator `Σ_j f(ξ_j) N*_{n,j,L}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::activation::{level_for_learning, SigmoidSpec};
use crate::error::{invalid, Result};
use crate::netcore::{build_approximant, localizer_features, project_clip, AnchorRule, PhiBounds, SparseApproximant};
use crate::partition::make_partition;
use crate::scalar::{CompensatedSum, Scalar};
use crate::targets::SparseTarget;

/// Samples `(x_i, y_i)` with `|y_i| <= M`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dataset<F> {
    pub d: usize,
    pub x: Vec<Vec<F>>,
    pub y: Vec<F>,
    /// bound `M` on `|y|`
    pub m_bound: F,
    /// noise half-width `τ`
    pub tau: F,
    pub seed: u64,
}

impl<F: Scalar> Dataset<F> {
    pub fn new(d: usize, x: Vec<Vec<F>>, y: Vec<F>, m_bound: F, tau: F, seed: u64) -> Result<Self> {
        if x.len() != y.len() {
            return invalid(format!("{} inputs but {} responses", x.len(), y.len()));
        }
        for xi in &x {
            crate::partition::check_unit_point(xi, d)?;
        }
        if let Some(bad) = y.iter().find(|v| !(v.abs() <= m_bound)) {
            return invalid(format!("response {bad} exceeds M = {m_bound}"));
        }
        Ok(Self { d, x, y, m_bound, tau, seed })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// CSV with columns `x1..xd,y`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.d).map(|l| format!("x{l}")).chain(["y".to_string()]).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for (xi, yi) in self.x.iter().zip(&self.y) {
            for v in xi {
                out.push_str(&format!("{v},"));
            }
            out.push_str(&format!("{yi}\n"));
        }
        out
    }
}

/// Uniform inputs on `[0,1]^d`, `y = f(x) + U[-τ, τ]`, `M = sup_bound(f) + τ`.
pub fn sample_dataset<F: Scalar>(seed: u64, m: usize, target: &SparseTarget<F>, tau: F) -> Result<Dataset<F>> {
    if m == 0 {
        return invalid("sample size must be positive");
    }
    if !(tau >= F::zero()) {
        return invalid(format!("noise half-width must be nonnegative, got {tau}"));
    }
    let d = target.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(m);
    let mut y = Vec::with_capacity(m);
    for _ in 0..m {
        let xi: Vec<F> = (0..d).map(|_| F::of(rng.gen::<f64>())).collect();
        let noise = if tau > F::zero() {
            tau * F::of(rng.gen::<f64>() * 2.0 - 1.0)
        } else {
            F::zero()
        };
        y.push(target.eval(&xi) + noise);
        x.push(xi);
    }
    let m_bound = target.sup_bound() + tau;
    Ok(Dataset {
        d,
        x,
        y,
        m_bound,
        tau,
        seed,
    })
}

/// Cells per axis `⌊m^{1/(2r+d)}⌋`, at least 1.
pub fn cells_per_axis<F: Scalar>(m: usize, r: F, d: usize) -> usize {
    let p = F::two() * r + F::of_usize(d);
    let mf = F::of_usize(m);
    let mut n = mf.powf(p.recip()).floor().to_usize().unwrap_or(1).max(1);
    let slack = F::one() + F::of(1e-12);
    while F::of_usize(n + 1).powf(p) <= mf * slack {
        n += 1;
    }
    while n > 1 && F::of_usize(n).powf(p) > mf * slack {
        n -= 1;
    }
    n
}

/// Settings of the least-squares fit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErmConfig<F> {
    /// cells per axis
    pub n: usize,
    pub sigma: SigmoidSpec,
    /// coarse partition size `N` and sparsity `s` entering the level `L`
    pub coarse_n: usize,
    pub sparsity: usize,
    pub r: F,
    /// `(B_n, C_n, Ξ_n)`; defaults derived from `L` and `M` when absent
    pub bounds: Option<PhiBounds<F>>,
    pub max_sweeps: usize,
    pub tol: F,
}

impl<F: Scalar> ErmConfig<F> {
    pub fn new(n: usize, sigma: SigmoidSpec, r: F) -> Self {
        Self {
            n,
            sigma,
            coarse_n: 1,
            sparsity: 1,
            r,
            bounds: None,
            max_sweeps: 1000,
            tol: F::of(1e-10),
        }
    }

    pub fn with_sparsity(mut self, coarse_n: usize, sparsity: usize) -> Self {
        self.coarse_n = coarse_n;
        self.sparsity = sparsity;
        self
    }

    pub fn with_bounds(mut self, bounds: PhiBounds<F>) -> Self {
        self.bounds = Some(bounds);
        self
    }
}

/// Default bounds for gain `K`: `Ξ_n = 2K`, `C_n = M`, and
/// `B_n = max(2d, 2K(2d - 1/2))` so the localizer bias fits.
pub fn default_bounds<F: Scalar>(gain: F, m_bound: F, d: usize) -> PhiBounds<F> {
    let two_k = F::two() * gain;
    let bias = two_k * (F::of_usize(2 * d) - F::half());
    PhiBounds::new(F::of_usize(2 * d).max(bias), m_bound, two_k)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult<F> {
    #[serde(skip)]
    pub estimator: SparseApproximant<F>,
    pub coefficients: Vec<F>,
    /// empirical risk of the (unclipped) fitted net
    pub empirical_risk: F,
    /// empirical risk after each sweep, starting with the all-zero net
    pub objective_trace: Vec<F>,
    pub sweeps: usize,
    pub converged: bool,
    pub n: usize,
    pub m: usize,
    /// level `L` from the learning threshold
    pub level: F,
    /// gain `K = Ξ_n / 2` of the dictionary
    pub gain: F,
    pub bounds: PhiBounds<F>,
    pub m_bound: F,
    /// cells with no sample in their closed cube; their weight stays 0
    pub empty_cells: usize,
    pub method: &'static str,
}

impl<F: Scalar> FitResult<F> {
    /// `π_M f_{D,n}(x)`.
    pub fn predict_clipped(&self, x: &[F]) -> F {
        let v = self.estimator.eval_unchecked(x);
        project_clip(v, self.m_bound).unwrap_or(v)
    }
}

/// Least squares over the localizer dictionary with box-constrained
/// outer weights, by cyclic projected coordinate descent.
///
/// Each coordinate step is an exact minimization of the convex quadratic
/// along that coordinate followed by clipping to `[-C_n, C_n]`, so the
/// objective never increases. Stops when the largest change in a sweep is
/// at most `tol` or after `max_sweeps` sweeps.
pub fn erm_fit<F: Scalar>(data: &Dataset<F>, cfg: &ErmConfig<F>) -> Result<FitResult<F>> {
    let m = data.len();
    if m == 0 {
        return invalid("cannot fit an empty dataset");
    }
    let d = data.d;
    let p = make_partition(cfg.n, d)?;
    // with n = 1 the learning ε is 1 and has no threshold; explicit bounds
    // then supply the level as well
    let (level, bounds) = match (level_for_learning(cfg.sigma, cfg.n, cfg.coarse_n, cfg.sparsity, cfg.r, d), cfg.bounds) {
        (Ok(level), Some(b)) => (level, b),
        (Ok(level), None) => (level, default_bounds(level, data.m_bound, d)),
        (Err(_), Some(b)) => (b.xi / F::two(), b),
        (Err(e), None) => return Err(e),
    };
    if !(bounds.xi > F::zero() && bounds.c >= F::zero()) {
        return invalid("fit bounds need Ξ_n > 0 and C_n >= 0");
    }
    let gain = bounds.xi / F::two();
    let cells = p.cell_count();

    // column-major design matrix
    let mut design = vec![F::zero(); m * cells];
    let mut occupied = vec![false; cells];
    for (i, xi) in data.x.iter().enumerate() {
        let row = localizer_features(&p, gain, cfg.sigma, xi);
        for (j, v) in row.into_iter().enumerate() {
            design[j * m + i] = v;
        }
        for j in p.containing_cells(xi)? {
            occupied[p.linear_index(&j)] = true;
        }
    }
    let col = |j: usize| &design[j * m..(j + 1) * m];
    let norms: Vec<F> = (0..cells).map(|j| col(j).iter().map(|&v| v * v).sum()).collect();

    let mf = F::of_usize(m);
    let objective = |res: &[F]| {
        let mut s = CompensatedSum::new();
        for &v in res {
            s.add(v * v);
        }
        s.value() / mf
    };

    let mut coef = vec![F::zero(); cells];
    let mut residual = data.y.clone();
    let mut trace = vec![objective(&residual)];
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        let mut max_change = F::zero();
        for j in 0..cells {
            if !occupied[j] || norms[j] == F::zero() {
                continue;
            }
            let xj = col(j);
            let grad = xj.iter().zip(&residual).map(|(&a, &b)| a * b).sum::<F>();
            let target = coef[j] + grad / norms[j];
            let next = target.max(-bounds.c).min(bounds.c);
            let change = next - coef[j];
            if change != F::zero() {
                for (r, &a) in residual.iter_mut().zip(xj) {
                    *r = *r - change * a;
                }
                coef[j] = next;
            }
            max_change = max_change.max(change.abs());
        }
        trace.push(objective(&residual));
        if max_change <= cfg.tol {
            converged = true;
            break;
        }
    }

    let anchors = p.indices().map(|j| p.center(&j)).collect();
    let estimator = SparseApproximant::from_parts(p, coef.clone(), anchors, gain, cfg.sigma)?;
    let empirical_risk = empirical_risk(|x| estimator.eval_unchecked(x), data)?;
    Ok(FitResult {
        estimator,
        coefficients: coef,
        empirical_risk,
        objective_trace: trace,
        sweeps,
        converged,
        n: cfg.n,
        m,
        level,
        gain,
        bounds,
        m_bound: data.m_bound,
        empty_cells: occupied.iter().filter(|&&o| !o).count(),
        method: "ERM-over-dictionary",
    })
}

/// `(1/m) Σ (f(x_i) - y_i)^2`.
pub fn empirical_risk<F: Scalar>(f: impl Fn(&[F]) -> F, data: &Dataset<F>) -> Result<F> {
    if data.is_empty() {
        return invalid("empirical risk of an empty dataset");
    }
    let mut s = CompensatedSum::new();
    for (xi, &yi) in data.x.iter().zip(&data.y) {
        let e = f(xi) - yi;
        s.add(e * e);
    }
    Ok(s.value() / F::of_usize(data.len()))
}

/// A Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate<F> {
    pub mean: F,
    pub std_error: F,
    pub points: usize,
}

fn mc_points<F: Scalar>(d: usize, count: usize, seed: u64) -> Vec<Vec<F>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..d).map(|_| F::of(rng.gen::<f64>())).collect())
        .collect()
}

fn mean_and_se<F: Scalar>(values: &[F]) -> McEstimate<F> {
    let k = values.len();
    let kf = F::of_usize(k);
    let mut s = CompensatedSum::new();
    for &v in values {
        s.add(v);
    }
    let mean = s.value() / kf;
    let std_error = if k > 1 {
        let mut q = CompensatedSum::new();
        for &v in values {
            q.add((v - mean) * (v - mean));
        }
        (q.value() / F::of_usize(k - 1) / kf).sqrt()
    } else {
        F::zero()
    };
    McEstimate { mean, std_error, points: k }
}

/// Monte Carlo estimate of `∫ (f - f_ρ)^2` under the uniform marginal,
/// i.e. the excess risk `E(f) - E(f_ρ)`.
pub fn generalization_error<F: Scalar>(
    f: impl Fn(&[F]) -> F,
    f_rho: impl Fn(&[F]) -> F,
    d: usize,
    mc: usize,
    seed: u64,
) -> McEstimate<F> {
    let pts = mc_points::<F>(d, mc.max(1), seed);
    let sq: Vec<F> = pts
        .iter()
        .map(|x| {
            let e = f(x) - f_rho(x);
            e * e
        })
        .collect();
    mean_and_se(&sq)
}

/// The three terms bounding the excess risk of the clipped estimator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorDecomposition<F> {
    /// `E(π_M f_{D,n}) - E(f_ρ)`
    pub excess: F,
    pub excess_std_error: F,
    /// `E(N_{n,2d,L}) - E(f_ρ)`
    pub approx: F,
    /// `E_D(N) - E(N)`
    pub s1: F,
    /// `E(π_M f_{D,n}) - E_D(π_M f_{D,n})`
    pub s2: F,
    pub rhs: F,
    pub empirical_risk_clipped: F,
    pub empirical_risk_comparator: F,
    /// `excess <= approx + s1 + s2 + 2 · std_error`
    pub holds: bool,
}

/// Evaluates the error decomposition for a fit.
///
/// Expected risks use `E(g) = ‖g - f_ρ‖² + τ²/3` (uniform noise on
/// `[-τ, τ]` has variance `τ²/3`), with the squared norm estimated on one
/// shared set of Monte Carlo points.
pub fn error_decomposition<F: Scalar>(
    fit: &FitResult<F>,
    f_rho: &SparseTarget<F>,
    data: &Dataset<F>,
    mc: usize,
    seed: u64,
) -> Result<ErrorDecomposition<F>> {
    let p = *fit.estimator.partition();
    let comparator = build_approximant(|x| f_rho.eval(x), p, AnchorRule::Center, fit.level, fit.estimator.sigma())?;
    let noise_var = data.tau * data.tau / F::of(3.0);

    let pts = mc_points::<F>(data.d, mc.max(1), seed);
    let sq = |g: &dyn Fn(&[F]) -> F| -> Vec<F> {
        pts.iter()
            .map(|x| {
                let e = g(x) - f_rho.eval(x);
                e * e
            })
            .collect()
    };
    let clipped = |x: &[F]| fit.predict_clipped(x);
    let excess = mean_and_se(&sq(&clipped));
    let approx = mean_and_se(&sq(&|x: &[F]| comparator.eval_unchecked(x)));

    let emp_clipped = empirical_risk(clipped, data)?;
    let emp_comp = empirical_risk(|x| comparator.eval_unchecked(x), data)?;
    let s1 = emp_comp - (approx.mean + noise_var);
    let s2 = (excess.mean + noise_var) - emp_clipped;
    let rhs = approx.mean + s1 + s2;
    Ok(ErrorDecomposition {
        excess: excess.mean,
        excess_std_error: excess.std_error,
        approx: approx.mean,
        s1,
        s2,
        rhs,
        empirical_risk_clipped: emp_clipped,
        empirical_risk_comparator: emp_comp,
        holds: excess.mean <= rhs + F::two() * excess.std_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::validate_params;
    use crate::targets::{make_lipschitz_target, make_sparse_target};
    use approx::assert_relative_eq;

    const LOG: SigmoidSpec = SigmoidSpec::logistic();

    #[test]
    fn dataset_examples() {
        let t = make_lipschitz_target(3, 1.0f64, 1.0, 2).unwrap();
        let clean = sample_dataset(5, 200, &t, 0.0).unwrap();
        for (x, y) in clean.x.iter().zip(&clean.y) {
            assert_eq!(*y, t.eval(x));
        }
        let zero = SparseTarget::<f64>::zero(1);
        let noisy = sample_dataset(5, 500, &zero, 0.1).unwrap();
        assert_eq!(noisy.m_bound, 0.1);
        assert!(noisy.y.iter().all(|y| y.abs() <= 0.1));
        assert_eq!(sample_dataset(5, 500, &zero, 0.1).unwrap(), noisy);
        assert!(sample_dataset(5, 0, &zero, 0.1).is_err());
        assert!(noisy.to_csv().starts_with("x1,y\n"));
    }

    #[test]
    fn schedule() {
        assert_eq!(cells_per_axis(512, 1.0f64, 1), 8);
        assert_eq!(cells_per_axis(8192, 1.0f64, 1), 20);
        assert_eq!(cells_per_axis(256, 1.0f64, 1), 6);
        assert_eq!(cells_per_axis(4096, 1.0f64, 1), 16);
        assert_eq!(cells_per_axis(81, 1.0f64, 2), 3);
        assert_eq!(cells_per_axis(1, 1.0f64, 1), 1);
    }

    fn constant_data(c: f64, m: usize, d: usize) -> Dataset<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<Vec<f64>> = (0..m).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect();
        Dataset::new(d, x, vec![c; m], c.abs(), 0.0, 1).unwrap()
    }

    #[test]
    fn constant_responses_are_reproduced() {
        let data = constant_data(0.7, 400, 2);
        let cfg = ErmConfig::new(3, LOG, 1.0).with_bounds(PhiBounds::new(100.0, 1.0, 60.0));
        let fit = erm_fit(&data, &cfg).unwrap();
        assert!(fit.empirical_risk < 1e-8, "{}", fit.empirical_risk);
        assert_eq!(fit.empty_cells, 0);
        for &c in &fit.coefficients {
            assert!((c - 0.7).abs() < 1e-6, "{c}");
        }
        // default bounds with the learning level still fit exactly
        let fit = erm_fit(&data, &ErmConfig::new(3, LOG, 1.0)).unwrap();
        assert!(fit.empirical_risk < 1e-8);
    }

    #[test]
    fn single_sample_fit() {
        let data = Dataset::new(1, vec![vec![0.3f64]], vec![0.8], 1.0, 0.0, 0).unwrap();
        let cfg = ErmConfig::new(1, LOG, 1.0).with_bounds(PhiBounds::new(100.0, 1.0, 40.0));
        let fit = erm_fit(&data, &cfg).unwrap();
        let feature = LOG.apply(20.0 * 2.0 * 0.5);
        assert_relative_eq!(fit.coefficients[0], 0.8 / feature, max_relative = 1e-12);
        assert!((fit.coefficients[0] - 0.8).abs() < 1e-8);
    }

    #[test]
    fn clipping_is_active_for_large_responses() {
        let mut data = constant_data(5.0, 300, 1);
        data.m_bound = 5.0;
        let cfg = ErmConfig::new(4, LOG, 1.0).with_bounds(PhiBounds::new(100.0, 1.0, 20.0));
        let fit = erm_fit(&data, &cfg).unwrap();
        assert!(fit.coefficients.iter().all(|&c| c == 1.0));
        let neg = Dataset { y: vec![-5.0; 300], ..data };
        let fit = erm_fit(&neg, &cfg).unwrap();
        assert!(fit.coefficients.iter().all(|&c| c == -1.0));
    }

    #[test]
    fn empty_cells_stay_zero_and_objective_decreases() {
        // all samples in the left half
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.gen::<f64>() * 0.45]).collect();
        let y: Vec<f64> = x.iter().map(|v| (v[0] * 9.0).sin() * 0.5 + rng.gen_range(-0.1..0.1)).collect();
        let data = Dataset::new(1, x, y, 0.6, 0.1, 2).unwrap();
        let fit = erm_fit(&data, &ErmConfig::new(8, LOG, 1.0)).unwrap();
        assert_eq!(fit.empty_cells, 4);
        assert!(fit.coefficients[4..].iter().all(|&c| c == 0.0));
        for w in fit.objective_trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-14) + 1e-300, "{w:?}");
        }
        assert!(fit.converged);
    }

    #[test]
    fn fitted_net_is_a_class_member() {
        let t = make_sparse_target(4, 2, 1, 1.0f64, 1.0, 2).unwrap();
        let data = sample_dataset(8, 600, &t, 0.1).unwrap();
        let cfg = ErmConfig::new(4, LOG, 1.0).with_sparsity(2, 1);
        let fit = erm_fit(&data, &cfg).unwrap();
        let params = fit.estimator.to_phi_params(fit.bounds);
        assert!(validate_params(&params).is_ok());
        assert!(fit.bounds.b >= 4.0 && fit.bounds.c >= data.m_bound && fit.bounds.xi >= 2.0 * fit.level);
        // the clipped prediction never leaves [-M, M]
        for x in crate::verify::unit_grid::<f64>(2, 21) {
            assert!(fit.predict_clipped(&x).abs() <= data.m_bound);
        }
    }

    #[test]
    fn empirical_risk_examples() {
        let data = Dataset::new(1, vec![vec![0.2], vec![0.6]], vec![0.2, 0.6], 1.0, 0.0, 0).unwrap();
        assert_eq!(empirical_risk(|x: &[f64]| x[0], &data).unwrap(), 0.0);
        let one = Dataset::new(1, vec![vec![0.2]], vec![1.0], 1.0, 0.0, 0).unwrap();
        assert_eq!(empirical_risk(|_: &[f64]| 0.0, &one).unwrap(), 1.0);
        let two = Dataset::new(1, vec![vec![0.2], vec![0.7]], vec![1.0, -1.0], 1.0, 0.0, 0).unwrap();
        assert_eq!(empirical_risk(|_: &[f64]| 0.0, &two).unwrap(), 1.0);
        let empty = Dataset::<f64>::new(1, vec![], vec![], 1.0, 0.0, 0).unwrap();
        assert!(empirical_risk(|_: &[f64]| 0.0, &empty).is_err());
        assert!(erm_fit(&empty, &ErmConfig::new(2, LOG, 1.0)).is_err());
    }

    #[test]
    fn generalization_examples() {
        let f = |x: &[f64]| x[0];
        let same = generalization_error(f, f, 1, 1000, 3);
        assert_eq!(same.mean, 0.0);
        let third = generalization_error(|_: &[f64]| 0.0, f, 1, 200_000, 3);
        assert!((third.mean - 1.0 / 3.0).abs() < 3.0 * third.std_error + 1e-12);
        assert!(third.std_error < 2e-3);
        let off = generalization_error(|x: &[f64]| x[0] + 0.1, f, 1, 1000, 3);
        assert_relative_eq!(off.mean, 0.01, max_relative = 1e-9);
    }

    #[test]
    fn decomposition_zero_target() {
        let zero = SparseTarget::<f64>::zero(1);
        let data = sample_dataset(3, 300, &zero, 0.0).unwrap();
        // M = 0 makes clipping degenerate; use a tiny noise band instead
        let data = Dataset { m_bound: 1e-3, ..data };
        let fit = erm_fit(&data, &ErmConfig::new(6, LOG, 1.0)).unwrap();
        let dec = error_decomposition(&fit, &zero, &data, 2000, 9).unwrap();
        assert_eq!(dec.approx, 0.0);
        assert!(dec.holds);
    }

    #[test]
    fn decomposition_noiseless_is_small() {
        let t = make_lipschitz_target(6, 1.0f64, 1.0, 1).unwrap();
        let data = sample_dataset(6, 4000, &t, 0.0).unwrap();
        let n = cells_per_axis(4000, 1.0, 1);
        let fit = erm_fit(&data, &ErmConfig::new(n, LOG, 1.0)).unwrap();
        let dec = error_decomposition(&fit, &t, &data, 20_000, 1).unwrap();
        assert!(dec.holds, "{dec:?}");
        assert!(dec.excess < 5e-3 && dec.approx < 5e-3 && dec.s1.abs() < 5e-3 && dec.s2.abs() < 5e-3, "{dec:?}");
    }

    #[test]
    fn decomposition_holds_across_seeds() {
        for seed in 0..20u64 {
            let t = make_lipschitz_target(seed, 1.0f64, 1.0, 1).unwrap();
            let data = sample_dataset(seed + 100, 512, &t, 0.1).unwrap();
            let fit = erm_fit(&data, &ErmConfig::new(cells_per_axis(512, 1.0, 1), LOG, 1.0)).unwrap();
            let dec = error_decomposition(&fit, &t, &data, 5000, seed).unwrap();
            assert!(dec.holds, "seed {seed}: {dec:?}");
        }
    }
}
