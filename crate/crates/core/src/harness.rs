//! Experiment configuration, the learning-rate sweep, log-log slope
//! fitting, and CSV/JSON/SVG report emission.
//!
//! Everything here runs in `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::{threshold_for, SigmoidKind, SigmoidSpec};
use crate::capacity::{empirical_covering, evaluate_family, sample_phi_net, theoretical_bound, CapacityRow};
use crate::error::{invalid, Error, Result};
use crate::learn::{cells_per_axis, erm_fit, error_decomposition, generalization_error, sample_dataset, ErmConfig};
use crate::netcore::{build_approximant, AnchorRule, PhiBounds};
use crate::partition::make_partition;
use crate::targets::{make_lipschitz_target, make_sparse_target, SparseTarget};
use crate::verify::{check_localization_with_gain, check_sparse_bound, unit_grid, GridReport, SparseBoundReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Localize,
    Approx,
    Capacity,
    Learn,
    Sweep,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn default_tau() -> f64 {
    0.1
}
fn default_mc() -> usize {
    20_000
}
fn default_slope_tol() -> f64 {
    0.2
}
fn default_capacity_sample() -> usize {
    2000
}

/// Experiment settings, read from JSON with these exact key names.
///
/// `N` and `s` select sparse targets; without them targets are dense.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    #[serde(default = "one_usize")]
    pub d: usize,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default = "one")]
    pub c0: f64,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub big_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub m_grid: Vec<usize>,
    #[serde(default = "one_usize")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sigma")]
    pub sigma: SigmoidKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,

    /// cells per axis for `localize`, `approx` and `capacity`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// `ε` values: one for `localize`/`approx`, a list for `capacity`
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eps: Vec<f64>,
    /// explicit gate gain for `localize`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_pts: Option<usize>,
    #[serde(default = "default_mc")]
    pub mc_points: usize,
    /// one target per trial index, reused across the sample sizes
    #[serde(default)]
    pub shared_target: bool,
    #[serde(default = "default_slope_tol")]
    pub slope_tolerance: f64,
    #[serde(default = "default_capacity_sample")]
    pub sample_size: usize,
    /// class bounds for `capacity`; `(2d, 1, 10)` when absent
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<PhiBounds<f64>>,
}

fn default_sigma() -> SigmoidKind {
    SigmoidKind::Logistic
}

impl ExperimentConfig {
    pub fn new(task: Task) -> Self {
        serde_json::from_value(serde_json::json!({ "task": task })).expect("defaults deserialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn sigma_spec(&self) -> SigmoidSpec {
        SigmoidSpec::new(self.sigma)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return invalid("d must be positive");
        }
        if !(self.r > 0.0 && self.r <= 1.0) {
            return invalid(format!("r must lie in (0, 1], got {}", self.r));
        }
        if !(self.c0 >= 0.0 && self.c0.is_finite()) {
            return invalid(format!("c0 must be nonnegative, got {}", self.c0));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return invalid(format!("tau must be nonnegative, got {}", self.tau));
        }
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if self.mc_points == 0 {
            return invalid("mc_points must be at least 1");
        }
        if self.m_grid.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("m_grid must be strictly increasing");
        }
        if self.m_grid.first() == Some(&0) {
            return invalid("sample sizes must be positive");
        }
        match (self.big_n, self.s) {
            (None, None) => {}
            (Some(big_n), Some(s)) => {
                let cells = big_n.checked_pow(self.d as u32).unwrap_or(usize::MAX);
                if big_n == 0 || s == 0 || s > cells {
                    return invalid(format!("need 1 <= s <= N^d, got N = {big_n}, s = {s}"));
                }
            }
            _ => return invalid("N and s must be given together"),
        }
        match self.task {
            Task::Sweep | Task::Learn if self.m_grid.is_empty() => invalid("m_grid must not be empty"),
            _ => Ok(()),
        }
    }

    fn sparse(&self) -> Option<(usize, usize)> {
        self.big_n.zip(self.s)
    }

    /// Target for a given seed: sparse when `N`, `s` are set, dense otherwise.
    pub fn target(&self, seed: u64) -> Result<SparseTarget<f64>> {
        match self.sparse() {
            Some((big_n, s)) => make_sparse_target(seed, big_n, s, self.r, self.c0, self.d),
            None => make_lipschitz_target(seed, self.r, self.c0, self.d),
        }
    }
}

/// `-2r/(2r+d)`.
pub fn theoretical_rate(r: f64, d: usize) -> Result<f64> {
    if !(r > 0.0) || d == 0 {
        return invalid(format!("rate needs r > 0 and d >= 1, got r = {r}, d = {d}"));
    }
    Ok(-2.0 * r / (2.0 * r + d as f64))
}

/// `(s/N^d)^{d/(2r+d)}`.
pub fn sparse_rate_factor(s: usize, big_n: usize, d: usize, r: f64) -> Result<f64> {
    if !(r > 0.0) || d == 0 || big_n == 0 {
        return invalid("sparse factor needs r > 0, d >= 1 and N >= 1");
    }
    let cells = (big_n as f64).powi(d as i32);
    if s == 0 || s as f64 > cells {
        return invalid(format!("need 1 <= s <= N^d, got s = {s}, N^d = {cells}"));
    }
    let df = d as f64;
    Ok((s as f64 / cells).powf(df / (2.0 * r + df)))
}

/// Counter-based seed derivation: the master seed keys a ChaCha stream,
/// and `(purpose, a, b)` picks the stream, so a derived seed depends only
/// on its key and never on execution order.
pub fn derive_seed(master: u64, purpose: u8, a: usize, b: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    let stream = (u64::from(purpose) << 56) | ((a as u64 & 0xff_ffff) << 32) | (b as u64 & 0xffff_ffff);
    rng.set_stream(stream);
    rng.next_u64()
}

const PURPOSE_TARGET: u8 = 1;
const PURPOSE_DATA: u8 = 2;
const PURPOSE_MC: u8 = 3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub m: usize,
    pub trial: usize,
    pub n: usize,
    pub error: f64,
    pub std_error: f64,
    /// dataset seed
    pub seed: u64,
    pub target_seed: u64,
    pub mc_seed: u64,
}

/// One fit per `(m, trial)`, scored by Monte Carlo excess risk of the
/// clipped estimator. Rows come back sorted by `(m, trial)`.
pub fn run_rate_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    if cfg.m_grid.is_empty() {
        return invalid("m_grid must not be empty");
    }
    let (coarse_n, sparsity) = cfg.sparse().unwrap_or((1, 1));
    let cells: Vec<(usize, usize, usize)> = cfg
        .m_grid
        .iter()
        .enumerate()
        .flat_map(|(mi, &m)| (0..cfg.trials).map(move |t| (mi, m, t)))
        .collect();
    let mut rows = cells
        .par_iter()
        .map(|&(mi, m, trial)| {
            let target_key = if cfg.shared_target { usize::MAX >> 40 } else { mi };
            let target_seed = derive_seed(cfg.seed, PURPOSE_TARGET, target_key, trial);
            let seed = derive_seed(cfg.seed, PURPOSE_DATA, mi, trial);
            let mc_seed = derive_seed(cfg.seed, PURPOSE_MC, mi, trial);
            let target = cfg.target(target_seed)?;
            let data = sample_dataset(seed, m, &target, cfg.tau)?;
            let n = cells_per_axis(m, cfg.r, cfg.d);
            let ecfg = ErmConfig::new(n, cfg.sigma_spec(), cfg.r).with_sparsity(coarse_n, sparsity);
            let fit = erm_fit(&data, &ecfg)?;
            let est = generalization_error(|x| fit.predict_clipped(x), |x| target.eval(x), cfg.d, cfg.mc_points, mc_seed);
            Ok(SweepRow {
                m,
                trial,
                n,
                error: est.mean,
                std_error: est.std_error,
                seed,
                target_seed,
                mc_seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.m, r.trial));
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatePoint {
    pub m: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// Least-squares line through `(log m, log mean error)`.
///
/// With a nonpositive mean the fit is not attempted and `degenerate` is
/// set; slope and intercept are then absent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFitResult {
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub theory_exponent: f64,
    pub points: Vec<RatePoint>,
    pub degenerate: bool,
}

impl RateFitResult {
    pub fn within(&self, tol: f64) -> bool {
        self.slope.is_some_and(|s| (s - self.theory_exponent).abs() <= tol)
    }
}

/// Mean and standard error of the errors at each sample size.
pub fn per_m_means(rows: &[SweepRow]) -> Vec<RatePoint> {
    let mut ms: Vec<usize> = rows.iter().map(|r| r.m).collect();
    ms.sort_unstable();
    ms.dedup();
    ms.into_iter()
        .map(|m| {
            let errs: Vec<f64> = rows.iter().filter(|r| r.m == m).map(|r| r.error).collect();
            let k = errs.len() as f64;
            let mean = errs.iter().sum::<f64>() / k;
            let std_error = if errs.len() > 1 {
                (errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
            } else {
                0.0
            };
            RatePoint {
                m,
                mean_error: mean,
                std_error,
                trials: errs.len(),
            }
        })
        .collect()
}

pub fn fit_rate(rows: &[SweepRow], r: f64, d: usize) -> Result<RateFitResult> {
    let theory_exponent = theoretical_rate(r, d)?;
    let points = per_m_means(rows);
    if points.len() < 3 {
        return invalid(format!("rate fit needs at least 3 distinct m, got {}", points.len()));
    }
    if points.iter().any(|p| !(p.mean_error > 0.0)) {
        return Ok(RateFitResult {
            slope: None,
            intercept: None,
            r_squared: None,
            theory_exponent,
            points,
            degenerate: true,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.m as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_error.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(RateFitResult {
        slope: Some(slope),
        intercept: Some(intercept),
        r_squared: Some(r_squared),
        theory_exponent,
        points,
        degenerate: false,
    })
}

pub const SWEEP_CSV_HEADER: &str = "m,trial,error,seed";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{:e},{}", r.m, r.trial, r.error, r.seed);
    }
    out
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    config: &'a ExperimentConfig,
    method: &'static str,
    slope: Option<f64>,
    intercept: Option<f64>,
    r_squared: Option<f64>,
    theory_exponent: f64,
    slope_tolerance: f64,
    pass: bool,
    points: &'a [RatePoint],
    rows: &'a [SweepRow],
}

pub fn sweep_json(rows: &[SweepRow], fit: &RateFitResult, cfg: &ExperimentConfig) -> Result<String> {
    let summary = SweepSummary {
        config: cfg,
        method: "ERM-over-dictionary",
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        theory_exponent: fit.theory_exponent,
        slope_tolerance: cfg.slope_tolerance,
        pass: fit.within(cfg.slope_tolerance),
        points: &fit.points,
        rows,
    };
    Ok(serde_json::to_string_pretty(&summary)?)
}

/// Log-log scatter of per-trial errors with per-m means, the fitted line,
/// and a guide line of the theoretical slope through the data centroid.
pub fn sweep_svg(rows: &[SweepRow], fit: &RateFitResult) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const PAD: f64 = 60.0;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error > 0.0)
        .map(|r| ((r.m as f64).log10(), r.error.log10()))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (x0, x1) = if x1 > x0 { (x0 - 0.05 * (x1 - x0), x1 + 0.05 * (x1 - x0)) } else { (x0 - 0.5, x1 + 0.5) };
    let (y0, y1) = if y1 > y0 { (y0 - 0.1 * (y1 - y0), y1 + 0.1 * (y1 - y0)) } else { (y0 - 0.5, y1 + 0.5) };
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{b} H{r}" fill="none" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    for e in (x0.ceil() as i32)..=(x1.floor() as i32) {
        let x = sx(e as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{t}" stroke="black"/><text x="{x:.2}" y="{l}" text-anchor="middle">1e{e}</text>"#,
            b = H - PAD,
            t = H - PAD + 5.0,
            l = H - PAD + 20.0
        );
    }
    for e in (y0.ceil() as i32)..=(y1.floor() as i32) {
        let y = sy(e as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{PAD}" y1="{y:.2}" x2="{l}" y2="{y:.2}" stroke="black"/><text x="{t}" y="{y:.2}" text-anchor="end" dominant-baseline="middle">1e{e}</text>"#,
            l = PAD - 5.0,
            t = PAD - 8.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{cx}" y="{y}" text-anchor="middle">sample size m</text>"#,
        cx = W / 2.0,
        y = H - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{cy}" text-anchor="middle" transform="rotate(-90 15 {cy})">excess risk</text>"#,
        cy = H / 2.0
    );
    for &(x, y) in &pts {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="steelblue" fill-opacity="0.5"/>"#,
            sx(x),
            sy(y)
        );
    }
    for p in fit.points.iter().filter(|p| p.mean_error > 0.0) {
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="7" height="7" fill="black"/>"#,
            sx((p.m as f64).log10()) - 3.5,
            sy(p.mean_error.log10()) - 3.5
        );
    }
    let ln10 = std::f64::consts::LN_10;
    let line = |slope: f64, through: (f64, f64), color: &str, dash: &str, s: &mut String| {
        let ya = through.1 + slope * (x0 - through.0);
        let yb = through.1 + slope * (x1 - through.0);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            sx(x0),
            sy(ya),
            sx(x1),
            sy(yb)
        );
    };
    let means: Vec<(f64, f64)> = fit
        .points
        .iter()
        .filter(|p| p.mean_error > 0.0)
        .map(|p| ((p.m as f64).log10(), p.mean_error.log10()))
        .collect();
    let mut legend = Vec::new();
    if let (Some(slope), Some(intercept)) = (fit.slope, fit.intercept) {
        line(slope, (0.0, intercept / ln10), "firebrick", "", &mut s);
        legend.push(("firebrick", format!("fit, slope {slope:.3}")));
    }
    if !means.is_empty() {
        let c = means.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let k = means.len() as f64;
        line(fit.theory_exponent, (c.0 / k, c.1 / k), "gray", r#" stroke-dasharray="6 4""#, &mut s);
        legend.push(("gray", format!("theory, slope {:.3}", fit.theory_exponent)));
    }
    for (i, (color, label)) in legend.iter().enumerate() {
        let y = PAD + 15.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{a}" y1="{y}" x2="{b}" y2="{y}" stroke="{color}" stroke-width="1.5"/><text x="{t}" y="{y}" dominant-baseline="middle">{label}</text>"#,
            a = W - PAD - 150.0,
            b = W - PAD - 130.0,
            t = W - PAD - 125.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the sweep table (`csv`) or summary (`json`) to `out`, plus an SVG
/// next to it when `svg` is set. Returns the paths written.
pub fn emit_report(
    rows: &[SweepRow],
    fit: &RateFitResult,
    cfg: &ExperimentConfig,
    out: &Path,
    svg: bool,
) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return invalid("nothing to report");
    }
    let body = match cfg.format {
        Format::Csv => sweep_csv(rows),
        Format::Json => sweep_json(rows, fit, cfg)?,
    };
    write_file(out, &body)?;
    let mut written = vec![out.to_path_buf()];
    if svg {
        let p = out.with_extension("svg");
        write_file(&p, &sweep_svg(rows, fit))?;
        written.push(p);
    }
    Ok(written)
}

/// Localization reports for every cell of the `n`-per-axis partition.
pub fn run_localize(cfg: &ExperimentConfig) -> Result<Vec<GridReport<f64>>> {
    let n = cfg.n.unwrap_or(4);
    let p = make_partition(n, cfg.d)?;
    let eps = cfg.eps.first().copied().unwrap_or(1e-9);
    let gain = match cfg.gain {
        Some(k) => k,
        None => threshold_for(cfg.sigma_spec(), eps)?,
    };
    let grid = cfg.grid_pts.unwrap_or(crate::verify::DEFAULT_GRID);
    p.indices()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|j| check_localization_with_gain(&p, j, eps, gain, cfg.sigma_spec(), grid))
        .collect()
}

/// Sparse-approximation reports for `trials` seeded targets, with
/// `n = 4N` and `ε = n^{-d-r}` unless overridden.
pub fn run_approx(cfg: &ExperimentConfig) -> Result<Vec<SparseBoundReport<f64>>> {
    let Some((big_n, _)) = cfg.sparse() else {
        return invalid("approx needs N and s");
    };
    let n = cfg.n.unwrap_or(4 * big_n);
    let eps = match cfg.eps.first() {
        Some(&e) => e,
        None => (n as f64).powf(-(cfg.d as f64) - cfg.r),
    };
    let gain = threshold_for(cfg.sigma_spec(), eps)?;
    let p = make_partition(n, cfg.d)?;
    let grid = cfg.grid_pts.unwrap_or(crate::verify::DEFAULT_GRID);
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let target = cfg.target(derive_seed(cfg.seed, PURPOSE_TARGET, 0, t))?;
            let net = build_approximant(|x| target.eval(x), p, AnchorRule::Center, gain, cfg.sigma_spec())?;
            check_sparse_bound(&target, &net, eps, grid, true)
        })
        .collect()
}

/// Greedy cover and packing of `sample_size` sampled nets for each `ε`.
pub fn run_capacity(cfg: &ExperimentConfig) -> Result<Vec<CapacityRow>> {
    let n = cfg.n.unwrap_or(2);
    let d = cfg.d;
    let bounds = cfg.bounds.unwrap_or(PhiBounds::new(2.0 * d as f64, 1.0, 10.0));
    let eps = if cfg.eps.is_empty() { vec![0.05, 0.1, 0.2] } else { cfg.eps.clone() };
    let grid = unit_grid::<f64>(d, cfg.grid_pts.unwrap_or(if d == 1 { 41 } else { 21 }));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let nets = (0..cfg.sample_size)
        .map(|_| sample_phi_net(&mut rng, n, d, bounds, cfg.sigma_spec()))
        .collect::<Vec<_>>();
    let family = evaluate_family(&nets, &grid);
    let c_sigma = cfg.sigma_spec().lipschitz::<f64>();
    eps.iter()
        .map(|&e| {
            let est = empirical_covering(&family, e)?;
            let bound = theoretical_bound(e, n, d, bounds, c_sigma)?;
            Ok(CapacityRow {
                n,
                d,
                eps: e,
                sample_size: cfg.sample_size,
                cover_upper: est.net_size_upper,
                packing_lower: est.packing_lower,
                theory_log_bound: bound.value,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearnReport {
    pub m: usize,
    pub n: usize,
    pub fit: crate::learn::FitResult<f64>,
    pub excess_risk: f64,
    pub excess_std_error: f64,
    pub zero_predictor_risk: f64,
    pub decomposition: crate::learn::ErrorDecomposition<f64>,
}

/// One fit at the first sample size of `m_grid`, with diagnostics.
pub fn run_learn(cfg: &ExperimentConfig) -> Result<LearnReport> {
    cfg.validate()?;
    let Some(&m) = cfg.m_grid.first() else {
        return invalid("m_grid must not be empty");
    };
    let (coarse_n, sparsity) = cfg.sparse().unwrap_or((1, 1));
    let target = cfg.target(derive_seed(cfg.seed, PURPOSE_TARGET, 0, 0))?;
    let data = sample_dataset(derive_seed(cfg.seed, PURPOSE_DATA, 0, 0), m, &target, cfg.tau)?;
    let n = cfg.n.unwrap_or_else(|| cells_per_axis(m, cfg.r, cfg.d));
    let fit = erm_fit(&data, &ErmConfig::new(n, cfg.sigma_spec(), cfg.r).with_sparsity(coarse_n, sparsity))?;
    let mc_seed = derive_seed(cfg.seed, PURPOSE_MC, 0, 0);
    let est = generalization_error(|x| fit.predict_clipped(x), |x| target.eval(x), cfg.d, cfg.mc_points, mc_seed);
    let zero = generalization_error(|_| 0.0, |x| target.eval(x), cfg.d, cfg.mc_points, mc_seed);
    let decomposition = error_decomposition(&fit, &target, &data, cfg.mc_points, mc_seed)?;
    Ok(LearnReport {
        m,
        n,
        fit,
        excess_risk: est.mean,
        excess_std_error: est.std_error,
        zero_predictor_risk: zero.mean,
        decomposition,
    })
}
