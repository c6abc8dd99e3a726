//! Two-hidden-layer networks: the cell localizer, sparse approximants built
//! from localizers, general members of the bounded hypothesis class, shallow
//! comparison nets, and the output projection.
//!
//! The localizer for cell `j` of an `n`-per-axis partition is
//!
//! ```text
//! N*(x) = σ( 2K [ Σ_l σ0(1/(2n) + x_l - ξ_l) + Σ_l σ0(1/(2n) - x_l + ξ_l) - 2d + 1/2 ] )
//! ```
//!
//! with heaviside gates `σ0` in the first layer. Since `ξ_l - 1/(2n)` and
//! `ξ_l + 1/(2n)` are the cell edges, the gates are evaluated against the
//! partition's edge values directly; the bracket is `1/2` on the closed
//! cell and at most `-1/2` off it.

use serde::{Deserialize, Serialize};

use crate::activation::{step, SigmoidSpec};
use crate::error::{invalid, Error, Result};
use crate::partition::{check_unit_point, CubicPartition, MultiIndex};
use crate::scalar::{magnitude_order, CompensatedSum, Scalar};

/// Bracket value `Σ gates - 2d + 1/2` of the localizer for cell `j`.
#[inline]
fn localizer_bracket<F: Scalar>(p: &CubicPartition, j: &MultiIndex, x: &[F]) -> F {
    let mut gates = 0usize;
    for (&c, &v) in j.coords().iter().zip(x) {
        // σ0(x - lo) and σ0(hi - x)
        if v - p.grid::<F>(c - 1) >= F::zero() {
            gates += 1;
        }
        if p.grid::<F>(c) - v >= F::zero() {
            gates += 1;
        }
    }
    F::of_usize(gates) - F::of_usize(2 * p.dim()) + F::half()
}

#[inline]
fn localizer_value<F: Scalar>(p: &CubicPartition, j: &MultiIndex, gain: F, sigma: SigmoidSpec, x: &[F]) -> F {
    sigma.apply(F::two() * gain * localizer_bracket(p, j, x))
}

/// The localizer subnet for one cell: `2d + 1` neurons.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizerNet<F> {
    partition: CubicPartition,
    j: MultiIndex,
    gain: F,
    sigma: SigmoidSpec,
}

impl<F: Scalar> LocalizerNet<F> {
    pub fn new(partition: CubicPartition, j: MultiIndex, gain: F, sigma: SigmoidSpec) -> Result<Self> {
        partition.check_index(&j)?;
        if !(gain > F::zero() && gain.is_finite()) {
            return invalid(format!("localizer gain must be positive and finite, got {gain}"));
        }
        Ok(Self { partition, j, gain, sigma })
    }

    pub fn partition(&self) -> &CubicPartition {
        &self.partition
    }

    pub fn cell(&self) -> &MultiIndex {
        &self.j
    }

    pub fn gain(&self) -> F {
        self.gain
    }

    pub fn sigma(&self) -> SigmoidSpec {
        self.sigma
    }

    pub fn eval(&self, x: &[F]) -> Result<F> {
        self.partition.check_point(x)?;
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub fn eval_unchecked(&self, x: &[F]) -> F {
        localizer_value(&self.partition, &self.j, self.gain, self.sigma, x)
    }

    /// The same function written as one unit of a [`PhiNetParams`].
    ///
    /// `α = α' = 2K`, `β_l = -lo_l`, the second gate is reflected with
    /// `γ_l = hi_l`, and `b = 2K(1/2 - 2d)`.
    pub fn to_phi_unit(&self, c: F) -> PhiUnit<F> {
        let d = self.partition.dim();
        let two_k = F::two() * self.gain;
        let (lo, hi) = self.partition.bounds::<F>(&self.j);
        PhiUnit {
            c,
            b: two_k * (F::half() - F::of_usize(2 * d)),
            alpha: vec![two_k; d],
            alpha_p: vec![two_k; d],
            beta: lo.into_iter().map(|v| -v).collect(),
            gamma: hi,
            reflect: vec![true; d],
        }
    }
}

pub fn eval_localizer<F: Scalar>(net: &LocalizerNet<F>, x: &[F]) -> Result<F> {
    net.eval(x)
}

/// `Σ_j a_j N*_j(x)` over every cell of a partition.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseApproximant<F> {
    partition: CubicPartition,
    /// Indexed by the partition's linear index.
    coefficients: Vec<F>,
    anchors: Vec<Vec<F>>,
    gain: F,
    sigma: SigmoidSpec,
    order: Vec<usize>,
}

/// Where each cell's coefficient is sampled from the target.
#[derive(Clone, Debug, PartialEq)]
pub enum AnchorRule<F> {
    Center,
    /// One anchor per cell, in linear-index order; each must lie in its closed cell.
    Custom(Vec<Vec<F>>),
}

impl<F: Scalar> SparseApproximant<F> {
    /// Assembles an approximant from explicit coefficients and anchors
    /// (both in linear-index order).
    pub fn from_parts(
        partition: CubicPartition,
        coefficients: Vec<F>,
        anchors: Vec<Vec<F>>,
        gain: F,
        sigma: SigmoidSpec,
    ) -> Result<Self> {
        let cells = partition.cell_count();
        if coefficients.len() != cells || anchors.len() != cells {
            return invalid(format!(
                "expected {cells} coefficients and anchors, got {} and {}",
                coefficients.len(),
                anchors.len()
            ));
        }
        if !(gain > F::zero() && gain.is_finite()) {
            return invalid(format!("gain must be positive and finite, got {gain}"));
        }
        for (lin, a) in anchors.iter().enumerate() {
            let j = partition.multi_index(lin);
            check_unit_point(a, partition.dim())?;
            if !partition.cell_contains(&j, a) {
                return invalid(format!("anchor {a:?} lies outside its cell {j}"));
            }
        }
        if let Some(bad) = coefficients.iter().find(|c| !c.is_finite()) {
            return invalid(format!("coefficient {bad} is not finite"));
        }
        let order = magnitude_order(&coefficients);
        Ok(Self {
            partition,
            coefficients,
            anchors,
            gain,
            sigma,
            order,
        })
    }

    pub fn partition(&self) -> &CubicPartition {
        &self.partition
    }

    pub fn coefficients(&self) -> &[F] {
        &self.coefficients
    }

    pub fn coefficient(&self, j: &MultiIndex) -> F {
        self.coefficients[self.partition.linear_index(j)]
    }

    pub fn anchors(&self) -> &[Vec<F>] {
        &self.anchors
    }

    pub fn gain(&self) -> F {
        self.gain
    }

    pub fn sigma(&self) -> SigmoidSpec {
        self.sigma
    }

    pub fn max_abs_coefficient(&self) -> F {
        self.coefficients.iter().fold(F::zero(), |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: &[F]) -> Result<F> {
        self.partition.check_point(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub fn eval_unchecked(&self, x: &[F]) -> F {
        let mut acc = CompensatedSum::new();
        for &lin in &self.order {
            let c = self.coefficients[lin];
            if c == F::zero() {
                // the order is by magnitude, so the rest are zero too
                break;
            }
            let j = self.partition.multi_index(lin);
            acc.add(c * localizer_value(&self.partition, &j, self.gain, self.sigma, x));
        }
        acc.value()
    }

    /// Values `N*_j(x)` of every localizer, in linear-index order.
    pub fn features(&self, x: &[F]) -> Vec<F> {
        localizer_features(&self.partition, self.gain, self.sigma, x)
    }

    /// Encodes the approximant as a member of the bounded class.
    pub fn to_phi_params(&self, bounds: PhiBounds<F>) -> PhiNetParams<F> {
        let units = self
            .partition
            .indices()
            .map(|j| {
                let lin = self.partition.linear_index(&j);
                LocalizerNet {
                    partition: self.partition,
                    j,
                    gain: self.gain,
                    sigma: self.sigma,
                }
                .to_phi_unit(self.coefficients[lin])
            })
            .collect();
        PhiNetParams {
            n: self.partition.n(),
            d: self.partition.dim(),
            sigma: self.sigma,
            bounds,
            units,
        }
    }
}

/// All localizer outputs at `x` for a partition, in linear-index order.
pub fn localizer_features<F: Scalar>(p: &CubicPartition, gain: F, sigma: SigmoidSpec, x: &[F]) -> Vec<F> {
    p.indices().map(|j| localizer_value(p, &j, gain, sigma, x)).collect()
}

pub fn eval_sparse_approximant<F: Scalar>(net: &SparseApproximant<F>, x: &[F]) -> Result<F> {
    net.eval(x)
}

/// Samples `f` at one anchor per cell and assembles the approximant.
pub fn build_approximant<F: Scalar>(
    f: impl Fn(&[F]) -> F,
    partition: CubicPartition,
    anchor_rule: AnchorRule<F>,
    gain: F,
    sigma: SigmoidSpec,
) -> Result<SparseApproximant<F>> {
    let anchors: Vec<Vec<F>> = match anchor_rule {
        AnchorRule::Center => partition.indices().map(|j| partition.center(&j)).collect(),
        AnchorRule::Custom(a) => a,
    };
    if anchors.len() != partition.cell_count() {
        return invalid(format!(
            "expected {} anchors, got {}",
            partition.cell_count(),
            anchors.len()
        ));
    }
    for (lin, a) in anchors.iter().enumerate() {
        let j = partition.multi_index(lin);
        if a.len() != partition.dim() || !partition.cell_contains(&j, a) {
            return invalid(format!("anchor {a:?} lies outside its cell {j}"));
        }
    }
    let coefficients = anchors.iter().map(|a| f(a)).collect();
    SparseApproximant::from_parts(partition, coefficients, anchors, gain, sigma)
}

/// Parameter bounds `(B_n, C_n, Ξ_n)` of the hypothesis class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiBounds<F> {
    #[serde(rename = "B")]
    pub b: F,
    #[serde(rename = "C")]
    pub c: F,
    #[serde(rename = "Xi")]
    pub xi: F,
}

impl<F: Scalar> PhiBounds<F> {
    pub fn new(b: F, c: F, xi: F) -> Self {
        Self { b, c, xi }
    }
}

/// One second-layer unit:
/// `c σ( Σ_l α_l σ0(x_l + β_l) + Σ_l α'_l σ0(±x_l + γ_l) + b )`.
///
/// `reflect[l]` selects `-x_l` in the second gate. The plain class uses
/// `+x_l` throughout; reflection is needed to write localizers, whose
/// second gate faces the other way.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiUnit<F> {
    pub c: F,
    pub b: F,
    pub alpha: Vec<F>,
    pub alpha_p: Vec<F>,
    pub beta: Vec<F>,
    pub gamma: Vec<F>,
    #[serde(default, skip_serializing_if = "no_reflection")]
    pub reflect: Vec<bool>,
}

fn no_reflection(r: &[bool]) -> bool {
    r.iter().all(|&b| !b)
}

impl<F: Scalar> PhiUnit<F> {
    #[inline]
    fn inner(&self, x: &[F]) -> F {
        let mut t = self.b;
        for (l, &v) in x.iter().enumerate() {
            t = t + self.alpha[l] * step(v + self.beta[l]);
            let arg = if self.reflect.get(l).copied().unwrap_or(false) { -v } else { v };
            t = t + self.alpha_p[l] * step(arg + self.gamma[l]);
        }
        t
    }
}

/// Parameters of one element of the bounded two-hidden-layer class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiNetParams<F> {
    pub n: usize,
    pub d: usize,
    pub sigma: SigmoidSpec,
    pub bounds: PhiBounds<F>,
    pub units: Vec<PhiUnit<F>>,
}

/// One bound breach reported by [`validate_params`]. Units are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub unit: usize,
    pub field: &'static str,
    pub coord: Option<usize>,
    pub message: String,
}

pub fn validate_params<F: Scalar>(params: &PhiNetParams<F>) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let PhiBounds { b: bb, c: cb, xi } = params.bounds;
    let expected_units = params.n.checked_pow(params.d as u32);
    if expected_units != Some(params.units.len()) {
        out.push(Violation {
            unit: 0,
            field: "units",
            coord: None,
            message: format!("expected n^d = {:?} units, found {}", expected_units, params.units.len()),
        });
    }
    for (i, u) in params.units.iter().enumerate() {
        let unit = i + 1;
        let mut push = |field: &'static str, coord: Option<usize>, message: String| {
            out.push(Violation { unit, field, coord, message })
        };
        if !(u.c.abs() <= cb) {
            push("c", None, format!("|c| = {} exceeds C_n = {cb}", u.c.abs()));
        }
        if !(u.b.abs() <= bb) {
            push("b", None, format!("|b| = {} exceeds B_n = {bb}", u.b.abs()));
        }
        for (field, v) in [("alpha", &u.alpha), ("alpha_p", &u.alpha_p), ("beta", &u.beta), ("gamma", &u.gamma)] {
            if v.len() != params.d {
                push(field, None, format!("has {} entries, expected d = {}", v.len(), params.d));
            }
        }
        if !u.reflect.is_empty() && u.reflect.len() != params.d {
            push("reflect", None, format!("has {} entries, expected d = {}", u.reflect.len(), params.d));
        }
        for (field, v) in [("alpha", &u.alpha), ("alpha_p", &u.alpha_p)] {
            for (l, a) in v.iter().enumerate() {
                if !(a.abs() <= xi) {
                    push(field, Some(l + 1), format!("|{field}| = {} exceeds Ξ_n = {xi}", a.abs()));
                }
            }
        }
        for (field, v) in [("beta", &u.beta), ("gamma", &u.gamma)] {
            for (l, s) in v.iter().enumerate() {
                if !s.is_finite() {
                    push(field, Some(l + 1), format!("{field} = {s} is not finite"));
                }
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

impl<F: Scalar> PhiNetParams<F> {
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        validate_params(self)
    }

    /// Evaluates without validation.
    pub fn eval_unchecked(&self, x: &[F]) -> F {
        let weights: Vec<F> = self.units.iter().map(|u| u.c).collect();
        let mut acc = CompensatedSum::new();
        for i in magnitude_order(&weights) {
            let u = &self.units[i];
            if u.c == F::zero() {
                break;
            }
            acc.add(u.c * self.sigma.apply(u.inner(x)));
        }
        acc.value()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&PhiNetFile::from(self.clone()))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: PhiNetFile<F> = serde_json::from_str(s)?;
        if file.kind != PHI_KIND {
            return invalid(format!("expected kind {PHI_KIND:?}, got {:?}", file.kind));
        }
        Ok(file.into())
    }
}

const PHI_KIND: &str = "phi";

/// On-disk layout: `{kind, n, d, sigma, bounds, units}`.
#[derive(Serialize, Deserialize)]
struct PhiNetFile<F> {
    kind: String,
    n: usize,
    d: usize,
    sigma: SigmoidSpec,
    bounds: PhiBounds<F>,
    units: Vec<PhiUnit<F>>,
}

impl<F> From<PhiNetParams<F>> for PhiNetFile<F> {
    fn from(p: PhiNetParams<F>) -> Self {
        Self {
            kind: PHI_KIND.to_string(),
            n: p.n,
            d: p.d,
            sigma: p.sigma,
            bounds: p.bounds,
            units: p.units,
        }
    }
}

impl<F> From<PhiNetFile<F>> for PhiNetParams<F> {
    fn from(f: PhiNetFile<F>) -> Self {
        Self {
            n: f.n,
            d: f.d,
            sigma: f.sigma,
            bounds: f.bounds,
            units: f.units,
        }
    }
}

pub fn eval_phi_net<F: Scalar>(params: &PhiNetParams<F>, x: &[F]) -> Result<F> {
    check_unit_point(x, params.d)?;
    if let Err(v) = validate_params(params) {
        let first = &v[0];
        return Err(Error::InvalidArgument(format!(
            "{} bound violation(s); first: unit {} field {}: {}",
            v.len(),
            first.unit,
            first.field,
            first.message
        )));
    }
    Ok(params.eval_unchecked(x))
}

/// Clips `v` to `[-M, M]`.
pub fn project_clip<F: Scalar>(v: F, m: F) -> Result<F> {
    if !(m > F::zero()) {
        return invalid(format!("projection level must be positive, got {m}"));
    }
    Ok(v.max(-m).min(m))
}

/// One unit `c σ(<w, x> + θ)` of a shallow net.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShallowUnit<F> {
    pub c: F,
    pub w: Vec<F>,
    pub theta: F,
}

/// A one-hidden-layer sigmoid net with outer weights bounded by `Γ_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShallowNetParams<F> {
    pub d: usize,
    pub gamma_bound: F,
    pub sigma: SigmoidSpec,
    pub units: Vec<ShallowUnit<F>>,
}

impl<F: Scalar> ShallowNetParams<F> {
    pub fn new(d: usize, gamma_bound: F, sigma: SigmoidSpec, units: Vec<ShallowUnit<F>>) -> Result<Self> {
        for (i, u) in units.iter().enumerate() {
            if u.w.len() != d {
                return invalid(format!("unit {} has {} weights, expected {d}", i + 1, u.w.len()));
            }
            if !(u.c.abs() <= gamma_bound) {
                return invalid(format!("unit {}: |c| = {} exceeds Γ_n = {gamma_bound}", i + 1, u.c.abs()));
            }
        }
        Ok(Self { d, gamma_bound, sigma, units })
    }
}

pub fn eval_shallow<F: Scalar>(params: &ShallowNetParams<F>, x: &[F]) -> Result<F> {
    check_unit_point(x, params.d)?;
    let mut acc = CompensatedSum::new();
    for u in &params.units {
        let t = u.w.iter().zip(x).fold(u.theta, |t, (&w, &v)| t + w * v);
        acc.add(u.c * params.sigma.apply(t));
    }
    Ok(acc.value())
}
