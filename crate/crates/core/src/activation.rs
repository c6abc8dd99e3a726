//! Sigmoidal activations, the heaviside gate, and the gain thresholds that
//! turn a sigmoid into an `ε`-accurate step.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Sigmoid families supported as second-layer activations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmoidKind {
    /// `1 / (1 + e^{-t})`
    Logistic,
    /// `(tanh(t) + 1) / 2`
    #[serde(rename = "tanh")]
    TanhHalf,
    /// `arctan(t)/π + 1/2`
    Arctan,
    /// `exp(-exp(-t))`
    Gompertz,
}

impl SigmoidKind {
    pub const ALL: [SigmoidKind; 4] = [
        SigmoidKind::Logistic,
        SigmoidKind::TanhHalf,
        SigmoidKind::Arctan,
        SigmoidKind::Gompertz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SigmoidKind::Logistic => "logistic",
            SigmoidKind::TanhHalf => "tanh",
            SigmoidKind::Arctan => "arctan",
            SigmoidKind::Gompertz => "gompertz",
        }
    }
}

impl fmt::Display for SigmoidKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SigmoidKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(SigmoidKind::Logistic),
            "tanh" => Ok(SigmoidKind::TanhHalf),
            "arctan" => Ok(SigmoidKind::Arctan),
            "gompertz" => Ok(SigmoidKind::Gompertz),
            other => invalid(format!("unknown sigmoid kind {other:?}")),
        }
    }
}

/// A sigmoid together with its Lipschitz constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SigmoidSpec {
    pub kind: SigmoidKind,
}

impl SigmoidSpec {
    pub const fn new(kind: SigmoidKind) -> Self {
        Self { kind }
    }

    pub const fn logistic() -> Self {
        Self::new(SigmoidKind::Logistic)
    }

    /// Evaluates the sigmoid without argument checks.
    ///
    /// Tails are computed in forms that avoid cancellation so the values
    /// near 0 and 1 stay accurate to a few ulps.
    #[inline]
    pub fn apply<F: Scalar>(&self, t: F) -> F {
        match self.kind {
            SigmoidKind::Logistic => logistic(t),
            // (tanh t + 1)/2 == 1/(1 + e^{-2t})
            SigmoidKind::TanhHalf => logistic(t + t),
            SigmoidKind::Arctan => {
                if t >= F::zero() {
                    F::half() + t.atan() * F::FRAC_1_PI()
                } else {
                    // arctan(t) + π/2 == arctan(-1/t) for t < 0
                    (-t.recip()).atan() * F::FRAC_1_PI()
                }
            }
            SigmoidKind::Gompertz => (-(-t).exp()).exp(),
        }
    }

    /// Sharp Lipschitz constant `C_σ = sup σ'`.
    pub fn lipschitz<F: Scalar>(&self) -> F {
        match self.kind {
            SigmoidKind::Logistic => F::of(0.25),
            SigmoidKind::TanhHalf => F::half(),
            SigmoidKind::Arctan => F::FRAC_1_PI(),
            SigmoidKind::Gompertz => (-F::one()).exp(),
        }
    }
}

impl From<SigmoidKind> for SigmoidSpec {
    fn from(kind: SigmoidKind) -> Self {
        Self::new(kind)
    }
}

#[inline]
fn logistic<F: Scalar>(t: F) -> F {
    if t >= F::zero() {
        F::one() / (F::one() + (-t).exp())
    } else {
        let e = t.exp();
        e / (F::one() + e)
    }
}

fn check_finite<F: Scalar>(t: F) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        invalid(format!("activation argument {t} is not finite"))
    }
}

pub fn eval_sigmoid<F: Scalar>(s: SigmoidSpec, t: F) -> Result<F> {
    check_finite(t)?;
    Ok(s.apply(t))
}

/// The step gate with `σ0(0) = 1`.
#[inline]
pub fn step<F: Scalar>(t: F) -> F {
    if t >= F::zero() {
        F::one()
    } else {
        F::zero()
    }
}

pub fn heaviside<F: Scalar>(t: F) -> Result<F> {
    check_finite(t)?;
    Ok(step(t))
}

pub fn lipschitz_constant<F: Scalar>(s: SigmoidSpec) -> F {
    s.lipschitz()
}

/// Gain `K` beyond which the sigmoid is within `ε` of its limits:
/// `σ(t) > 1 - ε` for `t >= K` and `σ(t) < ε` for `t <= -K`.
///
/// The closed-form inverse (bisection for Gompertz) lands exactly on the
/// equality `σ(K) = 1 - ε`; the result is then nudged up by a geometrically growing step
/// until both inequalities hold strictly in floating point, including in
/// the forms `1 - σ(K) < ε` used by the verifiers.
pub fn threshold_for<F: Scalar>(s: SigmoidSpec, eps: F) -> Result<F> {
    if !(eps > F::zero() && eps < F::half()) {
        return invalid(format!("threshold needs 0 < ε < 1/2, got ε = {eps}"));
    }
    let one = F::one();
    let base = match s.kind {
        // σ(K) = 1 - ε  <=>  K = ln((1 - ε)/ε); symmetric tails
        SigmoidKind::Logistic => ((one - eps) / eps).ln(),
        SigmoidKind::TanhHalf => ((one - eps) / eps).ln() * F::half(),
        // 1/2 + arctan(K)/π = 1 - ε  <=>  K = tan(π(1/2 - ε)) = cot(πε)
        SigmoidKind::Arctan => (F::PI() * eps).tan().recip(),
        SigmoidKind::Gompertz => {
            let upper = bisect_increasing(|t| s.apply(t), one - eps);
            let lower = bisect_increasing(|t| s.apply(-t), eps);
            upper.max(lower)
        }
    };
    let mut k = base.max(F::min_positive_value());
    let strict = |k: F| {
        let hi = s.apply(k);
        let lo = s.apply(-k);
        hi > one - eps && one - hi < eps && lo < eps
    };
    // σ near 1 moves much more slowly than K, so the nudge doubles each time
    let mut step = (k * F::epsilon()).max(F::min_positive_value());
    let mut guard = 0;
    while !strict(k) {
        k = k + step;
        step = step + step;
        guard += 1;
        if guard > 200 || !k.is_finite() {
            return Err(Error::Degenerate(format!(
                "no representable threshold for {} at ε = {eps}",
                s.kind
            )));
        }
    }
    Ok(k)
}

/// Solves `g(t) = target` for `t > 0`, `g` monotone in `t`.
///
/// Works for either direction of monotonicity: the bracket is grown until
/// `g` crosses `target`, then bisected to an absolute width of `1e-12`
/// (or one ulp, whichever is coarser).
fn bisect_increasing<F: Scalar>(g: impl Fn(F) -> F, target: F) -> F {
    let (mut lo, mut hi) = (F::zero(), F::one());
    let increasing = g(F::one()) >= g(F::zero());
    let past = |t: F| if increasing { g(t) >= target } else { g(t) <= target };
    while !past(hi) {
        lo = hi;
        hi = hi * F::two();
    }
    let tol = F::of(1e-12);
    loop {
        let mid = (lo + hi) * F::half();
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        if past(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Learning-level gain `L`: the threshold at
/// `ε = n^{-r-d} (s / N^d)^{1/2}`.
pub fn level_for_learning<F: Scalar>(
    s: SigmoidSpec,
    n: usize,
    coarse_n: usize,
    sparsity: usize,
    r: F,
    d: usize,
) -> Result<F> {
    let eps = learning_epsilon(n, coarse_n, sparsity, r, d)?;
    threshold_for(s, eps)
}

/// The `ε` used by [`level_for_learning`].
pub fn learning_epsilon<F: Scalar>(n: usize, coarse_n: usize, sparsity: usize, r: F, d: usize) -> Result<F> {
    if n == 0 || coarse_n == 0 || sparsity == 0 || d == 0 {
        return invalid("n, N, s and d must be positive");
    }
    if !(r > F::zero()) {
        return invalid(format!("smoothness r must be positive, got {r}"));
    }
    let cells = F::of_usize(coarse_n).powi(d as i32);
    let s = F::of_usize(sparsity);
    if s > cells {
        return invalid(format!("sparsity {sparsity} exceeds N^d"));
    }
    let nf = F::of_usize(n);
    Ok(nf.powf(-(r + F::of_usize(d))) * (s / cells).sqrt())
}
