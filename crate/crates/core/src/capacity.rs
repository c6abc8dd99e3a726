//! Empirical covering numbers of sampled network families, and the
//! closed-form log-covering bound they are compared against.
//!
//! A finite random sample of the class, evaluated on a finite grid, is
//! covered greedily in the sup norm. This never exceeds what the full
//! class would need, so comparing against the closed-form upper bound is a
//! sound one-sided check.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::activation::SigmoidSpec;
use crate::error::{invalid, Result};
use crate::netcore::{PhiBounds, PhiNetParams, PhiUnit};
use crate::scalar::Scalar;

fn symmetric<F: Scalar, R: Rng + ?Sized>(rng: &mut R, bound: F) -> F {
    bound * F::of(rng.gen::<f64>() * 2.0 - 1.0)
}

/// Draws one member of the bounded class.
///
/// Outer weights, biases and inner weights are uniform in their bound
/// intervals; shifts are uniform on `[-1 - 1/(2n), 1/(2n)]`, which places
/// every gate breakpoint in or next to `[0,1]`.
pub fn sample_phi_net<F: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    d: usize,
    bounds: PhiBounds<F>,
    sigma: SigmoidSpec,
) -> PhiNetParams<F> {
    let units = n.pow(d as u32);
    let half_cell = 1.0 / (2.0 * n as f64);
    let shift = |rng: &mut R| F::of(-1.0 - half_cell + rng.gen::<f64>() * (1.0 + 2.0 * half_cell));
    let units = (0..units)
        .map(|_| {
            let c = symmetric(rng, bounds.c);
            let b = symmetric(rng, bounds.b);
            let alpha = (0..d).map(|_| symmetric(rng, bounds.xi)).collect();
            let alpha_p = (0..d).map(|_| symmetric(rng, bounds.xi)).collect();
            let beta = (0..d).map(|_| shift(rng)).collect();
            let gamma = (0..d).map(|_| shift(rng)).collect();
            PhiUnit {
                c,
                b,
                alpha,
                alpha_p,
                beta,
                gamma,
                reflect: Vec::new(),
            }
        })
        .collect();
    PhiNetParams {
        n,
        d,
        sigma,
        bounds,
        units,
    }
}

/// Evaluates each net on every grid point.
pub fn evaluate_family<F: Scalar>(nets: &[PhiNetParams<F>], grid: &[Vec<F>]) -> Vec<Vec<F>> {
    nets.par_iter()
        .map(|net| grid.iter().map(|x| net.eval_unchecked(x)).collect())
        .collect()
}

#[inline]
fn within<F: Scalar>(a: &[F], b: &[F], radius: F) -> bool {
    a.iter().zip(b).all(|(&u, &v)| (u - v).abs() <= radius)
}

/// Greedy sup-norm cover: scan in order, open a new ball of radius `eps`
/// at every vector not yet covered. Returns the center indices.
pub fn greedy_cover<F: Scalar>(family: &[Vec<F>], eps: F) -> Vec<usize> {
    let mut centers: Vec<usize> = Vec::new();
    for (i, v) in family.iter().enumerate() {
        if !centers.iter().any(|&c| within(&family[c], v, eps)) {
            centers.push(i);
        }
    }
    centers
}

/// Greedy packing: keep each vector farther than `sep` from all kept ones.
pub fn greedy_packing<F: Scalar>(family: &[Vec<F>], sep: F) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for (i, v) in family.iter().enumerate() {
        if kept.iter().all(|&c| !within(&family[c], v, sep)) {
            kept.push(i);
        }
    }
    kept
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringEstimate<F> {
    pub eps: F,
    pub sample_size: usize,
    pub grid_len: usize,
    /// greedy cover count at radius `eps`
    pub net_size_upper: usize,
    /// greedy `2 eps`-separated set size
    pub packing_lower: usize,
    /// greedy `eps`-separated set size
    pub packing_at_eps: usize,
}

impl<F: Scalar> CoveringEstimate<F> {
    /// `packing(2ε) <= cover(ε) <= packing(ε)`.
    pub fn sandwich_holds(&self) -> bool {
        self.packing_lower <= self.net_size_upper && self.net_size_upper <= self.packing_at_eps
    }
}

pub fn empirical_covering<F: Scalar>(family: &[Vec<F>], eps: F) -> Result<CoveringEstimate<F>> {
    let Some(first) = family.first() else {
        return invalid("cannot cover an empty family");
    };
    if !(eps > F::zero()) {
        return invalid(format!("radius must be positive, got {eps}"));
    }
    if family.iter().any(|v| v.len() != first.len()) {
        return invalid("family vectors differ in length");
    }
    Ok(CoveringEstimate {
        eps,
        sample_size: family.len(),
        grid_len: first.len(),
        net_size_upper: greedy_cover(family, eps).len(),
        packing_lower: greedy_packing(family, eps + eps).len(),
        packing_at_eps: greedy_packing(family, eps).len(),
    })
}

/// Value of the closed-form log-covering bound.
///
/// `degenerate` is set (and `value` is `+inf`) when the inner logarithm of
/// the log-log term is not above 1 or the second logarithm is not positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogCoverBound<F> {
    pub value: F,
    pub degenerate: bool,
    pub loglog_term: F,
    pub log_term: F,
}

/// Evaluates
///
/// ```text
/// 4 d n^d log log( 3e(2d+1) C_n C_σ n^d Ξ_n / ε )
///   + n^d log( 4 B_n (24e²)^{2d} (2d+1)^{6d} C_n^{6d+2} Ξ_n^{6d} C_σ^{6d+1} n^{6d²+2d} / ε^{6d+2} )
/// ```
///
/// with the second logarithm expanded term by term so that nothing
/// overflows.
pub fn theoretical_bound<F: Scalar>(
    eps: F,
    n: usize,
    d: usize,
    bounds: PhiBounds<F>,
    c_sigma: F,
) -> Result<LogCoverBound<F>> {
    let PhiBounds { b, c, xi } = bounds;
    if n == 0 || d == 0 {
        return invalid("n and d must be positive");
    }
    for (name, v) in [("ε", eps), ("B_n", b), ("C_n", c), ("Ξ_n", xi), ("C_σ", c_sigma)] {
        if !(v > F::zero() && v.is_finite()) {
            return invalid(format!("{name} must be positive and finite, got {v}"));
        }
    }
    let nf = F::of_usize(n);
    let df = F::of_usize(d);
    let cells = nf.powi(d as i32);
    let e = F::E();
    let six_d = F::of_usize(6 * d);

    let inner = (F::of(3.0) * e * F::of_usize(2 * d + 1) * c * c_sigma * cells * xi / eps).ln();
    let log_arg = (F::of(4.0) * b).ln()
        + F::of_usize(2 * d) * (F::of(24.0) * e * e).ln()
        + six_d * F::of_usize(2 * d + 1).ln()
        + (six_d + F::two()) * c.ln()
        + six_d * xi.ln()
        + (six_d + F::one()) * c_sigma.ln()
        + F::of_usize(6 * d * d + 2 * d) * nf.ln()
        - (six_d + F::two()) * eps.ln();

    let degenerate = !(inner > F::one()) || !(log_arg > F::zero());
    let loglog_term = F::of(4.0) * df * cells * inner.ln();
    let log_term = cells * log_arg;
    Ok(LogCoverBound {
        value: if degenerate { F::infinity() } else { loglog_term + log_term },
        degenerate,
        loglog_term,
        log_term,
    })
}

/// The simplified growth scale `n^d log(n/ε)`.
pub fn simplified_scale<F: Scalar>(eps: F, n: usize, d: usize) -> F {
    F::of_usize(n).powi(d as i32) * (F::of_usize(n) / eps).ln()
}

/// Reference scale `n^d log(Γ_n/ε)` for shallow nets (O-constant set to 1).
pub fn shallow_bound_reference<F: Scalar>(eps: F, n: usize, d: usize, gamma: F) -> Result<F> {
    if !(eps > F::zero()) || !(gamma > F::zero()) || n == 0 || d == 0 {
        return invalid("ε, Γ_n, n and d must be positive");
    }
    if gamma < eps {
        return invalid(format!("reference needs Γ_n/ε >= 1, got {}", gamma / eps));
    }
    Ok(F::of_usize(n).powi(d as i32) * (gamma / eps).ln())
}

/// One capacity CSV row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityRow {
    pub n: usize,
    pub d: usize,
    pub eps: f64,
    pub sample_size: usize,
    pub cover_upper: usize,
    pub packing_lower: usize,
    pub theory_log_bound: f64,
}

impl CapacityRow {
    pub const CSV_HEADER: &'static str = "n,d,eps,sample_size,cover_upper,packing_lower,theory_log_bound";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.n, self.d, self.eps, self.sample_size, self.cover_upper, self.packing_lower, self.theory_log_bound
        )
    }

    /// `log(cover) <= bound`, and the packing/cover sandwich.
    pub fn consistent(&self) -> bool {
        (self.cover_upper as f64).ln() <= self.theory_log_bound && self.packing_lower <= self.cover_upper
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::validate_params;
    use crate::verify::unit_grid;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const LOG: SigmoidSpec = SigmoidSpec::logistic();

    fn bounds(d: usize) -> PhiBounds<f64> {
        PhiBounds::new(2.0 * d as f64, 1.0, 10.0)
    }

    #[test]
    fn sampling_is_deterministic_and_valid() {
        let a = sample_phi_net(&mut ChaCha8Rng::seed_from_u64(4), 3, 2, bounds(2), LOG);
        let b = sample_phi_net(&mut ChaCha8Rng::seed_from_u64(4), 3, 2, bounds(2), LOG);
        assert_eq!(a, b);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let p = sample_phi_net(&mut rng, 2, 2, bounds(2), LOG);
            assert!(validate_params(&p).is_ok());
            for u in &p.units {
                for &s in u.beta.iter().chain(&u.gamma) {
                    assert!((-1.25..=0.25).contains(&s));
                }
            }
        }
        let zero = sample_phi_net(&mut rng, 2, 1, PhiBounds::new(0.0, 0.0, 0.0), LOG);
        assert!(validate_params(&zero).is_ok());
        assert!(unit_grid::<f64>(1, 9).iter().all(|x| zero.eval_unchecked(x) == 0.0));
    }

    #[test]
    fn cover_examples() {
        let same = vec![vec![0.5, 0.1, -0.2]; 10];
        let est = empirical_covering(&same, 0.01).unwrap();
        assert_eq!(est.net_size_upper, 1);

        let eps = 0.1;
        let apart = vec![vec![0.0, 0.0], vec![3.0 * eps, 0.0]];
        let est = empirical_covering(&apart, eps).unwrap();
        assert_eq!(est.net_size_upper, 2);
        assert_eq!(est.packing_lower, 2);
        assert!(est.sandwich_holds());

        assert!(empirical_covering::<f64>(&[], 0.1).is_err());
        assert!(empirical_covering(&apart, 0.0).is_err());
        assert!(empirical_covering(&[vec![0.0], vec![0.0, 1.0]], 0.1).is_err());
    }

    #[test]
    fn sampled_cover_below_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let nets: Vec<_> = (0..200).map(|_| sample_phi_net(&mut rng, 2, 1, bounds(1), LOG)).collect();
        let grid = unit_grid::<f64>(1, 64);
        let family = evaluate_family(&nets, &grid);
        let est = empirical_covering(&family, 0.1).unwrap();
        let bound = theoretical_bound(0.1, 2, 1, bounds(1), 0.25).unwrap();
        assert!(!bound.degenerate);
        assert!((est.net_size_upper as f64).ln() <= bound.value);
        assert!(est.sandwich_holds());
    }

    #[test]
    fn bound_matches_high_precision_oracle() {
        // evaluated with 50-digit arithmetic from the unexpanded formula
        let v = theoretical_bound(0.1, 2, 1, bounds(1), 0.25).unwrap().value;
        assert_relative_eq!(v, 109.90023360993324, max_relative = 1e-12);
        let v = theoretical_bound(0.1, 4, 2, bounds(2), 0.25).unwrap().value;
        assert_relative_eq!(v, 2266.1806991021854, max_relative = 1e-12);
    }

    #[test]
    fn bound_grows_like_cell_count() {
        for d in 1..=2usize {
            for n in [2usize, 4, 8] {
                let a = theoretical_bound(0.1, n, d, bounds(d), 0.25).unwrap().value;
                let b = theoretical_bound(0.1, 2 * n, d, bounds(d), 0.25).unwrap().value;
                let scale = (1 << d) as f64;
                assert!(b / a >= 0.8 * scale && b / a <= 2.5 * scale, "d={d} n={n}: {}", b / a);
            }
        }
    }

    #[test]
    fn halving_eps_adds_log_two_per_power() {
        for d in 1..=2usize {
            for n in [2usize, 3] {
                let a = theoretical_bound(0.1, n, d, bounds(d), 0.25).unwrap();
                let b = theoretical_bound(0.05, n, d, bounds(d), 0.25).unwrap();
                let cells = (n as f64).powi(d as i32);
                let log_part = cells * (6 * d + 2) as f64 * 2f64.ln();
                assert_relative_eq!(b.log_term - a.log_term, log_part, max_relative = 1e-10);
                let diff = b.value - a.value;
                assert!(diff >= log_part && diff <= log_part + b.loglog_term - a.loglog_term + 1e-9);
                // the loglog increment is lower order
                assert!(b.loglog_term - a.loglog_term < 0.1 * log_part);
            }
        }
    }

    #[test]
    fn degenerate_inputs_flagged() {
        let b = theoretical_bound(100.0f64, 1, 1, PhiBounds::new(0.01, 0.01, 0.01), 0.25).unwrap();
        assert!(b.degenerate);
        assert!(b.value.is_infinite());
        assert!(theoretical_bound(0.0, 1, 1, bounds(1), 0.25).is_err());
        assert!(theoretical_bound(0.1, 0, 1, bounds(1), 0.25).is_err());
        assert!(theoretical_bound(0.1, 1, 1, PhiBounds::new(-1.0, 1.0, 1.0), 0.25).is_err());
    }

    #[test]
    fn shallow_reference_examples() {
        assert_relative_eq!(shallow_bound_reference(0.1, 2, 1, 1.0).unwrap(), 2.0 * 10f64.ln());
        assert!((shallow_bound_reference(0.1f64, 2, 1, 1.0).unwrap() - 4.605).abs() < 1e-3);
        assert_eq!(shallow_bound_reference(0.5, 3, 2, 0.5).unwrap(), 0.0);
        for d in 1..=3 {
            let a = shallow_bound_reference(0.01, 3, d, 2.0).unwrap();
            let b = shallow_bound_reference(0.01, 6, d, 2.0).unwrap();
            assert_relative_eq!(b / a, (1 << d) as f64, max_relative = 1e-12);
        }
        assert!(shallow_bound_reference(0.0, 3, 2, 0.5).is_err());
        assert!(shallow_bound_reference(1.0, 3, 2, 0.5).is_err());
    }

    #[test]
    fn csv_row_format() {
        let row = CapacityRow { n: 2, d: 1, eps: 0.1, sample_size: 200, cover_upper: 17, packing_lower: 9, theory_log_bound: 109.9 };
        assert_eq!(row.csv_line(), "2,1,0.1,200,17,9,109.9");
        assert!(row.consistent());
    }
}
