//! Service, routing and interarrival distributions.

use rand::Rng;
use serde::{Deserialize, Serialize};
use libm::erfc;
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::quad;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("invalid {family} parameter: {reason}")]
    InvalidParameter { family: &'static str, reason: String },
}

fn invalid(family: &'static str, reason: impl Into<String>) -> DistError {
    DistError::InvalidParameter { family, reason: reason.into() }
}

/// Parameter record of a distribution on `[0, inf)`.
///
/// `Pareto` has tail `(xm / (x + shift))^alpha` above `xm - shift`; a
/// nonzero shift moves the mean without changing the tail constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    Pareto {
        alpha: f64,
        xm: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        shift: f64,
    },
    Weibull { shape: f64, scale: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Exponential { rate: f64 },
    Deterministic { value: f64 },
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// Validated distribution of a nonnegative random variable with finite mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct HeavyTailDist(Family);

impl TryFrom<Family> for HeavyTailDist {
    type Error = DistError;

    fn try_from(f: Family) -> Result<Self, DistError> {
        let ok = |c: bool| c;
        match f {
            Family::Pareto { alpha, xm, shift } => {
                if !ok(alpha.is_finite() && alpha > 1.0) {
                    return Err(invalid("pareto", format!("alpha must exceed 1, got {alpha}")));
                }
                if !ok(xm.is_finite() && xm > 0.0) {
                    return Err(invalid("pareto", format!("xm must be positive, got {xm}")));
                }
                if !ok(shift.is_finite() && shift >= 0.0 && shift < xm) {
                    return Err(invalid("pareto", format!("shift must lie in [0, xm), got {shift}")));
                }
            }
            Family::Weibull { shape, scale } => {
                if !ok(shape > 0.0 && shape < 1.0) {
                    return Err(invalid("weibull", format!("shape must lie in (0, 1), got {shape}")));
                }
                if !ok(scale.is_finite() && scale > 0.0) {
                    return Err(invalid("weibull", format!("scale must be positive, got {scale}")));
                }
            }
            Family::Lognormal { mu, sigma } => {
                if !ok(mu.is_finite()) {
                    return Err(invalid("lognormal", "mu must be finite"));
                }
                if !ok(sigma.is_finite() && sigma > 0.0) {
                    return Err(invalid("lognormal", format!("sigma must be positive, got {sigma}")));
                }
            }
            Family::Exponential { rate } => {
                if !ok(rate.is_finite() && rate > 0.0) {
                    return Err(invalid("exponential", format!("rate must be positive, got {rate}")));
                }
            }
            Family::Deterministic { value } => {
                if !ok(value.is_finite() && value >= 0.0) {
                    return Err(invalid("deterministic", format!("value must be nonnegative, got {value}")));
                }
            }
        }
        Ok(HeavyTailDist(f))
    }
}

impl From<HeavyTailDist> for Family {
    fn from(d: HeavyTailDist) -> Family {
        d.0
    }
}

/// Membership of a distribution and its integrated tail in the
/// subexponential class, and the two tandem tail conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubexpClass {
    pub f_subexponential: bool,
    pub fs_subexponential: bool,
    /// `F^s(x (1 + c) / sqrt(log x)) = o(F^s(x))`; `None` when not applicable.
    pub tail_condition_sqrt_log: Option<bool>,
    /// `liminf F^s(cx) / F^s(x) > 0` for every `c > 1`; `None` when not applicable.
    pub tail_condition_dominated: Option<bool>,
}

/// `P(N(0,1) > x)`.
pub fn normal_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of the standard normal distribution function.
pub fn normal_quantile(u: f64) -> f64 {
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    let mut z = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u);
    // Newton polish against the accurate tail.
    for _ in 0..2 {
        let density = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if density <= 0.0 || !z.is_finite() {
            break;
        }
        z -= (1.0 - normal_tail(z) - u) / density;
    }
    z
}

impl HeavyTailDist {
    pub fn new(f: Family) -> Result<Self, DistError> {
        Self::try_from(f)
    }

    pub fn pareto(alpha: f64, xm: f64) -> Result<Self, DistError> {
        Self::new(Family::Pareto { alpha, xm, shift: 0.0 })
    }

    pub fn shifted_pareto(alpha: f64, xm: f64, shift: f64) -> Result<Self, DistError> {
        Self::new(Family::Pareto { alpha, xm, shift })
    }

    /// Unshifted Pareto with the given mean.
    pub fn pareto_with_mean(alpha: f64, mean: f64) -> Result<Self, DistError> {
        Self::pareto(alpha, mean * (alpha - 1.0) / alpha)
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self, DistError> {
        Self::new(Family::Weibull { shape, scale })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self, DistError> {
        Self::new(Family::Lognormal { mu, sigma })
    }

    pub fn exponential(rate: f64) -> Result<Self, DistError> {
        Self::new(Family::Exponential { rate })
    }

    pub fn deterministic(value: f64) -> Result<Self, DistError> {
        Self::new(Family::Deterministic { value })
    }

    pub fn family(&self) -> Family {
        self.0
    }

    pub fn family_name(&self) -> &'static str {
        match self.0 {
            Family::Pareto { .. } => "pareto",
            Family::Weibull { .. } => "weibull",
            Family::Lognormal { .. } => "lognormal",
            Family::Exponential { .. } => "exponential",
            Family::Deterministic { .. } => "deterministic",
        }
    }

    /// Quantile transform: the value at distribution-function level `u`.
    pub fn sample_from_uniform(&self, u: f64) -> f64 {
        match self.0 {
            Family::Pareto { alpha, xm, shift } => xm * (1.0 - u).powf(-1.0 / alpha) - shift,
            Family::Weibull { shape, scale } => scale * (-(-u).ln_1p()).powf(1.0 / shape),
            Family::Lognormal { mu, sigma } => (mu + sigma * normal_quantile(u)).exp(),
            Family::Exponential { rate } => -(-u).ln_1p() / rate,
            Family::Deterministic { value } => value,
        }
    }

    /// Draws one value. Deterministic laws consume no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.0 {
            Family::Deterministic { value } => value,
            _ => self.sample_from_uniform(rng.gen::<f64>()),
        }
    }

    /// Smallest point of the support.
    pub fn lower_support(&self) -> f64 {
        match self.0 {
            Family::Pareto { xm, shift, .. } => xm - shift,
            Family::Deterministic { value } => value,
            _ => 0.0,
        }
    }

    /// `P(X > x)`.
    pub fn tail(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        match self.0 {
            Family::Pareto { alpha, xm, shift } => {
                if x + shift <= xm {
                    1.0
                } else {
                    (xm / (x + shift)).powf(alpha)
                }
            }
            Family::Weibull { shape, scale } => (-(x / scale).powf(shape)).exp(),
            Family::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    normal_tail((x.ln() - mu) / sigma)
                }
            }
            Family::Exponential { rate } => (-rate * x).exp(),
            Family::Deterministic { value } => {
                if x < value {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self.0 {
            Family::Pareto { alpha, xm, shift } => alpha * xm / (alpha - 1.0) - shift,
            Family::Weibull { shape, scale } => scale * gamma(1.0 + 1.0 / shape),
            Family::Lognormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            Family::Exponential { rate } => 1.0 / rate,
            Family::Deterministic { value } => value,
        }
    }

    /// Variance, or `None` when infinite.
    pub fn variance(&self) -> Option<f64> {
        match self.0 {
            Family::Pareto { alpha, xm, .. } => {
                if alpha > 2.0 {
                    Some(xm * xm * alpha / ((alpha - 1.0) * (alpha - 1.0) * (alpha - 2.0)))
                } else {
                    None
                }
            }
            Family::Weibull { shape, scale } => {
                let g1 = gamma(1.0 + 1.0 / shape);
                Some(scale * scale * (gamma(1.0 + 2.0 / shape) - g1 * g1))
            }
            Family::Lognormal { mu, sigma } => {
                let s2 = sigma * sigma;
                Some(s2.exp_m1() * (2.0 * mu + s2).exp())
            }
            Family::Exponential { rate } => Some(1.0 / (rate * rate)),
            Family::Deterministic { .. } => Some(0.0),
        }
    }

    /// `min(1, int_x^inf P(X > u) du)`.
    pub fn integrated_tail(&self, x: f64) -> f64 {
        let raw = match self.0 {
            Family::Pareto { alpha, xm, shift } => {
                let lo = xm - shift;
                if x >= lo {
                    xm.powf(alpha) * (x + shift).powf(1.0 - alpha) / (alpha - 1.0)
                } else {
                    (lo - x) + xm / (alpha - 1.0)
                }
            }
            Family::Exponential { rate } => {
                if x >= 0.0 {
                    (-rate * x).exp() / rate
                } else {
                    -x + 1.0 / rate
                }
            }
            Family::Deterministic { value } => (value - x).max(0.0),
            Family::Weibull { scale, .. } => self.integrated_tail_numeric(x, scale),
            Family::Lognormal { mu, .. } => self.integrated_tail_numeric(x, mu.exp()),
        };
        raw.min(1.0)
    }

    fn integrated_tail_numeric(&self, x: f64, scale: f64) -> f64 {
        let (below, start) = if x < 0.0 { (-x, 0.0) } else { (0.0, x) };
        let t0 = self.tail(start);
        if t0 == 0.0 {
            return below;
        }
        let h = scale.max(start * 1e-3).max(f64::MIN_POSITIVE);
        let q = quad::integrate_to_infinity(
            |u| self.tail(u),
            start,
            h,
            1e-11,
            |u| self.tail(u) < 1e-16 * t0,
            200,
        );
        below + q.value
    }

    /// Subexponential class membership of `F` and `F^s`, with the tandem
    /// tail conditions.
    pub fn classify(&self) -> SubexpClass {
        match self.0 {
            Family::Pareto { .. } => SubexpClass {
                f_subexponential: true,
                fs_subexponential: true,
                tail_condition_sqrt_log: Some(false),
                tail_condition_dominated: Some(true),
            },
            Family::Weibull { .. } | Family::Lognormal { .. } => SubexpClass {
                f_subexponential: true,
                fs_subexponential: true,
                tail_condition_sqrt_log: Some(false),
                tail_condition_dominated: Some(false),
            },
            Family::Exponential { .. } | Family::Deterministic { .. } => SubexpClass {
                f_subexponential: false,
                fs_subexponential: false,
                tail_condition_sqrt_log: None,
                tail_condition_dominated: None,
            },
        }
    }

    /// `lim P(X > x) / P(R > x)` for a reference law `R`, when it can be
    /// read off the parametric forms.
    pub fn tail_weight_against(&self, reference: &HeavyTailDist) -> Option<f64> {
        if self == reference {
            return Some(1.0);
        }
        use Family::*;
        match (self.0, reference.0) {
            (Pareto { alpha: a1, xm: m1, .. }, Pareto { alpha: a2, xm: m2, .. }) => {
                if a1 == a2 {
                    Some((m1 / m2).powf(a1))
                } else if a1 > a2 {
                    Some(0.0)
                } else {
                    None
                }
            }
            (Exponential { .. } | Deterministic { .. }, _) if reference.classify().f_subexponential => Some(0.0),
            (Weibull { .. } | Lognormal { .. }, Pareto { .. }) => Some(0.0),
            (Weibull { shape: b1, scale: l1 }, Weibull { shape: b2, scale: l2 }) => {
                if b1 == b2 && l1 == l2 {
                    Some(1.0)
                } else if b1 > b2 || (b1 == b2 && l1 < l2) {
                    Some(0.0)
                } else {
                    None
                }
            }
            (Lognormal { mu: m1, sigma: s1 }, Lognormal { mu: m2, sigma: s2 }) => {
                if s1 < s2 || (s1 == s2 && m1 < m2) {
                    Some(0.0)
                } else {
                    None
                }
            }
            (Deterministic { .. }, Deterministic { .. }) => Some(0.0),
            (Exponential { rate: r1 }, Exponential { rate: r2 }) if r1 > r2 => Some(0.0),
            _ => None,
        }
    }
}

/// Law of the interarrival times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArrivalSpec {
    Deterministic { spacing: f64 },
    Renewal { dist: HeavyTailDist },
}

impl ArrivalSpec {
    pub fn deterministic(spacing: f64) -> Result<Self, DistError> {
        let s = ArrivalSpec::Deterministic { spacing };
        s.validate()?;
        Ok(s)
    }

    /// Poisson arrivals with the given mean spacing.
    pub fn exponential(mean: f64) -> Result<Self, DistError> {
        let s = ArrivalSpec::Renewal { dist: HeavyTailDist::exponential(1.0 / mean)? };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), DistError> {
        match self {
            ArrivalSpec::Deterministic { spacing } => {
                if spacing.is_finite() && *spacing > 0.0 {
                    Ok(())
                } else {
                    Err(invalid("arrivals", format!("spacing must be positive, got {spacing}")))
                }
            }
            ArrivalSpec::Renewal { dist } => {
                if dist.mean() > 0.0 && dist.mean().is_finite() {
                    Ok(())
                } else {
                    Err(invalid("arrivals", "interarrival mean must be positive"))
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            ArrivalSpec::Deterministic { spacing } => *spacing,
            ArrivalSpec::Renewal { dist } => dist.mean(),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, ArrivalSpec::Deterministic { .. })
    }

    pub fn sample_gap<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ArrivalSpec::Deterministic { spacing } => *spacing,
            ArrivalSpec::Renewal { dist } => dist.sample(rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma_ur;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn pareto_quantile_at_half() {
        let d = HeavyTailDist::pareto(2.5, 1.0).unwrap();
        let v = d.sample_from_uniform(0.5);
        assert!((v - 0.5f64.powf(-0.4)).abs() < 1e-15);
        assert!((v - 1.3195).abs() < 1e-4);
    }

    #[test]
    fn exponential_quantile_near_zero() {
        let d = HeavyTailDist::exponential(1.0).unwrap();
        let v = d.sample_from_uniform(1e-300);
        assert!(v > 0.0 && v < 1e-299);
    }

    #[test]
    fn pareto_tail_and_integrated_tail() {
        let d = HeavyTailDist::pareto(2.5, 1.0).unwrap();
        assert!((d.tail(2.0) - 0.176_776_695_296_636_9).abs() < 1e-15);
        assert!((d.integrated_tail(4.0) - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(d.tail(0.5), 1.0);
    }

    #[test]
    fn normal_tail_values() {
        assert!((normal_tail(1.96) - 0.024_997_895_148_220_43).abs() < 1e-12);
        assert!((normal_tail(0.0) - 0.5).abs() < 1e-15);
        assert_eq!(normal_tail(f64::NEG_INFINITY), 1.0);
        assert_eq!(normal_tail(f64::INFINITY), 0.0);
    }

    #[test]
    fn normal_quantile_inverts_tail() {
        for &u in &[1e-6, 0.01, 0.3, 0.5, 0.9, 0.999] {
            let z = normal_quantile(u);
            assert!((1.0 - normal_tail(z) - u).abs() < 1e-12, "u={u}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(HeavyTailDist::pareto(1.0, 1.0).is_err());
        assert!(HeavyTailDist::pareto(2.0, 0.0).is_err());
        assert!(HeavyTailDist::shifted_pareto(2.0, 1.0, 1.0).is_err());
        assert!(HeavyTailDist::weibull(1.0, 1.0).is_err());
        assert!(HeavyTailDist::lognormal(0.0, 0.0).is_err());
        assert!(HeavyTailDist::exponential(-1.0).is_err());
        assert!(HeavyTailDist::deterministic(f64::NAN).is_err());
        assert!(ArrivalSpec::deterministic(0.0).is_err());
    }

    #[test]
    fn json_literal_round_trip() {
        let d: HeavyTailDist = serde_json::from_str(r#"{"family":"pareto","alpha":2.5,"xm":1.0}"#).unwrap();
        assert_eq!(d, HeavyTailDist::pareto(2.5, 1.0).unwrap());
        assert_eq!(serde_json::to_string(&d).unwrap(), r#"{"family":"pareto","alpha":2.5,"xm":1.0}"#);
        assert!(serde_json::from_str::<HeavyTailDist>(r#"{"family":"pareto","alpha":0.5,"xm":1.0}"#).is_err());
        assert!(serde_json::from_str::<HeavyTailDist>(r#"{"family":"pareto","alpha":2.5,"xm":1.0,"k":1}"#).is_err());
        let a: ArrivalSpec =
            serde_json::from_str(r#"{"kind":"renewal","dist":{"family":"exponential","rate":1.0}}"#).unwrap();
        assert_eq!(a.mean(), 1.0);
    }

    #[test]
    fn weibull_integrated_tail_matches_incomplete_gamma() {
        // int_x^inf exp(-(u/l)^b) du = (l/b) Gamma(1/b) Q(1/b, (x/l)^b)
        for &(shape, scale) in &[(0.5, 1.0), (0.3, 2.0), (0.8, 0.5)] {
            let d = HeavyTailDist::weibull(shape, scale).unwrap();
            for &x in &[0.0, 0.1, 1.0, 5.0, 40.0] {
                let s: f64 = shape;
                let q = if x == 0.0 { 1.0 } else { gamma_ur(1.0 / s, (x / scale).powf(s)) };
                let exact = scale / s * gamma(1.0 / s) * q;
                let got = d.integrated_tail(x);
                assert!(rel(got, exact.min(1.0)) < 1e-8, "shape {shape} x {x}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn lognormal_integrated_tail_matches_closed_form() {
        // E(X - x)^+ = e^{mu + s^2/2} Phibar((ln x - mu - s^2)/s) - x Phibar((ln x - mu)/s)
        for &(mu, s) in &[(0.0, 1.0), (-1.0, 0.5), (0.5, 1.5)] {
            let d = HeavyTailDist::lognormal(mu, s).unwrap();
            for &x in &[0.5, 1.0, 3.0, 20.0] {
                let lx: f64 = f64::ln(x);
                let exact = (mu + 0.5 * s * s).exp() * normal_tail((lx - mu - s * s) / s)
                    - x * normal_tail((lx - mu) / s);
                let got = d.integrated_tail(x);
                assert!(rel(got, exact.min(1.0)) < 1e-8, "mu {mu} s {s} x {x}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn integrated_tail_below_support_is_capped() {
        let d = HeavyTailDist::pareto(2.5, 1.0).unwrap();
        assert_eq!(d.integrated_tail(-3.0), 1.0);
        let e = HeavyTailDist::deterministic(0.25).unwrap();
        assert_eq!(e.integrated_tail(0.0), 0.25);
        assert_eq!(e.integrated_tail(1.0), 0.0);
    }

    #[test]
    fn shifted_pareto_keeps_tail_constant() {
        let d = HeavyTailDist::shifted_pareto(2.5, 0.3, 0.25).unwrap();
        assert!((d.mean() - 0.25).abs() < 1e-15);
        let base = HeavyTailDist::pareto(2.5, 0.3).unwrap();
        assert!((d.tail(1e8) / base.tail(1e8) - 1.0).abs() < 1e-6);
        // integrated tail against quadrature of the tail
        let q = quad::integrate_to_infinity(|u| d.tail(u), 2.0, 1.0, 1e-12, |u| u > 1e12, 100);
        assert!(rel(d.integrated_tail(2.0), q.value) < 1e-8);
    }

    #[test]
    fn means_match_samples() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for d in [
            HeavyTailDist::weibull(0.5, 1.0).unwrap(),
            HeavyTailDist::lognormal(0.0, 0.5).unwrap(),
            HeavyTailDist::exponential(2.0).unwrap(),
        ] {
            let n = 200_000;
            let m: f64 = (0..n).map(|_| d.sample(&mut rng)).sum::<f64>() / n as f64;
            assert!(rel(m, d.mean()) < 0.03, "{d:?}: {m}");
        }
    }

    #[test]
    fn classification_table() {
        let p = HeavyTailDist::pareto(2.5, 1.0).unwrap().classify();
        assert_eq!(p.tail_condition_dominated, Some(true));
        assert_eq!(p.tail_condition_sqrt_log, Some(false));
        let w = HeavyTailDist::weibull(0.5, 1.0).unwrap().classify();
        assert!(w.f_subexponential && w.fs_subexponential);
        assert_eq!(w.tail_condition_dominated, Some(false));
        let e = HeavyTailDist::exponential(1.0).unwrap().classify();
        assert!(!e.f_subexponential && e.tail_condition_sqrt_log.is_none());
    }

    #[test]
    fn tail_weights() {
        let a = HeavyTailDist::pareto(2.5, 0.3).unwrap();
        let b = HeavyTailDist::pareto(2.5, 0.15).unwrap();
        assert!((b.tail_weight_against(&a).unwrap() - 0.5f64.powf(2.5)).abs() < 1e-15);
        let e = HeavyTailDist::exponential(2.0).unwrap();
        assert_eq!(e.tail_weight_against(&a), Some(0.0));
    }

    proptest::proptest! {
        #[test]
        fn pareto_quadrature_agrees(k in 0u32..=10, alpha in 1.2f64..4.0) {
            let d = HeavyTailDist::pareto(alpha, 1.0).unwrap();
            let x = f64::from(1u32 << k);
            let q = quad::integrate_to_infinity(|u| d.tail(u), x, x, 1e-12, |u| d.tail(u) < 1e-16 * d.tail(x), 200);
            proptest::prop_assert!(rel(q.value, d.integrated_tail(x)) < 1e-8 || d.integrated_tail(x) == 1.0);
        }

        #[test]
        fn tail_monotone_and_bounded(x in 0.0f64..50.0, dx in 0.0f64..10.0) {
            for d in [
                HeavyTailDist::pareto(2.5, 1.0).unwrap(),
                HeavyTailDist::weibull(0.5, 1.0).unwrap(),
                HeavyTailDist::lognormal(0.0, 1.0).unwrap(),
                HeavyTailDist::exponential(1.0).unwrap(),
            ] {
                let (a, b) = (d.tail(x), d.tail(x + dx));
                proptest::prop_assert!((0.0..=1.0).contains(&a) && b <= a);
                let (ia, ib) = (d.integrated_tail(x), d.integrated_tail(x + dx));
                proptest::prop_assert!(ib <= ia + 1e-12 && ia <= 1.0);
            }
        }
    }
}
