//! Tail asymptotes of the stationary maximal dater and of related
//! quantities under subexponential service tails.
//!
//! Every formula has the shape `constant * F^s(point)`. Constants are
//! formed in exact rational arithmetic from the (exactly representable)
//! input floats and rounded once.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{normal_tail, ArrivalSpec, HeavyTailDist};
use crate::models::{Coupling, ModelSpec};
use crate::quad;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticsError {
    #[error("unstable: arrival spacing {a} does not exceed service rate {b}")]
    Unstable { a: f64, b: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("service variance is infinite")]
    InfiniteVariance,
    #[error("the equal-means tandem asymptote needs independent services")]
    CoupledServices,
    #[error("cannot derive asymptote: {0}")]
    Unsupported(String),
}

fn exact(x: f64) -> Result<BigRational, AsymptoticsError> {
    BigRational::from_float(x).ok_or_else(|| AsymptoticsError::InvalidParameter(format!("{x} is not finite")))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn check_weight(d: f64) -> Result<(), AsymptoticsError> {
    if d.is_finite() && d >= 0.0 {
        Ok(())
    } else {
        Err(AsymptoticsError::InvalidParameter(format!("tail weight must be nonnegative, got {d}")))
    }
}

/// `d / (a - b)` exactly; `a > b` required.
fn weight_over_gap(d: f64, a: f64, b: f64) -> Result<BigRational, AsymptoticsError> {
    check_weight(d)?;
    let gap = exact(a)? - exact(b)?;
    if gap <= BigRational::zero() {
        return Err(AsymptoticsError::Unstable { a, b });
    }
    Ok(exact(d)? / gap)
}

/// Constant of the single-server asymptote `d / (a - b)`.
pub fn single_server_constant(d: f64, a: f64, b: f64) -> Result<f64, AsymptoticsError> {
    Ok(to_f64(&weight_over_gap(d, a, b)?))
}

/// `P(Z > x) ~ (d / (a - b)) F^s(x)` for the GI/GI/1 queue.
pub fn veraverbeke(d: f64, a: f64, b: f64, reference: &HeavyTailDist, x: f64) -> Result<f64, AsymptoticsError> {
    Ok(single_server_constant(d, a, b)? * reference.integrated_tail(x))
}

/// Upper and lower network constants, with their exact ordering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConstants {
    /// `sum_j d_j / (a - b_j)`.
    pub lower: f64,
    /// `d / (a - gamma(0))`.
    pub upper: f64,
    /// `lower <= upper`, decided in exact arithmetic.
    pub ordered: bool,
}

pub fn network_constants(
    d_upper: f64,
    a: f64,
    gamma0: f64,
    d_lower: &[f64],
    b: &[f64],
) -> Result<NetworkConstants, AsymptoticsError> {
    if d_lower.len() != b.len() {
        return Err(AsymptoticsError::InvalidParameter("one tail weight per station is required".into()));
    }
    let up = weight_over_gap(d_upper, a, gamma0)?;
    let mut lo = BigRational::zero();
    for (dj, bj) in d_lower.iter().zip(b) {
        lo += weight_over_gap(*dj, a, *bj)?;
    }
    Ok(NetworkConstants { lower: to_f64(&lo), upper: to_f64(&up), ordered: lo <= up })
}

/// Upper asymptote `(d / (a - gamma(0))) F^s(x)`.
pub fn network_upper(d: f64, a: f64, gamma0: f64, reference: &HeavyTailDist, x: f64) -> Result<f64, AsymptoticsError> {
    Ok(to_f64(&weight_over_gap(d, a, gamma0)?) * reference.integrated_tail(x))
}

/// Lower asymptote `(sum_j d_j / (a - b_j)) F^s(x)`.
pub fn network_lower(d: &[f64], a: f64, b: &[f64], reference: &HeavyTailDist, x: f64) -> Result<f64, AsymptoticsError> {
    if d.len() != b.len() || d.is_empty() {
        return Err(AsymptoticsError::InvalidParameter("one tail weight per station is required".into()));
    }
    let mut c = BigRational::zero();
    for (dj, bj) in d.iter().zip(b) {
        c += weight_over_gap(*dj, a, *bj)?;
    }
    Ok(to_f64(&c) * reference.integrated_tail(x))
}

/// Tail weight of a compound per-station workload: `l * E nu`.
pub fn compound_weight(l: f64, mean_visits: f64) -> Result<f64, AsymptoticsError> {
    check_weight(l)?;
    check_weight(mean_visits)?;
    Ok(to_f64(&(exact(l)? * exact(mean_visits)?)))
}

/// Constant of the tandem response-time asymptote
/// `d1 / (a - max(b1, b2)) + d2 / (a - b2)`.
pub fn tandem_response_constant(d1: f64, d2: f64, a: f64, b1: f64, b2: f64) -> Result<f64, AsymptoticsError> {
    let b = b1.max(b2);
    Ok(to_f64(&(weight_over_gap(d1, a, b)? + weight_over_gap(d2, a, b2)?)))
}

pub fn tandem_response(
    d1: f64,
    d2: f64,
    a: f64,
    b1: f64,
    b2: f64,
    reference: &HeavyTailDist,
    x: f64,
) -> Result<f64, AsymptoticsError> {
    Ok(tandem_response_constant(d1, d2, a, b1, b2)? * reference.integrated_tail(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum W2Case {
    /// `b1 > b2`.
    FasterSecond,
    /// `b1 = b2`.
    EqualMeans,
    /// `b1 < b2`.
    SlowerSecond,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct W2Asymptote {
    pub value: f64,
    pub case: W2Case,
    pub certified: bool,
    /// Quadrature error of the Gaussian-correction integral (equal means).
    pub integral: Option<f64>,
    pub integral_error: Option<f64>,
}

/// Parameters of the second-station waiting-time asymptote.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct W2Params {
    pub d1: f64,
    pub d2: f64,
    pub a: f64,
    pub b1: f64,
    pub b2: f64,
    /// Service variances `v1^2`, `v2^2`; only used when `b1 = b2`.
    pub var1: Option<f64>,
    pub var2: Option<f64>,
    pub coupling: Coupling,
}

/// `2 d1 int_0^inf F(x + y(a - b)) Phibar(x / (v sqrt y)) dy`.
pub fn w2_gaussian_integral(
    d1: f64,
    a: f64,
    b: f64,
    v: f64,
    reference: &HeavyTailDist,
    x: f64,
    rel_tol: f64,
) -> Result<quad::Quadrature, AsymptoticsError> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(AsymptoticsError::InvalidParameter(format!("v must be positive, got {v}")));
    }
    if x <= 0.0 {
        return Err(AsymptoticsError::InvalidParameter(format!("x must be positive, got {x}")));
    }
    let c = a - b;
    if c <= 0.0 {
        return Err(AsymptoticsError::Unstable { a, b });
    }
    // y = s t with s = (x / v)^2 puts the Gaussian factor at Phibar(1 / sqrt t).
    let s = (x / v) * (x / v);
    let fx = reference.tail(x);
    let f = |t: f64| {
        if t <= 0.0 {
            0.0
        } else {
            reference.tail(x + s * c * t) * normal_tail(1.0 / t.sqrt())
        }
    };
    // Pieces [0,1], [1,3], [3,7], ... ; 15 pieces reach t = 2^15 - 1 > 1e4.
    let q = quad::integrate_to_infinity(
        f,
        0.0,
        1.0,
        rel_tol,
        |t| t > 1e4 || reference.tail(x + s * c * t) < 1e-14 * fx,
        15,
    );
    let scale = 2.0 * d1 * s;
    Ok(quad::Quadrature { value: scale * q.value, error: scale * q.error })
}

/// Asymptote of the stationary waiting time at the second station.
pub fn tandem_w2(p: &W2Params, reference: &HeavyTailDist, x: f64) -> Result<W2Asymptote, AsymptoticsError> {
    check_weight(p.d1)?;
    check_weight(p.d2)?;
    let b = p.b1.max(p.b2);
    if p.a <= b {
        return Err(AsymptoticsError::Unstable { a: p.a, b });
    }
    let class = reference.classify();
    let fs = |y: f64| reference.integrated_tail(y);
    let second = to_f64(&weight_over_gap(p.d2, p.a, p.b2)?);
    if p.b1 > p.b2 {
        Ok(W2Asymptote {
            value: second * fs(x),
            case: W2Case::FasterSecond,
            certified: class.fs_subexponential && p.d2 > 0.0,
            integral: None,
            integral_error: None,
        })
    } else if p.b1 == p.b2 {
        if p.coupling != Coupling::Independent {
            return Err(AsymptoticsError::CoupledServices);
        }
        let v1 = p.var1.ok_or(AsymptoticsError::InfiniteVariance)?;
        let v2 = p.var2.ok_or(AsymptoticsError::InfiniteVariance)?;
        let v = (v1 + v2).sqrt();
        let q = w2_gaussian_integral(p.d1, p.a, b, v, reference, x, 1e-8)?;
        Ok(W2Asymptote {
            value: q.value + second * fs(x),
            case: W2Case::EqualMeans,
            certified: class.fs_subexponential && (p.d2 > 0.0 || class.tail_condition_sqrt_log == Some(true)),
            integral: Some(q.value),
            integral_error: Some(q.error),
        })
    } else {
        let first = to_f64(&weight_over_gap(p.d1, p.a, p.b2)?);
        // x (a - b1) / (b2 - b1), formed exactly.
        let point = to_f64(&(exact(x)? * (exact(p.a)? - exact(p.b1)?) / (exact(p.b2)? - exact(p.b1)?)));
        Ok(W2Asymptote {
            value: second * fs(x) + first * fs(point),
            case: W2Case::SlowerSecond,
            certified: class.fs_subexponential && (p.d2 > 0.0 || class.tail_condition_dominated == Some(true)),
            integral: None,
            integral_error: None,
        })
    }
}

/// `P(Z > x) ~ (1/a) F^s(x) + (1/(m a - b) - 1/a)^+ F^s(b x / (b - (m-1) a))`
/// for the D/GI/m queue with arrival spacing `a`.
pub fn multiserver_tail(a: f64, b: f64, m: usize, reference: &HeavyTailDist, x: f64) -> Result<f64, AsymptoticsError> {
    if m == 0 {
        return Err(AsymptoticsError::InvalidParameter("m must be positive".into()));
    }
    if !(a > 0.0 && b > 0.0) {
        return Err(AsymptoticsError::InvalidParameter("a and b must be positive".into()));
    }
    let (ea, eb) = (exact(a)?, exact(b)?);
    let em = BigRational::from_integer(BigInt::from(m));
    let cap = &em * &ea - &eb;
    if cap <= BigRational::zero() {
        return Err(AsymptoticsError::Unstable { a: m as f64 * a, b });
    }
    let inv_a = ea.recip();
    let mut value = to_f64(&inv_a) * reference.integrated_tail(x);
    let extra = cap.recip() - &inv_a;
    if extra > BigRational::zero() {
        // Positive extra forces b > (m - 1) a, so the point is finite.
        let denom = &eb - (&em - BigRational::from_integer(BigInt::from(1))) * &ea;
        let point = to_f64(&(&eb * exact(x)? / denom));
        value += to_f64(&extra) * reference.integrated_tail(point);
    }
    Ok(value)
}

/// A formula together with the parameters it is evaluated at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "theorem", rename_all = "snake_case", deny_unknown_fields)]
pub enum AsymptoteSpec {
    SingleServer { d: f64, a: f64, b: f64, reference: HeavyTailDist },
    NetworkUpper { d: f64, a: f64, gamma0: f64, reference: HeavyTailDist },
    NetworkLower { d: Vec<f64>, a: f64, b: Vec<f64>, reference: HeavyTailDist },
    TandemResponse { d1: f64, d2: f64, a: f64, b1: f64, b2: f64, reference: HeavyTailDist },
    TandemW2 { params: W2Params, reference: HeavyTailDist },
    Multiserver { a: f64, b: f64, m: usize, reference: HeavyTailDist },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteValue {
    pub value: f64,
    pub certified: bool,
}

fn require_deterministic(arrivals: &ArrivalSpec, what: &str) -> Result<(), AsymptoticsError> {
    if arrivals.is_deterministic() {
        Ok(())
    } else {
        Err(AsymptoticsError::Unsupported(format!("{what} asymptote needs deterministic arrivals")))
    }
}

fn weight(dist: &HeavyTailDist, reference: &HeavyTailDist) -> Result<f64, AsymptoticsError> {
    dist.tail_weight_against(reference).ok_or_else(|| {
        AsymptoticsError::Unsupported(format!(
            "tail weight of {} against {} is not known; give the asymptote explicitly",
            dist.family_name(),
            reference.family_name()
        ))
    })
}

/// The heavier of two laws, preferring the first on ties.
fn heavier(a: &HeavyTailDist, b: &HeavyTailDist) -> HeavyTailDist {
    match a.tail_weight_against(b) {
        Some(w) if w == 0.0 => *b,
        _ => *a,
    }
}

impl AsymptoteSpec {
    /// Default formula for the response time of a model.
    pub fn for_model(model: &ModelSpec) -> Result<Self, AsymptoticsError> {
        let a = model.arrivals().mean();
        match model {
            ModelSpec::SingleServer { service, .. } => {
                Ok(AsymptoteSpec::SingleServer { d: 1.0, a, b: service.mean(), reference: *service })
            }
            ModelSpec::Tandem { service1, service2, .. } => {
                let reference = heavier(service1, service2);
                Ok(AsymptoteSpec::TandemResponse {
                    d1: weight(service1, &reference)?,
                    d2: weight(service2, &reference)?,
                    a,
                    b1: service1.mean(),
                    b2: service2.mean(),
                    reference,
                })
            }
            ModelSpec::Multiserver { servers, service, arrivals } => {
                require_deterministic(arrivals, "multiserver")?;
                Ok(AsymptoteSpec::Multiserver { a, b: service.mean(), m: *servers, reference: *service })
            }
            ModelSpec::Jackson { .. } => Err(AsymptoticsError::Unsupported(
                "networks with feedback only have bounds; give a network_lower or network_upper spec".into(),
            )),
            ModelSpec::FixtureNonHomogeneous { .. } => {
                Err(AsymptoticsError::Unsupported("fixture kernels have no asymptote".into()))
            }
        }
    }

    /// Second-station waiting-time formula of a tandem model.
    pub fn w2_for_model(model: &ModelSpec) -> Result<Self, AsymptoticsError> {
        match model {
            ModelSpec::Tandem { service1, service2, coupling, arrivals } => {
                let reference = heavier(service1, service2);
                Ok(AsymptoteSpec::TandemW2 {
                    params: W2Params {
                        d1: weight(service1, &reference)?,
                        d2: weight(service2, &reference)?,
                        a: arrivals.mean(),
                        b1: service1.mean(),
                        b2: service2.mean(),
                        var1: service1.variance(),
                        var2: service2.variance(),
                        coupling: *coupling,
                    },
                    reference,
                })
            }
            _ => Err(AsymptoticsError::Unsupported("second-station waiting time needs a tandem model".into())),
        }
    }

    pub fn reference(&self) -> &HeavyTailDist {
        match self {
            AsymptoteSpec::SingleServer { reference, .. }
            | AsymptoteSpec::NetworkUpper { reference, .. }
            | AsymptoteSpec::NetworkLower { reference, .. }
            | AsymptoteSpec::TandemResponse { reference, .. }
            | AsymptoteSpec::TandemW2 { reference, .. }
            | AsymptoteSpec::Multiserver { reference, .. } => reference,
        }
    }

    pub fn evaluate(&self, x: f64) -> Result<AsymptoteValue, AsymptoticsError> {
        let subexp = self.reference().classify().fs_subexponential;
        match self {
            AsymptoteSpec::SingleServer { d, a, b, reference } => Ok(AsymptoteValue {
                value: veraverbeke(*d, *a, *b, reference, x)?,
                certified: subexp && *d > 0.0,
            }),
            AsymptoteSpec::NetworkUpper { d, a, gamma0, reference } => Ok(AsymptoteValue {
                value: network_upper(*d, *a, *gamma0, reference, x)?,
                certified: subexp && *d > 0.0,
            }),
            AsymptoteSpec::NetworkLower { d, a, b, reference } => Ok(AsymptoteValue {
                value: network_lower(d, *a, b, reference, x)?,
                certified: subexp && d.iter().any(|v| *v > 0.0),
            }),
            AsymptoteSpec::TandemResponse { d1, d2, a, b1, b2, reference } => Ok(AsymptoteValue {
                value: tandem_response(*d1, *d2, *a, *b1, *b2, reference, x)?,
                certified: subexp && (*d1 > 0.0 || *d2 > 0.0),
            }),
            AsymptoteSpec::TandemW2 { params, reference } => {
                let r = tandem_w2(params, reference, x)?;
                Ok(AsymptoteValue { value: r.value, certified: r.certified })
            }
            AsymptoteSpec::Multiserver { a, b, m, reference } => Ok(AsymptoteValue {
                value: multiserver_tail(*a, *b, *m, reference, x)?,
                certified: subexp,
            }),
        }
    }

    /// Largest `x` with formula value at least `level`, by bisection on a
    /// decreasing formula.
    pub fn depth_for_level(&self, level: f64) -> Result<f64, AsymptoticsError> {
        let f = |x: f64| self.evaluate(x).map(|v| v.value);
        let mut lo = self.reference().lower_support().max(1e-9);
        if f(lo)? < level {
            return Err(AsymptoticsError::InvalidParameter(format!("formula is below {level} everywhere")));
        }
        let mut hi = lo.max(1.0);
        while f(hi)? >= level {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return Err(AsymptoticsError::InvalidParameter("formula does not decay".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid)? >= level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pareto(alpha: f64, xm: f64) -> HeavyTailDist {
        HeavyTailDist::pareto(alpha, xm).unwrap()
    }

    #[test]
    fn veraverbeke_example() {
        // d/(a-b) = 2, F^s(x) = x^{-1.5} / 1.5
        let f = pareto(2.5, 1.0);
        let v = veraverbeke(1.0, 1.0, 0.5, &f, 4.0).unwrap();
        assert!((v - 2.0 / 12.0).abs() < 1e-15);
        assert!(matches!(veraverbeke(1.0, 1.0, 1.0, &f, 4.0), Err(AsymptoticsError::Unstable { .. })));
    }

    #[test]
    fn network_constants_example() {
        // d = 2, a = 1, gamma(0) = 0.5; d_j = 1, b = (0.5, 0.25)
        let c = network_constants(2.0, 1.0, 0.5, &[1.0, 1.0], &[0.5, 0.25]).unwrap();
        assert_eq!(c.upper, 4.0);
        assert!((c.lower - 10.0 / 3.0).abs() < 1e-15);
        assert!(c.ordered);
    }

    #[test]
    fn tandem_response_example() {
        let k = tandem_response_constant(1.0, 1.0, 1.0, 0.5, 0.25).unwrap();
        assert!((k - (2.0 + 4.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn w2_case_dispatch() {
        let f = pareto(2.5, 0.3);
        let base = W2Params {
            d1: 1.0,
            d2: 1.0,
            a: 1.0,
            b1: 0.5,
            b2: 0.25,
            var1: None,
            var2: None,
            coupling: Coupling::Independent,
        };
        let r = tandem_w2(&base, &f, 5.0).unwrap();
        assert_eq!(r.case, W2Case::FasterSecond);
        assert!((r.value - f.integrated_tail(5.0) / 0.75).abs() < 1e-15);
        assert!(r.certified);
        let r = tandem_w2(&W2Params { d2: 0.0, ..base }, &f, 5.0).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(!r.certified);

        let slower = W2Params { b1: 0.25, b2: 0.5, d2: 0.0, ..base };
        let r = tandem_w2(&slower, &f, 5.0).unwrap();
        assert_eq!(r.case, W2Case::SlowerSecond);
        // d1/(a-b2) F^s(x (a-b1)/(b2-b1)) = 2 F^s(15)
        assert!((r.value - 2.0 * f.integrated_tail(15.0)).abs() < 1e-15);
        assert!(r.certified, "Pareto satisfies the dominated-variation condition");

        let w = HeavyTailDist::weibull(0.5, 1.0).unwrap();
        let r = tandem_w2(&slower, &w, 5.0).unwrap();
        assert!(!r.certified);

        let equal = W2Params { b1: 0.5, b2: 0.5, var1: Some(0.1), var2: Some(0.1), ..base };
        let r = tandem_w2(&equal, &f, 5.0).unwrap();
        assert_eq!(r.case, W2Case::EqualMeans);
        assert!(r.certified);
        assert!(r.integral.unwrap() > 0.0);
        assert!(matches!(
            tandem_w2(&W2Params { var1: None, ..equal }, &f, 5.0),
            Err(AsymptoticsError::InfiniteVariance)
        ));
        assert!(matches!(
            tandem_w2(&W2Params { coupling: Coupling::Comonotone, ..equal }, &f, 5.0),
            Err(AsymptoticsError::CoupledServices)
        ));
        let r = tandem_w2(&W2Params { d2: 0.0, ..equal }, &f, 5.0).unwrap();
        assert!(!r.certified);
    }

    /// Plain trapezoid on a log grid as an independent check of the
    /// Gaussian-correction integral.
    fn w2_integral_oracle(d1: f64, c: f64, v: f64, f: &HeavyTailDist, x: f64) -> f64 {
        let g = |y: f64| f.tail(x + y * c) * normal_tail(x / (v * y.sqrt()));
        let (lo, hi, n) = (1e-6f64, 1e9f64, 400_000);
        let (ll, lh) = (lo.ln(), hi.ln());
        let h = (lh - ll) / n as f64;
        let mut s = 0.0;
        for i in 0..=n {
            let y = (ll + i as f64 * h).exp();
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            s += w * g(y) * y;
        }
        2.0 * d1 * s * h
    }

    #[test]
    fn gaussian_integral_matches_oracle() {
        let f = pareto(2.5, 0.3);
        for &x in &[2.0, 5.0, 20.0] {
            let q = w2_gaussian_integral(1.0, 1.0, 0.5, 0.6, &f, x, 1e-8).unwrap();
            let o = w2_integral_oracle(1.0, 0.5, 0.6, &f, x);
            assert!(((q.value - o) / o).abs() < 1e-5, "x={x}: {} vs {o}", q.value);
        }
    }

    #[test]
    fn gaussian_integral_is_negligible_deep() {
        // The correction is o(F^s): its ratio to F^s falls with x.
        let f = pareto(2.5, 0.3);
        let ratio = |x: f64| w2_gaussian_integral(1.0, 1.0, 0.5, 0.6, &f, x, 1e-8).unwrap().value / f.integrated_tail(x);
        let r: Vec<f64> = [1.0, 10.0, 100.0, 1000.0].iter().map(|x| ratio(*x)).collect();
        assert!(r.windows(2).all(|p| p[1] < p[0]), "{r:?}");
    }

    #[test]
    fn gaussian_integral_tolerance_is_honest() {
        let f = pareto(2.5, 0.3);
        for &x in &[1.0, 4.0, 30.0] {
            let a = w2_gaussian_integral(1.0, 1.0, 0.5, 0.6, &f, x, 1e-6).unwrap();
            let b = w2_gaussian_integral(1.0, 1.0, 0.5, 0.6, &f, x, 5e-7).unwrap();
            assert!((a.value - b.value).abs() <= a.error.max(1e-6 * a.value), "x={x}");
        }
    }

    #[test]
    fn multiserver_with_one_server_is_veraverbeke() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let f = pareto(2.5, 1.0);
        for _ in 0..100 {
            let a = rng.gen_range(0.5..3.0);
            let b = a * rng.gen_range(0.05..0.95);
            let x = rng.gen_range(0.1..100.0);
            let m1 = multiserver_tail(a, b, 1, &f, x).unwrap();
            let v = veraverbeke(1.0, a, b, &f, x).unwrap();
            assert!(((m1 - v) / v).abs() < 1e-12, "a={a} b={b} x={x}");
        }
    }

    #[test]
    fn multiserver_light_load_is_one_big_job() {
        let f = pareto(2.5, 0.48);
        // m = 2, a = 1, b = 0.8 <= (m - 1) a: only (1/a) F^s(x) remains.
        let v = multiserver_tail(1.0, 0.8, 2, &f, 10.0).unwrap();
        assert_eq!(v, f.integrated_tail(10.0));
        // b = 1.5 > (m - 1) a: second term present.
        let v = multiserver_tail(1.0, 1.5, 2, &f, 10.0).unwrap();
        let extra = (1.0 / 0.5 - 1.0) * f.integrated_tail(1.5 * 10.0 / 0.5);
        assert!((v - f.integrated_tail(10.0) - extra).abs() < 1e-15);
        assert!(multiserver_tail(1.0, 2.0, 2, &f, 10.0).is_err());
    }

    #[test]
    fn compound_weights() {
        assert_eq!(compound_weight(0.5, 4.0).unwrap(), 2.0);
        assert!(compound_weight(-1.0, 1.0).is_err());
    }

    #[test]
    fn depth_for_level_inverts() {
        let spec = AsymptoteSpec::SingleServer { d: 1.0, a: 1.0, b: 0.5, reference: pareto(2.5, 0.3) };
        let x = spec.depth_for_level(1e-3).unwrap();
        // 2 * 0.3^2.5 / 1.5 * x^-1.5 = 1e-3
        let expect = (2.0 * 0.3f64.powf(2.5) / 1.5 / 1e-3).powf(1.0 / 1.5);
        assert!((x - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn spec_json_round_trip() {
        let s = AsymptoteSpec::Multiserver { a: 1.0, b: 0.8, m: 2, reference: pareto(2.5, 0.48) };
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<AsymptoteSpec>(&j).unwrap(), s);
    }

    proptest::proptest! {
        #[test]
        fn lower_never_exceeds_upper(
            a in 0.5f64..5.0,
            fr in proptest::collection::vec(0.01f64..0.99, 1..5),
            dj in proptest::collection::vec(0.0f64..3.0, 5),
        ) {
            let b: Vec<f64> = fr.iter().map(|f| f * a).collect();
            let g = b.iter().copied().fold(0.0, f64::max);
            let d: Vec<f64> = dj[..b.len()].to_vec();
            let total: f64 = d.iter().sum();
            let c = network_constants(total, a, g, &d, &b).unwrap();
            proptest::prop_assert!(c.ordered);
        }
    }
}
