//! Property checks of the four network axioms and of the dater lemmas on
//! finite windows.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kernel::{sample_window, ModelError, NetworkKernel};
use crate::rng::RngStream;
use crate::window::RealizedWindow;

/// Comparison slack for inequalities.
pub fn tolerance(values: &[f64]) -> f64 {
    1e-9 * values.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub passed: bool,
    pub checked: u64,
    pub counterexample: Option<String>,
}

impl Default for CheckOutcome {
    fn default() -> Self {
        CheckOutcome { passed: true, checked: 0, counterexample: None }
    }
}

impl CheckOutcome {
    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.passed = false;
            if self.counterexample.is_none() {
                self.counterexample = Some(describe());
            }
        }
    }

    fn merge(&mut self, other: &CheckOutcome) {
        self.checked += other.checked;
        if !other.passed {
            self.passed = false;
            if self.counterexample.is_none() {
                self.counterexample = other.counterexample.clone();
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub causality: CheckOutcome,
    pub monotonicity: CheckOutcome,
    pub homogeneity: CheckOutcome,
    pub separability: CheckOutcome,
    pub determinism: CheckOutcome,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.causality.passed
            && self.monotonicity.passed
            && self.homogeneity.passed
            && self.separability.passed
            && self.determinism.passed
    }

    fn merge(&mut self, o: &AxiomReport) {
        self.causality.merge(&o.causality);
        self.monotonicity.merge(&o.monotonicity);
        self.homogeneity.merge(&o.homogeneity);
        self.separability.merge(&o.separability);
        self.determinism.merge(&o.determinism);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    /// `Z_[m-1,n] >= Z_[m,n]`.
    pub internal_monotonicity: CheckOutcome,
    /// `Z_[m,n] <= Z_[m,l] + Z_[l+1,n]`.
    pub subadditivity: CheckOutcome,
    /// `Z_[m,n] <= Z_[l+1,n] + (Z_[m,l] - tau_l)^+`.
    pub split_bound: CheckOutcome,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.internal_monotonicity.passed && self.subadditivity.passed && self.split_bound.passed
    }

    fn merge(&mut self, o: &LemmaReport) {
        self.internal_monotonicity.merge(&o.internal_monotonicity);
        self.subadditivity.merge(&o.subadditivity);
        self.split_bound.merge(&o.split_bound);
    }
}

/// Perturbations applied to one window.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationPlan {
    /// Nonnegative per-customer delays; epochs become the running maximum
    /// of `T_l + delay_l`.
    pub delays: Vec<Vec<f64>>,
    /// Shifts `c` for homogeneity.
    pub shifts: Vec<f64>,
    /// Split offsets `l` (relative to the first customer) for separability.
    pub splits: Vec<usize>,
}

impl PerturbationPlan {
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R, count: usize) -> Self {
        let delays = (0..count)
            .map(|i| {
                let p = (i + 1) as f64 / (count + 1) as f64;
                (0..len)
                    .map(|_| if rng.gen::<f64>() < p { -rng.gen::<f64>().ln() * 2.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        let mut shifts: Vec<f64> = (0..count).map(|_| (rng.gen::<f64>() - 0.5) * 200.0).collect();
        shifts.push(1e-7);
        shifts.push(-12_345.678);
        PerturbationPlan { delays, shifts, splits: (0..len.saturating_sub(1)).collect() }
    }
}

fn at(w: &RealizedWindow<impl Clone>, offset: usize) -> i64 {
    w.first() + offset as i64
}

/// Checks causality, external monotonicity, homogeneity and separability
/// of `kernel` on `window` under the given perturbations.
pub fn verify_axioms<K: NetworkKernel>(
    kernel: &K,
    window: &RealizedWindow<K::Driving>,
    plan: &PerturbationPlan,
) -> Result<AxiomReport, ModelError> {
    let mut rep = AxiomReport::default();
    let tn = window.last_epoch();
    let z = kernel.maximal_dater(window)?;
    let x = tn + z;
    let len = window.len();

    let z_again = kernel.maximal_dater(window)?;
    rep.determinism.record(z.to_bits() == z_again.to_bits(), || format!("dater {z} then {z_again}"));

    rep.causality.record(x >= tn - tolerance(&[x, tn]), || format!("X = {x} < T_n = {tn} (len {len})"));

    let epochs = window.epochs();
    for delay in &plan.delays {
        let mut moved = Vec::with_capacity(len);
        let mut run = f64::NEG_INFINITY;
        for (t, d) in epochs.iter().zip(delay) {
            run = run.max(t + d);
            moved.push(run);
        }
        let w2 = window.with_epochs(&moved)?;
        let x2 = kernel.last_activity(&w2)?;
        rep.monotonicity.record(x2 >= x - tolerance(&[x, x2]), || {
            format!("delaying arrivals lowered X from {x} to {x2} (len {len})")
        });
    }

    for &c in &plan.shifts {
        let w2 = window.shifted(c);
        let z2 = kernel.maximal_dater(&w2)?;
        let x2 = w2.last_epoch() + z2;
        let ok = z2.to_bits() == z.to_bits() && (x2 - (x + c)).abs() <= tolerance(&[x, x2, c]);
        rep.homogeneity.record(ok, || format!("shift {c}: Z {z} became {z2}, X(N+c) = {x2}, X(N) + c = {}", x + c));
    }

    for &l in plan.splits.iter().filter(|l| **l + 1 < len) {
        let (m, n, li) = (window.first(), window.last(), at(window, l));
        let head = window.sub(m, li);
        let x_head = kernel.last_activity(&head)?;
        let t_next = window.epoch(li + 1);
        // Natural premise, if it holds.
        if x_head <= t_next {
            let xf = kernel.last_activity(window)?;
            let xt = kernel.last_activity(&window.sub(li + 1, n))?;
            // Near-ties can round differently in relative coordinates.
            rep.separability.record((xf - xt).abs() <= tolerance(&[xf, xt]), || {
                format!("split at {li}: X_[m,n] = {xf} but X_[l+1,n] = {xt}")
            });
        }
        // Forced premise: open a gap after the idle point.
        let gap = (x_head - window.epoch(li) + 1.0).max(window.gaps()[l]);
        let w2 = window.with_gap(li, gap)?;
        let h2 = kernel.last_activity(&w2.sub(m, li))?;
        if h2 <= w2.epoch(li + 1) {
            let xf = kernel.last_activity(&w2)?;
            let xt = kernel.last_activity(&w2.sub(li + 1, n))?;
            rep.separability.record(xf.to_bits() == xt.to_bits(), || {
                format!("widened split at {li}: X_[m,n] = {xf} but X_[l+1,n] = {xt}")
            });
        }
    }
    Ok(rep)
}

/// Checks internal monotonicity, subadditivity and the split bound of the
/// maximal dater on `window`, at `split` or at every split.
pub fn verify_dater_lemmas<K: NetworkKernel>(
    kernel: &K,
    window: &RealizedWindow<K::Driving>,
    split: Option<usize>,
) -> Result<LemmaReport, ModelError> {
    let mut rep = LemmaReport::default();
    let (m, n) = (window.first(), window.last());
    let len = window.len();

    // suffix[k] = Z_[m+k, n]
    let mut suffix = Vec::with_capacity(len);
    for k in 0..len {
        suffix.push(kernel.maximal_dater(&window.sub(at(window, k), n))?);
    }
    for k in 1..len {
        let (outer, inner) = (suffix[k - 1], suffix[k]);
        rep.internal_monotonicity.record(outer >= inner - tolerance(&[outer, inner]), || {
            format!("Z_[{},{n}] = {outer} < Z_[{},{n}] = {inner}", at(window, k - 1), at(window, k))
        });
    }

    let z = suffix[0];
    let splits: Vec<usize> = match split {
        Some(l) if l + 1 < len => vec![l],
        Some(_) => vec![],
        None => (0..len.saturating_sub(1)).collect(),
    };
    for l in splits {
        let li = at(window, l);
        let head = kernel.maximal_dater(&window.sub(m, li))?;
        let tail = suffix[l + 1];
        let sum = head + tail;
        rep.subadditivity.record(z <= sum + tolerance(&[z, head, tail]), || {
            format!("Z_[m,n] = {z} > Z_[m,{li}] + Z_[{},n] = {head} + {tail}", li + 1)
        });
        let tau = window.gaps()[l];
        let bound = tail + (head - tau).max(0.0);
        rep.split_bound.record(z <= bound + tolerance(&[z, head, tail, tau]), || {
            format!("Z_[m,n] = {z} > Z_[{},n] + (Z_[m,{li}] - tau)^+ = {bound}", li + 1)
        });
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub kernel: String,
    pub windows: u64,
    pub axioms: AxiomReport,
    pub lemmas: LemmaReport,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.axioms.passed() && self.lemmas.passed()
    }
}

/// Random windows of 1 to `max_len` customers, each with its own plan.
pub fn run_axiom_suite<K: NetworkKernel>(
    kernel: &K,
    windows: u64,
    max_len: usize,
    seed: u64,
) -> Result<SuiteReport, ModelError> {
    let max_len = max_len.max(1);
    let results = (0..windows)
        .into_par_iter()
        .map(|i| {
            let stream = RngStream::new(seed, i);
            let mut aux = stream.auxiliary();
            let len = aux.gen_range(1..=max_len);
            let origin = (aux.gen::<f64>() - 0.5) * 1000.0;
            let w = sample_window(kernel, -(len as i64) + 1, len, stream)?.shifted(origin);
            let plan = PerturbationPlan::random(len, &mut aux, 10);
            Ok((verify_axioms(kernel, &w, &plan)?, verify_dater_lemmas(kernel, &w, None)?))
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    let mut axioms = AxiomReport::default();
    let mut lemmas = LemmaReport::default();
    for (a, l) in &results {
        axioms.merge(a);
        lemmas.merge(l);
    }
    Ok(SuiteReport { kernel: kernel.name().to_string(), windows, axioms, lemmas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{ArrivalSpec, HeavyTailDist};
    use crate::models::{Coupling, NonHomogeneousFixture, SingleServer, Tandem};

    fn tandem() -> Tandem {
        Tandem::new(
            HeavyTailDist::deterministic(2.0).unwrap(),
            HeavyTailDist::deterministic(1.0).unwrap(),
            Coupling::Independent,
            ArrivalSpec::deterministic(1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn single_server_lemma_example() {
        let k = SingleServer::new(HeavyTailDist::exponential(1.0).unwrap(), ArrivalSpec::deterministic(1.0).unwrap())
            .unwrap();
        let w = RealizedWindow::new(-1, -1.0, vec![1.0], vec![3.0, 1.0]).unwrap();
        // Z_[-1,0] = 3 <= Z_[0,0] + (Z_[-1,-1] - tau_-1)^+ = 1 + 2
        let r = verify_dater_lemmas(&k, &w, Some(0)).unwrap();
        assert!(r.passed());
        assert_eq!(r.split_bound.checked, 1);
    }

    #[test]
    fn tandem_subadditivity_example() {
        let w = RealizedWindow::new(-1, -1.0, vec![1.0], vec![[2.0, 1.0], [1.0, 3.0]]).unwrap();
        let r = verify_dater_lemmas(&tandem(), &w, Some(0)).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn forced_separability_tandem() {
        let w = RealizedWindow::new(0, 0.0, vec![0.5, 0.5], vec![[2.0, 1.0], [1.0, 3.0], [0.5, 0.5]]).unwrap();
        let plan = PerturbationPlan { delays: vec![], shifts: vec![], splits: vec![0, 1] };
        let r = verify_axioms(&tandem(), &w, &plan).unwrap();
        assert!(r.separability.passed && r.separability.checked >= 2);
    }

    #[test]
    fn fixture_breaks_homogeneity() {
        let k = NonHomogeneousFixture::new(
            HeavyTailDist::exponential(1.0).unwrap(),
            ArrivalSpec::deterministic(1.0).unwrap(),
        )
        .unwrap();
        let r = run_axiom_suite(&k, 20, 8, 1).unwrap();
        assert!(!r.axioms.homogeneity.passed);
        assert!(r.axioms.homogeneity.counterexample.is_some());
    }

    #[test]
    fn suite_passes_on_tandem() {
        let k = Tandem::new(
            HeavyTailDist::pareto(2.5, 0.3).unwrap(),
            HeavyTailDist::pareto(2.5, 0.15).unwrap(),
            Coupling::Independent,
            ArrivalSpec::exponential(1.0).unwrap(),
        )
        .unwrap();
        let r = run_axiom_suite(&k, 50, 16, 3).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
