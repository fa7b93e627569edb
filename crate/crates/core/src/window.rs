//! Finite realizations `N_[m,n]` of a marked arrival process.
//!
//! Epochs are stored as an origin `T_m` and the gaps `tau_m .. tau_{n-1}`.
//! Absolute epochs are the left fold `origin + gap + gap + ...`, so a
//! sub-window that starts at the folded `T_l` reproduces every later epoch
//! bit for bit. Kernels work in coordinates relative to `T_n`, which makes
//! the maximal dater exactly invariant under shifts of the origin.

use crate::kernel::ModelError;

#[derive(Debug, Clone, PartialEq)]
pub struct RealizedWindow<D> {
    first: i64,
    origin: f64,
    gaps: Vec<f64>,
    driving: Vec<D>,
}

impl<D: Clone> RealizedWindow<D> {
    /// Window over customers `first ..= first + driving.len() - 1`.
    pub fn new(first: i64, origin: f64, gaps: Vec<f64>, driving: Vec<D>) -> Result<Self, ModelError> {
        if driving.is_empty() {
            return Err(ModelError::EmptyWindow);
        }
        if gaps.len() + 1 != driving.len() {
            return Err(ModelError::ShapeMismatch(format!(
                "{} driving variables need {} gaps, got {}",
                driving.len(),
                driving.len() - 1,
                gaps.len()
            )));
        }
        if !origin.is_finite() {
            return Err(ModelError::InvalidEpochs(format!("origin {origin} is not finite")));
        }
        if let Some((k, g)) = gaps.iter().enumerate().find(|(_, g)| !(g.is_finite() && **g >= 0.0)) {
            return Err(ModelError::InvalidEpochs(format!("gap {k} is {g}")));
        }
        Ok(RealizedWindow { first, origin, gaps, driving })
    }

    /// Window with the given nondecreasing epochs.
    pub fn from_epochs(first: i64, epochs: &[f64], driving: Vec<D>) -> Result<Self, ModelError> {
        if epochs.len() != driving.len() {
            return Err(ModelError::ShapeMismatch(format!(
                "{} epochs for {} driving variables",
                epochs.len(),
                driving.len()
            )));
        }
        if epochs.is_empty() {
            return Err(ModelError::EmptyWindow);
        }
        let gaps = epochs.windows(2).map(|p| p[1] - p[0]).collect();
        Self::new(first, epochs[0], gaps, driving)
    }

    /// All epochs at zero: the input `Q` used for saturation.
    pub fn saturated(first: i64, driving: Vec<D>) -> Result<Self, ModelError> {
        let gaps = vec![0.0; driving.len().saturating_sub(1)];
        Self::new(first, 0.0, gaps, driving)
    }

    pub fn len(&self) -> usize {
        self.driving.len()
    }

    pub fn is_empty(&self) -> bool {
        self.driving.is_empty()
    }

    pub fn first(&self) -> i64 {
        self.first
    }

    pub fn last(&self) -> i64 {
        self.first + self.driving.len() as i64 - 1
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn driving(&self) -> &[D] {
        &self.driving
    }

    fn offset(&self, index: i64) -> usize {
        assert!(index >= self.first && index <= self.last(), "index {index} outside window");
        (index - self.first) as usize
    }

    pub fn driving_at(&self, index: i64) -> &D {
        &self.driving[self.offset(index)]
    }

    /// `T_index` by left fold from the origin.
    pub fn epoch(&self, index: i64) -> f64 {
        let k = self.offset(index);
        self.gaps[..k].iter().fold(self.origin, |t, g| t + g)
    }

    pub fn epochs(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        let mut t = self.origin;
        out.push(t);
        for g in &self.gaps {
            t += g;
            out.push(t);
        }
        out
    }

    pub fn last_epoch(&self) -> f64 {
        self.gaps.iter().fold(self.origin, |t, g| t + g)
    }

    /// `T_l - T_n` for each customer, accumulated backward from zero.
    pub fn relative_epochs(&self) -> Vec<f64> {
        let mut rel = vec![0.0; self.len()];
        for k in (0..self.gaps.len()).rev() {
            rel[k] = rel[k + 1] - self.gaps[k];
        }
        rel
    }

    /// `N_[m,n]` restricted to `[m, n]`.
    pub fn sub(&self, m: i64, n: i64) -> Self {
        assert!(m <= n, "empty sub-window [{m}, {n}]");
        let (a, b) = (self.offset(m), self.offset(n));
        RealizedWindow {
            first: m,
            origin: self.epoch(m),
            gaps: self.gaps[a..b].to_vec(),
            driving: self.driving[a..=b].to_vec(),
        }
    }

    /// Every epoch moved by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        RealizedWindow { origin: self.origin + c, ..self.clone() }
    }

    /// Same customers with the gap after `index` replaced.
    pub fn with_gap(&self, index: i64, gap: f64) -> Result<Self, ModelError> {
        let k = self.offset(index);
        let mut gaps = self.gaps.clone();
        if k >= gaps.len() {
            return Err(ModelError::ShapeMismatch(format!("no gap after last customer {index}")));
        }
        gaps[k] = gap;
        Self::new(self.first, self.origin, gaps, self.driving.clone())
    }

    /// Same driving variables, new epochs.
    pub fn with_epochs(&self, epochs: &[f64]) -> Result<Self, ModelError> {
        Self::from_epochs(self.first, epochs, self.driving.clone())
    }

    /// Window re-labelled so that it ends at customer `last`.
    pub fn relabelled(&self, last: i64) -> Self {
        RealizedWindow { first: last - self.len() as i64 + 1, ..self.clone() }
    }

    /// Same driving variables with every epoch collapsed onto `T_n`.
    pub fn collapsed(&self) -> Self {
        RealizedWindow {
            first: self.first,
            origin: self.last_epoch(),
            gaps: vec![0.0; self.gaps.len()],
            driving: self.driving.clone(),
        }
    }
}
