use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{log_sum_exp, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistKind {
    ExactDiscrete,
    Quadrature,
}

/// Where a quadrature distribution came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSource {
    pub label: String,
    pub nodes: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Finite weighted support with log weights.
///
/// Values are strictly increasing and the weights are normalized at
/// construction; exact duplicate values are merged.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<T: Real = f64> {
    values: Vec<T>,
    log_weights: Vec<T>,
    // Residual log-sum-exp of the stored weights after normalization (a few
    // ulps); subtracted from the CGF so that K(0) is exactly zero.
    log_mass: T,
    kind: DistKind,
    source: Option<QuadratureSource>,
}

impl<T: Real> Distribution<T> {
    /// Builds from `(value, log_weight)` pairs. Weights need not be normalized.
    pub fn from_log_weights(points: Vec<(T, T)>, kind: DistKind) -> Result<Self> {
        let mut points: Vec<(T, T)> = points.into_iter().filter(|&(_, lw)| lw > T::neg_infinity()).collect();
        for &(v, lw) in &points {
            if !v.is_finite() || lw.is_nan() || lw == T::infinity() {
                return Err(Error::InvalidDistribution(format!("non-finite point ({v}, {lw})")));
            }
        }
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
        let mut values: Vec<T> = Vec::with_capacity(points.len());
        let mut log_weights: Vec<T> = Vec::with_capacity(points.len());
        for (v, lw) in points {
            match values.last() {
                Some(&last) if last == v => {
                    let w = log_weights.last_mut().expect("paired");
                    *w = crate::real::log_add(*w, lw);
                }
                _ => {
                    values.push(v);
                    log_weights.push(lw);
                }
            }
        }
        if values.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "need at least two distinct support points, got {}",
                values.len()
            )));
        }
        let total = log_sum_exp(&log_weights);
        if !total.is_finite() {
            return Err(Error::InvalidDistribution("total mass is not finite".into()));
        }
        for lw in &mut log_weights {
            *lw = *lw - total;
        }
        let log_mass = log_sum_exp(&log_weights);
        Ok(Self { values, log_weights, log_mass, kind, source: None })
    }

    /// Builds an exact discrete law from `(value, probability)` pairs.
    pub fn from_probs(points: &[(T, T)]) -> Result<Self> {
        if points.iter().any(|&(_, p)| p < T::zero() || !p.is_finite()) {
            return Err(Error::InvalidDistribution("probabilities must be finite and >= 0".into()));
        }
        Self::from_log_weights(points.iter().map(|&(v, p)| (v, p.ln())).collect(), DistKind::ExactDiscrete)
    }

    pub fn bernoulli(p: T) -> Result<Self> {
        if !(p > T::zero() && p < T::one()) {
            return Err(Error::BadParams(format!("bernoulli p = {p} must lie in (0, 1)")));
        }
        Self::from_log_weights(vec![(T::zero(), (-p).ln_1p()), (T::one(), p.ln())], DistKind::ExactDiscrete)
    }

    /// Gaussian law on a uniform grid of `nodes` points spanning `half_width`
    /// standard deviations each side. The trapezoid rule on this grid is
    /// exponentially accurate for Gaussian-weighted integrands.
    pub fn gaussian(mean: T, var: T, nodes: usize, half_width: T) -> Result<Self> {
        if !(var > T::zero()) || nodes < 3 {
            return Err(Error::BadParams(format!(
                "gaussian needs var > 0 and >= 3 nodes (var = {var}, nodes = {nodes})"
            )));
        }
        let sd = var.sqrt();
        let z = uniform_grid(half_width, nodes);
        let pts = z.iter().map(|&z| (mean + sd * z, -z * z * T::lit(0.5))).collect();
        let mut d = Self::from_log_weights(pts, DistKind::Quadrature)?;
        d.source = Some(QuadratureSource {
            label: format!("gaussian(mean={mean}, var={var})"),
            nodes,
            lower: (mean - sd * half_width).as_f64(),
            upper: (mean + sd * half_width).as_f64(),
        });
        Ok(d)
    }

    /// Chi-squared with one degree of freedom, as the square of the Gaussian
    /// grid. Mirror nodes collapse onto the same value and are merged.
    pub fn chi_squared_1(nodes: usize, half_width: T) -> Result<Self> {
        if nodes < 3 {
            return Err(Error::BadParams("chi-squared needs >= 3 nodes".into()));
        }
        let z = uniform_grid(half_width, nodes);
        let pts = z.iter().map(|&z| (z * z, -z * z * T::lit(0.5))).collect();
        let mut d = Self::from_log_weights(pts, DistKind::Quadrature)?;
        d.source = Some(QuadratureSource {
            label: "chi_squared(k=1)".into(),
            nodes,
            lower: 0.0,
            upper: (half_width * half_width).as_f64(),
        });
        Ok(d)
    }

    pub fn with_source(mut self, source: QuadratureSource) -> Self {
        self.source = Some(source);
        self
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn log_weights(&self) -> &[T] {
        &self.log_weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    pub fn source(&self) -> Option<&QuadratureSource> {
        self.source.as_ref()
    }

    pub fn min_value(&self) -> T {
        self.values[0]
    }

    pub fn max_value(&self) -> T {
        self.values[self.values.len() - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.values.iter().copied().zip(self.log_weights.iter().copied())
    }

    pub fn probs(&self) -> Vec<T> {
        self.log_weights.iter().map(|lw| lw.exp()).collect()
    }

    pub(crate) fn log_mass(&self) -> T {
        self.log_mass
    }

    pub fn mean(&self) -> T {
        self.iter().fold(T::zero(), |acc, (v, lw)| acc + v * lw.exp())
    }

    /// `P[Y <= x]`.
    pub fn cdf(&self, x: T) -> T {
        let k = self.values.partition_point(|&v| v <= x);
        let s = self.log_weights[..k].iter().fold(T::zero(), |acc, lw| acc + lw.exp());
        s.min(T::one())
    }
}

/// `nodes` equispaced points on `[-half_width, half_width]`, symmetric by construction.
pub fn uniform_grid<T: Real>(half_width: T, nodes: usize) -> Vec<T> {
    let m = (nodes - 1) as f64 / 2.0;
    (0..nodes).map(|i| half_width * T::lit((i as f64 - m) / m)).collect()
}
