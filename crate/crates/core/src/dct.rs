//! Cosine basis, truncated odd-harmonic DCT analysis and synthesis.
//!
//! A univariate function on `[-1, 1]` is represented by `Q/2` coefficients
//! `F_q` weighting the odd harmonics `2q - 1` of a length-`N` type-II DCT.
//! The orthonormal gains are folded into the coefficients, so synthesis is a
//! plain weighted sum of [`cos_basis`] terms.
//!
//! Samples live on the grid `x_n = -1 + 2n/N`, `n = 0..N`, where the basis
//! functions coincide with the DCT-II vectors exactly. Every retained basis
//! function is odd about `x = -1/N` (not about 0) and periodic with period 4.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{EnnError, Result};

pub const DEFAULT_GRID_LEN: usize = 512;
pub const DEFAULT_BUDGET: usize = 12;

/// Grid length `N` and coefficient budget `Q` (of which `Q/2` are kept).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisConfig {
    n: usize,
    q: usize,
}

impl BasisConfig {
    pub fn new(n: usize, q: usize) -> Result<Self> {
        if q < 2 || !q.is_multiple_of(2) {
            return Err(EnnError::InvalidConfig(format!(
                "coefficient budget Q must be even and >= 2, got {q}"
            )));
        }
        if n < q {
            return Err(EnnError::InvalidConfig(format!(
                "grid length N={n} must be >= Q={q}"
            )));
        }
        Ok(Self { n, q })
    }

    /// Grid length `N`.
    pub fn grid_len(&self) -> usize {
        self.n
    }

    /// Total budget `Q`.
    pub fn budget(&self) -> usize {
        self.q
    }

    /// Number of retained coefficients, `Q/2`.
    pub fn retained(&self) -> usize {
        self.q / 2
    }

    /// The `N` sample abscissae `x_n = -1 + 2n/N`.
    pub fn grid(&self) -> Vec<f64> {
        (0..self.n).map(|i| grid_point(i, self.n)).collect()
    }

    /// Point about which every synthesized function is odd.
    pub fn symmetry_center(&self) -> f64 {
        -1.0 / self.n as f64
    }
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self {
            n: DEFAULT_GRID_LEN,
            q: DEFAULT_BUDGET,
        }
    }
}

/// Abscissa of sample `index` on the length-`n` grid.
pub fn grid_point(index: usize, n: usize) -> f64 {
    -1.0 + 2.0 * index as f64 / n as f64
}

#[inline]
fn phase(q: usize, x: f64, n: usize) -> f64 {
    let nf = n as f64;
    PI * (2 * q - 1) as f64 * (nf * (x + 1.0) + 1.0) / (2.0 * nf)
}

/// `cos(pi (2q-1) (N(x+1)+1) / 2N)`, the `q`-th retained basis function.
#[inline]
pub fn cos_basis(q: usize, x: f64, n: usize) -> f64 {
    debug_assert!(q >= 1);
    phase(q, x, n).cos()
}

/// Sine companion of [`cos_basis`]; appears in every derivative.
#[inline]
pub fn sin_basis(q: usize, x: f64, n: usize) -> f64 {
    debug_assert!(q >= 1);
    phase(q, x, n).sin()
}

/// Retained odd-harmonic coefficients of one truncated DCT series.
#[derive(Debug, Clone, PartialEq)]
pub struct DctCoefficients {
    values: Vec<f64>,
    config: BasisConfig,
}

impl DctCoefficients {
    pub fn new(values: Vec<f64>, config: BasisConfig) -> Result<Self> {
        if values.len() != config.retained() {
            return Err(EnnError::DimensionMismatch {
                expected: config.retained(),
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(EnnError::NonFinite(format!("DCT coefficient {bad}")));
        }
        Ok(Self { values, config })
    }

    pub fn zeros(config: BasisConfig) -> Self {
        Self {
            values: vec![0.0; config.retained()],
            config,
        }
    }

    /// `values()[i]` weights harmonic `2i + 1`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn config(&self) -> BasisConfig {
        self.config
    }

    /// Sum of absolute coefficients; bounds the series everywhere on the real line.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    /// `sum_q F_q cos_basis(q, x)`.
    pub fn synthesize(&self, x: f64) -> f64 {
        let n = self.config.n;
        self.values
            .iter()
            .enumerate()
            .map(|(i, f)| f * cos_basis(i + 1, x, n))
            .sum()
    }

    /// `sum_q F_q (2q-1) sin_basis(q, x)`: the weighted sine sum shared by
    /// all backpropagated chain factors. The derivative is `-pi/2` times it.
    pub fn weighted_sine_sum(&self, x: f64) -> f64 {
        let n = self.config.n;
        self.values
            .iter()
            .enumerate()
            .map(|(i, f)| f * (2 * i + 1) as f64 * sin_basis(i + 1, x, n))
            .sum()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        -0.5 * PI * self.weighted_sine_sum(x)
    }
}

/// Free-function form of [`DctCoefficients::synthesize`].
pub fn synthesize(coeffs: &DctCoefficients, x: f64) -> f64 {
    coeffs.synthesize(x)
}

fn check_len(samples: &[f64], config: BasisConfig) -> Result<()> {
    if samples.len() != config.n {
        return Err(EnnError::SampleCount {
            expected: config.n,
            got: samples.len(),
        });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(EnnError::NonFinite("sample value".into()));
    }
    Ok(())
}

/// `cos(pi k (2i+1) / 2N)` with the integer part of the phase reduced mod `4N`.
fn dct2_kernel(k: usize, i: usize, n: usize) -> f64 {
    let m = (k * (2 * i + 1)) % (4 * n);
    (PI * m as f64 / (2 * n) as f64).cos()
}

/// Full orthonormal DCT-II of `samples` by direct summation.
///
/// Entry `k` uses gain `1/sqrt(N)` for `k = 0` and `sqrt(2/N)` otherwise, so
/// the transform is an isometry.
pub fn dct2_orthonormal(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    let g0 = (1.0 / n as f64).sqrt();
    let gk = (2.0 / n as f64).sqrt();
    (0..n)
        .map(|k| {
            let s: f64 = samples
                .iter()
                .enumerate()
                .map(|(i, v)| v * dct2_kernel(k, i, n))
                .sum();
            if k == 0 {
                g0 * s
            } else {
                gk * s
            }
        })
        .collect()
}

/// Projects grid samples onto the retained odd harmonics `1, 3, ..., Q-1`.
pub fn analyze(samples: &[f64], config: BasisConfig) -> Result<DctCoefficients> {
    check_len(samples, config)?;
    let n = config.n;
    let scale = 2.0 / n as f64;
    let values = (1..=config.retained())
        .map(|q| {
            let k = 2 * q - 1;
            scale
                * samples
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v * dct2_kernel(k, i, n))
                    .sum::<f64>()
        })
        .collect();
    DctCoefficients::new(values, config)
}

/// Samples `f` on the grid and analyzes it.
pub fn analyze_fn(f: impl Fn(f64) -> f64, config: BasisConfig) -> Result<DctCoefficients> {
    let samples: Vec<f64> = config.grid().into_iter().map(f).collect();
    analyze(&samples, config)
}

/// Root-sum-square of every orthonormal DCT-II coefficient that [`analyze`]
/// drops: the DC term, all even harmonics and odd harmonics above `Q-1`.
///
/// Equals the Euclidean norm of the reconstruction residual on the grid, so
/// it also bounds the maximum grid error.
pub fn truncation_tail(samples: &[f64], config: BasisConfig) -> Result<f64> {
    check_len(samples, config)?;
    let full = dct2_orthonormal(samples);
    let kept = config.q - 1;
    let energy: f64 = full
        .iter()
        .enumerate()
        .filter(|(k, _)| !(k % 2 == 1 && *k <= kept))
        .map(|(_, c)| c * c)
        .sum();
    Ok(energy.sqrt())
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn cfg() -> BasisConfig {
        BasisConfig::default()
    }

    #[test]
    fn config_rejects_odd_or_small_budget() {
        assert!(BasisConfig::new(512, 11).is_err());
        assert!(BasisConfig::new(512, 0).is_err());
        assert!(BasisConfig::new(8, 12).is_err());
        assert!(BasisConfig::new(12, 12).is_ok());
    }

    #[test]
    fn basis_reference_values() {
        // High-precision references for the basis definition.
        assert!((cos_basis(1, 0.0, 512) - (-3.0679567629659763e-3)).abs() < 1e-15);
        assert!((cos_basis(2, -1.0, 512) - 0.99995764455196387).abs() < 1e-15);
        assert!((sin_basis(1, 0.0, 512) - 0.99999529380957617).abs() < 1e-15);
    }

    #[test]
    fn basis_derivative_matches_central_difference() {
        let h = 1e-6;
        for q in 1..=6 {
            for &x in &[-0.7, -0.01, 0.3, 1.4, -3.2] {
                let fd = (cos_basis(q, x + h, 512) - cos_basis(q, x - h, 512)) / (2.0 * h);
                let exact = -0.5 * PI * (2 * q - 1) as f64 * sin_basis(q, x, 512);
                assert!(
                    (fd - exact).abs() < 1e-7 * (1.0 + exact.abs()),
                    "q={q} x={x}"
                );
            }
        }
    }

    #[test]
    fn zero_coefficients_synthesize_zero() {
        let c = DctCoefficients::zeros(cfg());
        for &x in &[-5.0, -1.0, 0.0, 0.3, 7.5] {
            assert_eq!(c.synthesize(x), 0.0);
        }
    }

    #[test]
    fn single_negative_fundamental_reaches_one_at_right_edge() {
        let mut v = vec![0.0; 6];
        v[0] = -1.0;
        let c = DctCoefficients::new(v, cfg()).unwrap();
        let expected = (PI / 1024.0).cos();
        assert!((c.synthesize(1.0) - expected).abs() < 1e-14);
        assert!((c.synthesize(1.0) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn analyze_rejects_wrong_sample_count() {
        let err = analyze(&[0.0; 100], cfg()).unwrap_err();
        assert!(matches!(
            err,
            EnnError::SampleCount {
                expected: 512,
                got: 100
            }
        ));
        assert!(truncation_tail(&[0.0; 3], cfg()).is_err());
    }

    #[test]
    fn analyze_zero_function() {
        let c = analyze(&vec![0.0; 512], cfg()).unwrap();
        assert!(c.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn analyze_recovers_basis_function() {
        for q in 1..=6 {
            let c = analyze_fn(|x| cos_basis(q, x, 512), cfg()).unwrap();
            for (i, v) in c.values().iter().enumerate() {
                let expected = if i + 1 == q { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-12, "q={q} i={i} v={v}");
            }
            let samples: Vec<f64> = cfg().grid().iter().map(|&x| cos_basis(q, x, 512)).collect();
            assert!(truncation_tail(&samples, cfg()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn tail_is_nested() {
        let samples = cfg().grid();
        let t12 = truncation_tail(&samples, cfg()).unwrap();
        let t20 = truncation_tail(&samples, BasisConfig::new(512, 20).unwrap()).unwrap();
        assert!(t20 <= t12);
    }

    #[test]
    fn coefficients_reject_non_finite() {
        let mut v = vec![0.0; 6];
        v[2] = f64::NAN;
        assert!(DctCoefficients::new(v, cfg()).is_err());
        assert!(DctCoefficients::new(vec![0.0; 5], cfg()).is_err());
    }

    #[test]
    fn full_transform_is_an_isometry() {
        let samples: Vec<f64> = cfg()
            .grid()
            .iter()
            .map(|x| (3.0 * x).sin() + x * x)
            .collect();
        let full = dct2_orthonormal(&samples);
        let e_time: f64 = samples.iter().map(|v| v * v).sum();
        let e_freq: f64 = full.iter().map(|v| v * v).sum();
        assert!((e_time - e_freq).abs() < 1e-9 * e_time);
    }
}
