//! Relaxation time, collision scale and viscosity relations.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::CS2;
use crate::stats::linear_fit;

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error("C*gamma = {0} must be positive")]
    Divergent(f64),
    #[error("non-positive denominator {0}")]
    Denominator(f64),
    #[error("relaxation time {0} below 0.5")]
    Tau(f64),
    #[error("decay series needs at least {need} samples, got {got}")]
    ShortSeries { need: usize, got: usize },
    #[error("non-positive amplitude {value} at sample {index}")]
    Amplitude { index: usize, value: f64 },
    #[error("no usable samples")]
    NoSamples,
    #[error("rate must be non-negative")]
    NegativeRate,
}

/// `1 / (1 - exp(-C γ))`.
pub fn tau_approx(c: f64, gamma: f64) -> Result<f64, CalibrationError> {
    let x = c * gamma;
    if !(x > 0.0) {
        return Err(CalibrationError::Divergent(x));
    }
    Ok(1.0 / -(-x).exp_m1())
}

/// Second-order form `1/(π0 (e^γ - 1/(2√6)) + e^γ) - 1`, evaluated as written.
pub fn tau_full(gamma: f64, pi0: f64) -> Result<f64, CalibrationError> {
    let eg = gamma.exp();
    let den = pi0 * (eg - 1.0 / (2.0 * 6f64.sqrt())) + eg;
    if !(den > 0.0) {
        return Err(CalibrationError::Denominator(den));
    }
    Ok(1.0 / den - 1.0)
}

/// Shear-stress relaxation rate of two-body D2Q9 collisions, rates given in
/// class order.
pub fn gamma_d2q9(l: &[f64; 9]) -> Result<f64, CalibrationError> {
    if l.iter().any(|x| !(*x >= 0.0)) {
        return Err(CalibrationError::NegativeRate);
    }
    Ok((8.0 * l[0] + l[2] + 2.0 * (l[3] + l[5] + 2.0 * l[6] + 4.0 * l[7])) / 9.0)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViscosityConvention {
    /// `ν = c_s² (τ - 1/2)`.
    #[default]
    Standard,
    /// `ν = (τ - 1/2) / c_s²`.
    Literal,
}

pub fn viscosity_from_tau(tau: f64, conv: ViscosityConvention) -> Result<f64, CalibrationError> {
    if !(tau >= 0.5) {
        return Err(CalibrationError::Tau(tau));
    }
    Ok(match conv {
        ViscosityConvention::Standard => CS2 * (tau - 0.5),
        ViscosityConvention::Literal => (tau - 0.5) / CS2,
    })
}

pub fn tau_from_viscosity(nu: f64, conv: ViscosityConvention) -> f64 {
    match conv {
        ViscosityConvention::Standard => nu / CS2 + 0.5,
        ViscosityConvention::Literal => nu * CS2 + 0.5,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub nu: f64,
    pub tau: f64,
    /// Slope of `ln amplitude` per step.
    pub slope: f64,
    pub r2: f64,
}

/// Fits `ln a(t) = ln a0 - 2 ν k² t` over the series (one sample per step).
pub fn fit_tau_from_decay(
    amplitudes: &[f64],
    wavenumber: f64,
    conv: ViscosityConvention,
) -> Result<DecayFit, CalibrationError> {
    if amplitudes.len() < 10 {
        return Err(CalibrationError::ShortSeries { need: 10, got: amplitudes.len() });
    }
    if let Some((index, &value)) = amplitudes.iter().enumerate().find(|(_, a)| !(**a > 0.0)) {
        return Err(CalibrationError::Amplitude { index, value });
    }
    let t: Vec<f64> = (0..amplitudes.len()).map(|i| i as f64).collect();
    let y: Vec<f64> = amplitudes.iter().map(|a| a.ln()).collect();
    let fit = linear_fit(&t, &y);
    let nu = -fit.slope / (2.0 * wavenumber * wavenumber);
    Ok(DecayFit { nu, tau: tau_from_viscosity(nu, conv), slope: fit.slope, r2: fit.r2 })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TauModel {
    #[default]
    Approx,
    Full,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurve {
    /// `(C, τ_measured)`; failed samples carry `NaN`.
    pub samples: Vec<(f64, f64)>,
    pub gamma: f64,
    pub pi0: f64,
    pub model: TauModel,
}

impl CalibrationCurve {
    /// Fits γ, then π0, from the usable samples.
    pub fn fit(samples: Vec<(f64, f64)>, model: TauModel) -> Result<CalibrationCurve, CalibrationError> {
        let gamma = fit_gamma(&samples)?;
        let pi0 = fit_pi0(&samples, gamma).unwrap_or(0.0);
        Ok(CalibrationCurve { samples, gamma, pi0, model })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "C,tau_measured,tau_approx,tau_full")?;
        let full = tau_full(self.gamma, self.pi0).unwrap_or(f64::NAN);
        for &(c, tau) in &self.samples {
            let approx = tau_approx(c, self.gamma).unwrap_or(f64::NAN);
            writeln!(w, "{c},{tau},{approx},{full}")?;
        }
        Ok(())
    }
}

/// Least-squares γ through the origin of `-ln(1 - 1/τ) = C γ`, using samples
/// with finite `τ > 1`.
pub fn fit_gamma(samples: &[(f64, f64)]) -> Result<f64, CalibrationError> {
    let (mut num, mut den) = (0.0, 0.0);
    for &(c, tau) in samples {
        if tau.is_finite() && tau > 1.0 && c > 0.0 {
            num += c * -(-1.0 / tau).ln_1p();
            den += c * c;
        }
    }
    if den == 0.0 {
        return Err(CalibrationError::NoSamples);
    }
    Ok(num / den)
}

/// Least-squares π0 for [`tau_full`] at fixed γ, linear in `1/(τ+1)`.
pub fn fit_pi0(samples: &[(f64, f64)], gamma: f64) -> Result<f64, CalibrationError> {
    let eg = gamma.exp();
    let a = eg - 1.0 / (2.0 * 6f64.sqrt());
    let ys: Vec<f64> = samples
        .iter()
        .filter(|s| s.1.is_finite() && s.1 > -1.0)
        .map(|&(_, tau)| 1.0 / (tau + 1.0) - eg)
        .collect();
    if ys.is_empty() || a == 0.0 {
        return Err(CalibrationError::NoSamples);
    }
    Ok(ys.iter().sum::<f64>() / (ys.len() as f64 * a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_approx_values() {
        assert!((tau_approx(0.645, 1.0).unwrap() - 2.1037686).abs() < 1e-7);
        assert!((tau_approx(2f64.ln(), 1.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((tau_approx(10.0, 1.0).unwrap() - 1.0000454).abs() < 1e-7);
        assert_eq!(tau_approx(0.0, 1.0), Err(CalibrationError::Divergent(0.0)));
    }

    #[test]
    fn tau_full_literal() {
        assert_eq!(tau_full(0.0, 0.0).unwrap(), 0.0);
        let pinned = (-1.0f64).exp() - 1.0;
        assert!((tau_full(1.0, 0.0).unwrap() - pinned).abs() < 1e-15);
        assert!(tau_full(0.0, -10.0).is_err());
    }

    #[test]
    fn gamma_values() {
        assert!((gamma_d2q9(&[1.0; 9]).unwrap() - 25.0 / 9.0).abs() < 1e-15);
        assert_eq!(gamma_d2q9(&[0.0; 9]).unwrap(), 0.0);
        let lo = [15.0 / 128.0, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.125, 0.125];
        assert!((gamma_d2q9(&lo).unwrap() - 0.4653).abs() < 1e-4);
    }

    #[test]
    fn viscosity_conventions() {
        use ViscosityConvention::*;
        assert!((viscosity_from_tau(0.65, Standard).unwrap() - 0.05).abs() < 1e-15);
        assert!((viscosity_from_tau(0.65, Literal).unwrap() - 0.45).abs() < 1e-14);
        assert_eq!(viscosity_from_tau(0.5, Standard).unwrap(), 0.0);
        assert!(viscosity_from_tau(0.49, Standard).is_err());
        assert!((tau_from_viscosity(0.05, Standard) - 0.65).abs() < 1e-15);
    }

    #[test]
    fn decay_fit_exact_and_errors() {
        let k = 2.0 * std::f64::consts::PI / 50.0;
        let a: Vec<f64> = (0..200).map(|t| 0.1 * (-2.0 * 0.05 * k * k * t as f64).exp()).collect();
        let fit = fit_tau_from_decay(&a, k, ViscosityConvention::Standard).unwrap();
        assert!((fit.nu - 0.05).abs() < 1e-10);
        assert!((fit.tau - 0.65).abs() < 1e-9);
        assert!(fit_tau_from_decay(&a[..5], k, ViscosityConvention::Standard).is_err());
        let mut bad = a.clone();
        bad[3] = 0.0;
        assert_eq!(
            fit_tau_from_decay(&bad, k, ViscosityConvention::Standard),
            Err(CalibrationError::Amplitude { index: 3, value: 0.0 })
        );
    }

    #[test]
    fn gamma_fit_recovers_synthetic_curve() {
        let samples: Vec<_> = [0.1, 0.2, 0.4, 0.8].iter().map(|&c| (c, tau_approx(c, 2.5).unwrap())).collect();
        assert!((fit_gamma(&samples).unwrap() - 2.5).abs() < 1e-12);
        let curve = CalibrationCurve::fit(samples, TauModel::Approx).unwrap();
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 5);
    }
}
