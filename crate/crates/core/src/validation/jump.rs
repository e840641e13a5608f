//! Direct measurement of exponentially small jumps.

use serde::Serialize;

use crate::algebra::{AlgebraError, BigComplex};
use crate::borel::{laplace_sum, pade_robust, LaplaceConfig};
use crate::perturbative::{borel_germ, expand_perturbative, ODESpec};
use crate::singulant::ComplexPath;

use super::ode::{integrate_ode, truncated_series_data, OdeConfig};
use super::ValidationError;

/// How the two sides of a Stokes line are reached.
#[derive(Clone, Debug)]
pub enum Crossing {
    /// Laplace sums along rays at these angles.
    Rays { minus: f64, plus: f64 },
    /// ODE continuation to the probe from two points where the perturbative
    /// series is an accurate start.
    Continuation { minus: BigComplex, plus: BigComplex },
}

#[derive(Clone, Debug)]
pub struct JumpConfig {
    pub ode: OdeConfig,
    pub laplace: LaplaceConfig,
    /// Perturbative terms for start data or the germ.
    pub terms: usize,
    /// A jump below `noise_factor × noise` is rejected.
    pub noise_factor: f64,
}

impl JumpConfig {
    pub fn for_precision(prec: u32) -> Self {
        JumpConfig { ode: OdeConfig::for_precision(prec), laplace: LaplaceConfig::for_precision(prec), terms: 40, noise_factor: 10.0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct JumpMeasurement {
    pub schema: &'static str,
    pub z: BigComplex,
    pub epsilon: BigComplex,
    /// `plus − minus`.
    pub value: BigComplex,
    pub plus: BigComplex,
    pub minus: BigComplex,
    pub noise: f64,
}

fn checked(m: JumpMeasurement, factor: f64) -> Result<JumpMeasurement, ValidationError> {
    if m.value.abs_f64() <= factor * m.noise {
        return Err(ValidationError::NoiseFloor { measured: m.value.abs_f64(), noise: m.noise });
    }
    Ok(m)
}

/// Difference of the Laplace sums of the Borel function `f` along two rays.
#[allow(clippy::too_many_arguments)]
pub fn measure_jump_rays<F>(
    f: F,
    constant: &BigComplex,
    z: &BigComplex,
    eps: &BigComplex,
    minus: f64,
    plus: f64,
    singular: &[BigComplex],
    cfg: &JumpConfig,
) -> Result<JumpMeasurement, ValidationError>
where
    F: Fn(&BigComplex) -> Result<BigComplex, AlgebraError>,
{
    let lo = laplace_sum(&f, constant, eps, minus, singular, &cfg.laplace)?;
    let hi = laplace_sum(&f, constant, eps, plus, singular, &cfg.laplace)?;
    let m = JumpMeasurement {
        schema: crate::SCHEMA,
        z: z.clone(),
        epsilon: eps.clone(),
        value: &hi.value - &lo.value,
        noise: hi.error + lo.error,
        plus: hi.value,
        minus: lo.value,
    };
    checked(m, cfg.noise_factor)
}

/// `y(probe)` continued from `start`, with a noise estimate covering the
/// integration error and the start data's truncation error.
fn continued(spec: &ODESpec, eps: &BigComplex, start: &BigComplex, probe: &BigComplex, cfg: &JumpConfig) -> Result<(BigComplex, f64), ValidationError> {
    let series = expand_perturbative(spec, cfg.terms)?;
    let (init, trunc) = truncated_series_data(&series, start, eps, spec.order())?;
    let path = ComplexPath::segment(start, probe, 1);
    let sol = integrate_ode(spec, eps, &path, &init, &cfg.ode)?;
    let y = sol.last()[0].clone();
    // sensitivity of the endpoint to the start data's error
    let mut bumped = init.clone();
    bumped[0] += &BigComplex::from_f64(trunc, 0.0, eps.prec());
    let alt = integrate_ode(spec, eps, &path, &bumped, &cfg.ode)?;
    let noise = sol.errors.last().copied().unwrap_or(0.0) + alt.last()[0].dist_f64(&y);
    Ok((y, noise))
}

/// Jump of the ODE solution asymptotic to the perturbative series across a
/// Stokes line through `z`.
pub fn measure_jump(spec: &ODESpec, eps: &BigComplex, z: &BigComplex, crossing: &Crossing, cfg: &JumpConfig) -> Result<JumpMeasurement, ValidationError> {
    match crossing {
        Crossing::Continuation { minus, plus } => {
            let (lo, nl) = continued(spec, eps, minus, z, cfg)?;
            let (hi, nh) = continued(spec, eps, plus, z, cfg)?;
            let m = JumpMeasurement {
                schema: crate::SCHEMA,
                z: z.clone(),
                epsilon: eps.clone(),
                value: &hi - &lo,
                plus: hi,
                minus: lo,
                noise: nl + nh,
            };
            checked(m, cfg.noise_factor)
        }
        Crossing::Rays { minus, plus } => {
            let series = expand_perturbative(spec, cfg.terms)?;
            let germ = borel_germ(&series, z)?;
            let m = germ.coeffs.len() / 2;
            let p = pade_robust(&germ.coeffs, m.saturating_sub(1), m)?;
            let poles: Vec<BigComplex> = p.poles.iter().map(|q| q.location.clone()).collect();
            measure_jump_rays(|w| Ok(p.eval(w)), &germ.constant, z, eps, *minus, *plus, &poles, cfg)
        }
    }
}
