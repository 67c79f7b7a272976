//! Modulo-lattice analog transmission with side information at the receiver.
//!
//! The transmitter knows `Q + J`, the receiver knows `J`. With a shared
//! dither `V` uniform on the fundamental cell:
//!
//! ```text
//! X = [β(J + Q) + V] mod Λ
//! U = [α_C·Y − V − β·J] mod Λ = [β·Q + Z_eq] mod Λ
//! ```
//!
//! and `U = β·Q + Z_eq` exactly whenever `β·Q + Z_eq ∈ V0`. Only
//! `α_C = 1` is supported, for which `Z_eq` is the channel noise itself.

use crate::error::{domain, Error, Result};
use crate::lattice::{CosetVector, Lattice};

#[derive(Debug, Clone, PartialEq)]
pub struct JsccParams {
    beta: f64,
    lattice: Lattice,
    alpha_c: f64,
}

impl JsccParams {
    pub fn new(beta: f64, lattice: Lattice) -> Result<Self> {
        Self::with_alpha_c(beta, lattice, 1.0)
    }

    /// Only `alpha_c = 1` is accepted.
    pub fn with_alpha_c(beta: f64, lattice: Lattice, alpha_c: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(domain(
                "JsccParams",
                format!("beta must be finite and > 0, got {beta}"),
            ));
        }
        if alpha_c != 1.0 {
            return Err(Error::InvalidConfig(format!(
                "alpha_c must be 1, got {alpha_c}"
            )));
        }
        Ok(JsccParams {
            beta,
            lattice,
            alpha_c,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha_c(&self) -> f64 {
        self.alpha_c
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        let n = self.lattice.dimension();
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// `[β·s + V] mod Λ` written into `out`, where `s = J + Q` is the
    /// transmitter's observation.
    pub fn encode_observation_into(&self, observation: &[f64], dither: &[f64], out: &mut [f64]) {
        for ((o, s), v) in out.iter_mut().zip(observation).zip(dither) {
            *o = self.beta * s + v;
        }
        self.lattice.modulo_in_place(out);
    }

    /// `[α_C·Y − V − β·J] mod Λ` written into `out`.
    pub fn receive_into(
        &self,
        received: &[f64],
        dither: &[f64],
        side_info: &[f64],
        out: &mut [f64],
    ) {
        for (((o, y), v), j) in out.iter_mut().zip(received).zip(dither).zip(side_info) {
            *o = self.alpha_c * y - v - self.beta * j;
        }
        self.lattice.modulo_in_place(out);
    }
}

/// Transmitter: `X = [β(J + Q) + V] mod Λ`.
pub fn wz_encode(q: &[f64], j: &[f64], dither: &[f64], params: &JsccParams) -> Result<CosetVector> {
    params.check(q)?;
    params.check(j)?;
    params.check(dither)?;
    let sum: Vec<f64> = q.iter().zip(j).map(|(a, b)| a + b).collect();
    let mut out = vec![0.0; sum.len()];
    params.encode_observation_into(&sum, dither, &mut out);
    Ok(CosetVector(out))
}

/// Receiver: `U = [α_C·Y − V − β·J] mod Λ`.
pub fn wz_receive(
    y: &[f64],
    dither: &[f64],
    j: &[f64],
    params: &JsccParams,
) -> Result<CosetVector> {
    params.check(y)?;
    params.check(dither)?;
    params.check(j)?;
    let mut out = vec![0.0; y.len()];
    params.receive_into(y, dither, j, &mut out);
    Ok(CosetVector(out))
}

/// Equivalent noise `Z_eq = −(1 − α_C)·X + α_C·Z`.
pub fn equivalent_noise(x: &[f64], z: &[f64], params: &JsccParams) -> Vec<f64> {
    let a = params.alpha_c;
    x.iter()
        .zip(z)
        .map(|(xi, zi)| -(1.0 - a) * xi + a * zi)
        .collect()
}
