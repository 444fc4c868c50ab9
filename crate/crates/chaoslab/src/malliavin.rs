//! Malliavin derivative, adapted projection, Skorohod integral and the
//! Clark-Ocone reconstruction on finite-chaos functionals.
//!
//! Adaptedness uses the strict (predictable) convention: the component at
//! direction `i` may only depend on coordinates stamped strictly before
//! `tau_i`. In the continuum the measure of a stamp tie is zero and the
//! convention is immaterial; in a discrete model only the strict form makes
//! the Clark-Ocone reconstruction exact. For the same reason exactness
//! requires kernels with vanishing diagonal, and stamp ties between
//! directions appearing in one support tuple lose their contribution (they
//! are the discrete image of the negligible diagonals).

use crate::chaos::{eval_integral, ChaosFunctional, GaussianSample};
use crate::error::{Error, Result};
use crate::filtration::FilteredBasis;
use crate::tensor::SymmetricKernel;

/// Coordinate process with one chaos functional per basis direction.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<ChaosFunctional>,
}

impl VectorField {
    pub fn new(components: Vec<ChaosFunctional>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("vector field needs at least one component"));
        }
        let dim = components[0].dim();
        if components.len() != dim || components.iter().any(|c| c.dim() != dim) {
            return Err(Error::invalid(
                "vector field needs one component per direction, all of equal dim",
            ));
        }
        Ok(VectorField { components })
    }

    /// Deterministic field: component `i` is the constant `h[i]`.
    pub fn deterministic(h: &[f64]) -> Result<Self> {
        let dim = h.len();
        let components = h
            .iter()
            .map(|&c| ChaosFunctional::constant(dim, c))
            .collect::<Result<Vec<_>>>()?;
        VectorField::new(components)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &ChaosFunctional {
        &self.components[i]
    }

    pub fn components(&self) -> &[ChaosFunctional] {
        &self.components
    }
}

/// Malliavin derivative of `I_d(f)`: component `i` is `d * I_{d-1}(f(i,·))`.
pub fn derivative(f: &SymmetricKernel) -> Result<VectorField> {
    let dim = f.dim();
    let d = f.order();
    let mut components = Vec::with_capacity(dim);
    for i in 0..dim {
        if d == 0 {
            components.push(ChaosFunctional::constant(dim, 0.0)?);
            continue;
        }
        let slice = f.slice_first(i)?.scale(d as f64);
        if d == 1 {
            components.push(ChaosFunctional::constant(dim, slice.get(&[]))?);
        } else {
            let mut c = ChaosFunctional::constant(dim, 0.0)?;
            c.add_kernel(slice)?;
            components.push(c);
        }
    }
    VectorField::new(components)
}

/// Project every component onto its strictly-earlier past: kernels of the
/// component at direction `i` keep only tuples stamped `< tau_i`.
pub fn adapted_projection(v: &VectorField, basis: &FilteredBasis) -> Result<VectorField> {
    if v.dim() != basis.dim() {
        return Err(Error::DimMismatch {
            left: v.dim(),
            right: basis.dim(),
        });
    }
    let mut components = Vec::with_capacity(v.dim());
    for (i, u) in v.components.iter().enumerate() {
        let cutoff = basis.time(i);
        let mut out = ChaosFunctional::constant(v.dim(), u.constant_term())?;
        for (_, kernel) in u.kernels() {
            let filtered =
                kernel.filtered(|key| key.iter().all(|&j| basis.time(j as usize) < cutoff));
            out.add_kernel(filtered)?;
        }
        components.push(out);
    }
    VectorField::new(components)
}

/// Skorohod integral with explicit Wick correction:
/// `delta(V)(Z) = sum_i u_i(Z) Z_i - sum_i (D_i u_i)(Z)`.
///
/// For strictly predictable fields the correction vanishes and the integral
/// reduces to the forward sum.
pub fn skorohod(v: &VectorField, z: &GaussianSample) -> Result<f64> {
    if v.dim() != z.dim() {
        return Err(Error::DimMismatch {
            left: v.dim(),
            right: z.dim(),
        });
    }
    let mut total = 0.0;
    for (i, u) in v.components.iter().enumerate() {
        total += u.eval(z)? * z.coord(i);
        let correction = u.derivative_in(i)?;
        total -= correction.eval(z)?;
    }
    Ok(total)
}

/// Clark-Ocone residual `I_d(f)(Z) - delta(proj D I_d(f))(Z)`.
///
/// Requires a vanishing diagonal: a coefficient at a tuple with a repeated
/// index has no predictable reconstruction in a discrete model, so such
/// kernels are rejected rather than silently mis-reconstructed.
pub fn clark_ocone_residual(
    f: &SymmetricKernel,
    basis: &FilteredBasis,
    z: &GaussianSample,
) -> Result<f64> {
    if f.has_diagonal() {
        return Err(Error::invalid(
            "clark-ocone needs a vanishing diagonal: kernels with repeated indices \
             correspond to the negligible diagonals of the continuum and cannot be \
             reconstructed exactly in a discrete model",
        ));
    }
    if f.dim() != basis.dim() {
        return Err(Error::DimMismatch {
            left: f.dim(),
            right: basis.dim(),
        });
    }
    let value = eval_integral(f, z)?;
    let adapted = adapted_projection(&derivative(f)?, basis)?;
    let rebuilt = skorohod(&adapted, z)?;
    Ok(value - rebuilt)
}

/// Pointwise squared norm `sum_i u_i(Z)^2`, optionally truncated to the
/// directions stamped `<= cutoff`.
pub fn projection_norm_sq(
    v: &VectorField,
    basis: &FilteredBasis,
    z: &GaussianSample,
    cutoff: Option<f64>,
) -> Result<f64> {
    if v.dim() != basis.dim() {
        return Err(Error::DimMismatch {
            left: v.dim(),
            right: basis.dim(),
        });
    }
    if v.dim() != z.dim() {
        return Err(Error::DimMismatch {
            left: v.dim(),
            right: z.dim(),
        });
    }
    let mut total = 0.0;
    for (i, u) in v.components.iter().enumerate() {
        if let Some(s) = cutoff {
            if basis.time(i) > s {
                continue;
            }
        }
        let x = u.eval(z)?;
        total += x * x;
    }
    Ok(total)
}
