//! Energies of the truncated problem
//! `-Δu + a(x)|u|^{p-2}u - b(x)|u|^{q-2}u = 0` and their gradients.

use alloc::format;
use alloc::vec::Vec;

use crate::coefficients::CoefficientField;
use crate::error::{Error, Result};
use crate::lattice::{
    abs_pow, edge_energy_by_site, gradient_norm_sq, laplacian, power_sum, scaled_lp_norm, signed_pow, LatticeBox,
    LatticeFunction,
};
use crate::sum::pairwise_sum;

/// Dimension, exponents `2 <= p < q`, coefficient fields and the constraint
/// weight `β` used by `J2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemParams {
    dim: usize,
    p: f64,
    q: f64,
    a: CoefficientField,
    b: CoefficientField,
    beta: f64,
}

impl ProblemParams {
    pub fn new(dim: usize, p: f64, q: f64, a: CoefficientField, b: CoefficientField, beta: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParams(format!("dimension {dim} < 2")));
        }
        if !(p >= 2.0) || !(q > p) || !q.is_finite() {
            return Err(Error::InvalidParams(format!(
                "need 2 <= p < q < inf, got p = {p}, q = {q}"
            )));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParams(format!("beta must be positive, got {beta}")));
        }
        for (name, field) in [("a", &a), ("b", &b)] {
            if let Some(d) = field.profile_dim() {
                if d != dim {
                    return Err(Error::InvalidParams(format!(
                        "field {name} has {d}-dimensional profile sites in dimension {dim}"
                    )));
                }
            }
        }
        Ok(ProblemParams { dim, p, q, a, b, beta })
    }

    /// Constant coefficients `a ≡ a_const`, `b ≡ b_const`.
    pub fn constant(dim: usize, p: f64, q: f64, a_const: f64, b_const: f64, beta: f64) -> Result<Self> {
        Self::new(
            dim,
            p,
            q,
            CoefficientField::constant(a_const)?,
            CoefficientField::constant(b_const)?,
            beta,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn a(&self) -> &CoefficientField {
        &self.a
    }
    pub fn b(&self) -> &CoefficientField {
        &self.b
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn with_b(&self, b: CoefficientField) -> Self {
        ProblemParams { b, ..self.clone() }
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.dim, self.p, self.q, self.a.clone(), self.b.clone(), beta)
    }

    /// The same problem with both fields replaced by their limits, i.e. the
    /// problem whose energy is `Φ̄`.
    pub fn limit_problem(&self) -> Self {
        ProblemParams {
            a: self.a.limit_field(),
            b: self.b.limit_field(),
            ..self.clone()
        }
    }

    pub(crate) fn constant_a(&self) -> Result<f64> {
        if !self.a.is_constant() {
            return Err(Error::InvalidParams("J1 needs a constant coefficient a".into()));
        }
        Ok(self.a.limit())
    }
}

fn field_values(field: &CoefficientField, domain: &LatticeBox) -> Option<Vec<f64>> {
    (!field.is_constant()).then(|| domain.sites().iter().map(|x| field.eval(x)).collect())
}

/// `J1(u) = ½|∇u|_2^2 + (ã/p)|u|_p^p`; needs a constant `a ≡ ã`.
pub fn j1(u: &LatticeFunction, params: &ProblemParams) -> Result<f64> {
    let a = params.constant_a()?;
    Ok(0.5 * gradient_norm_sq(u) + a / params.p * power_sum(u.values(), params.p))
}

/// `J2(u) = β|u|_q^q`.
pub fn j2(u: &LatticeFunction, params: &ProblemParams) -> f64 {
    params.beta * power_sum(u.values(), params.q)
}

/// Per-site energy density whose sum is `Φ(u)`.
pub fn energy_density(u: &LatticeFunction, params: &ProblemParams) -> Vec<f64> {
    let (p, q) = (params.p, params.q);
    let a = field_values(&params.a, u.domain());
    let b = field_values(&params.b, u.domain());
    let mut density = edge_energy_by_site(u);
    for (i, (d, &v)) in density.iter_mut().zip(u.values()).enumerate() {
        let ai = a.as_ref().map_or(params.a.limit(), |a| a[i]);
        let bi = b.as_ref().map_or(params.b.limit(), |b| b[i]);
        *d = 0.5 * *d + ai / p * abs_pow(v, p) - bi / q * abs_pow(v, q);
    }
    density
}

/// `Φ(u) = ½|∇u|^2 + (1/p)Σ a|u|^p - (1/q)Σ b|u|^q`.
pub fn phi(u: &LatticeFunction, params: &ProblemParams) -> f64 {
    pairwise_sum(&energy_density(u, params))
}

/// `Φ̄`, the energy with both coefficients frozen at their limits.
pub fn phi_bar(u: &LatticeFunction, params: &ProblemParams) -> f64 {
    phi(u, &params.limit_problem())
}

/// `g = -Δu + a|u|^{p-2}u - b|u|^{q-2}u` on the box, so that
/// `<Φ'(u), φ> = Σ g φ` for every `φ` supported in the box.
pub fn gateaux_gradient(u: &LatticeFunction, params: &ProblemParams) -> LatticeFunction {
    let (p, q) = (params.p, params.q);
    let a = field_values(&params.a, u.domain());
    let b = field_values(&params.b, u.domain());
    let lap = laplacian(u);
    let values: Vec<f64> = lap
        .values()
        .iter()
        .zip(u.values())
        .enumerate()
        .map(|(i, (&l, &v))| {
            let ai = a.as_ref().map_or(params.a.limit(), |a| a[i]);
            let bi = b.as_ref().map_or(params.b.limit(), |b| b[i]);
            -l + ai * signed_pow(v, p) - bi * signed_pow(v, q)
        })
        .collect();
    LatticeFunction::from_values(u.domain(), values).expect("gradient of finite data is finite")
}

/// l2 norm of the Gateaux gradient over the box; zero exactly at solutions
/// of the truncated equation.
pub fn residual_norm(u: &LatticeFunction, params: &ProblemParams) -> f64 {
    scaled_lp_norm(gateaux_gradient(u, params).values(), 2.0)
}
