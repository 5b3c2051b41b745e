//! Painlevé V exponents and central-charge data.

use num_complex::Complex64;
use crate::error::{PvError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PVParams {
    pub theta0: Complex64,
    pub thetat: Complex64,
    pub theta_star: Complex64,
    /// Deformation parameter; `c = 1 − 6(β − 1/β)²`. Tau functions need β = 1.
    pub beta: Complex64,
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl PVParams {
    pub fn new(theta0: Complex64, thetat: Complex64, theta_star: Complex64) -> Self {
        PVParams { theta0, thetat, theta_star, beta: one() }
    }

    pub fn real(theta0: f64, thetat: f64, theta_star: f64) -> Self {
        Self::new(Complex64::new(theta0, 0.0), Complex64::new(thetat, 0.0), Complex64::new(theta_star, 0.0))
    }

    pub fn q(&self) -> Complex64 {
        self.beta - 1.0 / self.beta
    }

    pub fn central_charge(&self) -> Complex64 {
        1.0 - 6.0 * self.q() * self.q()
    }

    /// Errors unless the central charge is 1.
    pub fn require_c1(&self) -> Result<()> {
        if (self.beta - 1.0).norm() > 1e-14 {
            return Err(PvError::Config(format!("tau functions need c = 1, got beta = {}", self.beta)));
        }
        Ok(())
    }

    /// δ = (θ₀ + θ_t + θ_*)/2.
    pub fn delta(&self) -> Complex64 {
        (self.theta0 + self.thetat + self.theta_star) * 0.5
    }

    /// s₀: θ₀ → −θ₀.
    pub fn s0(&self) -> Self {
        PVParams { theta0: -self.theta0, ..*self }
    }

    /// s_t: θ_t → −θ_t.
    pub fn st(&self) -> Self {
        PVParams { thetat: -self.thetat, ..*self }
    }

    /// s_δ: (θ₀, θ_t, θ_*) → (θ₀−δ, θ_t−δ, θ_*−2δ).
    pub fn s_delta(&self) -> Self {
        let d = self.delta();
        PVParams { theta0: self.theta0 - d, thetat: self.thetat - d, theta_star: self.theta_star - 2.0 * d, beta: self.beta }
    }

    /// Row exchange: (θ₀, θ_t, θ_*) → (θ_t, θ₀, −θ_*).
    pub fn exchange(&self) -> Self {
        PVParams { theta0: self.thetat, thetat: self.theta0, theta_star: -self.theta_star, beta: self.beta }
    }
}
