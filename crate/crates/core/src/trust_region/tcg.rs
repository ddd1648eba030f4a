//! Steihaug-Toint truncated conjugate gradient for the trust-region
//! subproblem `min <g, s> + 1/2 <H s, s>` subject to `||s|| <= delta`.

use nalgebra::DVector;

use crate::manifold::{inner, TangentPair};

/// Minimal vector-space interface the inner solver needs.
pub trait TangentVector: Clone {
    fn dot(&self, other: &Self) -> f64;
    /// `self += s * other`
    fn axpy(&mut self, s: f64, other: &Self);
    fn scaled(&self, s: f64) -> Self;
    fn zeros_like(&self) -> Self;
}

impl TangentVector for TangentPair {
    fn dot(&self, other: &Self) -> f64 {
        inner(self, other)
    }

    fn axpy(&mut self, s: f64, other: &Self) {
        TangentPair::axpy(self, s, other)
    }

    fn scaled(&self, s: f64) -> Self {
        self.scale(s)
    }

    fn zeros_like(&self) -> Self {
        TangentPair::zeros(self.xq.nrows())
    }
}

impl TangentVector for DVector<f64> {
    fn dot(&self, other: &Self) -> f64 {
        DVector::dot(self, other)
    }

    fn axpy(&mut self, s: f64, other: &Self) {
        DVector::axpy(self, s, other, 1.0)
    }

    fn scaled(&self, s: f64) -> Self {
        self * s
    }

    fn zeros_like(&self) -> Self {
        DVector::zeros(self.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcgStop {
    NegativeCurvature,
    ExceededRadius,
    /// Residual dropped below `||g|| * min(kappa, ||g||^theta)`.
    Converged,
    MaxInner,
    /// The model went up; the previous iterate is returned.
    ModelIncreased,
}

#[derive(Debug, Clone, Copy)]
pub struct TcgParams {
    pub max_inner: usize,
    pub kappa: f64,
    pub theta: f64,
}

#[derive(Debug, Clone)]
pub struct TcgOutcome<V> {
    pub step: V,
    /// `H[step]`, accumulated alongside the step.
    pub hess_step: V,
    pub stop: TcgStop,
    pub inner_iterations: usize,
}

impl<V: TangentVector> TcgOutcome<V> {
    /// Model value `<g, s> + 1/2 <H s, s>` of the returned step.
    pub fn model_value(&self, g: &V) -> f64 {
        g.dot(&self.step) + 0.5 * self.step.dot(&self.hess_step)
    }
}

/// Distance `tau >= 0` along `d` from `eta` to the sphere of radius `delta`.
fn to_boundary(e_pe: f64, e_pd: f64, d_pd: f64, delta: f64) -> f64 {
    (-e_pd + (e_pd * e_pd + d_pd * (delta * delta - e_pe)).max(0.0).sqrt()) / d_pd
}

pub fn tcg_subproblem<V, H>(g: &V, mut hess: H, delta: f64, params: TcgParams) -> TcgOutcome<V>
where
    V: TangentVector,
    H: FnMut(&V) -> V,
{
    let mut eta = g.zeros_like();
    let mut h_eta = g.zeros_like();
    let mut r = g.clone();
    let r0_norm = r.dot(&r).sqrt();
    if r0_norm == 0.0 {
        return TcgOutcome { step: eta, hess_step: h_eta, stop: TcgStop::Converged, inner_iterations: 0 };
    }
    let target = r0_norm * params.kappa.min(r0_norm.powf(params.theta));

    let mut z_r = r.dot(&r);
    let mut d_pd = z_r;
    let mut e_pe = 0.0;
    let mut e_pd = 0.0;
    let mut dir = r.scaled(-1.0);
    let mut model = 0.0;

    let mut stop = TcgStop::MaxInner;
    let mut iters = 0;
    for j in 0..params.max_inner {
        iters = j + 1;
        let h_dir = hess(&dir);
        let d_hd = dir.dot(&h_dir);
        let alpha = z_r / d_hd;
        let e_pe_new = e_pe + 2.0 * alpha * e_pd + alpha * alpha * d_pd;

        if d_hd <= 0.0 || e_pe_new >= delta * delta {
            let tau = to_boundary(e_pe, e_pd, d_pd, delta);
            eta.axpy(tau, &dir);
            h_eta.axpy(tau, &h_dir);
            stop = if d_hd <= 0.0 { TcgStop::NegativeCurvature } else { TcgStop::ExceededRadius };
            break;
        }

        let mut eta_new = eta.clone();
        eta_new.axpy(alpha, &dir);
        let mut h_eta_new = h_eta.clone();
        h_eta_new.axpy(alpha, &h_dir);
        let model_new = g.dot(&eta_new) + 0.5 * eta_new.dot(&h_eta_new);
        if model_new >= model {
            stop = TcgStop::ModelIncreased;
            break;
        }
        eta = eta_new;
        h_eta = h_eta_new;
        model = model_new;
        e_pe = e_pe_new;

        r.axpy(alpha, &h_dir);
        let r_norm = r.dot(&r).sqrt();
        if r_norm <= target {
            stop = TcgStop::Converged;
            break;
        }

        let z_r_old = z_r;
        z_r = r.dot(&r);
        let beta = z_r / z_r_old;
        let mut next = r.scaled(-1.0);
        next.axpy(beta, &dir);
        dir = next;
        e_pd = beta * (e_pd + alpha * d_pd);
        d_pd = z_r + beta * beta * d_pd;
    }

    TcgOutcome { step: eta, hess_step: h_eta, stop, inner_iterations: iters }
}
