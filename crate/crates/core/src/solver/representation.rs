use crate::error::{check_dim, Result};
use crate::functionals::FunctionalVector;
use crate::kernels::{DerivativeOp, KernelSpec, OpTerms};
use crate::parallel::{self, Parallelism};

/// Recovered function `u(x) = sum_n c_n K(x, phi_n)` with `c = (Theta + eta R)^{-1} z`.
#[derive(Clone, Debug)]
pub struct SolutionRepresentation {
    pub coefficients: Vec<f64>,
    pub functionals: FunctionalVector,
    pub kernel: KernelSpec,
    /// Functional values `z` the coefficients interpolate.
    pub z: Vec<f64>,
    pub loss_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl SolutionRepresentation {
    /// Bare representation from coefficients (no solver history).
    pub fn from_coefficients(coefficients: Vec<f64>, functionals: FunctionalVector, kernel: KernelSpec) -> Result<Self> {
        check_dim(functionals.len(), coefficients.len())?;
        Ok(Self { coefficients, functionals, kernel, z: vec![], loss_history: vec![], iterations: 0, converged: false })
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.evaluate_op(DerivativeOp::Identity, x)
    }

    /// `L u(x)` for an operator acting on the recovered function.
    pub fn evaluate_op(&self, op: DerivativeOp, x: &[f64]) -> Result<f64> {
        check_dim(self.kernel.dim(), x.len())?;
        let l = OpTerms::new(op, self.kernel.dim())?;
        let terms = self.block_terms()?;
        Ok(self.eval_with(&l, &terms, x))
    }

    /// Values at points stored flat with stride `dim`.
    pub fn evaluate_many(&self, points: &[f64], par: Parallelism) -> Result<Vec<f64>> {
        let d = self.kernel.dim();
        if points.len() % d != 0 {
            return Err(crate::Error::DimensionMismatch { expected: d, got: points.len() % d });
        }
        let l = OpTerms::new(DerivativeOp::Identity, d)?;
        let terms = self.block_terms()?;
        let mut out = vec![0.0; points.len() / d];
        parallel::map_indexed(par, &mut out, |i| self.eval_with(&l, &terms, &points[i * d..(i + 1) * d]));
        Ok(out)
    }

    fn block_terms(&self) -> Result<Vec<OpTerms>> {
        self.functionals.blocks().iter().map(|b| OpTerms::new(b.op, self.kernel.dim())).collect()
    }

    fn eval_with(&self, l: &OpTerms, terms: &[OpTerms], x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (b, t) in self.functionals.blocks().iter().zip(terms) {
            for (k, &p) in b.points.iter().enumerate() {
                s += self.coefficients[b.offset + k] * self.kernel.bilinear_terms(l, x, t, self.functionals.point(p));
            }
        }
        s
    }
}
