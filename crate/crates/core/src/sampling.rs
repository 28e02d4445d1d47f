use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::metrics::InnerProduct;
use crate::{Matrix, Vector};

/// Draws uniformly from the `g`-unit sphere: a standard Gaussian in
/// `g`-isometric coordinates `z = L^T x`, mapped back and normalized.
pub(crate) struct SphereSampler {
    l_t_inv: Matrix,
}

impl SphereSampler {
    pub(crate) fn new(g: &InnerProduct) -> Self {
        let l = g.cholesky_factor();
        let l_t_inv = l
            .transpose()
            .try_inverse()
            .expect("Cholesky factor of a positive-definite form is invertible");
        Self { l_t_inv }
    }

    fn gaussian<R: Rng>(&self, rng: &mut R) -> Vector {
        let n = self.l_t_inv.nrows();
        let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.l_t_inv * z
    }

    pub(crate) fn unit<R: Rng>(&self, g: &InnerProduct, rng: &mut R) -> Vector {
        loop {
            let x = self.gaussian(rng);
            let n = g.norm(&x);
            if n > 1e-8 {
                return x / n;
            }
        }
    }

    /// Uniform on the unit sphere of the `g`-orthogonal complement of
    /// `span(against)`; `against` must be `g`-orthonormal.
    pub(crate) fn unit_orthogonal<R: Rng>(&self, g: &InnerProduct, against: &[Vector], rng: &mut R) -> Vector {
        loop {
            let mut x = self.gaussian(rng);
            for _ in 0..2 {
                for a in against {
                    x -= a * g.dot(&x, a);
                }
            }
            let n = g.norm(&x);
            if n > 1e-8 {
                return x / n;
            }
        }
    }
}
