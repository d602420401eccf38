use ndarray::Zip;

use super::params::Parameters;
use super::TrainConfig;
use crate::scalar::Real;

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T> {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub first_moment: Parameters<T>,
    pub second_moment: Parameters<T>,
    /// Number of updates applied so far.
    pub step: u64,
}

impl<T: Real> Adam<T> {
    pub fn new(params: &Parameters<T>, config: &TrainConfig) -> Self {
        Self {
            learning_rate: config.learning_rate,
            beta1: config.beta1,
            beta2: config.beta2,
            epsilon: config.epsilon,
            first_moment: params.zeros_like(),
            second_moment: params.zeros_like(),
            step: 0,
        }
    }

    /// Applies one update. Returns `false` and leaves everything untouched if
    /// any gradient entry is not finite.
    pub fn update(&mut self, params: &mut Parameters<T>, grads: &Parameters<T>) -> bool {
        if !grads.is_finite() {
            return false;
        }
        self.step += 1;
        let t = self.step as i32;
        let b1 = T::of(self.beta1);
        let b2 = T::of(self.beta2);
        let c1 = T::of(1.0 - self.beta1.powi(t));
        let c2 = T::of(1.0 - self.beta2.powi(t));
        let lr = T::of(self.learning_rate);
        let eps = T::of(self.epsilon);
        let one = T::one();
        for (((p, g), m), v) in params
            .tensors
            .iter_mut()
            .zip(&grads.tensors)
            .zip(&mut self.first_moment.tensors)
            .zip(&mut self.second_moment.tensors)
        {
            Zip::from(p).and(g).and(m).and(v).for_each(|p, &g, m, v| {
                *m = b1 * *m + (one - b1) * g;
                *v = b2 * *v + (one - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
            });
        }
        true
    }
}
