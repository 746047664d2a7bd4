//! Adam with bias correction: β₁=0.9, β₂=0.999, ε=1e-8. Moments and step
//! counts are per parameter, so freezing a parameter for some objective
//! leaves its optimizer state untouched too.

use crate::autodiff::ParamId;
use crate::models::{ModelError, ParamStore};
use crate::tensor::Tensor;
use std::collections::HashMap;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct AdamState {
    pub learning_rate: f64,
    first: HashMap<ParamId, Tensor>,
    second: HashMap<ParamId, Tensor>,
    steps: HashMap<ParamId, u64>,
}

impl AdamState {
    pub fn new(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            first: HashMap::new(),
            second: HashMap::new(),
            steps: HashMap::new(),
        }
    }

    pub fn step_count(&self, id: ParamId) -> u64 {
        self.steps.get(&id).copied().unwrap_or(0)
    }

    /// One update over the given `(parameter, gradient)` pairs. Parameters
    /// not listed are untouched, state included.
    pub fn step(
        &mut self,
        store: &mut ParamStore,
        grads: &[(ParamId, Tensor)],
    ) -> Result<(), ModelError> {
        for (id, grad) in grads {
            let param = store.get_mut(*id);
            if param.shape() != grad.shape() {
                return Err(ModelError::ShapeMismatch {
                    expected: param.shape().to_vec(),
                    got: grad.shape().to_vec(),
                });
            }
            let m = self
                .first
                .entry(*id)
                .or_insert_with(|| Tensor::zeros(grad.shape()));
            let v = self
                .second
                .entry(*id)
                .or_insert_with(|| Tensor::zeros(grad.shape()));
            let t = self.steps.entry(*id).or_insert(0);
            *t += 1;
            let bias1 = 1.0 - BETA1.powi(*t as i32);
            let bias2 = 1.0 - BETA2.powi(*t as i32);
            for i in 0..grad.len() {
                let g = grad[i];
                m[i] = BETA1 * m[i] + (1.0 - BETA1) * g;
                v[i] = BETA2 * v[i] + (1.0 - BETA2) * g * g;
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                param[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPS);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store_with(values: Vec<f64>) -> (ParamStore, ParamId) {
        let mut store = ParamStore::new();
        let id = store.insert("p", Tensor::vector(values));
        (store, id)
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let (mut store, id) = store_with(vec![1.0, -2.0, 0.5]);
        let before = store.get(id).clone();
        let mut adam = AdamState::new(0.1);
        adam.step(&mut store, &[(id, Tensor::zeros(&[3]))]).unwrap();
        assert_eq!(&before, store.get(id));
    }

    #[test]
    fn first_step_is_bounded_by_learning_rate() {
        let lr = 0.05;
        let (mut store, id) = store_with(vec![0.0, 0.0]);
        let mut adam = AdamState::new(lr);
        adam.step(&mut store, &[(id, Tensor::vector(vec![3.0, -0.004]))])
            .unwrap();
        for &v in store.get(id).iter() {
            assert!(v.abs() <= lr * (1.0 + 1e-6), "step {v} exceeds lr bound");
        }
        // Direction opposes the gradient.
        assert!(store.get(id)[0] < 0.0);
        assert!(store.get(id)[1] > 0.0);
    }

    #[test]
    fn unlisted_parameters_keep_state() {
        let mut store = ParamStore::new();
        let a = store.insert("a", Tensor::scalar(1.0));
        let b = store.insert("b", Tensor::scalar(1.0));
        let mut adam = AdamState::new(0.1);
        adam.step(&mut store, &[(a, Tensor::scalar(1.0))]).unwrap();
        adam.step(&mut store, &[(a, Tensor::scalar(1.0))]).unwrap();
        assert_eq!(adam.step_count(a), 2);
        assert_eq!(adam.step_count(b), 0);
        assert_eq!(store.get(b).as_scalar(), 1.0);
    }

    #[test]
    fn deterministic_given_identical_inputs() {
        let run = || {
            let (mut store, id) = store_with(vec![0.3, 0.7]);
            let mut adam = AdamState::new(0.01);
            for k in 0..10 {
                let g = Tensor::vector(vec![(k as f64).sin(), 0.5 - k as f64 * 0.01]);
                adam.step(&mut store, &[(id, g)]).unwrap();
            }
            store.get(id).data().to_vec()
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
