use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diff::graph::Gradients;
use crate::diff::params::ParamStore;
use crate::error::GraphError;
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RmsPropConfig {
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for RmsPropConfig {
    fn default() -> Self {
        RmsPropConfig {
            learning_rate: 0.01,
            rho: 0.9,
            epsilon: 1e-8,
        }
    }
}

/// RMSprop with one squared-gradient accumulator per parameter:
///
/// ```text
/// acc ← ρ·acc + (1−ρ)·g²
/// θ   ← θ − lr·g / (√acc + ε)
/// ```
#[derive(Clone, Debug)]
pub struct RmsProp {
    pub config: RmsPropConfig,
    accumulators: BTreeMap<String, Tensor>,
}

impl RmsProp {
    pub fn new(config: RmsPropConfig) -> Self {
        RmsProp {
            config,
            accumulators: BTreeMap::new(),
        }
    }

    pub fn accumulator(&self, name: &str) -> Option<&Tensor> {
        self.accumulators.get(name)
    }

    /// Applies one update for every parameter that has a gradient. Nothing is
    /// modified if any gradient is non-finite.
    pub fn step(&mut self, params: &mut ParamStore, grads: &Gradients) -> Result<(), GraphError> {
        if let Some(name) = grads.first_non_finite() {
            return Err(GraphError::NonFinite(format!("gradient of `{name}`")));
        }
        for (name, g) in grads.iter() {
            let p = params
                .get(name)
                .ok_or_else(|| GraphError::UnknownParam(name.to_string()))?;
            if p.shape() != g.shape() {
                return Err(GraphError::Shape {
                    node: 0,
                    op: "rmsprop",
                    detail: format!(
                        "gradient of `{name}` is {:?}, parameter is {:?}",
                        g.shape(),
                        p.shape()
                    ),
                });
            }
        }
        let RmsPropConfig {
            learning_rate: lr,
            rho,
            epsilon: eps,
        } = self.config;
        for (name, g) in grads.iter() {
            let acc = self
                .accumulators
                .entry(name.to_string())
                .or_insert_with(|| Tensor::zeros(g.rows(), g.cols()));
            let p = params.get_mut(name).expect("checked above");
            for ((theta, a), &gv) in p.data_mut().iter_mut().zip(acc.data_mut()).zip(g.data()) {
                *a = rho * *a + (1.0 - rho) * gv * gv;
                *theta -= lr * gv / (a.sqrt() + eps);
            }
        }
        Ok(())
    }
}
