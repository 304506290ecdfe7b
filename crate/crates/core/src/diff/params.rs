use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor::Tensor;

/// Named trainable arrays.
///
/// Backed by a `BTreeMap`, so iteration is in identifier order and does not
/// depend on insertion history.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamStore {
    params: BTreeMap<String, Tensor>,
    seed: u64,
}

impl ParamStore {
    pub fn new(seed: u64) -> Self {
        ParamStore {
            params: BTreeMap::new(),
            seed,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Tensor) {
        self.params.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.params.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.params.get_mut(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.params.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.params.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.params.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Total number of scalar entries.
    pub fn num_values(&self) -> usize {
        self.params.values().map(Tensor::len).sum()
    }

    /// Sets every entry of every parameter to zero.
    pub fn zero_all(&mut self) {
        for t in self.params.values_mut() {
            t.data_mut().iter_mut().for_each(|v| *v = 0.0);
        }
    }

    /// Union of two stores; entries of `other` win on name collisions.
    pub fn merged(&self, other: &ParamStore) -> ParamStore {
        let mut out = self.clone();
        for (k, v) in &other.params {
            out.params.insert(k.clone(), v.clone());
        }
        out
    }

    /// Parameters whose identifier starts with `prefix`.
    pub fn subset(&self, prefix: &str) -> ParamStore {
        ParamStore {
            params: self
                .params
                .iter()
                .filter(|(k, _)| k.starts_with(prefix))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            seed: self.seed,
        }
    }
}

/// Deterministic parameter initializer.
///
/// Draws every entry uniformly from `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`
/// using a ChaCha stream seeded once, so the resulting store depends only on
/// the seed and the order of `uniform` calls.
pub struct Initializer {
    rng: ChaCha8Rng,
    store: ParamStore,
}

impl Initializer {
    pub fn new(seed: u64) -> Self {
        Initializer {
            rng: ChaCha8Rng::seed_from_u64(seed),
            store: ParamStore::new(seed),
        }
    }

    pub fn uniform(&mut self, name: impl Into<String>, rows: usize, cols: usize, fan_in: usize) {
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        let data = (0..rows * cols)
            .map(|_| self.rng.random_range(-bound..=bound))
            .collect();
        self.store.insert(name, Tensor::from_vec(rows, cols, data));
    }

    pub fn finish(self) -> ParamStore {
        self.store
    }
}
