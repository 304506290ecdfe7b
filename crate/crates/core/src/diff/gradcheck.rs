//! Central finite-difference verification of analytic gradients.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diff::graph::{gradients, Graph, Var};
use crate::diff::params::ParamStore;
use crate::error::{Error, GraphError, Result};

#[derive(Clone, Copy, Debug)]
pub struct GradCheckConfig {
    /// Finite-difference step `h`; the estimate is `(f(θ+h) − f(θ−h)) / 2h`.
    pub step: f64,
    pub tolerance: f64,
    /// Denominator floor of the relative error. Entries whose gradients are
    /// both below it are judged on `|a − n| / floor`, so finite-difference
    /// roundoff on near-zero gradients does not count as a mismatch.
    pub floor: f64,
    /// Check at most this many entries, drawn without replacement. `None`
    /// checks every entry.
    pub samples: Option<usize>,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            step: 1e-5,
            tolerance: 1e-4,
            floor: 1e-8,
            samples: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    /// max over checked entries of |a − n| / max(|a|, |n|, floor)
    pub max_rel_error: f64,
    pub entries_checked: usize,
    /// Parameter name and flat index of the worst entry.
    pub worst: Option<(String, usize)>,
    pub passed: bool,
}

fn eval_loss<F>(build: &F, params: &ParamStore) -> Result<f64>
where
    F: Fn(&mut Graph, &ParamStore) -> Result<Var>,
{
    let mut g = Graph::new();
    let out = build(&mut g, params)?;
    let v = g.value(out);
    if v.shape() != (1, 1) {
        let (rows, cols) = v.shape();
        return Err(GraphError::NonScalarOutput { rows, cols }.into());
    }
    let v = v.item();
    if !v.is_finite() {
        return Err(GraphError::NonFinite("loss".into()).into());
    }
    Ok(v)
}

/// Compares `build`'s analytic gradients against central differences.
pub fn grad_check<F>(
    build: F,
    params: &ParamStore,
    config: &GradCheckConfig,
) -> Result<GradCheckReport>
where
    F: Fn(&mut Graph, &ParamStore) -> Result<Var>,
{
    if config.floor <= 0.0 {
        return Err(Error::Invalid(format!(
            "relative-error floor must be > 0, got {}",
            config.floor
        )));
    }
    if config.step <= 0.0 {
        return Err(Error::Invalid(format!(
            "finite-difference step must be > 0, got {}",
            config.step
        )));
    }
    let mut g = Graph::new();
    let out = build(&mut g, params)?;
    if !g.value(out).is_finite() {
        return Err(GraphError::NonFinite("loss".into()).into());
    }
    let analytic = gradients(&g, out, params)?;
    drop(g);

    let entries: Vec<(String, usize)> = params
        .iter()
        .flat_map(|(name, t)| (0..t.len()).map(move |i| (name.to_string(), i)))
        .collect();
    let chosen: Vec<&(String, usize)> = match config.samples {
        Some(n) if n < entries.len() => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let mut idx = rand::seq::index::sample(&mut rng, entries.len(), n).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| &entries[i]).collect()
        }
        _ => entries.iter().collect(),
    };

    let mut work = params.clone();
    let mut max_err = 0.0f64;
    let mut worst = None;
    for (name, i) in &chosen {
        let orig = work.get(name).expect("entry from store").data()[*i];
        work.get_mut(name).unwrap().data_mut()[*i] = orig + config.step;
        let plus = eval_loss(&build, &work)?;
        work.get_mut(name).unwrap().data_mut()[*i] = orig - config.step;
        let minus = eval_loss(&build, &work)?;
        work.get_mut(name).unwrap().data_mut()[*i] = orig;

        let numeric = (plus - minus) / (2.0 * config.step);
        let a = analytic.get(name).expect("zero-filled").data()[*i];
        let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(config.floor);
        if err > max_err || worst.is_none() {
            max_err = max_err.max(err);
            worst = Some((name.clone(), *i));
        }
    }
    Ok(GradCheckReport {
        max_rel_error: max_err,
        entries_checked: chosen.len(),
        worst,
        passed: max_err < config.tolerance,
    })
}
