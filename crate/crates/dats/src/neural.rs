//! Minimal feed-forward network machinery: a Gaussian-head MLP with swish
//! hidden layers, analytic backpropagation, and an adaptive-moment
//! optimizer.
//!
//! The network maps an input vector to a diagonal Gaussian over the output:
//! the final linear layer emits `2 * out_dim` values, split into means and
//! raw log-variances. Raw log-variances pass through a learnable soft bound
//!
//! ```text
//! lv  = max_lv - softplus(max_lv - raw)
//! lv' = min_lv + softplus(lv - min_lv)
//! ```
//!
//! which keeps emitted log-variances inside `(min_lv, max_lv)` for all
//! network outputs seen in practice and prevents early variance collapse or
//! explosion.

use crate::error::{Error, Result};
use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::io::{BufRead, Write};

/// Weight on the `sum(max_logvar - min_logvar)` term of the training loss,
/// nudging the soft bounds toward each other.
pub const BOUND_PENALTY_WEIGHT: f64 = 1e-4;

const MAX_LOGVAR_INIT: f64 = 0.5;
const MIN_LOGVAR_INIT: f64 = -10.0;

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn swish(z: f64) -> f64 {
    z * sigmoid(z)
}

fn swish_grad(z: f64) -> f64 {
    let s = sigmoid(z);
    s * (1.0 + z * (1.0 - s))
}

/// Parameters of a Gaussian-head MLP.
#[derive(Clone, Debug)]
pub struct MlpParams {
    pub in_dim: usize,
    pub out_dim: usize,
    pub hidden: Vec<usize>,
    /// One weight matrix per layer; the last maps to `2 * out_dim`.
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    /// Learnable upper soft bound on log-variance, per output dim.
    pub max_logvar: Array1<f64>,
    /// Learnable lower soft bound on log-variance, per output dim.
    pub min_logvar: Array1<f64>,
}

impl MlpParams {
    /// Random initialization: weights `N(0, 1/fan_in)`, zero biases, soft
    /// bounds at `+0.5` and `-10`.
    pub fn init(in_dim: usize, hidden: &[usize], out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut dims = vec![in_dim];
        dims.extend_from_slice(hidden);
        dims.push(2 * out_dim);
        let mut weights = Vec::with_capacity(dims.len() - 1);
        let mut biases = Vec::with_capacity(dims.len() - 1);
        for w in dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let std = (1.0 / fan_in as f64).sqrt();
            let mut m = Array2::zeros((fan_in, fan_out));
            for v in m.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v = std * z;
            }
            weights.push(m);
            biases.push(Array1::zeros(fan_out));
        }
        MlpParams {
            in_dim,
            out_dim,
            hidden: hidden.to_vec(),
            weights,
            biases,
            max_logvar: Array1::from_elem(out_dim, MAX_LOGVAR_INIT),
            min_logvar: Array1::from_elem(out_dim, MIN_LOGVAR_INIT),
        }
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
            + self.max_logvar.len()
            + self.min_logvar.len()
    }

    /// Flat parameter vector in canonical order: per layer weights
    /// (row-major) then bias, then `max_logvar`, then `min_logvar`.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out.extend(self.max_logvar.iter());
        out.extend(self.min_logvar.iter());
        out
    }

    /// Overwrites parameters from a flat vector in canonical order.
    pub fn load_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::dims(format!(
                "flat parameter vector has {} entries, expected {}",
                flat.len(),
                self.param_count()
            )));
        }
        let mut it = flat.iter();
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            for v in w.iter_mut() {
                *v = *it.next().unwrap();
            }
            for v in b.iter_mut() {
                *v = *it.next().unwrap();
            }
        }
        for v in self.max_logvar.iter_mut() {
            *v = *it.next().unwrap();
        }
        for v in self.min_logvar.iter_mut() {
            *v = *it.next().unwrap();
        }
        Ok(())
    }
}

/// Gradients with the same shapes as [`MlpParams`].
#[derive(Clone, Debug)]
pub struct MlpGrads {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub max_logvar: Array1<f64>,
    pub min_logvar: Array1<f64>,
}

impl MlpGrads {
    pub fn zeros_like(params: &MlpParams) -> Self {
        MlpGrads {
            weights: params.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            biases: params.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            max_logvar: Array1::zeros(params.max_logvar.len()),
            min_logvar: Array1::zeros(params.min_logvar.len()),
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out.extend(self.max_logvar.iter());
        out.extend(self.min_logvar.iter());
        out
    }
}

/// A training batch of `(input, target)` rows.
#[derive(Clone, Debug)]
pub struct Batch {
    pub inputs: Array2<f64>,
    pub targets: Array2<f64>,
}

impl Batch {
    pub fn new(inputs: Array2<f64>, targets: Array2<f64>) -> Result<Self> {
        if inputs.nrows() != targets.nrows() {
            return Err(Error::dims(format!(
                "batch has {} input rows but {} target rows",
                inputs.nrows(),
                targets.nrows()
            )));
        }
        if inputs.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
            return Err(Error::contract("batch contains non-finite entries"));
        }
        Ok(Batch { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.nrows() == 0
    }
}

struct ForwardCache {
    /// Activations per layer; `acts[0]` is the input.
    acts: Vec<Array2<f64>>,
    /// Pre-activations of the hidden layers.
    pre: Vec<Array2<f64>>,
    /// Linear output of the final layer (means ++ raw logvars).
    head: Array2<f64>,
    means: Array2<f64>,
    logvars: Array2<f64>,
    /// sigmoid(max_lv - raw), per element.
    sig_upper: Array2<f64>,
    /// sigmoid(lv1 - min_lv), per element.
    sig_lower: Array2<f64>,
}

fn forward_cached(params: &MlpParams, inputs: &Array2<f64>) -> Result<ForwardCache> {
    if inputs.ncols() != params.in_dim {
        return Err(Error::dims(format!(
            "input dim {} does not match network in_dim {}",
            inputs.ncols(),
            params.in_dim
        )));
    }
    if inputs.iter().any(|v| !v.is_finite()) {
        return Err(Error::contract("network input contains non-finite entries"));
    }
    let n = inputs.nrows();
    let d = params.out_dim;
    let n_hidden = params.n_layers() - 1;
    let mut acts: Vec<Array2<f64>> = Vec::with_capacity(n_hidden + 1);
    let mut pre: Vec<Array2<f64>> = Vec::with_capacity(n_hidden);
    acts.push(inputs.clone());
    for l in 0..n_hidden {
        let z = acts[l].dot(&params.weights[l]) + &params.biases[l];
        let h = z.mapv(swish);
        pre.push(z);
        acts.push(h);
    }
    let head = acts[n_hidden].dot(&params.weights[n_hidden]) + &params.biases[n_hidden];

    let mut means = Array2::zeros((n, d));
    let mut logvars = Array2::zeros((n, d));
    let mut sig_upper = Array2::zeros((n, d));
    let mut sig_lower = Array2::zeros((n, d));
    for i in 0..n {
        for j in 0..d {
            means[[i, j]] = head[[i, j]];
            let raw = head[[i, d + j]];
            let max_lv = params.max_logvar[j];
            let min_lv = params.min_logvar[j];
            let lv1 = max_lv - softplus(max_lv - raw);
            let lv = min_lv + softplus(lv1 - min_lv);
            logvars[[i, j]] = lv;
            sig_upper[[i, j]] = sigmoid(max_lv - raw);
            sig_lower[[i, j]] = sigmoid(lv1 - min_lv);
        }
    }
    Ok(ForwardCache {
        acts,
        pre,
        head,
        means,
        logvars,
        sig_upper,
        sig_lower,
    })
}

/// Batched forward pass: per-row Gaussian means and bounded log-variances.
pub fn forward(params: &MlpParams, inputs: &Array2<f64>) -> Result<(Array2<f64>, Array2<f64>)> {
    let cache = forward_cached(params, inputs)?;
    Ok((cache.means, cache.logvars))
}

/// Heteroscedastic Gaussian negative log-likelihood, averaged over rows:
/// `mean_i sum_d [ 0.5 (t - mu)^2 exp(-lv) + 0.5 lv ]`.
///
/// The constant `0.5 ln(2 pi)` per dim is omitted, so a zero-residual batch
/// with `lv = 0` scores exactly 0.
pub fn gaussian_nll(means: &Array2<f64>, logvars: &Array2<f64>, targets: &Array2<f64>) -> f64 {
    assert_eq!(means.dim(), targets.dim());
    assert_eq!(means.dim(), logvars.dim());
    let n = means.nrows().max(1) as f64;
    let mut total = 0.0;
    for ((m, lv), t) in means.iter().zip(logvars.iter()).zip(targets.iter()) {
        let resid = t - m;
        total += 0.5 * (resid * resid * (-lv).exp() + lv);
    }
    total / n
}

/// The full training objective: data NLL plus the soft-bound penalty
/// `1e-4 * sum(max_logvar - min_logvar)`.
pub fn training_loss(params: &MlpParams, batch: &Batch) -> Result<f64> {
    let (means, logvars) = forward(params, &batch.inputs)?;
    let penalty: f64 = params
        .max_logvar
        .iter()
        .zip(params.min_logvar.iter())
        .map(|(mx, mn)| mx - mn)
        .sum();
    Ok(gaussian_nll(&means, &logvars, &batch.targets) + BOUND_PENALTY_WEIGHT * penalty)
}

/// Analytic gradients of [`training_loss`] with respect to every parameter,
/// including the soft bounds. Returns `(loss, grads)`.
pub fn backward(params: &MlpParams, batch: &Batch) -> Result<(f64, MlpGrads)> {
    let cache = forward_cached(params, &batch.inputs)?;
    if batch.targets.ncols() != params.out_dim {
        return Err(Error::dims(format!(
            "target dim {} does not match network out_dim {}",
            batch.targets.ncols(),
            params.out_dim
        )));
    }
    let n = batch.len();
    let nf = n.max(1) as f64;
    let d = params.out_dim;
    let mut grads = MlpGrads::zeros_like(params);

    let penalty: f64 = params
        .max_logvar
        .iter()
        .zip(params.min_logvar.iter())
        .map(|(mx, mn)| mx - mn)
        .sum();
    let loss = gaussian_nll(&cache.means, &cache.logvars, &batch.targets)
        + BOUND_PENALTY_WEIGHT * penalty;

    // Gradient wrt the final linear layer output (means ++ raw logvars).
    let mut g_head = Array2::zeros(cache.head.dim());
    for i in 0..n {
        for j in 0..d {
            let resid = batch.targets[[i, j]] - cache.means[[i, j]];
            let inv_var = (-cache.logvars[[i, j]]).exp();
            let d_mean = -resid * inv_var / nf;
            let d_lv = 0.5 * (1.0 - resid * resid * inv_var) / nf;
            let s_up = cache.sig_upper[[i, j]];
            let s_lo = cache.sig_lower[[i, j]];
            g_head[[i, j]] = d_mean;
            // d lv / d raw = sig_lower * sig_upper
            g_head[[i, d + j]] = d_lv * s_lo * s_up;
            // d lv / d max_lv = sig_lower * (1 - sig_upper)
            grads.max_logvar[j] += d_lv * s_lo * (1.0 - s_up);
            // d lv / d min_lv = 1 - sig_lower
            grads.min_logvar[j] += d_lv * (1.0 - s_lo);
        }
    }
    for j in 0..d {
        grads.max_logvar[j] += BOUND_PENALTY_WEIGHT;
        grads.min_logvar[j] -= BOUND_PENALTY_WEIGHT;
    }

    // Backprop through the linear layers and swish activations.
    let mut upstream = g_head;
    for l in (0..params.n_layers()).rev() {
        grads.weights[l] = cache.acts[l].t().dot(&upstream);
        grads.biases[l] = upstream.sum_axis(Axis(0));
        if l > 0 {
            let mut g_act = upstream.dot(&params.weights[l].t());
            g_act.zip_mut_with(&cache.pre[l - 1], |g, &z| *g *= swish_grad(z));
            upstream = g_act;
        }
    }
    Ok((loss, grads))
}

/// Adaptive-moment optimizer state (bias-corrected).
#[derive(Clone, Debug)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: usize,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(params: &MlpParams, learning_rate: f64) -> Self {
        AdamState {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: vec![0.0; params.param_count()],
            v: vec![0.0; params.param_count()],
        }
    }
}

/// One bias-corrected adaptive-moment update, in place.
pub fn adam_step(params: &mut MlpParams, grads: &MlpGrads, state: &mut AdamState) {
    let flat_grads = grads.flatten();
    assert_eq!(flat_grads.len(), state.m.len(), "optimizer/param shape mismatch");
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let mut flat = params.flatten();
    for i in 0..flat.len() {
        let g = flat_grads[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        flat[i] -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
    }
    params.load_flat(&flat).expect("same shape");
}

// ---------------------------------------------------------------------------
// Serialization: plain-text shape header + flat little-endian doubles.
// ---------------------------------------------------------------------------

const PARAMS_FORMAT_TAG: &str = "mlp v1";

/// Writes parameters as a version-tagged text header followed by the flat
/// little-endian double array in canonical order.
pub fn write_params<W: Write>(w: &mut W, params: &MlpParams) -> Result<()> {
    let hidden = params
        .hidden
        .iter()
        .map(|h| h.to_string())
        .collect::<Vec<_>>()
        .join(",");
    writeln!(
        w,
        "{PARAMS_FORMAT_TAG} in={} hidden={} out={} count={}",
        params.in_dim,
        hidden,
        params.out_dim,
        params.param_count()
    )?;
    for v in params.flatten() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads parameters written by [`write_params`]. Rejects other versions.
pub fn read_params<R: BufRead>(r: &mut R) -> Result<MlpParams> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let header = header.trim_end();
    let rest = header
        .strip_prefix(PARAMS_FORMAT_TAG)
        .ok_or_else(|| Error::Checkpoint(format!("unsupported parameter header '{header}'")))?;
    let mut in_dim = None;
    let mut out_dim = None;
    let mut hidden = None;
    let mut count = None;
    for field in rest.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Checkpoint(format!("malformed header field '{field}'")))?;
        match key {
            "in" => in_dim = Some(parse_usize(value)?),
            "out" => out_dim = Some(parse_usize(value)?),
            "count" => count = Some(parse_usize(value)?),
            "hidden" => {
                let dims = if value.is_empty() {
                    Vec::new()
                } else {
                    value
                        .split(',')
                        .map(parse_usize)
                        .collect::<Result<Vec<_>>>()?
                };
                hidden = Some(dims);
            }
            other => return Err(Error::Checkpoint(format!("unknown header field '{other}'"))),
        }
    }
    let (in_dim, out_dim, hidden, count) = match (in_dim, out_dim, hidden, count) {
        (Some(i), Some(o), Some(h), Some(c)) => (i, o, h, c),
        _ => return Err(Error::Checkpoint("incomplete parameter header".to_string())),
    };
    let mut rng = crate::seeding::rng_from(0);
    let mut params = MlpParams::init(in_dim, &hidden, out_dim, &mut rng);
    if params.param_count() != count {
        return Err(Error::Checkpoint(format!(
            "header count {count} does not match architecture ({} params)",
            params.param_count()
        )));
    }
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)
        .map_err(|e| Error::Checkpoint(format!("truncated parameter payload: {e}")))?;
    let flat: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    params.load_flat(&flat)?;
    Ok(params)
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| Error::Checkpoint(format!("invalid integer '{s}' in header")))
}

/// Central finite-difference gradients of [`training_loss`]; the independent
/// oracle used to verify [`backward`].
pub fn finite_difference_gradients(params: &MlpParams, batch: &Batch, h: f64) -> Result<Vec<f64>> {
    let mut probe = params.clone();
    let flat = params.flatten();
    let mut grads = Vec::with_capacity(flat.len());
    for i in 0..flat.len() {
        let mut plus = flat.clone();
        plus[i] += h;
        probe.load_flat(&plus)?;
        let f_plus = training_loss(&probe, batch)?;
        let mut minus = flat.clone();
        minus[i] -= h;
        probe.load_flat(&minus)?;
        let f_minus = training_loss(&probe, batch)?;
        grads.push((f_plus - f_minus) / (2.0 * h));
    }
    Ok(grads)
}

/// Worst relative error between analytic and finite-difference gradients.
///
/// Relative error is `|a - fd| / max(1e-8, |a| + |fd|)`, the symmetric form
/// that stays meaningful near zero.
pub fn gradient_check(params: &MlpParams, batch: &Batch, h: f64) -> Result<f64> {
    let (_, analytic) = backward(params, batch)?;
    let fd = finite_difference_gradients(params, batch, h)?;
    let flat = analytic.flatten();
    let mut worst = 0.0f64;
    for (a, f) in flat.iter().zip(&fd) {
        let rel = (a - f).abs() / (a.abs() + f.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    Ok(worst)
}
