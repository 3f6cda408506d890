//! The position-regression networks: DN (dense) and ADN (attention-augmented).
//!
//! Both consume one normalized CSI matrix as two real-valued views and emit an
//! xy position estimate:
//!
//! 1. **Subcarrier stage** — the K×2M per-subcarrier view (each subcarrier's
//!    re/im across all antennas) goes through a two-layer MLP into K tokens of
//!    width `d_sub`; ADN adds a residual self-attention block over those
//!    tokens. A linear layer projects each token to 2 values.
//! 2. **Reassembly** — the K projected pairs are flattened row-major to one
//!    1×2K row and broadcast-added onto the raw M×2K per-antenna view.
//! 3. **Antenna stage** — that M×2K matrix goes through a second two-layer MLP
//!    into M tokens of width `d_ant`; ADN adds a second residual attention
//!    block (whose row-stochastic matrix is the antenna-attention diagnostic).
//! 4. **Head** — mean-pool the antenna tokens and run a small MLP down to the
//!    2-unit linear output.
//!
//! DN is the identical pipeline with both attention blocks replaced by the
//! identity, so any accuracy gap is attributable to attention alone.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Graph, NodeId, Scalar, Tensor};
use crate::dataset::{CsiSample, Normalizer};
use crate::error::{Error, Result};
use crate::seed;

/// Hidden width of the two stage MLPs.
pub const STAGE_HIDDEN: usize = 64;

/// Checkpoint file magic.
pub const MODEL_MAGIC: [u8; 4] = *b"CSIM";
/// Checkpoint format version this build writes and reads.
pub const MODEL_VERSION: u32 = 1;

/// Architecture description. `dn`/`adn` constructors give the two named
/// configurations; mixed attention flags are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Antennas (M) the model expects.
    pub num_antennas: usize,
    /// Subcarriers (K) the model expects.
    pub num_subcarriers: usize,
    /// Subcarrier token width.
    pub d_sub: usize,
    /// Antenna token width.
    pub d_ant: usize,
    /// Hidden widths of the regression head (the final linear 2-unit layer is
    /// implicit).
    pub head_widths: Vec<usize>,
    /// Residual self-attention over subcarrier tokens.
    pub subcarrier_attention: bool,
    /// Residual self-attention over antenna tokens.
    pub antenna_attention: bool,
    /// Seed for parameter initialization.
    pub init_seed: u64,
}

impl ModelConfig {
    /// The attention-free baseline.
    pub fn dn(num_antennas: usize, num_subcarriers: usize, init_seed: u64) -> Self {
        ModelConfig {
            num_antennas,
            num_subcarriers,
            d_sub: 32,
            d_ant: 32,
            head_widths: vec![128, 64],
            subcarrier_attention: false,
            antenna_attention: false,
            init_seed,
        }
    }

    /// The attention-augmented network (both blocks on).
    pub fn adn(num_antennas: usize, num_subcarriers: usize, init_seed: u64) -> Self {
        ModelConfig {
            subcarrier_attention: true,
            antenna_attention: true,
            ..ModelConfig::dn(num_antennas, num_subcarriers, init_seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_antennas == 0 || self.num_subcarriers == 0 {
            return Err(Error::Config("model dimensions must be positive".into()));
        }
        if self.d_sub == 0 || self.d_ant == 0 {
            return Err(Error::Config("token widths must be positive".into()));
        }
        if self.head_widths.iter().any(|&w| w == 0) {
            return Err(Error::Config("head widths must be positive".into()));
        }
        if self.subcarrier_attention != self.antenna_attention {
            return Err(Error::Config(
                "attention flags must be both set (adn) or both clear (dn)".into(),
            ));
        }
        Ok(())
    }

    /// True for the attention-augmented configuration.
    pub fn is_adn(&self) -> bool {
        self.subcarrier_attention && self.antenna_attention
    }

    /// "dn" or "adn".
    pub fn kind_name(&self) -> &'static str {
        if self.is_adn() {
            "adn"
        } else {
            "dn"
        }
    }
}

/// Where each named parameter sits in the flat parameter list.
#[derive(Debug, Clone)]
struct Layout {
    sub_embed: [usize; 4], // w1, b1, w2, b2
    sub_attn: Option<[usize; 3]>,
    sub_proj: [usize; 2],
    ant_embed: [usize; 4],
    ant_attn: Option<[usize; 3]>,
    head: Vec<[usize; 2]>,
    out: [usize; 2],
}

/// (name, rows, cols, is_weight) for every parameter, in storage order.
fn param_specs(config: &ModelConfig) -> Vec<(String, usize, usize, bool)> {
    let m = config.num_antennas;
    let k = config.num_subcarriers;
    let h = STAGE_HIDDEN;
    let mut specs: Vec<(String, usize, usize, bool)> = vec![
        ("sub_embed_w1".into(), 2 * m, h, true),
        ("sub_embed_b1".into(), 1, h, false),
        ("sub_embed_w2".into(), h, config.d_sub, true),
        ("sub_embed_b2".into(), 1, config.d_sub, false),
    ];
    if config.subcarrier_attention {
        for n in ["sub_attn_wq", "sub_attn_wk", "sub_attn_wv"] {
            specs.push((n.into(), config.d_sub, config.d_sub, true));
        }
    }
    specs.push(("sub_proj_w".into(), config.d_sub, 2, true));
    specs.push(("sub_proj_b".into(), 1, 2, false));
    specs.push(("ant_embed_w1".into(), 2 * k, h, true));
    specs.push(("ant_embed_b1".into(), 1, h, false));
    specs.push(("ant_embed_w2".into(), h, config.d_ant, true));
    specs.push(("ant_embed_b2".into(), 1, config.d_ant, false));
    if config.antenna_attention {
        for n in ["ant_attn_wq", "ant_attn_wk", "ant_attn_wv"] {
            specs.push((n.into(), config.d_ant, config.d_ant, true));
        }
    }
    let mut prev = config.d_ant;
    for (i, &w) in config.head_widths.iter().enumerate() {
        specs.push((format!("head{i}_w"), prev, w, true));
        specs.push((format!("head{i}_b"), 1, w, false));
        prev = w;
    }
    specs.push(("out_w".into(), prev, 2, true));
    specs.push(("out_b".into(), 1, 2, false));
    specs
}

fn build_layout(config: &ModelConfig) -> Layout {
    let specs = param_specs(config);
    let pos = |name: &str| specs.iter().position(|(n, ..)| n == name).unwrap();
    Layout {
        sub_embed: [
            pos("sub_embed_w1"),
            pos("sub_embed_b1"),
            pos("sub_embed_w2"),
            pos("sub_embed_b2"),
        ],
        sub_attn: config
            .subcarrier_attention
            .then(|| [pos("sub_attn_wq"), pos("sub_attn_wk"), pos("sub_attn_wv")]),
        sub_proj: [pos("sub_proj_w"), pos("sub_proj_b")],
        ant_embed: [
            pos("ant_embed_w1"),
            pos("ant_embed_b1"),
            pos("ant_embed_w2"),
            pos("ant_embed_b2"),
        ],
        ant_attn: config
            .antenna_attention
            .then(|| [pos("ant_attn_wq"), pos("ant_attn_wk"), pos("ant_attn_wv")]),
        head: (0..config.head_widths.len())
            .map(|i| {
                [
                    pos(&format!("head{i}_w")),
                    pos(&format!("head{i}_b")),
                ]
            })
            .collect(),
        out: [pos("out_w"), pos("out_b")],
    }
}

/// A concrete network: config plus one tensor per named parameter.
#[derive(Debug, Clone)]
pub struct Network<T: Scalar> {
    config: ModelConfig,
    names: Vec<String>,
    params: Vec<Tensor<T>>,
    layout: Layout,
}

/// Node handles produced by one forward pass.
#[derive(Debug, Clone, Copy)]
pub struct ForwardNodes {
    /// 1×2 position estimate.
    pub pred: NodeId,
    /// K×K row-stochastic subcarrier attention matrix (ADN only).
    pub sub_attention: Option<NodeId>,
    /// M×M row-stochastic antenna attention matrix (ADN only).
    pub ant_attention: Option<NodeId>,
}

impl<T: Scalar> Network<T> {
    /// Initializes parameters: weights uniform in ±√(6/(fan_in+fan_out)),
    /// biases zero. Every tensor draws from its own named substream of
    /// `config.init_seed`, so DN and ADN with the same seed share identical
    /// non-attention parameters.
    pub fn init(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let specs = param_specs(&config);
        let mut names = Vec::with_capacity(specs.len());
        let mut params = Vec::with_capacity(specs.len());
        for (name, rows, cols, is_weight) in &specs {
            let t = if *is_weight {
                let bound = (6.0 / (*rows + *cols) as f64).sqrt();
                let mut rng = seed::stream_rng(config.init_seed, seed::fnv1a(name.as_bytes()), 0);
                Tensor::from_fn(*rows, *cols, |_, _| {
                    T::from_f64(rng.gen_range(-bound..bound))
                })
            } else {
                Tensor::zeros(*rows, *cols)
            };
            names.push(name.clone());
            params.push(t);
        }
        let layout = build_layout(&config);
        Ok(Network {
            config,
            names,
            params,
            layout,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn params(&self) -> &[Tensor<T>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Tensor<T>] {
        &mut self.params
    }

    /// Replaces all parameters; shapes must match the architecture.
    pub fn set_params(&mut self, params: Vec<Tensor<T>>) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::Shape(format!(
                "expected {} parameter tensors, got {}",
                self.params.len(),
                params.len()
            )));
        }
        for (i, (new, old)) in params.iter().zip(&self.params).enumerate() {
            if new.shape() != old.shape() {
                return Err(Error::Shape(format!(
                    "parameter `{}` should be {:?}, got {:?}",
                    self.names[i],
                    old.shape(),
                    new.shape()
                )));
            }
        }
        self.params = params;
        Ok(())
    }

    /// Total scalar parameter count.
    pub fn param_count(&self) -> usize {
        self.params.iter().map(|p| p.len()).sum()
    }

    /// Registers every parameter as a trainable graph leaf, in storage order.
    pub fn bind(&self, g: &mut Graph<T>) -> Vec<NodeId> {
        self.params.iter().map(|p| g.param(p.clone())).collect()
    }

    /// Registers every parameter as a frozen constant (for inference).
    pub fn bind_frozen(&self, g: &mut Graph<T>) -> Vec<NodeId> {
        self.params.iter().map(|p| g.constant(p.clone())).collect()
    }

    /// Converts parameter precision (e.g. a trained f32 net to f64 for
    /// gradient checking).
    pub fn cast<U: Scalar>(&self) -> Network<U> {
        Network {
            config: self.config.clone(),
            names: self.names.clone(),
            params: self.params.iter().map(|p| p.cast()).collect(),
            layout: self.layout.clone(),
        }
    }

    fn two_layer(
        &self,
        g: &mut Graph<T>,
        ids: &[NodeId],
        idx: &[usize; 4],
        input: NodeId,
    ) -> Result<NodeId> {
        let a = g.matmul(input, ids[idx[0]])?;
        let a = g.add_bias(a, ids[idx[1]])?;
        let a = g.relu(a)?;
        let a = g.matmul(a, ids[idx[2]])?;
        g.add_bias(a, ids[idx[3]])
    }

    fn attention_block(
        &self,
        g: &mut Graph<T>,
        ids: &[NodeId],
        idx: &[usize; 3],
        tokens: NodeId,
    ) -> Result<(NodeId, NodeId)> {
        let q = g.matmul(tokens, ids[idx[0]])?;
        let k = g.matmul(tokens, ids[idx[1]])?;
        let v = g.matmul(tokens, ids[idx[2]])?;
        let (out, attn) = attention_nodes(g, q, k, v)?;
        let res = g.add(tokens, out)?;
        Ok((res, attn))
    }

    /// Builds the forward computation on `g` from already-registered parameter
    /// nodes (`ids`, as returned by [`Network::bind`]) and the two input
    /// views. Returns the prediction node plus any cached attention matrices.
    pub fn forward_from(
        &self,
        g: &mut Graph<T>,
        ids: &[NodeId],
        sub_view: NodeId,
        ant_view: NodeId,
    ) -> Result<ForwardNodes> {
        let m = self.config.num_antennas;
        let k = self.config.num_subcarriers;
        if g.value(sub_view).shape() != (k, 2 * m) {
            return Err(Error::Shape(format!(
                "subcarrier view should be {}x{}, got {:?}",
                k,
                2 * m,
                g.value(sub_view).shape()
            )));
        }
        if g.value(ant_view).shape() != (m, 2 * k) {
            return Err(Error::Shape(format!(
                "antenna view should be {}x{}, got {:?}",
                m,
                2 * k,
                g.value(ant_view).shape()
            )));
        }

        // Stage 1: subcarrier tokens (K × d_sub).
        let mut tokens = self.two_layer(g, ids, &self.layout.sub_embed, sub_view)?;
        let mut sub_attention = None;
        if let Some(idx) = self.layout.sub_attn {
            let (res, attn) = self.attention_block(g, ids, &idx, tokens)?;
            tokens = res;
            sub_attention = Some(attn);
        }

        // Project each token to 2 values and broadcast onto the antenna view:
        // row-major flattening aligns token k with columns (2k, 2k+1).
        let proj = g.matmul(tokens, ids[self.layout.sub_proj[0]])?;
        let proj = g.add_bias(proj, ids[self.layout.sub_proj[1]])?;
        let proj_row = g.reshape(proj, 1, 2 * k)?;
        let ones = g.constant(Tensor::ones(m, 1));
        let bcast = g.matmul(ones, proj_row)?;
        let enriched = g.add(ant_view, bcast)?;

        // Stage 2: antenna tokens (M × d_ant).
        let mut ant_tokens = self.two_layer(g, ids, &self.layout.ant_embed, enriched)?;
        let mut ant_attention = None;
        if let Some(idx) = self.layout.ant_attn {
            let (res, attn) = self.attention_block(g, ids, &idx, ant_tokens)?;
            ant_tokens = res;
            ant_attention = Some(attn);
        }

        // Head: mean-pool then MLP to 2 outputs.
        let mut x = g.mean_rows(ant_tokens)?;
        for idx in &self.layout.head {
            let a = g.matmul(x, ids[idx[0]])?;
            let a = g.add_bias(a, ids[idx[1]])?;
            x = g.relu(a)?;
        }
        let out = g.matmul(x, ids[self.layout.out[0]])?;
        let pred = g.add_bias(out, ids[self.layout.out[1]])?;

        Ok(ForwardNodes {
            pred,
            sub_attention,
            ant_attention,
        })
    }
}

/// Scaled dot-product self-attention on graph nodes:
/// `softmax_rows(Q·Kᵀ / √d) · V`. Returns `(output, attention_matrix)`.
pub fn attention_nodes<T: Scalar>(
    g: &mut Graph<T>,
    q: NodeId,
    k: NodeId,
    v: NodeId,
) -> Result<(NodeId, NodeId)> {
    let (qr, qc) = g.value(q).shape();
    let (kr, kc) = g.value(k).shape();
    let (vr, vc) = g.value(v).shape();
    if qc != kc {
        return Err(Error::Shape(format!(
            "attention: Q is {qr}x{qc} but K is {kr}x{kc} (feature dims differ)"
        )));
    }
    if kr != vr {
        return Err(Error::Shape(format!(
            "attention: K has {kr} tokens but V has {vr} ({vr}x{vc})"
        )));
    }
    let kt = g.transpose(k)?;
    let scores = g.matmul(q, kt)?;
    let scaled = g.scale(scores, T::from_f64(1.0 / (qc as f64).sqrt()))?;
    let attn = g.softmax_rows(scaled)?;
    let out = g.matmul(attn, v)?;
    Ok((out, attn))
}

/// Eager attention on plain tensors.
#[derive(Debug, Clone)]
pub struct AttentionOutput<T> {
    /// T×d output.
    pub output: Tensor<T>,
    /// T×T row-stochastic attention matrix.
    pub weights: Tensor<T>,
}

/// Scaled dot-product attention on plain tensors (builds a throwaway graph, so
/// it shares every numeric detail with the in-model blocks).
pub fn attention<T: Scalar>(
    q: &Tensor<T>,
    k: &Tensor<T>,
    v: &Tensor<T>,
) -> Result<AttentionOutput<T>> {
    let mut g = Graph::new();
    let qi = g.constant(q.clone());
    let ki = g.constant(k.clone());
    let vi = g.constant(v.clone());
    let (out, attn) = attention_nodes(&mut g, qi, ki, vi)?;
    Ok(AttentionOutput {
        output: g.value(out).clone(),
        weights: g.value(attn).clone(),
    })
}

/// Builds the two normalized input views of a sample: the K×2M per-subcarrier
/// view and the M×2K per-antenna view. Normalization divides in f32 (the
/// storage precision) before any widening, so f32 and f64 networks see
/// identical inputs.
pub fn input_views<T: Scalar>(
    sample: &CsiSample,
    normalizer: &Normalizer,
) -> (Tensor<T>, Tensor<T>) {
    let m = sample.csi.num_antennas();
    let k = sample.csi.num_subcarriers();
    let s = normalizer.scale;
    let sub = Tensor::from_fn(k, 2 * m, |kk, col| {
        let z = sample.csi.get(col / 2, kk);
        let v = if col % 2 == 0 { z.re } else { z.im } / s;
        T::from_f64(v as f64)
    });
    let ant = Tensor::from_fn(m, 2 * k, |mm, col| {
        let z = sample.csi.get(mm, col / 2);
        let v = if col % 2 == 0 { z.re } else { z.im } / s;
        T::from_f64(v as f64)
    });
    (sub, ant)
}

/// Training provenance stored in a checkpoint.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    /// Initialization seed of the winning run.
    pub init_seed: u64,
    /// Epochs actually run (early stopping included).
    pub epochs_run: usize,
    /// Epoch with the best validation error (the restored weights).
    pub best_epoch: usize,
    /// Validation mean error of the restored weights, millimeters.
    pub val_error_mm: f64,
}

/// A trained network bundled with the normalizer it was trained under.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub network: Network<f32>,
    pub normalizer: Normalizer,
    pub meta: ModelMeta,
}

/// One inference result.
#[derive(Debug, Clone)]
pub struct Prediction {
    /// Estimated xy position, meters.
    pub position: [f64; 2],
    /// K×K subcarrier attention matrix (ADN only).
    pub sub_attention: Option<Tensor<f32>>,
    /// M×M antenna attention matrix (ADN only).
    pub ant_attention: Option<Tensor<f32>>,
}

impl TrainedModel {
    /// Runs the network on one raw (un-normalized) sample.
    pub fn predict(&self, sample: &CsiSample) -> Result<Prediction> {
        let cfg = self.network.config();
        if sample.csi.num_antennas() != cfg.num_antennas
            || sample.csi.num_subcarriers() != cfg.num_subcarriers
        {
            return Err(Error::Dim(format!(
                "model expects {}x{} CSI, sample is {}x{}",
                cfg.num_antennas,
                cfg.num_subcarriers,
                sample.csi.num_antennas(),
                sample.csi.num_subcarriers()
            )));
        }
        let (sub, ant) = input_views::<f32>(sample, &self.normalizer);
        let mut g = Graph::new();
        let ids = self.network.bind_frozen(&mut g);
        let sv = g.constant(sub);
        let av = g.constant(ant);
        let out = self.network.forward_from(&mut g, &ids, sv, av)?;
        Ok(Prediction {
            position: [
                g.value(out.pred).get(0, 0) as f64,
                g.value(out.pred).get(0, 1) as f64,
            ],
            sub_attention: out.sub_attention.map(|id| g.value(id).clone()),
            ant_attention: out.ant_attention.map(|id| g.value(id).clone()),
        })
    }
}

/// Per-antenna attention weights for one sample: the column means of the M×M
/// antenna attention matrix (how much weight every query token pays to each
/// antenna, averaged). Sums to 1 up to rounding. Errors on a DN model.
pub fn extract_antenna_attention(model: &TrainedModel, sample: &CsiSample) -> Result<Vec<f64>> {
    let pred = model.predict(sample)?;
    let attn = pred
        .ant_attention
        .ok_or_else(|| Error::Config("model has no antenna attention".into()))?;
    let (rows, cols) = attn.shape();
    let mut out = vec![0.0f64; cols];
    for i in 0..rows {
        for (o, &v) in out.iter_mut().zip(attn.row(i)) {
            *o += v as f64;
        }
    }
    for o in &mut out {
        *o /= rows as f64;
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    format: String,
    config: ModelConfig,
    normalizer: Normalizer,
    meta: ModelMeta,
    param_names: Vec<String>,
    param_shapes: Vec<(usize, usize)>,
}

/// Saves a trained model: `"CSIM"` magic, u32 version, u32 JSON length, a JSON
/// header (config, normalizer, metadata, parameter inventory), then every
/// parameter tensor as little-endian f32 in storage order.
pub fn save_model<P: AsRef<Path>>(model: &TrainedModel, path: P) -> Result<()> {
    let header = CheckpointHeader {
        format: "csiloc-model".into(),
        config: model.network.config().clone(),
        normalizer: model.normalizer,
        meta: model.meta.clone(),
        param_names: model.network.names().to_vec(),
        param_shapes: model
            .network
            .params()
            .iter()
            .map(|p| p.shape())
            .collect(),
    };
    let json = serde_json::to_vec(&header)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MODEL_MAGIC)?;
    w.write_u32::<LittleEndian>(MODEL_VERSION)?;
    w.write_u32::<LittleEndian>(json.len() as u32)?;
    w.write_all(&json)?;
    for p in model.network.params() {
        for &v in p.data() {
            w.write_f32::<LittleEndian>(v)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Loads a model checkpoint written by [`save_model`].
pub fn load_model<P: AsRef<Path>>(path: P) -> Result<TrainedModel> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| Error::Truncated("model file too short".into()))?;
    if magic != MODEL_MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let version = r
        .read_u32::<LittleEndian>()
        .map_err(|_| Error::Truncated("model header".into()))?;
    if version != MODEL_VERSION {
        return Err(Error::Version {
            found: version,
            supported: MODEL_VERSION,
        });
    }
    let json_len = r
        .read_u32::<LittleEndian>()
        .map_err(|_| Error::Truncated("model header".into()))? as usize;
    let mut json = vec![0u8; json_len];
    r.read_exact(&mut json)
        .map_err(|_| Error::Truncated("model JSON header".into()))?;
    let header: CheckpointHeader = serde_json::from_slice(&json)?;
    if header.format != "csiloc-model" {
        return Err(Error::Invalid(format!(
            "unexpected checkpoint format `{}`",
            header.format
        )));
    }

    let mut network: Network<f32> = Network::init(header.config)?;
    if header.param_names != network.names() {
        return Err(Error::Invalid(
            "checkpoint parameter inventory does not match its architecture".into(),
        ));
    }
    let mut params = Vec::with_capacity(header.param_shapes.len());
    for (name, &(rows, cols)) in header.param_names.iter().zip(&header.param_shapes) {
        let mut data = vec![0.0f32; rows * cols];
        for v in &mut data {
            *v = r
                .read_f32::<LittleEndian>()
                .map_err(|_| Error::Truncated(format!("parameters of `{name}`")))?;
        }
        params.push(Tensor::from_vec(rows, cols, data)?);
    }
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(Error::SizeMismatch(
            "trailing data after the parameter blob".into(),
        ));
    }
    network.set_params(params)?;
    Ok(TrainedModel {
        network,
        normalizer: header.normalizer,
        meta: header.meta,
    })
}
