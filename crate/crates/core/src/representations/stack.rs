use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::LabeledSentence;
use crate::neuralnet::params::{glorot_bound, uniform_tensor, ParamStore};
use crate::rng::SplitMix64;
use crate::tensor::{Scalar, Tensor};

use super::chars::{CharChannel, CharGrads, CharParams};
use super::contextual::ContextualStore;
use super::pos_tags::{PosSidecar, PosTagChannel};
use super::position::{relative_positions, PositionChannel};
use super::static_table::StaticTable;
use super::ReprError;

/// Init range for position and character tables.
pub const TABLE_INIT_RANGE: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub enum Channel {
    Static(Arc<StaticTable>),
    Contextual(Arc<ContextualStore>),
    Position(PositionChannel),
    PosTag(PosTagChannel),
    Char(CharChannel),
}

impl Channel {
    pub fn out_dim(&self) -> usize {
        match self {
            Channel::Static(t) => t.dim(),
            Channel::Contextual(s) => s.dim(),
            Channel::Position(p) => p.out_dim(),
            Channel::PosTag(p) => p.out_dim(),
            Channel::Char(c) => c.out_dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Channel::Static(_) => "static",
            Channel::Contextual(_) => "contextual",
            Channel::Position(_) => "position",
            Channel::PosTag(_) => "pos",
            Channel::Char(_) => "char",
        }
    }

    pub fn is_trainable(&self) -> bool {
        matches!(self, Channel::Position(_) | Channel::Char(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpochsProfile {
    Contextual,
    Plain,
}

/// Auxiliary per-sentence inputs not carried by the channels themselves.
#[derive(Clone, Debug, Default)]
pub struct AuxData {
    pub pos: Option<Arc<PosSidecar>>,
}

/// Fixed-length `rows × cols` input matrix of one sentence.
#[derive(Clone, Debug, PartialEq)]
pub struct SentenceMatrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
    pub channel_offsets: Vec<Range<usize>>,
    /// Rows holding real tokens; rows at or past this index are identical padding rows.
    pub real_rows: usize,
}

impl<T: Scalar> SentenceMatrix<T> {
    /// A matrix with no padding structure, e.g. for kernel tests.
    pub fn dense(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(rows * cols, data.len());
        Self { rows, cols, data, channel_offsets: vec![0..cols], real_rows: rows }
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RepresentationStack {
    pub channels: Vec<Channel>,
}

pub(crate) fn pos_param_names(i: usize) -> [String; 2] {
    [format!("ch{i}.pos_e1"), format!("ch{i}.pos_e2")]
}

pub(crate) fn char_param_names(i: usize) -> [String; 3] {
    [format!("ch{i}.char_table"), format!("ch{i}.char_filters"), format!("ch{i}.char_bias")]
}

impl RepresentationStack {
    pub fn new(channels: Vec<Channel>) -> Self {
        Self { channels }
    }

    pub fn total_dim(&self) -> usize {
        self.channels.iter().map(Channel::out_dim).sum()
    }

    pub fn channel_offsets(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.channels
            .iter()
            .map(|c| {
                let r = start..start + c.out_dim();
                start = r.end;
                r
            })
            .collect()
    }

    pub fn epochs_profile(&self) -> EpochsProfile {
        if self.channels.iter().any(|c| matches!(c, Channel::Contextual(_))) {
            EpochsProfile::Contextual
        } else {
            EpochsProfile::Plain
        }
    }

    pub fn needs_pos(&self) -> bool {
        self.channels.iter().any(|c| matches!(c, Channel::PosTag(_)))
    }

    /// Register and initialize the trainable tensors of every channel.
    pub fn register_params<T: Scalar>(&self, store: &mut ParamStore<T>, rng: &mut SplitMix64) {
        for (i, ch) in self.channels.iter().enumerate() {
            match ch {
                Channel::Position(p) => {
                    for name in pos_param_names(i) {
                        store.insert(&name, uniform_tensor(&[p.rows(), p.dim_per_nominal], TABLE_INIT_RANGE, rng));
                    }
                }
                Channel::Char(c) => {
                    let cfg = c.config;
                    let [t, f, b] = char_param_names(i);
                    store.insert(&t, uniform_tensor(&[c.vocab.len(), cfg.char_dim], TABLE_INIT_RANGE, rng));
                    let fan_in = cfg.conv_width * cfg.char_dim;
                    store.insert(&f, uniform_tensor(&[cfg.out_dim, fan_in], glorot_bound(fan_in, cfg.out_dim), rng));
                    store.insert(&b, Tensor::zeros(&[cfg.out_dim]));
                }
                _ => {}
            }
        }
    }

    /// Verify that all auxiliary data needed by `sentence` is present and aligned.
    pub fn check(&self, sentence: &LabeledSentence, aux: &AuxData) -> Result<(), ReprError> {
        for ch in &self.channels {
            match ch {
                Channel::Contextual(store) => {
                    let n = store.token_count(sentence.id).ok_or(ReprError::MissingContextual(sentence.id))?;
                    if n != sentence.len() {
                        return Err(ReprError::TokenCountMismatch {
                            id: sentence.id,
                            source_kind: "contextual",
                            expected: sentence.len(),
                            found: n,
                        });
                    }
                }
                Channel::PosTag(_) => {
                    let tags = aux
                        .pos
                        .as_ref()
                        .and_then(|p| p.get(sentence.id))
                        .ok_or(ReprError::MissingPosTags(sentence.id))?;
                    if tags.len() != sentence.len() {
                        return Err(ReprError::TokenCountMismatch {
                            id: sentence.id,
                            source_kind: "pos",
                            expected: sentence.len(),
                            found: tags.len(),
                        });
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Build the `len × total_dim` input matrix for `sentence`.
    pub fn compose<T: Scalar>(
        &self,
        sentence: &LabeledSentence,
        aux: &AuxData,
        len: usize,
        params: &ParamStore<T>,
    ) -> Result<SentenceMatrix<T>, ReprError> {
        self.check(sentence, aux)?;
        let cols = self.total_dim();
        let offsets = self.channel_offsets();
        let real = sentence.len().min(len);
        let mut data = vec![T::zero(); len * cols];
        let mut scratch = Vec::new();

        for (i, (ch, range)) in self.channels.iter().zip(&offsets).enumerate() {
            let cell = |r: usize| -> Range<usize> { r * cols + range.start..r * cols + range.end };
            match ch {
                Channel::Static(table) => {
                    scratch.resize(table.dim(), 0.0f32);
                    for (r, tok) in sentence.tokens.iter().take(real).enumerate() {
                        table.lookup_into(&tok.text, &mut scratch);
                        let c = cell(r);
                        for (d, &x) in data[c].iter_mut().zip(&scratch) {
                            *d = T::from_f32(x);
                        }
                    }
                }
                Channel::Contextual(store) => {
                    for r in 0..real {
                        let v = store.token(sentence.id, r).expect("checked above");
                        let c = cell(r);
                        for (d, &x) in data[c].iter_mut().zip(v) {
                            *d = T::from_f32(x);
                        }
                    }
                }
                Channel::PosTag(pc) => {
                    let tags = aux.pos.as_ref().and_then(|p| p.get(sentence.id)).expect("checked above");
                    for (r, tag) in tags.iter().take(real).enumerate() {
                        data[r * cols + range.start + pc.slot(tag)] = T::one();
                    }
                }
                Channel::Position(pc) => {
                    let [n1, n2] = pos_param_names(i);
                    let (t1, t2) = (params.value(params.expect_id(&n1)), params.value(params.expect_id(&n2)));
                    let dpn = pc.dim_per_nominal;
                    let rows = relative_positions(sentence, pc.max_dist);
                    for r in 0..len {
                        let (a, b) = if r < real { rows[r] } else { (pc.padding_row(), pc.padding_row()) };
                        let c = cell(r);
                        data[c.start..c.start + dpn].copy_from_slice(t1.row(a));
                        data[c.start + dpn..c.end].copy_from_slice(t2.row(b));
                    }
                }
                Channel::Char(cc) => {
                    let [t, f, b] = char_param_names(i);
                    let cp = CharParams {
                        table: params.value(params.expect_id(&t)),
                        filters: params.value(params.expect_id(&f)),
                        bias: params.value(params.expect_id(&b)),
                    };
                    for (r, tok) in sentence.tokens.iter().take(real).enumerate() {
                        let out = cc.forward(&tok.text, cp);
                        let c = cell(r);
                        data[c].copy_from_slice(&out);
                    }
                }
            }
        }
        Ok(SentenceMatrix { rows: len, cols, data, channel_offsets: offsets, real_rows: real })
    }

    /// Route the gradient of the composed matrix into trainable channel tensors.
    pub fn backward<T: Scalar>(&self, sentence: &LabeledSentence, d_matrix: &SentenceMatrix<T>, params: &mut ParamStore<T>) {
        let len = d_matrix.rows;
        let cols = d_matrix.cols;
        let real = sentence.len().min(len);
        let offsets = self.channel_offsets();
        for (i, (ch, range)) in self.channels.iter().zip(&offsets).enumerate() {
            match ch {
                Channel::Position(pc) => {
                    let [n1, n2] = pos_param_names(i);
                    let (id1, id2) = (params.expect_id(&n1), params.expect_id(&n2));
                    let dpn = pc.dim_per_nominal;
                    let rows = relative_positions(sentence, pc.max_dist);
                    let (_, grads) = params.values_and_grads();
                    for r in 0..len {
                        let (a, b) = if r < real { rows[r] } else { (pc.padding_row(), pc.padding_row()) };
                        let g = &d_matrix.data[r * cols + range.start..r * cols + range.end];
                        for (dst, &x) in grads[id1].row_mut(a).iter_mut().zip(&g[..dpn]) {
                            *dst += x;
                        }
                        for (dst, &x) in grads[id2].row_mut(b).iter_mut().zip(&g[dpn..]) {
                            *dst += x;
                        }
                    }
                }
                Channel::Char(cc) => {
                    let [t, f, b] = char_param_names(i);
                    let ids = [params.expect_id(&t), params.expect_id(&f), params.expect_id(&b)];
                    let (values, grads) = params.values_and_grads();
                    let cp = CharParams { table: &values[ids[0]], filters: &values[ids[1]], bias: &values[ids[2]] };
                    let [gt, gf, gb] = pick3(grads, ids);
                    for (r, tok) in sentence.tokens.iter().take(real).enumerate() {
                        let g = &d_matrix.data[r * cols + range.start..r * cols + range.end];
                        if g.iter().all(|x| *x == T::zero()) {
                            continue;
                        }
                        cc.backward(&tok.text, g, cp, CharGrads { table: gt, filters: gf, bias: gb });
                    }
                }
                _ => {}
            }
        }
    }
}

/// Three distinct mutable elements of a slice.
fn pick3<T>(items: &mut [T], ids: [usize; 3]) -> [&mut T; 3] {
    let [a, b, c] = items.get_disjoint_mut(ids).expect("distinct parameter ids");
    [a, b, c]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::EntitySpan;
    use crate::representations::chars::{CharConfig, CharVocab};

    fn sentence(n: usize) -> LabeledSentence {
        let words: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
        let refs: Vec<&str> = words.iter().map(String::as_str).collect();
        LabeledSentence::from_words(3, &refs, EntitySpan::from_bounds(0, 0), EntitySpan::from_bounds(n - 1, n - 1), "Other")
    }

    #[test]
    fn dims_add_up() {
        let stat = Arc::new(StaticTable::random(["w0"], 300, 1));
        let mut store = ContextualStore::new(1024, "elmo");
        store.insert(3, vec![0.5; 5 * 1024]).unwrap();
        let stack = RepresentationStack::new(vec![
            Channel::Static(stat),
            Channel::Position(PositionChannel::default()),
            Channel::Contextual(Arc::new(store)),
        ]);
        assert_eq!(stack.total_dim(), 1334);
        assert_eq!(stack.epochs_profile(), EpochsProfile::Contextual);
        let mut ps = ParamStore::<f32>::new();
        stack.register_params(&mut ps, &mut SplitMix64::new(0));
        let m = stack.compose(&sentence(5), &AuxData::default(), 100, &ps).unwrap();
        assert_eq!((m.rows, m.cols, m.data.len()), (100, 1334, 100 * 1334));
        assert_eq!(m.channel_offsets, vec![0..300, 300..310, 310..1334]);
    }

    #[test]
    fn static_padding_rows_are_zero() {
        let stack = RepresentationStack::new(vec![Channel::Static(Arc::new(StaticTable::random(["w0", "w1"], 300, 1)))]);
        assert_eq!(stack.epochs_profile(), EpochsProfile::Plain);
        let m = stack.compose(&sentence(5), &AuxData::default(), 100, &ParamStore::<f32>::new()).unwrap();
        assert!(m.data[5 * 300..].iter().all(|&x| x == 0.0));
        assert!(m.data[..5 * 300].iter().any(|&x| x != 0.0));
        assert_eq!(m.real_rows, 5);
    }

    #[test]
    fn missing_contextual_and_mismatch() {
        let mut store = ContextualStore::new(4, "c");
        store.insert(99, vec![0.0; 8]).unwrap();
        store.insert(3, vec![0.0; 8]).unwrap();
        let stack = RepresentationStack::new(vec![Channel::Contextual(Arc::new(store))]);
        let ps = ParamStore::<f32>::new();
        let mut other = sentence(2);
        other.id = 4;
        assert!(matches!(stack.compose(&other, &AuxData::default(), 10, &ps), Err(ReprError::MissingContextual(4))));
        assert!(matches!(
            stack.compose(&sentence(5), &AuxData::default(), 10, &ps),
            Err(ReprError::TokenCountMismatch { expected: 5, found: 2, .. })
        ));
    }

    #[test]
    fn pos_channel_needs_sidecar() {
        let stack = RepresentationStack::new(vec![Channel::PosTag(PosTagChannel::default())]);
        let ps = ParamStore::<f32>::new();
        assert!(matches!(stack.compose(&sentence(2), &AuxData::default(), 4, &ps), Err(ReprError::MissingPosTags(3))));
        let mut side = PosSidecar::default();
        side.insert(3, vec!["NOUN".into(), "VERB".into()]);
        let aux = AuxData { pos: Some(Arc::new(side)) };
        let m = stack.compose(&sentence(2), &aux, 4, &ps).unwrap();
        assert_eq!(m.row(0)[7], 1.0);
        assert_eq!(m.row(1)[15], 1.0);
        assert!(m.row(2).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn truncation_keeps_len_rows() {
        let stack = RepresentationStack::new(vec![
            Channel::Position(PositionChannel::default()),
            Channel::Char(CharChannel::new(CharConfig::default(), Arc::new(CharVocab::from_words(["w0"])))),
        ]);
        let mut ps = ParamStore::<f32>::new();
        stack.register_params(&mut ps, &mut SplitMix64::new(1));
        let m = stack.compose(&sentence(12), &AuxData::default(), 8, &ps).unwrap();
        assert_eq!((m.rows, m.real_rows), (8, 8));
    }
}
