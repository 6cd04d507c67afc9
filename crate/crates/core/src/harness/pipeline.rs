use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use crate::corpus::{split_train_dev, Dataset, LabelSet, Split};
use crate::eval::MetricsReport;
use crate::neuralnet::train::check_dataset;
use crate::neuralnet::{evaluate, train, CnnConfig, EpochRecord, Network, ParamStore, TrainConfig};
use crate::representations::{
    load_static_text, read_ctx_store, AuxData, Channel, CharChannel, CharVocab, ContextualStore, PosSidecar,
    PosTagChannel, PositionChannel, RepresentationStack, StaticTable,
};

use super::config::{ChannelSpec, RunConfig};
use super::HarnessError;

/// Everything a sweep reads, loaded once and shared read-only by all runs.
#[derive(Debug)]
pub struct Workspace {
    pub config: RunConfig,
    pub digest: String,
    pub labels: LabelSet,
    pub train: Dataset,
    pub dev: Dataset,
    pub test: Dataset,
    /// One per configured stack, same order.
    pub networks: Vec<Network>,
}

/// Result of one seeded run.
#[derive(Debug)]
pub struct RunOutput {
    pub stack: String,
    pub seed: u64,
    pub train_config: TrainConfig,
    pub params: ParamStore<f32>,
    pub history: Vec<EpochRecord>,
    pub test: MetricsReport,
    pub wall_clock_secs: f64,
}

fn require_file(path: &Path, what: &str) -> Result<(), HarnessError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(HarnessError::Config(format!("{what} {} does not exist", path.display())))
    }
}

#[derive(Default)]
struct Loaded {
    statics: HashMap<(PathBuf, u64), Arc<StaticTable>>,
    contextual: HashMap<PathBuf, Arc<ContextualStore>>,
}

impl Workspace {
    /// Load and cross-check every input. All file and alignment errors surface here,
    /// before any run starts.
    pub fn load(config: RunConfig) -> Result<Self, HarnessError> {
        config.validate()?;
        require_file(&config.train, "train set")?;
        require_file(&config.test, "test set")?;
        for stack in &config.stacks {
            for ch in &stack.channels {
                match ch {
                    ChannelSpec::Static { path } => require_file(path, "static table")?,
                    ChannelSpec::Contextual { path } => require_file(path, "contextual store")?,
                    _ => {}
                }
            }
        }

        let mut train_full = Dataset::load(&config.train, Split::Train)?;
        let mut test = Dataset::load(&config.test, Split::Test)?;
        let mut dev_explicit = match &config.dev {
            Some(p) => {
                require_file(p, "dev set")?;
                Some(Dataset::load(p, Split::Dev)?)
            }
            None => None,
        };
        if !config.keep_other {
            train_full = train_full.without_other();
            test = test.without_other();
            dev_explicit = dev_explicit.map(|d| d.without_other());
        }
        if train_full.is_empty() {
            return Err(HarnessError::Config(format!("train set {} is empty", config.train.display())));
        }
        let labels = LabelSet::from_dataset(&train_full, config.direction_policy);
        let (train, dev) = match dev_explicit {
            Some(dev) => (train_full, dev),
            None => split_train_dev(&train_full, config.dev_fraction, config.split_seed)?,
        };

        let pos = match &config.pos_tags {
            Some(p) => {
                require_file(p, "POS sidecar")?;
                Some(Arc::new(PosSidecar::load(p)?))
            }
            None => None,
        };
        let aux = AuxData { pos };

        let char_vocab = Arc::new(CharVocab::from_dataset(&train));
        let train_words: BTreeSet<&str> = train.sentences.iter().flat_map(|s| s.words()).collect();

        let mut loaded = Loaded::default();
        let mut networks = Vec::with_capacity(config.stacks.len());
        for spec in &config.stacks {
            let mut channels = Vec::with_capacity(spec.channels.len());
            for ch in &spec.channels {
                channels.push(build_channel(ch, &config, &mut loaded, &char_vocab, &train_words)?);
            }
            let stack = RepresentationStack::new(channels);
            if stack.needs_pos() && aux.pos.is_none() {
                return Err(HarnessError::Config(format!(
                    "stack {:?} has a pos channel but no pos_tags sidecar is configured",
                    spec.name
                )));
            }
            let cnn = cnn_config(&config, stack.total_dim(), labels.len());
            let net = Network::new(cnn, stack, aux.clone())?;
            for ds in [&train, &dev, &test] {
                check_dataset(&net, &labels, ds)?;
            }
            networks.push(net);
        }

        let digest = config.digest();
        Ok(Self { config, digest, labels, train, dev, test, networks })
    }

    pub fn stack_name(&self, index: usize) -> &str {
        &self.config.stacks[index].name
    }

    pub fn train_config(&self, stack: usize, seed: u64) -> TrainConfig {
        let mut tc = TrainConfig::for_profile(self.networks[stack].stack.epochs_profile(), seed);
        let o = &self.config.training;
        if let Some(b) = o.batch_size {
            tc.batch_size = b;
        }
        if let Some(e) = o.epochs {
            tc.epochs = e;
        }
        if let Some(s) = o.shuffle_each_epoch {
            tc.shuffle_each_epoch = s;
        }
        tc
    }

    /// Train stack `stack` with `seed` and score it on the test set.
    pub fn run(&self, stack: usize, seed: u64, on_epoch: impl FnMut(&EpochRecord)) -> Result<RunOutput, HarnessError> {
        let start = Instant::now();
        let net = &self.networks[stack];
        let tc = self.train_config(stack, seed);
        let outcome = train(net, &self.labels, &self.train, &self.dev, &self.config.adam, &tc, on_epoch)?;
        let test = evaluate(net, &outcome.params, &self.test, &self.labels)?;
        Ok(RunOutput {
            stack: self.stack_name(stack).to_string(),
            seed,
            train_config: tc,
            params: outcome.params,
            history: outcome.history,
            test,
            wall_clock_secs: start.elapsed().as_secs_f64(),
        })
    }
}

fn cnn_config(config: &RunConfig, input_dim: usize, classes: usize) -> CnnConfig {
    let mut cnn = CnnConfig::new(input_dim, classes, config.sentence_len);
    let o = &config.cnn;
    if let Some(w) = &o.filter_widths {
        cnn.filter_widths = w.clone();
    }
    if let Some(f) = o.filters_per_width {
        cnn.filters_per_width = f;
    }
    if let Some(h) = o.hidden_dim {
        cnn.hidden_dim = h;
    }
    if let Some(d) = o.dropout_rate {
        cnn.dropout_rate = d;
    }
    cnn
}

fn build_channel(
    spec: &ChannelSpec,
    config: &RunConfig,
    loaded: &mut Loaded,
    char_vocab: &Arc<CharVocab>,
    train_words: &BTreeSet<&str>,
) -> Result<Channel, HarnessError> {
    let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
    Ok(match spec {
        ChannelSpec::Static { path } => {
            let key = (path.clone(), config.oov_seed);
            if !loaded.statics.contains_key(&key) {
                let table = load_static_text(path, config.oov_seed)?;
                loaded.statics.insert(key.clone(), Arc::new(table));
            }
            Channel::Static(loaded.statics[&key].clone())
        }
        ChannelSpec::RandomStatic { dim, seed } => {
            if *dim == 0 {
                return bad("random_static dim must be positive");
            }
            Channel::Static(Arc::new(StaticTable::random(train_words.iter().copied(), *dim, *seed)))
        }
        ChannelSpec::Contextual { path } => {
            if !loaded.contextual.contains_key(path) {
                let store = read_ctx_store(path)?;
                loaded.contextual.insert(path.clone(), Arc::new(store));
            }
            Channel::Contextual(loaded.contextual[path].clone())
        }
        ChannelSpec::Position { max_dist, dim } => {
            if *max_dist == 0 || *dim == 0 {
                return bad("position max_dist and dim must be positive");
            }
            Channel::Position(PositionChannel { max_dist: *max_dist, dim_per_nominal: *dim })
        }
        ChannelSpec::Pos { tagset } => Channel::PosTag(match tagset {
            Some(tags) => PosTagChannel::new(tags.iter().map(String::as_str)),
            None => PosTagChannel::default(),
        }),
        ChannelSpec::Char { .. } => {
            let cfg = spec.char_config().expect("char spec");
            if cfg.char_dim == 0 || cfg.conv_width == 0 || cfg.out_dim == 0 {
                return bad("char channel sizes must be positive");
            }
            Channel::Char(CharChannel::new(cfg, char_vocab.clone()))
        }
    })
}
