//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use relrep::corpus::{encode_labels, Dataset, DirectionPolicy, LabelSet, Split};
use relrep::eval::{aggregate, boxplot_stats, confusion, prf};
use relrep::harness::{cmd_bench, cmd_gradcheck, cmd_train, ChannelSpec, RunConfig, StackSpec};
use relrep::neuralnet::train::predict_all;
use relrep::neuralnet::{adam_step, train, AdamConfig, CnnConfig, Network, ParamStore, TrainConfig};
use relrep::representations::{
    read_ctx_store, AuxData, Channel, CharChannel, CharConfig, CharVocab, ContextualStore, PosTagChannel, PositionChannel,
    RepresentationStack, StaticTable,
};
use relrep::rng::SplitMix64;

type Outcome = Result<String, String>;

struct Suite {
    failed: usize,
}

impl Suite {
    fn check(&mut self, name: &str, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                self.failed += 1;
                println!("FAIL  {name}: {detail} [{secs:.1}s]");
            }
        }
    }

    fn skip(&self, name: &str, why: &str) {
        println!("SKIP  {name}: {why}");
    }
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gradient_correctness() -> Outcome {
    let start = Instant::now();
    let report = cmd_gradcheck(0, 1e-4, false).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(
        report.max_rel_error < 1e-4 && elapsed < Duration::from_secs(60),
        format!("max relative error {:.3e} < 1e-4 over {} tensors", report.max_rel_error, report.tensors.len()),
    )
}

fn metric_oracle() -> Outcome {
    let k = 10;
    let mut names: Vec<String> = (1..k).map(|i| format!("Rel{i}")).collect();
    names.push("Other".into());
    let labels = LabelSet::from_labels(names.iter().map(String::as_str), DirectionPolicy::Keep);
    let neg = labels.negative_index().unwrap();
    let mut rng = SplitMix64::new(2024);
    let mut worst = 0.0f64;
    for set in 0..200 {
        let golds: Vec<usize> = (0..500).map(|_| rng.below(k)).collect();
        let preds: Vec<usize> = (0..500).map(|_| rng.below(k)).collect();
        let report = aggregate(&confusion(&preds, &golds, k).unwrap(), &labels).unwrap();
        let mut sums = [0.0f64; 3];
        for c in 0..k {
            let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
            for (&g, &p) in golds.iter().zip(&preds) {
                match (g == c, p == c) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fn_ += 1,
                    _ => {}
                }
            }
            let m = &report.per_class[c];
            if (m.tp, m.fp, m.fn_) != (tp, fp, fn_) {
                return Err(format!("set {set} class {c}: counts {:?} vs {:?}", (m.tp, m.fp, m.fn_), (tp, fp, fn_)));
            }
            let p = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
            let r = if tp + fn_ > 0 { tp as f64 / (tp + fn_) as f64 } else { 0.0 };
            let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
            for (got, want) in [(m.prf.precision, p), (m.prf.recall, r), (m.prf.f1, f)] {
                worst = worst.max((got - want).abs());
            }
            if c != neg {
                sums[0] += p;
                sums[1] += r;
                sums[2] += f;
            }
        }
        let n = (k - 1) as f64;
        let m = report.macro_avg;
        for (got, want) in [(m.precision, sums[0] / n), (m.recall, sums[1] / n), (m.f1, sums[2] / n)] {
            worst = worst.max((got - want).abs());
        }
    }
    ensure(worst <= 1e-12, format!("200 sets, K=10, n=500: counts exact, max ratio deviation {worst:.1e}"))
}

fn formula_spot_values() -> Outcome {
    let p = prf(3, 1, 2);
    ensure(
        p.precision == 0.75 && p.recall == 0.6 && (p.f1 - 0.6667).abs() <= 1e-4,
        format!("prf(3,1,2) = ({}, {}, {:.4})", p.precision, p.recall, p.f1),
    )
}

fn quantile_oracle() -> Outcome {
    let mut rng = SplitMix64::new(77);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let values: Vec<f64> = (0..10).map(|_| rng.uniform(-100.0, 100.0)).collect();
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let q = |p: f64| {
            let h = p * 9.0;
            let i = h.floor() as usize;
            let j = (i + 1).min(9);
            sorted[i] + (h - i as f64) * (sorted[j] - sorted[i])
        };
        let b = boxplot_stats(&values).unwrap();
        for (got, want) in [(b.q1, q(0.25)), (b.median, q(0.5)), (b.q3, q(0.75))] {
            worst = worst.max((got - want).abs());
        }
    }
    let b = boxplot_stats(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
    let fence_ok = b.q1 == 2.0 && b.q3 == 4.0 && b.outliers == vec![100.0] && b.whisker_high == 4.0 && b.whisker_low == 1.0;
    ensure(
        worst <= 1e-12 && fence_ok,
        format!("1000 samples, max deviation {worst:.1e}; {{1,2,3,4,100}} -> outliers {:?}, whiskers [{}, {}]", b.outliers, b.whisker_low, b.whisker_high),
    )
}

fn overfit() -> Outcome {
    let start = Instant::now();
    let ds = Dataset::new(Split::Train, common::synthetic_sentences(60, 11));
    let labels = LabelSet::from_dataset(&ds, DirectionPolicy::Collapse);
    let words: std::collections::BTreeSet<&str> = ds.sentences.iter().flat_map(|s| s.words()).collect();
    let stack = RepresentationStack::new(vec![
        Channel::Static(Arc::new(StaticTable::random(words.into_iter(), 50, 3))),
        Channel::Position(PositionChannel::default()),
    ]);
    let cnn = CnnConfig::new(stack.total_dim(), labels.len(), 100);
    let net = Network::new(cnn, stack, AuxData::default()).map_err(|e| e.to_string())?;
    let golds = encode_labels(&ds, &labels).unwrap();
    let empty = Dataset::new(Split::Dev, vec![]);
    let tc = TrainConfig { epochs: 200, ..TrainConfig::for_profile(net.stack.epochs_profile(), 1) };
    let outcome = train(&net, &labels, &ds, &empty, &AdamConfig::default(), &tc, |_| {}).map_err(|e| e.to_string())?;
    let preds = predict_all(&net, &outcome.params, &ds).map_err(|e| e.to_string())?;
    let correct = preds.iter().zip(&golds).filter(|(p, g)| p == g).count();
    let elapsed = start.elapsed();
    ensure(
        correct == golds.len() && elapsed < Duration::from_secs(120),
        format!("train accuracy {correct}/{} after 200 epochs, {} classes", golds.len(), labels.len()),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (train, test) = common::write_corpus(dir.path(), 160, 40, 5);
    let mut cfg = RunConfig {
        train,
        test,
        sentence_len: 24,
        seeds: vec![1, 2, 3],
        stacks: vec![StackSpec {
            name: "baseline".into(),
            channels: vec![ChannelSpec::RandomStatic { dim: 50, seed: 9 }, ChannelSpec::Position { max_dist: 30, dim: 5 }],
        }],
        ..RunConfig::default()
    };
    cfg.training.epochs = Some(5);
    let mut outputs = Vec::new();
    for sweep in ["a", "b"] {
        cfg.out = dir.path().join(sweep);
        cmd_bench(cfg.clone(), false).map_err(|e| e.to_string())?;
        let read = |f: &str| std::fs::read(cfg.out.join(f)).unwrap();
        outputs.push((read("report.csv"), read("boxplot.csv")));
    }
    ensure(
        outputs[0] == outputs[1],
        format!("two sweeps, seeds [1,2,3], 200 sentences: report.csv and boxplot.csv byte-identical ({} bytes)", outputs[0].0.len() + outputs[0].1.len()),
    )
}

fn composition_law() -> Outcome {
    let mut rng = SplitMix64::new(100);
    let s = &common::synthetic_sentences(1, 4)[0];
    let vocab = Arc::new(CharVocab::from_words(s.words()));
    let mut pos = relrep::representations::PosSidecar::default();
    pos.insert(s.id, vec!["NOUN".into(); s.len()]);
    let aux = AuxData { pos: Some(Arc::new(pos)) };
    for case in 0..100 {
        let n_channels = 1 + rng.below(5);
        let mut expected = 0;
        let channels: Vec<Channel> = (0..n_channels)
            .map(|_| match rng.below(5) {
                0 => {
                    let d = 1 + rng.below(300);
                    expected += d;
                    Channel::Static(Arc::new(StaticTable::random(s.words(), d, case)))
                }
                1 => {
                    let d = 1 + rng.below(64);
                    expected += d;
                    let mut store = ContextualStore::new(d, "acc");
                    store.insert(s.id, vec![0.5; d * s.len()]).unwrap();
                    Channel::Contextual(Arc::new(store))
                }
                2 => {
                    let p = PositionChannel { max_dist: 1 + rng.below(40), dim_per_nominal: 1 + rng.below(10) };
                    expected += 2 * p.dim_per_nominal;
                    Channel::Position(p)
                }
                3 => {
                    expected += 18;
                    Channel::PosTag(PosTagChannel::default())
                }
                _ => {
                    let cfg = CharConfig { char_dim: 1 + rng.below(16), conv_width: 1 + rng.below(4), out_dim: 1 + rng.below(16) };
                    expected += cfg.out_dim;
                    Channel::Char(CharChannel::new(cfg, vocab.clone()))
                }
            })
            .collect();
        let stack = RepresentationStack::new(channels);
        let mut params = ParamStore::<f32>::new();
        stack.register_params(&mut params, &mut rng);
        let len = 1 + rng.below(40);
        let m = stack.compose(s, &aux, len, &params).map_err(|e| e.to_string())?;
        if m.cols != expected || m.rows != len {
            return Err(format!("case {case}: {}x{} vs expected {len}x{expected}", m.rows, m.cols));
        }
    }
    Ok("100 random stacks: width = sum of channel dims".into())
}

fn frozen_channels() -> Outcome {
    let ds = common::synthetic_sentences(10, 8);
    let words: Vec<&str> = ds.iter().flat_map(|s| s.words()).collect();
    let table = Arc::new(StaticTable::random(words.iter().copied(), 20, 1));
    let mut store = ContextualStore::new(6, "frozen");
    let mut rng = SplitMix64::new(3);
    for s in &ds {
        store.insert(s.id, (0..6 * s.len()).map(|_| rng.uniform(-1.0, 1.0) as f32).collect()).unwrap();
    }
    let store = Arc::new(store);
    let table_before = table.raw_data().to_vec();
    let store_before = (*store).clone();

    let stack = RepresentationStack::new(vec![
        Channel::Static(table.clone()),
        Channel::Contextual(store.clone()),
        Channel::Position(PositionChannel::default()),
    ]);
    let mut cnn = CnnConfig::new(stack.total_dim(), 3, 16);
    cnn.filters_per_width = 10;
    cnn.hidden_dim = 8;
    let net = Network::new(cnn, stack, AuxData::default()).map_err(|e| e.to_string())?;
    let mut params: ParamStore<f32> = net.init_params(1);
    let batch: Vec<_> = ds.iter().enumerate().map(|(i, s)| (s, i % 3)).collect();
    let mut dropout = SplitMix64::new(4);
    for _ in 0..50 {
        net.loss_and_grad(&batch, &mut params, Some(&mut dropout)).map_err(|e| e.to_string())?;
        adam_step(&mut params, &AdamConfig::default());
    }
    let same_table = table.raw_data().iter().zip(&table_before).all(|(a, b)| a.to_bits() == b.to_bits());
    let same_store = *store == store_before;
    ensure(
        same_table && same_store && params.step() == 50,
        format!("after {} Adam steps: static table and contextual store bit-identical", params.step()),
    )
}

fn ctxv_fixture() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/tiny.ctxv");
    let store = read_ctx_store(&path).map_err(|e| e.to_string())?;
    ensure(
        store.len() == 15 && store.dim() == 8 && store.model_id() == "fixture-sin",
        format!("{} sentences, dim {}, model_id {}", store.len(), store.dim(), store.model_id()),
    )
}

fn real_data(dir: &Path, vectors: &Path) -> Outcome {
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = RunConfig {
        train: dir.join("TRAIN_FILE.TXT"),
        test: dir.join("TEST_FILE_FULL.TXT"),
        seeds: vec![1],
        out: out.path().to_path_buf(),
        stacks: vec![StackSpec {
            name: "baseline".into(),
            channels: vec![ChannelSpec::Static { path: vectors.to_path_buf() }, ChannelSpec::Position { max_dist: 30, dim: 5 }],
        }],
        ..RunConfig::default()
    };
    let start = Instant::now();
    let m = cmd_train(cfg, None, 1, false).map_err(|e| e.to_string())?;
    let f1 = 100.0 * m.test.macro_avg.f1;
    ensure(
        (75.0..=85.0).contains(&f1) && start.elapsed() < Duration::from_secs(1800),
        format!("baseline macro-F1 {f1:.2} (excluding Other)"),
    )
}

fn main() {
    let mut suite = Suite { failed: 0 };
    suite.check("gradient correctness", gradient_correctness);
    suite.check("metric oracle", metric_oracle);
    suite.check("formula spot-values", formula_spot_values);
    suite.check("quantile oracle", quantile_oracle);
    suite.check("overfit check", overfit);
    suite.check("determinism", determinism);
    suite.check("composition law", composition_law);
    suite.check("frozen-channel law", frozen_channels);
    suite.check("CTXV1 fixture (interface)", ctxv_fixture);

    let data = std::env::var_os("RELREP_SEMEVAL_DIR").map(PathBuf::from);
    let vectors = std::env::var_os("RELREP_STATIC_VECTORS").map(PathBuf::from);
    match (data, vectors) {
        (Some(d), Some(v)) => suite.check("real-data baseline", || real_data(&d, &v)),
        _ => suite.skip(
            "real-data baseline",
            "set RELREP_SEMEVAL_DIR and RELREP_STATIC_VECTORS to run the SemEval-2010 Task 8 check",
        ),
    }

    if suite.failed > 0 {
        println!("{} criteria failed", suite.failed);
        std::process::exit(1);
    }
}
