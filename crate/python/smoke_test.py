"""Smoke test for the relrep_py extension module.

Build and run from the repository root:

    cargo build --release -p relrep-python --features extension-module
    cp target/release/librelrep_py.so python/relrep_py.so
    python3 python/smoke_test.py
"""

import json
import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import relrep_py as rr  # noqa: E402

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(ROOT, "crates", "core", "tests", "fixtures")


def check_corpus():
    assert rr.tokenize('He said, "hello."') == ["He", "said", ",", '"', "hello", ".", '"']
    record = '1\t"the <e1>car</e1> has an <e2>engine</e2>"\nComponent-Whole(e2,e1)\n'
    (s,) = rr.parse_semeval(record)
    assert s.tokens == ["the", "car", "has", "an", "engine"]
    assert s.e1 == (1, 1, 1) and s.e2 == (4, 4, 4)
    assert s.relative_positions()[0] == (29, 26)
    again = rr.parse_semeval(s.to_record())[0]
    assert again.tokens == s.tokens and again.label == s.label
    try:
        rr.parse_semeval('17\t"no tags"\nOther\n')
    except ValueError as e:
        assert "17" in str(e)
    else:
        raise AssertionError("malformed record accepted")


def check_metrics():
    p, r, f = rr.prf(3, 1, 2)
    assert (p, r) == (0.75, 0.6) and abs(f - 0.6667) < 1e-4
    b = rr.boxplot_stats([1, 2, 3, 4, 100])
    assert b["q1"] == 2 and b["q3"] == 4 and b["outliers"] == [100]
    m = rr.evaluate([0, 1, 2, 2], [0, 1, 1, 2], ["A", "B", "Other"])
    assert m["negative_index"] == 2
    assert abs(m["micro"]["f1"] - 0.75) < 1e-12
    onehot = rr.pos_onehot("NOUN")
    assert len(onehot) == 18 and sum(onehot) == 1


def check_stores(tmp):
    store = rr.ContextualStore(3, "smoke")
    store.insert(7, [[0.5, 1.0, 1.5], [2.0, 2.5, 3.0]])
    path = os.path.join(tmp, "smoke.ctxv")
    store.write(path, "deadbeef")
    back = rr.ContextualStore.read(path)
    assert back.dim == 3 and back.model_id == "smoke" and back.ids() == [7]
    assert back.sentence(7) == [[0.5, 1.0, 1.5], [2.0, 2.5, 3.0]]
    with open(path + ".manifest.json") as fh:
        assert json.load(fh)["corpus_hash"] == "deadbeef"
    fixture = rr.ContextualStore.read(os.path.join(FIXTURES, "tiny.ctxv"))
    assert len(fixture) == 15 and fixture.dim == 8

    table = rr.StaticTable.load(os.path.join(FIXTURES, "tiny_static.txt"))
    assert table.dim == 6 and "storm" in table
    oov = table.lookup("zzzz-unseen")
    assert oov == table.lookup("zzzz-unseen") and all(-0.25 <= x <= 0.25 for x in oov)


def check_training(tmp):
    assert rr.gradcheck(toy_linear=True) < 1e-10
    assert rr.gradcheck(seed=3) < 1e-4
    cfg = rr.RunConfig.load(os.path.join(FIXTURES, "tiny_config.json"))
    cfg.out = os.path.join(tmp, "runs")
    cfg.seeds = [1, 2]
    metrics = rr.train(cfg, 1, "baseline")
    assert metrics["seed"] == 1 and 0.0 <= metrics["test"]["macro_avg"]["f1"] <= 1.0
    manifest = rr.bench(cfg)
    assert manifest["status"] == "complete"
    assert [s["stack"] for s in manifest["stacks"]] == cfg.stacks()
    table = rr.report(cfg.out)
    assert "F1_min" in table
    assert len(cfg.digest()) == 64 and not math.isnan(metrics["final_train_loss"])


def main():
    with tempfile.TemporaryDirectory() as tmp:
        check_corpus()
        check_metrics()
        check_stores(tmp)
        check_training(tmp)
    print(f"relrep_py {rr.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
