import json
import random
from pathlib import Path

import pytest

from pipeline_helpers import triple
from tdmine.corpus import UNKNOWN, TdmTriple
from tdmine.scoring import (
    LexicalScorer,
    RemoteScorer,
    ScorerProtocolError,
    ScorerTransportError,
    ScoreRequest,
    decode_score_response,
    encode_score_request,
    make_scorer,
    predict_paper,
    render_hypothesis,
)

GOLDEN = Path(__file__).parent / "golden"
GOLDEN_ITEMS = [
    ("The premise text mentions café tokens .", "taskA : dataB : metricC"),
    ("second premise about benchmarks", "x : y : z"),
]


# ---------------------------------------------------------------------------
# Hypothesis rendering
# ---------------------------------------------------------------------------


def test_render_hypothesis_example():
    t = TdmTriple("Language Modeling", "Penn Treebank", "Test perplexity")
    assert render_hypothesis(t) == "Language Modeling : Penn Treebank : Test perplexity"


def test_render_hypothesis_normalizes_internal_spaces():
    t = TdmTriple("Image   Classification", "CIFAR  10", "Top  1")
    assert render_hypothesis(t) == "Image Classification : CIFAR 10 : Top 1"


def test_render_hypothesis_template():
    assert render_hypothesis(TdmTriple("A", "B", "C")) == "A : B : C"


# ---------------------------------------------------------------------------
# Lexical baseline
# ---------------------------------------------------------------------------


def test_lexical_full_overlap_scores_one():
    scorer = LexicalScorer()
    request = ScoreRequest.of([("alpha beta gamma delta", "beta gamma")])
    assert scorer.score(request) == [1.0]


def test_lexical_zero_overlap_scores_zero():
    scorer = LexicalScorer()
    request = ScoreRequest.of([("alpha beta", "gamma delta")])
    assert scorer.score(request) == [0.0]


def test_lexical_half_overlap():
    # 2 of 4 distinct hypothesis tokens present in the premise
    scorer = LexicalScorer()
    request = ScoreRequest.of([("one two filler", "one two three four")])
    assert scorer.score(request) == [0.5]


def test_lexical_is_case_folded():
    scorer = LexicalScorer()
    assert scorer.score(ScoreRequest.of([("ALPHA beta", "alpha BETA")])) == [1.0]


def test_lexical_invariant_under_premise_shuffle():
    rng = random.Random(5)
    words = [f"w{i}" for i in range(30)]
    hypothesis = "w1 w4 w9 zzz"
    scorer = LexicalScorer()
    baseline = scorer.score(ScoreRequest.of([(" ".join(words), hypothesis)]))[0]
    for _ in range(10):
        rng.shuffle(words)
        shuffled = scorer.score(ScoreRequest.of([(" ".join(words), hypothesis)]))[0]
        assert shuffled == baseline


def test_score_response_preserves_request_order():
    scorer = LexicalScorer()
    items = [("a b", "a"), ("a b", "zz"), ("a b", "a"), ("a b", "b zz")]
    assert scorer.score(ScoreRequest.of(items)) == [1.0, 0.0, 1.0, 0.5]


def test_batch_decomposition_equals_single_batch():
    scorer = LexicalScorer()
    items = [(f"tok{i} tok{i + 1}", f"tok{i} other") for i in range(10)]
    whole = scorer.score(ScoreRequest.of(items))
    split = scorer.score(ScoreRequest.of(items[:4])) + scorer.score(
        ScoreRequest.of(items[4:])
    )
    assert whole == split


def test_empty_request_is_rejected():
    with pytest.raises(ValueError):
        ScoreRequest.of([])


# ---------------------------------------------------------------------------
# Paper-level prediction
# ---------------------------------------------------------------------------


def test_predict_all_below_threshold_falls_back_to_unknown():
    prediction = predict_paper(
        LexicalScorer(), "p0", "nothing matches here", [triple(1), triple(2)], 0.5
    )
    assert prediction.predicted == {UNKNOWN}


def test_predict_selects_candidates_above_threshold():
    class Fixed:
        def score(self, request):
            return [0.9, 0.2]

    prediction = predict_paper(Fixed(), "p0", "x", [triple(1), triple(2)], 0.5)
    assert prediction.predicted == {triple(1)}
    assert prediction.scores[triple(2)] == 0.2


def test_predict_never_returns_empty_set():
    class Zero:
        def score(self, request):
            return [0.0] * len(request.items)

    prediction = predict_paper(Zero(), "p0", "x", [triple(i) for i in range(5)], 0.5)
    assert prediction.predicted == {UNKNOWN}


def test_predict_validates_inputs():
    with pytest.raises(ValueError):
        predict_paper(LexicalScorer(), "p", "x", [], 0.5)
    with pytest.raises(ValueError):
        predict_paper(LexicalScorer(), "p", "x", [triple(1)], 1.0)


def test_predict_errors_carry_paper_id():
    class Broken:
        def score(self, request):
            raise ScorerTransportError("boom")

    with pytest.raises(ScorerTransportError, match="p42"):
        predict_paper(Broken(), "p42", "x", [triple(1)], 0.5)


def test_verbatim_abstract_corpus_recovers_gold_exactly():
    # each premise embeds its gold hypothesis verbatim; candidate triples
    # use disjoint vocabularies so only gold reaches full overlap
    candidates = [
        TdmTriple(f"task{i}x aa{i}x", f"data{i}x bb{i}x", f"met{i}x cc{i}x")
        for i in range(8)
    ]
    scorer = LexicalScorer()
    for i, gold in enumerate(candidates):
        premise = f"some filler words . {render_hypothesis(gold)} more filler"
        prediction = predict_paper(scorer, f"p{i}", premise, candidates, 0.5)
        assert prediction.predicted == {gold}
        # brute-force cross-check of every candidate score
        for c in candidates:
            expected = 1.0 if c == gold else scorer.score(
                ScoreRequest.of([(premise, render_hypothesis(c))])
            )[0]
            assert prediction.scores[c] == expected
            if c != gold:
                assert prediction.scores[c] <= 0.5


# ---------------------------------------------------------------------------
# Wire protocol encoding
# ---------------------------------------------------------------------------


def test_request_body_matches_golden_bytes():
    assert encode_score_request(GOLDEN_ITEMS) == (GOLDEN / "score_request.json").read_bytes()


def test_response_decoding_matches_golden_bytes():
    body = (GOLDEN / "score_response.json").read_bytes()
    assert decode_score_response(body, expected=2) == [0.93, 0.07]


def test_response_validation_rejects_bad_payloads():
    with pytest.raises(ScorerProtocolError):
        decode_score_response(b'{"scores":[0.5]}', expected=2)
    with pytest.raises(ScorerProtocolError):
        decode_score_response(b'{"scores":[1.5,0.5]}', expected=2)
    with pytest.raises(ScorerProtocolError):
        decode_score_response(b'{"scores":["high",0.5]}', expected=2)
    with pytest.raises(ScorerProtocolError):
        decode_score_response(b'{"nope":[]}', expected=0)
    with pytest.raises(ScorerProtocolError):
        decode_score_response(b"not json", expected=1)


# ---------------------------------------------------------------------------
# Remote scorer against the stub server
# ---------------------------------------------------------------------------


def _hash_score(hypothesis: str) -> float:
    return (sum(hypothesis.encode()) % 97) / 97.0


def test_remote_golden_round_trip(stub_server):
    stub_server.canned.append((200, (GOLDEN / "score_response.json").read_bytes()))
    scorer = RemoteScorer(stub_server.url)
    assert scorer.score(ScoreRequest.of(GOLDEN_ITEMS)) == [0.93, 0.07]
    assert stub_server.requests == [(GOLDEN / "score_request.json").read_bytes()]


def test_remote_order_preserved_for_shuffled_batches(stub_server):
    stub_server.responder = lambda items: [_hash_score(i["hypothesis"]) for i in items]
    scorer = RemoteScorer(stub_server.url, batch_size=3)
    items = [(f"premise {i}", f"hyp {i} : d{i} : m{i}") for i in range(10)]
    rng = random.Random(0)
    for _ in range(5):
        rng.shuffle(items)
        scores = scorer.score(ScoreRequest.of(items))
        assert scores == [_hash_score(h) for _, h in items]


def test_remote_batch_fan_out_keeps_order(stub_server):
    stub_server.responder = lambda items: [_hash_score(i["hypothesis"]) for i in items]
    scorer = RemoteScorer(stub_server.url, batch_size=2, pool_size=4)
    items = [(f"p{i}", f"h{i}") for i in range(11)]
    assert scorer.score(ScoreRequest.of(items)) == [_hash_score(h) for _, h in items]
    assert len(stub_server.requests) == 6


def test_remote_retries_transient_503(stub_server):
    stub_server.canned.append((503, json.dumps({"error": "busy"}).encode()))
    stub_server.responder = lambda items: [0.25] * len(items)
    scorer = RemoteScorer(stub_server.url, backoff=0.01)
    assert scorer.score(ScoreRequest.of([("p", "h")])) == [0.25]
    assert len(stub_server.requests) == 2


def test_remote_4xx_is_hard_protocol_error(stub_server):
    stub_server.canned.append((400, json.dumps({"error": "bad batch"}).encode()))
    scorer = RemoteScorer(stub_server.url)
    with pytest.raises(ScorerProtocolError, match="bad batch"):
        scorer.score(ScoreRequest.of([("p", "h")]))


def test_remote_out_of_range_score_is_protocol_error(stub_server):
    stub_server.responder = lambda items: [1.7] * len(items)
    scorer = RemoteScorer(stub_server.url)
    with pytest.raises(ScorerProtocolError):
        scorer.score(ScoreRequest.of([("p", "h")]))


def test_remote_unreachable_raises_transport_error_after_retries():
    scorer = RemoteScorer("http://127.0.0.1:9/score", max_retries=1, backoff=0.01)
    with pytest.raises(ScorerTransportError):
        scorer.score(ScoreRequest.of([("p", "h")]))


# ---------------------------------------------------------------------------
# Scorer selection
# ---------------------------------------------------------------------------


def test_make_scorer_dispatch():
    assert isinstance(make_scorer("lexical:"), LexicalScorer)
    assert isinstance(make_scorer("http://host/score"), RemoteScorer)
    assert isinstance(make_scorer("https://host/score"), RemoteScorer)
    with pytest.raises(ValueError):
        make_scorer("ftp://nope")
