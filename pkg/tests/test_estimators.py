import pytest
from sklearn.base import clone
from sklearn.pipeline import Pipeline

from khpolarity.estimators import LexiconPolarityClassifier, LlmPolarityClassifier, TextCleaner
from khpolarity.lexlabel import Lexicon
from mock_endpoint import MockEndpoint

LEX = Lexicon(frozenset(["ល្អ", "ឆ្ងាញ់"]), frozenset(["អាក្រក់"]))


def test_cleaner_transforms_batches():
    cleaner = TextCleaner()
    out = cleaner.fit_transform(["HELLO!!! ម្ហូប។", "ok 😀"])
    assert out == ["hello ម្ហូប", "ok"]


def test_cleaner_params_round_trip():
    cleaner = TextCleaner(strip_emoji=False, respell_map={"gud": "good"})
    params = cleaner.get_params()
    assert params["strip_emoji"] is False
    rebuilt = TextCleaner(**params)
    assert rebuilt.transform(["gud 😀"]) == ["good 😀"]
    assert clone(cleaner).get_params() == params


def test_lexicon_classifier_predicts_and_explains():
    clf = LexiconPolarityClassifier(lexicon=LEX).fit([])
    texts = ["ម្ហូបឆ្ងាញ់", "អាក្រក់ណាស់", "បាយ"]
    assert clf.predict(texts) == ["positive", "negative", "neutral"]
    explained = clf.explain(texts)
    assert explained[0].matches[0].term == "ឆ្ងាញ់"
    assert explained[2].matches == ()


def test_lexicon_classifier_defaults_to_starter():
    clf = LexiconPolarityClassifier().fit([])
    assert clf.predict(["ម្ហូបឆ្ងាញ់ណាស់"]) == ["positive"]


def test_predict_before_fit_raises():
    with pytest.raises(RuntimeError, match="fit"):
        LexiconPolarityClassifier().predict(["x"])


def test_pipeline_composition():
    pipe = Pipeline([
        ("clean", TextCleaner()),
        ("clf", LexiconPolarityClassifier(lexicon=LEX)),
    ])
    pipe.fit(["x"])
    # cleaning strips the emoji and terminal mark before matching
    assert pipe.predict(["ម្ហូបឆ្ងាញ់។ 😀"]) == ["positive"]
    assert pipe.get_params()["clf__lexicon"] is LEX


def test_llm_classifier_predicts_via_endpoint():
    def script(body):
        text = body["messages"][0]["content"]
        if "ល្អ" in text:
            return (200, "<think> Because the input text contains the following ល្អ </think>\npositive")
        return (200, "<think>\n\n</think>\nneutral")

    with MockEndpoint(script) as mock:
        clf = LlmPolarityClassifier(base_url=mock.base_url, model_name="m").fit()
        assert clf.predict(["ល្អណាស់", "បាយ"]) == ["positive", "neutral"]
        assert sorted(clf.classes_) == ["negative", "neutral", "positive"]


def test_llm_classifier_marks_unparseable_predictions():
    with MockEndpoint(lambda body: (200, "<think> eh </think>\ndunno")) as mock:
        clf = LlmPolarityClassifier(base_url=mock.base_url, model_name="m").fit()
        assert clf.predict(["x"]) == ["unparseable"]


def test_llm_classifier_validates_mode_at_fit():
    clf = LlmPolarityClassifier(base_url="http://127.0.0.1:9", model_name="m", mode="chatty")
    with pytest.raises(ValueError):
        clf.fit()
