import json

import pytest

from dynarag.config import DomainConfig, RoutingConfig
from dynarag.gateway import FixtureEntry, ModelGateway, ScriptedBackend
from dynarag.preanswer import (
    GatewayDomainClassifier,
    KeywordCentroidClassifier,
    PreAnswerModule,
    extract_flags,
    extract_object_name,
    is_specific_identity,
    parse_trace,
)
from dynarag.prompts import register_all

ROUTING = RoutingConfig()
DOMAINS = DomainConfig()


def make_module(entries) -> PreAnswerModule:
    gateway = ModelGateway(ScriptedBackend(entries))
    register_all(gateway)
    return PreAnswerModule(gateway, DOMAINS, ROUTING)


def evaluator_entry(key, text, probs=(0.9, 0.9)):
    return FixtureEntry("evaluator", key, text, probs, 0.0)


# --- domain classification -----------------------------------------------------


def test_cafe_query_classifies_to_food():
    # Golden value recorded from the default keyword-centroid classifier.
    label = KeywordCentroidClassifier(DOMAINS).classify("Who founded this cafe?")
    assert label.name == "food"
    assert label.confidence > 0


def test_integral_query_classifies_to_math():
    label = KeywordCentroidClassifier(DOMAINS).classify("What is the integral of x?")
    assert label.name == "math"


def test_empty_query_falls_back_to_other():
    label = KeywordCentroidClassifier(DOMAINS).classify("")
    assert label.name == "other"
    assert label.confidence == 0.0


def test_classifier_is_total():
    clf = KeywordCentroidClassifier(DOMAINS)
    for query in ("zzzz qqqq xxxx", "42", "?!", "the of and", "ünïcode tæxt"):
        label = clf.classify(query)
        assert label.name in DOMAINS.taxonomy


def test_taxonomy_requires_other():
    with pytest.raises(ValueError):
        DomainConfig(taxonomy=("food", "math"))


def test_gateway_backed_classifier_parses_scripted_label():
    gateway = ModelGateway(ScriptedBackend([
        FixtureEntry("domain_classify", "k",
                     json.dumps({"domain": "vehicles", "confidence": 0.8}),
                     (0.9,), 0.0),
    ]))
    register_all(gateway)
    clf = GatewayDomainClassifier(gateway, DOMAINS)
    label = clf.classify("what car is this", fixture_key="k")
    assert label.name == "vehicles"
    assert label.confidence == pytest.approx(0.8)


def test_gateway_backed_classifier_falls_back_to_other():
    gateway = ModelGateway(ScriptedBackend([
        FixtureEntry("domain_classify", "bad", "not json", (0.9,), 0.0),
        FixtureEntry("domain_classify", "alien",
                     json.dumps({"domain": "not-in-taxonomy"}), (0.9,), 0.0),
    ]))
    register_all(gateway)
    clf = GatewayDomainClassifier(gateway, DOMAINS)
    assert clf.classify("q", fixture_key="bad").name == "other"
    assert clf.classify("q", fixture_key="alien").name == "other"
    assert clf.classify("q", fixture_key="missing").name == "other"


# --- trace parsing ----------------------------------------------------------------


def ocr_trace():
    return "\n".join([
        '1. The exact name of the object that the query "What is written '
        'on these umbrellas?" is about is the umbrellas.',
        '2. The text written on the umbrellas reads "Sunny Days".',
        json.dumps({"reasoning": "Read the canopy.",
                    "answer": 'The umbrellas say "Sunny Days".'}),
    ])


def test_scripted_ocr_fixture_parses_to_draft_and_flags():
    module = make_module([evaluator_entry("umbrella-q1", ocr_trace())])
    domain = module.classify_domain("What is written on these umbrellas?", "img-1")
    trace = module.dcot_preanswer(
        "What is written on these umbrellas?", "img-1", domain, "umbrella-q1"
    )
    assert trace.draft_answer == 'The umbrellas say "Sunny Days".'
    assert not trace.unanswerable
    assert trace.flags.is_ocr_answer
    assert trace.token_probs == (0.9, 0.9)


def test_cannot_determine_marks_unanswerable():
    text = "\n".join([
        "1. I cannot determine the name of the cafe that the query is about.",
        json.dumps({"reasoning": "r", "answer": "I cannot determine the name."}),
    ])
    trace = parse_trace(text, ROUTING)
    assert trace.unanswerable
    assert trace.flags.has_idk
    assert "cannot determine" in trace.draft_answer.lower()
    assert trace.object_name is None


def test_seven_steps_truncate_to_five(caplog):
    steps = [f"{i}. Step number {i} of the reasoning." for i in range(1, 8)]
    text = "\n".join(steps + [json.dumps({"reasoning": "r", "answer": "x"})])
    with caplog.at_level("WARNING"):
        trace = parse_trace(text, ROUTING)
    assert len(trace.steps) == 5
    assert any("truncating" in r.message for r in caplog.records)


def test_unparseable_output_yields_conservative_trace():
    trace = parse_trace("complete nonsense with no structure", ROUTING)
    assert trace.unanswerable
    assert trace.flags.has_idk
    assert trace.steps == []


def test_parse_failure_inside_module_is_conservative():
    module = make_module([evaluator_entry("bad", "garbage blob")])
    domain = module.classify_domain("q", "img")
    trace = module.dcot_preanswer("q", "img", domain, "bad")
    assert trace.unanswerable and trace.flags.has_idk


def test_first_step_names_the_object():
    trace = parse_trace(ocr_trace(), ROUTING)
    assert trace.steps[0].startswith("The exact name of the object")
    assert trace.object_name == "umbrellas"


# --- flag extraction -----------------------------------------------------------------


def test_flags_are_pure_function_of_text():
    text = ocr_trace()
    assert extract_flags(text, ROUTING) == extract_flags(text, ROUTING)


def test_has_idk_iff_phrase_present():
    for phrase in ROUTING.unanswerable_phrases:
        assert extract_flags(f"1. Well, {phrase} here.", ROUTING).has_idk
    assert not extract_flags("1. A confident statement.", ROUTING).has_idk


def test_numeric_detection():
    numeric = "\n".join([
        "1. The receipt shows two amounts.",
        json.dumps({"reasoning": "r", "answer": "The total is $12.50."}),
    ])
    assert extract_flags(numeric, ROUTING).is_numeric_answer
    verbal = "\n".join([
        "1. The plate holds food.",
        json.dumps({"reasoning": "r", "answer": "A plate of pasta."}),
    ])
    assert not extract_flags(verbal, ROUTING).is_numeric_answer


def test_speculative_detection():
    text = "1. The dish is probably shakshuka."
    assert extract_flags(text, ROUTING).speculative
    assert not extract_flags("1. The dish is shakshuka.", ROUTING).speculative


def test_open_world_cue_from_capitalized_span():
    named = '1. The exact name of the object that the query "q" is about is BMW M4.'
    assert extract_flags(named, ROUTING).open_world_cue
    plain = '1. The exact name of the object that the query "q" is about is the umbrellas.'
    assert not extract_flags(plain, ROUTING).open_world_cue


def test_quoted_ocr_spans_do_not_trigger_open_world():
    text = '2. The text written on the sign reads "Sunny Days Ahead".'
    flags = extract_flags(text, ROUTING)
    assert flags.is_ocr_answer
    assert not flags.open_world_cue


def test_specific_identity_heuristic():
    assert is_specific_identity("BMW M4", ROUTING)
    assert is_specific_identity("Blue Bottle Coffee", ROUTING)
    assert is_specific_identity("blue whale", ROUTING)
    assert not is_specific_identity("umbrellas", ROUTING)
    assert not is_specific_identity("red car", ROUTING)
    assert not is_specific_identity("cafe", ROUTING)
    assert not is_specific_identity(None, ROUTING)


def test_extract_object_name_variants():
    assert extract_object_name(
        '1. The exact name of the object that the query "q" is about is the Eiffel Tower.'
    ) == "Eiffel Tower"
    assert extract_object_name("no step lines at all") is None
