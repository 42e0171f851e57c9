import pytest
from hypothesis import given, strategies as st

from stridecap.aggregate import AggregationFailed, aggregate_scene
from stridecap.backends.mock import MockAggregator
from stridecap.backends.prompts import FORMAT_REMINDER, extract_prompt_captions
from stridecap.core import LogicError, Subcaption


class Recording:
    def __init__(self, replies):
        self.replies = list(replies)
        self.prompts = []

    def complete(self, prompt):
        self.prompts.append(prompt)
        return self.replies.pop(0)


def test_single_subcaption_mock():
    rec = aggregate_scene([Subcaption("Whisk eggs", ("bowl", "whisk"))], MockAggregator(),
                          video_id="v", segment_index=2, config_fingerprint="abc")
    assert rec.caption.caption == "Whisk eggs."
    assert rec.caption.retained_window_starts == (0,)
    assert (rec.caption.video_id, rec.caption.segment_index, rec.caption.config_fingerprint) == ("v", 2, "abc")
    assert rec.attempts == 1


def test_three_subcaptions_listed_in_window_order():
    subs = [Subcaption("Crack eggs", window_start=0), Subcaption("Whisk", window_start=10),
            Subcaption("Fry", window_start=25)]
    backend = Recording(["<ANSWER>Crack, whisk and fry the eggs.</ANSWER>"])
    rec = aggregate_scene(subs, backend)
    assert extract_prompt_captions(backend.prompts[0]) == [s.render() for s in subs]
    assert backend.prompts[0].index("1. Crack eggs") < backend.prompts[0].index("3. Fry")
    assert rec.caption.retained_window_starts == (0, 10, 25)
    assert rec.raw_reply == "<ANSWER>Crack, whisk and fry the eggs.</ANSWER>"


def test_retry_with_reminder_then_success():
    backend = Recording(["Sure! Here it is: stir.", "<ANSWER>Stir the soup.</ANSWER>"])
    rec = aggregate_scene([Subcaption("Stir")], backend)
    assert rec.attempts == 2
    assert backend.prompts[1] == backend.prompts[0] + "\n" + FORMAT_REMINDER
    assert rec.prompt == backend.prompts[0]
    assert rec.caption.caption == "Stir the soup."


def test_two_failures_raise_with_replies():
    backend = Recording(["nope", "<ANSWER></ANSWER>"])
    with pytest.raises(AggregationFailed) as info:
        aggregate_scene([Subcaption("Stir")], backend, video_id="v", segment_index=1)
    assert info.value.replies == ["nope", "<ANSWER></ANSWER>"]
    assert "v_1" in str(info.value)


def test_empty_input():
    with pytest.raises(LogicError):
        aggregate_scene([], MockAggregator())


def test_multiline_answer_collapses_to_one_line():
    rec = aggregate_scene([Subcaption("Stir")], Recording(["<ANSWER>Stir\nthe <ANSWER>soup.</ANSWER>"]))
    assert rec.caption.caption == "Stir the soup."


@given(st.lists(st.sampled_from(["Chop onions", "Stir", "Fry eggs", "Boil water"]), min_size=1,
                max_size=8))
def test_mock_output_invariants(actions):
    subs = [Subcaption(a, window_start=10 * i) for i, a in enumerate(actions)]
    a = aggregate_scene(subs, MockAggregator())
    b = aggregate_scene(subs, MockAggregator())
    assert a == b
    assert "\n" not in a.caption.caption and "<ANSWER>" not in a.caption.caption
    assert len(extract_prompt_captions(a.prompt)) == len(subs)
