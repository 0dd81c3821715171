import numpy as np
import pytest

from keydyn.capture import (
    CaptureAttempt,
    KeyEvent,
    TimingTemplate,
    extract_template,
    filter_outlier,
    fta_rate,
    validate_attempt,
)

from conftest import make_attempt, random_attempt


class TestValidateAttempt:
    def test_clean_attempt_is_acquired(self):
        attempt = make_attempt("ab", [0, 150], [100, 230])
        assert validate_attempt(attempt).acquired

    def test_missing_release_is_malformed(self):
        attempt = make_attempt("ab", [0, 150], [100, 230])
        events = tuple(e for e in attempt.events if not (e.key_label == "b" and e.action == "release"))
        broken = CaptureAttempt("u1", "s01", 0, "ab", "ab", events)
        result = validate_attempt(broken)
        assert not result.acquired
        assert result.reason == "malformed_events"

    def test_typo_is_text_mismatch(self):
        attempt = make_attempt(
            "laboratoire greyc",
            list(range(0, 1700, 100)),
            list(range(80, 1780, 100)),
            typed_text="laboratoir egreyc",
        )
        result = validate_attempt(attempt)
        assert not result.acquired
        assert result.reason == "text_mismatch"

    def test_unsorted_events_are_malformed(self):
        attempt = make_attempt("ab", [0, 150], [100, 230])
        events = tuple(reversed(attempt.events))
        assert validate_attempt(CaptureAttempt("u1", "s01", 0, "ab", "ab", events)).reason == "malformed_events"

    def test_release_before_press_is_malformed(self):
        events = (
            KeyEvent("a", "release", 0.0),
            KeyEvent("a", "press", 10.0),
        )
        assert validate_attempt(CaptureAttempt("u1", "s01", 0, "a", "a", events)).reason == "malformed_events"

    def test_presses_must_spell_typed_text(self):
        attempt = make_attempt("ba", [0, 150], [100, 230], typed_text="ab")
        broken = CaptureAttempt("u1", "s01", 0, "ab", "ab", attempt.events)
        assert validate_attempt(broken).reason == "malformed_events"

    def test_is_pure(self):
        attempt = make_attempt("ab", [0, 150], [100, 230])
        assert validate_attempt(attempt) == validate_attempt(attempt)


class TestExtractTemplate:
    def test_reference_two_key_attempt(self):
        # press a@0, release a@100, press b@150, release b@230
        attempt = make_attempt("ab", [0, 150], [100, 230])
        assert extract_template(attempt, "PP").values == (150,)
        assert extract_template(attempt, "RR").values == (130,)
        assert extract_template(attempt, "RP").values == (50,)
        assert extract_template(attempt, "PR").values == (100, 80)
        assert extract_template(attempt, "V").values == (150, 130, 50, 100, 80)

    def test_rollover_gives_negative_rp(self):
        # press a@0, press b@80, release a@120, release b@200
        attempt = make_attempt("ab", [0, 80], [120, 200])
        assert extract_template(attempt, "PP").values == (80,)
        assert extract_template(attempt, "RR").values == (80,)
        assert extract_template(attempt, "RP").values == (-40,)
        assert extract_template(attempt, "PR").values == (120, 120)

    def test_pr_block_is_v_suffix(self, rng):
        attempt = random_attempt(rng)
        pr = extract_template(attempt, "PR").values
        v = extract_template(attempt, "V").values
        assert v[-len(pr):] == pr

    def test_dimensions(self, rng):
        attempt = random_attempt(rng, "laboratoire greyc")
        n = 17
        assert len(extract_template(attempt, "PP").values) == n - 1
        assert len(extract_template(attempt, "RR").values) == n - 1
        assert len(extract_template(attempt, "RP").values) == n - 1
        assert len(extract_template(attempt, "PR").values) == n
        assert len(extract_template(attempt, "V").values) == 4 * n - 3

    def test_pp_decomposes_into_rp_plus_pr(self, rng):
        for _ in range(50):
            attempt = random_attempt(rng)
            pp = extract_template(attempt, "PP").values
            rp = extract_template(attempt, "RP").values
            pr = extract_template(attempt, "PR").values
            for i in range(len(pp)):
                assert pp[i] == rp[i] + pr[i]

    def test_offset_invariance(self, rng):
        attempt = random_attempt(rng)
        shifted_events = tuple(
            KeyEvent(e.key_label, e.action, e.t_ms + 5000.0) for e in attempt.events
        )
        shifted = CaptureAttempt(
            attempt.user_id, attempt.session_id, attempt.attempt_index,
            attempt.target_text, attempt.typed_text, shifted_events,
        )
        for kind in ("PP", "RR", "RP", "PR", "V"):
            assert extract_template(attempt, kind).values == extract_template(shifted, kind).values

    def test_rejects_invalid_attempt(self):
        attempt = make_attempt("ab", [0, 150], [100, 230], typed_text="ba")
        with pytest.raises(ValueError):
            extract_template(attempt, "PP")

    def test_rejects_single_char_password(self):
        attempt = make_attempt("a", [0], [90])
        with pytest.raises(ValueError):
            extract_template(attempt, "PP")

    def test_modifier_keys_are_ignored(self):
        attempt = make_attempt("ab", [0, 150], [100, 230])
        events = (KeyEvent("shift", "press", 0.0),) + attempt.events + (
            KeyEvent("shift", "release", 240.0),
        )
        with_mod = CaptureAttempt("u1", "s01", 0, "ab", "ab", events)
        assert validate_attempt(with_mod).acquired
        assert extract_template(with_mod, "V").values == (150, 130, 50, 100, 80)

    def test_repeated_characters_match_fifo(self):
        # "aa" with overlap: first a pressed @0 released @120, second @80/@200
        attempt = make_attempt("aa", [0, 80], [120, 200])
        assert extract_template(attempt, "RP").values == (-40,)


class TestFilterOutlier:
    def test_keeps_small_latencies(self):
        t = TimingTemplate("PP", (150.0,), ("u", "s", 0))
        assert filter_outlier(t)

    def test_rejects_above_500(self):
        t = TimingTemplate("PP", (600.0,), ("u", "s", 0))
        assert not filter_outlier(t)

    def test_boundary_500_is_kept(self):
        t = TimingTemplate("PP", (500.0,), ("u", "s", 0))
        assert filter_outlier(t)

    def test_pr_hold_times_are_exempt(self):
        t = TimingTemplate("PR", (900.0, 900.0), ("u", "s", 0))
        assert filter_outlier(t)

    def test_v_checks_only_inter_key_block(self):
        # n=2: V = [PP, RR, RP, PR0, PR1]; huge holds are exempt
        keep = TimingTemplate("V", (150.0, 130.0, 50.0, 900.0, 900.0), ("u", "s", 0))
        assert filter_outlier(keep)
        reject = TimingTemplate("V", (600.0, 130.0, 50.0, 100.0, 80.0), ("u", "s", 0))
        assert not filter_outlier(reject)


class TestFtaRate:
    def test_two_of_seven_invalid(self):
        good = make_attempt("ab", [0, 150], [100, 230])
        bad = make_attempt("ab", [0, 150], [100, 230], typed_text="ba")
        attempts = [good] * 5 + [bad] * 2
        assert fta_rate(attempts) == pytest.approx(2 / 7)

    def test_all_valid_is_zero(self):
        good = make_attempt("ab", [0, 150], [100, 230])
        assert fta_rate([good, good]) == 0.0

    def test_empty_list_errors(self):
        with pytest.raises(ValueError, match="empty_input"):
            fta_rate([])
