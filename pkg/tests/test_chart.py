import pytest

from wordsteer.chart import (
    COMPLETE,
    NO_PARSE,
    PARTIAL,
    Chart,
    batch_parse,
    best_parse,
    combine,
    current_result,
    dump,
    feed_word,
    node_surface,
    reset,
)
from wordsteer.semantics import SITE_ACTION, SITE_OBJECT, Frame
from wordsteer.world import load_shipped_world

WALKTHROUGH = ["grab", "the", "mug", "by", "the", "top"]

GRASP_MUG = "INSTRUCT(speaker,listener,graspObject(listener,mug))"
GRASP_MUG_BY_TOP = "INSTRUCT(speaker,listener,graspObject(listener,mug), by(mug, top))"


def feed_all(chart, words, grammar):
    result = None
    for w in words:
        result = feed_word(chart, w, grammar)
    return result


class TestWalkthrough:
    def test_prefix_is_not_submittable(self, grammar):
        chart = Chart()
        result = feed_all(chart, ["grab", "the"], grammar)
        assert result.status == PARTIAL
        assert result.best is None

    def test_first_complete_parse_after_three_words(self, grammar):
        chart = Chart()
        result = feed_all(chart, ["grab", "the", "mug"], grammar)
        assert result.status == COMPLETE
        assert str(result.best.category) == "VP"
        assert result.best.render_semantics() == GRASP_MUG

    def test_full_utterance_semantics(self, grammar):
        chart = Chart()
        result = feed_all(chart, WALKTHROUGH, grammar)
        assert result.status == COMPLETE
        assert result.best.render_semantics() == GRASP_MUG_BY_TOP

    def test_chart_cells_match_reference_table(self, grammar):
        chart = Chart()
        feed_all(chart, WALKTHROUGH, grammar)

        def labels(j, k):
            return [
                (str(n.category), node_surface(chart, n)) for n in chart.cell(j, k)
            ]

        assert labels(1, 2) == [("NP", "the mug")]
        assert labels(0, 2) == [("VP", "grab the mug")]
        assert labels(4, 5) == [("NP", "the top")]
        assert labels(3, 5) == [
            ("S\\VP", "by the top"),
            ("S\\VP", "by the top"),
        ]
        assert labels(0, 5) == [
            ("S", "grab (the mug) (by the top)"),
            ("S", "grab (the mug by the top)"),
        ]
        # every other off-diagonal cell stays empty
        expected_filled = {(1, 2), (0, 2), (4, 5), (3, 5), (0, 5)}
        for (j, k), nodes in chart.cells.items():
            if j == k:
                continue
            if nodes:
                assert (j, k) in expected_filled, f"unexpected nodes in {(j, k)}"
        # and the two final parses differ in attachment site
        sites = [site for n in chart.cell(0, 5) for site, _ in n.semantics.mods]
        assert sites == [SITE_ACTION, SITE_OBJECT]

    def test_verb_attachment_selected_as_best(self, grammar):
        chart = Chart()
        result = feed_all(chart, WALKTHROUGH, grammar)
        assert result.best.semantics.mods[0][0] == SITE_ACTION
        assert len([n for n in result.alternatives if str(n.category) == "S"]) == 2

    def test_dump_mirrors_reference_layout(self, grammar):
        chart = Chart()
        feed_all(chart, WALKTHROUGH, grammar)
        text = dump(chart)
        assert "NP -> the mug" in text
        assert "VP -> grab the mug" in text
        assert "PP -> by the top" in text
        assert "PP -> by the top (modifies NP)" in text
        assert "*S -> grab (the mug) (by the top)" in text
        assert "S -> grab (the mug by the top)" in text


class TestFeedWord:
    def test_empty_chart_reports_no_parse(self):
        assert current_result(Chart()).status == NO_PARSE

    def test_unknown_word_occupies_an_index(self, grammar):
        chart = Chart()
        result = feed_all(chart, ["grab", "the", "xyzzy", "mug"], grammar)
        assert chart.n == 4
        assert chart.cell(2, 2) == []
        assert result.status == PARTIAL

    def test_version_is_monotone(self, grammar):
        chart = Chart()
        versions = [feed_word(chart, w, grammar).version for w in WALKTHROUGH]
        assert versions == sorted(versions)
        assert len(set(versions)) == len(versions)

    def test_lexical_cells_hold_only_token_entries(self, grammar):
        chart = Chart()
        feed_all(chart, WALKTHROUGH, grammar)
        for i, word in enumerate(WALKTHROUGH):
            expected = {str(e.category) for e in grammar.lookup(word)}
            got = {str(n.category) for n in chart.cell(i, i)}
            assert got == expected
            assert all(n.is_leaf for n in chart.cell(i, i))

    def test_internal_nodes_have_adjacent_children(self, grammar):
        chart = Chart()
        feed_all(chart, WALKTHROUGH, grammar)
        for (j, k), nodes in chart.cells.items():
            for node in nodes:
                if node.is_leaf:
                    assert j == k
                else:
                    left, right = node.children
                    assert left.span[0] == j and right.span[1] == k
                    assert left.span[1] + 1 == right.span[0]

    def test_internal_semantics_recomputable_from_children(self, grammar):
        chart = Chart()
        feed_all(chart, WALKTHROUGH, grammar)
        for nodes in chart.cells.values():
            for node in nodes:
                if node.is_leaf:
                    continue
                redo = combine(*node.children)
                assert redo is not None
                assert redo.category == node.category
                assert redo.semantics == node.semantics


class TestCombine:
    def test_determiner_plus_noun(self, grammar):
        chart = Chart()
        feed_all(chart, ["the", "mug"], grammar)
        node = chart.cell(0, 1)[0]
        assert str(node.category) == "NP"
        assert node.render_semantics() == "mug"

    def test_clause_plus_action_modifier_gives_sentence(self, grammar):
        chart = Chart()
        feed_all(chart, WALKTHROUGH, grammar)
        best = current_result(chart).best
        assert str(best.category) == "S"
        assert best.semantics.mods[0][0] == SITE_ACTION
        assert best.semantics.mods[0][1] == Frame(
            "by", (best.semantics.args[2].args[1], best.semantics.mods[0][1].args[1])
        )

    def test_uncombinable_pair_yields_nothing(self, grammar):
        chart = Chart()
        feed_all(chart, ["the", "mug", "the", "top"], grammar)
        np_left = chart.cell(0, 1)[0]
        np_right = chart.cell(2, 3)[0]
        assert combine(np_left, np_right) is None

    def test_non_adjacent_spans_rejected(self, grammar):
        chart = Chart()
        feed_all(chart, WALKTHROUGH, grammar)
        verb = chart.cell(0, 0)[0]
        noun = chart.cell(2, 2)[0]
        assert combine(verb, noun) is None


class TestBestParse:
    def test_table_ambiguity_prefers_action_attachment(self, grammar):
        chart = Chart()
        result = feed_all(chart, WALKTHROUGH, grammar)
        world = load_shipped_world("scenario1")
        chosen = best_parse(result, world)
        assert chosen is not None
        assert chosen.semantics.mods[0][0] == SITE_ACTION

    def test_single_parse_returned_directly(self, grammar):
        chart = Chart()
        result = feed_all(chart, ["grab", "the", "mug"], grammar)
        assert best_parse(result) is result.best

    def test_unresolvable_referent_discarded_with_fallback(self, grammar):
        world = load_shipped_world("scenario1")  # holds one black mug
        chart = Chart()
        result = feed_all(chart, ["grab", "the", "blue", "mug"], grammar)
        assert result.status == COMPLETE
        assert best_parse(result, world) is None

        chart2 = Chart()
        result2 = feed_all(chart2, ["grab", "the", "mug"], grammar)
        assert best_parse(result2, world) is not None

    def test_incomplete_result_has_no_best(self, grammar):
        chart = Chart()
        result = feed_all(chart, ["grab", "the"], grammar)
        assert best_parse(result) is None


class TestReset:
    def test_reset_empties_chart_and_keeps_version(self, grammar):
        chart = Chart()
        feed_all(chart, WALKTHROUGH, grammar)
        version = chart.version
        reset(chart)
        assert chart.n == 0
        assert chart.cells == {}
        assert chart.version == version

    def test_reset_then_reparse_matches_fresh_chart(self, grammar):
        chart = Chart()
        feed_all(chart, ["pass", "the", "mug"], grammar)
        reset(chart)
        result = feed_all(chart, ["grab", "the", "mug"], grammar)
        fresh = feed_all(Chart(), ["grab", "the", "mug"], grammar)
        assert result.status == fresh.status
        assert result.best.signature() == fresh.best.signature()

    def test_reset_is_idempotent(self, grammar):
        chart = Chart()
        feed_all(chart, WALKTHROUGH, grammar)
        reset(chart)
        snapshot = (chart.n, dict(chart.cells), chart.version)
        reset(chart)
        assert (chart.n, dict(chart.cells), chart.version) == snapshot


class TestConjunctionsAndCorrections:
    def test_conjoined_clauses_parse_complete(self, grammar):
        chart = Chart()
        result = feed_all(chart, "pass the mug but don't spill it".split(), grammar)
        assert result.status == COMPLETE
        sem = result.best.render_semantics()
        assert "seq(" in sem and "not(spillObject(listener,it))" in sem

    def test_three_clause_stream(self, grammar):
        words = "pass the mug but keep it upright and avoid going over the laptop"
        result = feed_all(Chart(), words.split(), grammar)
        assert result.status == COMPLETE
        sem = result.best.render_semantics()
        assert "keepState(listener,it,upright)" in sem
        assert "avoidRegion(listener,going(over(laptop)))" in sem

    def test_handover_with_manner_clause(self, grammar):
        words = "hand me the screwdriver but move faster"
        result = feed_all(Chart(), words.split(), grammar)
        assert result.status == COMPLETE
        sem = result.best.render_semantics()
        assert "handObject(listener,screwdriver,speaker)" in sem
        assert "adjustMotion(listener,faster)" in sem

    def test_referent_correction(self, grammar):
        result = feed_all(Chart(), "grab the mug no the blue one".split(), grammar)
        assert result.status == COMPLETE
        sem = result.best.semantics
        assert any(site == "correction" for site, _ in sem.mods)

    def test_ordering_clause(self, grammar):
        words = "pick up the apple after you put down the mug"
        result = feed_all(Chart(), words.split(), grammar)
        assert result.status == COMPLETE
        sem = result.best.render_semantics()
        assert sem.startswith("after(")
        assert "pickUp(listener,apple)" in sem
        assert "putDown(listener,mug)" in sem


def test_batch_parse_matches_walkthrough(grammar):
    incremental = Chart()
    for w in WALKTHROUGH:
        feed_word(incremental, w, grammar)
    batch = batch_parse(WALKTHROUGH, grammar)
    assert batch.signatures() == incremental.signatures()
