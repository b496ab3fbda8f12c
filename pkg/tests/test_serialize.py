"""File formats: canonical round-trips, error reporting."""

from fractions import Fraction
from pathlib import Path

import pytest

from ospcheck import (
    AuctionSetting,
    MechanismBundle,
    adversarial_domain,
    grand_bundle_ascending,
    restricted_additive_domain,
    second_price_single_item,
    serial_posted_price,
)
from ospcheck.serialize import (
    ParseError,
    parse_domain,
    parse_mechanism,
    serialize_domain,
    serialize_mechanism,
)

FIXTURES = Path(__file__).parent / "fixtures"


def test_fig1_fixture_parses():
    bundle = parse_mechanism((FIXTURES / "fig1_second_price.json").read_bytes())
    assert isinstance(bundle, MechanismBundle)
    assert len(bundle.tree.leaf_ids) == 4
    assert bundle.tree.root == "N1"


def test_parse_serialize_parse_idempotent():
    mu = AuctionSetting(kind="multi-unit", n=2, m=2)
    dom = adversarial_domain(mu, "mu-single-minded")
    bundles = [
        second_price_single_item(2, tiebreak_winner=1),
        grand_bundle_ascending(mu, 4, domain=dom),
        serial_posted_price(1, 3, AuctionSetting(kind="combinatorial", n=2, m=2)),
    ]
    for bundle in bundles:
        text = serialize_mechanism(bundle)
        once = parse_mechanism(text)
        again = parse_mechanism(serialize_mechanism(once))
        assert serialize_mechanism(again) == text
        assert again.tree == bundle.tree


def test_tree_only_files_supported():
    tree = second_price_single_item(2).tree
    import json

    doc = json.loads(serialize_mechanism(tree))
    assert "strategies" not in doc
    parsed = parse_mechanism(json.dumps(doc))
    assert parsed == tree


def test_domain_round_trip():
    ca = AuctionSetting(kind="combinatorial", n=2, m=2)
    for dom in (
        adversarial_domain(ca, "additive"),
        adversarial_domain(ca, "unit-demand"),
        adversarial_domain(ca, "ca-single-minded"),
        adversarial_domain(AuctionSetting(kind="multi-unit", n=3, m=2), "mu-single-minded"),
        restricted_additive_domain(Fraction(1, 2), Fraction(7, 3), ca),
    ):
        text = serialize_domain(dom)
        assert parse_domain(text) == dom


def test_syntax_error_carries_position():
    with pytest.raises(ParseError, match=r"line \d+ column \d+"):
        parse_mechanism('{"format": "ospcheck-mechanism",\n "root": }')


def test_duplicate_label_names_node_path():
    doc = """
    {"format": "ospcheck-mechanism", "version": 1,
     "setting": {"kind": "combinatorial", "n": 1, "m": 1},
     "root": {"speaker": 0, "edges": {
        "x": {"speaker": 0, "edges": {
            "a": {"allocation": [[]], "payments": ["0/1"]},
            "a": {"allocation": [[]], "payments": ["0/1"]}}}}}}
    """
    with pytest.raises(ParseError, match="duplicate message label 'a' at node /x"):
        parse_mechanism(doc)


def test_wrong_format_and_bad_rational():
    with pytest.raises(ParseError, match="format"):
        parse_mechanism('{"format": "something-else"}')
    with pytest.raises(ParseError, match="format"):
        parse_domain('{"format": "ospcheck-mechanism"}')
    doc = """
    {"format": "ospcheck-domain", "version": 1,
     "setting": {"kind": "combinatorial", "n": 1, "m": 1},
     "players": [[{"tag": "additive", "values": ["1/0"]}]]}
    """
    with pytest.raises(ParseError, match="bad rational"):
        parse_domain(doc)
