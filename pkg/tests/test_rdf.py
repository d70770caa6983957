import json

import pytest
import rdflib
from hypothesis import given, settings
from rdflib.compare import isomorphic

from conftest import GOLDEN
from strategies import notations
from udcld.notation import parse
from udcld.rdf import (
    FIELD_PROPERTIES,
    KIND_PREDICATES,
    RDF,
    SKOS,
    SYNTAX,
    Blank,
    Graph,
    Iri,
    Literal,
    complex_graph,
    dataset_graph,
    graph_json,
    record_graph,
    to_turtle,
)
from udcld.store import Tier
from udcld.views import interpret

S = "http://udcsummary.udcdata.info/"


def load_ttl(text):
    return rdflib.Graph().parse(data=text, format="turtle")


def test_record_311_matches_golden(store):
    ttl = to_turtle(record_graph(store, store.current("311"), Tier.SUMMARY))
    assert isomorphic(load_ttl(ttl), load_ttl((GOLDEN / "311.ttl").read_text()))


def test_record_311_edges(store):
    g = record_graph(store, store.current("311"), Tier.SUMMARY)
    me = Iri(S + "mrf92/311")
    assert g.objects(me, SKOS.broader) == [Iri(S + "mrf92/3")]
    assert len(g.objects(me, SKOS.narrower)) == 4
    assert g.objects(me, SKOS.prefLabel) == [Literal("Statistics as a science. Statistical theory", lang="en")]


def test_cancelled_record_carries_replacement(store):
    g = record_graph(store, store.current("930.9"), Tier.MRF)
    text = to_turtle(g)
    assert "<http://mrf.udcdata.info/mrf94/94>" in text
    assert '"mrf94"' in text
    assert not g.objects(Iri("http://mrf.udcdata.info/mrf92/930.9"), SKOS.narrower)


def test_replacement_target_is_a_uri_when_visible(store):
    g = record_graph(store, store.current("582.281.1"), Tier.MRF)
    targets = [o for t in g for o in [t.o] if t.p == RDF.value]
    assert Iri("http://mrf.udcdata.info/mrf98/582.244") in targets


def test_invisible_record_refused(store):
    with pytest.raises(ValueError):
        record_graph(store, store.current("512.742"), Tier.SUMMARY)


def test_field_mapping_is_total():
    assert len(FIELD_PROPERTIES) == 14
    assert len({(str(p), str(q) if q else None) for p, q in FIELD_PROPERTIES.values()}) == 14


def test_multilingual_labels(store):
    g = record_graph(store, store.current("538.9"), Tier.SUMMARY)
    langs = {o.lang for o in g.objects(Iri(S + "mrf92/538.9"), SKOS.prefLabel)}
    assert {"en", "el", "ru", "zh", "bn", "hi"} <= langs


def _relation_graph(store):
    result = interpret(store, "94(492):94(729.885)", Tier.SUMMARY)
    return result.graph()


def test_relation_graph_shape(store):
    g = _relation_graph(store)
    blanks = g.blank_nodes()
    assert len(blanks) == 3
    rel = list(g.triples(p=SYNTAX.relation_to))
    assert len(rel) == 1
    root = [b for b in blanks if g.objects(b, SYNTAX.operand)]
    assert len(root) == 1
    compounds = g.objects(root[0], SYNTAX.operand)
    assert [rel[0].s, rel[0].o] == compounds
    assert [t.o for t in g.triples(p=SYNTAX.main)] == [Iri(S + "mrf94/94")] * 2
    assert {t.o for t in g.triples(p=SYNTAX.place_aux)} == {
        Iri(S + "mrf93/_or_492_cr_"), Iri(S + "mrf11/_or_729.885_cr_")}


def test_relation_graph_isomorphic_to_hand_graph(store):
    expected = load_ttl(f"""
        @prefix x: <http://udcdata.info/udc-syntax-schema#> .
        @prefix n: <http://udcdata.info/> .
        _:root x:operand _:a, _:b ; x:notation "94(492):94(729.885)"^^n:UDCnotation .
        _:a x:main <{S}mrf94/94> ; x:place_aux <{S}mrf93/_or_492_cr_> ;
            x:relation_to _:b ; x:notation "94(492)"^^n:UDCnotation .
        _:b x:main <{S}mrf94/94> ; x:place_aux <{S}mrf11/_or_729.885_cr_> ;
            x:notation "94(729.885)"^^n:UDCnotation .
    """)
    assert isomorphic(load_ttl(to_turtle(_relation_graph(store))), expected)


def test_atomic_notation_has_no_blank_nodes(store):
    g = interpret(store, "311", Tier.SUMMARY).graph()
    assert not g.blank_nodes()
    assert g.objects(Iri(S + "mrf92/311"), SKOS.notation)


def test_unresolved_leaf_is_literal(store):
    g = interpret(store, "94(999)", Tier.SUMMARY).graph()
    [place] = [t.o for t in g.triples(p=SYNTAX.place_aux)]
    assert isinstance(place, Literal) and place.value == "(999)"


def test_kind_predicates_cover_all_kinds():
    from udcld.notation import ElementKind
    assert set(KIND_PREDICATES) == set(ElementKind)


def test_turtle_escapes_and_parses():
    g = Graph()
    g.add(Iri("http://x/a"), SKOS.scopeNote, Literal('say "hi"\nnow', lang="en"))
    parsed = load_ttl(to_turtle(g))
    assert str(next(iter(parsed.objects()))) == 'say "hi"\nnow'


def test_json_rows(store):
    rows = json.loads(graph_json(record_graph(store, store.current("311"), Tier.SUMMARY)))
    assert {"s", "p", "o"} == set(rows[0])
    assert rows[0]["s"] == f"<{S}mrf92/311>"


def test_dump_parses_and_is_stable(store):
    first = to_turtle(dataset_graph(store, Tier.SUMMARY))
    assert first == to_turtle(dataset_graph(store, Tier.SUMMARY))
    parsed = load_ttl(first)
    concepts = set(parsed.subjects(rdflib.RDF.type, rdflib.SKOS.Concept))
    assert len(concepts) == sum(1 for r in store if r.visible_at(Tier.SUMMARY))


@settings(max_examples=1000, deadline=None)
@given(notations)
def test_blank_node_count_matches_structure(case):
    text, shape = case
    g = complex_graph(parse(text), {}, Tier.SUMMARY)
    expected = shape["compound"] + shape["connected"] + shape["subgroup"]
    assert len(g.blank_nodes()) == expected
    assert len(list(g.triples(p=SYNTAX.operand))) >= 2 * shape["connected"]
