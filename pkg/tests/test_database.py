import struct

import pytest

from domineering import database as D
from domineering.board import Position, bb_symkey, parse_position, transform
from domineering.notation import parse_value
from domineering.values import GameStore, Kind

TOTALS = {1: 1, 2: 2, 3: 3, 4: 9, 5: 21, 6: 68, 7: 208, 8: 730, 9: 2542, 10: 9287, 11: 34053, 12: 127112}


def fixed_polyominoes(n):
    """All translation classes of n-cell polyominoes, by brute-force growth."""
    layer = {frozenset({(0, 0)})}
    for _ in range(n - 1):
        grown = set()
        for cells in layer:
            for r, c in cells:
                for q in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                    if q not in cells:
                        grown.add(Position.from_cells(cells | {q}).cells)
        layer = grown
    return layer


@pytest.fixture(scope="module")
def db6(tmp_path_factory):
    path = tmp_path_factory.mktemp("db6") / "d6.dcgt"
    return D.build(6, path=path), path


def test_layer_counts_by_enumeration():
    keys = None
    for n in range(1, 11):
        keys = D.enumerate_keys(n, keys)
        assert len(keys) == TOTALS[n]
        assert keys == sorted(keys)


@pytest.mark.parametrize("n", range(1, 8))
def test_dedup_matches_brute_force_orbits(n):
    orbits = {bb_symkey(Position.from_cells(c).bits) for c in fixed_polyominoes(n)}
    assert set(D.enumerate_keys(n)) == orbits


def test_enumerate_layer_yields_positions():
    ps = list(D.enumerate_layer(3))
    assert sorted(p.size for p in ps) == [3, 3, 3]


def test_build_small(db6):
    db, _ = db6
    assert [db.layers[n].count for n in range(1, 7)] == [1, 2, 3, 9, 21, 68]


def test_full_layer_totals(db12):
    assert {n: db12.layers[n].count for n in db12.sizes()} == TOTALS


def test_queries(db12):
    st = db12.store
    assert db12.query(parse_position("o./oo")) is st.star
    assert db12.query(parse_position("oo/oo")) is parse_value("{1|-1}", st)
    p = Position.from_bits(db12.layers[9].keys[123])
    for s in ("identity", "mirror_x", "mirror_y", "rot180"):
        assert db12.query(transform(p, s)) is db12.query(p)
    assert db12.query(transform(p, "rot90")) is st.negate(db12.query(p))


def test_query_errors(db12):
    with pytest.raises(D.SizeOutOfRange):
        db12.query(Position.from_cells((r, 0) for r in range(13)))
    with pytest.raises(D.DatabaseError):
        db12.query(parse_position("o.o"))


def test_round_trip(db6, tmp_path):
    db, path = db6
    again = D.load(path)
    assert again.sizes() == db.sizes()
    for n in db.sizes():
        assert again.layers[n].keys == db.layers[n].keys
        assert [str(g) for g in again.layers[n].values] == [str(g) for g in db.layers[n].values]
    assert {n: c.as_dict() for n, c in D.census(again).items()} == {n: c.as_dict() for n, c in D.census(db).items()}
    # saving the loaded copy reproduces the file byte for byte
    D.save(again, tmp_path / "copy.dcgt")
    assert (tmp_path / "copy.dcgt").read_bytes() == path.read_bytes()


def test_round_trip_census_size12(db_path, census12):
    again = D.census(D.load(db_path))
    assert {n: c.as_dict() for n, c in again.items()} == {n: c.as_dict() for n, c in census12.items()}


def test_build_is_deterministic_across_worker_counts(tmp_path):
    a, b = tmp_path / "a.dcgt", tmp_path / "b.dcgt"
    D.build(9, workers=1, path=a)
    D.build(9, workers=3, path=b, chunk=256)
    assert a.read_bytes() == b.read_bytes()


def _corrupt(path, tmp_path, offset, value=None):
    data = bytearray(path.read_bytes())
    data[offset] = (data[offset] ^ 0xFF) if value is None else value
    out = tmp_path / "bad.dcgt"
    out.write_bytes(bytes(data))
    return out


def test_load_rejects_damage(db6, tmp_path):
    _, path = db6
    with pytest.raises(D.CorruptDatabase):
        D.load(_corrupt(path, tmp_path, 0))
    with pytest.raises(D.VersionMismatch):
        D.load(_corrupt(path, tmp_path, 4, 99))
    with pytest.raises(D.CorruptDatabase, match="incomplete"):
        D.load(_corrupt(path, tmp_path, 9, 0))
    with pytest.raises(D.CorruptDatabase):
        D.load(_corrupt(path, tmp_path, 40))
    with pytest.raises(D.CorruptDatabase, match="checksum"):
        D.load(_corrupt(path, tmp_path, len(path.read_bytes()) - 1))
    with pytest.raises(D.CorruptDatabase):
        D.load(_corrupt(path, tmp_path, len(path.read_bytes()) - 6))
    trunc = tmp_path / "trunc.dcgt"
    trunc.write_bytes(path.read_bytes()[:-20])
    with pytest.raises(D.CorruptDatabase):
        D.load(trunc)


def test_header_layout(db6):
    _, path = db6
    data = path.read_bytes()
    assert data[:4] == b"DCGT"
    version, max_size, complete = struct.unpack_from("<IBB", data, 4)
    assert (version, max_size, complete) == (D.VERSION, 6, 1)


def test_build_errors(tmp_path):
    with pytest.raises(D.SizeOutOfRange):
        D.build(16)
    with pytest.raises(D.BuildError) as e:
        D.build(4, path=tmp_path / "missing" / "x.dcgt")
    assert e.value.completed == 4


# -- census --------------------------------------------------------------


def test_census_examples(census12):
    assert census12[6].row() == (10, 16, 26, 2, 0, 0, 12, 38, 68)
    assert census12[8].tiny == 4
    assert (census12[10].nimber, census12[10].inf_total) == (136, 753)


def test_census_reproduces_reference(census12):
    rows = {n: r for n, r in census12.items() if n >= 2}
    assert D.compare_census(rows) == []


def test_stop_equality_reading_is_reported(census12):
    report = D.stop_equality_report(census12)
    assert report and all(m.interpreted for m in report)
    assert {m.size for m in report} >= {9, 10, 11, 12}
    assert all(m.size >= 9 for m in report)


def test_compare_census_flags_columns():
    fake = D.Census(6, 10, 16, 26, 2, 0, 0, 12, 39, 68)
    (m,) = D.compare_census({6: fake})
    assert (m.column, m.expected, m.actual, m.interpreted) == ("comb", 38, 39, True)
    fake = D.Census(6, 10, 16, 26, 2, 0, 1, 12, 38, 68)
    (m,) = D.compare_census({6: fake})
    assert m.column == "nimber" and not m.interpreted


def test_census_csv(census12):
    lines = D.census_csv(census12).splitlines()
    assert lines[0] == "size,zero,num_nonzero,num_total,updown,tiny,nimber,inf_total,comb,total"
    assert lines[-1] == "12,2074,14700,16774,764,28,3618,6484,32990,127112"


def test_classifier_combinations():
    st = GameStore()
    clf = D.Classifier(st)
    for text in ("1/2+*", "-1+^", "3+v2*", "1/4+tiny(1)", "^", "0"):
        assert clf.is_combination(parse_value(text, st)), text
    for text in ("{1|-1}", "{0|-1}", "{1/2|*}"):
        assert not clf.is_combination(parse_value(text, st)), text


def test_reference_table_is_consistent():
    for n, row in D.REFERENCE_CENSUS.items():
        r = dict(zip(D.CENSUS_COLUMNS, row))
        assert r["num_total"] == r["zero"] + r["num_nonzero"]
        assert r["inf_total"] == r["zero"] + r["updown"] + r["tiny"] + r["nimber"]
    sums = tuple(sum(row[i] for row in D.REFERENCE_CENSUS.values()) for i in range(9))
    assert sums == D.REFERENCE_GRAND_TOTAL
    assert 2 * sum(D.REFERENCE_TINIES.values()) == D.REFERENCE_GRAND_TOTAL[4]


# -- queries ---------------------------------------------------------------


def test_find_by_value(db12):
    st = db12.store
    (star2,) = list(D.find_by_value(db12, st.nimber(2), 11))
    assert star2[0].size == 11
    ups = list(D.find_by_value(db12, st.up, 6))
    downs = list(D.find_by_value(db12, st.negate(st.up), 6))
    assert len(ups) == len(downs) == 1
    assert bb_symkey(transform(ups[0][0], "rot90").bits) == bb_symkey(downs[0][0].bits)
    assert not list(D.find_by_value(db12, st.up, 5))
    nimbers = list(D.find_by_value(db12, Kind.NIMBER, 7))
    assert len(nimbers) == 13


def test_option_histogram(db12):
    hist = D.count_canonical_options(db12, 3)
    # size 3: the two straight trominoes (1 and -1) and the corner (*)
    assert hist == {1: 2, 2: 1}
    whole = D.count_canonical_options(db12)
    assert sum(whole.values()) == db12.total()
    assert whole[0] == sum(c.zero for c in D.census(db12).values())


def test_max_options(db12):
    best, found = D.max_option_positions(db12, 12)
    assert best == 8 and len(found) == 4
    assert all(len(g.left) + len(g.right) == 8 for _, g in found)


def test_tiny_frequencies(db12, census12):
    freq = D.tiny_frequencies(db12)
    assert 2 * sum(freq.values()) == sum(c.tiny for c in census12.values())


def test_temperature_sweep(db12):
    sweep = D.temperature_sweep(db12, range(1, 9))
    assert sweep.max_temperature <= 2
    assert sum(sweep.histogram.values()) == sum(db12.layers[n].count for n in range(1, 9))
