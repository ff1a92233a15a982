from __future__ import annotations

import io
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from embedding_atlas.ingest import (
    ParseError,
    PointRecord,
    infer_bounds,
    parse_points,
    point_to_json,
)


def _parse(text: str, **kwargs) -> list[PointRecord]:
    return list(parse_points(io.StringIO(text), **kwargs))


class TestParsePoints:
    def test_full_record(self):
        records = _parse('{"x":1.0,"y":2.0,"t":"dog photo"}\n')
        assert records == [PointRecord(1.0, 2.0, text="dog photo")]

    def test_optional_fields_absent(self):
        records = _parse('{"x":0,"y":0}\n')
        assert records == [PointRecord(0.0, 0.0)]
        assert records[0].text is None and records[0].time is None and records[0].group is None

    def test_time_and_group(self):
        records = _parse('{"x":1,"y":2,"time":"1997","g":"prompt"}\n')
        assert records[0].time == "1997"
        assert records[0].group == "prompt"

    def test_unknown_keys_ignored(self):
        records = _parse('{"x":1,"y":2,"meta":{"a":1},"id":7}\n')
        assert records == [PointRecord(1.0, 2.0)]

    def test_blank_lines_skipped(self):
        assert len(_parse('{"x":0,"y":0}\n\n{"x":1,"y":1}\n')) == 2

    def test_lenient_malformed_middle_line(self):
        diags = []
        text = '{"x":0,"y":0}\n{"x":0,"y":\n{"x":1,"y":1}\n'
        records = _parse(text, diagnostics=diags)
        assert len(records) == 2
        assert len(diags) == 1
        assert diags[0].line == 2
        assert diags[0].offset == len('{"x":0,"y":0}\n'.encode())

    def test_strict_malformed_aborts(self):
        with pytest.raises(ParseError) as exc:
            _parse('{"x":0,"y":0}\nnot json\n', strict=True)
        assert exc.value.line == 2

    def test_non_finite_rejected(self):
        diags = []
        records = _parse('{"x":1,"y":2}\n{"x":NaN,"y":0}\n', diagnostics=diags)
        assert len(records) == 1
        assert len(diags) == 1
        with pytest.raises(ParseError):
            _parse('{"x":Infinity,"y":0}\n', strict=True)

    def test_missing_coordinate(self):
        with pytest.raises(ParseError, match="missing required key"):
            _parse('{"x":1}\n', strict=True)

    def test_non_object_line(self):
        with pytest.raises(ParseError, match="object"):
            _parse("[1,2]\n", strict=True)

    def test_order_preserved(self):
        text = "".join(json.dumps({"x": i, "y": 0}) + "\n" for i in range(50))
        records = _parse(text)
        assert [r.x for r in records] == list(map(float, range(50)))

    def test_streaming_is_lazy(self):
        consumed = []

        def lines():
            for i in range(1000):
                consumed.append(i)
                yield json.dumps({"x": i, "y": 0}) + "\n"

        it = parse_points(lines())
        first = next(it)
        assert first.x == 0.0
        assert len(consumed) < 10

    def test_custom_keys(self):
        records = _parse(
            '{"x":1,"y":2,"body":"hi","year":"2001","kind":"img"}\n',
            text_key="body",
            time_key="year",
            group_key="kind",
        )
        assert records[0] == PointRecord(1.0, 2.0, text="hi", time="2001", group="img")


point_strategy = st.builds(
    PointRecord,
    x=st.floats(allow_nan=False, allow_infinity=False, width=64),
    y=st.floats(allow_nan=False, allow_infinity=False, width=64),
    text=st.one_of(st.none(), st.text(max_size=40)),
    time=st.one_of(st.none(), st.text(min_size=1, max_size=10)),
    group=st.one_of(st.none(), st.text(min_size=1, max_size=10)),
)


@given(st.lists(point_strategy, max_size=20))
def test_ndjson_round_trip(points):
    text = "".join(point_to_json(p) + "\n" for p in points)
    assert _parse(text) == points


class TestInferBounds:
    def test_unit_square_corners(self):
        b = infer_bounds([PointRecord(0, 0), PointRecord(1, 1)], pad_fraction=0.0)
        assert (b.cx, b.cy, b.side) == (0.5, 0.5, 1.0)

    def test_max_extent_wins(self):
        b = infer_bounds([PointRecord(0, 0), PointRecord(4, 1)], pad_fraction=0.0)
        assert (b.cx, b.cy, b.side) == (2.0, 0.5, 4.0)

    def test_padding(self):
        b = infer_bounds([PointRecord(0, 0), PointRecord(1, 1)], pad_fraction=0.1)
        assert b.side == pytest.approx(1.1, abs=1e-15)

    def test_empty_input(self):
        with pytest.raises(ValueError, match="no points"):
            infer_bounds([])

    def test_negative_pad(self):
        with pytest.raises(ValueError):
            infer_bounds([PointRecord(0, 0)], pad_fraction=-0.5)

    def test_degenerate_extent_gets_positive_side(self):
        b = infer_bounds([PointRecord(2, 3), PointRecord(2, 3)])
        assert b.side > 0

    @given(
        st.lists(
            st.builds(
                PointRecord,
                x=st.floats(-1e9, 1e9),
                y=st.floats(-1e9, 1e9),
            ),
            min_size=1,
            max_size=30,
        )
    )
    def test_all_points_contained(self, points):
        # containment up to the same relative slack tile assignment allows
        b = infer_bounds(points)
        slack = 1e-12 * b.side
        for p in points:
            assert b.xmin - slack <= p.x <= b.xmax + slack
            assert b.ymin - slack <= p.y <= b.ymax + slack
