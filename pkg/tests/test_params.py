import pytest
from hypothesis import given, strategies as st

from vecmol.params import DEFAULT_PARAMS, FIELD_TO_NAME, NAME_TO_FIELD, ParamsError, ParserParams

EXPECTED_DEFAULTS = {
    "BEZIER_FLATNESS_PTS": 0.25, "RECT2LINE_LONG_RATIO": 0.85, "RECT2LINE_ANGLE_TOLERANCE": 5.0,
    "ANGLE_TOLERANCE_DEGREES": 3.0, "CLOSE_NONPARALLEL_ALPHA": 1.75, "CLOSE_CHAR_LINE_ALPHA": 1.5,
    "S-WEDGE_LENGTHS_DIFF_RATIO": 0.7, "NEG-CHARGE_Y_POSITION": 0.5, "NEG-CHARGE_LENGTH_TOLERANCE": 0.5,
    "ABS_COS_CHAR_PRUNE": 0.1, "CHAR_LINE_Z_TOLERANCE": 1.5, "MAX_ALPHA_DIST": 2.0,
}


def test_defaults_match_table():
    assert DEFAULT_PARAMS.as_dict() == EXPECTED_DEFAULTS
    assert set(NAME_TO_FIELD) == set(EXPECTED_DEFAULTS)
    assert all(NAME_TO_FIELD[FIELD_TO_NAME[f]] == f for f in FIELD_TO_NAME)


def test_round_trip_text():
    p = DEFAULT_PARAMS.with_values({"MAX_ALPHA_DIST": 2.5, "ABS_COS_CHAR_PRUNE": None})
    assert ParserParams.loads(p.dumps()) == p


def test_loads_comments_and_off():
    p = ParserParams.loads("# tuned\nMAX_ALPHA_DIST = 3\nCHAR_LINE_Z_TOLERANCE=off\n")
    assert p.max_alpha_dist == 3.0
    assert p.char_line_z_tolerance is None


@pytest.mark.parametrize("text", ["ANGLE_TOLERANCE_DEGREES=45", "ANGLE_TOLERANCE_DEGREES=0",
                                  "MAX_ALPHA_DIST=-1", "MAX_ALPHA_DIST=6", "NOT_A_PARAM=1",
                                  "MAX_ALPHA_DIST", "MAX_ALPHA_DIST=abc", "BEZIER_FLATNESS_PTS=off"])
def test_invalid_values_rejected(text):
    with pytest.raises(ParamsError):
        ParserParams.loads(text)


@given(st.floats(0.01, 5.0), st.floats(0.5, 44.0))
def test_valid_ranges_accepted(ratio, angle):
    p = DEFAULT_PARAMS.with_values({"MAX_ALPHA_DIST": ratio, "ANGLE_TOLERANCE_DEGREES": angle})
    assert ParserParams.loads(p.dumps()) == p
