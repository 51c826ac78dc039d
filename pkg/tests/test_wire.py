import io

import pytest

from sathub import wire


def roundtrip(data: bytes):
    return wire.read_message(io.BytesIO(data))


def test_add_clause_golden_bytes():
    encoded = wire.encode_add_clause([1, -2])
    assert encoded == bytes.fromhex("02" "02000000" "01000000" "FEFFFFFF")
    assert roundtrip(encoded) == (wire.ADD_CLAUSE, [1, -2])


def test_add_variable_golden():
    assert wire.encode_add_variable() == b"\x01"
    assert roundtrip(b"\x01") == (wire.ADD_VARIABLE, None)


def test_lock_unlock_snapshot_request_golden():
    assert wire.encode_lock_vars() == b"\x03"
    assert wire.encode_unlock_vars() == b"\x05"
    assert wire.encode_snapshot_request() == b"\x06"
    assert roundtrip(b"\x03") == (wire.LOCK_VARS, None)
    assert roundtrip(b"\x05") == (wire.UNLOCK_VARS, None)
    assert roundtrip(b"\x06") == (wire.SNAPSHOT_REQUEST, None)


def test_add_vars_golden():
    encoded = wire.encode_add_vars(4)
    assert encoded == bytes.fromhex("04" "04000000")
    assert roundtrip(encoded) == (wire.ADD_VARS, 4)


def test_var_index_golden():
    encoded = wire.encode_var_index(9)
    assert encoded == bytes.fromhex("81" "09000000")
    assert roundtrip(encoded) == (wire.VAR_INDEX, 9)


def test_lock_granted_golden():
    assert wire.encode_lock_granted() == b"\x83"
    assert roundtrip(b"\x83") == (wire.LOCK_GRANTED, None)


def test_first_index_golden():
    encoded = wire.encode_first_index(5)
    assert encoded == bytes.fromhex("84" "05000000")
    assert roundtrip(encoded) == (wire.FIRST_INDEX, 5)


def test_snapshot_golden():
    encoded = wire.encode_snapshot(3, [[1, -2]])
    assert encoded == bytes.fromhex(
        "86" "03000000" "01000000" "02000000" "01000000" "FEFFFFFF"
    )
    assert roundtrip(encoded) == (wire.SNAPSHOT, (3, [[1, -2]]))


def test_snapshot_empty():
    encoded = wire.encode_snapshot(0, [])
    assert encoded == bytes.fromhex("86" "00000000" "00000000")
    assert roundtrip(encoded) == (wire.SNAPSHOT, (0, []))


def test_error_golden():
    encoded = wire.encode_error(wire.ERR_LOCKED, "locked")
    assert encoded == bytes.fromhex("7F" "0100" "0600") + b"locked"
    assert roundtrip(encoded) == (wire.ERROR, (1, "locked"))


def test_error_codes():
    assert wire.ERR_LOCKED == 1
    assert wire.ERR_MALFORMED == 2
    assert wire.ERR_OUT_OF_RANGE == 3


def test_unknown_opcode_rejected():
    with pytest.raises(wire.MalformedFrame):
        roundtrip(b"\x42")


def test_truncated_frame_rejected():
    with pytest.raises(wire.MalformedFrame):
        roundtrip(bytes.fromhex("02" "0200"))
    with pytest.raises(wire.MalformedFrame):
        roundtrip(bytes.fromhex("02" "02000000" "01000000"))


def test_clean_close_between_messages():
    with pytest.raises(wire.ConnectionClosed):
        roundtrip(b"")


def test_absurd_count_rejected():
    with pytest.raises(wire.MalformedFrame):
        roundtrip(bytes.fromhex("02" "FFFFFFFF"))


def test_multi_message_stream():
    stream = io.BytesIO(
        wire.encode_add_vars(2) + wire.encode_add_clause([3, -1]) + wire.encode_unlock_vars()
    )
    assert wire.read_message(stream) == (wire.ADD_VARS, 2)
    assert wire.read_message(stream) == (wire.ADD_CLAUSE, [3, -1])
    assert wire.read_message(stream) == (wire.UNLOCK_VARS, None)
    with pytest.raises(wire.ConnectionClosed):
        wire.read_message(stream)
