import json

import numpy as np
import pytest

from bosonic_dilation.channels import amplifier, binary_displacement, bk_noise_channel
from bosonic_dilation.char_fn import (
    Cosine,
    DisplacementMixture,
    GaussianKernel,
    One,
    Product,
    PullBack,
)
from bosonic_dilation.dilation import approx_fixed_unitary, approx_var_unitary, exact_dilation
from bosonic_dilation.errors import SpecError
from bosonic_dilation.fock import coherent_fock
from bosonic_dilation.io import (
    channel_from_json,
    channel_to_json,
    charfn_from_json,
    charfn_to_json,
    dilation_from_json,
    dilation_to_json,
    dumps,
    fock_from_json,
    fock_to_json,
    is_dilation_spec,
    read_json,
)


def _through_text(obj):
    return json.loads(dumps(obj))


@pytest.mark.parametrize("f", [
    One(2),
    GaussianKernel(np.diag([1.0, 2.0]), np.array([0.1, -0.2])),
    Cosine(np.array([1.0, 0.5])),
    DisplacementMixture(np.array([0.25, 0.75]), np.array([[0.0, 0.0], [1.0, 0.0]])),
    Product((Cosine(np.array([1.0, 0.0])), GaussianKernel(0.3 * np.eye(2)))),
    PullBack(GaussianKernel(np.eye(2)), np.array([[1.0, 0.5], [0.0, 2.0]])),
])
def test_charfn_round_trip(f, rng):
    g = charfn_from_json(_through_text(charfn_to_json(f)))
    pts = rng.normal(size=(10, 2))
    np.testing.assert_allclose(g(pts), f(pts), atol=1e-15)


def test_channel_round_trip(rng):
    ch = binary_displacement([1.0, 0.0])
    back = channel_from_json(_through_text(channel_to_json(ch)))
    np.testing.assert_array_equal(back.X, ch.X)
    pts = rng.normal(size=(10, 2))
    np.testing.assert_allclose(back.f(pts), ch.f(pts))


@pytest.mark.parametrize("d", [
    exact_dilation(amplifier(2.0)),
    approx_var_unitary(binary_displacement([1.0, 0.0]), 0.1),
    approx_fixed_unitary(amplifier(1.5, 2), 0.05),
])
def test_dilation_round_trip(d, rng):
    back = dilation_from_json(_through_text(dilation_to_json(d)))
    assert (back.n, back.m) == (d.n, d.m)
    np.testing.assert_array_equal(back.Y, d.Y)
    np.testing.assert_array_equal(back.S, d.S)
    pts = rng.normal(size=(5, 2 * d.m))
    np.testing.assert_allclose(back.ancilla(pts), d.ancilla(pts))
    assert back.provenance == d.provenance


def test_fock_round_trip():
    rho = coherent_fock([0.2, 0.3], 6)
    back = fock_from_json(_through_text(fock_to_json(rho)))
    np.testing.assert_array_equal(back.matrix, rho.matrix)


@pytest.mark.parametrize("data, n", [
    ({"preset": "binary_displacement", "s": [1, 0]}, 1),
    ({"preset": "amplifier", "gain": 2.0, "n": 2}, 2),
    ({"preset": "bk", "sigma": 0.1}, 1),
    ({"preset": "attenuator", "eta": 0.5}, 1),
    ({"preset": "identity", "n": 2}, 2),
    ({"preset": "additive_noise", "N": [[0.5, 0], [0, 0.5]]}, 1),
])
def test_presets(data, n):
    assert channel_from_json(data).n == n


def test_bk_preset_matches_constructor(rng):
    pts = rng.normal(size=(8, 2))
    np.testing.assert_allclose(channel_from_json({"preset": "bk", "sigma": 0.2}).f(pts),
                               bk_noise_channel(0.2).f(pts))


@pytest.mark.parametrize("data", [
    {"preset": "warp_drive"},
    {"preset": "amplifier"},
    {"n": 1, "X": [[1, 0], [0, 1]]},
    {"n": 1, "X": [[1, 0, 0]], "f": {"kind": "one"}},
    {"n": 1, "X": [[1, "a"], [0, 1]], "f": {"kind": "one"}},
    {"n": 1, "X": [[1, 0], [0, float("nan")]], "f": {"kind": "one"}},
    {"n": 1, "X": [[1, 0], [0, 1]], "f": {"kind": "tachyon"}},
    [1, 2, 3],
])
def test_bad_channel_specs(data):
    with pytest.raises(SpecError):
        channel_from_json(data)


def test_bad_dilation_spec():
    with pytest.raises(SpecError):
        dilation_from_json({"n": 1, "m": 1, "X": [[1, 0], [0, 1]]})


def test_is_dilation_spec():
    assert is_dilation_spec(dilation_to_json(exact_dilation(amplifier(2.0))))
    assert not is_dilation_spec({"preset": "identity"})


def test_read_json_errors(tmp_path):
    with pytest.raises(SpecError):
        read_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 1, "X": [[1, 0]')
    with pytest.raises(SpecError):
        read_json(bad)


def test_dumps_is_deterministic():
    obj = {"b": np.float64(1.5), "a": np.arange(3), "c": np.bool_(True), "z": 1 + 2j}
    assert dumps(obj) == dumps(dict(reversed(list(obj.items()))))
    assert json.loads(dumps(obj)) == {"a": [0, 1, 2], "b": 1.5, "c": True, "z": {"re": 1.0, "im": 2.0}}
