import json

import numpy as np
import pytest

from helpers import fixture
from nonsep_sl.domain import (AsymptoticFit, AuxSpectra, BoundaryParams, Potential, SignSequence, SpectralData,
                              TwoSidedSpectrum, decode, dumps, encode, read_json, validate_boundary,
                              validate_spectral_data, write_json)
from nonsep_sl.errors import CountMismatch, DegenerateParameter, UnorderedSpectrum


def test_potential_accessors():
    q = Potential.from_function(np.sin, 201)
    assert q.n_nodes == 201
    assert q.h == pytest.approx(np.pi / 200, abs=0)
    assert q.Q == pytest.approx(1.0, abs=1e-4)
    assert q.l2_norm() == pytest.approx(np.sqrt(np.pi / 2), rel=1e-6)
    assert q(np.pi / 2) == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("vals", [[0.0, 1.0], [0.0, np.nan, 1.0], [[0.0, 1.0, 2.0]]])
def test_potential_rejects_bad_samples(vals):
    with pytest.raises(ValueError):
        Potential(np.array(vals))


def test_potential_is_immutable():
    q = Potential.zero(11)
    with pytest.raises(ValueError):
        q.values[0] = 1.0


def test_validate_boundary():
    assert validate_boundary(BoundaryParams(1, 0, 0, 0.5)) == BoundaryParams(1, 0, 0, 0.5)
    with pytest.raises(DegenerateParameter):
        validate_boundary(BoundaryParams(0, 1, 0, 0.5))
    with pytest.raises(DegenerateParameter):
        validate_boundary(BoundaryParams(1, 0, 0, 0))
    with pytest.raises(DegenerateParameter):
        validate_boundary(BoundaryParams(1, np.inf, 0, 0.5))


def test_validate_spectral_data_accepts_forward_output():
    data = fixture("A", 64)[2].data
    assert validate_spectral_data(data) is data


def test_validate_spectral_data_rejects_swap():
    data = fixture("A", 64)[2].data
    pos = data.mu.mu_pos.copy()
    pos[[0, 1]] = pos[[1, 0]]
    mu = TwoSidedSpectrum(data.mu.mu_neg0, data.mu.mu_pos0, pos, data.mu.mu_neg)
    with pytest.raises(UnorderedSpectrum):
        validate_spectral_data(SpectralData(mu, data.sigma))


def test_validate_spectral_data_count_rule():
    k = np.arange(1, 51, dtype=float)
    mu = TwoSidedSpectrum(-0.5, 0.5, k + 0.25, -k + 0.25)
    with pytest.raises(CountMismatch):
        validate_spectral_data(SpectralData(mu, SignSequence(np.ones(10, dtype=int))))


def test_two_sided_layout():
    mu = TwoSidedSpectrum.from_flat([-2.1, -1.2, -0.3, 0.4, 1.1, 2.2])
    assert mu.K == 2
    assert mu.mu_neg0 == -0.3 and mu.mu_pos0 == 0.4
    np.testing.assert_array_equal(mu.mu_neg, [-1.2, -2.1])
    np.testing.assert_array_equal(mu.flattened(), [-2.1, -1.2, -0.3, 0.4, 1.1, 2.2])
    np.testing.assert_array_equal(mu.indices(), [-2, -1, 1, 2])
    with pytest.raises(CountMismatch):
        TwoSidedSpectrum(-0.3, 0.4, [1.0, 2.0], [-1.0])


def test_complex_central_pair_json():
    mu = fixture("A", 64)[2].data.mu
    assert not mu.central_is_real
    d = json.loads(encode(mu))
    assert set(d["mu_pos0"]) == {"re", "im"}
    assert decode(encode(mu), TwoSidedSpectrum) == mu


def test_sign_sequence_entries():
    with pytest.raises(ValueError):
        SignSequence([1, 2])


def test_json_round_trip_files(tmp_path):
    fr = fixture("sin", 64)[2]
    objs = [Potential.from_function(np.sin, 33), BoundaryParams(1, 0.5, 0.3, 0.7), fr.data, fr.aux,
            AsymptoticFit(-0.25, 0.7, 0.1, float("nan"), np.arange(4.0), (8, 16), (1.0, 2.0))]
    for obj in objs:
        path = tmp_path / f"{type(obj).__name__}.json"
        write_json(path, obj)
        assert read_json(path, type(obj)) == obj


def test_dumps_format():
    assert dumps(0.1) == "0.10000000000000001"
    assert dumps(float("nan")) == "null"
    assert dumps(1 + 2j) == '{"re": 1, "im": 2}'
    assert dumps({"a": [1, 2.5]}) == '{"a": [1, 2.5]}'
    with pytest.raises(ValueError):
        dumps(float("inf"))


def test_aux_round_trip():
    aux = AuxSpectra([0.5, 1.5], [1.0, 2.0], [0.5, 1.5])
    assert decode(encode(aux), AuxSpectra) == aux
