import numpy as np

from tnwp.prng import Xorshift64Star

# First outputs of the documented xorshift64* recipe, computed once from an
# independent straight-from-definition implementation and frozen here.
GOLDEN = {
    0: [973819730272012410, 6108091081255984487, 12125365036566318712, 9038174178950858617],
    1: [5180492295206395165, 12380297144915551517, 13389498078930870103, 5599127315341312413],
    42: [6255019084209693600, 14430073426741505498, 14575455857230217846, 17414512882241728735],
}


def test_golden_streams():
    for seed, expected in GOLDEN.items():
        rng = Xorshift64Star(seed)
        assert [rng.next_u64() for _ in range(len(expected))] == expected


def test_zero_seed_is_remapped_not_stuck():
    rng = Xorshift64Star(0)
    values = {rng.next_u64() for _ in range(8)}
    assert 0 not in values and len(values) == 8


def test_determinism():
    a = Xorshift64Star(123).normal_array(64)
    b = Xorshift64Star(123).normal_array(64)
    assert np.array_equal(a, b)


def test_uniform_range_and_golden():
    rng = Xorshift64Star(1)
    first = [rng.uniform() for _ in range(3)]
    assert first == [0.28083505005035947, 0.6711372530266764, 0.7258461452833668]
    rng = Xorshift64Star(9)
    draws = rng.uniform_array(1000, -2.0, 3.0)
    assert np.all(draws >= -2.0) and np.all(draws < 3.0)


def test_normal_moments_are_sane():
    draws = Xorshift64Star(7).normal_array(20000)
    assert abs(float(np.mean(draws))) < 0.05
    assert abs(float(np.std(draws)) - 1.0) < 0.05
