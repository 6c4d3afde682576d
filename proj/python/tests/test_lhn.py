import json

import pytest

import lhn


@pytest.fixture(scope="module")
def cyclic_keys():
    params = lhn.gen_params("explicit", G=[8, 4], H=[8, 4, 2], K=[2, 2], seed=3)
    return lhn.keygen(params, seed=4)


def test_round_trip(cyclic_keys):
    pub, sec = cyclic_keys
    assert pub["schema"] == "lhn.public_key"
    for seed in range(20):
        bit = seed & 1
        ct = lhn.encrypt(pub, bit, seed=seed)
        assert lhn.decrypt(pub, sec, ct) == bit


def test_homomorphic_fold(cyclic_keys):
    pub, sec = cyclic_keys
    bits = [1, 0, 1, 1, 0, 1, 1]
    cts = [lhn.encrypt(pub, b, seed=100 + i) for i, b in enumerate(bits)]
    assert lhn.decrypt(pub, sec, lhn.add(pub, *cts)) == sum(bits) % 2


def test_seed_is_deterministic():
    a = lhn.gen_params("c2m", m=4, bits=16, seed=9)
    b = lhn.gen_params("c2m", m=4, bits=16, seed=9)
    assert a == b
    assert lhn.keygen(a, seed=1) == lhn.keygen(b, seed=1)


def test_attack_recovers_bit():
    pub, _ = lhn.keygen(lhn.gen_params("cyclic64", seed=5), seed=6)
    for bit in (0, 1):
        ct = lhn.encrypt(pub, bit, seed=10 + bit)
        report, code = lhn.attack(pub, ct, truth=bit)
        assert code == 0
        assert report["bit"] == bit and report["success"] is True
        assert report["total_ops"] == sum(s["ops"] for s in report["stages"])


def test_attack_budget_and_refusal():
    pub, _ = lhn.keygen(lhn.gen_params("c2m", m=16, bits=18, seed=5), seed=6)
    ct = lhn.encrypt(pub, 1, seed=1)
    report, code = lhn.attack(pub, ct, budget=500)
    assert code == 6
    assert report["error"]["kind"] == "budget" and report["bit"] is None
    report, code = lhn.attack(pub, ct, strategy="kernel")
    assert code == 7


def test_solvable_preset():
    pub, sec = lhn.keygen(lhn.gen_params("s3", seed=2), seed=3)
    ct = lhn.encrypt(pub, 1, seed=4)
    assert lhn.decrypt(pub, sec, ct) == 1
    report, code = lhn.attack(pub, ct, truth=1)
    assert code == 0 and report["strategy"] == "solvable"


def test_errors(cyclic_keys):
    pub, sec = cyclic_keys
    with pytest.raises(lhn.SchemaError):
        lhn.decrypt(pub, sec, "{ not json")
    with pytest.raises(lhn.SchemaError):
        lhn.encrypt(pub, 2)
    s3_pub, _ = lhn.keygen(lhn.gen_params("s3", seed=2), seed=3)
    with pytest.raises(lhn.BackendMismatch):
        lhn.decrypt(pub, sec, lhn.encrypt(s3_pub, 0))
    with pytest.raises(lhn.KeygenError):
        lhn.keygen(lhn.gen_params("explicit", G=[3], H=[2], K=[2]))


def test_bench_and_cli():
    res = lhn.bench_edlp(4, 8, trials=2, seed=1)
    assert [r["m"] for r in res["rows"]] == [4, 6, 8]
    assert len(res["ratios"]) == 2
    code, out, _ = lhn.run("bench-edlp", "--m-range", "4:6", "--trials", "1", "--json")
    assert code == 0 and json.loads(out)["schema"] == "lhn.bench_edlp"
    code, _, err = lhn.run("frobnicate")
    assert code == 2
