"""CLI: subcommands, exit-code contract, determinism, cache transparency."""

import json
import os
import subprocess
import sys


CMD = [sys.executable, "-m", "nfkit"]


def run(*args, env_extra=None):
    env = dict(os.environ)
    env.pop("NFKIT_CACHE", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        CMD + list(args), capture_output=True, text=True, env=env, timeout=600
    )


def json_lines(stdout):
    return [json.loads(line) for line in stdout.splitlines() if line.strip()]


def without_meta(stdout):
    return [l for l in stdout.splitlines() if json.loads(l).get("kind") != "meta"]


def test_family_synth_word_1():
    r = run("family", "synth", "--word", "1")
    assert r.returncode == 0
    out = json_lines(r.stdout)[0]
    assert (out["alpha"], out["beta"], out["gamma"]) == ("1", "2", "0")


def test_family_synth_word_22():
    r = run("family", "synth", "--word", "2,2")
    assert r.returncode == 0
    out = json_lines(r.stdout)[0]
    assert (out["alpha"], out["beta"], out["gamma"]) == ("25", "14", "2")


def test_family_synth_inadmissible_exit2_names_parity():
    r = run("family", "synth", "--word", "1,2,1")
    assert r.returncode == 2
    assert "q_t-1=4" in r.stderr and "3" in r.stderr


def test_family_sweep():
    r = run("family", "sweep", "--word", "1", "--n", "1..5", "--mod4", "3", "--json")
    assert r.returncode == 0
    lines = json_lines(r.stdout)
    members = [l for l in lines if l["kind"] == "member"]
    assert [m["d"] for m in members] == ["15", "35", "63", "99", "143"]


def test_pell_unit():
    r = run("pell", "unit", "--d", "41")
    assert r.returncode == 0
    out = json_lines(r.stdout)[0]
    assert (out["x"], out["y"], out["norm"]) == ("32", "5", "-1")


def test_pell_norm():
    r = run("pell", "norm", "--d", "15", "--N=-11")
    assert r.returncode == 0
    out = json_lines(r.stdout)[0]
    assert ["2", "1"] in out["solutions"]
    r = run("pell", "norm", "--d", "15", "--N=17", "--method", "small")
    assert r.returncode == 2  # 17^2 >= 15


def test_pell_scan_reports_control_case():
    r = run("pell", "scan", "--word", "1", "--mod4", "3", "--p", "11", "--n", "1..1", "--json")
    assert r.returncode == 0
    lines = json_lines(r.stdout)
    findings = [l for l in lines if l["kind"] == "finding"]
    assert any(
        (f["n"], f["sign"], f["x"], f["y"], f["N"]) == ("1", "-1", "2", "1", "-11")
        for f in findings
    )
    summary = next(l for l in lines if l["kind"] == "summary")
    assert summary["unsolvable_everywhere"] is False


def test_class_h():
    r = run("class", "h", "--d", "79", "--method", "both")
    out = json_lines(r.stdout)[0]
    assert r.returncode == 0 and out["h"] == "3" and out["methods_agree"] is True
    r = run("class", "h", "--d", "12")
    assert r.returncode == 2
    r = run("class", "h", "--d", "3", "--method", "forms")
    assert json_lines(r.stdout)[0]["h"] == "1"


def test_class_cert():
    r = run("class", "cert", "--d", "399")
    out = json_lines(r.stdout)[0]
    assert r.returncode == 0 and out["p"] == "5" and out["h"] == "8"
    r = run("class", "cert", "--d", "7")  # h = 1: an honest finding
    assert r.returncode == 3
    assert json_lines(r.stdout)[0]["failed_step"] == "class_number"
    r = run("class", "cert", "--d", "5")
    assert r.returncode == 2


def test_cyclo_minus():
    r = run("cyclo", "minus", "--m", "23")
    out = json_lines(r.stdout)[0]
    assert r.returncode == 0
    assert (out["h_minus"], out["Q"], out["w"], out["odd_character_count"]) == (
        "3", "1", "46", "11")
    assert run("cyclo", "minus", "--m", "6").returncode == 2
    r = run("cyclo", "minus", "--m", "4")
    assert json_lines(r.stdout)[0]["h_minus"] == "1"


def test_verify_paper_sweep():
    r = run("verify", "paper", "--word", "1", "--n", "1..10", "--p-limit", "50",
            "--jobs", "1", "--json")
    assert r.returncode == 0
    lines = json_lines(r.stdout)
    passed = [l["d"] for l in lines if l["kind"] == "member" and l["pass"]]
    assert passed == ["15", "35", "143", "195", "255", "323", "399", "483"]
    skipped = [l["d"] for l in lines if l["kind"] == "member" and l["pass"] is None]
    assert skipped == ["63", "99"]
    summary = next(l for l in lines if l["kind"] == "summary")
    assert summary["all_pass"] is True


def test_verify_paper_empty_range():
    r = run("verify", "paper", "--word", "1", "--n", "0..0", "--json")
    assert r.returncode == 0
    lines = json_lines(r.stdout)
    assert not [l for l in lines if l["kind"] == "member"]


def test_verify_paper_inadmissible_exit2():
    r = run("verify", "paper", "--word", "1,2,1", "--n", "1..5")
    assert r.returncode == 2


def test_verify_paper_no_slice_exit2():
    r = run("verify", "paper", "--word", "2", "--n", "1..5")
    assert r.returncode == 2
    assert "slice" in r.stderr


def test_verify_theorem11_case1():
    r = run("verify", "theorem11", "--case", "1", "--p", "5", "--n", "1..5",
            "--jobs", "1", "--json")
    assert r.returncode == 0
    lines = json_lines(r.stdout)
    by_n = {l["n"]: l for l in lines if l["kind"] == "member"}
    assert by_n["1"]["pass"] is None and by_n["1"]["skipped"] == "not squarefree"
    assert by_n["2"]["d"] == "399" and by_n["2"]["pass"] is True


def test_verify_theorem11_bad_prime_exit2():
    r = run("verify", "theorem11", "--case", "3", "--p", "6", "--n", "1..2")
    assert r.returncode == 2
    assert "not prime" in r.stderr


def test_verify_theorem11_congruence_validation():
    assert run("verify", "theorem11", "--case", "1", "--p", "7", "--n", "1..2").returncode == 2
    assert run("verify", "theorem11", "--case", "4", "--p", "3", "--n", "1..2").returncode == 2


def test_determinism_excluding_meta():
    a = run("verify", "paper", "--word", "1", "--n", "1..6", "--json")
    b = run("verify", "paper", "--word", "1", "--n", "1..6", "--json")
    assert without_meta(a.stdout) == without_meta(b.stdout)


def test_jobs_do_not_change_output():
    a = run("verify", "paper", "--word", "1", "--n", "1..8", "--jobs", "1", "--json")
    b = run("verify", "paper", "--word", "1", "--n", "1..8", "--jobs", "4", "--json")
    assert without_meta(a.stdout) == without_meta(b.stdout)


def test_cache_transparency_and_verify(tmp_path):
    cache = tmp_path / "cache.jsonl"
    args = ("verify", "paper", "--word", "1", "--n", "1..6", "--jobs", "1", "--json")
    fresh = run(*args)
    first = run(*args, "--cache", str(cache))
    assert cache.exists() and cache.stat().st_size > 0
    second = run(*args, "--cache", str(cache), "--verify-cache")
    assert second.returncode == 0
    assert without_meta(fresh.stdout) == without_meta(first.stdout) == without_meta(second.stdout)


def test_verify_cache_detects_tampering(tmp_path):
    cache = tmp_path / "cache.jsonl"
    args = ("verify", "paper", "--word", "1", "--n", "1..6", "--jobs", "1", "--json")
    run(*args, "--cache", str(cache))
    rows = [json.loads(l) for l in cache.read_text().splitlines()]
    # key for k=4 is in the deterministic verification sample; corrupt its record
    victim = next(r for r in rows if r["key"].endswith(":(1,)-2-1-4-50"))
    victim["value"]["d"] = "999999"
    cache.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    r = run(*args, "--cache", str(cache), "--verify-cache")
    assert r.returncode == 4


def test_cache_env_var(tmp_path):
    cache = tmp_path / "envcache.jsonl"
    r = run("verify", "paper", "--word", "1", "--n", "1..4", "--json",
            env_extra={"NFKIT_CACHE": str(cache)})
    assert r.returncode == 0
    assert cache.exists()


def test_sweep_certificates_revalidate_from_serialized_form():
    from nfkit import quadclass

    r = run("verify", "paper", "--word", "1", "--n", "1..4", "--json")
    for line in json_lines(r.stdout):
        if line.get("kind") == "member" and line.get("certificate", {}).get("ok"):
            assert quadclass.revalidate_certificate(line["certificate"]["record"])


def test_numbers_are_decimal_strings():
    r = run("verify", "paper", "--word", "1", "--n", "1..4", "--json")

    def walk(node):
        if isinstance(node, dict):
            for v in node.values():
                walk(v)
        elif isinstance(node, list):
            for v in node:
                walk(v)
        else:
            assert node is None or isinstance(node, (str, bool)), node

    for line in json_lines(r.stdout):
        walk(line)
