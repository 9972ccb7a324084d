use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

fn pgb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pgb")).args(args).output().expect("spawn pgb")
}

fn ok(args: &[&str]) -> String {
    let out = pgb(args);
    assert!(out.status.success(), "pgb {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn shard(dir: &Path, node: usize) -> PathBuf {
    dir.join(format!("shard-{node:05}.pgb"))
}

fn write_random(dir: &Path, len: usize, seed: u64) -> (PathBuf, Vec<u8>) {
    let mut data = vec![0u8; len];
    ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut data);
    let path = dir.join("input.bin");
    fs::write(&path, &data).unwrap();
    (path, data)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn repair_c8_6_1_3_reports_five_symbols() {
    let tmp = TempDir::new().unwrap();
    let (input, _) = write_random(tmp.path(), 4000, 1);
    let shards = tmp.path().join("shards");
    ok(&["encode", "--design", "1", "-n", "8", "-k", "6", "-s", "1", "--kprime", "3", "--in", s(&input), "--out-dir", s(&shards)]);
    let original = fs::read(shard(&shards, 1)).unwrap();
    fs::remove_file(shard(&shards, 1)).unwrap();
    let report: Value = serde_json::from_str(&ok(&["repair", "--node", "1", "--in-dir", s(&shards), "--report", "json"])).unwrap();
    assert_eq!(fs::read(shard(&shards, 1)).unwrap(), original);
    assert_eq!(report["node"], 1);
    assert_eq!(report["bandwidth_symbols"], 5);
    let reads = report["reads"].as_array().unwrap();
    let stripes = 4000usize.div_ceil(9 * 2);
    assert_eq!(reads.len(), 5 * stripes);
    assert!(reads.iter().all(|c| c["node"] != 1));
}

#[test]
fn recover_2_4_6_then_decode() {
    let tmp = TempDir::new().unwrap();
    let (input, data) = write_random(tmp.path(), 12345, 2);
    let shards = tmp.path().join("shards");
    ok(&["encode", "--design", "2", "-n", "7", "-k", "5", "-s", "2", "--in", s(&input), "--out-dir", s(&shards)]);
    let before: Vec<_> = [2, 4, 6].iter().map(|&f| fs::read(shard(&shards, f)).unwrap()).collect();
    for f in [2, 4, 6] {
        fs::remove_file(shard(&shards, f)).unwrap();
    }
    // decode works straight away by recovering in memory
    let out = tmp.path().join("early.bin");
    ok(&["decode", "--in-dir", s(&shards), "--out", s(&out)]);
    assert_eq!(fs::read(&out).unwrap(), data);

    ok(&["recover", "--nodes", "2,4,6", "--in-dir", s(&shards)]);
    for (i, f) in [2, 4, 6].iter().enumerate() {
        assert_eq!(fs::read(shard(&shards, *f)).unwrap(), before[i]);
    }
    let out = tmp.path().join("out.bin");
    ok(&["decode", "--in-dir", s(&shards), "--out", s(&out)]);
    assert_eq!(fs::read(&out).unwrap(), data);
}

#[test]
fn zero_length_input() {
    let tmp = TempDir::new().unwrap();
    let (input, _) = write_random(tmp.path(), 0, 3);
    let shards = tmp.path().join("shards");
    let summary: Value = serde_json::from_str(&ok(&[
        "encode", "--design", "2", "-n", "7", "-k", "5", "-s", "2", "--in", s(&input), "--out-dir", s(&shards),
    ]))
    .unwrap();
    assert_eq!(summary["stripes"], 0);
    assert_eq!(fs::read_dir(&shards).unwrap().count(), 7);
    let header = fs::read(shard(&shards, 3)).unwrap();
    assert_eq!(header.len(), 33);
    assert_eq!(&header[25..33], &[0u8; 8]);
    let out = tmp.path().join("out.bin");
    ok(&["decode", "--in-dir", s(&shards), "--out", s(&out)]);
    assert!(fs::read(&out).unwrap().is_empty());
    ok(&["repair", "--node", "3", "--in-dir", s(&shards)]);
    assert_eq!(fs::read(shard(&shards, 3)).unwrap(), header);
}

#[test]
fn wide_symbols_and_odd_lengths() {
    let tmp = TempDir::new().unwrap();
    let shards = tmp.path().join("shards");
    for len in [1usize, 37, 1001] {
        let (input, data) = write_random(tmp.path(), len, len as u64);
        let _ = fs::remove_dir_all(&shards);
        ok(&["encode", "--design", "1", "-n", "12", "-k", "8", "-s", "2", "--kprime", "5", "-w", "16", "--in", s(&input), "--out-dir", s(&shards)]);
        let before = fs::read(shard(&shards, 9)).unwrap();
        fs::remove_file(shard(&shards, 9)).unwrap();
        ok(&["repair", "--node", "9", "--in-dir", s(&shards)]);
        assert_eq!(fs::read(shard(&shards, 9)).unwrap(), before);
        for f in [1, 5, 12] {
            fs::remove_file(shard(&shards, f)).unwrap();
        }
        let out = tmp.path().join("out.bin");
        ok(&["decode", "--in-dir", s(&shards), "--out", s(&out)]);
        assert_eq!(fs::read(&out).unwrap(), data);
    }
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let (input, _) = write_random(tmp.path(), 500, 4);
    let shards = tmp.path().join("shards");

    let out = pgb(&["encode", "--design", "1", "-n", "8", "-k", "6", "-s", "4", "--kprime", "3", "--in", s(&input), "--out-dir", s(&shards)]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "parameter");
    assert!(err["message"].as_str().unwrap().contains("s + 2 <= h + r"));

    ok(&["encode", "--design", "2", "-n", "7", "-k", "3", "-s", "2", "--in", s(&input), "--out-dir", s(&shards)]);
    // k = 3 is not above (s - 1)(r + 1) + 1 = 6, so five failures are out of reach
    let out = pgb(&["recover", "--nodes", "1,2,3,4,5", "--in-dir", s(&shards)]);
    assert_eq!(out.status.code(), Some(4));

    let mut bytes = fs::read(shard(&shards, 2)).unwrap();
    bytes[0] = b'Q';
    fs::write(shard(&shards, 2), &bytes).unwrap();
    let out = pgb(&["decode", "--in-dir", s(&shards), "--out", s(&tmp.path().join("x"))]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["message"].as_str().unwrap().contains("corrupt header"));
    // the damaged shard is the one being rebuilt, so repair ignores it
    ok(&["repair", "--node", "2", "--in-dir", s(&shards)]);

    let mut bytes = fs::read(shard(&shards, 5)).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 0x5a;
    fs::write(shard(&shards, 5), &bytes).unwrap();
    let out = pgb(&["decode", "--in-dir", s(&shards), "--out", s(&tmp.path().join("x"))]);
    assert_eq!(out.status.code(), Some(3));

    let out = pgb(&["verify", "--design", "1", "-n", "11", "-k", "5", "-s", "1", "--kprime", "5", "-w", "8", "--family", "literal"]);
    assert_eq!(out.status.code(), Some(3));
    let out = pgb(&["verify", "--design", "1", "-n", "11", "-k", "5", "-s", "1", "--kprime", "5"]);
    assert!(out.status.success());
    let out = pgb(&["encode", "--design", "3", "-n", "7", "-k", "5", "-s", "2", "--in", s(&input), "--out-dir", s(&shards)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mixed_shard_sets_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let (input, _) = write_random(tmp.path(), 300, 5);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    ok(&["encode", "--design", "2", "-n", "7", "-k", "5", "-s", "2", "--in", s(&input), "--out-dir", s(&a)]);
    ok(&["encode", "--design", "2", "-n", "7", "-k", "4", "-s", "2", "--in", s(&input), "--out-dir", s(&b)]);
    fs::copy(shard(&b, 3), shard(&a, 3)).unwrap();
    let out = pgb(&["decode", "--in-dir", s(&a), "--out", s(&tmp.path().join("x"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("inconsistent shard set"));
}

#[test]
fn analyze_outputs_csv() {
    let csv = ok(&["analyze", "gamma", "--design", "1", "-n", "20", "-k", "14", "-s", "1", "--kprime", "14"]);
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("variant,n,k,s,kprime,g,gamma_sim"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "design1_mds");
    assert_eq!(row[6], "0.678571");

    let out = pgb(&["analyze", "bounds", "-r", "6", "--k-min", "14", "--k-max", "13"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));

    let csv = ok(&["analyze", "lrc-compare", "-n", "100", "--tolerance", "8", "--g-min", "10", "--g-max", "20"]);
    assert_eq!(csv.lines().count(), 1 + 3 * 11);
}

#[test]
fn randomized_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let tmp = TempDir::new().unwrap();
    for trial in 0..4 {
        let len = rng.gen_range(0..200_000);
        let (input, data) = write_random(tmp.path(), len, trial);
        let shards = tmp.path().join(format!("t{trial}"));
        ok(&["encode", "--design", "2", "-n", "9", "-k", "6", "-s", "2", "--in", s(&input), "--out-dir", s(&shards)]);
        let f = rng.gen_range(1..=9usize);
        fs::remove_file(shard(&shards, f)).unwrap();
        ok(&["repair", "--node", &f.to_string(), "--in-dir", s(&shards)]);
        let out = tmp.path().join("out.bin");
        ok(&["decode", "--in-dir", s(&shards), "--out", s(&out)]);
        assert_eq!(fs::read(&out).unwrap(), data);
    }
}
