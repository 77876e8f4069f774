// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use camloc_cli::camt;
use camloc_cli::synth::{synth_scenes, SynthConfig};
use camloc_core::HeatmapStack;
use proptest::prelude::*;

const BIN: &str = env!("CARGO_BIN_EXE_camloc");

fn camloc(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn eval_of_truth_against_itself_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let (cams, gt) = (dir.path().join("c.camt"), dir.path().join("gt.json"));
    let out = camloc(&[
        "synth",
        "--out",
        s(&cams),
        "--gt",
        s(&gt),
        "--frames",
        "12",
        "--seed",
        "3",
    ]);
    assert!(out.status.success());
    let out = camloc(&["eval", "--pred", s(&gt), "--gt", s(&gt)]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["mean_ap"], 1.0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("mean"));
}

#[test]
fn empty_ground_truth_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    write(
        &empty,
        r#"{"classes":["a"],"frames":[{"frame_id":0,"boxes":[]}]}"#,
    );
    let out = camloc(&["eval", "--pred", s(&empty), "--gt", s(&empty)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = dir.path().join("bad.json");
    write(&bad_json, "{not json");
    let unordered = dir.path().join("unordered.json");
    write(
        &unordered,
        r#"{"classes":[],"frames":[{"frame_id":2,"boxes":[]},{"frame_id":1,"boxes":[]}]}"#,
    );
    let missing = dir.path().join("missing.json");
    let out_path = dir.path().join("o.json");
    for args in [
        vec!["track", "--dets", s(&bad_json), "--out", s(&out_path)],
        vec!["track", "--dets", s(&unordered), "--out", s(&out_path)],
        vec!["track", "--dets", s(&missing), "--out", s(&out_path)],
        vec!["eval", "--pred", s(&bad_json), "--gt", s(&unordered)],
        vec!["localize", "--cams", s(&missing), "--out", s(&out_path)],
        vec![
            "synth",
            "--out",
            s(&out_path),
            "--gt",
            s(&out_path),
            "--blobs",
            "4",
            "--classes",
            "5",
        ],
        vec![
            "track",
            "--dets",
            s(&unordered),
            "--out",
            s(&out_path),
            "--fuse-weight",
            "2",
        ],
    ] {
        let out = camloc(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn zero_tensor_gives_no_boxes() {
    let dir = tempfile::tempdir().unwrap();
    let (cams, out_path) = (dir.path().join("z.camt"), dir.path().join("o.json"));
    camt::write(&cams, &HeatmapStack::zeros(3, 2, 8, 8).unwrap()).unwrap();
    let out = camloc(&["localize", "--cams", s(&cams), "--out", s(&out_path)]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let frames = doc["frames"].as_array().unwrap();
    assert!(frames.iter().all(|f| f["boxes"].as_array().unwrap().is_empty()));
}

#[test]
fn calibrate_then_classify() {
    let dir = tempfile::tempdir().unwrap();
    let (logits, labels, shifts, plain, shifted) = (
        dir.path().join("logits.csv"),
        dir.path().join("labels.csv"),
        dir.path().join("shifts.csv"),
        dir.path().join("plain.csv"),
        dir.path().join("shifted.csv"),
    );
    // class 0 separates at logit -2, class 1 is already optimal at 0
    write(&logits, "class_0,class_1\n-3,-1\n-2.5,2\n-1.5,-0.5\n-1,1.5\n");
    write(&labels, "class_0,class_1\n0,0\n0,1\n1,0\n1,1\n");
    let out = camloc(&[
        "calibrate",
        "--logits",
        s(&logits),
        "--labels",
        s(&labels),
        "--out",
        s(&shifts),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(&shifts).unwrap();
    assert_eq!(table.lines().next(), Some("class_0,class_1"));
    assert_eq!(table.lines().nth(1).unwrap().split(',').nth(1), Some("0"));

    assert!(camloc(&["classify", "--logits", s(&logits), "--out", s(&plain)])
        .status
        .success());
    assert_eq!(
        std::fs::read_to_string(&plain).unwrap(),
        "class_0,class_1\n0,0\n0,1\n0,0\n0,1\n"
    );
    let out = camloc(&[
        "classify",
        "--logits",
        s(&logits),
        "--shifts",
        s(&shifts),
        "--out",
        s(&shifted),
    ]);
    assert!(out.status.success());
    assert_eq!(
        std::fs::read_to_string(&shifted).unwrap(),
        "class_0,class_1\n0,0\n0,1\n1,0\n1,1\n"
    );

    let zero = dir.path().join("zero.csv");
    write(&zero, "class_0,class_1\n0,0\n");
    let out = camloc(&[
        "classify",
        "--logits",
        s(&logits),
        "--shifts",
        s(&zero),
        "--out",
        s(&shifted),
    ]);
    assert!(out.status.success());
    assert_eq!(std::fs::read(&shifted).unwrap(), std::fs::read(&plain).unwrap());

    let bad = dir.path().join("bad.csv");
    write(&bad, "a,b\n1,2\n");
    let out = camloc(&[
        "calibrate",
        "--logits",
        s(&bad),
        "--labels",
        s(&labels),
        "--out",
        s(&shifts),
    ]);
    assert_eq!(out.status.code(), Some(2));
    write(&bad, "class_0,class_1\n1,2\n");
    let out = camloc(&[
        "calibrate",
        "--logits",
        s(&logits),
        "--labels",
        s(&bad),
        "--out",
        s(&shifts),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pseudo_label_keeps_confident_overlapping_boxes() {
    let dir = tempfile::tempdir().unwrap();
    let (dets, refs, out_path) = (
        dir.path().join("d.json"),
        dir.path().join("r.json"),
        dir.path().join("o.json"),
    );
    write(
        &dets,
        r#"{"classes":["a"],"frames":[{"frame_id":0,"boxes":[
            {"class_id":0,"score":0.9,"x_min":0,"y_min":0,"x_max":10,"y_max":10},
            {"class_id":0,"score":0.5,"x_min":0,"y_min":0,"x_max":10,"y_max":10},
            {"class_id":0,"score":0.9,"x_min":50,"y_min":50,"x_max":60,"y_max":60}]}]}"#,
    );
    write(
        &refs,
        r#"{"classes":["a"],"frames":[{"frame_id":0,"boxes":[{"class_id":0,"score":1,"x_min":0,"y_min":0,"x_max":10,"y_max":2}]}]}"#,
    );
    let out = camloc(&[
        "pseudo-label",
        "--dets",
        s(&dets),
        "--refs",
        s(&refs),
        "--out",
        s(&out_path),
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let boxes = doc["frames"][0]["boxes"].as_array().unwrap();
    assert_eq!(boxes.len(), 1);
    assert_eq!(boxes[0]["score"], 0.9);
    assert_eq!(boxes[0]["x_min"], 0.0);
}

#[test]
fn synth_is_deterministic_per_seed() {
    let cfg = SynthConfig {
        frames: 10,
        seed: 5,
        drop_rate: 0.3,
        label_noise: 0.2,
        ..SynthConfig::default()
    };
    let a = synth_scenes(&cfg).unwrap();
    let b = synth_scenes(&cfg).unwrap();
    assert_eq!(
        camt::encode(&a.heatmaps).unwrap(),
        camt::encode(&b.heatmaps).unwrap()
    );
    assert_eq!(a.truth, b.truth);
    let c = synth_scenes(&SynthConfig { seed: 6, ..cfg }).unwrap();
    assert_ne!(
        camt::encode(&a.heatmaps).unwrap(),
        camt::encode(&c.heatmaps).unwrap()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn camt_round_trip_is_bit_exact(
        dims in (1usize..4, 1usize..4, 1usize..6, 1usize..6),
        seed_bits in proptest::collection::vec(any::<u32>(), 144),
    ) {
        let (f, c, h, w) = dims;
        let data: Vec<f32> = (0..f * c * h * w)
            .map(|i| {
                let v = f32::from_bits(seed_bits[i % seed_bits.len()]);
                if v.is_finite() { v } else { -0.0 }
            })
            .collect();
        let stack = HeatmapStack::new(f, c, h, w, data).unwrap();
        let bytes = camt::encode(&stack).unwrap();
        let back = camt::decode(&bytes).unwrap();
        prop_assert_eq!(back.shape(), stack.shape());
        for (a, b) in back.data().iter().zip(stack.data()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..80)) {
        let _ = camt::decode(&bytes);
        let mut header = b"CAMT\x01\x00\x00\x00".to_vec();
        header.extend_from_slice(&bytes);
        let _ = camt::decode(&header);
    }
}
