mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mme_eval::io::{read_report, write_fixture};
use mme_eval::mme::Property;
use mme_eval::{Dims, LabelVolume, Spacing};

use common::*;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mme-eval"));
    c.env_remove("MME_EVAL_JOBS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn scene(seed: u64) -> (LabelVolume, LabelVolume) {
    let dims = Dims::new(16, 14, 6).unwrap();
    let sp = Spacing::new(0.8, 0.8, 1.5).unwrap();
    let mut r = rng(seed);
    let g = random_scene(&mut r, dims, 3);
    let mut p = perturbed(&mut r, dims, &g);
    if p.iter().all(|&l| l == 0) {
        p = g.clone();
    }
    (volume(dims, g, sp), volume(dims, p, sp))
}

/// Directory pair `gt/` and `pred/` holding `n` cases.
fn batch(root: &Path, n: u64) -> (PathBuf, PathBuf) {
    let (gd, pd) = (root.join("gt"), root.join("pred"));
    std::fs::create_dir_all(&gd).unwrap();
    std::fs::create_dir_all(&pd).unwrap();
    for k in 0..n {
        let (g, p) = scene(k);
        write_fixture(&g, gd.join(format!("c{k}.txt"))).unwrap();
        write_fixture(&p, pd.join(format!("c{k}.txt"))).unwrap();
    }
    (gd, pd)
}

fn uint8_nifti(v: &LabelVolume) -> Vec<u8> {
    let d = v.dims();
    let sp = v.spacing();
    let payload: Vec<u8> = v.labels().iter().map(|&l| l as u8).collect();
    nifti_bytes(
        false,
        [d.w as i16, d.h as i16, d.d as i16],
        [sp.dx as f32, sp.dy as f32, sp.dz as f32],
        2,
        &payload,
    )
}

#[test]
fn single_nifti_pair() {
    let dir = tempfile::tempdir().unwrap();
    let (g, p) = scene(1);
    let (gp, pp) = (dir.path().join("g.nii.gz"), dir.path().join("p.nii.gz"));
    std::fs::write(&gp, gzip(&uint8_nifti(&g))).unwrap();
    std::fs::write(&pp, gzip(&uint8_nifti(&p))).unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["evaluate", "--gt", s(&gp), "--pred", s(&pp), "--classes", "1", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_report(&out).unwrap();
    assert_eq!(doc.entries.len(), 1);
    let e = &doc.entries[0];
    assert_eq!((e.image_id.as_str(), e.class_id), ("g.nii.gz", 1));
    assert_eq!(e.mme.as_ref().unwrap().properties.len(), 5);
    assert_eq!(e.baseline.as_ref().unwrap().nsd.len(), 2);
    assert_eq!(e.params.theta_fp, 1.0);
}

#[test]
fn directory_batch_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let (gd, pd) = batch(dir.path(), 3);
    let out = dir.path().join("r.json");
    let o = run(&["evaluate", "--gt", s(&gd), "--pred", s(&pd), "--out", s(&out), "--jobs", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_report(&out).unwrap();
    let c = &doc.aggregate.per_class[0];
    assert_eq!(c.n, 3);
    let mme = c.mme.as_ref().unwrap();
    assert_eq!(mme.n, 3);
    let results: Vec<_> = doc.entries.iter().map(|e| e.mme.clone().unwrap()).collect();
    assert_eq!(mme, &mme_eval::mme::aggregate(&results).unwrap());
    let ids: Vec<&str> = doc.entries.iter().map(|e| e.image_id.as_str()).collect();
    assert_eq!(ids, ["c0.txt", "c1.txt", "c2.txt"]);
}

#[test]
fn unmatched_file_is_a_failure() {
    let dir = tempfile::tempdir().unwrap();
    let (gd, pd) = batch(dir.path(), 2);
    let (g, _) = scene(9);
    write_fixture(&g, gd.join("extra.txt")).unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["evaluate", "--gt", s(&gd), "--pred", s(&pd), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let doc = read_report(&out).unwrap();
    assert_eq!(doc.entries.len(), 2);
    assert_eq!(doc.failures.len(), 1);
    assert_eq!(doc.failures[0].image_id, "extra.txt");
}

#[test]
fn mismatched_grids_fail_the_pair() {
    let dir = tempfile::tempdir().unwrap();
    let (gd, pd) = batch(dir.path(), 1);
    let small = volume(Dims::new(3, 3, 1).unwrap(), vec![1; 9], Spacing::isotropic());
    write_fixture(&small, pd.join("c0.txt")).unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["evaluate", "--gt", s(&gd), "--pred", s(&pd), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let doc = read_report(&out).unwrap();
    assert!(doc.failures[0].error.contains("incompatible grids"));
}

#[test]
fn beta_two_weights_recall() {
    let dir = tempfile::tempdir().unwrap();
    let (gd, pd) = batch(dir.path(), 1);
    let out = dir.path().join("r.json");
    let o = run(&["evaluate", "--gt", s(&gd), "--pred", s(&pd), "--out", s(&out), "--beta", "2"]);
    assert!(o.status.success());
    let doc = read_report(&out).unwrap();
    for p in Property::ALL {
        let r = doc.entries[0].mme.as_ref().unwrap().prf(p);
        let (pr, rc) = (r.precision, r.recall);
        let want = if pr + rc == 0.0 { 0.0 } else { 5.0 * pr * rc / (4.0 * pr + rc) };
        assert!((r.fbeta - want).abs() < 1e-12, "{p}: {} vs {want}", r.fbeta);
    }
}

#[test]
fn baselines_identity_and_empty_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let (gd, pd) = (dir.path().join("gt"), dir.path().join("pred"));
    std::fs::create_dir_all(&gd).unwrap();
    std::fs::create_dir_all(&pd).unwrap();
    let (g, _) = scene(4);
    write_fixture(&g, gd.join("same.txt")).unwrap();
    write_fixture(&g, pd.join("same.txt")).unwrap();
    write_fixture(&g, gd.join("void.txt")).unwrap();
    let empty = volume(g.dims(), vec![0; g.dims().len()], g.spacing());
    write_fixture(&empty, pd.join("void.txt")).unwrap();

    let out = dir.path().join("b.json");
    let o = run(&[
        "baselines", "--gt", s(&gd), "--pred", s(&pd), "--classes", "1", "--tau", "1,5", "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_report(&out).unwrap();
    let same = doc.entry("same.txt", 1).unwrap().baseline.as_ref().unwrap();
    assert_eq!((same.dice, same.iou, same.volume_similarity), (1.0, 1.0, 1.0));
    assert_eq!(same.hd_max, Some(0.0));
    assert!(doc.entry("same.txt", 1).unwrap().mme.is_none());
    let void = doc.entry("void.txt", 1).unwrap().baseline.as_ref().unwrap();
    assert_eq!(void.hd_avg, None);
    assert!(void.nsd.iter().all(|n| n.value.is_none()));
    let agg = doc.aggregate.per_class[0].baseline.as_ref().unwrap();
    assert_eq!((agg.hd_avg.n, agg.hd_avg.excluded), (1, 1));
    assert_eq!(agg.nsd.len(), 2);
    assert_eq!(agg.nsd[1].summary.excluded, 1);

    let csv_out = dir.path().join("b.csv");
    let o = run(&["baselines", "--gt", s(&gd), "--pred", s(&pd), "--classes", "1", "--out", s(&csv_out)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&csv_out).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.ends_with("nsd_tau_1,nsd_tau_5"));
    assert_eq!(text.lines().count(), 3);
    let agg = std::fs::read_to_string(dir.path().join("b.aggregate.csv")).unwrap();
    assert!(agg.starts_with("class_id,metric,n,excluded,mean,std"));
    assert!(agg.lines().any(|l| l.starts_with("1,hd_max,1,1,")));
}

#[test]
fn csv_rows_per_property() {
    let dir = tempfile::tempdir().unwrap();
    let (gd, pd) = batch(dir.path(), 2);
    let out = dir.path().join("r.csv");
    let o = run(&["evaluate", "--gt", s(&gd), "--pred", s(&pd), "--out", s(&out)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("image_id,class_id,property,tp,fp,fn,precision,recall,fbeta,dice"));
    let props: Vec<&str> = lines.map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(props, ["D", "U", "B", "T", "R", "D", "U", "B", "T", "R"]);
}

#[test]
fn repeated_runs_and_charts_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (gd, pd) = batch(dir.path(), 3);
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    assert!(run(&["evaluate", "--gt", s(&gd), "--pred", s(&pd), "--out", s(&a)]).status.success());
    let o = bin()
        .args(["evaluate", "--gt", s(&gd), "--pred", s(&pd), "--out", s(&b)])
        .env("MME_EVAL_JOBS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let (c1, c2) = (dir.path().join("1.svg"), dir.path().join("2.svg"));
    for c in [&c1, &c2] {
        let o = run(&["chart", "--report", s(&a), "--image", "c1.txt", "--class", "1", "--out", s(c)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let svg = std::fs::read(&c1).unwrap();
    assert_eq!(svg, std::fs::read(&c2).unwrap());
    assert!(String::from_utf8(svg).unwrap().starts_with("<svg"));

    let missing = run(&["chart", "--report", s(&a), "--image", "nope", "--class", "1", "--out", s(&c1)]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["evaluate", "--gt", "a"]).status.code(), Some(1));
    assert_eq!(
        run(&["evaluate", "--gt", "a", "--pred", "b", "--out", "c", "--connectivity", "8"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["evaluate", "--gt", "a", "--pred", "b", "--out", "c", "--beta", "0"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn unreadable_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["evaluate", "--gt", "/nonexistent/g.txt", "--pred", "/nonexistent/p.txt", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(read_report(&out).unwrap().failures.len(), 1);
}
