//! External inpainter protocol, exercised with shell-script stand-ins.

use std::fs;
use std::path::{Path, PathBuf};

use peel_core::hiding::random_image;
use peel_core::image::{load_image, save_image, ImageBuf};
use peel_core::inpaint::{external_inpaint, extract_edges, make_dr, InpaintRequest};
use peel_core::removal::{run_attack, AttackConfig, AttackMode, RemovalMask};
use peel_core::{Error, ExternalInpainter};

fn script(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, format!("#!/bin/sh\nset -e\n{body}\n")).unwrap();
    format!("sh {}", path.display())
}

fn request(w: usize, h: usize) -> (ImageBuf, InpaintRequest) {
    let img = random_image(w, h, 3, 5);
    let mut mask = RemovalMask::all_kept(w, h);
    mask.remove_rect(4, 4, 12, 10);
    let req = InpaintRequest::new(mask.apply(&img).unwrap(), mask).unwrap();
    (img, req)
}

#[test]
fn copy_through_is_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let cmd = script(tmp.path(), "copy.sh", "cp \"$1/masked.png\" \"$1/result.png\"");
    let (_, req) = request(20, 16);
    let out = external_inpaint(&cmd, &req).unwrap();
    assert_eq!(out, req.masked);
}

#[test]
fn side_inputs_are_written() {
    let tmp = tempfile::tempdir().unwrap();
    let keep = tmp.path().join("seen");
    fs::create_dir(&keep).unwrap();
    let cmd = script(
        tmp.path(),
        "inspect.sh",
        &format!("cp \"$1\"/*.png {}\ncp \"$1/masked.png\" \"$1/result.png\"", keep.display()),
    );
    let (img, req) = request(20, 16);
    let edge = extract_edges(&req.masked, 2.0, 0.1, 0.2).unwrap();
    let dr = make_dr(&img, &req.mask, 0.05, 3).unwrap();
    let req = req.with_edge(edge).unwrap().with_dr(dr.clone()).unwrap();
    external_inpaint(&cmd, &req).unwrap();

    let mask = load_image(keep.join("mask.png")).unwrap();
    assert_eq!(mask.get(0, 0, 0), 1.0);
    assert_eq!(mask.get(5, 5, 0), 0.0);
    assert!(keep.join("edge.png").exists());
    let dr_back = load_image(keep.join("dr.png")).unwrap();
    assert!(dr_back.data().iter().zip(dr.data()).all(|(a, b)| (a - b).abs() <= 0.5 / 255.0 + 1e-12));
}

#[test]
fn missing_result_is_protocol_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cmd = script(tmp.path(), "noop.sh", "true");
    let (_, req) = request(20, 16);
    assert!(matches!(external_inpaint(&cmd, &req), Err(Error::ExternalProtocol(_))));
}

#[test]
fn failing_tool_is_process_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cmd = script(tmp.path(), "fail.sh", "echo nope >&2\nexit 3");
    let (_, req) = request(20, 16);
    match external_inpaint(&cmd, &req) {
        Err(Error::ExternalProcess(msg)) => assert!(msg.contains("nope")),
        other => panic!("unexpected {other:?}"),
    }
    let absent = external_inpaint("/nonexistent/tool", &req);
    assert!(matches!(absent, Err(Error::ExternalProcess(_))));
}

fn prepared(tmp: &Path, img: &ImageBuf) -> PathBuf {
    let path = tmp.join("prepared.png");
    save_image(img, &path).unwrap();
    path
}

#[test]
fn wrong_size_is_protocol_error() {
    let tmp = tempfile::tempdir().unwrap();
    let path = prepared(tmp.path(), &random_image(10, 10, 3, 1));
    let cmd = script(tmp.path(), "size.sh", &format!("cp {} \"$1/result.png\"", path.display()));
    let (_, req) = request(20, 16);
    assert!(matches!(external_inpaint(&cmd, &req), Err(Error::ExternalProtocol(_))));
}

#[test]
fn kept_pixel_tamper_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, req) = request(20, 16);
    let mut bytes = req.masked.to_bytes();
    // pixel (1, 0), channel 0 moved by 2 levels
    bytes[3] = if bytes[3] > 127 { bytes[3] - 2 } else { bytes[3] + 2 };
    let tampered = ImageBuf::from_bytes(20, 16, 3, &bytes).unwrap();
    let path = prepared(tmp.path(), &tampered);
    let cmd = script(tmp.path(), "tamper.sh", &format!("cp {} \"$1/result.png\"", path.display()));
    match external_inpaint(&cmd, &req) {
        Err(Error::KeptPixelViolation { x, y, channel, .. }) => assert_eq!((x, y, channel), (1, 0, 0)),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn external_failure_reports_phase() {
    let tmp = tempfile::tempdir().unwrap();
    let cmd = script(tmp.path(), "noop.sh", "true");
    let img = random_image(40, 40, 3, 2);
    let cfg = AttackConfig { k: 20, l: 24, ..AttackConfig::peel() };
    match run_attack(&img, &cfg, AttackMode::Peel, &ExternalInpainter::new(cmd)) {
        Err(Error::Phase { phase: 0, source }) => assert!(matches!(*source, Error::ExternalProtocol(_))),
        other => panic!("unexpected {other:?}"),
    }
}
