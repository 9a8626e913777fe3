use std::process::{Command, Output};

use liecg::table_cli::{fixture_dir, parse_fixture, parse_json, to_fixture};

fn liecg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liecg")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn decompose_prints_subgroup_content() {
    let o = liecg(&["decompose", "SU6", "56"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "SU6 56 8_2 10_4");
}

#[test]
fn couple_prints_series_with_state_count() {
    let o = liecg(&["couple", "SU6", "35", "35"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("405 + 280 + 280* + 189 + 2x35 + 1"), "{s}");
    assert!(s.contains("(1225 states)"), "{s}");
}

#[test]
fn full_coefficients() {
    // |27; I=2, Iz=0> from pi+ pi-: SU(2) coefficient sqrt(1/6) times scalar factor 1
    let o = liecg(&["cg", "SU3", "8", "8", "27", "2,0;0", "1,0;1", "1,0;-1"]);
    assert_eq!(stdout(&o).trim(), "+sqrt(1/6)");
    // isospin-antisymmetric pi pi has no symmetric 27 component
    let o = liecg(&["cg", "SU3", "8", "8", "27", "1,0;0", "1,0;1", "1,0;-1"]);
    assert_eq!(stdout(&o).trim(), "0");
}

#[test]
fn text_output_is_the_golden_format() {
    let o = liecg(&["sf", "SU3", "8", "8"]);
    assert!(o.status.success());
    let got = parse_fixture(&stdout(&o)).unwrap();
    let want = parse_fixture(&std::fs::read_to_string(fixture_dir().join("su3_8x8.txt")).unwrap()).unwrap();
    assert_eq!((&got.group, &got.r1, &got.r2), (&want.group, &want.r1, &want.r2));
    for row in &want.rows {
        assert!(got.rows.contains(row), "{}", row.lhs);
    }
}

#[test]
fn json_and_text_agree() {
    let j = liecg(&["sf", "SU4", "20'", "15", "--format", "json"]);
    let t = liecg(&["sf", "SU4", "20'", "15"]);
    let named = parse_json(&stdout(&j)).unwrap();
    assert_eq!(to_fixture(&named), parse_fixture(&stdout(&t)).unwrap());
}

#[test]
fn latex_rows() {
    let o = liecg(&["emit", "--format", "latex", "SU3", "3", "3"]);
    let s = stdout(&o);
    assert!(s.contains("\\begin{eqnarray}"));
    assert!(s.contains("|\\bar{D},\\bar{D}_{s}\\rangle_{S}"), "{s}");
}

#[test]
fn verify_single_file() {
    let f = fixture_dir().join("su3_10x8.txt");
    let o = liecg(&["verify", f.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("ok"));
}

#[test]
fn verify_reports_a_corrupted_file() {
    let text = std::fs::read_to_string(fixture_dir().join("su3_8x8.txt")).unwrap();
    let bad = text.replacen("pi,pi +sqrt", "pi,pi -sqrt", 1);
    assert_ne!(bad, text);
    let dir = std::env::temp_dir().join(format!("liecg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("su3_8x8.txt");
    std::fs::write(&p, bad).unwrap();
    let o = liecg(&["verify", p.to_str().unwrap()]);
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_input_exit_codes() {
    assert_eq!(liecg(&["sf", "SU9", "8", "8"]).status.code(), Some(2));
    assert_eq!(liecg(&["sf", "SU3", "8", "15"]).status.code(), Some(1));
    assert_eq!(liecg(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(liecg(&["--pivot", "middle", "sf", "SU3", "3", "3"]).status.code(), Some(2));
}
