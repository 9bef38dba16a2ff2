use std::io::Cursor;
use std::path::Path;

use clbk::cli::{main_with, EXIT_INCOMPLETE, EXIT_INPUT, EXIT_OK, EXIT_UNPROVABLE};
use clbk::formula::parse_formula;

fn run(args: &[&str], input: &str) -> (i32, String) {
    let mut out = Vec::new();
    let argv = std::iter::once("clbk").chain(args.iter().copied());
    let code = main_with(argv, &mut Cursor::new(input.as_bytes().to_vec()), &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn starbucks() -> &'static str {
    concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/starbucks.clbk")
}

#[test]
fn prove_prints_the_listing() {
    let (code, out) = run(&["prove", "--tree", "(p /\\ q) -> (p \\/ q) @ w"], "");
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "provable\n1 (p /\\ q) -> (p \\/ q) @ w rule A 0\n");
    let (code, out) = run(&["prove", "--hybrid", "(C /\\ C) -> (C \\/ C) @ w"], "");
    assert_eq!(code, EXIT_OK);
    assert!(
        out.contains("1 (C_p /\\ C_q) -> (C_p \\/ C_q) @ w rule A 0"),
        "{out}"
    );
    assert!(
        out.ends_with("3 (C /\\ C) -> (C \\/ C) @ w rule C 2\n"),
        "{out}"
    );
}

#[test]
fn prove_exit_codes() {
    assert_eq!(
        run(&["prove", "p | ~p"], ""),
        (EXIT_UNPROVABLE, "unprovable\n".into())
    );
    let (code, out) = run(&["prove", "(p /\\"], "");
    assert_eq!(code, EXIT_INPUT);
    assert!(out.starts_with("error:"), "{out}");
    assert_eq!(run(&["frobnicate"], "").0, EXIT_INPUT);
    assert_eq!(run(&["--help"], "").0, EXIT_OK);
}

#[test]
fn interactive_play_copies_moves() {
    let input = "2.1.x=3\n2.1.y=2\nB1.1.z=7\n";
    let (code, out) = run(
        &["play", "--interactive", "(C /\\ C) -> (C \\/ C) @ w"],
        input,
    );
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines,
        vec![
            "1 me B 2.1.x=3",
            "2 me T 1.1.x=3",
            "3 me B 2.1.y=2",
            "4 me T 1.1.y=2",
            "5 me B 1.1.z=7",
            "6 me T 2.1.z=7",
            "winner: T",
        ]
    );
}

#[test]
fn play_with_scripts_file() {
    let dir = tempfile::tempdir().unwrap();
    let scripts = dir.path().join("s.clbk");
    std::fs::write(&scripts, "script c0 = [x=3, y=1]\n").unwrap();
    let trace = dir.path().join("play.trace");
    let (code, out) = run(
        &[
            "play",
            "C -> C{s=c0}",
            "--scripts",
            scripts.to_str().unwrap(),
            "--trace",
            trace.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(code, EXIT_OK, "{out}");
    assert_eq!(
        out,
        "1 me B 2.x=3\n2 me T 1.x=3\n3 me B 2.y=1\n4 me T 1.y=1\nwinner: T\n"
    );
    assert_eq!(
        std::fs::read_to_string(&trace).unwrap(),
        out.trim_end_matches("winner: T\n")
    );
}

#[test]
fn play_out_of_steps_is_incomplete() {
    let (code, _) = run(
        &[
            "play",
            "--interactive",
            "--max-steps",
            "1",
            "(C /\\ C) -> (C \\/ C) @ w",
        ],
        "2.1.x=3\n2.1.y=2\n",
    );
    assert_eq!(code, EXIT_INCOMPLETE);
}

#[test]
fn simulate_writes_traces() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run(
        &[
            "simulate",
            starbucks(),
            "--trace-dir",
            dir.path().to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(
        out.contains("u: won (D /\\ D) -> (C /\\ C) @ \"*1\""),
        "{out}"
    );
    assert!(out.ends_with("u: 1/1 won; o: 1/1 won; *C: 1/1 won; *1: 1/1 won\n"));
    for name in [
        "u.trace",
        "o.trace",
        "starC.trace",
        "star1.trace",
        "all.trace",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let all = std::fs::read_to_string(dir.path().join("all.trace")).unwrap();
    let u = std::fs::read_to_string(dir.path().join("u.trace")).unwrap();
    assert!(u.lines().all(|l| all.contains(l)));
}

#[test]
fn simulate_exit_codes() {
    assert_eq!(run(&["simulate", "/nonexistent/x.clbk"], "").0, EXIT_INPUT);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.clbk");
    std::fs::write(&bad, "agent u\n  query (p /\\\n").unwrap();
    assert_eq!(run(&["simulate", bad.to_str().unwrap()], "").0, EXIT_INPUT);
    let short = dir.path().join("short.clbk");
    let text = std::fs::read_to_string(starbucks()).unwrap();
    let text: String = text
        .lines()
        .filter(|l| !l.starts_with("  rb ((C -> D)"))
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(&short, text).unwrap();
    assert_eq!(
        run(&["simulate", short.to_str().unwrap()], "").0,
        EXIT_INCOMPLETE
    );
}

fn fmt_file(path: &Path) -> (i32, String) {
    run(&["fmt", path.to_str().unwrap()], "")
}

#[test]
fn fmt_is_a_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("in.txt");
    std::fs::write(
        &src,
        "# sample\n((p/\\q)) -> (p\\/q) @w\n\n  C{h=hC} & ~~D @ \"*1\"\n",
    )
    .unwrap();
    let (code, once) = fmt_file(&src);
    assert_eq!(code, EXIT_OK);
    assert_eq!(once.lines().next(), Some("# sample"));
    let again = dir.path().join("again.txt");
    std::fs::write(&again, &once).unwrap();
    assert_eq!(fmt_file(&again), (EXIT_OK, once.clone()));
    let original = std::fs::read_to_string(&src).unwrap();
    for (a, b) in original.lines().zip(once.lines()) {
        if !a.trim().is_empty() && !a.starts_with('#') {
            assert_eq!(parse_formula(a.trim()), parse_formula(b));
        }
    }
}

#[test]
fn fmt_reports_positions() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("bad.txt");
    std::fs::write(&src, "p\nq /\\ \n").unwrap();
    let (code, out) = fmt_file(&src);
    assert_eq!(code, EXIT_INPUT);
    assert!(out.contains("bad.txt:2:"), "{out}");
}
