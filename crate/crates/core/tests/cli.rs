use std::process::{Command, Output};

fn radical(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radical"))
        .args(args)
        .env_remove("RADICAL_PRECISION_BITS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Parses CSV output into header and rows.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn limit_of_all_plus() {
    let o = radical(&["limit", "(+)"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["sequence", "q_binary", "q_rational", "value", "bound", "precision_bits"]);
    assert_eq!(rows[0][3], "2.000000000000000000000000000000");
    assert_eq!(rows[0][5], "128");
}

#[test]
fn sequences_may_start_with_a_minus() {
    let o = radical(&["limit", "-(+)"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("-2.0000000000"));
    let o = radical(&["eval", "--(+)", "--depth", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn csv_and_json_carry_the_same_table() {
    for args in [
        vec!["limit", "(+-)"],
        vec!["eval", "+-+", "--depth", "3"],
        vec!["converge", "(-)", "--max-depth", "8"],
        vec!["enumerate", "--period", "3"],
        vec!["invert", "--q", "3/5"],
    ] {
        let csv_out = stdout(&radical(&args));
        let mut json_args = vec!["--format", "json"];
        json_args.extend(&args);
        let json_out = stdout(&radical(&json_args));
        let (header, rows) = csv_rows(&csv_out);
        let parsed: Vec<serde_json::Map<String, serde_json::Value>> =
            serde_json::from_str(&json_out).unwrap();
        assert_eq!(parsed.len(), rows.len(), "{args:?}");
        // keys appear in column order
        let first = json_out.split('}').next().unwrap();
        let positions: Vec<usize> = header
            .iter()
            .map(|h| first.find(&format!("\"{h}\":")).unwrap())
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{args:?}");
        for (obj, row) in parsed.iter().zip(&rows) {
            assert_eq!(obj.len(), header.len(), "{args:?}");
            for (h, cell) in header.iter().zip(row) {
                assert_eq!(obj[h].as_str().unwrap(), cell, "{args:?} {h}");
            }
        }
    }
}

#[test]
fn precision_flag_beats_environment() {
    let env_only = Command::new(env!("CARGO_BIN_EXE_radical"))
        .args(["limit", "(+)"])
        .env("RADICAL_PRECISION_BITS", "64")
        .output()
        .unwrap();
    assert!(stdout(&env_only).trim_end().ends_with(",64"));
    let both = Command::new(env!("CARGO_BIN_EXE_radical"))
        .args(["--precision-bits", "200", "limit", "(+)"])
        .env("RADICAL_PRECISION_BITS", "64")
        .output()
        .unwrap();
    assert!(stdout(&both).trim_end().ends_with(",200"));
}

#[test]
fn output_is_deterministic() {
    let a = stdout(&radical(&["enumerate", "--period", "4"]));
    let b = stdout(&radical(&["enumerate", "--period", "4"]));
    assert_eq!(a, b);
}

#[test]
fn exit_codes() {
    // parse errors
    let o = radical(&["limit", "+(-"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("at byte 3"), "{}", stderr(&o));
    assert_eq!(radical(&["limit", "+a"]).status.code(), Some(2));
    assert_eq!(radical(&["nonsense"]).status.code(), Some(2));
    // domain errors
    assert_eq!(radical(&["limit", "+-"]).status.code(), Some(3));
    assert_eq!(radical(&["invert", "--value", "3"]).status.code(), Some(3));
    assert_eq!(radical(&["invert", "--q", "5/4"]).status.code(), Some(3));
    assert_eq!(radical(&["eval", "+-", "--depth", "3"]).status.code(), Some(3));
    assert_eq!(radical(&["--precision-bits", "10", "limit", "(+)"]).status.code(), Some(3));
}

#[test]
fn eval_matches_sine_form() {
    let o = radical(&["eval", "(+)", "--depth", "3"]);
    let (header, rows) = csv_rows(&stdout(&o));
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert!(rows[0][col("radical")].starts_with("1.9615705608"));
    assert_eq!(rows[0][col("radical")], rows[0][col("sine")]);
}

#[test]
fn converge_reports_pass() {
    let o = radical(&["converge", "(+-)", "--max-depth", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&o));
    let status = header.iter().position(|h| h == "status").unwrap();
    assert!(rows.iter().all(|r| r[status] == "PASS"));
    assert_eq!(rows.len(), 41);
}

#[test]
fn invert_known_values() {
    let seq_of = |args: &[&str]| {
        let o = radical(args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let (header, rows) = csv_rows(&stdout(&o));
        let i = header.iter().position(|h| h == "sequence").unwrap();
        rows[0][i].clone()
    };
    assert_eq!(seq_of(&["invert", "--value", "1"]), "+(-)");
    assert_eq!(seq_of(&["invert", "--value", "-1"]), "(-)");
    assert_eq!(seq_of(&["invert", "--q", "1/2"]), "--(+)");
    assert_eq!(seq_of(&["invert", "--q", "1/2", "--trailing-zeros"]), "+-(+)");
    assert_eq!(seq_of(&["invert", "--q", "0.6"]), "(+-)");
}

#[test]
fn check_lemma_passes() {
    let o = radical(&["check-lemma", "--max-n", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().last().unwrap().contains("PASS"));
}
