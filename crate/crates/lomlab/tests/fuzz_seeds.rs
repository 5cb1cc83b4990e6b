use std::path::Path;

use lomlab::instance::{parse_instance, parse_matrix, parse_sequence};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn instance_seeds() {
    for (name, text) in seeds("instance_parse") {
        assert_eq!(parse_instance(&text).is_ok(), name.ends_with(".json"), "{name}");
    }
}

#[test]
fn matrix_seeds() {
    for (name, text) in seeds("matrix_decode") {
        assert_eq!(parse_matrix(&text).is_ok(), name != "short", "{name}");
    }
}

#[test]
fn sequence_seeds() {
    let (bad, good): (Vec<_>, Vec<_>) = seeds("dim_sequence").into_iter().partition(|(n, _)| n == "late_infinity");
    assert!(parse_sequence(&bad[0].1).is_err());
    let lens: Vec<(String, usize)> = good
        .into_iter()
        .map(|(n, t)| (n.clone(), parse_sequence(&t).unwrap_or_else(|e| panic!("{n}: {e}")).dims().len()))
        .collect();
    assert_eq!(lens, [("explicit".into(), 5), ("power".into(), 50), ("shifted".into(), 23)]);
}
