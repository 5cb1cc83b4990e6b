use std::io::Write;

use lomlab::algebra::DEFAULT_SEED;
use lomlab::instance::{parse_instance, InstanceFile};
use lomlab::Tolerance;
use lomlab_cli::corpus;
use lomlab_cli::criteria::{run_all, Context};

#[test]
fn acceptance_criteria() {
    let parsed: Vec<InstanceFile> = corpus::embedded()
        .iter()
        .map(|e| parse_instance(std::str::from_utf8(&e.bytes).unwrap()).unwrap().with_defaults())
        .collect();
    let ctx = Context { corpus: &parsed, seed: DEFAULT_SEED, tol: Tolerance::default() };
    let results = run_all(&ctx);
    let mut err = std::io::stderr().lock();
    for r in &results {
        writeln!(err, "{}", r.line()).unwrap();
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
