use pbrepair::driver::{model_check, pbrepair, verify_exhaustive, CheckResult, DriverError, Outcome, RepairConfig};
use pbrepair::lang::{emit, parse, MINMAX};

fn minmax_with(from: &str, to: &str) -> String {
    assert!(MINMAX.contains(from));
    MINMAX.replacen(from, to, 1)
}

#[test]
fn repaired_programs_verify_at_width_three() {
    let p = parse(&minmax_with("least = input3;", "least = input2;"), 3).unwrap();
    assert!(!verify_exhaustive(&p, 8).unwrap());
    let r = pbrepair(&p, 10, 10, RepairConfig::default()).unwrap();
    assert_eq!(r.outcome, Outcome::Repaired);
    let q = r.repaired.unwrap();
    assert!(verify_exhaustive(&q, 8).unwrap());
    assert_eq!(model_check(&q, 8, None, 1_000_000).unwrap(), CheckResult::Verified);
}

#[test]
fn multi_statement_region() {
    let src = minmax_with("most = input1;\nleast = input1;", "most = input2;\nleast = input3;");
    let p = parse(&src, 2).unwrap();
    assert!(!verify_exhaustive(&p, 8).unwrap());
    let r = pbrepair(&p, 1, 2, RepairConfig::default()).unwrap();
    assert_eq!(r.outcome, Outcome::Repaired);
    let q = r.repaired.unwrap();
    assert!(verify_exhaustive(&q, 8).unwrap());
    // everything outside the region survives
    assert!(emit(&q).contains("if (most < input2) {\n  most = input2;\n}"));
}

#[test]
fn guard_fault_repaired_through_a_temporary() {
    let p = parse(&minmax_with("if (input2 < least)", "if (input2 > least)"), 2).unwrap();
    let r = pbrepair(&p, 7, 7, RepairConfig::default()).unwrap();
    assert_eq!(r.outcome, Outcome::Repaired);
    let q = r.repaired.unwrap();
    assert!(verify_exhaustive(&q, 8).unwrap());
    assert!(q.vars.iter().any(|v| v.name.starts_with('t')));
}

#[test]
fn reports_are_deterministic() {
    let p = parse(&minmax_with("most = input3;", "most = input1;"), 2).unwrap();
    let a = pbrepair(&p, 6, 6, RepairConfig::default()).unwrap();
    let b = pbrepair(&p, 6, 6, RepairConfig::default()).unwrap();
    let bits = |r: &pbrepair::driver::RunReport| r.iterations.iter().map(|i| i.path.clone()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(a.program, b.program);
}

#[test]
fn iteration_cap_is_an_error() {
    let p = parse(&minmax_with("least = input2;", "least = input3;"), 2).unwrap();
    let config = RepairConfig { max_iters: 1, ..RepairConfig::default() };
    match pbrepair(&p, 8, 8, config) {
        Err(DriverError::MaxIterations(1)) => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn asserts_are_rejected() {
    let p = parse("prog a(x)\npre: true\ny = x;\nassert(y == x);\npost: true\n", 2).unwrap();
    assert!(matches!(pbrepair(&p, 1, 1, RepairConfig::default()), Err(DriverError::AssertUnsupported(2))));
}
