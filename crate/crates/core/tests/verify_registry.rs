use std::time::Duration;

use xibergman::verify::{run, Check, Suite, SuiteRegistry, VerifyContext};

struct Constant(bool);

impl Suite for Constant {
    fn name(&self) -> &'static str {
        "constant"
    }

    fn run(&self, ctx: &VerifyContext) -> Vec<Check> {
        let measured = if self.0 { 0.0 } else { 1.0 };
        vec![Check::at_most("seed-echo", measured, 0.5).with_detail(format!("seed {}", ctx.seed))]
    }
}

#[test]
fn default_registry_lists_every_suite() {
    let r = SuiteRegistry::default();
    assert_eq!(
        r.names(),
        ["algebra", "quadrature", "kernels", "higher", "green"]
    );
    assert!(r.resolve("nope").is_err());
    assert_eq!(r.resolve("all").unwrap().len(), 5);
}

#[test]
fn quadrature_suite_passes_deterministically() {
    let r = SuiteRegistry::default();
    let a = run(&r, "quadrature", 42, None).unwrap();
    let b = run(&r, "quadrature", 42, None).unwrap();
    assert!(a.pass, "{}", a.to_table());
    assert_eq!(a.to_json().to_string(), b.to_json().to_string());
}

#[test]
fn registered_suites_replace_by_name() {
    let mut r = SuiteRegistry::empty();
    r.register(Box::new(Constant(false)));
    assert!(!run(&r, "constant", 7, None).unwrap().pass);
    r.register(Box::new(Constant(true)));
    assert_eq!(r.names(), ["constant"]);
    let report = run(&r, "all", 7, None).unwrap();
    assert!(report.pass);
    assert_eq!(report.seed, 7);
    assert!(report.to_table().ends_with("PASS\n"));
}

#[test]
fn exhausted_budget_fails_the_report() {
    let mut r = SuiteRegistry::empty();
    r.register(Box::new(Constant(true)));
    let report = run(&r, "all", 42, Some(Duration::ZERO)).unwrap();
    assert!(!report.pass);
    assert_eq!(report.skipped, ["constant"]);
}
