use kpp_cli::accept::*;
fn main() {
    let ctx = AcceptContext::new(SuiteProfile::full());
    let t0 = std::time::Instant::now();
    let r = criterion_6(&ctx);
    println!("criterion 6 FULL ({:?}): passed = {}", t0.elapsed(), r.passed);
    for d in &r.details { println!("  {d}"); }
}
