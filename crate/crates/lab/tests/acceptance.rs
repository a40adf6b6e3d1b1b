//! One line per acceptance criterion.

use onesided_lab::suite::CRITERIA;

fn main() {
    let mut failed = 0;
    for c in &CRITERIA {
        let o = c.run();
        let limit = o.limit.map_or(String::new(), |l| format!(", limit {}s", l.as_secs()));
        println!(
            "criterion {:>2} {}: {} [{:.2}s{limit}] {}",
            o.id,
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.elapsed.as_secs_f64(),
            o.detail
        );
        for (k, v) in &o.fitted {
            println!("    fitted {k} = {v:?}");
        }
        failed += usize::from(!o.passed);
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
