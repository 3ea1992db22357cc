use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let rep = lerw_core::verify::identity_suite(5);
    println!("{}", rep.line());
    println!("elapsed: {:.1} s", t0.elapsed().as_secs_f64());
}
