use lerw_core::lattice::*;
use std::time::Instant;

fn main() {
    let marked = [ORIGIN, ONE, MINUS_I, ONE_MINUS_I];
    let corpus = lerw_core::verify::enumerate_domains(5, &marked);
    println!("corpus: {}", corpus.len());
    // sample every 200th domain
    let sample: Vec<_> = corpus.iter().step_by(200).collect();
    let t0 = Instant::now();
    let rep = lerw_core::verify::identity_suite_sampled(5, 200);
    let dt = t0.elapsed();
    println!("sampled {} domains in {:?} -> {}", sample.len(), dt, rep.line());
    println!(
        "extrapolated full runtime: {:.1} s",
        dt.as_secs_f64() * 200.0
    );
}
