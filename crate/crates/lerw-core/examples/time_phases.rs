use lerw_core::enumerate::{through_lambda_sums, SmallDomain};
use lerw_core::lattice::*;
use lerw_core::verify::enumerate_domains;
use std::time::Instant;

fn main() {
    let marked = [ORIGIN, ONE, MINUS_I, ONE_MINUS_I];
    let corpus = enumerate_domains(5, &marked);
    let sample: Vec<Vec<Point>> = corpus.iter().step_by(400).map(|c| c.points()).collect();
    println!("sample {}", sample.len());

    let t = Instant::now();
    let domains: Vec<LatticeDomain> = sample.iter().map(|p| LatticeDomain::from_validated(p)).collect();
    println!("from_validated: {:?}", t.elapsed());

    let t = Instant::now();
    let sds: Vec<SmallDomain> = domains.iter().map(|d| SmallDomain::new(d).unwrap()).collect();
    println!("SmallDomain: {:?}", t.elapsed());

    let t = Instant::now();
    let tables: Vec<EdgeSignTable> = domains.iter().map(|d| build_branch_cut(d).unwrap()).collect();
    println!("branch cuts: {:?}", t.elapsed());
    let _ = tables;

    let t = Instant::now();
    let mut acc = 0.0;
    for sd in &sds {
        let sums = through_lambda_sums(sd, &[ORIGIN, ONE]);
        acc += sums[0];
    }
    println!("through_lambda oracle: {:?} ({acc:e})", t.elapsed());
}
