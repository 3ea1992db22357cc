use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let marked = [
        lerw_core::lattice::ORIGIN,
        lerw_core::lattice::ONE,
        lerw_core::lattice::MINUS_I,
        lerw_core::lattice::ONE_MINUS_I,
    ];
    let corpus = lerw_core::verify::enumerate_domains(5, &marked);
    println!("5x5 corpus: {} domains in {:?}", corpus.len(), t0.elapsed());
    let t0 = Instant::now();
    let corpus4 = lerw_core::verify::enumerate_domains(4, &[lerw_core::lattice::ORIGIN, lerw_core::lattice::ONE]);
    println!("4x4 {{0,1}} corpus: {} domains in {:?}", corpus4.len(), t0.elapsed());
    // time a slice of the 5x5 identity suite via the 4x4 one first
    let t0 = Instant::now();
    let rep = lerw_core::verify::identity_suite(4);
    println!("identity_suite(4): {} in {:?}", rep.line(), t0.elapsed());
}
