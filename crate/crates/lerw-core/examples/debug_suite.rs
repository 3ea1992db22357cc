use lerw_core::enumerate::{through_lambda_sums, SmallDomain};
use lerw_core::lattice::*;
use lerw_core::lerw::{identity_check, IdentityEngine};
use lerw_core::verify::enumerate_domains;

fn main() {
    let marked = [ORIGIN, ONE, MINUS_I, ONE_MINUS_I];
    let corpus = enumerate_domains(5, &marked);
    let mut worst = (0.0f64, Vec::new(), BoundaryEdge { inner: ORIGIN, outer: ONE }, BoundaryEdge { inner: ORIGIN, outer: ONE });
    for cd in corpus.iter().step_by(200) {
        let pts = cd.points();
        let domain = LatticeDomain::connected_region(&pts).unwrap();
        let sd = SmallDomain::new(&domain).unwrap();
        let table = build_branch_cut(&domain).unwrap();
        let engine = IdentityEngine::new(&domain, &table).unwrap();
        let oracle = through_lambda_sums(&sd, &[ORIGIN, ONE]);
        let ne = sd.edges.len();
        let nv = sd.verts.len();
        for a in 0..ne {
            for b in (a + 1)..ne {
                let h = sd.g[sd.index[&sd.edges[a].inner] * nv + sd.index[&sd.edges[b].inner]] / 16.0;
                let p_oracle = (oracle[a * ne + b] + oracle[b * ne + a]) / h;
                let (p_rhs, scale) = engine.p_with_scale(sd.edges[a], sd.edges[b]).unwrap();
                let rel = (p_oracle - p_rhs).abs() / p_oracle.max(scale).max(f64::MIN_POSITIVE);
                if rel > worst.0 {
                    worst = (rel, pts.clone(), sd.edges[a], sd.edges[b]);
                }
            }
        }
    }
    println!("worst rel err: {:.3e}", worst.0);
    println!("domain: {:?}", worst.1.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>());
    println!("pair: {} {}", worst.2, worst.3);
    let domain = LatticeDomain::connected_region(&worst.1).unwrap();
    let table = build_branch_cut(&domain).unwrap();
    println!("cut: {:?}", table.cut_path.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>());
    println!("crossed: {:?}", table.crossed_edges());
    let rep = identity_check(&domain, &table, worst.2, worst.3).unwrap();
    println!("exact {} rhs {}", rep.p_exact, rep.p_rhs);
}
