//! Acceptance run: one `[PASS]`/`[FAIL]` line per criterion.

use std::sync::Arc;
use std::time::{Duration, Instant};

use ckbench::dilate::{
    colored_full_ck_dilation, corner_norms, full_ck_dilation, one_step_dilation, random_tck_dilation,
    required_inflation,
};
use ckbench::family::{
    build_cycle_exact, build_exact_block, build_fock, build_pi_v, compress, gauge_unitary, reducing_defect,
    rho_on_basis,
};
use ckbench::graph::{enumerate_backward_basis, enumerate_paths, select_tails, Graph, VertexId};
use ckbench::linalg::{adjoint, as_coordinate_projection, select_columns, op_norm, orthogonal_complement, orthonormality_defect, random_unitary};
use ckbench::staralg::{
    climb, evaluate_word, fock_action_word, normal_form, rewrite_word, Strategy,
};
use ckbench::suite::{
    cycle_graph, exact_supports, paths_from, random_colored_family, random_composable_word, random_graph, random_planted,
    random_word, shift_and_unitary_family,
};
use ckbench::verify::{check_full_ck, check_tck, commutant_dimension, Classification};
use ckbench::wold::{intertwining_defect, max_full_ck_subspace, wold_decompose};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn line(id: usize, name: &str, out: &Outcome, took: Duration) -> bool {
    println!(
        "[{}] {id}. {name}: {} ({:.1}s)",
        if out.pass { "PASS" } else { "FAIL" },
        out.detail,
        took.as_secs_f64()
    );
    out.pass
}

/// Graphs shared by the per-graph criteria.
fn suite_graphs() -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut out: Vec<Graph> = (1..=6).map(cycle_graph).collect();
    out.push(Graph::new(&["v"], &[("e", "v", "v"), ("f", "v", "v")]).unwrap());
    out.push(Graph::new(&["u", "v"], &[("e", "u", "v")]).unwrap());
    while out.len() < 40 {
        let g = random_graph(&mut rng, 5, 7);
        let fock: usize = g.vertices().map(|v| paths_from(&g, v, 6)).sum();
        if fock <= 300 {
            out.push(g);
        }
    }
    out
}

fn wold_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut max_dim = 0;
    for k in 0..200 {
        let planted = random_planted(&mut rng, 6, 10, 5, 3, 160);
        max_dim = max_dim.max(planted.family.dim());
        let w = match wold_decompose(&planted.family) {
            Ok(w) => w,
            Err(e) => {
                failures.push(format!("#{k}: {e}"));
                continue;
            }
        };
        for &(v, a) in &planted.alphas {
            if w.multiplicity(v) != a {
                failures.push(format!("#{k}: alpha({}) = {} expected {a}", v.0, w.multiplicity(v)));
            }
        }
        let x = adjoint(&w.complement) * &planted.exact_columns;
        if x.nrows() != x.ncols() {
            failures.push(format!("#{k}: complement dim {} vs planted {}", x.nrows(), x.ncols()));
            continue;
        }
        if let Some(exact) = &planted.exact {
            let unit = orthonormality_defect(&x);
            let d = intertwining_defect(&w.complement_family, exact, &x).unwrap();
            worst = worst.max(d).max(unit);
        }
    }
    let pass = failures.is_empty() && worst <= 1e-8;
    Outcome {
        pass,
        detail: format!(
            "200 planted families (dim <= {max_dim}), {} mismatches, complement intertwining defect {worst:.2e}{}",
            failures.len(),
            failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    }
}

fn pi_v_checks(graphs: &[Graph]) -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for (k, g) in graphs.iter().enumerate() {
        for v in g.receivers() {
            let f = build_pi_v(g, v, 5).unwrap();
            let r = check_tck(&f);
            for c in &r.colors {
                for vd in c.vertices.iter().filter(|x| x.received) {
                    let at_v = vd.vertex == g.vertex_name(v);
                    let ok = if at_v {
                        vd.defect_rank == 1
                    } else {
                        vd.defect_rank == 0 && vd.defect_norm <= 1e-9
                    };
                    if !ok {
                        bad.push(format!("graph {k} pi_{}: {} rank {}", g.vertex_name(v), vd.vertex, vd.defect_rank));
                    }
                }
            }
            checked += 1;
        }
    }
    let mut commutants = Vec::new();
    for len in 1..=6 {
        let f = build_cycle_exact(&cycle_graph(len)).unwrap();
        commutants.push(commutant_dimension(&f).unwrap());
    }
    let pass = bad.is_empty() && commutants.iter().all(|&c| c == 1);
    Outcome {
        pass,
        detail: format!(
            "{checked} pi_v families, {} defect mismatches, cycle commutants {commutants:?}",
            bad.len()
        ),
    }
}

fn dilation_compression() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_defect: f64 = 0.0;
    let mut worst_comp: f64 = 0.0;
    let mut errors = Vec::new();
    let mut degree_ok = true;
    let mut k = 0;
    while k < 100 {
        let planted = random_planted(&mut rng, 4, 5, 6, 2, 90);
        let g = planted.family.graph();
        let symbols = enumerate_backward_basis(g, &select_tails(g), 6).map_or(usize::MAX, |b| b.len());
        if symbols > 600 {
            continue;
        }
        k += 1;
        match full_ck_dilation(&planted.family, 6) {
            Ok((dil, cert)) => {
                degree_ok &= cert.max_degree >= 3;
                worst_comp = worst_comp.max(cert.compression_error);
                worst_defect = worst_defect.max(check_full_ck(&dil).max_defect());
            }
            Err(e) => errors.push(format!("#{k}: {e}")),
        }
    }
    Outcome {
        pass: errors.is_empty() && degree_ok && worst_defect <= 1e-9 && worst_comp <= 1e-9,
        detail: format!(
            "100 families at N = 6: max interior defect {worst_defect:.2e}, max compression error {worst_comp:.2e} (degree <= 3), {} errors",
            errors.len()
        ),
    }
}

fn maximality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut full = 0;
    while full < 50 {
        let fam = if full % 2 == 0 {
            let len = rng.random_range(1..=4);
            let f = build_cycle_exact(&cycle_graph(len)).unwrap();
            let u = random_unitary(f.dim(), &mut rng);
            f.conjugate(&u).unwrap()
        } else {
            let g = random_graph(&mut rng, 4, 6);
            let supports = exact_supports(&g);
            let Some(s) = supports.first() else { continue };
            let m = rng.random_range(1..=2);
            let f = build_exact_block(&g, s, m, Some(&mut rng)).unwrap();
            let u = random_unitary(f.dim(), &mut rng);
            f.conjugate(&u).unwrap()
        };
        let (dil, j) = random_tck_dilation(&fam, 2, &mut rng).unwrap();
        assert_ne!(check_tck(&dil).classification, Classification::Invalid);
        for (_, low, up) in corner_norms(&dil, &j) {
            worst = worst.max(low).max(up);
        }
        full += 1;
    }
    let mut singular = 0;
    let mut weakest = f64::INFINITY;
    let mut errors = Vec::new();
    while singular < 50 {
        let planted = random_planted(&mut rng, 3, 4, 2, 1, 30);
        let Some(&(v, _)) = planted.alphas.iter().find(|(_, a)| *a > 0) else { continue };
        let fam = &planted.family;
        let m = required_inflation(fam, v, 2).unwrap();
        if m * fam.dim() > 300 {
            continue;
        }
        match one_step_dilation(fam, v, m, 2) {
            Ok((dil, cert)) => {
                let g = fam.graph();
                let best = corner_norms(&dil, &cert.embedding)
                    .into_iter()
                    .filter(|(e, _, _)| g.rng(*e) == v)
                    .map(|(_, _, up)| up)
                    .fold(0.0, f64::max);
                weakest = weakest.min(best);
                if check_tck(&dil).classification == Classification::Invalid {
                    errors.push("dilation not TCK".to_string());
                }
            }
            Err(e) => errors.push(e.to_string()),
        }
        singular += 1;
    }
    Outcome {
        pass: worst <= 1e-9 && weakest >= 0.5 && errors.is_empty(),
        detail: format!(
            "50 full-CK inputs: max corner {worst:.2e}; 50 singular inputs: min corner into v {weakest:.3}, {} errors",
            errors.len()
        ),
    }
}

fn gauge(graphs: &[Graph]) -> Outcome {
    let mut worst_q: f64 = 0.0;
    let mut worst_t: f64 = 0.0;
    for g in graphs {
        let tails = select_tails(g);
        let basis = enumerate_backward_basis(g, &tails, 4).unwrap();
        let rho = rho_on_basis(g, &basis).unwrap();
        let inside = as_coordinate_projection(rho.interior()).expect("coordinate interior");
        for k in 0..16 {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.37) / 16.0;
            let z = Complex64::from_polar(1.0, theta);
            let u = gauge_unitary(&basis, z).unwrap();
            for v in g.vertices() {
                worst_q = worst_q.max(op_norm(&(u.conjugate(rho.p(v)) - rho.p(v))));
            }
            for e in g.edge_ids() {
                let t = rho.s(e);
                let lhs = u.conjugate(t) - t * z;
                let masked = select_columns(&select_columns(&lhs, &inside).transpose(), &inside);
                worst_t = worst_t.max(op_norm(&masked));
            }
        }
    }
    Outcome {
        pass: worst_q == 0.0 && worst_t <= 1e-12,
        detail: format!(
            "{} graphs x 16 samples: projections {worst_q:.1e}, edges {worst_t:.2e}",
            graphs.len()
        ),
    }
}

fn norm_agreement() -> Outcome {
    let g = Graph::new(&["v"], &[("e", "v", "v")]).unwrap();
    let v = VertexId(0);
    let e = ckbench::graph::EdgeId(0);
    let mut rows = Vec::new();
    for n in [8, 16, 32, 64] {
        let fock = build_fock(&g, n).unwrap();
        let f1 = op_norm(&(fock.p(v) + fock.s(e)));
        let rho = rho_on_basis(&g, &enumerate_backward_basis(&g, &select_tails(&g), n).unwrap()).unwrap();
        let f2 = op_norm(&(rho.p(v) + rho.s(e)));
        rows.push((n, f1, f2, (f1 - f2).abs()));
    }
    let last = rows.last().unwrap();
    let close = (last.1 - 2.0).abs() <= 0.1 && (last.2 - 2.0).abs() <= 0.1;
    let monotone = rows.windows(2).all(|w| w[1].3 < w[0].3);
    let table: Vec<String> = rows
        .iter()
        .map(|(n, a, b, gap)| format!("N={n}: {a:.6}/{b:.6} gap {gap:.2e}"))
        .collect();
    Outcome {
        pass: close && monotone,
        detail: format!("Fock/backward norms of p_v + s_e: {}", table.join(", ")),
    }
}

fn rewriting(graphs: &[Graph]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 6;
    let focks: Vec<_> = graphs.iter().map(|g| build_fock(g, n).unwrap()).collect();
    let bases: Vec<_> = graphs.iter().map(|g| enumerate_paths(g, n).unwrap()).collect();
    let mut worst: f64 = 0.0;
    let mut symbolic_bad = 0;
    let mut step_bad = 0;
    let mut nonzero = 0;
    for k in 0..1000 {
        let gi = rng.random_range(0..graphs.len());
        let g = Arc::new(graphs[gi].clone());
        let word = if k % 2 == 0 {
            random_composable_word(&mut rng, &g, 8)
        } else {
            random_word(&mut rng, &g, 6)
        };
        for strategy in [Strategy::Leftmost, Strategy::Rightmost] {
            let r = rewrite_word(&g, &word, strategy).unwrap();
            if r.steps >= word.len().max(2) {
                step_bad += 1;
            }
        }
        let nf = normal_form(&g, &word).unwrap();
        if !nf.is_zero() {
            nonzero += 1;
        }
        let fock = &focks[gi];
        let direct = evaluate_word(&word, fock).unwrap();
        let via = nf.evaluate(fock).unwrap();
        let safe = n.saturating_sub(climb(&word));
        for (j, lambda) in bases[gi].paths().iter().enumerate() {
            let want = fock_action_word(&g, &word, lambda);
            let got = nf.fock_action(lambda);
            let agree = match &want {
                None => got.is_empty(),
                Some(p) => got.len() == 1 && got.get(p).is_some_and(|c| (*c - Complex64::new(1.0, 0.0)).norm() < 1e-15),
            };
            if !agree {
                symbolic_bad += 1;
            }
            if lambda.len() <= safe {
                worst = worst.max((direct.column(j) - via.column(j)).norm());
            }
        }
    }
    Outcome {
        pass: worst <= 1e-10 && symbolic_bad == 0 && step_bad == 0,
        detail: format!(
            "1000 words ({nonzero} nonzero): matrix gap on safe domain {worst:.2e}, symbolic mismatches {symbolic_bad}, step-bound violations {step_bad}"
        ),
    }
}

fn colored_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_defect: f64 = 0.0;
    let mut worst_comp: f64 = 0.0;
    let mut partial = 0;
    let mut worst_reducing: f64 = 0.0;
    let mut worst_sub_defect: f64 = 0.0;
    let mut complement_bad = 0;
    let mut errors = Vec::new();
    for k in 0..50 {
        let fam = if k % 2 == 0 {
            random_colored_family(&mut rng, 4, 6, 3)
        } else {
            let n = rng.random_range(2..=5);
            shift_and_unitary_family(&mut rng, n).unwrap()
        };
        match colored_full_ck_dilation(&fam, 4) {
            Ok((dil, cert)) => {
                worst_comp = worst_comp.max(cert.compression_error);
                if cert.complete {
                    worst_defect = worst_defect.max(cert.max_defect);
                } else {
                    partial += 1;
                }
                for c in dil.graph().colors() {
                    worst_defect = worst_defect.max(if cert.complete {
                        check_full_ck(&dil.color_view(c)).max_defect()
                    } else {
                        0.0
                    });
                }
            }
            Err(e) => errors.push(format!("#{k}: {e}")),
        }
        match max_full_ck_subspace(&fam) {
            Ok(m) => {
                worst_reducing = worst_reducing.max(m.reducing_defect);
                if m.subspace.ncols() > 0 {
                    worst_reducing = worst_reducing.max(reducing_defect(&fam, &m.subspace).1);
                    for c in fam.graph().colors() {
                        worst_sub_defect = worst_sub_defect.max(check_full_ck(&m.family.color_view(c)).max_defect());
                    }
                }
                let comp = orthogonal_complement(fam.dim(), &m.subspace);
                if comp.ncols() > 0 {
                    let rest = compress(&fam, &comp);
                    match max_full_ck_subspace(&rest) {
                        Ok(r) if r.subspace.ncols() == 0 => {}
                        _ => complement_bad += 1,
                    }
                }
            }
            Err(e) => errors.push(format!("#{k} max subspace: {e}")),
        }
    }
    Outcome {
        pass: errors.is_empty()
            && worst_defect <= 1e-9
            && worst_comp <= 1e-9
            && worst_reducing <= 1e-9
            && worst_sub_defect <= 1e-9
            && complement_bad == 0,
        detail: format!(
            "50 two-colored families: dilation defect {worst_defect:.2e} ({partial} partial), compression {worst_comp:.2e}; \
             max subspace reducing {worst_reducing:.2e}, per-color defect {worst_sub_defect:.2e}, nontrivial complements {complement_bad}, {} errors",
            errors.len()
        ),
    }
}

/// `CKBENCH_CRITERIA=1,3` runs a subset; all criteria run by default.
fn selected(id: usize) -> bool {
    match std::env::var("CKBENCH_CRITERIA") {
        Ok(list) => list.split(',').any(|x| x.trim() == id.to_string()),
        Err(_) => true,
    }
}

fn main() {
    let graphs = suite_graphs();
    let limits = [120, 0, 300, 0, 0, 0, 0, 0];
    let checks: [(&str, &dyn Fn() -> Outcome); 8] = [
        ("Wold recovery", &wold_recovery),
        ("pi_v defects and commutant", &|| pi_v_checks(&graphs)),
        ("full-CK dilation compression", &dilation_compression),
        ("maximality of full-CK families", &maximality),
        ("gauge covariance", &|| gauge(&graphs)),
        ("norm agreement", &norm_agreement),
        ("rewriting soundness", &|| rewriting(&graphs)),
        ("colored suite", &colored_suite),
    ];
    let mut all = true;
    for (i, (name, check)) in checks.iter().enumerate() {
        if !selected(i + 1) {
            continue;
        }
        let t = Instant::now();
        let mut o = check();
        let took = t.elapsed();
        if limits[i] > 0 && took > Duration::from_secs(limits[i]) {
            o.pass = false;
            o.detail.push_str(&format!("; over the {}s budget", limits[i]));
        }
        all &= line(i + 1, name, &o, took);
    }
    if !all {
        eprintln!("some acceptance criteria failed");
        std::process::exit(1);
    }
}
