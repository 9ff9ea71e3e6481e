//! Mutation plans on Gr(3, n) and their lifts.

use std::collections::HashSet;

use matchfield::combinat::*;
use matchfield::mutation::*;
use matchfield::polytope::{full_dim_volume, matching_field_polytope, matching_field_vertices};
use num_traits::Signed;
use proptest::prelude::*;

fn f(k: usize, n: usize, i: usize, j: usize) -> usize {
    (i - 1) * (n - k) + (j - 1)
}

fn unit(k: usize, n: usize, entries: &[(usize, usize)]) -> Vec<i64> {
    let mut v = vec![0i64; target_dim(k, n)];
    for &(i, j) in entries {
        v[f(k, n, i, j)] += 1;
    }
    v
}

// the vertex of a tableau (i, j, c) as a 3×n 0/1 matrix
fn tableau_vertex(n: usize, rows: &[usize]) -> Vec<i64> {
    let mut v = vec![0i64; rows.len() * n];
    for (r, &c) in rows.iter().enumerate() {
        v[r * n + c - 1] = 1;
    }
    v
}

// The +1 class, written out case by case.
fn a_set(l: usize, m: usize, i: usize, j: usize) -> bool {
    let cases = [l < i && i < m && m < j, j < l && l < i && i < m, i < m && m < j && j < l, m < j && j < l && l < i];
    cases.iter().any(|&c| c)
}

fn expected_pairing(l: usize, m: usize, reversed: bool, i: usize, j: usize) -> i64 {
    let minus = if reversed { (m, l) } else { (l, m) };
    if (i, j) == minus {
        -1
    } else if a_set(l, m, i, j) {
        1
    } else {
        0
    }
}

fn run_points(p: &Plan, start: &[Vec<i64>]) -> Vec<Vec<i64>> {
    p.steps.iter().fold(start.to_vec(), |cur, s| cur.iter().map(|u| s.apply(u)).collect())
}

fn projected(field: &MatchingField, kind: ProjKind) -> Vec<Vec<i64>> {
    let pr = projection(kind, field.k(), field.n()).unwrap();
    matching_field_vertices(field).iter().map(|v| pr.apply(v)).collect()
}

#[test]
fn projection_examples() {
    let p = projection(ProjKind::Pi0, 3, 5).unwrap();
    assert_eq!(p.apply(&tableau_vertex(5, &[1, 2, 5])), vec![0; 6]);
    assert_eq!(p.apply(&tableau_vertex(5, &[1, 2, 4])), unit(3, 5, &[(3, 2)]));
    assert_eq!(p.apply(&tableau_vertex(5, &[1, 2, 3])), unit(3, 5, &[(3, 1)]));
    // rows past the third on Gr(5, 8) slide diagonally
    let p = projection(ProjKind::Block(2), 5, 8).unwrap();
    for j in 1..=3 {
        let col = (5 - 1) * 8 + (j + 4) - 1;
        let hit: Vec<usize> = (0..p.rows()).filter(|&r| p.matrix[r][col] == 1).collect();
        assert_eq!(hit, vec![f(5, 8, 5, j)]);
    }
    for col in [(5 - 1) * 8, (5 - 1) * 8 + 3, (5 - 1) * 8 + 7] {
        assert!((0..p.rows()).all(|r| p.matrix[r][col] == 0));
    }
}

#[test]
fn projections_are_full_dimensional_and_volume_preserving() {
    for (k, n) in [(3, 5), (3, 6), (4, 6)] {
        let np = n - k + 3;
        let mut stages = vec![(block_diagonal(k, n, 0).unwrap(), ProjKind::Pi0)];
        stages.push((block_diagonal(k, n, 1).unwrap(), ProjKind::Pi1End));
        stages.push((block_diagonal(k, n, 1).unwrap(), ProjKind::Pi1Start));
        for m in 2..=np - 2 {
            stages.push((block_diagonal(k, n, m).unwrap(), ProjKind::Block(m)));
        }
        let deg = matching_field_polytope(&block_diagonal(k, n, 0).unwrap()).normalized_volume().unwrap();
        for (field, kind) in stages {
            let pts = projected(&field, kind);
            assert_eq!(full_dim_volume(&pts, target_dim(k, n)).unwrap(), deg, "{k} {n} {kind}");
        }
    }
}

#[test]
fn tropical_data_examples() {
    let td = tropical_data(1, Lambda::Low(3), 3, 6).unwrap();
    let w: Vec<i64> = {
        let mut v = unit(3, 6, &[(1, 2)]);
        v[f(3, 6, 1, 1)] -= 1;
        v[f(3, 6, 2, 1)] -= 1;
        v
    };
    assert_eq!(td.w, w);
    let mut ft = vec![0i64; 9];
    ft[f(3, 6, 1, 1)] = -1;
    for mu in 2..=3 {
        ft[f(3, 6, 1, mu)] -= 1;
        ft[f(3, 6, 2, mu)] += 1;
    }
    assert_eq!(td.f_tilde, ft);

    // F_(3,1) on Gr(3,6): columns 1 and 3 of the 3×6 display read (0,−1,0)
    let td = tropical_data(3, Lambda::High(1), 3, 6).unwrap();
    let disp = {
        let mut m = vec![vec![0i64; 6]; 3];
        m[1][0] = -1;
        for c in 3..=6 {
            m[1][c - 1] = -1;
        }
        for c in 4..=6 {
            m[0][c - 1] = 1;
        }
        m
    };
    let proj = projection(ProjKind::Mid(3), 3, 6).unwrap();
    let flat: Vec<i64> = disp.concat();
    assert_eq!(td.f_tilde, proj.apply(&flat));
    let col = |c: usize| (disp[0][c - 1], disp[1][c - 1], disp[2][c - 1]);
    assert_eq!((col(1), col(3), col(2)), ((0, -1, 0), (0, -1, 0), (0, 0, 0)));
}

#[test]
fn every_tropical_pair_is_orthogonal_and_primitive() {
    for n in 5..=9 {
        let k = 3;
        for step in (1..=n - 2).flat_map(|l| plan(k, n, l - 1, l).unwrap().steps) {
            if let StepVariant::Tropical { data, .. } = &step.variant {
                assert!(data.is_orthogonal() && data.is_primitive(), "{n} {}", step.label);
                assert!(data.w.iter().any(|&x| x != 0));
            }
        }
    }
    assert!(tropical_data(1, Lambda::Low(2), 3, 6).is_err());
    assert!(tropical_data(3, Lambda::High(2), 3, 6).is_err());
}

#[test]
fn table_rows() {
    // (1, λ, k) under Π₀² maps to f_{1,λ−1} + f_{3,k−2}
    let (k, n) = (3, 7);
    let proj = projection(ProjKind::Pi0Sq, k, n).unwrap();
    for lam in 3..=n - 2 {
        let td = tropical_data(1, Lambda::Low(lam), k, n).unwrap();
        for c in lam + 1..=n {
            let u = proj.apply(&tableau_vertex(n, &[1, lam, c]));
            let mut want = unit(k, n, &[(1, lam - 1)]);
            if c - 2 <= n - k {
                want[f(k, n, 3, c - 2)] += 1;
            }
            assert_eq!(u, {
                let mut v = unit(k, n, &[(1, 1), (2, lam - 2)]);
                if c - 2 <= n - k {
                    v[f(k, n, 3, c - 2)] += 1;
                }
                v
            });
            assert_eq!(apply_tropical(&td, &u).unwrap(), want);
        }
    }
    // (2, λ, k) under Π₁³ maps to f_{1,λ−2} + f_{2,1} + f_{3,k−2}
    let proj = projection(ProjKind::Pi1Cube, k, n).unwrap();
    for lam in 4..n {
        let td = tropical_data(2, Lambda::Low(lam), k, n).unwrap();
        for c in lam + 1..=n {
            let u = proj.apply(&tableau_vertex(n, &[2, lam, c]));
            let third = |mut v: Vec<i64>| {
                if c - 2 <= n - k {
                    v[f(k, n, 3, c - 2)] += 1;
                }
                v
            };
            assert_eq!(u, third(unit(k, n, &[(2, lam - 2)])));
            assert_eq!(apply_tropical(&td, &u).unwrap(), third(unit(k, n, &[(1, lam - 2), (2, 1)])));
        }
    }
    // nonnegative pairings leave the point alone
    let td = tropical_data(2, Lambda::Low(4), k, n).unwrap();
    let u = unit(k, n, &[(3, 1)]);
    assert!(td.pairing(&u) >= 0);
    assert_eq!(apply_tropical(&td, &u).unwrap(), u);
}

#[test]
fn shear_examples() {
    let s = shear(2, 3, 3, 6).unwrap();
    assert_eq!(s.apply(&unit(3, 6, &[(2, 1)])), unit(3, 6, &[(2, 1), (1, 1)]));
    for (i, j) in [(1, 1), (1, 2), (2, 2), (3, 3)] {
        assert_eq!(s.apply(&unit(3, 6, &[(i, j)])), unit(3, 6, &[(i, j)]));
    }
    for n in 5..=8 {
        // Π₀²(1, n−1, n) = f_{1,1} + f_{2,n−3} ↦ f_{1,1}
        let pre = projection(ProjKind::Pi0Sq, 3, n).unwrap().apply(&tableau_vertex(n, &[1, n - 1, n]));
        assert_eq!(pre, unit(3, n, &[(1, 1), (2, n - 3)]));
        assert_eq!(shear(1, n - 1, 3, n).unwrap().apply(&pre), unit(3, n, &[(1, 1)]));
    }
}

#[test]
fn shears_and_relabels_are_unimodular() {
    for (k, n) in [(3, 5), (3, 6), (3, 7), (3, 8), (4, 7), (5, 8)] {
        let top = n + 1 - k;
        for step in plan(k, n, 0, top).unwrap().steps {
            match &step.variant {
                StepVariant::Shear(m) => {
                    assert!(m.is_single_column_unipotent(), "{}", step.label);
                    assert_eq!(m.determinant().unwrap().abs(), 1.into());
                }
                StepVariant::Relabel(m) => {
                    assert_eq!(m.determinant().unwrap().abs(), 1.into());
                    assert!(m.matrix.iter().all(|r| r.iter().filter(|&&x| x != 0).count() == 1));
                }
                StepVariant::Tropical { .. } => {}
            }
        }
    }
}

#[test]
fn plan_shapes() {
    let labels = |p: &Plan| p.steps.iter().map(|s| (s.kind(), s.label.clone())).collect::<Vec<_>>();
    assert_eq!(
        labels(&plan(3, 5, 0, 1).unwrap()),
        vec![("relabel", "phi_(1,2)".into()), ("tropical", "phi_(1,3)".into()), ("shear", "phi_(1,4)".into())]
    );
    assert_eq!(
        labels(&plan(3, 5, 1, 2).unwrap()),
        vec![("shear", "phi_(2,3)".into()), ("tropical", "phi_(2,4)".into()), ("relabel", "phi_(2,5)".into())]
    );
    let p = plan(3, 6, 2, 3).unwrap();
    let fields: Vec<String> = p.steps.iter().map(|s| s.target.field.to_string()).collect();
    assert_eq!(fields, vec!["B_2^4", "B_2^5", "B_2^7", "B_3"]);
    assert!(!fields.contains(&"B_2^6".to_string()));
    // the family's last member n + ℓ is B_{ℓ+1}
    assert_eq!(intermediate(3, 6, 2, 8).unwrap(), block_diagonal(3, 6, 3).unwrap());
    // Π₁ ends one chain and starts the next: joined by a relabelling
    let p = plan(3, 6, 0, 2).unwrap();
    assert!(p.steps.iter().any(|s| s.label == "Pi_1[end] -> Pi_1[start]"));
    assert_eq!(p.source().unwrap().field, FieldSpec::Block(0));
    assert_eq!(p.target().unwrap().field, FieldSpec::Block(2));
}

// Class rule checked directly on the projected tableau vertices.
#[test]
fn inner_product_classes() {
    for n in 5..=7 {
        let k = 3;
        for ell in 1..=n - 2 {
            for reversed in [false, true] {
                let p = if reversed { plan(k, n, ell, ell - 1) } else { plan(k, n, ell - 1, ell) }.unwrap();
                for step in &p.steps {
                    let StepVariant::Tropical { data, ell: l, lambda, reversed: rev } = &step.variant else { continue };
                    assert_eq!(*rev, reversed);
                    let lam = match lambda {
                        Lambda::Low(x) | Lambda::High(x) => *x,
                    };
                    let src = step.source.field.materialize(k, n).unwrap();
                    let proj = projection(step.source.projection, k, n).unwrap();
                    let mut minus = 0;
                    for t in src.tableaux() {
                        let u = proj.apply(&tableau_vertex(n, t.rows()));
                        let s = data.pairing(&u);
                        let (i, j) = (t.rows()[0], t.rows()[1]);
                        assert_eq!(s, expected_pairing(*l, lam, reversed, i, j), "n={n} {} {:?}", step.label, t.rows());
                        minus += usize::from(s == -1);
                    }
                    assert!(minus >= 1, "{}", step.label);
                }
            }
        }
    }
    // u = Π₀²(1,3,5) on the step (1,3)
    let td = tropical_data(1, Lambda::Low(3), 3, 5).unwrap();
    let u = projection(ProjKind::Pi0Sq, 3, 5).unwrap().apply(&tableau_vertex(5, &[1, 3, 5]));
    assert_eq!(td.pairing(&u), -1);
}

#[test]
fn chains_verify_up_to_seven() {
    for n in 5..=7 {
        for ell in 1..=n - 2 {
            let p = plan(3, n, ell - 1, ell).unwrap();
            let start = block_diagonal(3, n, ell - 1).unwrap();
            let opts = VerifyOptions { lattice_point_limit: 0, check_edges: true };
            for r in execute(&p, &start, &opts).unwrap() {
                assert!(r.passed, "n={n} ell={ell} {}: {:?}", r.label, r.failures);
                if r.kind == "tropical" {
                    assert!(r.classes_match);
                    assert_eq!(r.crossing_edges, 0);
                    assert_eq!(r.inner_product_classes.other, 0);
                    assert!(r.convexity_certified);
                }
            }
        }
    }
}

#[test]
fn volume_is_five_along_the_first_two_chains() {
    let p = plan(3, 5, 0, 2).unwrap();
    let reports = execute_and_verify(&p, &block_diagonal(3, 5, 0).unwrap()).unwrap();
    assert!(reports.iter().all(|r| r.volume_before == 5 && r.volume_after == 5));
    let last = projected(&block_diagonal(3, 5, 1).unwrap(), ProjKind::Pi1End);
    let p01 = plan(3, 5, 0, 1).unwrap();
    let got: HashSet<Vec<i64>> = run_points(&p01, &projected(&block_diagonal(3, 5, 0).unwrap(), ProjKind::Pi0)).into_iter().collect();
    assert_eq!(got, last.into_iter().collect());
}

#[test]
fn round_trips_return_to_the_start() {
    for (k, n, a, b) in [(3, 5, 0, 2), (3, 6, 1, 3), (3, 7, 0, 4), (4, 6, 0, 2)] {
        let fwd = plan(k, n, a, b).unwrap();
        let back = plan(k, n, b, a).unwrap();
        assert_eq!(back.steps.len(), fwd.steps.len());
        let start = projected(&block_diagonal(k, n, a).unwrap(), fwd.source().unwrap().projection);
        let there = run_points(&fwd, &start);
        let again = run_points(&back, &there);
        let s: HashSet<_> = start.iter().collect();
        assert_eq!(again.iter().collect::<HashSet<_>>(), s, "{k} {n} {a} {b}");
        let reports = execute_and_verify(&back, &block_diagonal(k, n, b).unwrap()).unwrap();
        assert!(reports.iter().all(|r| r.passed));
    }
}

#[test]
fn lifted_chains_keep_volume_and_vertex_count() {
    for (k, n, a, b) in [(4, 6, 0, 3), (4, 7, 0, 1), (5, 7, 0, 2)] {
        let p = plan(k, n, a, b).unwrap();
        let reports = execute_and_verify(&p, &block_diagonal(k, n, a).unwrap()).unwrap();
        let vol = reports[0].volume_before;
        for r in &reports {
            assert_eq!((r.vertices_before, r.vertices_after), (binomial(n, k), binomial(n, k)));
            assert_eq!((r.volume_before, r.volume_after), (vol, vol));
        }
    }
}

#[test]
fn wrong_start_is_rejected() {
    let p = plan(3, 5, 0, 1).unwrap();
    assert!(execute(&p, &block_diagonal(3, 5, 1).unwrap(), &VerifyOptions::default()).is_err());
    assert!(execute(&p, &block_diagonal(3, 6, 0).unwrap(), &VerifyOptions::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tropical_maps_are_invertible(n in 5usize..=9, seed in 0usize..1000, u in proptest::collection::vec(-4i64..=4, 18)) {
        let steps: Vec<MutationStep> = (1..=n - 2)
            .flat_map(|l| plan(3, n, l - 1, l).unwrap().steps)
            .filter(|s| s.kind() == "tropical")
            .collect();
        let s = &steps[seed % steps.len()];
        let StepVariant::Tropical { data, .. } = &s.variant else { unreachable!() };
        let u = &u[..target_dim(3, n)];
        let v = apply_tropical(data, u).unwrap();
        prop_assert_eq!(data.pairing(&v), data.pairing(u));
        prop_assert_eq!(apply_tropical(&data.inverse(), &v).unwrap(), u.to_vec());
    }

    #[test]
    fn linear_steps_invert(n in 5usize..=9, seed in 0usize..1000, u in proptest::collection::vec(-4i64..=4, 18)) {
        let maps: Vec<LinearMap> = plan(3, n, 0, n - 2)
            .unwrap()
            .steps
            .into_iter()
            .filter_map(|s| match s.variant {
                StepVariant::Shear(m) | StepVariant::Relabel(m) => Some(m),
                StepVariant::Tropical { .. } => None,
            })
            .collect();
        let m = &maps[seed % maps.len()];
        let u = &u[..target_dim(3, n)];
        prop_assert_eq!(m.inverse().unwrap().apply(&m.apply(u)), u.to_vec());
    }
}
