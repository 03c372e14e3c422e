use std::collections::HashMap;
use std::sync::Arc;

use c2rtl::bvir::{eval, BinOp, Bits, ExprId, ExprPool, Op};
use c2rtl::equiv::{find_model, sat, Blaster, Cnf, Lit, Search, SolveResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pigeonhole(p: u32, h: u32) -> Cnf {
    let mut cnf = Cnf::new();
    let var = |i: u32, j: u32| Lit::new(i * h + j, true);
    for _ in 0..p * h {
        cnf.new_var();
    }
    for i in 0..p {
        cnf.add_clause((0..h).map(|j| var(i, j)).collect::<Vec<_>>());
    }
    for j in 0..h {
        for a in 0..p {
            for b in a + 1..p {
                cnf.add_clause(vec![!var(a, j), !var(b, j)]);
            }
        }
    }
    cnf
}

#[test]
fn pigeonhole_is_unsat() {
    for (p, h) in [(3, 2), (4, 3), (5, 4), (6, 5)] {
        assert_eq!(sat::solve(&pigeonhole(p, h), 1_000_000, 3), SolveResult::Unsat, "php({p},{h})");
    }
    assert!(matches!(sat::solve(&pigeonhole(5, 5), 1_000_000, 3), SolveResult::Sat(_)));
}

fn random_3sat(rng: &mut ChaCha8Rng, n: u32, m: usize) -> Cnf {
    let mut cnf = Cnf::new();
    for _ in 0..n {
        cnf.new_var();
    }
    for _ in 0..m {
        let c: Vec<Lit> = (0..3).map(|_| Lit::new(rng.gen_range(0..n), rng.gen())).collect();
        cnf.add_clause(c);
    }
    cnf
}

fn brute_force_sat(cnf: &Cnf) -> bool {
    let n = cnf.num_vars;
    (0u64..1 << n).any(|m| {
        let model: Vec<bool> = (0..n).map(|i| m >> i & 1 == 1).collect();
        cnf.satisfied_by(&model)
    })
}

#[test]
fn random_3sat_agrees_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut sats, mut unsats) = (0, 0);
    for round in 0..300 {
        let n = rng.gen_range(3..=14);
        let m = (n as f64 * rng.gen_range(3.0..5.5)) as usize;
        let cnf = random_3sat(&mut rng, n, m);
        let expect = brute_force_sat(&cnf);
        match sat::solve(&cnf, 1_000_000, round) {
            SolveResult::Sat(model) => {
                assert!(expect, "round {round}: solver says sat, enumeration says unsat");
                assert!(cnf.satisfied_by(&model));
                sats += 1;
            }
            SolveResult::Unsat => {
                assert!(!expect, "round {round}: solver says unsat, enumeration found a model");
                unsats += 1;
            }
            SolveResult::Unknown => panic!("budget exhausted on a tiny instance"),
        }
    }
    assert!(sats > 20 && unsats > 20, "{sats} sat / {unsats} unsat");
}

#[test]
fn twenty_variable_instances_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for round in 0..6 {
        let cnf = random_3sat(&mut rng, 20, 86);
        let expect = brute_force_sat(&cnf);
        let got = sat::solve(&cnf, 1_000_000, round);
        assert_eq!(matches!(got, SolveResult::Sat(_)), expect);
    }
}

#[test]
fn larger_random_instances_yield_valid_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for round in 0..20 {
        let cnf = random_3sat(&mut rng, 150, 600);
        if let SolveResult::Sat(model) = sat::solve(&cnf, 2_000_000, round) {
            assert!(cnf.satisfied_by(&model));
        }
    }
}

#[test]
fn dimacs_round_trip_preserves_result() {
    let cnf = pigeonhole(4, 3);
    let back = Cnf::from_dimacs(&cnf.to_dimacs()).unwrap();
    assert_eq!(back, cnf);
}

fn no_defs() -> HashMap<Arc<str>, ExprId> {
    HashMap::new()
}

/// For each operator at width 4: `op(x, y) == r` is satisfiable exactly for
/// the evaluator's result, and the model has the fixed operand values.
#[test]
fn blasted_operators_match_evaluator_exhaustively() {
    let w = 4;
    for op in BinOp::ALL {
        let mut p = ExprPool::new();
        let x = p.var("x", w);
        let y = p.var("y", w);
        let e = p.raw(Op::Bin(op, x, y), None).unwrap();
        let ow = p.width(e);
        let defs = no_defs();
        let mut b = Blaster::new(&p, &defs);
        let out = b.blast(e);
        let xs = b.blast(x);
        let ys = b.blast(y);
        let cnf = b.cnf.clone();
        for a in 0..16u64 {
            for c in 0..16u64 {
                let expect = op.apply(&Bits::from_u64(w, a), &Bits::from_u64(w, c));
                let mut s = sat::Solver::new(cnf.num_vars, 1);
                for cl in &cnf.clauses {
                    s.add_clause(cl);
                }
                for i in 0..w as usize {
                    s.add_clause(&[if a >> i & 1 == 1 { xs[i] } else { !xs[i] }]);
                    s.add_clause(&[if c >> i & 1 == 1 { ys[i] } else { !ys[i] }]);
                }
                let SolveResult::Sat(model) = s.solve(100_000) else {
                    panic!("{} {a} {c}: no model", op.name())
                };
                let mut got = Bits::zero(ow);
                for (i, l) in out.iter().enumerate() {
                    got.set_bit(i as u32, model[l.var() as usize] == l.is_positive());
                }
                assert_eq!(got, expect, "{} {a} {c}", op.name());
            }
        }
    }
}

#[test]
fn blasted_unary_and_structural_ops() {
    let mut p = ExprPool::new();
    let x = p.var("x", 6);
    let c = p.var("c", 1);
    let y = p.var("y", 6);
    let roots = vec![
        p.raw(Op::Neg(x), None).unwrap(),
        p.raw(Op::Not(x), None).unwrap(),
        p.raw(Op::Extract(4, 2, x), None).unwrap(),
        p.raw(Op::Concat(x, y), None).unwrap(),
        p.raw(Op::Zext(x), Some(9)).unwrap(),
        p.raw(Op::Sext(x), Some(9)).unwrap(),
        p.raw(Op::Ite(c, x, y), None).unwrap(),
    ];
    let defs = no_defs();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..40 {
        let env: HashMap<String, Bits> = [
            ("x".to_string(), Bits::from_u64(6, rng.gen())),
            ("y".to_string(), Bits::from_u64(6, rng.gen())),
            ("c".to_string(), Bits::from_u64(1, rng.gen())),
        ]
        .into_iter()
        .collect();
        for &r in &roots {
            let want = eval(&p, r, &env).unwrap();
            let mut q = p.clone();
            let mut conj = q.tru();
            for (n, v) in &env {
                let var = q.var(n, v.width());
                let k = q.constant(*v);
                let eqn = q.raw(Op::Bin(BinOp::Eq, var, k), None).unwrap();
                conj = q.raw(Op::Bin(BinOp::And, conj, eqn), None).unwrap();
            }
            let k = q.constant(want);
            let bad = q.raw(Op::Bin(BinOp::Eq, r, k), None).unwrap();
            let bad = q.raw(Op::Not(bad), None).unwrap();
            let target = q.raw(Op::Bin(BinOp::And, conj, bad), None).unwrap();
            assert_eq!(find_model(&q, &defs, target, 100_000, 0), Search::Unsat);
        }
    }
}

/// Model counts of random width-3 predicates equal brute-force counts.
#[test]
fn model_counts_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let defs = no_defs();
    for _ in 0..150 {
        let mut p = ExprPool::new();
        let x = p.var("x", 3);
        let y = p.var("y", 3);
        let mut cur = [x, y];
        for _ in 0..rng.gen_range(1..5) {
            let op = BinOp::ALL[rng.gen_range(0..13)];
            let a = cur[rng.gen_range(0..2)];
            let b = cur[rng.gen_range(0..2)];
            let e = p.raw(Op::Bin(op, a, b), None).unwrap();
            cur[rng.gen_range(0..2)] = e;
        }
        let pred = BinOp::ALL[13 + rng.gen_range(0..5)];
        let target = p.raw(Op::Bin(pred, cur[0], cur[1]), None).unwrap();

        let mut expect = 0;
        for a in 0..8u64 {
            for b in 0..8u64 {
                let env: HashMap<String, Bits> =
                    [("x".to_string(), Bits::from_u64(3, a)), ("y".to_string(), Bits::from_u64(3, b))].into();
                if eval(&p, target, &env).unwrap().bit(0) {
                    expect += 1;
                }
            }
        }

        let mut bl = Blaster::new(&p, &defs);
        let t = bl.blast(target)[0];
        let xs = bl.blast(x);
        let ys = bl.blast(y);
        bl.cnf.add_clause(vec![t]);
        let mut s = sat::Solver::new(bl.cnf.num_vars, 4);
        for cl in &bl.cnf.clauses {
            s.add_clause(cl);
        }
        let mut count = 0;
        while let SolveResult::Sat(m) = s.solve(100_000) {
            count += 1;
            let block: Vec<Lit> = xs
                .iter()
                .chain(&ys)
                .map(|l| if m[l.var() as usize] == l.is_positive() { !*l } else { *l })
                .collect();
            s.add_clause(&block);
            assert!(count <= 64);
        }
        assert_eq!(count, expect);
    }
}

#[test]
fn add_eq_example_has_single_solution() {
    let mut p = ExprPool::new();
    let x = p.var("x", 8);
    let ten = p.const_u64(8, 10);
    let y = p.add(x, ten);
    let k = p.const_u64(8, 13);
    let target = p.eq(y, k);
    match find_model(&p, &no_defs(), target, 1000, 0) {
        Search::Sat(m) => assert_eq!(m[&Arc::<str>::from("x")].to_u64(), 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn structurally_equal_circuits_share_literals() {
    let mut p = ExprPool::new();
    let a = p.var("a", 32);
    let b = p.var("b", 32);
    let k = p.const_u64(32, 0xdead_beef);
    let t = p.raw(Op::Bin(BinOp::Xor, b, k), None).unwrap();
    let b2 = p.raw(Op::Bin(BinOp::Xor, t, k), None).unwrap();
    let m1 = p.raw(Op::Bin(BinOp::Mul, a, b), None).unwrap();
    let m2 = p.raw(Op::Bin(BinOp::Mul, a, b2), None).unwrap();
    assert_ne!(m1, m2);
    let eq = p.raw(Op::Bin(BinOp::Eq, m1, m2), None).unwrap();
    let ne = p.raw(Op::Not(eq), None).unwrap();
    let defs = no_defs();
    let mut bl = Blaster::new(&p, &defs);
    assert_eq!(bl.blast(m1), bl.blast(m2));
    assert_eq!(find_model(&p, &defs, ne, 10, 0), Search::Unsat);
}
