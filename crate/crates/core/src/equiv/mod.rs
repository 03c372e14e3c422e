//! SAT-based checking: bit-blasting, obligation discharge and miter
//! equivalence.

pub mod blast;
mod check;
pub mod sat;

use std::collections::HashMap;
use std::sync::Arc;

use crate::bvir::{Bits, ExprId, ExprPool, Plan};
pub use blast::Blaster;
pub use check::{
    bitblast, build_miter, check_equiv, check_equiv_seeded, check_obligations, check_obligations_seeded,
    confirm_with_oracle, format_cex, obligation_query, resolve_port_map, Counterexample, Miter, PortMap, Verdict,
    DEFAULT_SEED,
};
pub use sat::{Cnf, Lit, SolveResult, Solver};

pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// A CNF query asserting that `target` is true, with the free inputs it
/// mentions.
pub struct Query {
    pub cnf: Cnf,
    pub inputs: Vec<(Arc<str>, Vec<Lit>)>,
}

pub fn encode(pool: &ExprPool, defs: &HashMap<Arc<str>, ExprId>, target: ExprId) -> Query {
    assert_eq!(pool.width(target), 1, "query target must be a predicate");
    let mut b = Blaster::new(pool, defs);
    let t = b.blast(target)[0];
    b.cnf.add_clause(vec![t]);
    Query { inputs: b.inputs().to_vec(), cnf: b.cnf }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Search {
    /// Values for the free inputs that make the target true.
    Sat(HashMap<Arc<str>, Bits>),
    Unsat,
    Unknown,
}

/// Looks for an input assignment under which `target` evaluates to 1.
/// Models are replayed through the evaluator before they are returned.
pub fn find_model(
    pool: &ExprPool,
    defs: &HashMap<Arc<str>, ExprId>,
    target: ExprId,
    budget: u64,
    seed: u64,
) -> Search {
    let q = encode(pool, defs, target);
    match sat::solve(&q.cnf, budget, seed) {
        SolveResult::Unsat => Search::Unsat,
        SolveResult::Unknown => Search::Unknown,
        SolveResult::Sat(model) => {
            let mut env: HashMap<Arc<str>, Bits> = HashMap::new();
            for (name, lits) in &q.inputs {
                let mut v = Bits::zero(lits.len() as u32);
                for (i, l) in lits.iter().enumerate() {
                    if model[l.var() as usize] == l.is_positive() {
                        v.set_bit(i as u32, true);
                    }
                }
                env.insert(name.clone(), v);
            }
            let plan = Plan::new(pool, &[target], defs);
            let vals: HashMap<String, Bits> = plan
                .inputs()
                .iter()
                .map(|(n, w)| (n.to_string(), env.get(n).copied().unwrap_or_else(|| Bits::zero(*w))))
                .collect();
            let out = plan.run_env(&vals).expect("model covers every input");
            assert!(out[0].bit(0), "model does not satisfy the query under evaluation");
            for (n, w) in plan.inputs() {
                env.entry(n.clone()).or_insert_with(|| Bits::zero(*w));
            }
            Search::Sat(env)
        }
    }
}
