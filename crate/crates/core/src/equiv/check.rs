//! Obligation discharge and miter-based module equivalence.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use super::{encode, find_model, Query, Search};
use crate::bvir::{Bits, ExprId, ExprPool};
use crate::cfront::tast::TypedProgram;
use crate::diag::{Code, Diagnostic};
use crate::oracle::interpret;
use crate::semantics::{resolve_entry, ObligationKind, DEFAULT_FUEL};
use crate::symex::{SsaTrace, SymexOptions};
use crate::vemit::{lower_module_renamed, CompiledModule, VModule};

pub const DEFAULT_SEED: u64 = 1;

/// Input name to value, ordered for stable printing.
pub type Counterexample = BTreeMap<String, Bits>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails(Counterexample),
    /// The conflict budget ran out.
    Unknown,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Holds => "HOLDS",
            Verdict::Fails(_) => "FAILS",
            Verdict::Unknown => "UNKNOWN",
        }
    }
}

/// Renders a counterexample as `name=0xHEX` pairs.
pub fn format_cex(cex: &Counterexample) -> String {
    cex.iter().map(|(n, v)| format!("{n}=0x{}", v.to_hex())).collect::<Vec<_>>().join(" ")
}

/// Bit-blasts a width-1 expression together with its defining equations.
pub fn bitblast(pool: &ExprPool, defs: &HashMap<Arc<str>, ExprId>, e: ExprId) -> Result<Query, Diagnostic> {
    if pool.width(e) != 1 {
        return Err(Diagnostic::bare(Code::Width, format!("cannot blast a {}-bit expression as a query", pool.width(e))));
    }
    Ok(encode(pool, defs, e))
}

/// The query `guard && !claim` for obligation `index`.
pub fn obligation_query(trace: &SsaTrace, index: usize) -> (ExprPool, ExprId) {
    let o = &trace.obligations[index];
    let mut pool = trace.pool.clone();
    let bad = pool.not(o.claim);
    let target = pool.and(o.guard, bad);
    (pool, target)
}

fn full_vector(names: impl Iterator<Item = (String, u32)>, model: &HashMap<Arc<str>, Bits>) -> Counterexample {
    names.map(|(n, w)| (n.clone(), model.get(n.as_str()).copied().unwrap_or_else(|| Bits::zero(w)))).collect()
}

/// Decides every obligation of `trace` by refuting `guard && !claim`.
/// Counterexamples bind every interface input and have been replayed
/// through the trace evaluator.
pub fn check_obligations(trace: &SsaTrace, budget: u64) -> Vec<Verdict> {
    check_obligations_seeded(trace, budget, DEFAULT_SEED)
}

pub fn check_obligations_seeded(trace: &SsaTrace, budget: u64, seed: u64) -> Vec<Verdict> {
    let defs = trace.defs();
    let ev = trace.evaluator();
    (0..trace.obligations.len())
        .map(|i| {
            let (pool, target) = obligation_query(trace, i);
            if pool.is_false(target) {
                return Verdict::Holds;
            }
            match find_model(&pool, &defs, target, budget, seed) {
                Search::Unsat => Verdict::Holds,
                Search::Unknown => Verdict::Unknown,
                Search::Sat(model) => {
                    let cex =
                        full_vector(trace.interface.inputs.iter().map(|p| (p.name.clone(), p.width)), &model);
                    let env: HashMap<String, Bits> = cex.clone().into_iter().collect();
                    let v = ev.run(&env).expect("counterexample binds every input");
                    assert!(v.violated[i], "counterexample does not violate obligation {i} under evaluation");
                    Verdict::Fails(cex)
                }
            }
        })
        .collect()
}

/// Replays a counterexample through the concrete interpreter and reports
/// whether it sees the same failure.
pub fn confirm_with_oracle(
    prog: &TypedProgram,
    entry: Option<&str>,
    trace: &SsaTrace,
    index: usize,
    cex: &Counterexample,
    opts: &SymexOptions,
) -> Result<bool, Diagnostic> {
    let id = resolve_entry(prog, entry)?;
    let env: HashMap<String, Bits> = cex.clone().into_iter().collect();
    let out = interpret(prog, id, &env, DEFAULT_FUEL)?;
    let o = &trace.obligations[index];
    Ok(match o.kind {
        ObligationKind::UserAssert => out.asserts.iter().any(|a| a.loc == o.loc && !a.held),
        ObligationKind::Unwinding => {
            let id = o.loop_id.as_deref().unwrap_or_default();
            let bound = opts.unwind_overrides.get(id).copied().unwrap_or(opts.unwind);
            out.loop_iterations.get(id).is_some_and(|&n| n > bound as u64)
        }
        k => out.violations.iter().any(|(vk, vl)| *vk == k && *vl == o.loc),
    })
}

/// Pairs of (port of `a`, port of `b`).
pub type PortMap = Vec<(String, String)>;

fn mismatch(msg: String) -> Diagnostic {
    Diagnostic::bare(Code::PortMismatch, msg)
}

/// Completes `map` with same-name pairs for unmapped ports and checks
/// that it is a width-preserving bijection between the port lists.
pub fn resolve_port_map(a: &VModule, b: &VModule, map: &[(String, String)]) -> Result<PortMap, Diagnostic> {
    let mut pairs: PortMap = map.to_vec();
    let mapped_a: HashSet<&str> = map.iter().map(|p| p.0.as_str()).collect();
    let mapped_b: HashSet<&str> = map.iter().map(|p| p.1.as_str()).collect();
    for p in &a.ports {
        if !mapped_a.contains(p.name.as_str()) && !mapped_b.contains(p.name.as_str()) {
            pairs.push((p.name.clone(), p.name.clone()));
        }
    }
    let (mut seen_a, mut seen_b) = (HashSet::new(), HashSet::new());
    for (pa, pb) in &pairs {
        let xa = a.ports.iter().find(|p| &p.name == pa).ok_or_else(|| mismatch(format!("'{}' has no port '{pa}'", a.name)))?;
        let xb = b.ports.iter().find(|p| &p.name == pb).ok_or_else(|| mismatch(format!("'{}' has no port '{pb}'", b.name)))?;
        if xa.dir != xb.dir {
            return Err(mismatch(format!("'{pa}' and '{pb}' have different directions")));
        }
        if xa.width != xb.width {
            return Err(mismatch(format!("'{pa}' is {} bits but '{pb}' is {} bits", xa.width, xb.width)));
        }
        if !seen_a.insert(pa.as_str()) || !seen_b.insert(pb.as_str()) {
            return Err(mismatch(format!("port pair '{pa}'/'{pb}' maps a port twice")));
        }
    }
    if let Some(p) = a.ports.iter().find(|p| !seen_a.contains(p.name.as_str())) {
        return Err(mismatch(format!("port '{}' of '{}' is not mapped", p.name, a.name)));
    }
    if let Some(p) = b.ports.iter().find(|p| !seen_b.contains(p.name.as_str())) {
        return Err(mismatch(format!("port '{}' of '{}' is not mapped", p.name, b.name)));
    }
    Ok(pairs)
}

/// A miter over two modules: true exactly when some mapped output pair
/// differs. Inputs carry the names of `a`'s ports.
pub struct Miter {
    pub pool: ExprPool,
    pub target: ExprId,
    pub inputs: Vec<(String, u32)>,
    pub map: PortMap,
}

pub fn build_miter(a: &VModule, b: &VModule, map: &[(String, String)]) -> Result<Miter, Diagnostic> {
    let map = resolve_port_map(a, b, map)?;
    let mut pool = ExprPool::new();
    let la = lower_module_renamed(a, &mut pool, &HashMap::new())?;
    let rename: HashMap<String, String> = map.iter().map(|(pa, pb)| (pb.clone(), pa.clone())).collect();
    let lb = lower_module_renamed(b, &mut pool, &rename)?;
    let mut target = pool.fals();
    for (pa, pb) in &map {
        let (Some(oa), Some(ob)) =
            (la.outputs.iter().find(|o| &o.0 == pa), lb.outputs.iter().find(|o| &o.0 == pb))
        else {
            continue;
        };
        let diff = pool.ne(oa.1, ob.1);
        target = pool.or(target, diff);
    }
    Ok(Miter { pool, target, inputs: la.inputs, map })
}

/// Combinational equivalence of two modules under a port map; unmapped
/// ports pair up by name.
pub fn check_equiv(a: &VModule, b: &VModule, map: &[(String, String)], budget: u64) -> Result<Verdict, Diagnostic> {
    check_equiv_seeded(a, b, map, budget, DEFAULT_SEED)
}

pub fn check_equiv_seeded(
    a: &VModule,
    b: &VModule,
    map: &[(String, String)],
    budget: u64,
    seed: u64,
) -> Result<Verdict, Diagnostic> {
    let miter = build_miter(a, b, map)?;
    if miter.pool.is_false(miter.target) {
        return Ok(Verdict::Holds);
    }
    Ok(match find_model(&miter.pool, &HashMap::new(), miter.target, budget, seed) {
        Search::Unsat => Verdict::Holds,
        Search::Unknown => Verdict::Unknown,
        Search::Sat(model) => {
            let cex = full_vector(miter.inputs.iter().cloned(), &model);
            let env_a: HashMap<String, Bits> = cex.clone().into_iter().collect();
            let env_b: HashMap<String, Bits> =
                miter.map.iter().filter_map(|(pa, pb)| cex.get(pa).map(|v| (pb.clone(), *v))).collect();
            let va = CompiledModule::new(a)?.run(&env_a)?;
            let vb = CompiledModule::new(b)?.run(&env_b)?;
            let out_a: Vec<&str> = a.outputs().map(|p| p.name.as_str()).collect();
            let out_b: Vec<&str> = b.outputs().map(|p| p.name.as_str()).collect();
            let differs = miter.map.iter().any(|(pa, pb)| {
                match (out_a.iter().position(|n| n == pa), out_b.iter().position(|n| n == pb)) {
                    (Some(i), Some(j)) => va.outputs[i] != vb.outputs[j],
                    _ => false,
                }
            });
            assert!(differs, "equivalence counterexample does not separate the modules");
            Verdict::Fails(cex)
        }
    })
}
