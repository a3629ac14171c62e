use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use super::{multinomial, precondition, require_uniform, ExactConfig};
use crate::error::Result;
use crate::model::{Count, IncompleteDatabase, Term};
use crate::query::{Arg, ConjunctiveQuery};

/// Values that start with the same relations and are interchangeable.
struct Class {
    base: u32,
    size: u64,
    /// Final relation sets reachable from `base`.
    options: Vec<u32>,
    /// A query constant, which the query can see individually.
    constant: Option<String>,
}

/// Completion count on a uniform table whose relations are all unary, for a
/// query made of unary atoms. A completion is described by the set of
/// relations each value ends up in; the count enumerates how many values of
/// each class end up with each set and checks that the nulls can realise it.
pub fn count_comp_uniform_unary(db: &IncompleteDatabase, q: &ConjunctiveQuery, cfg: &ExactConfig) -> Result<Count> {
    let dom = require_uniform(db)?;
    if !q.is_self_join_free() || !q.is_boolean() {
        return Err(precondition("needs a Boolean self-join-free query"));
    }
    if q.atoms().iter().any(|a| a.args.len() != 1) {
        return Err(precondition("query atoms must be unary"));
    }
    let schema = db.schema();
    if let Some((r, k)) = schema.iter().find(|(_, &k)| k != 1) {
        return Err(precondition(format!(
            "relation {r} has arity {k}; all relations must be unary"
        )));
    }
    let rels: Vec<&String> = schema.keys().collect();
    if rels.len() > cfg.relation_cap {
        return Err(precondition(format!(
            "{} relations exceed the cap of {}",
            rels.len(),
            cfg.relation_cap
        )));
    }
    let bit = |r: &str| rels.iter().position(|x| x.as_str() == r).map(|i| 1u32 << i);
    // query: sets of relations a variable needs, and (constant, relation) pairs
    let mut var_needs: BTreeMap<&str, u32> = BTreeMap::new();
    let mut const_needs: BTreeMap<&str, u32> = BTreeMap::new();
    for a in q.atoms() {
        let Some(b) = bit(&a.relation) else {
            return Ok(Count::zero());
        };
        match &a.args[0] {
            Arg::Var(x) => *var_needs.entry(x).or_insert(0) |= b,
            Arg::Const(c) => *const_needs.entry(c).or_insert(0) |= b,
        }
    }
    let mut null_sig: BTreeMap<&str, u32> = BTreeMap::new();
    let mut const_sig: BTreeMap<&str, u32> = BTreeMap::new();
    for f in db.facts() {
        let b = bit(&f.relation).unwrap();
        match &f.args[0] {
            Term::Null(n) => *null_sig.entry(n).or_insert(0) |= b,
            Term::Const(c) => *const_sig.entry(c).or_insert(0) |= b,
        }
    }
    let mut blocks: BTreeMap<u32, u64> = BTreeMap::new();
    for s in null_sig.values() {
        *blocks.entry(*s).or_insert(0) += 1;
    }
    let reach = |base: u32| -> Vec<u32> {
        let full = (1u32 << rels.len()) - 1;
        (0..=full)
            .filter(|&f| {
                if f & base != base {
                    return false;
                }
                let cover = blocks.keys().filter(|&&s| s & f == s).fold(0, |a, s| a | s);
                (f & !base) & !cover == 0
            })
            .collect()
    };
    // outside-domain constants keep their relations
    let mut fixed: Vec<u32> = Vec::new();
    for (c, s) in &const_sig {
        if !dom.contains(*c) {
            fixed.push(*s);
        }
    }
    for (c, need) in &const_needs {
        if !dom.contains(*c) && const_sig.get(c).copied().unwrap_or(0) & need != *need {
            return Ok(Count::zero());
        }
    }
    let mut classes: Vec<Class> = Vec::new();
    let mut plain: BTreeMap<u32, u64> = BTreeMap::new();
    let mut used = 0u64;
    for v in dom {
        if !const_sig.contains_key(v.as_str()) && !const_needs.contains_key(v.as_str()) {
            continue;
        }
        used += 1;
        let base = const_sig.get(v.as_str()).copied().unwrap_or(0);
        if const_needs.contains_key(v.as_str()) {
            classes.push(Class {
                base,
                size: 1,
                options: reach(base),
                constant: Some(v.clone()),
            });
        } else {
            *plain.entry(base).or_insert(0) += 1;
        }
    }
    *plain.entry(0).or_insert(0) += dom.len() as u64 - used;
    for (base, size) in plain {
        if size > 0 {
            classes.push(Class {
                base,
                size,
                options: reach(base),
                constant: None,
            });
        }
    }
    let block_list: Vec<(u32, u64)> = blocks.into_iter().collect();
    let mut e = Enumerator {
        classes: &classes,
        blocks: &block_list,
        var_needs: var_needs.values().copied().collect(),
        const_needs: &const_needs,
        fixed: &fixed,
        nulls: null_sig.len() as u64,
        chosen: Vec::new(),
        covers: HashMap::new(),
    };
    Ok(e.run(0, Count::one(), 0))
}

struct Enumerator<'a> {
    classes: &'a [Class],
    blocks: &'a [(u32, u64)],
    var_needs: Vec<u32>,
    const_needs: &'a BTreeMap<&'a str, u32>,
    fixed: &'a [u32],
    nulls: u64,
    /// (class, final set, number of values)
    chosen: Vec<(usize, u32, u64)>,
    covers: HashMap<(u32, u32), Vec<u64>>,
}

impl Enumerator<'_> {
    /// Splits class `ci` onwards among their options. `needy` counts values
    /// whose final set is larger than their base, each of which uses a null.
    fn run(&mut self, ci: usize, weight: Count, needy: u64) -> Count {
        if ci == self.classes.len() {
            return if self.feasible() && self.satisfies() {
                weight
            } else {
                Count::zero()
            };
        }
        let classes = self.classes;
        let class = &classes[ci];
        let mut total = Count::zero();
        let mut parts = vec![0u64; class.options.len()];
        self.split(ci, 0, class.size, &mut parts, &weight, needy, &mut total);
        total
    }

    #[allow(clippy::too_many_arguments)]
    fn split(
        &mut self,
        ci: usize,
        oi: usize,
        left: u64,
        parts: &mut Vec<u64>,
        weight: &Count,
        needy: u64,
        total: &mut Count,
    ) {
        let classes = self.classes;
        let class = &classes[ci];
        let opts = class.options.len();
        if oi + 1 == opts {
            parts[oi] = left;
            let extra = if class.options[oi] != class.base { left } else { 0 };
            if needy + extra <= self.nulls {
                let before = self.chosen.len();
                for (i, &n) in parts.iter().enumerate() {
                    if n > 0 {
                        self.chosen.push((ci, class.options[i], n));
                    }
                }
                let w = weight * multinomial(parts);
                *total += self.run(ci + 1, w, needy + extra);
                self.chosen.truncate(before);
            }
            return;
        }
        for n in 0..=left {
            let extra = if class.options[oi] != class.base { n } else { 0 };
            if needy + extra > self.nulls {
                break;
            }
            parts[oi] = n;
            self.split(ci, oi + 1, left - n, parts, weight, needy + extra, total);
        }
        parts[oi] = 0;
    }

    fn satisfies(&self) -> bool {
        let finals = || self.chosen.iter().map(|&(_, f, _)| f).chain(self.fixed.iter().copied());
        if !self.var_needs.iter().all(|&b| finals().any(|f| f & b == b)) {
            return false;
        }
        self.chosen.iter().all(|&(ci, f, _)| match &self.classes[ci].constant {
            Some(c) => {
                let need = self.const_needs[c.as_str()];
                f & need == need
            }
            None => true,
        })
    }

    fn feasible(&mut self) -> bool {
        // every null lands on some value
        for &(s, _) in self.blocks {
            if !self.chosen.iter().any(|&(_, f, _)| f & s == s) {
                return false;
            }
        }
        let needy: Vec<(u32, u32, u64)> = self
            .chosen
            .iter()
            .filter(|&&(ci, f, _)| f != self.classes[ci].base)
            .map(|&(ci, f, n)| (self.classes[ci].base, f, n))
            .collect();
        let caps: Vec<u64> = self.blocks.iter().map(|&(_, n)| n).collect();
        let mut memo = HashMap::new();
        let mut groups = Vec::new();
        for &(base, f, n) in &needy {
            let covers = self.minimal_covers(base, f).clone();
            groups.push((covers, n));
        }
        assign(&groups, 0, 0, groups.first().map_or(0, |g| g.1), caps, &mut memo)
    }

    /// Minimal sets of blocks (as bitmasks over `blocks`) whose signatures fit
    /// inside `f` and together add everything `f` has beyond `base`.
    fn minimal_covers(&mut self, base: u32, f: u32) -> &Vec<u64> {
        let blocks = self.blocks;
        self.covers.entry((base, f)).or_insert_with(|| {
            let usable: Vec<usize> = (0..blocks.len()).filter(|&i| blocks[i].0 & f == blocks[i].0).collect();
            let need = f & !base;
            let mut found: Vec<u64> = Vec::new();
            let mut subsets: Vec<u64> = (1u64..1 << usable.len()).collect();
            subsets.sort_by_key(|s| s.count_ones());
            for s in subsets {
                let mask: u64 = (0..usable.len())
                    .filter(|&j| s >> j & 1 == 1)
                    .fold(0, |m, j| m | 1 << usable[j]);
                let union = (0..blocks.len())
                    .filter(|&i| mask >> i & 1 == 1)
                    .fold(0, |u, i| u | blocks[i].0);
                if union & need == need && !found.iter().any(|&g| g & !mask == 0) {
                    found.push(mask);
                }
            }
            found
        })
    }
}

type Memo = HashMap<(usize, usize, u64, Vec<u64>), bool>;

/// Whether the needy groups can each pick covers without using any block
/// more often than it has nulls.
fn assign(groups: &[(Vec<u64>, u64)], gi: usize, ci: usize, left: u64, caps: Vec<u64>, memo: &mut Memo) -> bool {
    if gi == groups.len() {
        return true;
    }
    let (covers, _) = &groups[gi];
    if left == 0 {
        let next = groups.get(gi + 1).map_or(0, |g| g.1);
        return assign(groups, gi + 1, 0, next, caps, memo);
    }
    if ci == covers.len() {
        return false;
    }
    let key = (gi, ci, left, caps.clone());
    if let Some(&b) = memo.get(&key) {
        return b;
    }
    let cover = covers[ci];
    let mut ok = false;
    for n in (0..=left).rev() {
        let mut c = caps.clone();
        let fits = (0..c.len()).filter(|&i| cover >> i & 1 == 1).all(|i| {
            if c[i] >= n {
                c[i] -= n;
                true
            } else {
                false
            }
        });
        if fits && assign(groups, gi, ci + 1, left - n, c, memo) {
            ok = true;
            break;
        }
    }
    memo.insert(key, ok);
    ok
}
