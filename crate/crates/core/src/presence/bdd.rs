//! Reduced ordered BDD arena with hash-consed nodes.
//!
//! Node ids are stable for the lifetime of the arena, so two functions are
//! equal iff their ids are equal.

use std::collections::HashMap;

pub(crate) type NodeId = u32;

pub(crate) const FALSE: NodeId = 0;
pub(crate) const TRUE: NodeId = 1;

const TERMINAL_VAR: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Node {
    var: u32,
    lo: NodeId,
    hi: NodeId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Op {
    And,
    Or,
}

#[derive(Debug)]
pub(crate) struct Bdd {
    nodes: Vec<Node>,
    unique: HashMap<Node, NodeId>,
    apply_cache: HashMap<(Op, NodeId, NodeId), NodeId>,
    not_cache: HashMap<NodeId, NodeId>,
}

impl Bdd {
    pub(crate) fn new() -> Self {
        let terminal = |v| Node {
            var: TERMINAL_VAR,
            lo: v,
            hi: v,
        };
        Bdd {
            nodes: vec![terminal(FALSE), terminal(TRUE)],
            unique: HashMap::new(),
            apply_cache: HashMap::new(),
            not_cache: HashMap::new(),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.nodes.len()
    }

    fn mk(&mut self, var: u32, lo: NodeId, hi: NodeId) -> NodeId {
        if lo == hi {
            return lo;
        }
        let node = Node { var, lo, hi };
        if let Some(&id) = self.unique.get(&node) {
            return id;
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(node);
        self.unique.insert(node, id);
        id
    }

    pub(crate) fn var(&mut self, var: u32) -> NodeId {
        self.mk(var, FALSE, TRUE)
    }

    fn top_var(&self, n: NodeId) -> u32 {
        self.nodes[n as usize].var
    }

    fn cofactors(&self, n: NodeId, var: u32) -> (NodeId, NodeId) {
        let node = self.nodes[n as usize];
        if node.var == var {
            (node.lo, node.hi)
        } else {
            (n, n)
        }
    }

    pub(crate) fn not(&mut self, n: NodeId) -> NodeId {
        match n {
            FALSE => return TRUE,
            TRUE => return FALSE,
            _ => {}
        }
        if let Some(&r) = self.not_cache.get(&n) {
            return r;
        }
        let node = self.nodes[n as usize];
        let lo = self.not(node.lo);
        let hi = self.not(node.hi);
        let r = self.mk(node.var, lo, hi);
        self.not_cache.insert(n, r);
        r
    }

    pub(crate) fn and(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.apply(Op::And, a, b)
    }

    pub(crate) fn or(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.apply(Op::Or, a, b)
    }

    fn apply(&mut self, op: Op, a: NodeId, b: NodeId) -> NodeId {
        match op {
            Op::And => {
                if a == FALSE || b == FALSE {
                    return FALSE;
                }
                if a == TRUE {
                    return b;
                }
                if b == TRUE || a == b {
                    return a;
                }
            }
            Op::Or => {
                if a == TRUE || b == TRUE {
                    return TRUE;
                }
                if a == FALSE {
                    return b;
                }
                if b == FALSE || a == b {
                    return a;
                }
            }
        }
        let key = if a < b { (op, a, b) } else { (op, b, a) };
        if let Some(&r) = self.apply_cache.get(&key) {
            return r;
        }
        let var = self.top_var(a).min(self.top_var(b));
        let (alo, ahi) = self.cofactors(a, var);
        let (blo, bhi) = self.cofactors(b, var);
        let lo = self.apply(op, alo, blo);
        let hi = self.apply(op, ahi, bhi);
        let r = self.mk(var, lo, hi);
        self.apply_cache.insert(key, r);
        r
    }

    /// Evaluates `n` under the assignment where variable `i` is bit `i` of `mask`.
    pub(crate) fn eval(&self, mut n: NodeId, mask: u64) -> bool {
        loop {
            match n {
                FALSE => return false,
                TRUE => return true,
                _ => {
                    let node = self.nodes[n as usize];
                    n = if mask & (1u64 << node.var) != 0 {
                        node.hi
                    } else {
                        node.lo
                    };
                }
            }
        }
    }

    /// Some satisfying assignment of `n`, preferring `false` for every
    /// variable from the top of the order down. Unmentioned variables are
    /// `false`. `None` for the constant false function.
    pub(crate) fn pick(&self, mut n: NodeId) -> Option<u64> {
        if n == FALSE {
            return None;
        }
        let mut mask = 0u64;
        while n != TRUE {
            let node = self.nodes[n as usize];
            if node.lo != FALSE {
                n = node.lo;
            } else {
                mask |= 1u64 << node.var;
                n = node.hi;
            }
        }
        Some(mask)
    }

    /// Number of satisfying assignments over variables `0..nvars`.
    pub(crate) fn sat_count(&self, n: NodeId, nvars: u32) -> u128 {
        let mut memo = HashMap::new();
        self.count_from(n, 0, nvars, &mut memo)
    }

    fn count_from(
        &self,
        n: NodeId,
        level: u32,
        nvars: u32,
        memo: &mut HashMap<NodeId, u128>,
    ) -> u128 {
        // count of assignments to variables `level..nvars`
        let var = if n <= TRUE { nvars } else { self.top_var(n) };
        let skipped = 1u128 << (var - level);
        let below = match n {
            FALSE => 0,
            TRUE => 1,
            _ => {
                if let Some(&c) = memo.get(&n) {
                    c
                } else {
                    let node = self.nodes[n as usize];
                    let c = self.count_from(node.lo, var + 1, nvars, memo)
                        + self.count_from(node.hi, var + 1, nvars, memo);
                    memo.insert(n, c);
                    c
                }
            }
        };
        skipped * below
    }

    /// Disjoint cubes covering `n`, in depth-first order (lo branch first).
    /// Each cube is a list of `(var, polarity)` in variable order.
    pub(crate) fn cubes(&self, n: NodeId) -> Vec<Vec<(u32, bool)>> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_cubes(n, &mut path, &mut out);
        out
    }

    fn collect_cubes(
        &self,
        n: NodeId,
        path: &mut Vec<(u32, bool)>,
        out: &mut Vec<Vec<(u32, bool)>>,
    ) {
        match n {
            FALSE => {}
            TRUE => out.push(path.clone()),
            _ => {
                let node = self.nodes[n as usize];
                path.push((node.var, false));
                self.collect_cubes(node.lo, path, out);
                path.pop();
                path.push((node.var, true));
                self.collect_cubes(node.hi, path, out);
                path.pop();
            }
        }
    }

    /// Variables occurring in `n`.
    pub(crate) fn support(&self, n: NodeId) -> Vec<u32> {
        let mut seen = std::collections::HashSet::new();
        let mut vars = std::collections::BTreeSet::new();
        let mut stack = vec![n];
        while let Some(x) = stack.pop() {
            if x <= TRUE || !seen.insert(x) {
                continue;
            }
            let node = self.nodes[x as usize];
            vars.insert(node.var);
            stack.push(node.lo);
            stack.push(node.hi);
        }
        vars.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_consing_gives_canonical_ids() {
        let mut b = Bdd::new();
        let x = b.var(0);
        let y = b.var(1);
        let xy = b.and(x, y);
        let yx = b.and(y, x);
        assert_eq!(xy, yx);
        let nx = b.not(x);
        let ny = b.not(y);
        let demorgan = b.or(nx, ny);
        let not_xy = b.not(xy);
        assert_eq!(demorgan, not_xy);
        assert_eq!(b.and(x, nx), FALSE);
        assert_eq!(b.or(x, nx), TRUE);
    }

    #[test]
    fn sat_count_skips_levels() {
        let mut b = Bdd::new();
        let z = b.var(2);
        assert_eq!(b.sat_count(z, 3), 4);
        assert_eq!(b.sat_count(TRUE, 3), 8);
        assert_eq!(b.sat_count(FALSE, 3), 0);
        let x = b.var(0);
        let xz = b.and(x, z);
        assert_eq!(b.sat_count(xz, 3), 2);
    }

    #[test]
    fn pick_prefers_false() {
        let mut b = Bdd::new();
        let x = b.var(0);
        let y = b.var(1);
        let nx = b.not(x);
        let f = b.or(nx, y);
        assert_eq!(b.pick(f), Some(0));
        assert_eq!(b.pick(x), Some(1));
        assert_eq!(b.pick(FALSE), None);
    }
}
