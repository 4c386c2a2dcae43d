use std::collections::BTreeSet;

use super::{Automaton, StateColor, StateId};

impl<C: StateColor> Automaton<C> {
    /// Strongly connected components of the transition graph (Tarjan),
    /// returned in reverse topological order: a component appears before
    /// every component that can reach it. States inside a component are
    /// sorted.
    pub fn strongly_connected_components(&self) -> Vec<Vec<StateId>> {
        let adj = self.adjacency();
        let n = adj.len();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut out = Vec::new();
        let mut counter = 0;

        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            // (state, position of the next successor to visit)
            let mut work = vec![(root, 0usize)];
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root] = true;

            while let Some(top) = work.last_mut() {
                let (v, pos) = *top;
                if let Some(&w) = adj[v].get(pos) {
                    top.1 += 1;
                    if index[w] == usize::MAX {
                        index[w] = counter;
                        low[w] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        work.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                    continue;
                }
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
        out
    }

    /// Whether a component carries a cycle: more than one state, or a single
    /// state with a self-loop.
    pub fn is_cyclic_component(&self, component: &[StateId]) -> bool {
        match component {
            [] => false,
            [q] => self.successors(*q).contains(q),
            _ => true,
        }
    }

    /// States from which some state in `targets` is reachable in zero or more
    /// steps. Includes `targets` itself.
    pub fn backward_reachable(
        &self,
        targets: impl IntoIterator<Item = StateId>,
    ) -> BTreeSet<StateId> {
        let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); self.len()];
        for (q, succ) in self.adjacency().into_iter().enumerate() {
            for t in succ {
                preds[t].push(q);
            }
        }
        let mut seen = vec![false; self.len()];
        let mut queue: Vec<StateId> = Vec::new();
        for t in targets {
            if !seen[t] {
                seen[t] = true;
                queue.push(t);
            }
        }
        while let Some(q) = queue.pop() {
            for &p in &preds[q] {
                if !seen[p] {
                    seen[p] = true;
                    queue.push(p);
                }
            }
        }
        (0..self.len()).filter(|&q| seen[q]).collect()
    }

    /// States reachable from `from` in zero or more steps.
    pub fn forward_reachable(&self, from: StateId) -> BTreeSet<StateId> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(q) = stack.pop() {
            for &t in self.successors(q) {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        (0..self.len()).filter(|&q| seen[q]).collect()
    }
}
