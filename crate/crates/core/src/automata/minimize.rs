use std::collections::HashMap;

use super::{Automaton, StateColor, StateId};

impl<C: StateColor> Automaton<C> {
    /// Smallest automaton assigning every word the same color.
    ///
    /// Moore-style partition refinement: unreachable states are dropped, the
    /// initial partition groups states by color, and blocks are split by the
    /// blocks of their successors until stable. The result is canonical.
    pub fn minimize(&self) -> Self {
        let trimmed = self.canonicalize();
        let n = trimmed.len();
        let k = trimmed.alphabet().len();

        let mut block = vec![0usize; n];
        let mut ids: HashMap<C, usize> = HashMap::new();
        for (q, b) in block.iter_mut().enumerate() {
            let next_id = ids.len();
            *b = *ids.entry(trimmed.color(q)).or_insert(next_id);
        }
        let mut blocks = ids.len();

        loop {
            let mut sig_ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
            let mut next = vec![0usize; n];
            for q in 0..n {
                let sig: Vec<usize> = trimmed.successors(q).iter().map(|&t| block[t]).collect();
                let id = sig_ids.len();
                next[q] = *sig_ids.entry((block[q], sig)).or_insert(id);
            }
            let refined = sig_ids.len();
            block = next;
            if refined == blocks {
                break;
            }
            blocks = refined;
        }

        let mut rep: Vec<Option<StateId>> = vec![None; blocks];
        for q in 0..n {
            rep[block[q]].get_or_insert(q);
        }
        let mut delta = Vec::with_capacity(blocks * k);
        let mut colors = Vec::with_capacity(blocks);
        for r in rep.iter().map(|r| r.expect("every block is non-empty")) {
            delta.extend(trimmed.successors(r).iter().map(|&t| block[t]));
            colors.push(trimmed.color(r));
        }
        Automaton::new(
            trimmed.alphabet().clone(),
            block[trimmed.initial()],
            delta,
            colors,
        )
        .expect("quotient of a total automaton is total")
        .canonicalize()
    }
}
