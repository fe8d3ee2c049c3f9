//! The L* observation table (S, E, T) over input-index words.

use std::collections::HashMap;

use super::teacher::Engine;
use super::{ClosingStrategy, LearnError};

type Word = Vec<usize>;

struct Row {
    word: Word,
    /// Output index per suffix, aligned with the suffix list; trailing
    /// entries are filled lazily by [`ObservationTable::fill`].
    cells: Vec<usize>,
    in_s: bool,
}

/// Observation table with prefix-closed row words and output-valued cells.
///
/// Rows live in creation order; `S` additionally tracks promotion order
/// with the empty word first. `E` starts as the single-symbol suffixes in
/// alphabet order and only ever grows, keeping every member either a
/// single input or an input-extension of another member.
pub(crate) struct ObservationTable {
    input_count: usize,
    rows: Vec<Row>,
    s_order: Vec<usize>,
    boundary_order: Vec<usize>,
    suffixes: Vec<Word>,
    index: HashMap<Word, usize>,
}

impl ObservationTable {
    pub fn new(input_count: usize) -> Self {
        assert!(input_count > 0, "alphabet must be non-empty");
        let mut table = ObservationTable {
            input_count,
            rows: Vec::new(),
            s_order: Vec::new(),
            boundary_order: Vec::new(),
            suffixes: (0..input_count).map(|a| vec![a]).collect(),
            index: HashMap::new(),
        };
        let eps = table.create_row(Vec::new());
        table.rows[eps].in_s = true;
        table.s_order.push(eps);
        table.boundary_order.retain(|&r| r != eps);
        for a in 0..input_count {
            table.create_row(vec![a]);
        }
        table
    }

    fn create_row(&mut self, word: Word) -> usize {
        debug_assert!(!self.index.contains_key(&word));
        let id = self.rows.len();
        self.index.insert(word.clone(), id);
        self.rows.push(Row {
            word,
            cells: Vec::new(),
            in_s: false,
        });
        self.boundary_order.push(id);
        id
    }

    pub fn row_id(&self, word: &[usize]) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn row_word(&self, id: usize) -> &[usize] {
        &self.rows[id].word
    }

    pub fn row_cells(&self, id: usize) -> &[usize] {
        &self.rows[id].cells
    }

    pub fn s_row_ids(&self) -> &[usize] {
        &self.s_order
    }

    #[cfg(test)]
    pub fn suffixes(&self) -> &[Word] {
        &self.suffixes
    }

    /// Completes every missing cell with membership queries, scanning rows
    /// in creation order and suffixes in index order.
    pub fn fill(&mut self, engine: &mut Engine<'_>) -> Result<(), LearnError> {
        for row_id in 0..self.rows.len() {
            for suffix_id in self.rows[row_id].cells.len()..self.suffixes.len() {
                let mut query = self.rows[row_id].word.clone();
                query.extend_from_slice(&self.suffixes[suffix_id]);
                let output = engine.mq_last(&query)?;
                self.rows[row_id].cells.push(output);
            }
        }
        Ok(())
    }

    /// First consistency defect: two equal S-rows whose one-input
    /// extensions differ in some column. Returns the repairing suffix
    /// `input . e`, which is never already a member.
    pub fn find_inconsistency(&self) -> Option<Word> {
        for (pos, &row_i) in self.s_order.iter().enumerate() {
            for &row_j in &self.s_order[pos + 1..] {
                if self.rows[row_i].cells != self.rows[row_j].cells {
                    continue;
                }
                for input in 0..self.input_count {
                    let ext_i = self.extension_id(row_i, input);
                    let ext_j = self.extension_id(row_j, input);
                    for suffix_id in 0..self.suffixes.len() {
                        if self.rows[ext_i].cells[suffix_id] != self.rows[ext_j].cells[suffix_id] {
                            let mut suffix = vec![input];
                            suffix.extend_from_slice(&self.suffixes[suffix_id]);
                            debug_assert!(!self.suffixes.contains(&suffix));
                            return Some(suffix);
                        }
                    }
                }
            }
        }
        None
    }

    fn extension_id(&self, s_row: usize, input: usize) -> usize {
        let mut word = self.rows[s_row].word.clone();
        word.push(input);
        *self
            .index
            .get(&word)
            .expect("extensions of S rows always exist")
    }

    /// First boundary row (under the chosen strategy) whose cell vector
    /// matches no S-row.
    pub fn unclosed_row(&self, closing: ClosingStrategy) -> Option<usize> {
        let is_closed = |row: usize| {
            self.s_order
                .iter()
                .any(|&s| self.rows[s].cells == self.rows[row].cells)
        };
        match closing {
            ClosingStrategy::CloseFirst => self
                .boundary_order
                .iter()
                .copied()
                .find(|&row| !is_closed(row)),
            ClosingStrategy::CloseShortest => self
                .boundary_order
                .iter()
                .copied()
                .filter(|&row| !is_closed(row))
                .min_by(|&a, &b| {
                    let (wa, wb) = (&self.rows[a].word, &self.rows[b].word);
                    wa.len().cmp(&wb.len()).then_with(|| wa.cmp(wb))
                }),
        }
    }

    /// Moves a boundary row into S and creates its one-input extensions.
    pub fn promote(&mut self, row: usize) {
        debug_assert!(!self.rows[row].in_s);
        self.rows[row].in_s = true;
        self.boundary_order.retain(|&r| r != row);
        self.s_order.push(row);
        for input in 0..self.input_count {
            let mut word = self.rows[row].word.clone();
            word.push(input);
            if !self.index.contains_key(&word) {
                self.create_row(word);
            }
        }
    }

    /// Ensures `word` is an S row, creating or promoting as needed. The
    /// caller adds prefixes in increasing length to keep S prefix-closed.
    pub fn add_word_to_s(&mut self, word: &[usize]) {
        let id = match self.row_id(word) {
            Some(id) => id,
            None => self.create_row(word.to_vec()),
        };
        if !self.rows[id].in_s {
            self.promote(id);
        }
    }

    /// Appends a suffix column unless already present.
    pub fn add_suffix(&mut self, suffix: &[usize]) {
        debug_assert!(!suffix.is_empty(), "suffixes are non-empty");
        if !self.suffixes.iter().any(|s| s == suffix) {
            self.suffixes.push(suffix.to_vec());
        }
    }

    /// Adds a suffix together with the tails that keep E closed under
    /// dropping the first symbol, shortest first.
    pub fn add_suffix_with_tails(&mut self, suffix: &[usize]) {
        for start in (0..suffix.len()).rev() {
            self.add_suffix(&suffix[start..]);
        }
    }

    /// Structural invariants: S prefix-closed with the empty word first,
    /// every suffix a single input or an input-extension of a member, and
    /// cells total once filled.
    pub fn invariants_hold(&self) -> bool {
        if self.s_order.first().map(|&r| self.rows[r].word.as_slice()) != Some(&[]) {
            return false;
        }
        for &row in &self.s_order {
            let word = &self.rows[row].word;
            for cut in 0..word.len() {
                match self.index.get(&word[..cut]) {
                    Some(&prefix) if self.rows[prefix].in_s => {}
                    _ => return false,
                }
            }
        }
        for suffix in &self.suffixes {
            if suffix.len() > 1 && !self.suffixes.iter().any(|s| s[..] == suffix[1..]) {
                return false;
            }
            if suffix.is_empty() || suffix.iter().any(|&a| a >= self.input_count) {
                return false;
            }
        }
        self.rows.iter().all(|r| r.cells.len() == self.suffixes.len())
    }
}
