//! The two-way infinite tape, stored sparsely.

use std::collections::BTreeMap;

/// A tape symbol. Symbols are interned nowhere; machines are desk-scale.
pub type Symbol = String;

/// A two-way infinite tape. Cells never store the blank symbol: absent
/// positions read as blank, which keeps equality and rendering canonical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tape {
    cells: BTreeMap<i64, Symbol>,
    blank: Symbol,
}

impl Tape {
    pub fn new(blank: impl Into<Symbol>) -> Self {
        Tape {
            cells: BTreeMap::new(),
            blank: blank.into(),
        }
    }

    /// Builds a tape with `symbols[i]` at position i. Blank symbols in the
    /// input are dropped rather than stored.
    pub fn from_symbols(
        blank: impl Into<Symbol>,
        symbols: impl IntoIterator<Item = Symbol>,
    ) -> Self {
        let mut tape = Tape::new(blank);
        for (i, sym) in symbols.into_iter().enumerate() {
            tape.write(i as i64, sym);
        }
        tape
    }

    pub fn blank(&self) -> &Symbol {
        &self.blank
    }

    pub fn read(&self, pos: i64) -> &Symbol {
        self.cells.get(&pos).unwrap_or(&self.blank)
    }

    pub fn write(&mut self, pos: i64, sym: Symbol) {
        if sym == self.blank {
            self.cells.remove(&pos);
        } else {
            self.cells.insert(pos, sym);
        }
    }

    pub fn is_all_blank(&self) -> bool {
        self.cells.is_empty()
    }

    /// Leftmost and rightmost stored (non-blank) positions.
    pub fn span(&self) -> Option<(i64, i64)> {
        let min = *self.cells.keys().next()?;
        let max = *self.cells.keys().next_back()?;
        Some((min, max))
    }

    /// Stored cells in position order. Never yields a blank.
    pub fn stored(&self) -> impl Iterator<Item = (i64, &Symbol)> {
        self.cells.iter().map(|(&p, s)| (p, s))
    }

    pub fn stored_len(&self) -> usize {
        self.cells.len()
    }

    /// The same tape contents shifted by `delta` positions.
    pub fn shifted(&self, delta: i64) -> Tape {
        Tape {
            cells: self
                .cells
                .iter()
                .map(|(&p, s)| (p + delta, s.clone()))
                .collect(),
            blank: self.blank.clone(),
        }
    }

    /// The contiguous span min..=max with each cell's symbol joined by
    /// `joiner`. Blank interior cells render as the blank symbol. Returns
    /// an empty string for an all-blank tape.
    pub fn contiguous_text(&self, joiner: &str) -> String {
        match self.span() {
            None => String::new(),
            Some((min, max)) => {
                let mut parts = Vec::with_capacity((max - min + 1) as usize);
                for pos in min..=max {
                    parts.push(self.read(pos).as_str());
                }
                parts.join(joiner)
            }
        }
    }

    /// Plain concatenation of the contiguous span; readable for single-char
    /// alphabets like the binary counter's.
    pub fn reading(&self) -> String {
        self.contiguous_text("")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blank_writes_are_not_stored() {
        let mut tape = Tape::new("B");
        tape.write(0, "1".into());
        tape.write(5, "B".into());
        tape.write(0, "B".into());
        assert!(tape.is_all_blank());
        assert_eq!(tape.read(0), "B");
        assert_eq!(tape.read(-1_000_000), "B");
    }

    #[test]
    fn span_and_reading_cover_interior_blanks() {
        let mut tape = Tape::new("B");
        tape.write(-1, "1".into());
        tape.write(1, "0".into());
        assert_eq!(tape.span(), Some((-1, 1)));
        assert_eq!(tape.reading(), "1B0");
        assert_eq!(tape.contiguous_text("."), "1.B.0");
    }

    #[test]
    fn shifting_preserves_contents() {
        let tape = Tape::from_symbols("B", ["1".into(), "1".into()]);
        let shifted = tape.shifted(-3);
        assert_eq!(shifted.span(), Some((-3, -2)));
        assert_eq!(shifted.reading(), "11");
        assert_eq!(shifted.shifted(3), tape);
    }
}
