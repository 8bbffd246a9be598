//! Machine descriptions: the control states, alphabets, and rule table.

use std::collections::BTreeMap;
use std::fmt;

use crate::tape::Symbol;

/// A control-state identifier.
pub type StateId = String;

/// The reserved control state a machine enters at a limit ordinal. Machines
/// may define rules with this state as source to continue past ω; it can
/// never be a rule target or the start state.
pub const LIMIT_STATE: &str = "limit";

/// Synthetic state a `partial` machine halts in when no rule matches.
/// The `!` prefix keeps it outside the identifier grammar, so it cannot
/// collide with a declared state.
pub const IMPLICIT_REJECT: &str = "!reject";

/// Head movement for a rule. `Stay` serializes as `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Left,
    Right,
    Stay,
}

impl Move {
    pub fn letter(self) -> &'static str {
        match self {
            Move::Left => "L",
            Move::Right => "R",
            Move::Stay => "S",
        }
    }

    pub fn from_letter(s: &str) -> Option<Move> {
        match s {
            "L" => Some(Move::Left),
            "R" => Some(Move::Right),
            "S" => Some(Move::Stay),
            _ => None,
        }
    }

    pub fn offset(self) -> i64 {
        match self {
            Move::Left => -1,
            Move::Right => 1,
            Move::Stay => 0,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

/// How a halting state is tagged in the description.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HaltKind {
    Accept,
    Reject,
    /// An untagged halt like the binary counter's `qh`.
    Plain,
}

impl HaltKind {
    pub fn keyword(self) -> &'static str {
        match self {
            HaltKind::Accept => "accept",
            HaltKind::Reject => "reject",
            HaltKind::Plain => "halt",
        }
    }
}

/// The right-hand side of a transition rule: write, move, next state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub write: Symbol,
    pub movement: Move,
    pub next: StateId,
}

/// A complete machine description.
///
/// `tape_alphabet` declaration order is semantic: it is the ascending total
/// order used by the limit-supremum rule (blank conventionally first).
/// `states` is kept sorted so that structurally equal machines compare and
/// serialize identically regardless of authoring order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    pub name: String,
    pub states: Vec<StateId>,
    pub input_alphabet: Vec<Symbol>,
    pub tape_alphabet: Vec<Symbol>,
    pub blank: Symbol,
    pub start: StateId,
    pub halting: BTreeMap<StateId, HaltKind>,
    pub rules: BTreeMap<(StateId, Symbol), Action>,
    /// When set, a missing (state, symbol) pair is an implicit transition
    /// to a synthetic reject halt instead of a validation error.
    pub partial: bool,
}

impl Machine {
    /// Index of a symbol in the declared tape-alphabet order (the limsup
    /// order, ascending).
    pub fn symbol_index(&self, sym: &str) -> Option<usize> {
        self.tape_alphabet.iter().position(|s| s == sym)
    }

    pub fn rule(&self, state: &str, sym: &str) -> Option<&Action> {
        self.rules.get(&(state.to_string(), sym.to_string()))
    }

    pub fn is_halting(&self, state: &str) -> bool {
        state == IMPLICIT_REJECT || self.halting.contains_key(state)
    }

    pub fn halt_kind(&self, state: &str) -> Option<HaltKind> {
        if state == IMPLICIT_REJECT {
            return Some(HaltKind::Reject);
        }
        self.halting.get(state).copied()
    }

    /// True when any rule has the `limit` pseudo-state as its source, i.e.
    /// the machine describes behavior past ω.
    pub fn has_limit_rules(&self) -> bool {
        self.rules.keys().any(|(state, _)| state == LIMIT_STATE)
    }

    /// All tape symbols are single characters; controls how tape contents
    /// are joined in trace lines.
    pub fn single_char_alphabet(&self) -> bool {
        self.tape_alphabet.iter().all(|s| s.chars().count() == 1)
    }

    /// Identity used to check that graphs being merged came from the same
    /// configuration-key scheme.
    pub fn provenance(&self) -> String {
        self.name.clone()
    }

    /// Checks every structural invariant, returning one entry per breach.
    /// An empty list means the machine is well-formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        let in_states = |s: &str| self.states.iter().any(|q| q == s);
        let in_tape = |s: &str| self.tape_alphabet.iter().any(|g| g == s);

        if !in_tape(&self.blank) {
            violations.push(Violation::BlankNotInTapeAlphabet {
                blank: self.blank.clone(),
            });
        }
        if self.input_alphabet.contains(&self.blank) {
            violations.push(Violation::BlankInInputAlphabet {
                blank: self.blank.clone(),
            });
        }
        for sym in &self.input_alphabet {
            if !in_tape(sym) {
                violations.push(Violation::InputSymbolNotOnTape {
                    symbol: sym.clone(),
                });
            }
        }
        if !in_states(&self.start) {
            violations.push(Violation::StartNotAState {
                state: self.start.clone(),
            });
        }
        if self.start == LIMIT_STATE {
            violations.push(Violation::ReservedState {
                state: self.start.clone(),
            });
        }
        for state in self.halting.keys() {
            if !in_states(state) {
                violations.push(Violation::HaltingNotAState {
                    state: state.clone(),
                });
            }
        }

        for ((state, read), action) in &self.rules {
            if self.is_halting(state) {
                violations.push(Violation::RuleFromHaltingState {
                    state: state.clone(),
                    symbol: read.clone(),
                });
            }
            if !in_states(state) {
                violations.push(Violation::RuleUnknownState {
                    state: state.clone(),
                });
            }
            if !in_states(&action.next) {
                violations.push(Violation::RuleUnknownState {
                    state: action.next.clone(),
                });
            }
            if action.next == LIMIT_STATE {
                violations.push(Violation::ReservedState {
                    state: action.next.clone(),
                });
            }
            if !in_tape(read) {
                violations.push(Violation::RuleUnknownSymbol {
                    symbol: read.clone(),
                });
            }
            if !in_tape(&action.write) {
                violations.push(Violation::RuleUnknownSymbol {
                    symbol: action.write.clone(),
                });
            }
        }

        // Totality over live states. The limit pseudo-state is exempt:
        // post-ω rules are deliberately sparse.
        if !self.partial {
            for state in &self.states {
                if self.is_halting(state) || state == LIMIT_STATE {
                    continue;
                }
                for sym in &self.tape_alphabet {
                    if self.rule(state, sym).is_none() {
                        violations.push(Violation::MissingRule {
                            state: state.clone(),
                            symbol: sym.clone(),
                        });
                    }
                }
            }
        }

        violations
    }
}

/// A single invariant breach found by [`Machine::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    BlankNotInTapeAlphabet { blank: Symbol },
    BlankInInputAlphabet { blank: Symbol },
    InputSymbolNotOnTape { symbol: Symbol },
    StartNotAState { state: StateId },
    HaltingNotAState { state: StateId },
    RuleUnknownState { state: StateId },
    RuleUnknownSymbol { symbol: Symbol },
    RuleFromHaltingState { state: StateId, symbol: Symbol },
    MissingRule { state: StateId, symbol: Symbol },
    ReservedState { state: StateId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BlankNotInTapeAlphabet { blank } => {
                write!(f, "blank: symbol {blank:?} is not in the tape alphabet")
            }
            Violation::BlankInInputAlphabet { blank } => {
                write!(f, "input_alphabet: contains the blank symbol {blank:?}")
            }
            Violation::InputSymbolNotOnTape { symbol } => {
                write!(
                    f,
                    "input_alphabet: symbol {symbol:?} is not in the tape alphabet"
                )
            }
            Violation::StartNotAState { state } => {
                write!(f, "start: {state:?} is not a declared state")
            }
            Violation::HaltingNotAState { state } => {
                write!(f, "halting: {state:?} is not a declared state")
            }
            Violation::RuleUnknownState { state } => {
                write!(f, "rule: references unknown state {state:?}")
            }
            Violation::RuleUnknownSymbol { symbol } => {
                write!(f, "rule: references unknown symbol {symbol:?}")
            }
            Violation::RuleFromHaltingState { state, symbol } => {
                write!(f, "rule from halting state: ({state}, {symbol})")
            }
            Violation::MissingRule { state, symbol } => {
                write!(f, "missing rule: ({state}, {symbol})")
            }
            Violation::ReservedState { state } => {
                write!(f, "state {state:?} is reserved")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_machine;

    const COUNTER: &str = include_str!("../tests/machines/binary_counter.tm");

    #[test]
    fn binary_counter_is_valid() {
        let machine = parse_machine(COUNTER).unwrap();
        assert_eq!(machine.rules.len(), 6);
        assert_eq!(machine.states, vec!["q0", "q1", "qh"]);
        assert!(machine.validate().is_empty());
    }

    #[test]
    fn rule_from_halting_state_is_flagged() {
        let mut machine = parse_machine(COUNTER).unwrap();
        machine.rules.insert(
            ("qh".into(), "0".into()),
            Action {
                write: "0".into(),
                movement: Move::Stay,
                next: "qh".into(),
            },
        );
        let violations = machine.validate();
        assert_eq!(violations.len(), 1);
        assert_eq!(
            violations[0],
            Violation::RuleFromHaltingState {
                state: "qh".into(),
                symbol: "0".into()
            }
        );
        assert_eq!(
            violations[0].to_string(),
            "rule from halting state: (qh, 0)"
        );
    }

    #[test]
    fn totality_breach_names_the_missing_pair() {
        let mut machine = parse_machine(COUNTER).unwrap();
        machine.rules.remove(&("q1".to_string(), "0".to_string()));
        let violations = machine.validate();
        assert_eq!(
            violations,
            vec![Violation::MissingRule {
                state: "q1".into(),
                symbol: "0".into()
            }]
        );

        // The same machine marked partial is fine.
        machine.partial = true;
        assert!(machine.validate().is_empty());
    }
}
