//! The machine-description text format, tape literals, ordinal literals,
//! and the line-oriented trace format.
//!
//! The format is line-oriented with `#` comments and no indentation
//! sensitivity. The canonical serialization orders directives as
//! `machine`, `blank`, `input_alphabet`, `tape_alphabet`, `start`,
//! `partial`, halting declarations, then rules sorted by (state, symbol).
//! `tape_alphabet` declaration order doubles as the ascending limsup
//! order, so it is the single source of truth for limit semantics.

use std::collections::BTreeMap;
use std::fmt;

use crate::exec::{Outcome, Trace};
use crate::machine::{Action, HaltKind, Machine, Move, LIMIT_STATE};
use crate::ordinal::OrdinalTime;
use crate::tape::Tape;

/// Location of a token in the source text. Lines and columns are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnknownDirective,
    DuplicateDirective,
    MissingDirective,
    MalformedLine,
    DuplicateRule,
    UnknownSymbol,
    UnknownState,
    ReservedState,
    RuleFromHaltingState,
    IncompleteRules,
    BadOrdinal,
    BadMove,
}

impl ParseErrorKind {
    /// Stable error code, one per kind.
    pub fn code(self) -> &'static str {
        match self {
            ParseErrorKind::UnknownDirective => "unknown-directive",
            ParseErrorKind::DuplicateDirective => "duplicate-directive",
            ParseErrorKind::MissingDirective => "missing-directive",
            ParseErrorKind::MalformedLine => "malformed-line",
            ParseErrorKind::DuplicateRule => "duplicate-rule",
            ParseErrorKind::UnknownSymbol => "unknown-symbol",
            ParseErrorKind::UnknownState => "unknown-state",
            ParseErrorKind::ReservedState => "reserved-state",
            ParseErrorKind::RuleFromHaltingState => "rule-from-halting-state",
            ParseErrorKind::IncompleteRules => "incomplete-rules",
            ParseErrorKind::BadOrdinal => "bad-ordinal",
            ParseErrorKind::BadMove => "bad-move",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}:{}: [{}] {message}", span.line, span.column, kind.code())]
pub struct ParseError {
    pub span: SourceSpan,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl ParseError {
    fn new(span: SourceSpan, kind: ParseErrorKind, message: impl fmt::Display) -> Self {
        ParseError {
            span,
            kind,
            message: message.to_string(),
        }
    }
}

/// A token with its span.
#[derive(Debug, Clone)]
struct Tok<'a> {
    text: &'a str,
    span: SourceSpan,
}

/// Splits a line into whitespace-separated tokens, dropping `#` comments.
fn tokenize(line: &str, line_no: usize) -> Vec<Tok<'_>> {
    let mut toks = Vec::new();
    let mut chars = line.char_indices().peekable();
    let mut col = 0usize;
    let mut start: Option<(usize, usize)> = None; // (byte, column)
    loop {
        let next = chars.next();
        match next {
            Some((byte, ch)) => {
                col += 1;
                if ch == '#' {
                    if let Some((sb, sc)) = start.take() {
                        toks.push(Tok {
                            text: &line[sb..byte],
                            span: SourceSpan {
                                line: line_no,
                                column: sc,
                                length: col - sc,
                            },
                        });
                    }
                    break;
                }
                if ch.is_whitespace() {
                    if let Some((sb, sc)) = start.take() {
                        toks.push(Tok {
                            text: &line[sb..byte],
                            span: SourceSpan {
                                line: line_no,
                                column: sc,
                                length: col - sc,
                            },
                        });
                    }
                } else if start.is_none() {
                    start = Some((byte, col));
                }
            }
            None => {
                if let Some((sb, sc)) = start.take() {
                    toks.push(Tok {
                        text: &line[sb..],
                        span: SourceSpan {
                            line: line_no,
                            column: sc,
                            length: col + 1 - sc,
                        },
                    });
                }
                break;
            }
        }
    }
    toks
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses a machine description, accumulating every error instead of
/// stopping at the first. A machine is returned only when the source is
/// completely clean; it is then guaranteed to pass [`Machine::validate`].
pub fn parse_machine(source: &str) -> Result<Machine, Vec<ParseError>> {
    let mut errors: Vec<ParseError> = Vec::new();

    let mut name: Option<(String, SourceSpan)> = None;
    let mut blank: Option<(String, SourceSpan)> = None;
    let mut input_alphabet: Option<(Vec<String>, SourceSpan)> = None;
    let mut tape_alphabet: Option<(Vec<String>, SourceSpan)> = None;
    let mut start: Option<(String, SourceSpan)> = None;
    let mut partial = false;
    let mut partial_seen: Option<SourceSpan> = None;
    let mut halting: BTreeMap<String, HaltKind> = BTreeMap::new();
    let mut halting_spans: BTreeMap<String, SourceSpan> = BTreeMap::new();
    // Raw rule rows in declaration order: spans kept for error reporting.
    struct RuleRow {
        state: String,
        read: String,
        action: Action,
        span: SourceSpan,
    }
    let mut rows: Vec<RuleRow> = Vec::new();

    let line_one = SourceSpan {
        line: 1,
        column: 1,
        length: 1,
    };

    let check_ident =
        |tok: &Tok, what: &str, kind: ParseErrorKind, errors: &mut Vec<ParseError>| {
            if !is_identifier(tok.text) {
                errors.push(ParseError::new(
                    tok.span,
                    kind,
                    format!("{what} {:?} is not a valid identifier", tok.text),
                ));
                false
            } else {
                true
            }
        };

    for (idx, line) in source.lines().enumerate() {
        let toks = tokenize(line, idx + 1);
        let Some(head) = toks.first() else { continue };
        let args = &toks[1..];
        let dup = |prev: &Option<(String, SourceSpan)>| prev.is_some();
        match head.text {
            "machine" | "blank" | "start" => {
                if args.len() != 1 {
                    errors.push(ParseError::new(
                        head.span,
                        ParseErrorKind::MalformedLine,
                        format!("`{}` takes exactly one argument", head.text),
                    ));
                    continue;
                }
                let arg = &args[0];
                let slot = match head.text {
                    "machine" => &mut name,
                    "blank" => &mut blank,
                    _ => &mut start,
                };
                if dup(slot) {
                    errors.push(ParseError::new(
                        head.span,
                        ParseErrorKind::DuplicateDirective,
                        format!("`{}` declared twice", head.text),
                    ));
                    continue;
                }
                let kind = if head.text == "blank" {
                    ParseErrorKind::UnknownSymbol
                } else {
                    ParseErrorKind::UnknownState
                };
                if !check_ident(arg, head.text, kind, &mut errors) {
                    continue;
                }
                if head.text == "start" && arg.text == LIMIT_STATE {
                    errors.push(ParseError::new(
                        arg.span,
                        ParseErrorKind::ReservedState,
                        "`limit` is reserved for the limit stage and cannot start a machine",
                    ));
                    continue;
                }
                *slot = Some((arg.text.to_string(), arg.span));
            }
            "input_alphabet" | "tape_alphabet" => {
                let slot = if head.text == "input_alphabet" {
                    &mut input_alphabet
                } else {
                    &mut tape_alphabet
                };
                if slot.is_some() {
                    errors.push(ParseError::new(
                        head.span,
                        ParseErrorKind::DuplicateDirective,
                        format!("`{}` declared twice", head.text),
                    ));
                    continue;
                }
                let mut symbols = Vec::new();
                for tok in args {
                    if !check_ident(tok, "symbol", ParseErrorKind::UnknownSymbol, &mut errors) {
                        continue;
                    }
                    if symbols.iter().any(|s| s == tok.text) {
                        errors.push(ParseError::new(
                            tok.span,
                            ParseErrorKind::UnknownSymbol,
                            format!("symbol {:?} listed twice in {}", tok.text, head.text),
                        ));
                        continue;
                    }
                    symbols.push(tok.text.to_string());
                }
                if head.text == "tape_alphabet" && symbols.is_empty() {
                    errors.push(ParseError::new(
                        head.span,
                        ParseErrorKind::MalformedLine,
                        "tape_alphabet needs at least the blank symbol",
                    ));
                    continue;
                }
                *slot = Some((symbols, head.span));
            }
            "partial" => {
                if !args.is_empty() {
                    errors.push(ParseError::new(
                        head.span,
                        ParseErrorKind::MalformedLine,
                        "`partial` takes no arguments",
                    ));
                    continue;
                }
                if partial_seen.is_some() {
                    errors.push(ParseError::new(
                        head.span,
                        ParseErrorKind::DuplicateDirective,
                        "`partial` declared twice",
                    ));
                    continue;
                }
                partial = true;
                partial_seen = Some(head.span);
            }
            "halt" | "accept" | "reject" => {
                if args.len() != 1 {
                    errors.push(ParseError::new(
                        head.span,
                        ParseErrorKind::MalformedLine,
                        format!("`{}` takes exactly one state", head.text),
                    ));
                    continue;
                }
                let arg = &args[0];
                if !check_ident(arg, "state", ParseErrorKind::UnknownState, &mut errors) {
                    continue;
                }
                if arg.text == LIMIT_STATE {
                    errors.push(ParseError::new(
                        arg.span,
                        ParseErrorKind::ReservedState,
                        "`limit` is reserved and cannot halt",
                    ));
                    continue;
                }
                if halting.contains_key(arg.text) {
                    errors.push(ParseError::new(
                        arg.span,
                        ParseErrorKind::DuplicateDirective,
                        format!("state {:?} declared halting twice", arg.text),
                    ));
                    continue;
                }
                let kind = match head.text {
                    "accept" => HaltKind::Accept,
                    "reject" => HaltKind::Reject,
                    _ => HaltKind::Plain,
                };
                halting.insert(arg.text.to_string(), kind);
                halting_spans.insert(arg.text.to_string(), arg.span);
            }
            "rule" => {
                // rule <state> <read> -> <write> <move> <next>
                if args.len() != 6 || args[2].text != "->" {
                    errors.push(ParseError::new(
                        head.span,
                        ParseErrorKind::MalformedLine,
                        "expected `rule <state> <read> -> <write> <move> <next>`",
                    ));
                    continue;
                }
                let (state, read, _, write, mv, next) =
                    (&args[0], &args[1], &args[2], &args[3], &args[4], &args[5]);
                let mut ok = true;
                ok &= check_ident(state, "state", ParseErrorKind::UnknownState, &mut errors);
                ok &= check_ident(read, "symbol", ParseErrorKind::UnknownSymbol, &mut errors);
                ok &= check_ident(write, "symbol", ParseErrorKind::UnknownSymbol, &mut errors);
                ok &= check_ident(next, "state", ParseErrorKind::UnknownState, &mut errors);
                let movement = match Move::from_letter(mv.text) {
                    Some(m) => m,
                    None => {
                        errors.push(ParseError::new(
                            mv.span,
                            ParseErrorKind::BadMove,
                            format!("move must be L, R, or S, got {:?}", mv.text),
                        ));
                        ok = false;
                        Move::Stay
                    }
                };
                if next.text == LIMIT_STATE {
                    errors.push(ParseError::new(
                        next.span,
                        ParseErrorKind::ReservedState,
                        "rules cannot transition into the reserved `limit` state",
                    ));
                    ok = false;
                }
                if !ok {
                    continue;
                }
                rows.push(RuleRow {
                    state: state.text.to_string(),
                    read: read.text.to_string(),
                    action: Action {
                        write: write.text.to_string(),
                        movement,
                        next: next.text.to_string(),
                    },
                    span: head.span,
                });
            }
            other => {
                errors.push(ParseError::new(
                    head.span,
                    ParseErrorKind::UnknownDirective,
                    format!("unknown directive {other:?}"),
                ));
            }
        }
    }

    for (directive, present) in [
        ("machine", name.is_some()),
        ("blank", blank.is_some()),
        ("input_alphabet", input_alphabet.is_some()),
        ("tape_alphabet", tape_alphabet.is_some()),
        ("start", start.is_some()),
    ] {
        if !present {
            errors.push(ParseError::new(
                line_one,
                ParseErrorKind::MissingDirective,
                format!("missing `{directive}` directive"),
            ));
        }
    }

    let (
        Some((name, _)),
        Some((blank, blank_span)),
        Some((sigma, sigma_span)),
        Some((gamma, _)),
        Some((start, _)),
    ) = (name, blank, input_alphabet, tape_alphabet, start)
    else {
        return Err(errors);
    };

    // Alphabet relationships.
    if !gamma.contains(&blank) {
        errors.push(ParseError::new(
            blank_span,
            ParseErrorKind::UnknownSymbol,
            format!("blank {blank:?} must be listed in tape_alphabet"),
        ));
    }
    if sigma.contains(&blank) {
        errors.push(ParseError::new(
            sigma_span,
            ParseErrorKind::UnknownSymbol,
            format!("input_alphabet must not contain the blank {blank:?}"),
        ));
    }
    for sym in &sigma {
        if !gamma.iter().any(|g| g == sym) {
            errors.push(ParseError::new(
                sigma_span,
                ParseErrorKind::UnknownSymbol,
                format!("input symbol {sym:?} is not in tape_alphabet"),
            ));
        }
    }

    // Rule table: symbols must be declared; (state, read) must be unique.
    let mut rules: BTreeMap<(String, String), Action> = BTreeMap::new();
    for row in &rows {
        if machine_has_symbol(&gamma, &row.read).is_none() {
            errors.push(ParseError::new(
                row.span,
                ParseErrorKind::UnknownSymbol,
                format!("rule reads undeclared symbol {:?}", row.read),
            ));
            continue;
        }
        if machine_has_symbol(&gamma, &row.action.write).is_none() {
            errors.push(ParseError::new(
                row.span,
                ParseErrorKind::UnknownSymbol,
                format!("rule writes undeclared symbol {:?}", row.action.write),
            ));
            continue;
        }
        if halting.contains_key(&row.state) {
            errors.push(ParseError::new(
                row.span,
                ParseErrorKind::RuleFromHaltingState,
                format!("rule from halting state: ({}, {})", row.state, row.read),
            ));
            continue;
        }
        let key = (row.state.clone(), row.read.clone());
        if rules.contains_key(&key) {
            errors.push(ParseError::new(
                row.span,
                ParseErrorKind::DuplicateRule,
                format!("duplicate rule for ({}, {})", row.state, row.read),
            ));
            continue;
        }
        rules.insert(key, row.action.clone());
    }

    // Q is inferred: start, halting states, and every state a rule touches.
    let mut states: Vec<String> = Vec::new();
    let add_state = |s: &str, states: &mut Vec<String>| {
        if !states.iter().any(|q| q == s) {
            states.push(s.to_string());
        }
    };
    add_state(&start, &mut states);
    for state in halting.keys() {
        add_state(state, &mut states);
    }
    for ((state, _), action) in &rules {
        add_state(state, &mut states);
        add_state(&action.next, &mut states);
    }
    states.sort();

    // Totality over live states (the limit pseudo-state is exempt).
    if !partial {
        for state in &states {
            if halting.contains_key(state) || state == LIMIT_STATE {
                continue;
            }
            for sym in &gamma {
                if !rules.contains_key(&(state.clone(), sym.clone())) {
                    let span = rows
                        .iter()
                        .find(|r| &r.state == state)
                        .map(|r| r.span)
                        .unwrap_or(line_one);
                    errors.push(ParseError::new(
                        span,
                        ParseErrorKind::IncompleteRules,
                        format!("missing rule: ({state}, {sym})"),
                    ));
                }
            }
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }

    let machine = Machine {
        name,
        states,
        input_alphabet: sigma,
        tape_alphabet: gamma,
        blank,
        start,
        halting,
        rules,
        partial,
    };
    debug_assert!(
        machine.validate().is_empty(),
        "parser let an invalid machine through"
    );
    Ok(machine)
}

fn machine_has_symbol<'a>(gamma: &'a [String], sym: &str) -> Option<&'a String> {
    gamma.iter().find(|g| *g == sym)
}

/// Renders the canonical description: parsing it back yields a machine
/// structurally equal to `machine`.
pub fn serialize_machine(machine: &Machine) -> String {
    let mut out = String::new();
    out.push_str(&format!("machine {}\n", machine.name));
    out.push_str(&format!("blank {}\n", machine.blank));
    out.push_str(&format!(
        "input_alphabet {}\n",
        machine.input_alphabet.join(" ")
    ));
    out.push_str(&format!(
        "tape_alphabet {}\n",
        machine.tape_alphabet.join(" ")
    ));
    out.push_str(&format!("start {}\n", machine.start));
    if machine.partial {
        out.push_str("partial\n");
    }
    for (state, kind) in &machine.halting {
        out.push_str(&format!("{} {}\n", kind.keyword(), state));
    }
    for ((state, read), action) in &machine.rules {
        out.push_str(&format!(
            "rule {} {} -> {} {} {}\n",
            state, read, action.write, action.movement, action.next
        ));
    }
    out
}

/// Parses a tape literal. Symbols are single characters unless the literal
/// contains whitespace, in which case it is split into whitespace-separated
/// symbols (the form multi-character alphabets require). Every symbol must
/// belong to the machine's input alphabet.
pub fn parse_tape(literal: &str, machine: &Machine) -> Result<Tape, ParseError> {
    let mut symbols: Vec<(String, usize)> = Vec::new(); // (symbol, 1-based column)
    if literal.chars().any(|c| c.is_whitespace()) {
        let mut col = 0usize;
        let mut start: Option<usize> = None;
        let mut current = String::new();
        for ch in literal.chars().chain(std::iter::once(' ')) {
            col += 1;
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    symbols.push((std::mem::take(&mut current), s));
                }
            } else {
                if start.is_none() {
                    start = Some(col);
                }
                current.push(ch);
            }
        }
    } else {
        for (i, ch) in literal.chars().enumerate() {
            symbols.push((ch.to_string(), i + 1));
        }
    }

    let mut cells = Vec::with_capacity(symbols.len());
    for (sym, col) in symbols {
        if !machine.input_alphabet.contains(&sym) {
            return Err(ParseError::new(
                SourceSpan {
                    line: 1,
                    column: col,
                    length: sym.chars().count().max(1),
                },
                ParseErrorKind::UnknownSymbol,
                format!("symbol {sym:?} is not in the input alphabet"),
            ));
        }
        cells.push(sym);
    }
    Ok(Tape::from_symbols(machine.blank.clone(), cells))
}

/// Parses an ordinal literal (`17`, `w`, `w+3`, `w*2+1`).
pub fn parse_ordinal(text: &str) -> Result<OrdinalTime, ParseError> {
    text.parse::<OrdinalTime>().map_err(|e| {
        ParseError::new(
            SourceSpan {
                line: 1,
                column: 1,
                length: text.chars().count().max(1),
            },
            ParseErrorKind::BadOrdinal,
            e,
        )
    })
}

/// Renders an ordinal in its canonical literal form.
pub fn format_ordinal(t: OrdinalTime) -> String {
    t.to_string()
}

/// Joiner for tape text in trace lines: plain concatenation when every
/// tape symbol is a single character, `.`-separated otherwise.
fn tape_joiner(machine: &Machine) -> &'static str {
    if machine.single_char_alphabet() {
        ""
    } else {
        "."
    }
}

/// Renders one trace line: `t=<ordinal> state=<id> head=<int> tape=<span>`.
pub fn format_trace_step(step: &crate::exec::TraceStep, machine: &Machine) -> String {
    let tape = match step.config.tape.span() {
        None => "-".to_string(),
        Some((min, max)) => format!(
            "{}..{}:{}",
            min,
            max,
            step.config.tape.contiguous_text(tape_joiner(machine))
        ),
    };
    format!(
        "t={} state={} head={} tape={}",
        step.time, step.config.state, step.config.head, tape
    )
}

/// Renders the outcome line that terminates a trace.
pub fn format_outcome(trace: &Trace) -> String {
    match &trace.outcome {
        Outcome::Halted { kind } => {
            format!(
                "outcome=Halted kind={} steps={}",
                kind.keyword(),
                trace.len() - 1
            )
        }
        Outcome::Running => format!("outcome=Running budget={}", trace.step_budget),
        Outcome::CycleDetected { start, period } => {
            format!("outcome=Cycle start={start} period={period}")
        }
        Outcome::TranslationCycleDetected { period, drift } => {
            format!("outcome=TranslationCycle period={period} drift={drift:+}")
        }
    }
}

/// The full line-per-step trace text: one line per recorded step plus one
/// outcome line.
pub fn format_trace(trace: &Trace, machine: &Machine) -> String {
    let mut out = String::new();
    for step in &trace.steps {
        out.push_str(&format_trace_step(step, machine));
        out.push('\n');
    }
    out.push_str(&format_outcome(trace));
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::run;

    const COUNTER: &str = include_str!("../tests/machines/binary_counter.tm");

    #[test]
    fn parses_the_binary_counter_file() {
        let machine = parse_machine(COUNTER).unwrap();
        assert_eq!(machine.name, "binary_counter");
        assert_eq!(machine.rules.len(), 6);
        assert_eq!(machine.states, vec!["q0", "q1", "qh"]);
        assert_eq!(machine.tape_alphabet, vec!["B", "0", "1"]);
        assert_eq!(machine.halting.get("qh"), Some(&HaltKind::Plain));
        assert!(!machine.partial);
    }

    #[test]
    fn serialization_is_the_canonical_file_byte_for_byte() {
        let machine = parse_machine(COUNTER).unwrap();
        assert_eq!(serialize_machine(&machine), COUNTER);
    }

    #[test]
    fn round_trip_preserves_structure() {
        let machine = parse_machine(COUNTER).unwrap();
        let reparsed = parse_machine(&serialize_machine(&machine)).unwrap();
        assert_eq!(machine, reparsed);
    }

    #[test]
    fn duplicate_rule_is_reported_at_second_occurrence() {
        let source = format!("{COUNTER}rule q0 1 -> 0 L q1\n");
        let errors = parse_machine(&source).unwrap_err();
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].kind, ParseErrorKind::DuplicateRule);
        assert_eq!(errors[0].span.line, 13);
    }

    #[test]
    fn undeclared_symbol_in_rule_is_reported() {
        let source = COUNTER.replace("rule q1 0 -> 1 S qh", "rule q1 2 -> 1 S qh");
        let errors = parse_machine(&source).unwrap_err();
        assert!(errors
            .iter()
            .any(|e| e.kind == ParseErrorKind::UnknownSymbol && e.message.contains("\"2\"")));
        // The dropped rule also leaves (q1, 0) uncovered.
        assert!(errors
            .iter()
            .any(|e| e.kind == ParseErrorKind::IncompleteRules && e.message.contains("(q1, 0)")));
    }

    #[test]
    fn missing_pair_is_incomplete_unless_partial() {
        let source = COUNTER.replace("rule q1 0 -> 1 S qh\n", "");
        let errors = parse_machine(&source).unwrap_err();
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].kind, ParseErrorKind::IncompleteRules);
        assert!(errors[0].message.contains("(q1, 0)"));

        let partial_source = source.replace("start q0\n", "start q0\npartial\n");
        let machine = parse_machine(&partial_source).unwrap();
        assert!(machine.partial);
        assert_eq!(serialize_machine(&machine).matches("partial\n").count(), 1);
    }

    #[test]
    fn all_errors_are_accumulated_with_spans_inside_the_source() {
        let source = "machine broken\nbogus directive\nrule q0 0 -> 0 X q0\n";
        let errors = parse_machine(source).unwrap_err();
        assert!(errors.len() >= 3, "expected several errors, got {errors:?}");
        let lines = source.lines().count();
        for err in &errors {
            assert!(err.span.line >= 1 && err.span.line <= lines);
            assert!(err.span.column >= 1);
        }
        assert!(errors
            .iter()
            .any(|e| e.kind == ParseErrorKind::UnknownDirective));
        assert!(errors.iter().any(|e| e.kind == ParseErrorKind::BadMove));
        assert!(errors
            .iter()
            .any(|e| e.kind == ParseErrorKind::MissingDirective));
    }

    #[test]
    fn limit_is_reserved_as_start_and_target() {
        let source = "machine m\nblank B\ninput_alphabet 1\ntape_alphabet B 1\nstart limit\n";
        let errors = parse_machine(source).unwrap_err();
        assert!(errors
            .iter()
            .any(|e| e.kind == ParseErrorKind::ReservedState));

        let source = COUNTER.replace("rule q0 B -> B L q1", "rule q0 B -> B L limit");
        let errors = parse_machine(&source).unwrap_err();
        assert!(errors
            .iter()
            .any(|e| e.kind == ParseErrorKind::ReservedState));
    }

    #[test]
    fn tape_literals_parse_by_character() {
        let machine = parse_machine(COUNTER).unwrap();
        let tape = parse_tape("11", &machine).unwrap();
        assert_eq!(tape.read(0), "1");
        assert_eq!(tape.read(1), "1");
        assert_eq!(tape.read(2), "B");

        assert!(parse_tape("", &machine).unwrap().is_all_blank());

        let err = parse_tape("102", &machine).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownSymbol);
        assert_eq!(err.span.column, 3);
    }

    #[test]
    fn space_separated_literals_support_multi_character_symbols() {
        let source =
            "machine m\nblank B\ninput_alphabet aa bb\ntape_alphabet B aa bb\nstart s\nhalt s\n";
        let machine = parse_machine(source).unwrap();
        let tape = parse_tape("aa bb aa", &machine).unwrap();
        assert_eq!(tape.read(0), "aa");
        assert_eq!(tape.read(1), "bb");
        assert_eq!(tape.read(2), "aa");
    }

    #[test]
    fn ordinal_literal_helpers_round_trip() {
        assert_eq!(
            parse_ordinal("w+1").unwrap(),
            OrdinalTime {
                limits: 1,
                offset: 1
            }
        );
        assert_eq!(parse_ordinal("0").unwrap(), OrdinalTime::finite(0));
        assert_eq!(format_ordinal(parse_ordinal("w*2").unwrap()), "w*2");
        assert_eq!(
            parse_ordinal("w-3").unwrap_err().kind,
            ParseErrorKind::BadOrdinal
        );
    }

    #[test]
    fn trace_format_has_one_line_per_step_plus_outcome() {
        let machine = parse_machine(COUNTER).unwrap();
        let trace = run(&machine, &parse_tape("11", &machine).unwrap(), 100).unwrap();
        let text = format_trace(&trace, &machine);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), trace.len() + 1);
        assert_eq!(lines[0], "t=0 state=q0 head=0 tape=0..1:11");
        assert_eq!(lines.last().unwrap(), &"outcome=Halted kind=halt steps=6");
        assert!(lines[lines.len() - 2].contains("tape=-1..1:100"));
    }
}
