//! Step and bounded-run semantics for classical machines.
//!
//! A run records every configuration it passes through and stops on halt,
//! budget exhaustion, exact configuration repetition, or repetition modulo
//! a uniform head shift (the two lasso witnesses of divergence).

use std::collections::HashMap;

use crate::machine::{Action, HaltKind, Machine, StateId, IMPLICIT_REJECT};
use crate::ordinal::OrdinalTime;
use crate::tape::{Symbol, Tape};

/// A composite machine state: control state, head position, tape contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub state: StateId,
    pub head: i64,
    pub tape: Tape,
}

impl Configuration {
    /// The starting configuration: start state, head at position 0.
    pub fn initial(machine: &Machine, tape: Tape) -> Self {
        Configuration {
            state: machine.start.clone(),
            head: 0,
            tape,
        }
    }

    /// Deterministic text rendering; equal configurations produce equal
    /// keys and vice versa. Contains no spaces, commas, or quotes so it can
    /// be embedded in every file format this crate writes.
    pub fn canonical_key(&self) -> String {
        match self.tape.span() {
            None => format!("{}|{}|-", self.state, self.head),
            Some((min, max)) => format!(
                "{}|{}|{}:{}|{}",
                self.state,
                self.head,
                min,
                max,
                self.tape.contiguous_text(".")
            ),
        }
    }

    /// Canonical key after shifting the tape so the head sits at 0. Two
    /// configurations share this key exactly when one is a uniform
    /// translation of the other.
    pub fn translation_key(&self) -> String {
        let shifted = Configuration {
            state: self.state.clone(),
            head: 0,
            tape: self.tape.shifted(-self.head),
        };
        shifted.canonical_key()
    }
}

/// What produced a recorded configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Applied {
    /// The initial configuration (time 0, or the seed of a later stage).
    Input,
    /// A transition rule, recorded with its source so traces are
    /// self-contained.
    Rule {
        state: StateId,
        read: Symbol,
        action: Action,
    },
    /// A `partial` machine hit a missing pair and rejected implicitly.
    ImplicitReject,
    /// The configuration was produced by the limit-supremum rule at a
    /// limit ordinal.
    Limit,
}

impl Applied {
    /// Short deterministic label used on graph edges.
    pub fn label(&self) -> String {
        match self {
            Applied::Input => "input".to_string(),
            Applied::Rule {
                state,
                read,
                action,
            } => format!(
                "{} {} -> {} {} {}",
                state, read, action.write, action.movement, action.next
            ),
            Applied::ImplicitReject => "implicit-reject".to_string(),
            Applied::Limit => "limit".to_string(),
        }
    }
}

/// One recorded step of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub time: OrdinalTime,
    pub config: Configuration,
    pub applied: Applied,
}

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// Reached a halting state; the final configuration is the last step.
    Halted { kind: HaltKind },
    /// Step budget exhausted with no halt or repetition.
    Running,
    /// The configuration at `start` recurred exactly `period` steps later.
    CycleDetected { start: usize, period: usize },
    /// The last recorded configuration repeats the one `period` steps
    /// before it, shifted by `drift` cells with identical head-relative
    /// tape — the runaway-head form of divergence.
    TranslationCycleDetected { period: usize, drift: i64 },
}

/// An executed run: every configuration in order, plus why it stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub machine_name: String,
    pub steps: Vec<TraceStep>,
    pub outcome: Outcome,
    pub step_budget: usize,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn final_config(&self) -> &Configuration {
        &self
            .steps
            .last()
            .expect("trace has at least the initial step")
            .config
    }

    /// Canonical keys of every recorded configuration, in step order.
    pub fn key_sequence(&self) -> Vec<String> {
        self.steps
            .iter()
            .map(|s| s.config.canonical_key())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error("no rule for ({state}, {symbol})")]
    MissingRule { state: StateId, symbol: Symbol },
    #[error("stepped a halted machine (state {state})")]
    HaltedMachineStepped { state: StateId },
}

/// Applies one transition. The input configuration is untouched; the
/// successor is a fresh value.
pub fn step(machine: &Machine, config: &Configuration) -> Result<Configuration, ExecError> {
    step_applied(machine, config).map(|(next, _)| next)
}

/// Like [`step`], also reporting what was applied.
pub fn step_applied(
    machine: &Machine,
    config: &Configuration,
) -> Result<(Configuration, Applied), ExecError> {
    if machine.is_halting(&config.state) {
        return Err(ExecError::HaltedMachineStepped {
            state: config.state.clone(),
        });
    }
    let read = config.tape.read(config.head).clone();
    match machine.rule(&config.state, &read) {
        Some(action) => {
            let mut tape = config.tape.clone();
            tape.write(config.head, action.write.clone());
            let next = Configuration {
                state: action.next.clone(),
                head: config.head + action.movement.offset(),
                tape,
            };
            let applied = Applied::Rule {
                state: config.state.clone(),
                read,
                action: action.clone(),
            };
            Ok((next, applied))
        }
        None if machine.partial => {
            let next = Configuration {
                state: IMPLICIT_REJECT.to_string(),
                head: config.head,
                tape: config.tape.clone(),
            };
            Ok((next, Applied::ImplicitReject))
        }
        None => Err(ExecError::MissingRule {
            state: config.state.clone(),
            symbol: read,
        }),
    }
}

/// How one stage of stepping ended. Indices are into the shared step list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum StageEnd {
    Halted(HaltKind),
    Running,
    Cycle { start: usize, period: usize },
    Translation { period: usize, drift: i64 },
}

/// Steps from the last configuration already in `steps`, recording each
/// successor at `base.plus(1)`, `base.plus(2)`, …. Repetition detection is
/// local to this stage.
pub(crate) fn execute_stage(
    machine: &Machine,
    steps: &mut Vec<TraceStep>,
    base: OrdinalTime,
    budget: usize,
) -> Result<StageEnd, ExecError> {
    let stage_start = steps.len() - 1;
    let mut current = steps[stage_start].config.clone();

    if machine.is_halting(&current.state) {
        let kind = machine
            .halt_kind(&current.state)
            .expect("halting state has a kind");
        return Ok(StageEnd::Halted(kind));
    }

    let mut exact_seen: HashMap<String, usize> = HashMap::new();
    let mut shifted_seen: HashMap<String, (usize, i64)> = HashMap::new();
    exact_seen.insert(current.canonical_key(), stage_start);
    shifted_seen.insert(current.translation_key(), (stage_start, current.head));

    for n in 1..=budget {
        let (next, applied) = step_applied(machine, &current)?;
        let index = steps.len();
        steps.push(TraceStep {
            time: base.plus(n as u64),
            config: next.clone(),
            applied,
        });

        if machine.is_halting(&next.state) {
            let kind = machine
                .halt_kind(&next.state)
                .expect("halting state has a kind");
            return Ok(StageEnd::Halted(kind));
        }
        let key = next.canonical_key();
        if let Some(&start) = exact_seen.get(&key) {
            return Ok(StageEnd::Cycle {
                start,
                period: index - start,
            });
        }
        let shifted_key = next.translation_key();
        if let Some(&(start, old_head)) = shifted_seen.get(&shifted_key) {
            // Equal heads would have matched the exact key above.
            return Ok(StageEnd::Translation {
                period: index - start,
                drift: next.head - old_head,
            });
        }
        exact_seen.insert(key, index);
        shifted_seen.insert(shifted_key, (index, next.head));
        current = next;
    }
    Ok(StageEnd::Running)
}

/// Runs the machine from `input` for at most `budget` steps, recording
/// every configuration.
pub fn run(machine: &Machine, input: &Tape, budget: usize) -> Result<Trace, ExecError> {
    assert!(budget >= 1, "run needs a budget of at least 1");
    let initial = Configuration::initial(machine, input.clone());
    let mut steps = vec![TraceStep {
        time: OrdinalTime::ZERO,
        config: initial,
        applied: Applied::Input,
    }];
    let end = execute_stage(machine, &mut steps, OrdinalTime::ZERO, budget)?;
    let outcome = match end {
        StageEnd::Halted(kind) => Outcome::Halted { kind },
        StageEnd::Running => Outcome::Running,
        StageEnd::Cycle { start, period } => Outcome::CycleDetected { start, period },
        StageEnd::Translation { period, drift } => {
            Outcome::TranslationCycleDetected { period, drift }
        }
    };
    Ok(Trace {
        machine_name: machine.name.clone(),
        steps,
        outcome,
        step_budget: budget,
    })
}
