//! Execution past ω: the limit-supremum configuration at limit ordinals,
//! continuation through the reserved `limit` state, and the desk-scale
//! halting decision.
//!
//! At a limit ordinal the tape is set cellwise to the largest symbol (in
//! the declared ascending alphabet order) that the cell takes cofinally
//! often. A detected cycle stands in for "approaching the limit": the
//! cycle's contents are exactly the cofinal behavior, so the limsup of a
//! cell is the maximum over one full period. Control convention at the
//! limit: head at 0, state `limit` (the convention of the ITTM
//! literature); machines opt into post-ω behavior by defining rules with
//! `limit` as source.

use std::collections::BTreeMap;

use crate::exec::{
    execute_stage, run, Applied, Configuration, ExecError, Outcome, StageEnd, Trace, TraceStep,
};
use crate::machine::{Machine, LIMIT_STATE};
use crate::ordinal::OrdinalTime;
use crate::tape::{Symbol, Tape};

/// The limit configuration at a limit ordinal, with the per-cell evidence
/// that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitReport {
    pub limit_config: Configuration,
    /// Step index (into the source trace) where the detected cycle starts.
    pub cycle_start: usize,
    pub period: usize,
    /// For every cell non-blank at some point in the cycle: the set of
    /// symbols it takes infinitely often (in alphabet order) and the chosen
    /// limsup symbol.
    pub per_cell: BTreeMap<i64, CellLimit>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellLimit {
    pub seen: Vec<Symbol>,
    pub limsup: Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransfiniteError {
    #[error("no cycle found: the trace ended with {outcome}")]
    NoCycleFound { outcome: String },
    #[error(
        "unbounded tape: translation cycle (period {period}, drift {drift:+}) drifts its \
         content to infinity, so the limit tape would be degenerate"
    )]
    UnboundedTape { period: usize, drift: i64 },
    #[error("no halt and no cycle within the stage budget of {budget}")]
    LimitUndetectedWithinBudget { budget: usize },
    #[error(transparent)]
    Exec(#[from] ExecError),
}

/// Computes the limsup configuration from a trace that ended in an exact
/// cycle. Cells untouched during the cycle are blank; head resets to 0 and
/// control enters the `limit` state.
pub fn limit_configuration(
    trace: &Trace,
    machine: &Machine,
) -> Result<LimitReport, TransfiniteError> {
    match trace.outcome {
        Outcome::CycleDetected { start, period } => Ok(limit_from_window(
            machine,
            &trace.steps[start..=start + period],
            start,
            period,
        )),
        Outcome::TranslationCycleDetected { period, drift } => {
            Err(TransfiniteError::UnboundedTape { period, drift })
        }
        Outcome::Halted { .. } => Err(TransfiniteError::NoCycleFound {
            outcome: "Halted".to_string(),
        }),
        Outcome::Running => Err(TransfiniteError::NoCycleFound {
            outcome: "Running".to_string(),
        }),
    }
}

/// The limsup over one recorded period. `window` holds the cycle's
/// configurations with the repeat included (`window.len() == period + 1`,
/// first and last configurations equal).
fn limit_from_window(
    machine: &Machine,
    window: &[TraceStep],
    cycle_start: usize,
    period: usize,
) -> LimitReport {
    debug_assert_eq!(window.len(), period + 1);
    debug_assert_eq!(
        window.first().map(|s| &s.config),
        window.last().map(|s| &s.config)
    );

    // One full period; the final entry repeats the first.
    let configs: Vec<&Configuration> = window[..period].iter().map(|s| &s.config).collect();

    // Union of cells that are non-blank at least once during the period.
    let mut touched: Vec<i64> = configs
        .iter()
        .flat_map(|c| c.tape.stored().map(|(p, _)| p))
        .collect();
    touched.sort_unstable();
    touched.dedup();

    let order = |sym: &str| {
        machine
            .symbol_index(sym)
            .expect("trace symbols come from the machine's tape alphabet")
    };

    let mut per_cell = BTreeMap::new();
    let mut tape = Tape::new(machine.blank.clone());
    for pos in touched {
        let mut seen: Vec<Symbol> = configs.iter().map(|c| c.tape.read(pos).clone()).collect();
        seen.sort_by_key(|s| order(s));
        seen.dedup();
        let limsup = seen
            .last()
            .expect("at least one value per touched cell")
            .clone();
        tape.write(pos, limsup.clone());
        per_cell.insert(pos, CellLimit { seen, limsup });
    }

    LimitReport {
        limit_config: Configuration {
            state: LIMIT_STATE.to_string(),
            head: 0,
            tape,
        },
        cycle_start,
        period,
        per_cell,
    }
}

/// Runs the machine through up to `max_limits` limit stages. Each stage
/// gets `stage_budget` steps; when a stage cycles, the limit configuration
/// is appended at ω·(k+1) and — if the machine defines `limit` rules —
/// stepping continues at ω·(k+1)+1, ω·(k+1)+2, ….
///
/// A stage that exhausts its budget without halting or cycling is an
/// error (`LimitUndetectedWithinBudget`): no limit ordinal was reached. A
/// translation cycle is an error (`UnboundedTape`) only if another limit
/// stage was permitted; with the limit budget exhausted it is reported as
/// the trace outcome, like a plain run.
pub fn run_transfinite(
    machine: &Machine,
    input: &Tape,
    stage_budget: usize,
    max_limits: usize,
) -> Result<Trace, TransfiniteError> {
    assert!(
        stage_budget >= 1,
        "run_transfinite needs a stage budget of at least 1"
    );
    let initial = Configuration::initial(machine, input.clone());
    let mut steps = vec![TraceStep {
        time: OrdinalTime::ZERO,
        config: initial,
        applied: Applied::Input,
    }];

    let mut base = OrdinalTime::ZERO;
    let mut limits_used: u64 = 0;
    let outcome = loop {
        let end = execute_stage(machine, &mut steps, base, stage_budget)?;
        match end {
            StageEnd::Halted(kind) => break Outcome::Halted { kind },
            StageEnd::Running => {
                return Err(TransfiniteError::LimitUndetectedWithinBudget {
                    budget: stage_budget,
                })
            }
            StageEnd::Translation { period, drift } => {
                if (limits_used as usize) < max_limits {
                    return Err(TransfiniteError::UnboundedTape { period, drift });
                }
                break Outcome::TranslationCycleDetected { period, drift };
            }
            StageEnd::Cycle { start, period } => {
                if (limits_used as usize) >= max_limits {
                    break Outcome::CycleDetected { start, period };
                }
                limits_used += 1;
                let report =
                    limit_from_window(machine, &steps[start..=start + period], start, period);
                base = OrdinalTime::limit(limits_used);
                steps.push(TraceStep {
                    time: base,
                    config: report.limit_config,
                    applied: Applied::Limit,
                });
                if !machine.has_limit_rules() {
                    // Nothing is defined past ω; the trace ends at the
                    // limit configuration with the witnessing cycle.
                    break Outcome::CycleDetected { start, period };
                }
            }
        }
    };

    Ok(Trace {
        machine_name: machine.name.clone(),
        steps,
        outcome,
        step_budget: stage_budget,
    })
}

/// The desk-scale ω-decision. `Diverges` is only returned with a cycle
/// witness that replays to a repetition; machines whose divergence is not
/// cycle-witnessed within the budget come back `Unknown`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HaltingVerdict {
    Halts { steps: usize },
    Diverges { witness: DivergenceWitness },
    Unknown { budget: usize },
}

/// A verifiable divergence witness: replaying `period` steps from `config`
/// reproduces it exactly (or shifted by `drift` for translation cycles).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DivergenceWitness {
    ExactCycle {
        config: Configuration,
        start: usize,
        period: usize,
    },
    TranslationCycle {
        config: Configuration,
        start: usize,
        period: usize,
        drift: i64,
    },
}

pub fn decide_halting_at_omega(
    machine: &Machine,
    input: &Tape,
    budget: usize,
) -> Result<HaltingVerdict, ExecError> {
    let trace = run(machine, input, budget)?;
    Ok(match trace.outcome {
        Outcome::Halted { .. } => HaltingVerdict::Halts {
            steps: trace.len() - 1,
        },
        Outcome::CycleDetected { start, period } => HaltingVerdict::Diverges {
            witness: DivergenceWitness::ExactCycle {
                config: trace.steps[start].config.clone(),
                start,
                period,
            },
        },
        Outcome::TranslationCycleDetected { period, drift } => {
            let start = trace.len() - 1 - period;
            HaltingVerdict::Diverges {
                witness: DivergenceWitness::TranslationCycle {
                    config: trace.steps[start].config.clone(),
                    start,
                    period,
                    drift,
                },
            }
        }
        Outcome::Running => HaltingVerdict::Unknown { budget },
    })
}
