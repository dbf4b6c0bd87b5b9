//! The symbol-rule loop for one conclusion.

use std::collections::{BTreeMap, HashMap, VecDeque};

use super::{ActivitySpec, CandidateRule, CandidateStatus, CostLedger, InstantiateError, LoopConfig, RoundStats};
use crate::graph::{decompose, GraphError, Provenance, SubSystem, SymbolId, SymbolicSystem};
use crate::oracle::{
    parse_condition, parse_entailment, parse_symbol_init, render_entailment, render_rule_extension,
    render_symbol_init_n, Attempted, EntailmentChoice, Oracle, OracleError, OracleSession, PromptKind,
};
use crate::text::{canonicalize_symbol_text, phrase_from_answer};

/// Mean entailment score of one premise set.
#[derive(Debug, Clone, PartialEq)]
pub struct EntailmentScore {
    pub mean: f64,
    pub flagged_unknown: bool,
    pub choices: Vec<EntailmentChoice>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExtensionOutcome {
    /// Canonical text of the appended premise.
    Added(String),
    /// Unparseable or degenerate answers; the candidate was abandoned.
    Invalid,
}

/// Result of one conclusion's loop.
#[derive(Debug, Clone)]
pub struct SubsystemRun {
    pub activity: ActivitySpec,
    pub subsystem: SubSystem,
    pub ledger: CostLedger,
}

impl SubsystemRun {
    pub fn rule_count(&self) -> usize {
        self.subsystem.rules.len()
    }

    /// Symbols other than the conclusion.
    pub fn premise_symbol_count(&self) -> usize {
        self.subsystem.symbols.len() - 1
    }
}

/// Loop state plus the per-step operations. Well-formed calls made for the
/// current candidate are held as pending until the candidate resolves.
pub struct SubsystemLoop<'a> {
    session: OracleSession<'a>,
    config: LoopConfig,
    activity: ActivitySpec,
    conclusion_text: String,
    conclusion_id: SymbolId,
    prompt_activity: String,
    working: SymbolicSystem,
    symbol_round: HashMap<SymbolId, u32>,
    queue: VecDeque<SymbolId>,
    admitted: u32,
    round_stats: BTreeMap<u32, RoundStats>,
    ledger: CostLedger,
    pending_entailment: u64,
    pending_extension: u64,
}

impl<'a> SubsystemLoop<'a> {
    pub fn new(activity: &ActivitySpec, oracle: &'a dyn Oracle, config: &LoopConfig) -> Result<Self, InstantiateError> {
        config.validate()?;
        let conclusion_text = activity.conclusion_text()?;
        let mut working = SymbolicSystem::new();
        let conclusion_id =
            working.upsert_symbol(&activity.activity, true).map_err(|_| InstantiateError::EmptyConclusion)?;
        let mut session = OracleSession::new(oracle, config.decode);
        session.max_resamples = config.max_resamples;
        Ok(Self {
            session,
            config: config.clone(),
            prompt_activity: activity.prompt_activity(),
            activity: activity.clone(),
            ledger: CostLedger::new(conclusion_text.clone()),
            conclusion_text,
            conclusion_id,
            working,
            symbol_round: HashMap::new(),
            queue: VecDeque::new(),
            admitted: 0,
            round_stats: BTreeMap::new(),
            pending_entailment: 0,
            pending_extension: 0,
        })
    }

    pub fn ledger(&self) -> &CostLedger {
        &self.ledger
    }

    /// Splits an attempt's calls into malformed and failed buckets; returns
    /// whether a well-formed response was obtained.
    fn account<T>(&mut self, attempt: &Attempted<T>) -> bool {
        let calls = u64::from(attempt.calls);
        match &attempt.result {
            Ok(_) => {
                self.ledger.resample_queries += calls - 1;
                true
            }
            Err(e) if e.is_retryable() => {
                self.ledger.resample_queries += calls;
                false
            }
            Err(_) => {
                self.ledger.resample_queries += calls.saturating_sub(1);
                self.ledger.failed_queries += calls.min(1);
                false
            }
        }
    }

    /// Initial symbols, canonical, deduplicated, conclusion removed. Uses
    /// the activity's given symbols without a query when present.
    pub fn initialize_symbols(&mut self) -> Result<Vec<(String, String)>, OracleError> {
        let phrases = match &self.activity.initial_symbols {
            Some(given) => given.clone(),
            None => {
                let count = self.config.init_symbol_count as usize;
                let prompt = render_symbol_init_n(&self.prompt_activity, self.activity.object.as_deref(), count);
                let attempt = self.session.query(PromptKind::SymbolInit, &prompt, |raw| parse_symbol_init(raw, count));
                if self.account(&attempt) {
                    self.ledger.init_queries += 1;
                }
                attempt.result?
            }
        };
        let mut out: Vec<(String, String)> = Vec::new();
        for phrase in phrases {
            let raw = phrase_from_answer(&phrase);
            let Ok(canonical) = canonicalize_symbol_text(&raw) else { continue };
            if canonical != self.conclusion_text && !out.iter().any(|(c, _)| *c == canonical) {
                out.push((canonical, raw));
            }
        }
        Ok(out)
    }

    /// `n_ent` samples of the entailment prompt; unknown counts as 0.5 and
    /// flags the result. Means are computed from integer thousandths.
    pub fn score_entailment(&mut self, premises: &[String]) -> Result<EntailmentScore, OracleError> {
        let prompt = render_entailment(premises, &self.prompt_activity, self.activity.object.as_deref());
        let mut choices = Vec::with_capacity(self.config.n_ent as usize);
        for _ in 0..self.config.n_ent {
            let attempt = self.session.query(PromptKind::EntailmentCheck, &prompt, parse_entailment);
            if self.account(&attempt) {
                self.pending_entailment += 1;
            }
            choices.push(attempt.result?);
        }
        let total: u64 = choices.iter().map(|c| u64::from(c.thousandths().unwrap_or(500))).sum();
        Ok(EntailmentScore {
            mean: total as f64 / (f64::from(self.config.n_ent) * 1000.0),
            flagged_unknown: choices.contains(&EntailmentChoice::Unknown),
            choices,
        })
    }

    /// Asks for one more premise. A phrase equal to an existing premise or
    /// the conclusion is resampled once, then the candidate is abandoned.
    pub fn extend_rule(
        &mut self,
        candidate: &mut CandidateRule,
        raws: &mut Vec<String>,
    ) -> Result<ExtensionOutcome, OracleError> {
        let prompt = render_rule_extension(&candidate.premises, &self.prompt_activity, self.activity.object.as_deref());
        let mut echoed = false;
        loop {
            let attempt = self.session.query(PromptKind::RuleExtension, &prompt, parse_condition);
            let wellformed = self.account(&attempt);
            let answer = match attempt.result {
                Ok(answer) => answer,
                Err(e) if e.is_retryable() => {
                    candidate.abandon_invalid();
                    return Ok(ExtensionOutcome::Invalid);
                }
                Err(e) => return Err(e),
            };
            debug_assert!(wellformed);
            let raw = phrase_from_answer(&answer);
            let degenerate = match canonicalize_symbol_text(&raw) {
                Ok(canonical) if canonical != self.conclusion_text && !candidate.contains(&canonical) => {
                    self.pending_extension += 1;
                    candidate.push_premise(canonical.clone());
                    raws.push(raw);
                    return Ok(ExtensionOutcome::Added(canonical));
                }
                _ => true,
            };
            if degenerate && !echoed {
                echoed = true;
                self.ledger.resample_queries += 1;
                continue;
            }
            self.pending_extension += 1;
            candidate.abandon_invalid();
            return Ok(ExtensionOutcome::Invalid);
        }
    }

    fn admit(&mut self, id: SymbolId) {
        if self.admitted < self.config.max_extension_symbols {
            self.admitted += 1;
            self.queue.push_back(id);
        }
    }

    fn stats(&mut self, round: u32) -> &mut RoundStats {
        self.round_stats.entry(round).or_insert(RoundStats { round, ..RoundStats::default() })
    }

    fn flush_pending(&mut self, accepted: bool) {
        let (ent, ext) = (self.pending_entailment, self.pending_extension);
        self.pending_entailment = 0;
        self.pending_extension = 0;
        if accepted {
            self.ledger.entailment_queries += ent;
            self.ledger.extension_queries += ext;
        } else {
            self.ledger.early_stop_queries += ent + ext;
        }
    }

    /// Grows one candidate from `seed` to acceptance or abandonment and, if
    /// accepted and new, adds it to the working system.
    fn grow(&mut self, seed: SymbolId) -> Result<CandidateStatus, OracleError> {
        let seed_symbol = &self.working.symbol(seed).expect("queued symbols exist");
        let mut candidate = CandidateRule::new(seed_symbol.text.clone());
        let mut raws = vec![seed_symbol.raw_text.clone()];
        let result = self.grow_candidate(&mut candidate, &mut raws);
        if let Err(e) = result {
            self.flush_pending(false);
            return Err(e);
        }
        if !candidate.scores.is_empty() {
            self.ledger.candidate_premise_counts.push(candidate.scores.len() as u32);
        }
        match candidate.status {
            CandidateStatus::Accepted => self.accept(seed, &candidate, &raws),
            CandidateStatus::AbandonedDrop => self.ledger.abandoned_drop += 1,
            CandidateStatus::AbandonedCap => self.ledger.abandoned_cap += 1,
            CandidateStatus::AbandonedInvalid => self.ledger.abandoned_invalid += 1,
            CandidateStatus::Extending => unreachable!("grow_candidate resolves every candidate"),
        }
        if candidate.status != CandidateStatus::Accepted {
            self.flush_pending(false);
        }
        Ok(candidate.status)
    }

    fn grow_candidate(&mut self, candidate: &mut CandidateRule, raws: &mut Vec<String>) -> Result<(), OracleError> {
        loop {
            let score = match self.score_entailment(&candidate.premises) {
                Ok(score) => score,
                Err(e) if e.is_retryable() => {
                    candidate.abandon_invalid();
                    return Ok(());
                }
                Err(e) => return Err(e),
            };
            candidate.flagged_unknown |= score.flagged_unknown;
            if candidate.record_score(score.mean, &self.config) != CandidateStatus::Extending {
                return Ok(());
            }
            if self.extend_rule(candidate, raws)? == ExtensionOutcome::Invalid {
                return Ok(());
            }
        }
    }

    fn accept(&mut self, seed: SymbolId, candidate: &CandidateRule, raws: &[String]) {
        let round = self.symbol_round[&seed] + 1;
        let fresh: Vec<bool> = candidate.premises.iter().map(|p| self.working.find_symbol(p).is_none()).collect();
        let provenance =
            Provenance { round_index: round, flagged_unknown: candidate.flagged_unknown, ..Provenance::default() };
        match self.working.add_rule(raws, &self.conclusion_text, candidate.final_score(), provenance) {
            Ok(rule_id) => {
                self.flush_pending(true);
                self.ledger.rule_premise_counts.push(candidate.premises.len() as u32);
                self.stats(round).new_rules += 1;
                let trace = self.working.rule(rule_id).expect("rule just added").provenance.extension_trace.clone();
                for (id, is_new) in trace.into_iter().zip(fresh) {
                    if is_new {
                        self.symbol_round.insert(id, round);
                        self.stats(round).new_symbols += 1;
                        self.admit(id);
                    }
                }
            }
            Err(GraphError::DuplicateRule { .. }) => {
                self.ledger.duplicates_skipped += 1;
                self.flush_pending(false);
            }
            Err(_) => {
                self.ledger.abandoned_invalid += 1;
                self.flush_pending(false);
            }
        }
    }

    /// Runs the loop to completion. On a fatal oracle error the state so far
    /// is kept and can still be turned into a partial run.
    pub fn execute(&mut self) -> Result<(), OracleError> {
        for (canonical, raw) in self.initialize_symbols()? {
            let before = self.working.symbol_count();
            let id = self.working.upsert_symbol(&raw, false).expect("canonicalizable");
            debug_assert_eq!(self.working.symbol(id).map(|s| s.text.as_str()), Some(canonical.as_str()));
            if self.working.symbol_count() > before {
                self.symbol_round.insert(id, 1);
                self.stats(1).new_symbols += 1;
                self.admit(id);
            }
        }
        while let Some(seed) = self.queue.pop_front() {
            for _ in 0..self.config.branch_factor {
                self.grow(seed)?;
            }
        }
        Ok(())
    }

    /// Decomposes the working system into the conclusion's sub-system and
    /// closes the ledger.
    pub fn finish(mut self, partial: bool) -> SubsystemRun {
        let subsystem = decompose(&self.working, self.conclusion_id).expect("conclusion present");
        self.ledger.orphan_symbols = (self.working.symbol_count() - subsystem.symbols.len()) as u32;
        let last_round = self.round_stats.keys().next_back().copied().unwrap_or(0);
        self.ledger.rounds = (1..=last_round)
            .map(|round| self.round_stats.get(&round).copied().unwrap_or(RoundStats { round, ..RoundStats::default() }))
            .collect();
        self.ledger.partial = partial;
        self.ledger.finalize(self.config.n_ent);
        SubsystemRun { activity: self.activity, subsystem, ledger: self.ledger }
    }
}

/// Runs the full loop for one conclusion.
pub fn instantiate_subsystem(
    activity: &ActivitySpec,
    oracle: &dyn Oracle,
    config: &LoopConfig,
) -> Result<SubsystemRun, InstantiateError> {
    let mut run = SubsystemLoop::new(activity, oracle, config)?;
    match run.execute() {
        Ok(()) => Ok(run.finish(false)),
        Err(source) => Err(InstantiateError::Aborted { partial: Box::new(run.finish(true)), source }),
    }
}
